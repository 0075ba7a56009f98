//! Candidate outputs `(r, beta)` of a structure constant, cut out by the
//! intersection constraints and the virtual-dimension filter.

use std::collections::BTreeMap;

use crate::cone_complex::LatticeVector;
use crate::error::{MirrorError, MissingInvariant, Result};
use crate::snc_pair::{Pair, PairDescriptor};
use crate::theta_algebra::InvariantTable;
use crate::trunc_ring::{CurveClass, TruncatedSeries, TruncationIdeal, Q};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Candidate {
    pub r: LatticeVector,
    pub beta: CurveClass,
    /// Only constant maps contribute (`beta = 0`, `N = 1`).
    pub forced_by_constants: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pub p: LatticeVector,
    pub q: LatticeVector,
    pub entries: Vec<Candidate>,
    /// Nonzero classes below the bound meeting every component trivially.
    /// Each one gives an unbounded family of outputs once `I` is raised.
    pub kernel_classes: Vec<CurveClass>,
}

impl CandidateSet {
    pub fn pairs(&self) -> Vec<(LatticeVector, CurveClass)> {
        self.entries.iter().map(|c| (c.r.clone(), c.beta.clone())).collect()
    }
}

fn check_point(pair: &Pair, v: &LatticeVector) -> Result<()> {
    if !pair.trop.cy_sub.contains_vector(v) {
        return Err(MirrorError::Precondition(format!("{v} is not an integral point of B")));
    }
    Ok(())
}

/// A curve through a general point of a curve stratum `Z_r` either contains
/// `Z_r` or has a component meeting some `D_j`, `j in r`, positively.
pub fn meets_stratum(d: &PairDescriptor, beta: &CurveClass, r: &LatticeVector) -> bool {
    let rho = r.support();
    if beta.is_zero() || r.is_zero() || rho.dim() + 1 != d.dim {
        return true;
    }
    let Some(z) = d.stratum_class(&rho) else {
        return true;
    };
    if beta.sub(&z).in_p() {
        return true;
    }
    let mut sub = vec![0i64; beta.rank()];
    loop {
        let mut k = 0;
        while k < sub.len() {
            if sub[k] < beta.0[k] {
                sub[k] += 1;
                break;
            }
            sub[k] = 0;
            k += 1;
        }
        if k == sub.len() {
            return false;
        }
        let part = CurveClass(sub.clone());
        if rho.indices().iter().any(|&j| d.dot(&part, j) > 0) {
            return true;
        }
    }
}

/// All `(r, beta)` with `beta` in `P \ I` allowed by the linear constraints.
pub fn candidates(pair: &Pair, p: &LatticeVector, q: &LatticeVector, ideal: &TruncationIdeal) -> Result<CandidateSet> {
    check_point(pair, p)?;
    check_point(pair, q)?;
    let d = &pair.descriptor;
    if ideal.rank() != d.rank() {
        return Err(MirrorError::Precondition(format!("ideal has {} weights for {} generators", ideal.rank(), d.rank())));
    }
    let pq = p.add(q);
    let mut entries = Vec::new();
    let mut kernel_classes = Vec::new();
    for beta in ideal.classes_below() {
        let bd = d.intersections(&beta);
        if !beta.is_zero() && bd.iter().all(|&x| x == 0) {
            kernel_classes.push(beta.clone());
        }
        if d.k_plus_d(&beta) != 0 {
            continue;
        }
        let r = pq.sub(&LatticeVector(bd));
        if !r.is_nonneg() || !pair.trop.full.contains(&r.support()) {
            continue;
        }
        // Outputs outside B are already excluded by the dimension filter.
        assert!(pair.trop.cy_sub.contains(&r.support()), "S_I closure violated by {r}, {beta}");
        if !meets_stratum(d, &beta, &r) {
            continue;
        }
        let forced = beta.is_zero();
        entries.push(Candidate { r, beta, forced_by_constants: forced });
    }
    entries.sort();
    Ok(CandidateSet { p: p.clone(), q: q.clone(), entries, kernel_classes })
}

/// `alpha_pqr = sum N^beta_pqr t^beta` over a candidate set.
pub fn assemble_product(
    cands: &CandidateSet,
    table: &InvariantTable,
    ideal: &TruncationIdeal,
) -> Result<Vec<(LatticeVector, TruncatedSeries)>> {
    let rank = ideal.rank();
    let mut out: BTreeMap<LatticeVector, TruncatedSeries> = BTreeMap::new();
    let mut missing = Vec::new();
    for c in &cands.entries {
        let n: Q = if c.forced_by_constants {
            Q::from_integer(1.into())
        } else {
            match table.get(&cands.p, &cands.q, &c.r, &c.beta) {
                Some(n) => n.clone(),
                None => {
                    missing.push(MissingInvariant { p: cands.p.clone(), q: cands.q.clone(), r: c.r.clone(), beta: c.beta.clone() });
                    continue;
                }
            }
        };
        let slot = out.entry(c.r.clone()).or_insert_with(|| TruncatedSeries::zero_series(rank));
        *slot = slot.add(&TruncatedSeries::t_pow(&c.beta, n, ideal));
    }
    if !missing.is_empty() {
        return Err(MirrorError::MissingInvariant(missing));
    }
    Ok(out.into_iter().filter(|(_, s)| !s.is_zero()).collect())
}
