//! The theta module `R_I`, products from invariant tables, multiplication
//! tables, associativity and the graded ring of a degeneration.

use std::cell::RefCell;
use std::collections::BTreeMap;

use crate::class_solver::{assemble_product, candidates};
use crate::cone_complex::LatticeVector;
use crate::error::{MirrorError, MissingInvariant, Result};
use crate::snc_pair::{grading, PairDescriptor, Pair};
use crate::trunc_ring::{CurveClass, TruncatedSeries, TruncationIdeal, Q};

/// Finite `A_I`-combination of theta functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaElement {
    rank: usize,
    terms: BTreeMap<LatticeVector, TruncatedSeries>,
}

impl ThetaElement {
    pub fn zero(rank: usize) -> Self {
        ThetaElement { rank, terms: BTreeMap::new() }
    }

    /// `theta_p`.
    pub fn theta(p: &LatticeVector, rank: usize) -> Self {
        let mut e = ThetaElement::zero(rank);
        e.add_term(p.clone(), TruncatedSeries::one_series(rank));
        e
    }

    pub fn from_terms<T: IntoIterator<Item = (LatticeVector, TruncatedSeries)>>(rank: usize, terms: T) -> Self {
        let mut e = ThetaElement::zero(rank);
        for (p, s) in terms {
            e.add_term(p, s);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn add_term(&mut self, p: LatticeVector, s: TruncatedSeries) {
        let slot = self.terms.entry(p.clone()).or_insert_with(|| TruncatedSeries::zero_series(self.rank));
        *slot = slot.add(&s);
        if slot.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LatticeVector, &TruncatedSeries)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &LatticeVector) -> TruncatedSeries {
        self.terms.get(p).cloned().unwrap_or_else(|| TruncatedSeries::zero_series(self.rank))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Vec<LatticeVector> {
        self.terms.keys().cloned().collect()
    }

    pub fn add(&self, o: &ThetaElement) -> ThetaElement {
        let mut e = self.clone();
        for (p, s) in &o.terms {
            e.add_term(p.clone(), s.clone());
        }
        e
    }

    pub fn sub(&self, o: &ThetaElement) -> ThetaElement {
        let mut e = self.clone();
        for (p, s) in &o.terms {
            e.add_term(p.clone(), s.neg());
        }
        e
    }

    /// Multiply every coefficient by `c`.
    pub fn scale(&self, c: &TruncatedSeries, ideal: &TruncationIdeal) -> ThetaElement {
        ThetaElement::from_terms(self.rank, self.terms.iter().map(|(p, s)| (p.clone(), s.mul(c, ideal))))
    }

    /// Coefficient of `t^beta theta_r`.
    pub fn coefficient(&self, r: &LatticeVector, beta: &CurveClass) -> Q {
        self.coeff(r).coeff(beta)
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(p, s)| {
                let th = format!("theta_{}", point_label(p));
                if s.is_one() {
                    th
                } else if s.len() == 1 {
                    format!("{}*{th}", s.render(names))
                } else {
                    format!("({})*{th}", s.render(names))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// `p3` for `D_3*`, `0` for the origin, coordinates otherwise.
pub fn point_label(p: &LatticeVector) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let nz: Vec<usize> = (0..p.dim()).filter(|&i| p.0[i] != 0).collect();
    if nz.len() == 1 && p.0[nz[0]] == 1 {
        return format!("p{}", nz[0] + 1);
    }
    p.to_string()
}

type TableKey = (LatticeVector, LatticeVector, LatticeVector, CurveClass);

/// Supplied counts `N^beta_pqr`, symmetric in `(p, q)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct InvariantTable {
    entries: BTreeMap<TableKey, Q>,
}

fn key(p: &LatticeVector, q: &LatticeVector, r: &LatticeVector, beta: &CurveClass) -> TableKey {
    let (a, b) = if p <= q { (p, q) } else { (q, p) };
    (a.clone(), b.clone(), r.clone(), beta.clone())
}

impl InvariantTable {
    pub fn new() -> Self {
        InvariantTable::default()
    }

    /// Insert `N^beta_pqr = n`; classes with `beta.(K_X+D) != 0` are refused.
    pub fn insert(&mut self, d: &PairDescriptor, p: &LatticeVector, q: &LatticeVector, r: &LatticeVector, beta: &CurveClass, n: Q) -> Result<()> {
        let m = d.m();
        if p.dim() != m || q.dim() != m || r.dim() != m || beta.rank() != d.rank() || !beta.in_p() {
            return Err(MirrorError::InvalidTable(format!("entry ({p},{q},{r},{beta}) has the wrong shape")));
        }
        if d.k_plus_d(beta) != 0 {
            return Err(MirrorError::InvalidTable(format!("class {beta} has beta.(K_X+D) = {} != 0", d.k_plus_d(beta))));
        }
        let k = key(p, q, r, beta);
        if let Some(old) = self.entries.get(&k) {
            if *old != n {
                return Err(MirrorError::InvalidTable(format!("conflicting values for ({p},{q},{r},{beta})")));
            }
        }
        self.entries.insert(k, n);
        Ok(())
    }

    pub fn get(&self, p: &LatticeVector, q: &LatticeVector, r: &LatticeVector, beta: &CurveClass) -> Option<&Q> {
        self.entries.get(&key(p, q, r, beta))
    }

    /// Entries with `p <= q`.
    pub fn entries(&self) -> impl Iterator<Item = (&TableKey, &Q)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// A copy with one entry shifted by `delta`.
    pub fn perturbed(&self, p: &LatticeVector, q: &LatticeVector, r: &LatticeVector, beta: &CurveClass, delta: &Q) -> InvariantTable {
        let mut t = self.clone();
        let k = key(p, q, r, beta);
        let v = t.entries.get(&k).cloned().unwrap_or_else(|| Q::from_integer(0.into()));
        t.entries.insert(k, v + delta);
        t
    }
}

/// `theta_p theta_q = theta_{p+q}` when `p, q` share a cone, else `0`.
pub fn zeroth_product(pair: &Pair, p: &LatticeVector, q: &LatticeVector) -> ThetaElement {
    let s = p.add(q);
    if pair.trop.cy_sub.contains(&s.support()) {
        ThetaElement::theta(&s, pair.rank())
    } else {
        ThetaElement::zero(pair.rank())
    }
}

/// Drop every term with `beta != 0`.
pub fn reduce_mod_m(x: &ThetaElement) -> ThetaElement {
    ThetaElement::from_terms(x.rank, x.terms.iter().map(|(p, s)| (p.clone(), s.constant_part())))
}

/// `theta_p theta_q` from the candidate set and the table.
pub fn product(pair: &Pair, p: &LatticeVector, q: &LatticeVector, table: &InvariantTable, ideal: &TruncationIdeal) -> Result<ThetaElement> {
    // theta_0 is the unit.
    if p.is_zero() || q.is_zero() {
        let other = if p.is_zero() { q } else { p };
        candidates(pair, p, q, ideal)?;
        return Ok(ThetaElement::theta(other, pair.rank()));
    }
    let cands = candidates(pair, p, q, ideal)?;
    let parts = assemble_product(&cands, table, ideal)?;
    if pair.trop.central_fiber.is_some() {
        let want = grading(&pair.trop, p)? + grading(&pair.trop, q)?;
        for (r, _) in &parts {
            if grading(&pair.trop, r)? != want {
                return Err(MirrorError::Inconsistent(format!("product of {p} and {q} leaves degree {want} at {r}")));
            }
        }
    }
    Ok(ThetaElement::from_terms(pair.rank(), parts))
}

/// Product engine with a cache of basis products.
pub struct ThetaAlgebra<'a> {
    pub pair: &'a Pair,
    pub table: &'a InvariantTable,
    pub ideal: &'a TruncationIdeal,
    cache: RefCell<BTreeMap<(LatticeVector, LatticeVector), ThetaElement>>,
}

impl<'a> ThetaAlgebra<'a> {
    pub fn new(pair: &'a Pair, table: &'a InvariantTable, ideal: &'a TruncationIdeal) -> Self {
        ThetaAlgebra { pair, table, ideal, cache: RefCell::new(BTreeMap::new()) }
    }

    pub fn rank(&self) -> usize {
        self.pair.rank()
    }

    pub fn product(&self, p: &LatticeVector, q: &LatticeVector) -> Result<ThetaElement> {
        let k = if p <= q { (p.clone(), q.clone()) } else { (q.clone(), p.clone()) };
        if let Some(v) = self.cache.borrow().get(&k) {
            return Ok(v.clone());
        }
        let v = product(self.pair, &k.0, &k.1, self.table, self.ideal)?;
        self.cache.borrow_mut().insert(k, v.clone());
        Ok(v)
    }

    /// Bilinear extension of [`ThetaAlgebra::product`].
    pub fn mul(&self, x: &ThetaElement, y: &ThetaElement) -> Result<ThetaElement> {
        let mut out = ThetaElement::zero(self.rank());
        let mut missing = Vec::new();
        for (p, a) in x.terms() {
            for (q, b) in y.terms() {
                let ab = a.mul(b, self.ideal);
                if ab.is_zero() {
                    continue;
                }
                match self.product(p, q) {
                    Ok(pq) => out = out.add(&pq.scale(&ab, self.ideal)),
                    Err(MirrorError::MissingInvariant(ms)) => missing.extend(ms),
                    Err(e) => return Err(e),
                }
            }
        }
        if !missing.is_empty() {
            missing.sort();
            missing.dedup();
            return Err(MirrorError::MissingInvariant(missing));
        }
        Ok(out)
    }
}

/// Symmetric table of products over `points`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultTable {
    pub points: Vec<LatticeVector>,
    pub entries: Vec<Vec<ThetaElement>>,
}

pub fn mult_table(pair: &Pair, points: &[LatticeVector], table: &InvariantTable, ideal: &TruncationIdeal) -> Result<MultTable> {
    let alg = ThetaAlgebra::new(pair, table, ideal);
    let mut entries = Vec::new();
    let mut missing = Vec::new();
    for p in points {
        let mut row = Vec::new();
        for q in points {
            match alg.product(p, q) {
                Ok(v) => row.push(v),
                Err(MirrorError::MissingInvariant(ms)) => {
                    missing.extend(ms);
                    row.push(ThetaElement::zero(pair.rank()));
                }
                Err(e) => return Err(e),
            }
        }
        entries.push(row);
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(MirrorError::MissingInvariant(missing));
    }
    Ok(MultTable { points: points.to_vec(), entries })
}

/// A quadratic relation `theta_a theta_b - rhs` among generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub a: LatticeVector,
    pub b: LatticeVector,
    pub rhs: ThetaElement,
}

impl Relation {
    pub fn render(&self, names: &[String]) -> String {
        let lhs = format!("theta_{}*theta_{}", point_label(&self.a), point_label(&self.b));
        if self.rhs.is_zero() {
            return lhs;
        }
        let mut s = lhs;
        for (p, c) in self.rhs.terms() {
            let mono = if p.is_zero() { String::new() } else { format!("theta_{}", point_label(p)) };
            for (beta, n) in c.terms() {
                let t = if beta.is_zero() { String::new() } else { format!("t^{{{}}}", beta.display_with(names)) };
                let body = match (t.is_empty(), mono.is_empty()) {
                    (true, true) => "1".to_string(),
                    (true, false) => mono.clone(),
                    (false, true) => t,
                    (false, false) => format!("{t}*{mono}"),
                };
                let neg = *n < Q::from_integer(0.into());
                let abs = if neg { -n.clone() } else { n.clone() };
                let coef = if abs == Q::from_integer(1.into()) { String::new() } else { format!("{abs}*") };
                s.push_str(if neg { " + " } else { " - " });
                s.push_str(&coef);
                s.push_str(&body);
            }
        }
        s
    }
}

/// Products of two non-unit generators that land back in the span of
/// `theta_0` and the generators. Only generated when the table is closed.
pub fn relations(t: &MultTable) -> Vec<Relation> {
    let gens: Vec<&LatticeVector> = t.points.iter().filter(|p| !p.is_zero()).collect();
    let mut out = Vec::new();
    for (i, p) in t.points.iter().enumerate() {
        for (j, q) in t.points.iter().enumerate() {
            if j < i || p.is_zero() || q.is_zero() {
                continue;
            }
            let e = &t.entries[i][j];
            if e.terms().all(|(r, _)| r.is_zero() || gens.contains(&r)) {
                out.push(Relation { a: p.clone(), b: q.clone(), rhs: e.clone() });
            }
        }
    }
    out
}

/// A violation of the associativity identity at `t^beta theta_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub p1: LatticeVector,
    pub p2: LatticeVector,
    pub p3: LatticeVector,
    pub r: LatticeVector,
    pub beta: CurveClass,
    pub lhs: Q,
    pub rhs: Q,
}

/// Compare `(theta_a theta_b) theta_c` with `theta_a (theta_b theta_c)` for
/// every ordered triple of `points`.
pub fn associativity_check(pair: &Pair, points: &[LatticeVector], table: &InvariantTable, ideal: &TruncationIdeal) -> Result<Vec<Violation>> {
    let alg = ThetaAlgebra::new(pair, table, ideal);
    let mut violations = Vec::new();
    let mut missing: Vec<MissingInvariant> = Vec::new();
    let rank = pair.rank();
    for a in points {
        for b in points {
            for c in points {
                let sides = (|| -> Result<(ThetaElement, ThetaElement)> {
                    let l = alg.mul(&alg.product(a, b)?, &ThetaElement::theta(c, rank))?;
                    let r = alg.mul(&ThetaElement::theta(a, rank), &alg.product(b, c)?)?;
                    Ok((l, r))
                })();
                let (l, r) = match sides {
                    Ok(v) => v,
                    Err(MirrorError::MissingInvariant(ms)) => {
                        missing.extend(ms);
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let mut keys: Vec<(LatticeVector, CurveClass)> = Vec::new();
                for e in [&l, &r] {
                    for (pt, s) in e.terms() {
                        for (beta, _) in s.terms() {
                            keys.push((pt.clone(), beta.clone()));
                        }
                    }
                }
                keys.sort();
                keys.dedup();
                for (pt, beta) in keys {
                    let (x, y) = (l.coefficient(&pt, &beta), r.coefficient(&pt, &beta));
                    if x != y {
                        violations.push(Violation { p1: a.clone(), p2: b.clone(), p3: c.clone(), r: pt, beta, lhs: x, rhs: y });
                    }
                }
            }
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(MirrorError::MissingInvariant(missing));
    }
    Ok(violations)
}

/// Products in the graded ring of a degeneration, grouped by total degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedEntry {
    pub d1: i64,
    pub d2: i64,
    pub p: LatticeVector,
    pub q: LatticeVector,
    pub product: ThetaElement,
}

/// The point `p / deg p` of `B((1/d)Z)` as numerators over `deg p`.
pub fn scaled_point(pair: &Pair, p: &LatticeVector) -> Result<(Vec<i64>, i64)> {
    Ok((p.0.clone(), grading(&pair.trop, p)?))
}

/// Graded multiplication table for total degree up to `max_degree`.
pub fn graded_table(pair: &Pair, max_degree: i64, table: &InvariantTable, ideal: &TruncationIdeal) -> Result<Vec<GradedEntry>> {
    let cf = pair.trop.central_fiber.as_ref().ok_or(MirrorError::MissingCentralFiber)?;
    let min_c = *cf.iter().min().unwrap_or(&1);
    let height = (max_degree / min_c.max(1)).max(0) as u32;
    let pts: Vec<LatticeVector> = crate::cone_complex::integral_points(&pair.trop.cy_sub, height)
        .into_iter()
        .filter(|p| !p.is_zero())
        .filter(|p| grading(&pair.trop, p).map(|g| g <= max_degree).unwrap_or(false))
        .collect();
    let alg = ThetaAlgebra::new(pair, table, ideal);
    let mut out = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i..] {
            let (d1, d2) = (grading(&pair.trop, p)?, grading(&pair.trop, q)?);
            if d1 + d2 > max_degree {
                continue;
            }
            out.push(GradedEntry { d1, d2, p: p.clone(), q: q.clone(), product: alg.product(p, q)? });
        }
    }
    out.sort_by(|a, b| (a.d1 + a.d2, &a.p, &a.q).cmp(&(b.d1 + b.d2, &b.p, &b.q)));
    Ok(out)
}
