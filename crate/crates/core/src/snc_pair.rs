//! Pair descriptors, tropicalization, the log Calabi-Yau subcomplex and the
//! degeneration grading.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cone_complex::{build_complex_checked, BasisCone, ConeComplex, LatticeVector};
use crate::error::{MirrorError, Result};
use crate::trunc_ring::CurveClass;

/// Which sign of `K_X + D` the user asserts to be nef.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NefAssertion {
    /// `K_X + D` nef.
    Plus,
    /// `-(K_X + D)` nef.
    Minus,
    /// `K_X + D = 0`, so both hold.
    Both,
}

/// A codimension-one cone `rho` with its curve stratum `Z_rho`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveStratum {
    pub cone: BasisCone,
    /// `[Z_rho]` over the effective generators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<CurveClass>,
    /// `D_j . Z_rho` for `j` in `cone`, ascending.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numbers: Option<Vec<i64>>,
}

/// Declarative model of `(X, D)` or of a degeneration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDescriptor {
    pub name: String,
    /// `dim X`.
    pub dim: usize,
    pub components: Vec<String>,
    pub strata: Vec<BasisCone>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub empty_strata: Vec<BasisCone>,
    /// `a_i` with `K_X = sum (a_i - 1) D_i`.
    pub discrepancies: Vec<i64>,
    /// Names of the effective generators of `P`.
    pub class_names: Vec<String>,
    /// `C_k . D_i`, one row per generator.
    pub intersection_matrix: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curve_strata: Vec<CurveStratum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub central_fiber: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nef: Option<NefAssertion>,
}

impl PairDescriptor {
    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn rank(&self) -> usize {
        self.class_names.len()
    }

    /// `beta . D_i` for every component.
    pub fn intersections(&self, beta: &CurveClass) -> Vec<i64> {
        (0..self.m()).map(|i| self.dot(beta, i)).collect()
    }

    pub fn dot(&self, beta: &CurveClass, i: usize) -> i64 {
        beta.0.iter().zip(&self.intersection_matrix).map(|(b, row)| b * row[i]).sum()
    }

    /// `beta . (K_X + D) = sum a_i (beta . D_i)`.
    pub fn k_plus_d(&self, beta: &CurveClass) -> i64 {
        self.intersections(beta).iter().zip(&self.discrepancies).map(|(d, a)| d * a).sum()
    }

    pub fn curve_stratum(&self, rho: &BasisCone) -> Option<&CurveStratum> {
        self.curve_strata.iter().find(|c| &c.cone == rho)
    }

    /// `[Z_rho]`, if declared.
    pub fn stratum_class(&self, rho: &BasisCone) -> Option<CurveClass> {
        self.curve_stratum(rho).and_then(|c| c.class.clone())
    }

    /// `j -> D_j . Z_rho`, taken from the declared numbers or derived from the class.
    pub fn stratum_numbers(&self, rho: &BasisCone) -> Result<BTreeMap<usize, i64>> {
        let cs = self
            .curve_stratum(rho)
            .ok_or(MirrorError::MissingIntersection { rho: rho.to_string(), component: rho.indices().iter().next().map_or(0, |i| i + 1) })?;
        let mut out = BTreeMap::new();
        for (k, &j) in rho.indices().iter().enumerate() {
            let n = match (&cs.numbers, &cs.class) {
                (Some(ns), _) => ns[k],
                (None, Some(c)) => self.dot(c, j),
                (None, None) => return Err(MirrorError::MissingIntersection { rho: rho.to_string(), component: j + 1 }),
            };
            out.insert(j, n);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        let bad = |s: String| Err(MirrorError::InvalidDescriptor(s));
        if self.discrepancies.len() != m {
            return bad(format!("{} discrepancies for {m} components", self.discrepancies.len()));
        }
        if self.discrepancies.iter().any(|&a| a < 0) {
            return bad("discrepancies a_i must be >= 0".into());
        }
        if self.intersection_matrix.len() != self.rank() {
            return bad("intersection matrix needs one row per effective generator".into());
        }
        if self.intersection_matrix.iter().any(|r| r.len() != m) {
            return bad("intersection matrix rows must have one entry per component".into());
        }
        let distinct: BTreeSet<&BasisCone> = self.strata.iter().collect();
        if distinct.len() != self.strata.len() {
            return bad("an index set is listed twice; reducible intersections are not modelled".into());
        }
        let complex = build_complex_checked(&self.strata, &self.empty_strata, m)?;
        for cs in &self.curve_strata {
            if !complex.contains(&cs.cone) || cs.cone.dim() + 1 != self.dim {
                return bad(format!("curve stratum {} is not a codimension-one cone", cs.cone));
            }
            if let Some(c) = &cs.class {
                if c.rank() != self.rank() || !c.in_p() {
                    return bad(format!("class of Z_{} is not in P", cs.cone));
                }
            }
            if let Some(ns) = &cs.numbers {
                if ns.len() != cs.cone.dim() {
                    return bad(format!("Z_{} needs {} intersection numbers", cs.cone, cs.cone.dim()));
                }
                if let Some(c) = &cs.class {
                    for (k, &j) in cs.cone.indices().iter().enumerate() {
                        if self.dot(c, j) != ns[k] {
                            return bad(format!("D_{}.Z_{} = {} disagrees with its class", j + 1, cs.cone, ns[k]));
                        }
                    }
                }
            }
        }
        if let Some(cf) = &self.central_fiber {
            if cf.len() != m || cf.iter().any(|&c| c <= 0) {
                return bad("central fiber needs one positive coefficient per component".into());
            }
            for (k, row) in self.intersection_matrix.iter().enumerate() {
                let d: i64 = row.iter().zip(cf).map(|(a, b)| a * b).sum();
                if d != 0 {
                    return bad(format!("{} meets the central fiber with degree {d}", self.class_names[k]));
                }
            }
        }
        Ok(())
    }
}

/// `Trop(X)` together with the log Calabi-Yau subcomplex `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalSpace {
    pub full: ConeComplex,
    pub cy_sub: ConeComplex,
    pub n: usize,
    pub central_fiber: Option<Vec<i64>>,
}

pub fn tropicalize(d: &PairDescriptor) -> Result<TropicalSpace> {
    d.validate()?;
    let full = build_complex_checked(&d.strata, &d.empty_strata, d.m())?;
    let cy_sub = full.restrict(|i| d.discrepancies[i] == 0);
    Ok(TropicalSpace { full, cy_sub, n: d.dim, central_fiber: d.central_fiber.clone() })
}

/// Pure-dimensionality of `B`.
pub fn maximality_check(t: &TropicalSpace) -> bool {
    t.cy_sub.maximal_cones().iter().all(|c| c.dim() == t.n)
}

/// `deg p = <X_0, p>`.
pub fn grading(t: &TropicalSpace, p: &LatticeVector) -> Result<i64> {
    let cf = t.central_fiber.as_ref().ok_or(MirrorError::MissingCentralFiber)?;
    Ok(cf.iter().zip(&p.0).map(|(a, b)| a * b).sum())
}

/// Index set of `Z_p`; the empty set stands for `X` itself.
pub fn stratum_of(p: &LatticeVector) -> BasisCone {
    p.support()
}

/// Maximal cones are connected through shared codimension-one faces.
pub fn dual_graph_connected(c: &ConeComplex) -> bool {
    let maxes = c.maximal_cones();
    if maxes.is_empty() {
        return true;
    }
    let mut seen = vec![false; maxes.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..maxes.len() {
            if !seen[j] && maxes[i].intersection(&maxes[j]).dim() + 1 == maxes[i].dim() {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// A descriptor with its tropicalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    pub descriptor: PairDescriptor,
    pub trop: TropicalSpace,
}

impl Pair {
    pub fn new(descriptor: PairDescriptor) -> Result<Pair> {
        let trop = tropicalize(&descriptor)?;
        Ok(Pair { descriptor, trop })
    }

    pub fn m(&self) -> usize {
        self.descriptor.m()
    }

    pub fn rank(&self) -> usize {
        self.descriptor.rank()
    }

    pub fn class_names(&self) -> &[String] {
        &self.descriptor.class_names
    }

    /// For a surface whose `B` is a closed cycle of rays, the ray order
    /// starting at the smallest index and stepping to its smaller neighbour.
    pub fn boundary_cycle(&self) -> Result<Vec<usize>> {
        if self.trop.n != 2 || !maximality_check(&self.trop) {
            return Err(MirrorError::Unsupported("rank-2 structures need a maximal surface pair".into()));
        }
        let maxes = self.trop.cy_sub.maximal_cones();
        let mut nbrs: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for c in &maxes {
            let v: Vec<usize> = c.indices().iter().copied().collect();
            nbrs.entry(v[0]).or_default().push(v[1]);
            nbrs.entry(v[1]).or_default().push(v[0]);
        }
        if nbrs.values().any(|n| n.len() != 2) {
            return Err(MirrorError::Unsupported("B is not a closed cycle of rays".into()));
        }
        let start = *nbrs.keys().next().unwrap();
        let mut order = vec![start];
        let mut prev = start;
        let mut cur = *nbrs[&start].iter().min().unwrap();
        while cur != start {
            order.push(cur);
            if order.len() > nbrs.len() {
                return Err(MirrorError::Unsupported("ray cycle does not close".into()));
            }
            let n = &nbrs[&cur];
            let next = if n[0] == prev { n[1] } else { n[0] };
            prev = cur;
            cur = next;
        }
        if order.len() != nbrs.len() {
            return Err(MirrorError::Unsupported("B has more than one cycle of rays".into()));
        }
        Ok(order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn blowup() -> PairDescriptor {
        let cone = |s: &[usize]| BasisCone::new(s.iter().map(|i| i - 1));
        PairDescriptor {
            name: "blowup".into(),
            dim: 2,
            components: (1..=4).map(|i| format!("D{i}")).collect(),
            strata: vec![cone(&[1, 2]), cone(&[2, 3]), cone(&[3, 4]), cone(&[4, 1])],
            empty_strata: vec![],
            discrepancies: vec![0; 4],
            class_names: vec!["C1".into(), "C2".into(), "C3".into()],
            intersection_matrix: vec![vec![-1, 1, 0, 1], vec![1, 0, 1, 0], vec![1, 0, 0, 0]],
            curve_strata: vec![],
            central_fiber: None,
            nef: Some(NefAssertion::Both),
        }
    }

    #[test]
    fn blowup_is_maximal() {
        let t = tropicalize(&blowup()).unwrap();
        assert_eq!(t.cy_sub, t.full);
        assert!(maximality_check(&t));
        assert!(dual_graph_connected(&t.cy_sub));
        let pair = Pair::new(blowup()).unwrap();
        assert_eq!(pair.boundary_cycle().unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn no_cy_components() {
        let mut d = blowup();
        d.discrepancies = vec![1; 4];
        let t = tropicalize(&d).unwrap();
        assert_eq!(t.cy_sub.len(), 1);
        assert!(!maximality_check(&t));
    }

    #[test]
    fn missing_face_breaks_maximality() {
        let cone = |s: &[usize]| BasisCone::new(s.iter().map(|i| i - 1));
        let mut d = blowup();
        d.components.push("D5".into());
        d.discrepancies.push(0);
        for row in &mut d.intersection_matrix {
            row.push(0);
        }
        d.strata.push(cone(&[5]));
        let t = tropicalize(&d).unwrap();
        assert!(!maximality_check(&t));
    }

    #[test]
    fn grading_is_linear() {
        let mut t = tropicalize(&blowup()).unwrap();
        assert!(matches!(grading(&t, &LatticeVector(vec![1, 0, 0, 0])), Err(MirrorError::MissingCentralFiber)));
        t.central_fiber = Some(vec![1, 1, 1, 1]);
        assert_eq!(grading(&t, &LatticeVector(vec![2, 3, 0, 0])).unwrap(), 5);
        assert_eq!(grading(&t, &LatticeVector(vec![0, 1, 0, 0])).unwrap(), 1);
        assert_eq!(grading(&t, &LatticeVector::zero(4)).unwrap(), 0);
    }

    #[test]
    fn strata_of_points() {
        assert_eq!(stratum_of(&LatticeVector(vec![1, 0, 0, 0])), BasisCone::ray(0));
        assert_eq!(stratum_of(&LatticeVector::zero(4)), BasisCone::empty());
        assert_eq!(stratum_of(&LatticeVector(vec![1, 1, 0, 0])), BasisCone::new([0, 1]));
    }

    #[test]
    fn duplicate_strata_rejected() {
        let mut d = blowup();
        d.strata.push(d.strata[0].clone());
        assert!(d.validate().is_err());
    }
}
