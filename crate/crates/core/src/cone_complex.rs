//! Lattices, basis-subset cones, face-closed complexes and parallel transport
//! across codimension-one cones.
//!
//! Component indices are 0-based in memory and 1-based wherever they are
//! printed or serialized.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{MirrorError, Result};

/// Integer vector in the basis `{D_i*}` of `Div_D(X)*`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn zero(m: usize) -> Self {
        LatticeVector(vec![0; m])
    }

    /// `D_i*`.
    pub fn unit(m: usize, i: usize) -> Self {
        let mut v = vec![0; m];
        v[i] = 1;
        LatticeVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn is_nonneg(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    /// Coordinate sum.
    pub fn height(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn support(&self) -> BasisCone {
        BasisCone::new(self.0.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, _)| i))
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| a * k).collect())
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The cone `sum_{i in S} R>=0 D_i*` for an index set `S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BasisCone(BTreeSet<usize>);

impl BasisCone {
    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        BasisCone(indices.into_iter().collect())
    }

    pub fn empty() -> Self {
        BasisCone(BTreeSet::new())
    }

    pub fn ray(i: usize) -> Self {
        BasisCone::new([i])
    }

    pub fn indices(&self) -> &BTreeSet<usize> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn is_face_of(&self, other: &BasisCone) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersection(&self, other: &BasisCone) -> BasisCone {
        BasisCone(self.0.intersection(&other.0).copied().collect())
    }

    /// All faces, including the empty cone and the cone itself.
    pub fn faces(&self) -> Vec<BasisCone> {
        let idx: Vec<usize> = self.0.iter().copied().collect();
        (0u64..(1u64 << idx.len()))
            .map(|mask| BasisCone::new(idx.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &i)| i)))
            .collect()
    }

    /// True if `v` is nonnegative with support inside this cone.
    pub fn contains_vector(&self, v: &LatticeVector) -> bool {
        v.0.iter().enumerate().all(|(i, &c)| c >= 0 && (c == 0 || self.0.contains(&i)))
    }
}

impl fmt::Display for BasisCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for BasisCone {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let one_based: Vec<usize> = self.0.iter().map(|i| i + 1).collect();
        one_based.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasisCone {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        if raw.contains(&0) {
            return Err(serde::de::Error::custom("cone indices are 1-based"));
        }
        Ok(BasisCone::new(raw.into_iter().map(|i| i - 1)))
    }
}

/// A face-closed set of basis cones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeComplex {
    m: usize,
    cones: BTreeSet<BasisCone>,
    dim: usize,
}

/// Face and intersection closure of `strata`.
pub fn build_complex(strata: &[BasisCone], m: usize) -> Result<ConeComplex> {
    build_complex_checked(strata, &[], m)
}

/// As [`build_complex`], rejecting closures that contain a cone from `empty`.
pub fn build_complex_checked(strata: &[BasisCone], empty: &[BasisCone], m: usize) -> Result<ConeComplex> {
    let mut cones = BTreeSet::new();
    cones.insert(BasisCone::empty());
    for s in strata {
        if let Some(&bad) = s.indices().iter().find(|&&i| i >= m) {
            return Err(MirrorError::InvalidDescriptor(format!("stratum {s} uses index {} > m = {m}", bad + 1)));
        }
        for f in s.faces() {
            cones.insert(f);
        }
    }
    if let Some(e) = empty.iter().find(|e| cones.contains(e)) {
        return Err(MirrorError::InconsistentPoset(e.to_string()));
    }
    let dim = cones.iter().map(|c| c.dim()).max().unwrap_or(0);
    Ok(ConeComplex { m, cones, dim })
}

impl ConeComplex {
    pub fn ambient_rank(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cones(&self) -> impl Iterator<Item = &BasisCone> {
        self.cones.iter()
    }

    pub fn len(&self) -> usize {
        self.cones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    pub fn contains(&self, c: &BasisCone) -> bool {
        self.cones.contains(c)
    }

    /// Cones that are not a proper face of another member.
    pub fn maximal_cones(&self) -> Vec<BasisCone> {
        self.cones
            .iter()
            .filter(|c| !self.cones.iter().any(|d| d != *c && c.is_face_of(d)))
            .cloned()
            .collect()
    }

    /// Cones of dimension `dim - 1`.
    pub fn codim_one_cones(&self) -> Vec<BasisCone> {
        if self.dim == 0 {
            return Vec::new();
        }
        self.cones.iter().filter(|c| c.dim() == self.dim - 1).cloned().collect()
    }

    /// Maximal cones having `c` as a face.
    pub fn maximal_cones_containing(&self, c: &BasisCone) -> Vec<BasisCone> {
        self.maximal_cones().into_iter().filter(|s| c.is_face_of(s)).collect()
    }

    pub fn contains_vector(&self, v: &LatticeVector) -> bool {
        v.dim() == self.m && v.is_nonneg() && self.cones.contains(&v.support())
    }

    /// Restriction to cones whose generators all satisfy `keep`.
    pub fn restrict<F: Fn(usize) -> bool>(&self, keep: F) -> ConeComplex {
        let cones: BTreeSet<BasisCone> = self.cones.iter().filter(|c| c.indices().iter().all(|&i| keep(i))).cloned().collect();
        let dim = cones.iter().map(|c| c.dim()).max().unwrap_or(0);
        ConeComplex { m: self.m, cones, dim }
    }
}

/// The member cone equal to `support(v)`.
pub fn min_cone(c: &ConeComplex, v: &LatticeVector) -> Result<BasisCone> {
    if v.dim() != c.m || !v.is_nonneg() {
        return Err(MirrorError::NotInComplex(format!("{v} is not a nonnegative vector of length {}", c.m)));
    }
    let s = v.support();
    if c.contains(&s) {
        Ok(s)
    } else {
        Err(MirrorError::NotInComplex(s.to_string()))
    }
}

/// `B(Z)` points of coordinate sum at most `height`, in lexicographic order.
pub fn integral_points(c: &ConeComplex, height: u32) -> Vec<LatticeVector> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; c.m];
    fn rec(c: &ConeComplex, i: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<LatticeVector>) {
        if i == cur.len() {
            let v = LatticeVector(cur.clone());
            if c.contains(&v.support()) {
                out.push(v);
            }
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(c, i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    rec(c, 0, height as i64, &mut cur, &mut out);
    out.sort();
    out
}

/// Identification of `Lambda_sigma1` with `Lambda_sigma2` fixing `Lambda_rho`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineChart {
    pub rho: BasisCone,
    pub sigma1: BasisCone,
    pub sigma2: BasisCone,
    /// The extra generator `u1 = D*_{i1}` of `sigma1`.
    pub u1: usize,
    /// The extra generator `i'1` of `sigma2`.
    pub u1_prime: usize,
    /// Image of `u1`, as a vector of `Div_D(X)*`.
    pub u2: LatticeVector,
    /// Matrix in the bases `(rho generators ascending, u1)` and
    /// `(rho generators ascending, D*_{i'1})`, columns are images.
    pub transport: Vec<Vec<i64>>,
}

impl AffineChart {
    /// Transport a vector of `Lambda_sigma1` (ambient coordinates).
    pub fn apply(&self, v: &LatticeVector) -> Result<LatticeVector> {
        if v.0.iter().enumerate().any(|(i, &c)| c != 0 && !self.sigma1.contains(i)) {
            return Err(MirrorError::Precondition(format!("{v} is not in the span of {}", self.sigma1)));
        }
        let mut out = v.clone();
        let a = out.0[self.u1];
        out.0[self.u1] = 0;
        let mut u2 = self.u2.clone();
        u2.0.resize(v.dim().max(u2.dim()), 0);
        out.0.resize(u2.dim(), 0);
        Ok(out.add(&u2.scale(a)))
    }

    /// The chart in the opposite direction.
    pub fn inverse(&self, numbers: &BTreeMap<usize, i64>) -> Result<AffineChart> {
        parallel_transport(&self.rho, &self.sigma2, &self.sigma1, numbers)
    }

    pub fn determinant(&self) -> i64 {
        determinant(&self.transport)
    }
}

/// Transport across `rho`, sending `u1 = D*_{i1}` to
/// `u2 = -D*_{i'1} - sum_j (D_{i_j}.Z_rho) D*_{i_j}`.
pub fn parallel_transport(
    rho: &BasisCone,
    sigma1: &BasisCone,
    sigma2: &BasisCone,
    numbers: &BTreeMap<usize, i64>,
) -> Result<AffineChart> {
    let check = |s: &BasisCone| -> Result<usize> {
        if !rho.is_face_of(s) || s.dim() != rho.dim() + 1 {
            return Err(MirrorError::Precondition(format!("{rho} is not a facet of {s}")));
        }
        Ok(*s.indices().difference(rho.indices()).next().unwrap())
    };
    let i1 = check(sigma1)?;
    let i1p = check(sigma2)?;
    if i1 == i1p {
        return Err(MirrorError::Precondition(format!("{sigma1} and {sigma2} coincide")));
    }
    let m = numbers.keys().chain(rho.indices()).chain([&i1, &i1p]).max().map_or(0, |x| x + 1);
    let m = m.max(sigma1.indices().iter().chain(sigma2.indices()).max().map_or(0, |x| x + 1));
    let mut u2 = vec![0i64; m];
    u2[i1p] = -1;
    let mut col = Vec::new();
    for &j in rho.indices() {
        let n = *numbers.get(&j).ok_or(MirrorError::MissingIntersection { rho: rho.to_string(), component: j + 1 })?;
        u2[j] = -n;
        col.push(-n);
    }
    col.push(-1);
    let k = rho.dim() + 1;
    let mut transport = vec![vec![0i64; k]; k];
    for (a, row) in transport.iter_mut().enumerate() {
        if a + 1 < k {
            row[a] = 1;
        }
        row[k - 1] = col[a];
    }
    Ok(AffineChart {
        rho: rho.clone(),
        sigma1: sigma1.clone(),
        sigma2: sigma2.clone(),
        u1: i1,
        u1_prime: i1p,
        u2: LatticeVector(u2),
        transport,
    })
}

impl AffineChart {
    /// Pad the ambient vectors to length `m`.
    pub fn with_rank(mut self, m: usize) -> Self {
        self.u2.0.resize(m, 0);
        self
    }
}

/// Integer determinant by cofactor expansion (small matrices only).
pub fn determinant(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    match n {
        0 => 1,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    a[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, &x)| x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * a[0][j] * determinant(&minor)
            })
            .sum(),
    }
}
