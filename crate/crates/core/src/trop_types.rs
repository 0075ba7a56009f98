//! Tropical types of (punctured) stable log maps: node equations, toric
//! balancing, the basic monoid as a moduli cone, puncture monoids.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cone_complex::BasisCone;
use crate::error::{MirrorError, Result};
use crate::trunc_ring::{q, Q};

mod one_based {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(i: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*i as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let i = u64::deserialize(d)?;
        if i == 0 {
            return Err(serde::de::Error::custom("vertex indices are 1-based"));
        }
        Ok(i as usize - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegKind {
    Marked,
    Punctured,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    /// `sigma_eta`, as indices into `rays`.
    pub cone: BasisCone,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    #[serde(with = "one_based")]
    pub from: usize,
    #[serde(with = "one_based")]
    pub to: usize,
    /// `u_q`, ambient coordinates, oriented `from -> to`.
    pub u: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    #[serde(with = "one_based")]
    pub vertex: usize,
    /// Contact order with each component.
    pub contact: Vec<i64>,
    pub kind: LegKind,
}

/// A combinatorial type in an ambient lattice `Z^d`, whose cones are spanned
/// by the given ray generators (unit vectors for `Div_D(X)*` coordinates).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TropicalType {
    pub name: String,
    pub rays: Vec<Vec<i64>>,
    pub vertices: Vec<Vertex>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub legs: Vec<Leg>,
}

impl TropicalType {
    /// Type in `Z^m` with unit rays.
    pub fn in_divisor_coords(name: &str, m: usize, vertices: Vec<Vertex>, edges: Vec<Edge>, legs: Vec<Leg>) -> TropicalType {
        let rays = (0..m).map(|i| (0..m).map(|j| i64::from(i == j)).collect()).collect();
        TropicalType { name: name.into(), rays, vertices, edges, legs }
    }

    pub fn ambient_dim(&self) -> usize {
        self.rays.first().map_or(0, |r| r.len())
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.ambient_dim();
        let m = self.rays.len();
        let bad = |s: String| Err(MirrorError::Precondition(s));
        if self.rays.iter().any(|r| r.len() != d) {
            return bad("rays of different lengths".into());
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.cone.indices().iter().any(|&j| j >= m) {
                return bad(format!("vertex {} uses an unknown ray", i + 1));
            }
            let gens: Vec<Vec<Q>> = v.cone.indices().iter().map(|&j| self.rays[j].iter().map(|&x| q(x)).collect()).collect();
            if rank(&gens) != gens.len() {
                return bad(format!("cone of vertex {} is not simplicial", i + 1));
            }
        }
        for e in &self.edges {
            if e.from >= self.vertices.len() || e.to >= self.vertices.len() || e.u.len() != d {
                return bad("edge endpoints or slope out of range".into());
            }
        }
        for l in &self.legs {
            if l.vertex >= self.vertices.len() || l.contact.len() != m {
                return bad("leg vertex or contact order out of range".into());
            }
            if l.kind == LegKind::Marked && l.contact.iter().any(|&c| c < 0) {
                return bad("marked legs need nonnegative contact orders".into());
            }
        }
        Ok(())
    }

    /// `sum_i u_i r_i` for a leg.
    pub fn leg_vector(&self, l: &Leg) -> Vec<i64> {
        let mut out = vec![0; self.ambient_dim()];
        for (c, r) in l.contact.iter().zip(&self.rays) {
            for (o, x) in out.iter_mut().zip(r) {
                *o += c * x;
            }
        }
        out
    }
}

/// Vertex positions and edge lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub positions: Vec<Vec<Q>>,
    pub lengths: Vec<Q>,
}

/// Coefficients of `v` on the rays of `cone`, if `v` is in their span.
fn cone_coords(t: &TropicalType, cone: &BasisCone, v: &[Q]) -> Option<Vec<Q>> {
    let idx: Vec<usize> = cone.indices().iter().copied().collect();
    let d = t.ambient_dim();
    // Solve sum x_j r_j = v.
    let mut rows: Vec<Vec<Q>> = (0..d)
        .map(|i| {
            let mut row: Vec<Q> = idx.iter().map(|&j| q(t.rays[j][i])).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let piv = row_reduce(&mut rows, idx.len());
    if rows.iter().any(|r| r[..idx.len()].iter().all(|x| x.is_zero()) && !r[idx.len()].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); idx.len()];
    for (r, &c) in piv.iter().enumerate() {
        x[c] = rows[r][idx.len()].clone();
    }
    Some(x)
}

/// `V_to - V_from = l u` on every edge, positions in their cones, lengths `>= 0`.
pub fn node_equation_check(t: &TropicalType, a: &Assignment) -> Result<bool> {
    t.validate()?;
    let d = t.ambient_dim();
    if a.positions.len() != t.vertices.len() || a.lengths.len() != t.edges.len() || a.positions.iter().any(|p| p.len() != d) {
        return Err(MirrorError::Precondition("assignment does not match the type".into()));
    }
    for (i, (v, p)) in t.vertices.iter().zip(&a.positions).enumerate() {
        match cone_coords(t, &v.cone, p) {
            Some(x) if x.iter().all(|c| !c.is_negative()) => {}
            _ => return Err(MirrorError::Precondition(format!("vertex {} lies outside its cone {}", i + 1, v.cone))),
        }
    }
    if a.lengths.iter().any(|l| l.is_negative()) {
        return Err(MirrorError::Precondition("negative edge length".into()));
    }
    Ok(t.edges.iter().zip(&a.lengths).all(|(e, l)| {
        (0..d).all(|i| &a.positions[e.to][i] - &a.positions[e.from][i] == l * q(e.u[i]))
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexBalance {
    pub vertex: usize,
    pub sum: Vec<i64>,
    pub balanced: bool,
}

/// Outgoing edge slopes plus leg vectors at each vertex; toric case only.
pub fn balancing_check(t: &TropicalType, toric: bool) -> Result<Vec<VertexBalance>> {
    if !toric {
        return Err(MirrorError::Unsupported("balancing with the non-toric correction term".into()));
    }
    t.validate()?;
    let d = t.ambient_dim();
    let mut sums = vec![vec![0i64; d]; t.vertices.len()];
    for e in &t.edges {
        for i in 0..d {
            sums[e.from][i] += e.u[i];
            sums[e.to][i] -= e.u[i];
        }
    }
    for l in &t.legs {
        for (s, x) in sums[l.vertex].iter_mut().zip(t.leg_vector(l)) {
            *s += x;
        }
    }
    Ok(sums.into_iter().enumerate().map(|(vertex, sum)| VertexBalance { vertex, balanced: sum.iter().all(|&x| x == 0), sum }).collect())
}

/// `Q^vee`: nonnegative ray coefficients per vertex and lengths per edge,
/// subject to the edge equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuliCone {
    /// Variable names, `V<i>.<ray>` and `l<k>`.
    pub variables: Vec<String>,
    /// Edge equations, one row per ambient coordinate and edge.
    pub equations: Vec<Vec<i64>>,
    /// Primitive integral generators of the extreme rays.
    pub rays: Vec<Vec<i64>>,
    pub dim: usize,
}

impl ModuliCone {
    /// The cone is rational, so any nonzero ray has an integral point.
    pub fn has_integral_curve(&self) -> bool {
        !self.rays.is_empty()
    }
}

const MAX_VARIABLES: usize = 16;

/// Linear system of the moduli cone, with variable names.
pub fn edge_system(t: &TropicalType) -> Result<(Vec<String>, Vec<Vec<i64>>)> {
    t.validate()?;
    let d = t.ambient_dim();
    let mut names = Vec::new();
    let mut offset = Vec::new();
    for (i, v) in t.vertices.iter().enumerate() {
        offset.push(names.len());
        for j in v.cone.indices() {
            names.push(format!("V{}.{}", i + 1, j + 1));
        }
    }
    let lstart = names.len();
    for k in 0..t.edges.len() {
        names.push(format!("l{}", k + 1));
    }
    let mut eqs = Vec::new();
    for (k, e) in t.edges.iter().enumerate() {
        for i in 0..d {
            let mut row = vec![0i64; names.len()];
            for (s, j) in t.vertices[e.to].cone.indices().iter().enumerate() {
                row[offset[e.to] + s] += t.rays[*j][i];
            }
            for (s, j) in t.vertices[e.from].cone.indices().iter().enumerate() {
                row[offset[e.from] + s] -= t.rays[*j][i];
            }
            row[lstart + k] -= e.u[i];
            if row.iter().any(|&x| x != 0) {
                eqs.push(row);
            }
        }
    }
    Ok((names, eqs))
}

/// The moduli cone of tropical curves of type `t`; its dual is the basic monoid.
pub fn basic_monoid(t: &TropicalType) -> Result<ModuliCone> {
    let (names, eqs) = edge_system(t)?;
    let n = names.len();
    if n > MAX_VARIABLES {
        return Err(MirrorError::Unsupported(format!("{n} variables exceed the enumeration cap of {MAX_VARIABLES}")));
    }
    let a: Vec<Vec<Q>> = eqs.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    let mut rays: Vec<Vec<i64>> = Vec::new();
    // Extreme rays are the solutions with minimal support.
    for mask in 1u32..(1u32 << n) {
        let cols: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<Q>> = a.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
        let ker = kernel(&sub, cols.len());
        if ker.len() != 1 {
            continue;
        }
        let v = &ker[0];
        let sign = if v[0].is_positive() { 1 } else { -1 };
        if v.iter().any(|x| x.is_zero() || x.signum() != q(sign)) {
            continue;
        }
        let mut full = vec![Q::zero(); n];
        for (k, &c) in cols.iter().enumerate() {
            full[c] = &v[k] * q(sign);
        }
        rays.push(integral(&full));
    }
    rays.sort();
    let rq: Vec<Vec<Q>> = rays.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    let dim = rank(&rq);
    Ok(ModuliCone { variables: names, equations: eqs, rays, dim })
}

/// `dim ker` of the edge system, ignoring the sign constraints.
pub fn kernel_dimension(t: &TropicalType) -> Result<usize> {
    let (names, eqs) = edge_system(t)?;
    let a: Vec<Vec<Q>> = eqs.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    Ok(names.len() - rank(&a))
}

/// Weight-cone description `{a : w.a >= 0 for all w}` of `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightCone {
    pub weights: Vec<Vec<i64>>,
}

impl WeightCone {
    /// `N^k`.
    pub fn orthant(k: usize) -> WeightCone {
        WeightCone { weights: (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect() }
    }

    pub fn contains(&self, a: &[i64]) -> bool {
        self.weights.iter().all(|w| w.iter().zip(a).map(|(x, y)| x * y).sum::<i64>() >= 0)
    }
}

/// `(a, b)` in `Q^gp + Z` with `b = 0 => a in Q`.
pub fn puncture_membership(a: &[i64], b: i64, cone: &WeightCone) -> bool {
    b != 0 || cone.contains(a)
}

/// `(a, b)` in `S_l = (R>=0 (-1, l) + R>=0 (1, 0)) cap Z^2`.
pub fn in_s_ell(l: i64, v: [i64; 2]) -> bool {
    // (a, b) = x (-1, l) + y (1, 0): x = b / l, y = a + b / l.
    v[1] >= 0 && l * v[0] + v[1] >= 0
}

/// Hilbert basis of `S_l`, `l > 0`, sorted.
pub fn s_ell_generators(l: i64) -> Result<Vec<[i64; 2]>> {
    if l <= 0 {
        return Err(MirrorError::Precondition("S_l needs l > 0".into()));
    }
    // Irreducibles lie in the half-open parallelogram of the two ray generators.
    let mut pts = Vec::new();
    for b in 0..=l {
        for a in -1..=1 {
            let v = [a, b];
            if v != [0, 0] && in_s_ell(l, v) && (v[1] < l || v == [-1, l]) {
                pts.push(v);
            }
        }
    }
    let mut out: Vec<[i64; 2]> = pts
        .iter()
        .copied()
        .filter(|&v| {
            !pts.iter().any(|&u| {
                let w = [v[0] - u[0], v[1] - u[1]];
                u != v && w != [0, 0] && in_s_ell(l, w)
            })
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Gauss-Jordan elimination on the first `ncols` columns; returns pivot columns.
fn row_reduce(rows: &mut [Vec<Q>], ncols: usize) -> Vec<usize> {
    let mut piv = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Q::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x = &*x - &f * y;
                }
            }
        }
        piv.push(c);
        r += 1;
    }
    piv
}

fn rank(a: &[Vec<Q>]) -> usize {
    if a.is_empty() {
        return 0;
    }
    let n = a[0].len();
    let mut rows = a.to_vec();
    row_reduce(&mut rows, n).len()
}

/// Basis of `{x : A x = 0}`.
fn kernel(a: &[Vec<Q>], n: usize) -> Vec<Vec<Q>> {
    let mut rows = a.to_vec();
    let piv = row_reduce(&mut rows, n);
    let free: Vec<usize> = (0..n).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for (r, &c) in piv.iter().enumerate() {
                v[c] = -rows[r][f].clone();
            }
            v
        })
        .collect()
}

/// Primitive integer vector on the ray of a rational vector.
fn integral(v: &[Q]) -> Vec<i64> {
    use num_integer::Integer;
    let l = v.iter().fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<num_bigint::BigInt> = v.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(x));
    ints.iter().map(|x| i64::try_from(x / &g).expect("small ray")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_is_rigid() {
        let t = TropicalType::in_divisor_coords("pt", 3, vec![Vertex { cone: BasisCone::empty() }], vec![], vec![]);
        assert_eq!(basic_monoid(&t).unwrap().dim, 0);
    }

    #[test]
    fn s_ell_small() {
        assert_eq!(s_ell_generators(2).unwrap(), vec![[-1, 2], [0, 1], [1, 0]]);
        assert_eq!(s_ell_generators(1).unwrap(), vec![[-1, 1], [1, 0]]);
        assert!(s_ell_generators(0).is_err());
    }

    #[test]
    fn puncture() {
        let n = WeightCone::orthant(1);
        assert!(puncture_membership(&[1], -1, &n));
        assert!(puncture_membership(&[0], 0, &n));
        assert!(!puncture_membership(&[-1], 0, &n));
    }
}
