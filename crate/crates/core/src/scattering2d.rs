//! Rank-2 wall structures: chamber charts twisted by kinks, wall crossing,
//! path-ordered products, consistency and order-by-order completion.
//!
//! Crossing a ray sends `z^m t^beta` to `z^{T m} t^{beta + kappa <n,m>} f^{<n,m>}`
//! with `n` primitive, normal to the ray and positive on the side being left.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cone_complex::{parallel_transport, BasisCone, LatticeVector};
use crate::error::{MirrorError, Result};
use crate::snc_pair::Pair;
use crate::trunc_ring::{exp_nilpotent, q, CurveClass, Exponent, LaurentElement, Mono, TruncationIdeal, Q};

pub type V2 = [i64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Planar,
    Looijenga,
}

/// A wall through the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    /// Primitive generator of the support ray; in looijenga mode a point of
    /// `B(Z)` in `Div_D(X)*` coordinates.
    pub direction: Vec<i64>,
    /// Planar mode only: the support is the whole line.
    pub line: bool,
    /// `f`, with exponents in the same coordinates as `direction`.
    pub function: LaurentElement,
}

impl Wall {
    pub fn new(direction: Vec<i64>, line: bool, function: LaurentElement) -> Result<Wall> {
        let w = Wall { direction, line, function };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.direction.iter().fold(0i64, |a, &b| a.gcd(&b));
        if g != 1 {
            return Err(MirrorError::NonPrimitive(self.direction.clone()));
        }
        if self.function.mdim() != self.direction.len() {
            return Err(MirrorError::Precondition("wall function lives in the wrong lattice".into()));
        }
        for (k, c) in self.function.terms() {
            if k.beta.iter().all(|&b| b == 0) && k.m.iter().all(|&x| x == 0) {
                if !c.is_one() {
                    return Err(MirrorError::Precondition("wall function is not 1 mod m".into()));
                }
                continue;
            }
            if k.beta.iter().any(|&b| b < 0) || k.beta.iter().all(|&b| b == 0) {
                return Err(MirrorError::Precondition(format!("wall term {} is not in m", k.render(&[]))));
            }
            if multiple_of(&k.m, &self.direction).is_none() {
                return Err(MirrorError::Precondition(format!("exponent {:?} is not tangent to {:?}", k.m, self.direction)));
            }
        }
        if !self.function.coeff(&self.function.unit_exponent().clone()).is_one() {
            return Err(MirrorError::Precondition("wall function is not 1 mod m".into()));
        }
        Ok(())
    }
}

/// `Some(k)` with `v = k d`.
pub fn multiple_of(v: &[i64], d: &[i64]) -> Option<i64> {
    let i = d.iter().position(|&x| x != 0)?;
    if v[i] % d[i] != 0 {
        return None;
    }
    let k = v[i] / d[i];
    if v.iter().zip(d).all(|(a, b)| *a == k * b) {
        Some(k)
    } else {
        None
    }
}

pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0i64, |a, &b| a.gcd(&b));
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

/// Kink data of a looijenga structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LooijengaData {
    pub m: usize,
    /// Rays of `B` in counterclockwise order.
    pub cycle: Vec<usize>,
    /// `kappa_rho = [Z_rho]` per component.
    pub kinks: BTreeMap<usize, CurveClass>,
    /// `D_i . Z_rho_i` per component.
    pub self_int: BTreeMap<usize, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallStructure {
    pub mode: Mode,
    pub rank: usize,
    pub class_names: Vec<String>,
    pub walls: Vec<Wall>,
    pub looijenga: Option<LooijengaData>,
}

impl WallStructure {
    pub fn planar(rank: usize, class_names: Vec<String>, walls: Vec<Wall>) -> Result<WallStructure> {
        for w in &walls {
            w.validate()?;
            if w.direction.len() != 2 || w.function.rank() != rank {
                return Err(MirrorError::Precondition("planar walls need directions in Z^2".into()));
            }
        }
        Ok(WallStructure { mode: Mode::Planar, rank, class_names, walls, looijenga: None })
    }

    /// Structure on `B` of a maximal surface pair, kinks from the declared curve strata.
    pub fn looijenga(pair: &Pair, walls: Vec<Wall>) -> Result<WallStructure> {
        let cycle = pair.boundary_cycle()?;
        let d = &pair.descriptor;
        let mut kinks = BTreeMap::new();
        let mut self_int = BTreeMap::new();
        for &i in &cycle {
            let rho = BasisCone::ray(i);
            let k = d.stratum_class(&rho).ok_or_else(|| {
                MirrorError::InvalidDescriptor(format!("curve stratum D_{} needs a declared class for its kink", i + 1))
            })?;
            kinks.insert(i, k);
            self_int.insert(i, d.stratum_numbers(&rho)?[&i]);
        }
        for w in &walls {
            w.validate()?;
            if w.line || w.direction.len() != pair.m() || w.function.rank() != pair.rank() {
                return Err(MirrorError::Precondition("looijenga walls are rays in Div_D(X)* coordinates".into()));
            }
            let v = LatticeVector(w.direction.clone());
            if !pair.trop.cy_sub.contains_vector(&v) {
                return Err(MirrorError::Precondition(format!("wall direction {v} is not in B")));
            }
        }
        Ok(WallStructure {
            mode: Mode::Looijenga,
            rank: pair.rank(),
            class_names: pair.class_names().to_vec(),
            walls,
            looijenga: Some(LooijengaData { m: pair.m(), cycle, kinks, self_int }),
        })
    }

    /// Same kinks and charts, different walls.
    pub fn with_walls(&self, walls: Vec<Wall>) -> WallStructure {
        WallStructure { walls, ..self.clone() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.looijenga.as_ref().map_or(2, |l| l.m)
    }
}

pub fn cross2(a: V2, b: V2) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn dot2(a: V2, b: V2) -> i64 {
    a[0] * b[0] + a[1] * b[1]
}

fn half(v: V2) -> u8 {
    if v[1] > 0 || (v[1] == 0 && v[0] > 0) {
        0
    } else {
        1
    }
}

/// Angular order on nonzero vectors, starting at the positive x-axis.
pub fn angle_cmp(a: V2, b: V2) -> std::cmp::Ordering {
    half(a).cmp(&half(b)).then_with(|| 0.cmp(&cross2(a, b)))
}

fn mat_apply(t: &[[i64; 2]; 2], v: V2) -> V2 {
    [t[0][0] * v[0] + t[0][1] * v[1], t[1][0] * v[0] + t[1][1] * v[1]]
}

fn mat_inv(t: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    assert!(det == 1 || det == -1, "transition is not unimodular");
    [[t[1][1] * det, -t[0][1] * det], [-t[1][0] * det, t[0][0] * det]]
}

fn mat_mul(a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

const IDENTITY: [[i64; 2]; 2] = [[1, 0], [0, 1]];

/// A ray of the chamber decomposition.
#[derive(Clone, Debug)]
pub struct AtlasRay {
    pub chart_before: usize,
    pub chart_after: usize,
    pub dir_before: V2,
    pub dir_after: V2,
    /// Chart change `before -> after`.
    pub t: [[i64; 2]; 2],
    pub t_inv: [[i64; 2]; 2],
    pub kink: Vec<i64>,
    pub f_before: LaurentElement,
    pub f_after: LaurentElement,
    pub ambient: Vec<i64>,
    pub has_wall: bool,
    pub is_kink: bool,
}

/// Sector between ray `s` (clockwise side) and ray `s + 1`.
#[derive(Clone, Debug)]
pub struct Sector {
    pub chart: usize,
    pub cw: V2,
    pub ccw: V2,
}

/// Charts, rays and sectors of a structure in counterclockwise order.
#[derive(Clone, Debug)]
pub struct Atlas {
    pub mode: Mode,
    pub rank: usize,
    pub ambient_dim: usize,
    /// Ambient indices `(a, b)` of each chart's basis (looijenga mode).
    pub chart_basis: Vec<(usize, usize)>,
    pub rays: Vec<AtlasRay>,
    pub sectors: Vec<Sector>,
}

impl Atlas {
    pub fn new(s: &WallStructure) -> Result<Atlas> {
        match s.mode {
            Mode::Planar => Atlas::planar(s),
            Mode::Looijenga => Atlas::looijenga(s),
        }
    }

    fn planar(s: &WallStructure) -> Result<Atlas> {
        let mut dirs: Vec<V2> = vec![[1, 0], [0, 1], [-1, 0], [0, -1]];
        for w in &s.walls {
            let d = [w.direction[0], w.direction[1]];
            dirs.push(d);
            if w.line {
                dirs.push([-d[0], -d[1]]);
            }
        }
        dirs.sort_by(|a, b| angle_cmp(*a, *b));
        dirs.dedup();
        let one = LaurentElement::one_laurent(s.rank, 2);
        let big = TruncationIdeal::unit(s.rank, u64::MAX / 4);
        let mut rays = Vec::new();
        for d in &dirs {
            let mut f = one.clone();
            let mut has_wall = false;
            for w in &s.walls {
                let wd = [w.direction[0], w.direction[1]];
                if wd == *d || (w.line && wd == [-d[0], -d[1]]) {
                    f = f.mul(&w.function, &big);
                    has_wall = true;
                }
            }
            rays.push(AtlasRay {
                chart_before: 0,
                chart_after: 0,
                dir_before: *d,
                dir_after: *d,
                t: IDENTITY,
                t_inv: IDENTITY,
                kink: vec![0; s.rank],
                f_before: f.clone(),
                f_after: f,
                ambient: d.to_vec(),
                has_wall,
                is_kink: false,
            });
        }
        let n = rays.len();
        let sectors = (0..n).map(|i| Sector { chart: 0, cw: rays[i].dir_after, ccw: rays[(i + 1) % n].dir_before }).collect();
        Ok(Atlas { mode: Mode::Planar, rank: s.rank, ambient_dim: 2, chart_basis: vec![], rays, sectors })
    }

    fn looijenga(s: &WallStructure) -> Result<Atlas> {
        let l = s.looijenga.as_ref().expect("looijenga data");
        let n = l.cycle.len();
        let m = l.m;
        let chart_basis: Vec<(usize, usize)> = (0..n).map(|k| (l.cycle[k], l.cycle[(k + 1) % n])).collect();
        let big = TruncationIdeal::unit(s.rank, u64::MAX / 4);
        let one = LaurentElement::one_laurent(s.rank, 2);
        let to_chart = |k: usize, v: &[i64]| -> Option<V2> {
            let (a, b) = chart_basis[k];
            if v.iter().enumerate().any(|(i, &x)| x != 0 && i != a && i != b) {
                return None;
            }
            Some([v[a], v[b]])
        };
        let wall_fn = |k: usize, amb: &[i64]| -> (LaurentElement, bool) {
            let mut f = one.clone();
            let mut has = false;
            for w in &s.walls {
                if w.direction == amb {
                    let fc = w.function.map_exponents(2, |e| to_chart(k, e).expect("tangent exponent").to_vec());
                    f = f.mul(&fc, &big);
                    has = true;
                }
            }
            (f, has)
        };
        let mut rays = Vec::new();
        let mut sectors = Vec::new();
        for k in 0..n {
            let prev = (k + n - 1) % n;
            let c = l.cycle[k];
            let rho = BasisCone::ray(c);
            let sig1 = BasisCone::new([l.cycle[prev], c]);
            let sig2 = BasisCone::new([c, l.cycle[(k + 1) % n]]);
            let numbers = BTreeMap::from([(c, l.self_int[&c])]);
            let chart = parallel_transport(&rho, &sig1, &sig2, &numbers)?.with_rank(m);
            let u2 = to_chart(k, &chart.u2.0).ok_or_else(|| MirrorError::Inconsistent("transport left the chart".into()))?;
            // (x, y) in (v_prev, v_c) goes to x u2 + y v_c.
            let t = [[u2[0], 1], [u2[1], 0]];
            let mut amb = vec![0i64; m];
            amb[c] = 1;
            let (f_after, has) = wall_fn(k, &amb);
            let (f_before, _) = wall_fn(prev, &amb);
            rays.push(AtlasRay {
                chart_before: prev,
                chart_after: k,
                dir_before: [0, 1],
                dir_after: [1, 0],
                t,
                t_inv: mat_inv(&t),
                kink: l.kinks[&c].0.clone(),
                f_before,
                f_after,
                ambient: amb,
                has_wall: has,
                is_kink: true,
            });
            let mut interior: Vec<V2> = s
                .walls
                .iter()
                .filter_map(|w| to_chart(k, &w.direction))
                .filter(|d| d[0] > 0 && d[1] > 0)
                .collect();
            interior.sort_by(|a, b| angle_cmp(*a, *b));
            interior.dedup();
            let mut cw = [1, 0];
            for d in interior {
                sectors.push(Sector { chart: k, cw, ccw: d });
                let amb: Vec<i64> = {
                    let (a, b) = chart_basis[k];
                    let mut v = vec![0i64; m];
                    v[a] = d[0];
                    v[b] = d[1];
                    v
                };
                let (f, _) = wall_fn(k, &amb);
                rays.push(AtlasRay {
                    chart_before: k,
                    chart_after: k,
                    dir_before: d,
                    dir_after: d,
                    t: IDENTITY,
                    t_inv: IDENTITY,
                    kink: vec![0; s.rank],
                    f_before: f.clone(),
                    f_after: f,
                    ambient: amb,
                    has_wall: true,
                    is_kink: false,
                });
                cw = d;
            }
            sectors.push(Sector { chart: k, cw, ccw: [0, 1] });
        }
        Ok(Atlas { mode: Mode::Looijenga, rank: s.rank, ambient_dim: m, chart_basis, rays, sectors })
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    /// Chart vector to ambient coordinates.
    pub fn to_ambient(&self, chart: usize, v: V2) -> Vec<i64> {
        match self.mode {
            Mode::Planar => v.to_vec(),
            Mode::Looijenga => {
                let (a, b) = self.chart_basis[chart];
                let mut out = vec![0i64; self.ambient_dim];
                out[a] += v[0];
                out[b] += v[1];
                out
            }
        }
    }

    pub fn to_ambient_q(&self, chart: usize, v: &[Q; 2]) -> Vec<Q> {
        match self.mode {
            Mode::Planar => v.to_vec(),
            Mode::Looijenga => {
                let (a, b) = self.chart_basis[chart];
                let mut out = vec![Q::zero(); self.ambient_dim];
                out[a] += &v[0];
                out[b] += &v[1];
                out
            }
        }
    }

    /// Ambient vector to chart coordinates, if it lies in the chart's span.
    pub fn to_chart(&self, chart: usize, v: &[i64]) -> Option<V2> {
        match self.mode {
            Mode::Planar => Some([v[0], v[1]]),
            Mode::Looijenga => {
                let (a, b) = self.chart_basis[chart];
                if v.iter().enumerate().any(|(i, &x)| x != 0 && i != a && i != b) {
                    return None;
                }
                Some([v[a], v[b]])
            }
        }
    }

    pub fn to_chart_q(&self, chart: usize, v: &[Q]) -> Option<[Q; 2]> {
        match self.mode {
            Mode::Planar => Some([v[0].clone(), v[1].clone()]),
            Mode::Looijenga => {
                let (a, b) = self.chart_basis[chart];
                if v.iter().enumerate().any(|(i, x)| !x.is_zero() && i != a && i != b) {
                    return None;
                }
                Some([v[a].clone(), v[b].clone()])
            }
        }
    }

    /// Normal of ray `j`, positive on the side being left, in the chart of that side.
    pub fn leaving_normal(&self, j: usize, ccw: bool) -> V2 {
        let r = &self.rays[j];
        if ccw {
            [r.dir_before[1], -r.dir_before[0]]
        } else {
            [-r.dir_after[1], r.dir_after[0]]
        }
    }

    /// Cross ray `j` counterclockwise (`ccw`) or clockwise; `x` is in the chart being left.
    pub fn cross_ray(&self, j: usize, x: &LaurentElement, ccw: bool, ideal: &TruncationIdeal) -> Result<LaurentElement> {
        let r = &self.rays[j];
        let n = self.leaving_normal(j, ccw);
        let (t, f) = if ccw { (&r.t, &r.f_after) } else { (&r.t_inv, &r.f_before) };
        let mut out = LaurentElement::zero_laurent(self.rank, 2);
        let mut powers: BTreeMap<i64, LaurentElement> = BTreeMap::new();
        for (k, c) in x.terms() {
            let mv = [k.m[0], k.m[1]];
            let s = dot2(n, mv);
            let beta: Vec<i64> = k.beta.iter().zip(&r.kink).map(|(b, kk)| b + kk * s).collect();
            let mono = Mono::new(beta, mat_apply(t, mv).to_vec());
            let fp = match powers.get(&s) {
                Some(v) => v.clone(),
                None => {
                    let v = f.pow_signed(s, ideal)?;
                    powers.insert(s, v.clone());
                    v
                }
            };
            let term = LaurentElement::term(mono.beta.clone(), mono.m.clone(), c.clone());
            out = out.add(&term.mul(&fp, ideal));
        }
        Ok(out)
    }

    /// Sector containing the chart point `v` in its interior, if any.
    pub fn sector_of(&self, chart: usize, v: &[Q; 2]) -> Option<usize> {
        self.sectors.iter().position(|s| {
            s.chart == chart && crossq(&v2q(s.cw), v).is_positive() && crossq(v, &v2q(s.ccw)).is_positive()
        })
    }

    /// Is `v` in the closed sector `s`?
    pub fn in_closed_sector(&self, s: usize, v: V2) -> bool {
        let sec = &self.sectors[s];
        cross2(sec.cw, v) >= 0 && cross2(v, sec.ccw) >= 0 && (v != [0, 0] || true)
    }
}

pub fn v2q(v: V2) -> [Q; 2] {
    [q(v[0]), q(v[1])]
}

pub fn crossq(a: &[Q; 2], b: &[Q; 2]) -> Q {
    &a[0] * &b[1] - &a[1] * &b[0]
}

/// Path-ordered product once around the origin, counterclockwise from `base`.
pub fn loop_product(atlas: &Atlas, base: usize, x: &LaurentElement, ideal: &TruncationIdeal) -> Result<LaurentElement> {
    let n = atlas.num_rays();
    let mut cur = x.clone();
    for i in 0..n {
        let j = (base + 1 + i) % n;
        cur = atlas.cross_ray(j, &cur, true, ideal)?;
    }
    Ok(cur)
}

/// Discrepancy of the loop at one basepoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopDefect {
    pub base_sector: usize,
    /// Images of `z^{e1}`, `z^{e2}` minus themselves.
    pub defects: [LaurentElement; 2],
}

impl LoopDefect {
    pub fn is_identity(&self) -> bool {
        self.defects.iter().all(|d| d.is_zero())
    }
}

pub fn loop_defect(atlas: &Atlas, base: usize, ideal: &TruncationIdeal) -> Result<LoopDefect> {
    let mut defects = Vec::new();
    for e in [[1, 0], [0, 1]] {
        let z = LaurentElement::term(vec![0; atlas.rank], e.to_vec(), Q::one());
        let img = loop_product(atlas, base, &z, ideal)?;
        defects.push(img.sub(&z));
    }
    Ok(LoopDefect { base_sector: base, defects: [defects[0].clone(), defects[1].clone()] })
}

/// Mismatch of theta functions across one ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayDefect {
    pub ray: usize,
    pub p: LatticeVector,
    pub defect: LaurentElement,
}

/// Linear part and class shifts of the loop of kinks.
pub type KinkMonodromy = ([[i64; 2]; 2], [Vec<i64>; 2]);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub loops: Vec<LoopDefect>,
    pub rays: Vec<RayDefect>,
    /// Kink-only loop: `(linear part, t-exponents of z^{e1}, z^{e2})`.
    pub kink_monodromy: Option<KinkMonodromy>,
}

/// Planar: the loop around the origin is the identity mod `I`. Looijenga:
/// theta functions from broken lines glue across every ray, tested on `B(Z)`
/// points up to `height`.
pub fn consistency_check(s: &WallStructure, ideal: &TruncationIdeal, height: u32) -> Result<ConsistencyReport> {
    let atlas = Atlas::new(s)?;
    match s.mode {
        Mode::Planar => {
            let l = loop_defect(&atlas, 0, ideal)?;
            Ok(ConsistencyReport { consistent: l.is_identity(), loops: vec![l], rays: vec![], kink_monodromy: None })
        }
        Mode::Looijenga => {
            let rays = crate::broken_lines::ray_defects(s, &atlas, ideal, height)?;
            let mono = kink_monodromy(s)?;
            Ok(ConsistencyReport { consistent: rays.is_empty(), loops: vec![], rays, kink_monodromy: Some(mono) })
        }
    }
}

/// Loop of pure kink crossings (walls dropped), acting on `z^{e1}`, `z^{e2}` of
/// the first chart. Every term stays a monomial, so nothing is truncated.
pub fn kink_monodromy(s: &WallStructure) -> Result<KinkMonodromy> {
    let bare = s.with_walls(vec![]);
    let atlas = Atlas::new(&bare)?;
    let big = TruncationIdeal::unit(s.rank, u64::MAX / 4);
    let mut cols = [[0i64; 2]; 2];
    let mut betas: [Vec<i64>; 2] = [vec![], vec![]];
    for (i, e) in [[1, 0], [0, 1]].iter().enumerate() {
        let z = LaurentElement::term(vec![0; s.rank], e.to_vec(), Q::one());
        let img = loop_product(&atlas, atlas.sectors.len() - 1, &z, &big)?;
        let (k, _) = img.terms().next().ok_or_else(|| MirrorError::Inconsistent("kink loop lost its monomial".into()))?;
        if img.len() != 1 {
            return Err(MirrorError::Inconsistent("kink loop produced more than one monomial".into()));
        }
        cols[i] = [k.m[0], k.m[1]];
        betas[i] = k.beta.clone();
    }
    Ok(([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]], betas))
}

/// Monodromy of the affine structure from composed `parallel_transport` charts,
/// starting and ending in the chart of the last maximal cone.
pub fn transport_monodromy(s: &WallStructure) -> Result<[[i64; 2]; 2]> {
    let l = s.looijenga.as_ref().ok_or(MirrorError::Unsupported("planar structures have no monodromy".into()))?;
    let n = l.cycle.len();
    let m = l.m;
    let last = (l.cycle[n - 1], l.cycle[0]);
    let mut images = Vec::new();
    for start in [last.0, last.1] {
        let mut v = LatticeVector::unit(m, start);
        for k in 0..n {
            let c = l.cycle[k];
            let prev = l.cycle[(k + n - 1) % n];
            let next = l.cycle[(k + 1) % n];
            let numbers = BTreeMap::from([(c, l.self_int[&c])]);
            let ch = parallel_transport(&BasisCone::ray(c), &BasisCone::new([prev, c]), &BasisCone::new([c, next]), &numbers)?;
            v = ch.apply(&v)?;
        }
        images.push([v.0[last.0], v.0[last.1]]);
    }
    Ok([[images[0][0], images[1][0]], [images[0][1], images[1][1]]])
}

/// Single wall crossing for a wall given in chart coordinates.
/// `side = +1` leaves the side where `(-d_y, d_x)` is positive.
pub fn cross(w: &Wall, x: &LaurentElement, side: i32, ideal: &TruncationIdeal) -> Result<LaurentElement> {
    if w.direction.len() != 2 || x.mdim() != 2 {
        return Err(MirrorError::Precondition("cross acts on rank-2 chart coordinates".into()));
    }
    w.validate()?;
    let d = [w.direction[0], w.direction[1]];
    let n0 = [-d[1], d[0]];
    let mut out = x.zero();
    for (k, c) in x.terms() {
        let s = side as i64 * dot2(n0, [k.m[0], k.m[1]]);
        let term = LaurentElement::term(k.beta.clone(), k.m.clone(), c.clone());
        out = out.add(&term.mul(&w.function.pow_signed(s, ideal)?, ideal));
    }
    Ok(out)
}

/// Kink twist `z^m t^beta -> z^m t^{beta + kappa <n,m>}` for a ray `dir`.
pub fn cross_kink(kappa: &CurveClass, dir: V2, x: &LaurentElement, side: i32) -> LaurentElement {
    let n0 = [-dir[1], dir[0]];
    x.map_terms(|k| {
        let s = side as i64 * dot2(n0, [k.m[0], k.m[1]]);
        Mono::new(k.beta.iter().zip(&kappa.0).map(|(b, c)| b + c * s).collect(), k.m.clone())
    })
}

impl LaurentElement {
    /// Relabel exponents termwise.
    pub fn map_terms<F: Fn(&Mono) -> Mono>(&self, g: F) -> LaurentElement {
        let mut out = self.zero();
        for (k, c) in self.terms() {
            out.add_term(g(k), c.clone());
        }
        out
    }
}

/// Result of [`complete`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    pub structure: WallStructure,
    pub added: Vec<Wall>,
}

/// Insert rays order by order until the loop is the identity mod `I`.
/// Added rays are supported on `R>=0 (-m)` for a defect exponent `m`.
pub fn complete(s: &WallStructure, ideal: &TruncationIdeal) -> Result<Completion> {
    if s.mode == Mode::Looijenga {
        let rep = consistency_check(s, ideal, 2)?;
        if rep.consistent {
            return Ok(Completion { structure: s.clone(), added: vec![] });
        }
        return Err(MirrorError::Unsupported("completion of inconsistent looijenga structures".into()));
    }
    let atlas = Atlas::new(s)?;
    let first = loop_defect(&atlas, 0, ideal)?;
    for d in &first.defects {
        if d.terms().any(|(k, _)| k.beta.iter().sum::<i64>() < 2) {
            return Err(MirrorError::Precondition("initial walls are not consistent mod m^2".into()));
        }
    }
    let mut added: Vec<Wall> = Vec::new();
    let bound = ideal.bound() as i64;
    for k in 1..bound {
        let cur = s.with_walls(s.walls.iter().chain(&added).cloned().collect());
        let atlas = Atlas::new(&cur)?;
        let step = ideal.with_bound((k + 1) as u64);
        let l = loop_defect(&atlas, 0, &step)?;
        let mut g: BTreeMap<(Vec<i64>, Vec<i64>), [Q; 2]> = BTreeMap::new();
        for (i, d) in l.defects.iter().enumerate() {
            let e = if i == 0 { [1, 0] } else { [0, 1] };
            for (mono, c) in d.terms() {
                let deg = ideal.degree(&mono.beta);
                if deg < k {
                    return Err(MirrorError::Inconsistent(format!("defect of degree {deg} survived order {k}")));
                }
                let m = vec![mono.m[0] - e[0], mono.m[1] - e[1]];
                let slot = g.entry((mono.beta.clone(), m)).or_insert_with(|| [Q::zero(), Q::zero()]);
                slot[i] += c;
            }
        }
        for ((beta, m), gv) in g {
            if gv[0].is_zero() && gv[1].is_zero() {
                continue;
            }
            if m == [0, 0] {
                return Err(MirrorError::Inconsistent("defect with zero exponent".into()));
            }
            if !(&gv[0] * q(m[0]) + &gv[1] * q(m[1])).is_zero() {
                return Err(MirrorError::Inconsistent(format!("defect at z^{m:?} is not tangent")));
            }
            let dir = primitive(&[-m[0], -m[1]]);
            let n = [dir[1], -dir[0]];
            let nn = q(dot2(n, n));
            let c = -(&gv[0] * q(n[0]) + &gv[1] * q(n[1])) / nn;
            if gv[0] != -&c * q(n[0]) || gv[1] != -&c * q(n[1]) {
                return Err(MirrorError::Inconsistent("defect is not a single wall term".into()));
            }
            let term = LaurentElement::term(beta.clone(), m.clone(), c);
            let f = LaurentElement::one_laurent(s.rank, 2).add(&term);
            if let Some(w) = added.iter_mut().find(|w| w.direction == dir) {
                w.function = w.function.mul(&f, ideal);
            } else {
                added.push(Wall::new(dir, false, f)?);
            }
        }
    }
    added.sort_by(|a, b| angle_cmp([a.direction[0], a.direction[1]], [b.direction[0], b.direction[1]]));
    let out = s.with_walls(s.walls.iter().chain(&added).cloned().collect());
    let check = loop_defect(&Atlas::new(&out)?, 0, ideal)?;
    if !check.is_identity() {
        return Err(MirrorError::Inconsistent("completion did not converge below the bound".into()));
    }
    Ok(Completion { structure: out, added })
}

/// One wall of the canonical structure: `f = exp(k N t^beta z^{-u})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalEntry {
    pub ray: LatticeVector,
    pub beta: CurveClass,
    pub u: LatticeVector,
    pub k_sigma: i64,
    pub n_sigma: Q,
}

/// Walls from the canonical data, one per ray with functions multiplied.
/// Entries with `beta` in `I` are dropped and reported.
pub fn canonical_walls(pair: &Pair, entries: &[CanonicalEntry], ideal: &TruncationIdeal) -> Result<(WallStructure, Vec<String>)> {
    let mut notices = Vec::new();
    let mut by_dir: BTreeMap<Vec<i64>, LaurentElement> = BTreeMap::new();
    let m = pair.m();
    for e in entries {
        let dir = primitive(&e.ray.0);
        if multiple_of(&e.u.0, &dir).is_none_or(|k| k <= 0) {
            return Err(MirrorError::Precondition(format!("u = {} is not tangent to the ray {}", e.u, e.ray)));
        }
        if ideal.contains(&e.beta.0) {
            notices.push(format!("dropped entry on ray {} with class {} in I", e.ray, e.beta));
            continue;
        }
        let neg_u: Vec<i64> = e.u.0.iter().map(|x| -x).collect();
        let arg = LaurentElement::term(e.beta.0.clone(), neg_u, q(e.k_sigma) * &e.n_sigma);
        let f = exp_nilpotent(&arg, ideal)?;
        let slot = by_dir.entry(dir).or_insert_with(|| LaurentElement::one_laurent(pair.rank(), m));
        *slot = slot.mul(&f, ideal);
    }
    let mut walls = Vec::new();
    for (dir, f) in by_dir {
        if !f.is_one() {
            walls.push(Wall::new(dir, false, f)?);
        }
    }
    Ok((WallStructure::looijenga(pair, walls)?, notices))
}

/// Product of matrices around the loop, exposed for tests.
pub fn compose(ms: &[[[i64; 2]; 2]]) -> [[i64; 2]; 2] {
    ms.iter().fold(IDENTITY, |acc, m| mat_mul(m, &acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(rank: usize, beta: Vec<i64>, m: Vec<i64>) -> LaurentElement {
        LaurentElement::one_laurent(rank, 2).add(&LaurentElement::term(beta, m, q(1)))
    }

    fn gps() -> WallStructure {
        let w1 = Wall::new(vec![1, 0], true, lin(2, vec![1, 0], vec![1, 0])).unwrap();
        let w2 = Wall::new(vec![0, 1], true, lin(2, vec![0, 1], vec![0, 1])).unwrap();
        WallStructure::planar(2, vec!["t1".into(), "t2".into()], vec![w1, w2]).unwrap()
    }

    #[test]
    fn trivial_wall_is_identity() {
        let i = TruncationIdeal::unit(1, 3);
        let w = Wall::new(vec![1, 0], false, LaurentElement::one_laurent(1, 2)).unwrap();
        let x = LaurentElement::term(vec![0], vec![2, 5], q(1));
        assert_eq!(cross(&w, &x, 1, &i).unwrap(), x);
    }

    #[test]
    fn crossing_the_x_axis() {
        let i = TruncationIdeal::unit(1, 3);
        let w = Wall::new(vec![1, 0], false, lin(1, vec![1], vec![1, 0])).unwrap();
        let y = LaurentElement::term(vec![0], vec![0, 1], q(1));
        let expect = y.add(&LaurentElement::term(vec![1], vec![1, 1], q(1)));
        assert_eq!(cross(&w, &y, 1, &i).unwrap(), expect);
        let x = LaurentElement::term(vec![0], vec![1, 0], q(1));
        assert_eq!(cross(&w, &x, 1, &i).unwrap(), x);
        assert_eq!(cross(&w, &cross(&w, &y, 1, &i).unwrap(), -1, &i).unwrap(), y);
    }

    #[test]
    fn non_primitive_rejected() {
        let r = Wall::new(vec![2, 0], false, LaurentElement::one_laurent(1, 2));
        assert!(matches!(r, Err(MirrorError::NonPrimitive(_))));
    }

    #[test]
    fn empty_planar_is_consistent() {
        let s = WallStructure::planar(1, vec!["t".into()], vec![]).unwrap();
        assert!(consistency_check(&s, &TruncationIdeal::unit(1, 3), 1).unwrap().consistent);
    }

    #[test]
    fn two_lines_need_one_ray() {
        let i = TruncationIdeal::unit(2, 3);
        let rep = consistency_check(&gps(), &i, 1).unwrap();
        assert!(!rep.consistent);
        for d in &rep.loops[0].defects {
            for (k, _) in d.terms() {
                assert_eq!(k.beta, vec![1, 1]);
            }
        }
        let c = complete(&gps(), &i).unwrap();
        assert_eq!(c.added.len(), 1);
        assert_eq!(c.added[0].direction, vec![-1, -1]);
        assert_eq!(c.added[0].function, lin(2, vec![1, 1], vec![1, 1]));
        assert!(consistency_check(&c.structure, &i, 1).unwrap().consistent);
        assert!(complete(&c.structure, &i).unwrap().added.is_empty());
    }

    #[test]
    fn basepoint_does_not_matter() {
        let i = TruncationIdeal::unit(2, 4);
        let c = complete(&gps(), &i).unwrap();
        let a = Atlas::new(&c.structure).unwrap();
        let b = Atlas::new(&gps()).unwrap();
        for base in 0..a.sectors.len() {
            assert!(loop_defect(&a, base, &i).unwrap().is_identity());
        }
        for base in 0..b.sectors.len() {
            assert!(!loop_defect(&b, base, &i).unwrap().is_identity());
        }
    }
}
