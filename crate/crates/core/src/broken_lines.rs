//! Broken lines in a rank-2 wall structure, theta functions and their
//! products read off at generic endpoints.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone_complex::LatticeVector;
use crate::error::{MirrorError, Result};
use crate::scattering2d::{cross2, crossq, dot2, v2q, Atlas, Mode, RayDefect, WallStructure, V2};
use crate::trunc_ring::{q, q_frac, CurveClass, LaurentElement, Mono, TruncatedSeries, TruncationIdeal, Q};

/// One linear piece, with its monomial in the chart of its sector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub sector: usize,
    pub coeff: Q,
    pub beta: Vec<i64>,
    pub m: V2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrokenLine {
    /// Asymptotic direction, ambient coordinates.
    pub p: Vec<i64>,
    /// Endpoint, ambient coordinates.
    pub endpoint: Vec<Q>,
    pub segments: Vec<Segment>,
    /// Ray crossed after segment `i`, and whether counterclockwise.
    pub crossings: Vec<(usize, bool)>,
    /// Ambient coordinates of the crossing points.
    pub breakpoints: Vec<Vec<Q>>,
}

impl BrokenLine {
    /// Final monomial `c t^beta z^m`, `m` in ambient coordinates.
    pub fn monomial(&self, atlas: &Atlas) -> (Q, Vec<i64>, Vec<i64>) {
        let s = self.segments.last().expect("nonempty line");
        (s.coeff.clone(), s.beta.clone(), atlas.to_ambient(atlas.sectors[s.sector].chart, s.m))
    }

    pub fn num_bends(&self) -> usize {
        self.segments.windows(2).filter(|w| w[0].beta != w[1].beta || w[0].coeff != w[1].coeff).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Entry {
    Initial,
    Cw,
    Ccw,
}

/// Solve `x = mu e + t d`; `None` if `e`, `d` are parallel.
fn solve(x: &[Q; 2], e: V2, d: V2) -> Option<(Q, Q)> {
    let den = cross2(e, d);
    if den == 0 {
        return None;
    }
    let den = q(den);
    Some((crossq(x, &v2q(d)) / &den, crossq(&v2q(e), x) / &den))
}

/// `d` strictly inside the cone spanned by `u`, `v`.
fn in_open_cone(d: V2, u: V2, v: V2) -> bool {
    let den = cross2(u, v);
    if den == 0 {
        return false;
    }
    let a = cross2(d, v) * den.signum();
    let b = cross2(u, d) * den.signum();
    a > 0 && b > 0
}

/// Sector and chart coordinates of an endpoint; it must avoid every ray.
pub fn locate(atlas: &Atlas, point: &[Q]) -> Result<(usize, [Q; 2])> {
    if point.len() != atlas.ambient_dim {
        return Err(MirrorError::Precondition(format!("endpoint has {} coordinates, expected {}", point.len(), atlas.ambient_dim)));
    }
    let charts = match atlas.mode {
        Mode::Planar => 1,
        Mode::Looijenga => atlas.chart_basis.len(),
    };
    let mut on_wall = false;
    for c in 0..charts {
        if let Some(v) = atlas.to_chart_q(c, point) {
            if atlas.mode == Mode::Looijenga && (v[0].is_negative() || v[1].is_negative()) {
                continue;
            }
            if let Some(s) = atlas.sector_of(c, &v) {
                return Ok((s, v));
            }
            on_wall = true;
        }
    }
    if on_wall {
        Err(MirrorError::EndpointOnWall(render_point(point)))
    } else {
        Err(MirrorError::Precondition(format!("endpoint {} is not in B", render_point(point))))
    }
}

fn render_point(p: &[Q]) -> String {
    format!("({})", p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

/// Sectors whose closure contains `p`, with `p` in that chart.
fn initial_sectors(atlas: &Atlas, p: &[i64]) -> Vec<(usize, V2)> {
    let mut out = Vec::new();
    for (s, sec) in atlas.sectors.iter().enumerate() {
        if let Some(v) = atlas.to_chart(sec.chart, p) {
            if v != [0, 0] && atlas.in_closed_sector(s, v) {
                out.push((s, v));
            }
        }
    }
    out
}

struct Search<'a> {
    atlas: &'a Atlas,
    ideal: &'a TruncationIdeal,
    target: usize,
    qpt: [Q; 2],
    cap: usize,
    found: Vec<(Vec<Segment>, Vec<(usize, bool)>)>,
}

impl Search<'_> {
    fn run(&mut self, entry: Entry, segs: &mut Vec<Segment>, crossings: &mut Vec<(usize, bool)>) -> Result<()> {
        let seg = segs.last().expect("segment").clone();
        let sec = &self.atlas.sectors[seg.sector];
        let d = [-seg.m[0], -seg.m[1]];
        if seg.sector == self.target {
            let ends = match entry {
                Entry::Initial => true,
                Entry::Cw => solve(&self.qpt, sec.cw, d).is_some_and(|(mu, t)| mu.is_positive() && t.is_positive()),
                Entry::Ccw => solve(&self.qpt, sec.ccw, d).is_some_and(|(mu, t)| mu.is_positive() && t.is_positive()),
            };
            if ends {
                self.found.push((segs.clone(), crossings.clone()));
            }
        }
        let (exit_ccw, exit_cw) = match entry {
            Entry::Initial => (cross2(seg.m, sec.ccw) != 0, cross2(seg.m, sec.cw) != 0),
            Entry::Cw => (in_open_cone(d, sec.ccw, [-sec.cw[0], -sec.cw[1]]), false),
            Entry::Ccw => (false, in_open_cone(d, sec.cw, [-sec.ccw[0], -sec.ccw[1]])),
        };
        let n = self.atlas.sectors.len();
        for (go, ccw) in [(exit_ccw, true), (exit_cw, false)] {
            if !go {
                continue;
            }
            if crossings.len() >= self.cap {
                return Err(MirrorError::Unsupported("broken line crosses too many rays".into()));
            }
            let (ray, next) = if ccw { ((seg.sector + 1) % n, (seg.sector + 1) % n) } else { (seg.sector, (seg.sector + n - 1) % n) };
            let x = LaurentElement::term(seg.beta.clone(), seg.m.to_vec(), seg.coeff.clone());
            let img = self.atlas.cross_ray(ray, &x, ccw, self.ideal)?;
            let terms: Vec<(Mono, Q)> = img.terms().map(|(k, c)| (k.clone(), c.clone())).collect();
            for (k, c) in terms {
                if self.ideal.contains(&k.beta) {
                    continue;
                }
                segs.push(Segment { sector: next, coeff: c, beta: k.beta.clone(), m: [k.m[0], k.m[1]] });
                crossings.push((ray, ccw));
                self.run(if ccw { Entry::Cw } else { Entry::Ccw }, segs, crossings)?;
                segs.pop();
                crossings.pop();
            }
        }
        Ok(())
    }
}

/// Chart-coordinate endpoints of every crossing, computed backwards from `Q`.
fn breakpoints(atlas: &Atlas, segs: &[Segment], crossings: &[(usize, bool)], qpt: &[Q; 2]) -> Result<Vec<Vec<Q>>> {
    let mut out = Vec::new();
    let mut x = qpt.clone();
    for i in (1..segs.len()).rev() {
        let (ray, ccw) = crossings[i - 1];
        let r = &atlas.rays[ray];
        let (here, there) = if ccw { (r.dir_after, r.dir_before) } else { (r.dir_before, r.dir_after) };
        let d = [-segs[i].m[0], -segs[i].m[1]];
        let (mu, t) = solve(&x, here, d).ok_or_else(|| MirrorError::Inconsistent("segment runs along its entry ray".into()))?;
        if !mu.is_positive() || !t.is_positive() {
            return Err(MirrorError::Inconsistent("segment does not reach its entry ray".into()));
        }
        x = [&mu * q(there[0]), &mu * q(there[1])];
        let chart = atlas.sectors[segs[i - 1].sector].chart;
        out.push(atlas.to_ambient_q(chart, &x));
    }
    out.reverse();
    Ok(out)
}

fn enumerate_located(atlas: &Atlas, p: &[i64], target: usize, qpt: &[Q; 2], ideal: &TruncationIdeal) -> Result<Vec<BrokenLine>> {
    let endpoint = atlas.to_ambient_q(atlas.sectors[target].chart, qpt);
    if p.iter().all(|&x| x == 0) {
        let seg = Segment { sector: target, coeff: q(1), beta: vec![0; atlas.rank], m: [0, 0] };
        return Ok(vec![BrokenLine { p: p.to_vec(), endpoint, segments: vec![seg], crossings: vec![], breakpoints: vec![] }]);
    }
    let starts = initial_sectors(atlas, p);
    if starts.is_empty() {
        return Err(MirrorError::Precondition(format!("{p:?} is not an integral point of B")));
    }
    let mut search = Search { atlas, ideal, target, qpt: qpt.clone(), cap: 4 * atlas.sectors.len() + 8, found: vec![] };
    for (s, v) in starts {
        let mut segs = vec![Segment { sector: s, coeff: q(1), beta: vec![0; atlas.rank], m: v }];
        search.run(Entry::Initial, &mut segs, &mut vec![])?;
    }
    let mut lines = Vec::new();
    for (segs, crossings) in search.found {
        let bps = breakpoints(atlas, &segs, &crossings, qpt)?;
        lines.push(BrokenLine { p: p.to_vec(), endpoint: endpoint.clone(), segments: segs, crossings, breakpoints: bps });
    }
    Ok(lines)
}

/// All broken lines with asymptotic direction `p` ending at `Q`, mod `I`.
pub fn enumerate(s: &WallStructure, p: &LatticeVector, endpoint: &[Q], ideal: &TruncationIdeal) -> Result<Vec<BrokenLine>> {
    let atlas = Atlas::new(s)?;
    let (sec, v) = locate(&atlas, endpoint)?;
    enumerate_located(&atlas, &p.0, sec, &v, ideal)
}

/// `theta_p(Q)` in the chart of the sector of `Q`.
pub fn theta_in_chart(atlas: &Atlas, p: &[i64], sector: usize, qpt: &[Q; 2], ideal: &TruncationIdeal) -> Result<LaurentElement> {
    let mut out = LaurentElement::zero_laurent(atlas.rank, 2);
    for l in enumerate_located(atlas, p, sector, qpt, ideal)? {
        let s = l.segments.last().expect("segment");
        out.add_term(Mono::new(s.beta.clone(), s.m.to_vec()), s.coeff.clone());
    }
    Ok(out)
}

/// `theta_p(Q)` with exponents in ambient coordinates.
pub fn theta_function(s: &WallStructure, p: &LatticeVector, endpoint: &[Q], ideal: &TruncationIdeal) -> Result<LaurentElement> {
    let atlas = Atlas::new(s)?;
    let (sec, v) = locate(&atlas, endpoint)?;
    let chart = atlas.sectors[sec].chart;
    let th = theta_in_chart(&atlas, &p.0, sec, &v, ideal)?;
    Ok(th.map_exponents(atlas.ambient_dim, |m| atlas.to_ambient(chart, [m[0], m[1]])))
}

/// A point strictly inside sector `s`, in its chart.
pub fn sample_in_sector(atlas: &Atlas, s: usize, rng: &mut ChaCha8Rng) -> [Q; 2] {
    let sec = &atlas.sectors[s];
    let a = q_frac(rng.gen_range(1..1_000_000), 999_983);
    let b = q_frac(rng.gen_range(1..1_000_000), 999_979);
    [&a * q(sec.cw[0]) + &b * q(sec.ccw[0]), &a * q(sec.cw[1]) + &b * q(sec.ccw[1])]
}

/// Product of two theta functions at `Q`, in the chart of `Q`.
pub fn product_at(atlas: &Atlas, p: &[i64], qv: &[i64], sector: usize, pt: &[Q; 2], ideal: &TruncationIdeal) -> Result<LaurentElement> {
    let a = theta_in_chart(atlas, p, sector, pt, ideal)?;
    let b = theta_in_chart(atlas, qv, sector, pt, ideal)?;
    Ok(a.mul(&b, ideal))
}

/// `theta_p theta_q = sum_r alpha_r theta_r`, read off in every sector at a
/// random generic endpoint. Coefficients of `z^r` with `r` in the closed
/// sector are exactly `alpha_r`; sectors sharing an `r` must agree.
pub fn theta_product(
    s: &WallStructure,
    p: &LatticeVector,
    qv: &LatticeVector,
    ideal: &TruncationIdeal,
    seed: u64,
) -> Result<Vec<(LatticeVector, TruncatedSeries)>> {
    let atlas = Atlas::new(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: BTreeMap<LatticeVector, (usize, TruncatedSeries)> = BTreeMap::new();
    for sec in 0..atlas.sectors.len() {
        let pt = sample_in_sector(&atlas, sec, &mut rng);
        let prod = product_at(&atlas, &p.0, &qv.0, sec, &pt, ideal)?;
        let chart = atlas.sectors[sec].chart;
        let mut here: BTreeMap<LatticeVector, TruncatedSeries> = BTreeMap::new();
        for (k, c) in prod.terms() {
            let m = [k.m[0], k.m[1]];
            if !atlas.in_closed_sector(sec, m) {
                continue;
            }
            if k.beta.iter().any(|&b| b < 0) {
                return Err(MirrorError::Inconsistent(format!("negative class {:?} in a product", k.beta)));
            }
            let r = LatticeVector(atlas.to_ambient(chart, m));
            let slot = here.entry(r).or_insert_with(|| TruncatedSeries::zero_series(atlas.rank));
            slot.add_term(CurveClass(k.beta.clone()), c.clone());
        }
        // Every r in the closed sector is compared, including absent ones.
        let mut keys: Vec<LatticeVector> = here.keys().cloned().collect();
        keys.extend(out.keys().filter(|r| atlas.to_chart(chart, &r.0).is_some_and(|m| atlas.in_closed_sector(sec, m))).cloned());
        keys.sort();
        keys.dedup();
        for r in keys {
            let v = here.get(&r).cloned().unwrap_or_else(|| TruncatedSeries::zero_series(atlas.rank));
            match out.get(&r) {
                Some((other, prev)) if *prev != v => {
                    return Err(MirrorError::Inconsistent(format!(
                        "coefficient of theta_{r} differs between sectors {other} and {sec}: {prev} vs {v}"
                    )));
                }
                Some(_) => {}
                None => {
                    out.insert(r, (sec, v));
                }
            }
        }
    }
    Ok(out.into_iter().filter(|(_, (_, v))| !v.is_zero()).map(|(r, (_, v))| (r, v)).collect())
}

/// Replay a broken line: bends must be terms of the crossing images and the
/// geometry must close up at the endpoint.
pub fn verify(s: &WallStructure, line: &BrokenLine, ideal: &TruncationIdeal) -> Result<()> {
    let atlas = Atlas::new(s)?;
    let bad = |msg: &str| Err(MirrorError::Inconsistent(msg.to_string()));
    if line.segments.is_empty() || line.crossings.len() + 1 != line.segments.len() {
        return bad("segment and crossing counts disagree");
    }
    let first = &line.segments[0];
    let sec0 = &atlas.sectors[first.sector];
    if atlas.to_chart(sec0.chart, &line.p) != Some(first.m) || !first.coeff.eq(&q(1)) || first.beta.iter().any(|&b| b != 0) {
        return bad("initial monomial is not z^p");
    }
    if first.m != [0, 0] && !atlas.in_closed_sector(first.sector, first.m) {
        return bad("initial segment does not come from infinity in direction p");
    }
    let n = atlas.sectors.len();
    for (i, &(ray, ccw)) in line.crossings.iter().enumerate() {
        let a = &line.segments[i];
        let b = &line.segments[i + 1];
        let expect = if ccw { ((a.sector + 1) % n, (a.sector + 1) % n) } else { (a.sector, (a.sector + n - 1) % n) };
        if (ray, b.sector) != expect {
            return bad("crossing does not connect adjacent sectors");
        }
        let x = LaurentElement::term(a.beta.clone(), a.m.to_vec(), a.coeff.clone());
        let img = atlas.cross_ray(ray, &x, ccw, ideal)?;
        if img.coeff(&Mono::new(b.beta.clone(), b.m.to_vec())) != b.coeff {
            return bad("bend is not a term of the wall-crossing image");
        }
        let nrm = atlas.leaving_normal(ray, ccw);
        if dot2(nrm, a.m) <= 0 {
            return bad("segment does not move across the ray it crosses");
        }
    }
    // Geometry: walk forward from the first breakpoint and land on Q.
    let last = line.segments.last().expect("segment");
    let (target, qpt) = locate(&atlas, &line.endpoint)?;
    if target != last.sector {
        return bad("line ends in the wrong sector");
    }
    let mut pts: Vec<[Q; 2]> = Vec::new();
    for (i, bp) in line.breakpoints.iter().enumerate() {
        let chart = atlas.sectors[line.segments[i].sector].chart;
        let v = atlas.to_chart_q(chart, bp).ok_or_else(|| MirrorError::Inconsistent("breakpoint outside its chart".into()))?;
        let ray = &atlas.rays[line.crossings[i].0];
        let dir = if line.crossings[i].1 { ray.dir_before } else { ray.dir_after };
        if !crossq(&v2q(dir), &v).is_zero() || (&v[0] * q(dir[0]) + &v[1] * q(dir[1])).is_negative() {
            return bad("breakpoint is not on the crossed ray");
        }
        pts.push(v);
    }
    for i in 0..line.segments.len() {
        let seg = &line.segments[i];
        let end: [Q; 2] = if i + 1 < line.segments.len() { pts[i].clone() } else { qpt.clone() };
        if i == 0 {
            continue;
        }
        let (ray, ccw) = line.crossings[i - 1];
        let r = &atlas.rays[ray];
        let (here, there) = if ccw { (r.dir_after, r.dir_before) } else { (r.dir_before, r.dir_after) };
        let prev = &pts[i - 1];
        let mu = if there[0] != 0 { &prev[0] / q(there[0]) } else { &prev[1] / q(there[1]) };
        let start = [&mu * q(here[0]), &mu * q(here[1])];
        let delta = [&end[0] - &start[0], &end[1] - &start[1]];
        let dm = [q(-seg.m[0]), q(-seg.m[1])];
        if !crossq(&delta, &dm).is_zero() || (&delta[0] * &dm[0] + &delta[1] * &dm[1]).is_negative() {
            return bad("segment is not parallel to -m");
        }
    }
    Ok(())
}

/// Theta functions glue across each ray: the two sides agree after crossing.
pub fn ray_defects(s: &WallStructure, atlas: &Atlas, ideal: &TruncationIdeal, height: u32) -> Result<Vec<RayDefect>> {
    let _ = s;
    let n = atlas.sectors.len();
    let mut points: Vec<Vec<i64>> = Vec::new();
    for c in 0..atlas.chart_basis.len().max(1) {
        for x in 0..=height as i64 {
            for y in 0..=(height as i64 - x) {
                if x + y > 0 {
                    points.push(atlas.to_ambient(c, [x, y]));
                }
            }
        }
    }
    points.sort();
    points.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let samples: Vec<[Q; 2]> = (0..n).map(|sec| sample_in_sector(atlas, sec, &mut rng)).collect();
    let mut out = Vec::new();
    for j in 0..atlas.rays.len() {
        let before = (j + n - 1) % n;
        let after = j;
        let nrm = atlas.leaving_normal(j, true);
        let r = &atlas.rays[j];
        for p in &points {
            let t1 = theta_in_chart(atlas, p, before, &samples[before], ideal)?;
            let t2 = theta_in_chart(atlas, p, after, &samples[after], ideal)?;
            let mut pos1 = t1.zero();
            let mut neg1 = t1.zero();
            for (k, c) in t1.terms() {
                if dot2(nrm, [k.m[0], k.m[1]]) >= 0 { &mut pos1 } else { &mut neg1 }.add_term(k.clone(), c.clone());
            }
            let mut pos2 = t2.zero();
            let mut neg2 = t2.zero();
            for (k, c) in t2.terms() {
                let back = [
                    r.t_inv[0][0] * k.m[0] + r.t_inv[0][1] * k.m[1],
                    r.t_inv[1][0] * k.m[0] + r.t_inv[1][1] * k.m[1],
                ];
                if dot2(nrm, back) >= 0 { &mut pos2 } else { &mut neg2 }.add_term(k.clone(), c.clone());
            }
            let d1 = atlas.cross_ray(j, &pos1, true, ideal)?.sub(&pos2);
            let d2 = atlas.cross_ray(j, &neg2, false, ideal)?.sub(&neg1);
            for d in [d1, d2] {
                if !d.is_zero() {
                    out.push(RayDefect { ray: j, p: LatticeVector(p.clone()), defect: d });
                }
            }
        }
    }
    Ok(out)
}
