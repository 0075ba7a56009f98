//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use thetamirror::broken_lines::theta_product;
use thetamirror::cone_complex::integral_points;
use thetamirror::io::{load_pair, load_table};
use thetamirror::scattering2d::{complete, consistency_check, Wall, WallStructure};
use thetamirror::theta_algebra::{associativity_check, product, zeroth_product, ThetaAlgebra};
use thetamirror::trop_types::{balancing_check, basic_monoid, Edge, Leg, LegKind, TropicalType, Vertex};
use thetamirror::trunc_ring::q;
use thetamirror::{candidates, BasisCone, CurveClass, InvariantTable, LaurentElement, LatticeVector, Pair, ThetaElement, TruncatedSeries, TruncationIdeal};

use common::fixture;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn p(i: usize) -> LatticeVector {
    LatticeVector::unit(4, (i - 1) % 4)
}

fn o() -> LatticeVector {
    LatticeVector::zero(4)
}

fn cls(v: [i64; 3]) -> CurveClass {
    CurveClass(v.to_vec())
}

fn blowup() -> Pair {
    load_pair(&fixture("blowup.json")).unwrap()
}

fn worked_table(pair: &Pair) -> InvariantTable {
    let mut t = InvariantTable::new();
    let d = &pair.descriptor;
    t.insert(d, &p(1), &p(3), &o(), &cls([0, 1, 0]), q(1)).unwrap();
    t.insert(d, &p(2), &p(4), &o(), &cls([1, 0, 1]), q(1)).unwrap();
    t.insert(d, &p(2), &p(4), &p(1), &cls([1, 0, 0]), q(1)).unwrap();
    t
}

fn t_theta(rank: usize, terms: &[([i64; 3], LatticeVector)]) -> ThetaElement {
    let mut e = ThetaElement::zero(rank);
    for (b, r) in terms {
        e.add_term(r.clone(), TruncatedSeries::t_pow(&cls(*b), q(1), &TruncationIdeal::unit(rank, 3)));
    }
    e
}

/// The products stated for the blowup: `(p, q, expected)`.
fn expected_products() -> Vec<(LatticeVector, LatticeVector, ThetaElement)> {
    let mut out = vec![
        (p(1), p(3), t_theta(3, &[([0, 1, 0], o())])),
        (p(2), p(4), t_theta(3, &[([1, 0, 1], o()), ([1, 0, 0], p(1))])),
    ];
    for i in 1..=4 {
        out.push((p(i), p(i + 1), ThetaElement::theta(&p(i).add(&p(i + 1)), 3)));
    }
    out
}

fn criterion1() -> Check {
    let pair = blowup();
    let table = worked_table(&pair);
    let ideal = TruncationIdeal::unit(3, 3);
    for (a, b, want) in expected_products() {
        let got = product(&pair, &a, &b, &table, &ideal).map_err(|e| e.to_string())?;
        ensure(got == want, format!("theta_{a} theta_{b} = {} (expected {})", got.render(pair.class_names()), want.render(pair.class_names())))?;
        let back = product(&pair, &b, &a, &table, &ideal).map_err(|e| e.to_string())?;
        ensure(back == got, "product is not symmetric")?;
    }
    Ok("6 products exact".into())
}

/// Independent enumeration over `r` of height <= 4 and `beta` of degree <= 3.
fn brute_force(pair: &Pair, a: &LatticeVector, b: &LatticeVector, bound: i64) -> BTreeSet<(LatticeVector, CurveClass)> {
    let d = &pair.descriptor;
    let rows = &d.intersection_matrix;
    let dot = |beta: &[i64], i: usize| -> i64 { (0..beta.len()).map(|k| beta[k] * rows[k][i]).sum() };
    let cones: Vec<BTreeSet<usize>> = d.strata.iter().map(|s| s.indices().clone()).collect();
    let in_b = |r: &[i64]| -> bool {
        let supp: BTreeSet<usize> = (0..4).filter(|&i| r[i] != 0).collect();
        supp.is_empty() || cones.iter().any(|c| supp.is_subset(c))
    };
    let mut out = BTreeSet::new();
    let box4 = |h: i64| (0..=h).flat_map(move |x| (0..=h - x).flat_map(move |y| (0..=h - x - y).map(move |z| (x, y, z))));
    for (r0, r1, r2) in box4(4) {
        for r3 in 0..=(4 - r0 - r1 - r2) {
            let r = [r0, r1, r2, r3];
            if !in_b(&r) {
                continue;
            }
            for (b0, b1, b2) in box4(3) {
                let beta = [b0, b1, b2];
                if b0 + b1 + b2 >= bound {
                    continue;
                }
                if (0..4).any(|i| dot(&beta, i) != a.0[i] + b.0[i] - r[i]) {
                    continue;
                }
                if (0..4).map(|i| d.discrepancies[i] * dot(&beta, i)).sum::<i64>() != 0 {
                    continue;
                }
                // A curve through a general point of the boundary curve Z_r
                // contains it or has a component meeting it positively.
                let supp: Vec<usize> = (0..4).filter(|&i| r[i] != 0).collect();
                if supp.len() == 1 && beta != [0, 0, 0] {
                    let j = supp[0];
                    let z = &d.curve_strata.iter().find(|c| c.cone.indices().iter().eq([j].iter())).unwrap().class.clone().unwrap();
                    let contains = (0..3).all(|k| beta[k] >= z.0[k]);
                    let meets = box4(3).any(|(g0, g1, g2)| {
                        let g = [g0, g1, g2];
                        g != [0, 0, 0] && (0..3).all(|k| g[k] <= beta[k]) && dot(&g, j) > 0
                    });
                    if !contains && !meets {
                        continue;
                    }
                }
                out.insert((LatticeVector(r.to_vec()), CurveClass(beta.to_vec())));
            }
        }
    }
    out
}

fn criterion2() -> Check {
    let pair = blowup();
    let ideal = TruncationIdeal::unit(3, 3);
    let cases = [
        (p(1), p(3), vec![(o(), cls([0, 1, 0]))]),
        (p(2), p(4), vec![(o(), cls([1, 0, 1])), (p(1), cls([1, 0, 0]))]),
    ];
    for (a, b, want) in cases {
        let got: BTreeSet<_> = candidates(&pair, &a, &b, &ideal).map_err(|e| e.to_string())?.pairs().into_iter().collect();
        let want: BTreeSet<_> = want.into_iter().collect();
        ensure(got == want, format!("candidates({a},{b}) = {got:?}"))?;
        let brute = brute_force(&pair, &a, &b, 3);
        ensure(brute == got, format!("brute force for ({a},{b}) found {brute:?}"))?;
    }
    Ok("both candidate sets match the brute-force enumeration".into())
}

fn generators() -> Vec<LatticeVector> {
    let mut v = vec![o()];
    v.extend((1..=4).map(p));
    v
}

fn criterion3() -> Check {
    let pair = blowup();
    let ideal = TruncationIdeal::unit(3, 3);
    let shipped = load_table(&fixture("blowup_N.json"), &pair.descriptor).map_err(|e| e.to_string())?;
    let worked = worked_table(&pair);
    for ((a, b, r, beta), n) in worked.entries() {
        ensure(shipped.get(a, b, r, beta) == Some(n), "shipped table disagrees with the worked example")?;
    }
    let v = associativity_check(&pair, &generators(), &shipped, &ideal).map_err(|e| e.to_string())?;
    ensure(v.is_empty(), format!("{} violations", v.len()))?;
    for ((a, b, r, beta), _) in worked.entries() {
        let bad = shipped.perturbed(a, b, r, beta, &q(1));
        let v = associativity_check(&pair, &generators(), &bad, &ideal).map_err(|e| e.to_string())?;
        ensure(!v.is_empty(), format!("perturbing N({a},{b},{r},{beta}) went unnoticed"))?;
    }
    Ok(format!("0 violations with {} entries; each perturbed worked-example value is detected", shipped.len()))
}

/// `theta_a theta_b = theta_{a+b}` iff `a` and `b` lie in a common maximal cone.
fn zeroth_oracle(pair: &Pair, a: &LatticeVector, b: &LatticeVector) -> ThetaElement {
    let together = pair.descriptor.strata.iter().any(|s| (0..a.dim()).all(|i| (a.0[i] == 0 && b.0[i] == 0) || s.contains(i)));
    if together {
        ThetaElement::theta(&a.add(b), pair.rank())
    } else {
        ThetaElement::zero(pair.rank())
    }
}

fn criterion4() -> Check {
    let mut checked = 0;
    for f in ["p2_toric.json", "p1xp1.json"] {
        let pair = load_pair(&fixture(f)).unwrap();
        let ideal = TruncationIdeal::unit(pair.rank(), 1);
        let table = InvariantTable::new();
        let pts = integral_points(&pair.trop.cy_sub, 3);
        let alg = ThetaAlgebra::new(&pair, &table, &ideal);
        for a in &pts {
            for b in &pts {
                let got = alg.product(a, b).map_err(|e| e.to_string())?;
                ensure(got == zeroth_oracle(&pair, a, b), format!("{f}: theta_{a} theta_{b}"))?;
                ensure(got == zeroth_product(&pair, a, b), format!("{f}: zeroth_product({a},{b})"))?;
                ensure(got == alg.product(b, a).unwrap(), format!("{f}: not commutative at {a},{b}"))?;
            }
        }
        for a in &pts {
            for b in &pts {
                let ab = alg.product(a, b).unwrap();
                for c in &pts {
                    let l = alg.mul(&ab, &ThetaElement::theta(c, pair.rank())).unwrap();
                    let r = alg.mul(&ThetaElement::theta(a, pair.rank()), &alg.product(b, c).unwrap()).unwrap();
                    ensure(l == r, format!("{f}: not associative at {a},{b},{c}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} triples associative"))
}

fn gps_walls() -> Vec<Wall> {
    let one = LaurentElement::one_laurent(2, 2);
    vec![
        Wall::new(vec![1, 0], true, one.add(&LaurentElement::term(vec![1, 0], vec![1, 0], q(1)))).unwrap(),
        Wall::new(vec![0, 1], true, one.add(&LaurentElement::term(vec![0, 1], vec![0, 1], q(1)))).unwrap(),
    ]
}

fn criterion5() -> Check {
    let s = WallStructure::planar(2, vec!["t1".into(), "t2".into()], gps_walls()).unwrap();
    let ideal = TruncationIdeal::unit(2, 3);
    let c = complete(&s, &ideal).map_err(|e| e.to_string())?;
    ensure(c.added.len() == 1, format!("{} rays added", c.added.len()))?;
    let w = &c.added[0];
    // Under the crossing convention fixed by the blowup products the new ray
    // points along (-1,-1) and carries z^(1,1).
    ensure(w.direction == vec![-1, -1] && !w.line, format!("added ray {:?}", w.direction))?;
    let f = LaurentElement::one_laurent(2, 2).add(&LaurentElement::term(vec![1, 1], vec![1, 1], q(1)));
    ensure(w.function == f, format!("added function {}", w.function))?;
    ensure(consistency_check(&c.structure, &ideal, 2).unwrap().consistent, "completed structure is inconsistent")?;
    let rep = consistency_check(&s, &ideal, 2).unwrap();
    ensure(!rep.consistent, "structure without the added ray passes")?;
    for l in &rep.loops {
        for d in &l.defects {
            ensure(d.terms().all(|(k, _)| k.beta == vec![1, 1]), format!("defect {d} not supported on t1 t2"))?;
        }
    }
    Ok("one ray R>=0(-1,-1) with 1 + t1 t2 z^(1,1); defect on t1 t2 without it".into())
}

fn criterion6() -> Check {
    let pair = blowup();
    let table = worked_table(&pair);
    let f = LaurentElement::one_laurent(3, 4).add(&LaurentElement::term(vec![0, 0, 1], vec![-1, 0, 0, 0], q(1)));
    let s = WallStructure::looijenga(&pair, vec![Wall::new(vec![1, 0, 0, 0], false, f).unwrap()]).map_err(|e| e.to_string())?;
    let ideal = TruncationIdeal::unit(3, 3);
    for seed in [11, 23, 47] {
        for (a, b, _) in expected_products() {
            let lines = theta_product(&s, &a, &b, &ideal, seed).map_err(|e| e.to_string())?;
            let got = ThetaElement::from_terms(3, lines);
            let want = product(&pair, &a, &b, &table, &ideal).unwrap();
            ensure(got == want, format!("seed {seed}: theta_{a} theta_{b} = {}", got.render(pair.class_names())))?;
        }
    }
    Ok("6 products x 3 endpoint samples agree".into())
}

fn criterion7() -> Check {
    let v = |idx: &[usize]| Vertex { cone: BasisCone::new(idx.iter().map(|i| i - 1)) };
    let t0 = TropicalType::in_divisor_coords("generic", 3, vec![v(&[])], vec![], vec![]);
    let t1 = TropicalType::in_divisor_coords("two components", 3, vec![v(&[]), v(&[2, 3])], vec![Edge { from: 0, to: 1, u: vec![0, 1, 1] }], vec![]);
    let t2 = TropicalType::in_divisor_coords("P2 x A1", 4, vec![v(&[4]), v(&[2, 3, 4])], vec![Edge { from: 0, to: 1, u: vec![0, 1, 1, 0] }], vec![]);
    let dims: Vec<usize> = [&t0, &t1, &t2].iter().map(|t| basic_monoid(t).map(|c| c.dim)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    ensure(dims == vec![0, 1, 2], format!("dimensions {dims:?}"))?;
    let fig1 = TropicalType {
        name: "figure 1".into(),
        rays: vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
        vertices: vec![v(&[]), v(&[1, 2])],
        edges: vec![Edge { from: 0, to: 1, u: vec![1, 1] }],
        legs: vec![
            Leg { vertex: 1, contact: vec![1, 1, 0], kind: LegKind::Marked },
            Leg { vertex: 1, contact: vec![0, 0, 0], kind: LegKind::Marked },
            Leg { vertex: 0, contact: vec![0, 0, 1], kind: LegKind::Marked },
        ],
    };
    let bal = balancing_check(&fig1, true).map_err(|e| e.to_string())?;
    ensure(bal.len() == 2 && bal.iter().all(|b| b.balanced), format!("{bal:?}"))?;
    Ok("dimensions 0/1/2; both vertices of figure 1 balanced".into())
}

fn criterion8() -> Check {
    let suites: [(&str, fn(u32) -> Result<(), String>); 6] = [
        ("complex closure", common::complex_closure),
        ("transport", common::transport_round_trip),
        ("ring axioms", common::ring_axioms),
        ("exp/log", common::exp_log),
        ("reduce . product", common::flat_reduction),
        ("grading", common::grading_additivity),
    ];
    for (name, f) in suites {
        f(128).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok("6 suites x 128 cases".into())
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Check); 8] = [
        (1, "blowup multiplication table", 1, criterion1),
        (2, "candidate sets vs brute force", 5, criterion2),
        (3, "associativity and perturbation", 10, criterion3),
        (4, "zeroth-order oracle on toric pairs", 5, criterion4),
        (5, "planar scattering completion", 1, criterion5),
        (6, "broken-line route equivalence", 5, criterion6),
        (7, "tropical types", 1, criterion7),
        (8, "property suites", 60, criterion8),
    ];
    let mut failed = 0;
    for (n, name, budget, f) in criteria {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let res = res.and_then(|msg| {
            if took > Duration::from_secs(budget) {
                Err(format!("took {:.2}s, budget {budget}s", took.as_secs_f64()))
            } else {
                Ok(msg)
            }
        });
        match res {
            Ok(msg) => println!("criterion {n} PASS  {name}: {msg} ({:.3}s)", took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {msg} ({:.3}s)", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
