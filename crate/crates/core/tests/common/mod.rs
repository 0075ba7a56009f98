//! Property suites shared by the property tests and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use thetamirror::cone_complex::{build_complex, integral_points, parallel_transport};
use thetamirror::io::load_pair;
use thetamirror::snc_pair::grading;
use thetamirror::theta_algebra::{product, reduce_mod_m, zeroth_product};
use thetamirror::trunc_ring::{exp_nilpotent, log_unit, q_frac};
use thetamirror::{candidates, BasisCone, CurveClass, InvariantTable, LatticeVector, Pair, TruncatedSeries, TruncationIdeal, Q};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn cone_of(mask: u32) -> BasisCone {
    BasisCone::new((0..32).filter(|i| mask >> i & 1 == 1))
}

/// Every face and pairwise intersection is present, nothing else is.
pub fn complex_closure(cases: u32) -> Result<(), String> {
    let strat = (1usize..=6).prop_flat_map(|m| (Just(m), prop::collection::vec(1u32..(1 << m), 1..5)));
    runner(cases)
        .run(&strat, |(m, masks)| {
            let strata: Vec<BasisCone> = masks.iter().map(|&k| cone_of(k)).collect();
            let c = build_complex(&strata, m).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let members: BTreeSet<BasisCone> = c.cones().cloned().collect();
            for s in &strata {
                prop_assert!(members.contains(s));
            }
            for a in &members {
                for f in a.faces() {
                    prop_assert!(members.contains(&f), "face {f} of {a} missing");
                }
                for b in &members {
                    prop_assert!(members.contains(&a.intersection(b)));
                }
                prop_assert!(strata.iter().any(|s| a.is_face_of(s)), "{a} is not a face of an input stratum");
            }
            prop_assert_eq!(c.dim(), strata.iter().map(|s| s.dim()).max().unwrap());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Charts have determinant -1, fix the facet, and invert.
pub fn transport_round_trip(cases: u32) -> Result<(), String> {
    let strat = (2usize..=6)
        .prop_flat_map(|m| (Just(m), Just((0..m).collect::<Vec<usize>>()).prop_shuffle(), 0usize..=(m - 2)))
        .prop_flat_map(|(m, perm, k)| {
            (Just(m), Just(perm), Just(k), prop::collection::vec(-3i64..=3, k), prop::collection::vec(-4i64..=4, k + 1))
        });
    runner(cases)
        .run(&strat, |(m, perm, k, ns, coeffs)| {
            let rho = BasisCone::new(perm[..k].iter().copied());
            let (i1, i1p) = (perm[k], perm[k + 1]);
            let s1 = BasisCone::new(perm[..=k].iter().copied());
            let s2 = BasisCone::new(perm[..k].iter().copied().chain([i1p]));
            let numbers = perm[..k].iter().copied().zip(ns.iter().copied()).collect();
            let chart = parallel_transport(&rho, &s1, &s2, &numbers).map_err(|e| TestCaseError::fail(e.to_string()))?.with_rank(m);
            prop_assert_eq!(chart.determinant().abs(), 1);
            let back = chart.inverse(&numbers).map_err(|e| TestCaseError::fail(e.to_string()))?.with_rank(m);
            let mut v = LatticeVector::zero(m);
            for (j, &c) in perm[..k].iter().chain([&i1]).zip(&coeffs) {
                v.0[*j] = c;
            }
            let mut facet = v.clone();
            facet.0[i1] = 0;
            prop_assert_eq!(chart.apply(&facet).unwrap(), facet.clone());
            let w = chart.apply(&v).unwrap();
            prop_assert!(w.0.iter().enumerate().all(|(i, &x)| x == 0 || s2.contains(i)));
            prop_assert_eq!(back.apply(&w).unwrap(), v);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn series_strategy(rank: usize, with_constant: bool) -> impl Strategy<Value = Vec<(Vec<i64>, i64, i64)>> {
    prop::collection::vec((prop::collection::vec(0i64..3, rank), -5i64..=5, 1i64..=3), 0..5).prop_map(move |mut v| {
        if !with_constant {
            v.retain(|(b, _, _)| b.iter().any(|&x| x != 0));
        }
        v
    })
}

fn build(rank: usize, terms: &[(Vec<i64>, i64, i64)], ideal: &TruncationIdeal) -> TruncatedSeries {
    TruncatedSeries::from_terms(&CurveClass::zero(rank), terms.iter().map(|(b, n, d)| (CurveClass(b.clone()), q_frac(*n, *d))), ideal)
}

/// Commutative ring axioms in `A_I`.
pub fn ring_axioms(cases: u32) -> Result<(), String> {
    let ideal = TruncationIdeal::new(vec![1, 2], 5).unwrap();
    let strat = (series_strategy(2, true), series_strategy(2, true), series_strategy(2, true));
    runner(cases)
        .run(&strat, |(a, b, c)| {
            let (x, y, z) = (build(2, &a, &ideal), build(2, &b, &ideal), build(2, &c, &ideal));
            let one = TruncatedSeries::one_series(2);
            prop_assert_eq!(x.mul(&y, &ideal).mul(&z, &ideal), x.mul(&y.mul(&z, &ideal), &ideal));
            prop_assert_eq!(x.mul(&y, &ideal), y.mul(&x, &ideal));
            prop_assert_eq!(x.mul(&y.add(&z), &ideal), x.mul(&y, &ideal).add(&x.mul(&z, &ideal)));
            prop_assert_eq!(one.mul(&x, &ideal), x.clone());
            prop_assert!(x.sub(&x).is_zero());
            prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `log . exp` and `exp . log` are inverse on nilpotents and 1-units.
pub fn exp_log(cases: u32) -> Result<(), String> {
    let ideal = TruncationIdeal::unit(3, 4);
    runner(cases)
        .run(&series_strategy(3, false), |a| {
            let x = build(3, &a, &ideal);
            let e = exp_nilpotent(&x, &ideal).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(log_unit(&e, &ideal).unwrap(), x.clone());
            let u = TruncatedSeries::one_series(3).add(&x);
            prop_assert_eq!(exp_nilpotent(&log_unit(&u, &ideal).unwrap(), &ideal).unwrap(), u.clone());
            prop_assert!(u.mul(&u.inv_unit(&ideal).unwrap(), &ideal).is_one());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Table with arbitrary values on every non-forced candidate of `(p, q)`.
pub fn random_table(pair: &Pair, p: &LatticeVector, qv: &LatticeVector, ideal: &TruncationIdeal, vals: &[i64]) -> InvariantTable {
    let mut t = InvariantTable::new();
    let cands = candidates(pair, p, qv, ideal).unwrap();
    for (i, c) in cands.entries.iter().filter(|c| !c.forced_by_constants).enumerate() {
        let n = Q::from_integer(vals[i % vals.len()].into());
        t.insert(&pair.descriptor, p, qv, &c.r, &c.beta, n).unwrap();
    }
    t
}

/// Reducing a product modulo the maximal ideal gives the zeroth-order product.
pub fn flat_reduction(cases: u32) -> Result<(), String> {
    let pairs: Vec<Pair> = ["blowup.json", "p2_toric.json", "p1xp1.json", "tate3.json"].iter().map(|f| load_pair(&fixture(f)).unwrap()).collect();
    let pts: Vec<Vec<LatticeVector>> = pairs.iter().map(|p| integral_points(&p.trop.cy_sub, 3)).collect();
    let ideal: Vec<TruncationIdeal> = pairs.iter().map(|p| TruncationIdeal::unit(p.rank(), 3)).collect();
    let strat = (0..pairs.len(), any::<prop::sample::Index>(), any::<prop::sample::Index>(), prop::collection::vec(-3i64..=3, 1..6));
    runner(cases)
        .run(&strat, |(k, i, j, vals)| {
            let (p, qv) = (i.get(&pts[k]), j.get(&pts[k]));
            let table = random_table(&pairs[k], p, qv, &ideal[k], &vals);
            let prod = product(&pairs[k], p, qv, &table, &ideal[k]).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(reduce_mod_m(&prod), zeroth_product(&pairs[k], p, qv));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// In a degeneration every output has degree `deg p + deg q`.
pub fn grading_additivity(cases: u32) -> Result<(), String> {
    let pair = load_pair(&fixture("tate3.json")).unwrap();
    let cf = pair.descriptor.central_fiber.clone().unwrap();
    let deg = |v: &LatticeVector| -> i64 { v.0.iter().zip(&cf).map(|(a, b)| a * b).sum() };
    let pts = integral_points(&pair.trop.cy_sub, 3);
    let ideal = TruncationIdeal::unit(pair.rank(), 4);
    let strat = (any::<prop::sample::Index>(), any::<prop::sample::Index>(), prop::collection::vec(-3i64..=3, 1..6));
    runner(cases)
        .run(&strat, |(i, j, vals)| {
            let (p, qv) = (i.get(&pts), j.get(&pts));
            prop_assert_eq!(grading(&pair.trop, &p.add(qv)).unwrap(), deg(p) + deg(qv));
            let table = random_table(&pair, p, qv, &ideal, &vals);
            let prod = product(&pair, p, qv, &table, &ideal).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for r in prod.support() {
                prop_assert_eq!(deg(&r), deg(p) + deg(qv), "theta_{} in theta_{} theta_{}", r, p, qv);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}
