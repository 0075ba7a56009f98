mod common;

use thetamirror::io::{load_pair, load_table, load_type, parse_pair, parse_table, parse_type, read_file, serialize_pair, serialize_table, serialize_type};
use thetamirror::snc_pair::{dual_graph_connected, maximality_check, tropicalize};
use thetamirror::trop_types::{balancing_check, basic_monoid, in_s_ell, s_ell_generators};

use common::fixture;

const PAIRS: [&str; 5] = ["blowup.json", "blowup_full.json", "p2_toric.json", "p1xp1.json", "tate3.json"];
const TYPES: [&str; 4] = ["fig1.json", "line_generic.json", "line_two_components.json", "line_p2_a1.json"];

#[test]
fn pairs_round_trip() {
    for f in PAIRS {
        let d = parse_pair(&read_file(&fixture(f)).unwrap()).unwrap();
        let text = serialize_pair(&d);
        assert!(text.trim_start().starts_with("{\n  \"schema_version\": 1"), "{f}");
        let back = parse_pair(&text).unwrap();
        assert_eq!(back, d, "{f}");
        assert_eq!(tropicalize(&back).unwrap(), tropicalize(&d).unwrap());
    }
}

#[test]
fn fixture_pairs_are_maximal_and_connected() {
    for f in PAIRS {
        let pair = load_pair(&fixture(f)).unwrap();
        assert!(maximality_check(&pair.trop), "{f}");
        assert!(dual_graph_connected(&pair.trop.cy_sub), "{f}");
        for rho in pair.trop.cy_sub.codim_one_cones() {
            assert_eq!(pair.trop.cy_sub.maximal_cones_containing(&rho).len(), 2, "{f}: {rho}");
        }
    }
}

#[test]
fn table_round_trip() {
    let pair = load_pair(&fixture("blowup.json")).unwrap();
    let t = load_table(&fixture("blowup_N.json"), &pair.descriptor).unwrap();
    let text = serialize_table(&t);
    assert_eq!(text.lines().filter(|l| l.contains("\"n\"")).count(), t.len());
    assert_eq!(parse_table(&text, &pair.descriptor).unwrap(), t);
}

#[test]
fn types_round_trip() {
    for f in TYPES {
        let t = load_type(&fixture(f)).unwrap();
        assert_eq!(parse_type(&serialize_type(&t)).unwrap(), t, "{f}");
    }
}

#[test]
fn moduli_dimensions_of_the_line_examples() {
    for (f, dim) in [("line_generic.json", 0), ("line_two_components.json", 1), ("line_p2_a1.json", 2)] {
        let c = basic_monoid(&load_type(&fixture(f)).unwrap()).unwrap();
        assert_eq!(c.dim, dim, "{f}");
        assert_eq!(c.rays.len(), dim, "{f}");
    }
}

#[test]
fn figure_type_is_balanced() {
    let t = load_type(&fixture("fig1.json")).unwrap();
    let b = balancing_check(&t, true).unwrap();
    assert_eq!(b.len(), 2);
    assert!(b.iter().all(|v| v.balanced));
}

#[test]
fn s_ell_generators_saturate() {
    for l in 1..=4 {
        let g = s_ell_generators(l).unwrap();
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                let sum_of_gens = (0..=6i64).any(|x| {
                    (0..=12i64).any(|y| (0..=12i64).any(|z| {
                        let mut v = [0i64; 2];
                        for (k, c) in [x, y, z].iter().enumerate() {
                            if let Some(gk) = g.get(k) {
                                v[0] += c * gk[0];
                                v[1] += c * gk[1];
                            }
                        }
                        v == [a, b]
                    }))
                });
                assert_eq!(in_s_ell(l, [a, b]), sum_of_gens, "l={l} ({a},{b})");
            }
        }
    }
}
