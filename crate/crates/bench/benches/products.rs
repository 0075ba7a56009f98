use std::hint::black_box;
use std::path::{Path, PathBuf};

use criterion::{criterion_group, criterion_main, Criterion};

use thetamirror::broken_lines::theta_product;
use thetamirror::io::{load_pair, load_table, load_walls};
use thetamirror::theta_algebra::{associativity_check, mult_table};
use thetamirror::{candidates, LatticeVector, TruncationIdeal};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn generators() -> Vec<LatticeVector> {
    let mut g = vec![LatticeVector::zero(4)];
    g.extend((0..4).map(|i| LatticeVector::unit(4, i)));
    g
}

fn bench_products(c: &mut Criterion) {
    let pair = load_pair(&fixture("blowup.json")).unwrap();
    let table = load_table(&fixture("blowup_N.json"), &pair.descriptor).unwrap();
    let ideal = TruncationIdeal::unit(3, 3);
    let gens = generators();
    let (p2, p4) = (LatticeVector::unit(4, 1), LatticeVector::unit(4, 3));

    c.bench_function("candidates p2 p4", |b| b.iter(|| candidates(&pair, black_box(&p2), black_box(&p4), &ideal).unwrap()));
    c.bench_function("mult_table blowup", |b| b.iter(|| mult_table(&pair, black_box(&gens), &table, &ideal).unwrap()));
    c.bench_function("associativity blowup", |b| b.iter(|| associativity_check(&pair, black_box(&gens), &table, &ideal).unwrap()));

    let full = load_pair(&fixture("blowup_full.json")).unwrap();
    let walls = load_walls(&fixture("blowup_full_walls.json"), Some(&full)).unwrap();
    c.bench_function("theta_product p2 p4", |b| b.iter(|| theta_product(&walls, black_box(&p2), black_box(&p4), &ideal, 11).unwrap()));
}

criterion_group!(benches, bench_products);
criterion_main!(benches);
