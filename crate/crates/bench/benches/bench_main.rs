use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fission_core::additive::{ExtendedOrbit, IrregularType};
use fission_core::sample;
use fission_core::spaces::{self, Fission, QhSpace};
use fission_core::verify::{self, Tolerances};

fn fission(c: &mut Criterion) {
    let mut rng = sample::rng(1);
    for (n, k) in [(2, 2), (3, 3)] {
        let space = Fission::new(n, k).unwrap();
        let p = space.sample_point(&mut rng).unwrap();
        let triples = verify::random_triples(space.dim(), 10, &mut rng);
        c.bench_function(&format!("fission n={n} k={k} gram"), |b| b.iter(|| spaces::gram(&space, black_box(&p)).unwrap()));
        c.bench_function(&format!("fission n={n} k={k} qh1"), |b| {
            b.iter(|| verify::check_qh1(&space, black_box(&p), &triples, 1e-8).unwrap())
        });
        let tol = Tolerances::default();
        c.bench_function(&format!("fission n={n} k={k} qh3"), |b| b.iter(|| verify::check_qh3(&space, black_box(&p), &tol).unwrap()));
    }
}

fn extended(c: &mut Criterion) {
    let mut rng = sample::rng(2);
    let orbit = ExtendedOrbit::new(IrregularType::sample(3, 3, &mut rng).unwrap());
    let p = orbit.sample_point(&mut rng);
    c.bench_function("extended orbit n=3 k=3 gram", |b| b.iter(|| orbit.gram(black_box(&p)).unwrap()));
}

criterion_group!(benches, fission, extended);
criterion_main!(benches);
