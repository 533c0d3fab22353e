//! Affine point counting across the exhaustive/baby-step cutover
//! (exhaustive up to 10^4 elements, group-order walk above).

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ffec_core::funcfield::parse_poly;
use ffec_core::lfunction::count_points;
use ffec_core::residue::ResidueField;
use ffec_core::{FieldSpec, Place};

fn residue_field(degree: usize) -> ResidueField {
    let spec = FieldSpec::prime(5).unwrap();
    for c1 in 0..5u64 {
        for c0 in 1..5u64 {
            let p = parse_poly(&spec, &format!("t^{degree}+{c1}*t+{c0}")).unwrap();
            if p.is_irreducible() {
                let place = Place::finite(p).unwrap();
                return ResidueField::new(&place).unwrap();
            }
        }
    }
    panic!("no sparse irreducible of degree {degree}");
}

fn bench_counts(c: &mut Criterion) {
    let mut group = c.benchmark_group("count_points");
    group.sample_size(10);
    for degree in [5usize, 6, 7] {
        let rf = residue_field(degree);
        let a = rf.order() / 3;
        let b = rf.order() / 7 + 1;
        let name = format!("q_5e{degree}");
        group.bench_function(&name, |bench| {
            bench.iter(|| count_points(&rf, black_box(a), black_box(b)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_counts);
criterion_main!(benches);
