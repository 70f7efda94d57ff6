use criterion::{black_box, criterion_group, criterion_main, Criterion};
use flatkahler::catalog;
use flatkahler::cohomology::betti_numbers;
use flatkahler::crystal::validate;
use flatkahler::doubles::quaternionic_double;
use flatkahler::exact::{smith_normal_form_int, IntMatrix};
use flatkahler::hyperhermitian::assemble;
use flatkahler::twistor::{kahler_form, scan_locus, TwistorPoint};

fn bench_validate_dihedral(c: &mut Criterion) {
    let data = catalog::build("d4_threefold").unwrap();
    c.bench_function("validate d4_threefold", |b| {
        b.iter(|| validate(black_box(&data), 1_000).unwrap())
    });
}

fn bench_betti_of_double(c: &mut Criterion) {
    let double = quaternionic_double(&catalog::build("d4_threefold").unwrap()).unwrap();
    c.bench_function("betti numbers of the rank-16 double", |b| {
        b.iter(|| betti_numbers(black_box(&double.data)).unwrap())
    });
}

fn bench_smith_normal_form(c: &mut Criterion) {
    let m = IntMatrix::from_i64_rows(&[
        &[2, 4, 4, 0],
        &[-6, 6, 12, 0],
        &[10, -4, -16, 6],
        &[0, 4, 2, -2],
    ]);
    c.bench_function("smith normal form 4x4", |b| {
        b.iter(|| smith_normal_form_int(black_box(&m)))
    });
}

fn bench_locus_scan(c: &mut Criterion) {
    let double = quaternionic_double(&catalog::build("square_torus").unwrap()).unwrap();
    let hyper = assemble(&double.data, &double.canonical_sigma1).unwrap();
    let omega = kahler_form(&hyper, &TwistorPoint::new(1.0, 0.0, 0.0).unwrap()).unwrap();
    c.bench_function("locus scan, rank 4, grid 5000", |b| {
        b.iter(|| scan_locus(black_box(&hyper), black_box(&omega), 5_000).unwrap())
    });
}

criterion_group!(
    benches,
    bench_validate_dihedral,
    bench_betti_of_double,
    bench_smith_normal_form,
    bench_locus_scan
);
criterion_main!(benches);
