use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hypgeo::counting;
use hypgeo::entropy::{self, DEFAULT_WINDOW};
use hypgeo::patterson_sullivan::{plane as psp, tree as pst};
use hypgeo::plane::{self, PlanePoint};
use hypgeo::tree::{self, Word};
use hypgeo::{Group, SpacePoint};
use hypgeo_bench::modular_atoms;

fn counting(c: &mut Criterion) {
    let grid: Vec<f64> = (0..=12).map(f64::from).collect();
    c.bench_function("tree orbit census R<=12", |b| {
        b.iter(|| counting::orbit_count(&Group::Free { rank: 2 }, &SpacePoint::Tree(Word::identity()), black_box(&grid)).unwrap())
    });
    c.bench_function("modular geodesic census T<=8", |b| b.iter(|| counting::geodesic_census(&Group::modular(), black_box(8.0)).unwrap()));
}

fn measures(c: &mut Criterion) {
    let ball: Vec<Word> = tree::ball_enumerate(2, 2).collect();
    c.bench_function("tree conformal check depth 4", |b| b.iter(|| pst::conformal_check(2, black_box(&ball), 4).unwrap()));
    let (base, atoms, set) = modular_atoms(10.0);
    let q = PlanePoint::new(0.3, 2.0).unwrap();
    c.bench_function("modular conformal check 128 arcs", |b| b.iter(|| psp::conformal_check(&atoms, &base, black_box(&q), 128, &set).unwrap()));
}

fn geometry(c: &mut Criterion) {
    c.bench_function("plane delta estimate 10k", |b| b.iter(|| plane::estimate_delta(black_box(10_000), 20.0, 7)));
    let u = entropy::tree_universe(2, 7, DEFAULT_WINDOW).unwrap();
    c.bench_function("tree spanning counts n<=6", |b| {
        b.iter(|| entropy::estimate_htop(&u, black_box(&[1, 2, 3, 4, 5, 6]), &[0.5], None).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = counting, measures, geometry
}
criterion_main!(benches);
