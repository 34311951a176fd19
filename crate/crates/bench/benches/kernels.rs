use criterion::{black_box, criterion_group, criterion_main, Criterion};
use orbitlab_core::catalog_pair;
use orbitlab_core::limit::{limit_family, CompactIrrep, LimitExperiment};
use orbitlab_core::measure::orbital::orbital_integral_mu;
use orbitlab_core::measure::TestFunction;
use orbitlab_core::orbit::atlas;
use orbitlab_core::weil::CayleyChart;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn orbit_atlas(c: &mut Criterion) {
    let p = catalog_pair("O3_Sp8").unwrap();
    c.bench_function("atlas O3_Sp8", |b| b.iter(|| atlas(black_box(&p)).unwrap()));
}

fn weil_character(c: &mut Criterion) {
    let p = catalog_pair("U2_U22").unwrap();
    let chart = CayleyChart::new(&p);
    let x = chart.random_x(&mut ChaCha8Rng::seed_from_u64(1));
    c.bench_function("theta_on_cayley U2_U22", |b| b.iter(|| chart.theta_on_cayley(black_box(&x)).unwrap()));
    let phi = TestFunction::standard(p.dim_w());
    c.bench_function("gaussian_pairing U2_U22", |b| b.iter(|| chart.gaussian_pairing(black_box(&x), &phi).unwrap()));
}

fn orbital_mc(c: &mut Criterion) {
    let p = catalog_pair("O3_Sp4").unwrap();
    let phi = TestFunction::standard(p.dim_w());
    let mut g = c.benchmark_group("orbital_integral");
    g.sample_size(10);
    g.bench_function("O3_Sp4 k=2, 20k samples", |b| b.iter(|| orbital_integral_mu(&p, 2, &phi, 20_000, 3).unwrap()));
    g.finish();
}

fn intertwining(c: &mut Criterion) {
    let p = catalog_pair("U1_U11").unwrap();
    let exp = LimitExperiment::new(&p, CompactIrrep::parse(&p, "1").unwrap()).unwrap();
    let phi = limit_family(&p).remove(0).1;
    let mut g = c.benchmark_group("intertwining_value");
    g.sample_size(20);
    g.bench_function("U1_U11 t=0.01", |b| b.iter(|| exp.intertwining_value(&phi.dilate(0.01)).unwrap()));
    g.finish();
}

criterion_group!(kernels, orbit_atlas, weil_character, orbital_mc, intertwining);
criterion_main!(kernels);
