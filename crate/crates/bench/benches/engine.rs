use affjet::algebra::{Scalar, TaylorMap};
use affjet::compat::{self, Branch, ConicCoeffs};
use affjet::invariantpde as pde;
use affjet::symmetry::{act_on_jet, lifted_rank};
use affjet::{characteristics as ch, JetPoint};
use affjet_bench::{jets, maps};
use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

fn polynomial_identities(c: &mut Criterion) {
    let mut g = c.benchmark_group("identities");
    g.sample_size(10);
    g.bench_function("splitting_residual", |b| b.iter(|| black_box(pde::splitting_residual()).is_zero()));
    g.bench_function("minus_product_quotient", |b| b.iter(|| pde::minus_product_quotient().unwrap()));
    g.bench_function("cross_residuals", |b| {
        let sys = compat::build_prolonged_system();
        b.iter(|| compat::cross_residuals(black_box(sys)).unwrap())
    });
    g.bench_function("recover_pde_quotient", |b| {
        b.iter(|| ch::recover_pde_quotient(ch::FactorBranch::First).unwrap())
    });
    g.finish();
}

fn jet_evaluation(c: &mut Criterion) {
    let js = jets(256, 7);
    let floats: Vec<JetPoint> = js.iter().map(JetPoint::to_float).collect();
    c.bench_function("eval_f/exact/256", |b| b.iter(|| js.iter().map(|j| black_box(pde::eval_f(j).unwrap())).for_each(drop)));
    c.bench_function("eval_f/float/256", |b| b.iter(|| floats.iter().map(|j| black_box(pde::eval_f(j).unwrap())).for_each(drop)));
    c.bench_function("verify_pick_symbol/64", |b| {
        b.iter(|| js[..64].iter().map(|j| pde::verify_pick_symbol(j).unwrap().relative).fold(0.0, f64::max))
    });
    c.bench_function("lifted_rank/16", |b| b.iter(|| js[..16].iter().map(|j| lifted_rank(j).unwrap()).sum::<usize>()));
}

fn group_action(c: &mut Criterion) {
    let gs = maps(32, 11);
    let q = |k: usize| {
        let x = TaylorMap::var_x(Scalar::zero(), Scalar::zero(), k);
        let y = TaylorMap::var_y(Scalar::zero(), Scalar::zero(), k);
        (&(&x * &x) - &(&y * &y)).scale(&Scalar::ratio(1, 2))
    };
    let f = q(3);
    c.bench_function("act_on_jet/order3/32", |b| {
        b.iter_batched(|| f.clone(), |f| gs.iter().filter_map(|g| act_on_jet(g, &f, 3).ok()).count(), BatchSize::SmallInput)
    });
}

fn sampled_checks(c: &mut Criterion) {
    let pts: Vec<(Scalar, Scalar)> = (0..25).map(|i| (Scalar::ratio(i % 5 - 2, 7), Scalar::ratio(i / 5 - 2, 7))).collect();
    c.bench_function("conic_check/sphere/25", |b| {
        b.iter(|| compat::conic_check(&ConicCoeffs::unit_sphere(), Branch::Plus, black_box(&pts)).unwrap())
    });
    let a: [Scalar; 6] = std::array::from_fn(|i| Scalar::int(i as i64 + 1));
    let den = [Scalar::int(3), Scalar::int(1)];
    c.bench_function("family_check/25", |b| b.iter(|| compat::family_check(&a, &den, black_box(&pts)).unwrap()));
}

criterion_group!(benches, polynomial_identities, jet_evaluation, group_action, sampled_checks);
criterion_main!(benches);
