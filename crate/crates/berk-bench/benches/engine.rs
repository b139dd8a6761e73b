use std::hint::black_box;

use berk_bench::{deep_ball, padic3, quadratic, r0_companion};
use berk_core::berkovich::{join, seminorm_eval, BerkPoint};
use berk_core::equilibrium::equilibrium_approx;
use berk_core::skeleton::shift_model;
use berk_core::valued_field::arith::qi;
use criterion::{criterion_group, criterion_main, Criterion};

fn field_and_tree(c: &mut Criterion) {
    let b = padic3();
    let s = deep_ball(6);
    let t = BerkPoint::type2(&b.from_int(10), qi(4)).unwrap();
    let poly = quadratic().num().clone();
    c.bench_function("seminorm_eval", |x| x.iter(|| seminorm_eval(black_box(&s), black_box(&poly)).unwrap()));
    c.bench_function("join", |x| x.iter(|| join(black_box(&s), black_box(&t))));
}

fn map_ops(c: &mut Criterion) {
    let r = r0_companion();
    let s = deep_ball(3);
    c.bench_function("r0_image", |x| x.iter(|| r.image_point(black_box(&s)).unwrap()));
    // Deeper targets sit inside a wildly ramified cluster.
    let t = r.image_point(&BerkPoint::on_axis(&padic3(), &qi(-1))).unwrap();
    c.bench_function("r0_preimages", |x| x.iter(|| r.preimages(black_box(&t)).unwrap()));
}

fn pullbacks(c: &mut Criterion) {
    let r = quadratic();
    let can = BerkPoint::can(&padic3());
    let mut g = c.benchmark_group("pullback");
    g.sample_size(10);
    g.bench_function("quadratic_n6", |x| x.iter(|| equilibrium_approx(&r, &can, 6).unwrap()));
    g.bench_function("shift_p2_depth4", |x| x.iter(|| shift_model(2, 4).unwrap()));
    g.finish();
}

criterion_group!(benches, field_and_tree, map_ops, pullbacks);
criterion_main!(benches);
