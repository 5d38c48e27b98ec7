use criterion::{black_box, criterion_group, criterion_main, Criterion};

use hardylab::basis::{floor_value, gen_sequence, sumset_fold, DEFAULT_BITSET_BUDGET};
use hardylab::circle::{SumKernel, SumVariant};
use hardylab::hk::{solve_bruteforce, HkInstance};
use hardylab::represent::{assemble, DEFAULT_DELTA};
use hardylab::{classify, FunctionExpr};

fn f(text: &str) -> FunctionExpr {
    FunctionExpr::parse(text).unwrap()
}

fn floors(c: &mut Criterion) {
    let g = f("add(mul(pi, pow(x, 3)), div(pow(x, sqrt(2)), log(log(x)))); shift=2");
    c.bench_function("floor_value segal 1e5", |b| b.iter(|| floor_value(&g, black_box(100_000)).unwrap()));
    let h = f("pow(x, 1.5)");
    c.bench_function("gen_sequence x^1.5 10k", |b| b.iter(|| gen_sequence(&h, 1, black_box(10_000)).unwrap()));
}

fn sumsets(c: &mut Criterion) {
    let seq = gen_sequence(&f("pow(x, 2)"), 1, 317).unwrap();
    c.bench_function("sumset_fold squares s=5 to 1e5", |b| {
        b.iter(|| sumset_fold(&seq, black_box(5), 100_000, DEFAULT_BITSET_BUDGET).unwrap())
    });
}

fn exp_sums(c: &mut Criterion) {
    let kernel = SumKernel::new(&f("pow(x, 1.5)"), 1000.0, 11_000.0, SumVariant::S).unwrap();
    c.bench_function("exp_sum x^1.5 10k terms", |b| b.iter(|| kernel.eval(black_box(0.123_456))));
}

fn hk(c: &mut Criterion) {
    let inst = HkInstance::new(3, 12, vec![100, 1100, 13_600]).unwrap();
    c.bench_function("hk k=3 s=12", |b| b.iter(|| solve_bruteforce(black_box(&inst), 30, 20_000_000).unwrap()));
    let g = f("add(pow(x, 2), log(x))");
    let p = classify(&g, None).unwrap();
    c.bench_function("represent x^2+log x N=1e8", |b| {
        b.iter(|| assemble(&g, &p, black_box(100_000_000), 5, DEFAULT_DELTA, None, 20_000_000).unwrap())
    });
}

criterion_group!(benches, floors, sumsets, exp_sums, hk);
criterion_main!(benches);
