use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use distmon::formula::{holds, parse_formula};
use distmon::metric::four_values_search;
use distmon::star::{star_add, star_diff};
use distmon::urysohn::{canonical_schemes, check_extension_axiom, grow_generic, qe_decision, GrowthConfig};
use distmon_bench::{monoid, path_space, value_pairs};

fn completion_arithmetic(c: &mut Criterion) {
    let mut group = c.benchmark_group("completion");
    for (name, pairs) in [
        ("twoThree", vec![("1", "3"), ("1", "1"), ("gap(2)", "1/2"), ("3+", "omega")]),
        ("noQE", vec![("gap(3)", "2"), ("2", "2+"), ("5/2", "7/3")]),
        ("Q1", vec![("1/3", "1/2"), ("1/2+", "1/4"), ("1", "1")]),
    ] {
        let spec = monoid(name);
        let values = value_pairs(&spec, &pairs);
        group.bench_with_input(BenchmarkId::new("star_add", name), &values, |b, vs| {
            b.iter(|| vs.iter().map(|(x, y)| star_add(&spec, black_box(x), black_box(y))).count())
        });
        group.bench_with_input(BenchmarkId::new("star_diff", name), &values, |b, vs| {
            b.iter(|| vs.iter().map(|(x, y)| star_diff(&spec, black_box(x), black_box(y))).count())
        });
    }
    group.finish();
}

fn four_values(c: &mut Criterion) {
    let mut group = c.benchmark_group("four_values_search");
    for name in ["R4", "S4", "ultra3", "Q1", "gap4"] {
        let spec = monoid(name);
        group.bench_function(name, |b| b.iter(|| four_values_search(black_box(&spec))));
    }
    group.finish();
}

fn growth(c: &mut Criterion) {
    let mut group = c.benchmark_group("grow_generic");
    group.sample_size(10);
    for size in [8, 16, 24] {
        let spec = monoid("R2");
        let config = GrowthConfig { target_size: size, seed: 1, ..GrowthConfig::default() };
        group.bench_with_input(BenchmarkId::new("R2", size), &config, |b, cfg| b.iter(|| grow_generic(&spec, cfg).unwrap()));
    }
    group.finish();
}

fn model_checking(c: &mut Criterion) {
    let spec = monoid("R2");
    let grown = grow_generic(&spec, &GrowthConfig { target_size: 20, seed: 7, ..GrowthConfig::default() }).unwrap().space;
    let schemes = canonical_schemes(&spec, 2, None, None).unwrap();
    c.bench_function("check_extension/R2/20", |b| {
        b.iter(|| schemes.iter().filter(|s| matches!(check_extension_axiom(black_box(&grown), s), distmon::urysohn::ExtensionCheck::Holds)).count())
    });

    let r8 = monoid("R8");
    let path = path_space(&r8, 8);
    let f = parse_formula("forall x. forall y. exists z. d(x,z) <= 4 & d(z,y) <= 4").unwrap();
    c.bench_function("eval_formula/path8", |b| b.iter(|| holds(&r8, black_box(&path), &f).unwrap()));
}

fn qe(c: &mut Criterion) {
    let mut group = c.benchmark_group("qe_decision");
    for name in ["noQE", "Q1", "R4"] {
        let spec = monoid(name);
        group.bench_function(name, |b| b.iter(|| qe_decision(black_box(&spec)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, completion_arithmetic, four_values, growth, model_checking, qe);
criterion_main!(benches);
