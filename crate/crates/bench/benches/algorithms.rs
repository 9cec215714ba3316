use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use archtrace::eval::{wilcoxon_exact_p, wilcoxon_one_sided};
use archtrace::exarch::{aggregate_via_similarity, AggregationConfig};
use archtrace::linker::{link_sam_to_code, LinkerConfig};
use archtrace::similarity::{jaro_winkler_similarity, normalized_levenshtein_similarity};
use archtrace::transitive::compose_links;

fn similarity(c: &mut Criterion) {
    let mut group = c.benchmark_group("similarity");
    group.bench_function("levenshtein", |b| {
        b.iter(|| normalized_levenshtein_similarity(black_box("UserManagement"), black_box("UserManager")))
    });
    group.bench_function("jaro_winkler", |b| {
        b.iter(|| jaro_winkler_similarity(black_box("MediaAccess"), black_box("MediaAcess")))
    });
    group.finish();
}

fn aggregation(c: &mut Criterion) {
    let mut group = c.benchmark_group("aggregate_via_similarity");
    let config = AggregationConfig::default();
    for n in [10, 50, 200] {
        let doc = archtrace_bench::names(n);
        let code = archtrace_bench::names(n * 2)[n..].to_vec();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| aggregate_via_similarity(black_box(&doc), black_box(&code), &config))
        });
    }
    group.finish();
}

fn composition(c: &mut Criterion) {
    let mut group = c.benchmark_group("compose_links");
    for (sentences, files) in [(50, 500), (500, 5_000)] {
        let (sad_sam, sam_code) = archtrace_bench::link_sets(sentences, 20, files);
        group.bench_with_input(BenchmarkId::from_parameter(files), &files, |b, _| {
            b.iter(|| compose_links(black_box(&sad_sam), black_box(&sam_code)))
        });
    }
    group.finish();
}

fn wilcoxon(c: &mut Criterion) {
    let mut group = c.benchmark_group("wilcoxon");
    group.bench_function("exact_p_n20", |b| b.iter(|| wilcoxon_exact_p(black_box(150.0), 20)));
    for n in [5, 20, 100] {
        let d = archtrace_bench::differences(n);
        group.bench_with_input(BenchmarkId::new("one_sided", n), &n, |b, _| {
            b.iter(|| wilcoxon_one_sided(black_box(&d)))
        });
    }
    group.finish();
}

fn linker(c: &mut Criterion) {
    let mut group = c.benchmark_group("link_sam_to_code");
    group.sample_size(20);
    for components in [5, 20] {
        let sam = archtrace_bench::sam(components);
        let code = archtrace_bench::code(&sam, 25);
        group.bench_with_input(BenchmarkId::from_parameter(code.files.len()), &components, |b, _| {
            b.iter(|| link_sam_to_code(black_box(&sam), black_box(&code), &LinkerConfig::default()))
        });
    }
    group.finish();
}

criterion_group!(benches, similarity, aggregation, composition, wilcoxon, linker);
criterion_main!(benches);
