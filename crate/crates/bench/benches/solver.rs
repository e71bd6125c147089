use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shellcrack::crack_spring::compliance;
use shellcrack::eigen::{min_buckling_factor, min_vibration_frequencies};
use shellcrack::element::{element_matrices, ElementContext};
use shellcrack::{
    critical_load, AnalysisOptions, GaussRule, LineSpringModel, Prestress, Technique,
};
use shellcrack_bench::{depth_model, Fixture};

fn element(c: &mut Criterion) {
    let model = depth_model(0.5);
    let g = model.geometry;
    let ctx =
        ElementContext::new(g.length / 21.0, g.radius, g.thickness, 3, model.material).unwrap();
    c.bench_function("element_matrices", |b| {
        b.iter(|| element_matrices(black_box(&ctx), &Prestress::axial(-1.0), GaussRule::Four))
    });
    c.bench_function("crack_compliance", |b| {
        b.iter(|| {
            compliance(
                black_box(0.5 * g.thickness),
                &g,
                &model.material,
                &LineSpringModel::default(),
            )
        })
    });
}

fn assembly_and_eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("mode_solve");
    for technique in [Technique::Conversion, Technique::SpringSet] {
        for count in [21, 41] {
            let f = Fixture::new(0.5, count, technique);
            let id = format!("{}/{count}", technique.name());
            group.bench_function(BenchmarkId::new("assemble", &id), |b| {
                b.iter(|| f.reduced(black_box(1)))
            });
            let r = f.reduced(1);
            group.bench_function(BenchmarkId::new("buckling", &id), |b| {
                b.iter(|| min_buckling_factor(black_box(&r.k), &r.k_g).unwrap())
            });
            group.bench_function(BenchmarkId::new("vibration", &id), |b| {
                b.iter(|| min_vibration_frequencies(black_box(&r.k), &r.m, 4).unwrap())
            });
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("critical_load_n1_15");
    group.sample_size(10);
    let model = depth_model(0.5);
    for technique in [Technique::Conversion, Technique::SpringSet] {
        group.bench_function(technique.name(), |b| {
            b.iter(|| {
                critical_load(
                    black_box(&model),
                    21,
                    technique,
                    1..=15,
                    &AnalysisOptions::default(),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, element, assembly_and_eigen, sweep);
criterion_main!(benches);
