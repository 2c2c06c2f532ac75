use calabi_core::calabi::{cal1, cal2_tilde, cal3_tilde, ActionOptions, Cal3Options, PairSampler};
use calabi_core::circle::invariant_measure;
use calabi_core::mapzoo::{shear, twist};
use calabi_core::quadrature::GridSpec;
use calabi_core::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("cal2_tilde");
    group.sample_size(10);
    let sampler = PairSampler::new(4096, 1);
    for (label, map) in [("twist", twist(0.3)), ("shear", shear(0.4, 1).unwrap())] {
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(label, mode), &exec, |b, &exec| {
                b.iter(|| cal2_tilde(&map, &sampler, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn grids(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_quadrature");
    group.sample_size(10);
    let map = shear(0.4, 1).unwrap();
    let mu = invariant_measure(&map.boundary_lift(), 0, 16, 0.0).unwrap();
    let grid = GridSpec::new(32, 32);
    for (mode, exec) in MODES {
        group.bench_function(BenchmarkId::new("cal1", mode), |b| {
            b.iter(|| cal1(&map, &mu, grid, ActionOptions { exec, ..ActionOptions::default() }).unwrap())
        });
        group.bench_function(BenchmarkId::new("cal3", mode), |b| {
            b.iter(|| {
                cal3_tilde(
                    &map,
                    Cal3Options {
                        grid,
                        time_nodes: 16,
                        exec,
                    },
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, grids);
criterion_main!(benches);
