use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use specsim::spectral::Simulator;
use specsim::{make_grid, SimConfig};
use specsim_bench::cases;

const M: usize = 51;
const N: usize = 50;

fn scaling_in_t(c: &mut Criterion) {
    let grid = make_grid(M).unwrap();
    for case in cases() {
        let mut group = c.benchmark_group(case.name);
        group.sample_size(10);
        for t in [200usize, 400, 800, 1600] {
            let config = SimConfig::new(t, M, N, 1, case.method);
            let sim = Simulator::new(&case.spec, &config, &grid).unwrap();
            group.throughput(Throughput::Elements(t as u64));
            group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, _| {
                b.iter(|| black_box(sim.run().unwrap()))
            });
        }
        group.finish();
    }
}

fn scaling_in_m(c: &mut Criterion) {
    let case = &cases()[1];
    let mut group = c.benchmark_group("farfima-spectral/example2/M");
    group.sample_size(10);
    for m in [51usize, 101, 201] {
        let grid = make_grid(m).unwrap();
        let config = SimConfig::new(400, m, N, 1, case.method);
        let sim = Simulator::new(&case.spec, &config, &grid).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| b.iter(|| black_box(sim.run().unwrap())));
    }
    group.finish();
}

criterion_group!(benches, scaling_in_t, scaling_in_m);
criterion_main!(benches);
