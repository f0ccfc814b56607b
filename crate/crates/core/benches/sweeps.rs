use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use scv_core::bishop::{BishopProblem, DiscFamily, ParameterGrid};
use scv_core::domains::{strict_psc_margin, DomainSpec};
use scv_core::kobayashi::sandwich_sweep;
use scv_core::wedge::TotallyRealGraph;
use scv_core::Exec;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn disc_family(c: &mut Criterion) {
    let template = BishopProblem::new(
        TotallyRealGraph::quadratic(2, 0.05),
        256,
        vec![0.0; 2],
        vec![0.0; 2],
    )
    .unwrap();
    let grid = ParameterGrid {
        c_max: 0.3,
        t_max: 0.3,
        points: 5,
    };
    let mut g = c.benchmark_group("disc_family_625");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| DiscFamily::solve(black_box(&template), grid, exec))
        });
    }
    g.finish();
}

fn sandwich(c: &mut Criterion) {
    let mut g = c.benchmark_group("sandwich_ball2_500");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| sandwich_sweep(2, black_box(500), 7, None, exec).unwrap())
        });
    }
    g.finish();
}

fn levi_margin(c: &mut Criterion) {
    let d = DomainSpec::ellipsoid(&[1.0, 2.0, 3.0]).unwrap();
    let mut g = c.benchmark_group("psc_margin_ellipsoid_2000");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| strict_psc_margin(black_box(&d), 2000, 3, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, disc_family, sandwich, levi_margin);
criterion_main!(benches);
