//! Sequential against parallel execution for the data-parallel hot paths:
//! the dual function (per-sub-carrier subproblems), the time-split grid of
//! the joint search, and a small Monte-Carlo sweep.
//!
//! Without the `parallel` feature both variants run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cj_ofdm::channel::{sample_channels, Geometry, Seed};
use cj_ofdm::dual::{dual_function_eval, DualPoint, SolverConfig};
use cj_ofdm::experiment::{run_sweep, ExperimentConfig, Scheme};
use cj_ofdm::outer::{solve_joint, InnerSolver, OuterConfig};
use cj_ofdm::units::{db_to_linear, dbm_to_watts};
use cj_ofdm::{ChannelRealization, Execution, ReceiverType, SystemParams};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn instance(n: usize) -> (ChannelRealization, SystemParams) {
    let geo = Geometry::new(0.5, 5.0, 5.0, db_to_linear(-30.0), 1.0, 3.0).unwrap();
    let ch = sample_channels(&geo, n, Seed::new(1, 0)).unwrap();
    let p_s = dbm_to_watts(35.0);
    let noise = dbm_to_watts(-100.0) / n as f64;
    let params = SystemParams::new(n, p_s, p_s, 1.0, 0.5, noise, noise).unwrap();
    (ch, params)
}

fn dual_function(c: &mut Criterion) {
    let mut g = c.benchmark_group("dual_function");
    let (ch, params) = instance(32);
    for exec in MODES {
        let cfg = SolverConfig { execution: exec, ..SolverConfig::default() };
        g.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| {
                black_box(
                    dual_function_eval(ReceiverType::TypeI, DualPoint::new(20.0, 30.0), 0.8, &ch, &params, &cfg).value,
                )
            })
        });
    }
    g.finish();
}

fn joint_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("joint_heuristic");
    g.sample_size(20);
    let (ch, params) = instance(32);
    let outer = OuterConfig::with_inner(InnerSolver::Heuristic);
    for exec in MODES {
        let cfg = SolverConfig { execution: exec, ..SolverConfig::default() };
        g.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| black_box(solve_joint(ReceiverType::TypeII, &ch, &params, &outer, &cfg).unwrap().secrecy_rate))
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    for exec in MODES {
        let cfg = ExperimentConfig {
            realizations: 8,
            sweep_values: vec![30.0],
            grid_points: 21,
            schemes: vec![Scheme::JointHeuristic, Scheme::FixedMm, Scheme::NoCj],
            execution: exec,
            ..ExperimentConfig::default()
        };
        g.bench_function(BenchmarkId::from_parameter(format!("{exec:?}")), |b| {
            b.iter(|| black_box(run_sweep(&cfg).unwrap().len()))
        });
    }
    g.finish();
}

criterion_group!(benches, dual_function, joint_search, sweep);
criterion_main!(benches);
