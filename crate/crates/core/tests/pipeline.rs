use cj_ofdm::channel::{read_channels, sample_channels, write_channels, Geometry, Seed};
use cj_ofdm::dual::SolverConfig;
use cj_ofdm::experiment::{run_sweep, summarize, ExperimentConfig, Metric, Scheme};
use cj_ofdm::model::{check_feasible, DEFAULT_FEASIBILITY_TOL};
use cj_ofdm::outer::{solve_joint_profile, InnerSolver, OuterConfig};
use cj_ofdm::units::{db_to_linear, dbm_to_watts, watts_to_dbm};
use cj_ofdm::{Execution, ReceiverType, SystemParams};

fn scenario(n: usize) -> (Geometry, SystemParams) {
    let geo = Geometry::new(0.5, 5.0, 5.0, db_to_linear(-30.0), 1.0, 3.0).unwrap();
    let p_s = dbm_to_watts(30.0);
    let noise = dbm_to_watts(-100.0) / n as f64;
    (geo, SystemParams::new(n, p_s, p_s, 1.0, 0.5, noise, noise).unwrap())
}

#[test]
fn joint_search_is_feasible_and_mode_independent() {
    let (geo, params) = scenario(8);
    let ch = sample_channels(&geo, 8, Seed::new(3, 0)).unwrap();
    let outer = OuterConfig { grid_points: 21, ..OuterConfig::with_inner(InnerSolver::Mm) };
    for rx in ReceiverType::ALL {
        let run = |execution| {
            let cfg = SolverConfig { execution, ..SolverConfig::default() };
            solve_joint_profile(rx, &ch, &params, &outer, &cfg).unwrap()
        };
        let (par, seq) = (run(Execution::Parallel), run(Execution::Sequential));
        assert_eq!(par.solution, seq.solution);
        let s = &par.solution;
        assert!(check_feasible(s.time, &s.power, &ch, &params, DEFAULT_FEASIBILITY_TOL).is_feasible());
        let best = par.grid.iter().chain(&par.refined).map(|g| g.1).fold(0.0, f64::max);
        assert_eq!(s.secrecy_rate, best);
    }
}

#[test]
fn single_realization_summary_equals_row() {
    let cfg = ExperimentConfig {
        n_subcarriers: 4,
        realizations: 1,
        sweep_values: vec![20.0, 30.0],
        schemes: vec![Scheme::NoCj],
        ..ExperimentConfig::default()
    };
    let rows = run_sweep(&cfg).unwrap();
    let summary = summarize(&rows, Metric::SecrecyRate);
    assert_eq!(summary.len(), 2);
    for (row, s) in rows.iter().zip(&summary) {
        assert_eq!((s.mean, s.stderr, s.n), (row.secrecy_rate, 0.0, 1));
    }
}

#[test]
fn channel_file_round_trip() {
    let (geo, _) = scenario(6);
    let records: Vec<(u64, _)> = (0..3).map(|k| (k, sample_channels(&geo, 6, Seed::new(11, k)).unwrap())).collect();
    let mut buf = Vec::new();
    write_channels(&mut buf, &records).unwrap();
    assert_eq!(read_channels(&buf[..]).unwrap(), records);
}

#[test]
fn dbm_round_trip() {
    for dbm in [-100.0, -30.0, 0.0, 15.0, 35.0] {
        let back = watts_to_dbm(dbm_to_watts(dbm));
        assert!((back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0));
    }
}
