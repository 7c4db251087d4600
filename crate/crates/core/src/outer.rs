//! Search over the time split `alpha2` around an inner solver, and the
//! benchmark schemes.
//!
//! The rate `alpha2 * R(alpha2)` is evaluated on a uniform grid over `[0, 1]`
//! (in parallel), then optionally refined by golden-section search on the two
//! grid cells around the best grid point. The rate need not be unimodal, so
//! the refinement is local; the best value ever evaluated is returned.

use serde::{Deserialize, Serialize};

use crate::dual::{solve_inner_optimal, SolverConfig};
use crate::error::{Error, Result};
use crate::heuristic::{solve_inner_heuristic, solve_no_jamming};
use crate::mm::solve_inner_mm;
use crate::model::{ChannelRealization, ReceiverType, Solution, SystemParams, TimeSplit};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolver {
    Optimal,
    Mm,
    Heuristic,
}

impl InnerSolver {
    pub fn as_str(self) -> &'static str {
        match self {
            InnerSolver::Optimal => "optimal",
            InnerSolver::Mm => "mm",
            InnerSolver::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterConfig {
    pub grid_points: usize,
    pub refine: bool,
    /// Golden-section search stops at this bracket width.
    pub refine_tol: f64,
    pub inner_solver: InnerSolver,
}

impl Default for OuterConfig {
    fn default() -> Self {
        OuterConfig { grid_points: 101, refine: true, refine_tol: 1e-3, inner_solver: InnerSolver::Mm }
    }
}

impl OuterConfig {
    pub fn with_inner(inner_solver: InnerSolver) -> Self {
        OuterConfig { inner_solver, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::invalid("grid_points must be at least 2"));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::invalid("refine_tol must be positive"));
        }
        Ok(())
    }
}

/// Inner solution at any `alpha2` in `[0, 1]`. At 0 nothing is sent; at 1
/// nothing can be harvested, so jamming is off and `p_IT` is water-filled.
pub fn solve_inner(
    rx: ReceiverType,
    inner: InnerSolver,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<Solution> {
    let time = TimeSplit::new(alpha2)?;
    if alpha2 == 0.0 {
        params.validate()?;
        channels.check_len(params)?;
        return Ok(Solution::zero(channels.len(), time));
    }
    if alpha2 == 1.0 {
        return solve_no_jamming(rx, channels, params);
    }
    match inner {
        InnerSolver::Optimal => solve_inner_optimal(rx, alpha2, channels, params, config),
        InnerSolver::Mm => Ok(solve_inner_mm(rx, alpha2, channels, params, config)?.solution),
        InnerSolver::Heuristic => solve_inner_heuristic(rx, alpha2, channels, params),
    }
}

/// Joint solution plus every evaluated `(alpha2, rate)` pair.
#[derive(Debug, Clone)]
pub struct JointOutcome {
    pub solution: Solution,
    /// Grid points in increasing `alpha2`.
    pub grid: Vec<(f64, f64)>,
    /// Refinement points in evaluation order.
    pub refined: Vec<(f64, f64)>,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes the secrecy rate over `alpha2`. Grid ties go to the smaller
/// `alpha2`.
pub fn solve_joint_profile(
    rx: ReceiverType,
    channels: &ChannelRealization,
    params: &SystemParams,
    outer: &OuterConfig,
    config: &SolverConfig,
) -> Result<JointOutcome> {
    outer.validate()?;
    config.validate()?;
    params.validate()?;
    channels.check_len(params)?;
    let g = outer.grid_points;
    let alphas: Vec<f64> = (0..g).map(|k| k as f64 / (g - 1) as f64).collect();
    let sols = par::map_slice(&alphas, config.execution, |&a| {
        solve_inner(rx, outer.inner_solver, a, channels, params, config)
    });
    let sols: Vec<Solution> = sols.into_iter().collect::<Result<_>>()?;
    let grid: Vec<(f64, f64)> = alphas.iter().zip(&sols).map(|(&a, s)| (a, s.secrecy_rate)).collect();

    let mut k_best = 0;
    for k in 1..g {
        if grid[k].1 > grid[k_best].1 {
            k_best = k;
        }
    }
    let mut best = sols[k_best].clone();
    let mut refined = Vec::new();

    if outer.refine && best.secrecy_rate > 0.0 {
        let mut lo = alphas[k_best.saturating_sub(1)];
        let mut hi = alphas[(k_best + 1).min(g - 1)];
        let mut eval = |a: f64, refined: &mut Vec<(f64, f64)>| -> Result<f64> {
            let s = solve_inner(rx, outer.inner_solver, a, channels, params, config)?;
            let r = s.secrecy_rate;
            refined.push((a, r));
            if r > best.secrecy_rate {
                best = s;
            }
            Ok(r)
        };
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = eval(x1, &mut refined)?;
        let mut f2 = eval(x2, &mut refined)?;
        while hi - lo > outer.refine_tol {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                f1 = eval(x1, &mut refined)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                f2 = eval(x2, &mut refined)?;
            }
        }
    }
    Ok(JointOutcome { solution: best, grid, refined })
}

/// Maximizes the secrecy rate jointly over `alpha2` and the powers.
pub fn solve_joint(
    rx: ReceiverType,
    channels: &ChannelRealization,
    params: &SystemParams,
    outer: &OuterConfig,
    config: &SolverConfig,
) -> Result<Solution> {
    Ok(solve_joint_profile(rx, channels, params, outer, config)?.solution)
}

/// Reference schemes without the time-split search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BenchmarkScheme {
    /// Fixed `alpha2` in `(0, 1]` with an MM or heuristic inner solver.
    FixedTA { alpha2: f64, inner: InnerSolver },
    /// No cooperative jamming: `alpha2 = 1` and water-filled `p_IT`.
    NoCJ,
}

pub fn solve_benchmark(
    rx: ReceiverType,
    scheme: BenchmarkScheme,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<Solution> {
    match scheme {
        BenchmarkScheme::FixedTA { alpha2, inner } => {
            if !(alpha2 > 0.0 && alpha2 <= 1.0) {
                return Err(Error::invalid(format!("fixed alpha2 must lie in (0, 1], got {alpha2}")));
            }
            if inner == InnerSolver::Optimal {
                return Err(Error::invalid("fixed time allocation runs the MM or heuristic solver"));
            }
            config.validate()?;
            solve_inner(rx, inner, alpha2, channels, params, config)
        }
        BenchmarkScheme::NoCJ => solve_no_jamming(rx, channels, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SubcarrierGains;

    fn sc(h_j: f64, h_d: f64, h_e: f64, g_d: f64, g_e: f64) -> SubcarrierGains {
        SubcarrierGains { h_j, h_d, h_e, g_d, g_e }
    }

    #[test]
    fn useless_jamming_gives_alpha2_one() {
        let p = SystemParams::new(2, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let ch = ChannelRealization::from_gains(&[sc(1.0, 3.0, 1.0, 0.5, 0.0), sc(2.0, 2.0, 0.5, 0.1, 0.0)]).unwrap();
        for rx in ReceiverType::ALL {
            for inner in [InnerSolver::Mm, InnerSolver::Heuristic] {
                let out = solve_joint_profile(rx, &ch, &p, &OuterConfig::with_inner(inner), &SolverConfig::default())
                    .unwrap();
                assert_eq!(out.solution.time.alpha2(), 1.0, "{rx} {inner:?}");
                for &(_, r) in out.grid.iter().chain(&out.refined) {
                    assert!(out.solution.secrecy_rate >= r);
                }
                assert_eq!(out.grid[0].1, 0.0);
            }
        }
    }

    #[test]
    fn benchmark_validation() {
        let p = SystemParams::new(1, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let ch = ChannelRealization::from_gains(&[sc(1.0, 3.0, 1.0, 0.5, 0.5)]).unwrap();
        let cfg = SolverConfig::default();
        let bad = BenchmarkScheme::FixedTA { alpha2: 0.0, inner: InnerSolver::Mm };
        assert!(solve_benchmark(ReceiverType::TypeI, bad, &ch, &p, &cfg).is_err());
        let one = BenchmarkScheme::FixedTA { alpha2: 1.0, inner: InnerSolver::Heuristic };
        let a = solve_benchmark(ReceiverType::TypeI, one, &ch, &p, &cfg).unwrap();
        let b = solve_benchmark(ReceiverType::TypeI, BenchmarkScheme::NoCJ, &ch, &p, &cfg).unwrap();
        assert_eq!(a.secrecy_rate, b.secrecy_rate);
    }
}
