//! Brute-force reference solvers for tests.
//!
//! [`oracle_inner`] searches the inner problem exhaustively for `N <= 2`.
//! `p_PT` is not gridded: harvested power `sum p_PT |h_J|^2` and the budget
//! are both linear in `p_PT`, so for a given total `t = sum p_PT` the best
//! harvest comes from filling the strongest sub-carriers to the peak first.
//! Information power only competes with `p_PT` through the budget, so a pair
//! `(p_IT, p_J)` is feasible iff
//! `alpha2 sum p_J <= (1 - alpha2) eta H((P_S - alpha2 sum p_IT) / (1 - alpha2))`
//! with `H(t)` that best harvest. The search runs over a grid in
//! `(p_IT,1, p_J,1, p_IT,2, p_J,2)`; a prefix-maximum table over the second
//! sub-carrier's jamming axis makes each pass cost `O(steps^3)`. Optional
//! zoom passes re-grid a small box around the incumbent.

use crate::dual::greedy_fill;
use crate::error::{Error, Result};
use crate::model::{self, ChannelRealization, PowerAllocation, ReceiverType, SystemParams};
use crate::par::{self, Execution};

/// Largest search the oracle accepts, counted as grid evaluations.
pub const GRID_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub steps_per_axis: usize,
    /// Extra passes on a box of +-2 steps around the incumbent.
    pub zoom_passes: usize,
    pub execution: Execution,
}

impl GridSpec {
    pub fn new(steps_per_axis: usize) -> Self {
        GridSpec { steps_per_axis, zoom_passes: 0, execution: Execution::Parallel }
    }

    pub fn with_zoom(mut self, passes: usize) -> Self {
        self.zoom_passes = passes;
        self
    }

    /// Grid evaluations for `n` sub-carriers over all passes.
    pub fn evaluations(&self, n: usize) -> u128 {
        let pts = self.steps_per_axis as u128 + 1;
        pts.saturating_pow(n as u32 + 1).saturating_mul(self.zoom_passes as u128 + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best inner objective (bits, no `alpha2`).
    pub value: f64,
    pub secrecy_rate: f64,
    pub power: PowerAllocation,
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    count: usize,
}

impl Axis {
    fn new(lo: f64, hi: f64, steps: usize) -> Self {
        if hi > lo {
            Axis { lo, hi, count: steps + 1 }
        } else {
            Axis { lo, hi: lo, count: 1 }
        }
    }

    fn step(&self) -> f64 {
        if self.count > 1 {
            (self.hi - self.lo) / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    fn at(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            self.hi
        } else {
            self.lo + k as f64 * self.step()
        }
    }

    /// Index of the largest grid point `<= x`, if any.
    fn floor_index(&self, x: f64) -> Option<usize> {
        if x < self.lo {
            return None;
        }
        if x >= self.hi {
            return Some(self.count - 1);
        }
        let k = ((x - self.lo) / self.step()).floor() as usize;
        let k = k.min(self.count - 1);
        // round-off can put at(k) a hair above x
        if self.at(k) > x {
            k.checked_sub(1)
        } else {
            Some(k)
        }
    }

    fn zoom(&self, x: f64, bound: &Axis, steps: usize) -> Axis {
        let w = 2.0 * self.step();
        Axis::new((x - w).max(bound.lo), (x + w).min(bound.hi), steps)
    }
}

struct Instance<'a> {
    rx: ReceiverType,
    alpha2: f64,
    channels: &'a ChannelRealization,
    params: &'a SystemParams,
}

impl Instance<'_> {
    /// Jamming power (`sum p_J`) the harvest can pay for when the
    /// information slot uses `sum_it`; `None` if the budget is exceeded.
    fn jam_budget(&self, sum_it: f64) -> Option<f64> {
        let (a2, p) = (self.alpha2, self.params);
        let left = p.p_s_total - a2 * sum_it;
        if left < 0.0 {
            return None;
        }
        let p_pt = greedy_fill(left / (1.0 - a2), p.p_s_peak, self.channels);
        Some((1.0 - a2) * p.eta * model::weighted_harvest(&p_pt, self.channels) / a2)
    }

    fn term(&self, n: usize, p_it: f64, p_j: f64) -> f64 {
        model::secrecy_term(self.rx, p_it, p_j, &self.channels.gains()[n], self.params)
    }
}

/// Best point of one pass: value and grid indices `(it, j)` per sub-carrier.
type Incumbent = (f64, Vec<(usize, usize)>);

fn table(inst: &Instance, n: usize, it: &Axis, j: &Axis) -> Vec<f64> {
    let mut t = Vec::with_capacity(it.count * j.count);
    for a in 0..it.count {
        for b in 0..j.count {
            t.push(inst.term(n, it.at(a), j.at(b)));
        }
    }
    t
}

fn pass(inst: &Instance, it: &[Axis], j: &[Axis], exec: Execution) -> Option<Incumbent> {
    let f0 = table(inst, 0, &it[0], &j[0]);
    let jc0 = j[0].count;
    if it.len() == 1 {
        let mut best: Option<Incumbent> = None;
        for a in 0..it[0].count {
            let Some(budget) = inst.jam_budget(it[0].at(a)) else { continue };
            let Some(top) = j[0].floor_index(budget) else { continue };
            for b in 0..=top {
                let v = f0[a * jc0 + b];
                if best.as_ref().map_or(true, |x| v > x.0) {
                    best = Some((v, vec![(a, b)]));
                }
            }
        }
        return best;
    }

    let f1 = table(inst, 1, &it[1], &j[1]);
    let jc1 = j[1].count;
    // prefix[a][b] = (max over b' <= b of f1[a][b'], argmax)
    let mut prefix = vec![(f64::NEG_INFINITY, 0usize); f1.len()];
    for a in 0..it[1].count {
        let mut run = (f64::NEG_INFINITY, 0);
        for b in 0..jc1 {
            let v = f1[a * jc1 + b];
            if v > run.0 {
                run = (v, b);
            }
            prefix[a * jc1 + b] = run;
        }
    }

    let rows = par::map_indexed(it[0].count, exec, |a0| {
        let mut best: Option<Incumbent> = None;
        for a1 in 0..it[1].count {
            let Some(budget) = inst.jam_budget(it[0].at(a0) + it[1].at(a1)) else { continue };
            for b0 in 0..jc0 {
                let rest = budget - j[0].at(b0);
                let Some(b1) = j[1].floor_index(rest) else { break };
                let (v1, arg) = prefix[a1 * jc1 + b1];
                let v = f0[a0 * jc0 + b0] + v1;
                if best.as_ref().map_or(true, |x| v > x.0) {
                    best = Some((v, vec![(a0, b0), (a1, arg)]));
                }
            }
        }
        best
    });
    rows.into_iter().flatten().fold(None, |acc: Option<Incumbent>, x| match acc {
        Some(a) if a.0 >= x.0 => Some(a),
        _ => Some(x),
    })
}

/// Exhaustive grid maximization of the inner problem for `N <= 2` and
/// `0 < alpha2 < 1`.
pub fn oracle_inner(
    rx: ReceiverType,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    grid: &GridSpec,
) -> Result<OracleResult> {
    params.validate()?;
    channels.check_len(params)?;
    let n = channels.len();
    if n == 0 || n > 2 {
        return Err(Error::invalid(format!("oracle_inner handles 1 or 2 sub-carriers, got {n}")));
    }
    if !(alpha2 > 0.0 && alpha2 < 1.0) {
        return Err(Error::invalid(format!("oracle_inner needs 0 < alpha2 < 1, got {alpha2}")));
    }
    if grid.steps_per_axis < 2 {
        return Err(Error::invalid("steps_per_axis must be at least 2"));
    }
    let points = grid.evaluations(n);
    if points > GRID_CAP {
        return Err(Error::GridTooLarge { points, cap: GRID_CAP });
    }

    let inst = Instance { rx, alpha2, channels, params };
    let steps = grid.steps_per_axis;
    let it_max = params.p_s_peak.min(params.p_s_total / alpha2);
    let j_max = params.p_j_peak.min(inst.jam_budget(0.0).unwrap_or(0.0));
    let it_bound = Axis::new(0.0, it_max, steps);
    let j_bound = Axis::new(0.0, j_max, steps);
    let mut it_axes = vec![it_bound; n];
    let mut j_axes = vec![j_bound; n];

    // (p_IT, p_J) = 0 is always feasible with value 0.
    let mut best_val = 0.0;
    let mut best_pt: Vec<(f64, f64)> = vec![(0.0, 0.0); n];
    for _ in 0..=grid.zoom_passes {
        if let Some((v, idx)) = pass(&inst, &it_axes, &j_axes, grid.execution) {
            let pt: Vec<(f64, f64)> =
                idx.iter().enumerate().map(|(k, &(a, b))| (it_axes[k].at(a), j_axes[k].at(b))).collect();
            if v > best_val {
                best_val = v;
                best_pt = pt;
            }
        }
        for k in 0..n {
            it_axes[k] = it_axes[k].zoom(best_pt[k].0, &it_bound, steps);
            j_axes[k] = j_axes[k].zoom(best_pt[k].1, &j_bound, steps);
        }
    }

    let p_it: Vec<f64> = best_pt.iter().map(|x| x.0).collect();
    let p_j: Vec<f64> = best_pt.iter().map(|x| x.1).collect();
    let left = (params.p_s_total - alpha2 * p_it.iter().sum::<f64>()).max(0.0);
    let p_pt = greedy_fill(left / (1.0 - alpha2), params.p_s_peak, channels);
    let power = PowerAllocation { p_pt, p_it, p_j };
    let value = model::inner_objective(rx, &power, channels, params);
    let secrecy_rate = model::secrecy_rate(rx, crate::TimeSplit::new(alpha2)?, &power, channels, params)?;
    Ok(OracleResult { value, secrecy_rate, power })
}

/// Maximizes a scalar function on `[lower, upper]`: a uniform grid with
/// `resolution` intervals, then golden-section search on the cells next to
/// the best grid point. Exact for unimodal functions up to round-off.
/// Returns `(argmax, value)`; grid ties go to the smaller argument.
pub fn oracle_scalar_max<F: Fn(f64) -> f64>(f: F, lower: f64, upper: f64, resolution: usize) -> (f64, f64) {
    let res = resolution.max(1);
    let ax = Axis::new(lower, upper, res);
    let mut best = (ax.at(0), f(ax.at(0)));
    let mut k_best = 0;
    for k in 1..ax.count {
        let x = ax.at(k);
        let v = f(x);
        if v > best.1 {
            best = (x, v);
            k_best = k;
        }
    }
    if ax.count == 1 {
        return best;
    }
    let mut lo = ax.at(k_best.saturating_sub(1));
    let mut hi = ax.at((k_best + 1).min(ax.count - 1));
    const R: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - R * (hi - lo);
    let mut x2 = lo + R * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * (1.0 + hi.abs()) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - R * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + R * (hi - lo);
            f2 = f(x2);
        }
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::solve_pit_given_pj;
    use crate::model::{check_feasible, SubcarrierGains, TimeSplit};

    #[test]
    fn scalar_examples() {
        let (x, v) = oracle_scalar_max(|x| -(x - 1.0) * (x - 1.0), 0.0, 2.0, 10);
        assert!((x - 1.0).abs() < 1e-7 && v.abs() < 1e-14);
        let (x, _) = oracle_scalar_max(|x| 3.0 * x, 0.0, 2.0, 10);
        assert_eq!(x, 2.0);
        let (x, _) = oracle_scalar_max(|x| -x, 0.5, 2.0, 10);
        assert_eq!(x, 0.5);
    }

    #[test]
    fn scalar_matches_pit_closed_form() {
        let p = SystemParams::new(1, 5.0, 5.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let g = SubcarrierGains { h_j: 1.0, h_d: 6.0, h_e: 1.5, g_d: 0.3, g_e: 2.0 };
        for rx in ReceiverType::ALL {
            for (lambda, p_j) in [(0.4, 0.0), (0.1, 0.7), (2.0, 0.2)] {
                let a2 = 0.5;
                let closed = solve_pit_given_pj(rx, p_j, lambda, a2, &g, &p);
                let slice = |x: f64| model::secrecy_term(rx, x, p_j, &g, &p) - lambda * a2 * x;
                let (x, _) = oracle_scalar_max(slice, 0.0, p.p_s_peak, 1000);
                assert!((x - closed).abs() < 1e-6, "{rx} {lambda} {p_j}: {x} vs {closed}");
            }
        }
    }

    #[test]
    fn zero_channels_give_zero() {
        let p = SystemParams::new(2, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let z = SubcarrierGains { h_j: 0.0, h_d: 0.0, h_e: 0.0, g_d: 0.0, g_e: 0.0 };
        let ch = ChannelRealization::from_gains(&[z, z]).unwrap();
        let r = oracle_inner(ReceiverType::TypeI, 0.5, &ch, &p, &GridSpec::new(20)).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn single_carrier_water_filling() {
        // No eavesdropper: maximize log2(1 + a p) with p <= min(peak, P_S / alpha2).
        let p = SystemParams::new(1, 1.0, 1.5, 1.0, 0.5, 1.0, 1.0).unwrap();
        let g = SubcarrierGains { h_j: 1.0, h_d: 4.0, h_e: 0.0, g_d: 0.0, g_e: 0.0 };
        let ch = ChannelRealization::from_gains(&[g]).unwrap();
        let r = oracle_inner(ReceiverType::TypeII, 0.8, &ch, &p, &GridSpec::new(100)).unwrap();
        let want = (1.0f64 + 4.0 * 1.25).log2();
        assert!((r.value - want).abs() < 1e-12, "{} {want}", r.value);
    }

    #[test]
    fn result_is_feasible_and_zoom_never_hurts() {
        let p = SystemParams::new(2, 2.0, 2.0, 0.6, 0.5, 0.1, 0.1).unwrap();
        let ch = ChannelRealization::from_gains(&[
            SubcarrierGains { h_j: 1.0, h_d: 2.0, h_e: 1.0, g_d: 0.1, g_e: 1.5 },
            SubcarrierGains { h_j: 2.0, h_d: 1.0, h_e: 0.8, g_d: 0.3, g_e: 0.9 },
        ])
        .unwrap();
        for rx in ReceiverType::ALL {
            let coarse = oracle_inner(rx, 0.5, &ch, &p, &GridSpec::new(30)).unwrap();
            let fine = oracle_inner(rx, 0.5, &ch, &p, &GridSpec::new(30).with_zoom(3)).unwrap();
            assert!(fine.value >= coarse.value);
            let t = TimeSplit::new(0.5).unwrap();
            assert!(check_feasible(t, &fine.power, &ch, &p, 1e-9).is_feasible());
        }
    }

    #[test]
    fn grid_cap_is_enforced() {
        let p = SystemParams::new(2, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let z = SubcarrierGains { h_j: 1.0, h_d: 1.0, h_e: 1.0, g_d: 1.0, g_e: 1.0 };
        let ch = ChannelRealization::from_gains(&[z, z]).unwrap();
        let err = oracle_inner(ReceiverType::TypeI, 0.5, &ch, &p, &GridSpec::new(500)).unwrap_err();
        assert!(matches!(err, Error::GridTooLarge { .. }));
    }
}
