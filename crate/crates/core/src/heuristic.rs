//! Non-iterative successive allocation.
//!
//! 1. `p_PT` maximizes harvested power using the whole budget `P_S`.
//! 2. The harvested energy is split equally over the sub-carriers where
//!    jamming helps (all of them for a Type-II receiver).
//! 3. `p_IT` is water-filled over `S_IT = {n : a_n > b_n}` under
//!    `sum p_IT <= P_S`, with the water level found by bisection.
//!
//! Since `sum p_PT <= P_S` and `sum p_IT <= P_S` together imply the original
//! sum-power constraint, the result is always feasible.

use crate::dual::{greedy_fill, secrecy_stationary_point};
use crate::error::Result;
use crate::model::{
    self, ChannelRealization, Diagnostics, PowerAllocation, ReceiverType, Solution, SolverKind, SystemParams, TimeSplit,
};

/// Bisection stops once the water-level bracket is this narrow.
pub const BISECTION_TOL: f64 = 1e-10;

/// Sub-carriers that receive jamming power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JammingSet {
    pub s_j: Vec<usize>,
}

impl JammingSet {
    pub fn for_receiver(rx: ReceiverType, channels: &ChannelRealization, params: &SystemParams) -> Self {
        let s_j = match rx {
            ReceiverType::TypeI => (0..channels.len()).filter(|&n| lemma1_predicate(n, channels, params)).collect(),
            ReceiverType::TypeII => (0..channels.len()).collect(),
        };
        JammingSet { s_j }
    }

    pub fn is_empty(&self) -> bool {
        self.s_j.is_empty()
    }
}

/// Dual variable of `sum p_IT <= P_S` and its bracket's upper end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterLevel {
    pub theta: f64,
    pub theta_max: f64,
}

/// `p_PT` on the strongest harvesting sub-carriers with the full budget, and
/// the harvested power `eta * sum p_PT |h_J|^2`.
pub fn heuristic_ppt(params: &SystemParams, channels: &ChannelRealization) -> (Vec<f64>, f64) {
    let p_pt = greedy_fill(params.p_s_total, params.p_s_peak, channels);
    let p_eh = params.eta * model::weighted_harvest(&p_pt, channels);
    (p_pt, p_eh)
}

/// Jamming helps a Type-I destination's secrecy on sub-carrier `n` iff
/// `|g_E|^2 / sigma_E^2 > |g_D|^2 / sigma_D^2`.
pub fn lemma1_predicate(n: usize, channels: &ChannelRealization, params: &SystemParams) -> bool {
    let g = &channels.gains()[n];
    g.g_e / params.sigma_e_sq > g.g_d / params.sigma_d_sq
}

/// Splits `((1 - alpha2) / alpha2) * p_eh` equally over the jamming set.
/// Entries above `P_J,peak` are clamped and the excess is dropped.
pub fn heuristic_pj(
    rx: ReceiverType,
    alpha2: f64,
    p_eh: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
) -> (Vec<f64>, JammingSet) {
    let set = JammingSet::for_receiver(rx, channels, params);
    let mut p_j = vec![0.0; channels.len()];
    if set.is_empty() || !(alpha2 > 0.0) {
        return (p_j, set);
    }
    let total = (1.0 - alpha2) / alpha2 * p_eh;
    let each = (total / set.s_j.len() as f64).clamp(0.0, params.p_j_peak);
    for &n in &set.s_j {
        p_j[n] = each;
    }
    (p_j, set)
}

fn capped_root(a: f64, b: f64, theta: f64, peak: f64) -> f64 {
    secrecy_stationary_point(a, b, theta).min(peak)
}

/// Water-fills `p_IT` for fixed jamming under `sum p_IT <= P_S` and the peak.
///
/// Returns the allocation and the water level. When every sub-carrier of
/// `S_IT` can sit at `P_S,peak` within the budget the constraint is slack and
/// `theta = 0`; otherwise `theta` is bisected and the upper (feasible) end of
/// the final bracket is used.
pub fn heuristic_pit(
    rx: ReceiverType,
    p_j: &[f64],
    channels: &ChannelRealization,
    params: &SystemParams,
) -> (Vec<f64>, WaterLevel) {
    let n = channels.len();
    let ab: Vec<(f64, f64)> =
        channels.gains().iter().zip(p_j).map(|(g, &pj)| (g.a(rx, pj, params), g.b(pj, params))).collect();
    let s_it: Vec<usize> = (0..n).filter(|&i| ab[i].0 > ab[i].1).collect();
    let mut p_it = vec![0.0; n];
    let theta_max = s_it.iter().map(|&i| ab[i].0 - ab[i].1).fold(0.0, f64::max);
    if s_it.is_empty() {
        return (p_it, WaterLevel { theta: 0.0, theta_max });
    }
    let peak = params.p_s_peak;
    if s_it.len() as f64 * peak <= params.p_s_total {
        for &i in &s_it {
            p_it[i] = peak;
        }
        return (p_it, WaterLevel { theta: 0.0, theta_max });
    }

    let total = |theta: f64| -> f64 { s_it.iter().map(|&i| capped_root(ab[i].0, ab[i].1, theta, peak)).sum() };
    let (mut lo, mut hi) = (0.0, theta_max);
    for _ in 0..400 {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) > params.p_s_total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for &i in &s_it {
        p_it[i] = capped_root(ab[i].0, ab[i].1, hi, peak);
    }
    (p_it, WaterLevel { theta: hi, theta_max })
}

/// Heuristic inner solution at a fixed `alpha2` in `(0, 1)`.
pub fn solve_inner_heuristic(
    rx: ReceiverType,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
) -> Result<Solution> {
    params.validate()?;
    channels.check_len(params)?;
    if !(alpha2 > 0.0 && alpha2 < 1.0) {
        return Err(crate::Error::invalid(format!("inner solvers need 0 < alpha2 < 1, got {alpha2}")));
    }
    let time = TimeSplit::new(alpha2)?;
    let (p_pt, p_eh) = heuristic_ppt(params, channels);
    let (p_j, set) = heuristic_pj(rx, alpha2, p_eh, channels, params);
    let (p_it, _) = heuristic_pit(rx, &p_j, channels, params);
    let mut diag = Diagnostics::new(SolverKind::Heuristic);
    diag.empty_jamming_set = set.is_empty();
    Ok(Solution::assemble(rx, time, PowerAllocation { p_pt, p_it, p_j }, channels, params, diag))
}

/// Conventional scheme without cooperative jamming: the whole block carries
/// information (`alpha2 = 1`) and `p_IT` is water-filled against the
/// unjammed eavesdropper.
pub fn solve_no_jamming(rx: ReceiverType, channels: &ChannelRealization, params: &SystemParams) -> Result<Solution> {
    params.validate()?;
    channels.check_len(params)?;
    let n = channels.len();
    let p_j = vec![0.0; n];
    let (p_it, _) = heuristic_pit(rx, &p_j, channels, params);
    let power = PowerAllocation { p_pt: vec![0.0; n], p_it, p_j };
    let diag = Diagnostics::new(SolverKind::NoJamming);
    Ok(Solution::assemble(rx, TimeSplit::new(1.0)?, power, channels, params, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_feasible, SubcarrierGains};

    fn sc(h_j: f64, h_d: f64, h_e: f64, g_d: f64, g_e: f64) -> SubcarrierGains {
        SubcarrierGains { h_j, h_d, h_e, g_d, g_e }
    }

    #[test]
    fn ppt_examples() {
        let ch = ChannelRealization::from_gains(&[
            sc(4.0, 1.0, 1.0, 1.0, 1.0),
            sc(1.0, 1.0, 1.0, 1.0, 1.0),
            sc(9.0, 1.0, 1.0, 1.0, 1.0),
        ])
        .unwrap();
        let p = SystemParams::new(3, 1.5, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let (p_pt, p_eh) = heuristic_ppt(&p, &ch);
        assert_eq!(p_pt, vec![0.5, 0.0, 1.0]);
        assert!((p_eh - 5.5).abs() < 1e-15);

        let p = SystemParams::new(3, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(heuristic_ppt(&p, &ch).0, vec![0.0, 0.0, 1.0]);
        let p = SystemParams::new(3, 3.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(heuristic_ppt(&p, &ch).0, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn pj_examples() {
        let ch = ChannelRealization::from_gains(&[sc(1.0, 1.0, 1.0, 2.0, 1.0); 4]).unwrap();
        let p = SystemParams::new(4, 1.0, 1.0, 10.0, 0.5, 1.0, 1.0).unwrap();
        // alpha2 = 0.5 makes P_J,total = P_EH
        let (pj, _) = heuristic_pj(ReceiverType::TypeII, 0.5, 2.0, &ch, &p);
        assert_eq!(pj, vec![0.5; 4]);
        // g_E / sigma_E <= g_D / sigma_D everywhere
        let (pj, set) = heuristic_pj(ReceiverType::TypeI, 0.5, 2.0, &ch, &p);
        assert!(set.is_empty());
        assert_eq!(pj, vec![0.0; 4]);
        let (pj, _) = heuristic_pj(ReceiverType::TypeII, 1.0, 2.0, &ch, &p);
        assert_eq!(pj, vec![0.0; 4]);
        // clamp with discarded excess
        let p = SystemParams::new(4, 1.0, 1.0, 0.25, 0.5, 1.0, 1.0).unwrap();
        let (pj, _) = heuristic_pj(ReceiverType::TypeII, 0.5, 2.0, &ch, &p);
        assert_eq!(pj, vec![0.25; 4]);
    }

    #[test]
    fn lemma1_examples() {
        let p = SystemParams::new(2, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let ch = ChannelRealization::from_gains(&[sc(1.0, 1.0, 1.0, 1.0, 2.0), sc(1.0, 1.0, 1.0, 1.0, 1.0)]).unwrap();
        assert!(lemma1_predicate(0, &ch, &p));
        assert!(!lemma1_predicate(1, &ch, &p));
    }

    #[test]
    fn theta_max_and_slack_budget() {
        let p = SystemParams::new(2, 100.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        // Type-II with p_j = 0: a = h_d, b = h_e
        let ch = ChannelRealization::from_gains(&[sc(1.0, 3.0, 1.0, 0.0, 0.0), sc(1.0, 2.0, 1.5, 0.0, 0.0)]).unwrap();
        let (p_it, w) = heuristic_pit(ReceiverType::TypeII, &[0.0, 0.0], &ch, &p);
        assert!((w.theta_max - 2.0).abs() < 1e-12);
        assert_eq!(w.theta, 0.0);
        assert_eq!(p_it, vec![1.0, 1.0]);
    }

    #[test]
    fn binding_budget_is_met() {
        let p = SystemParams::new(3, 1.0, 5.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let ch = ChannelRealization::from_gains(&[
            sc(1.0, 8.0, 1.0, 0.0, 0.0),
            sc(1.0, 4.0, 0.5, 0.0, 0.0),
            sc(1.0, 1.0, 2.0, 0.0, 0.0),
        ])
        .unwrap();
        let (p_it, w) = heuristic_pit(ReceiverType::TypeII, &[0.0; 3], &ch, &p);
        let sum: f64 = p_it.iter().sum();
        assert!((sum - 1.0).abs() < 1e-8, "{sum}");
        assert!(sum <= 1.0);
        assert_eq!(p_it[2], 0.0);
        assert!(w.theta > 0.0 && w.theta <= w.theta_max);
    }

    #[test]
    fn no_jamming_symmetric_is_zero() {
        let p = SystemParams::new(2, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let ch = ChannelRealization::from_gains(&[sc(1.0, 2.0, 2.0, 1.0, 1.0), sc(3.0, 0.5, 0.5, 1.0, 1.0)]).unwrap();
        for rx in ReceiverType::ALL {
            let s = solve_no_jamming(rx, &ch, &p).unwrap();
            assert_eq!(s.secrecy_rate, 0.0);
            assert_eq!(s.time.alpha2(), 1.0);
        }
    }

    #[test]
    fn inner_solution_is_feasible() {
        let p = SystemParams::new(3, 2.0, 1.0, 0.4, 0.5, 0.1, 0.1).unwrap();
        let ch = ChannelRealization::from_gains(&[
            sc(1.0, 2.0, 1.0, 0.2, 1.5),
            sc(0.5, 1.0, 0.5, 0.1, 0.1),
            sc(2.0, 0.3, 1.0, 0.5, 2.0),
        ])
        .unwrap();
        for rx in ReceiverType::ALL {
            for a2 in [0.1, 0.5, 0.9] {
                let s = solve_inner_heuristic(rx, a2, &ch, &p).unwrap();
                assert!(check_feasible(s.time, &s.power, &ch, &p, 1e-9).is_feasible());
            }
        }
    }
}
