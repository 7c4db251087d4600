//! Minorization-maximization inner solver (fixed `alpha2`).
//!
//! In natural-log units the per-sub-carrier objective is a difference of
//! concave terms. Replacing the two subtracted logarithms by their tangent
//! planes at the current iterate gives a concave lower bound that touches the
//! objective there; maximizing it over the original feasible set can only
//! increase the true objective. Each surrogate problem is solved through its
//! Lagrange dual, whose inner maximization has a water-filling closed form.

use crate::dual::{self, ppt_score, recover_ppt, repair_allocation, SolverConfig};
use crate::ellipsoid::{self, DualEvaluation, DualPoint};
use crate::error::Result;
use crate::heuristic::{heuristic_pit, heuristic_pj, heuristic_ppt};
use crate::model::{
    self, ChannelRealization, Diagnostics, PowerAllocation, ReceiverType, Solution, SolverKind, SubcarrierGains,
    SystemParams,
};
use crate::par;

const LN2: f64 = std::f64::consts::LN_2;

/// Tangent-plane slopes at the previous iterate.
///
/// `c_n = |g_D|^2 / (p_J |g_D|^2 + sigma_D^2)`,
/// `d_n = |h_E|^2 / (p_IT |h_E|^2 + p_J |g_E|^2 + sigma_E^2)`,
/// `e_n = |g_E|^2 / (same denominator)`. `c` is all zeros for Type-II.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateCoeffs {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SurrogateCoeffs {
    pub fn at(rx: ReceiverType, prev: &PowerAllocation, channels: &ChannelRealization, params: &SystemParams) -> Self {
        let n = channels.len();
        let mut out = SurrogateCoeffs { c: vec![0.0; n], d: vec![0.0; n], e: vec![0.0; n] };
        for (i, g) in channels.gains().iter().enumerate() {
            if rx == ReceiverType::TypeI {
                out.c[i] = g.g_d / (prev.p_j[i] * g.g_d + params.sigma_d_sq);
            }
            let den = prev.p_it[i] * g.h_e + prev.p_j[i] * g.g_e + params.sigma_e_sq;
            out.d[i] = g.h_e / den;
            out.e[i] = g.g_e / den;
        }
        out
    }
}

/// One MM iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct MMState {
    pub iterate: usize,
    pub power: PowerAllocation,
    /// Inner objective in bits (no `alpha2`, no positive part).
    pub objective: f64,
}

/// Surrogate of one sub-carrier's objective term in nats, constants included.
fn surrogate_term(
    rx: ReceiverType,
    g: &SubcarrierGains,
    p_it: f64,
    p_j: f64,
    prev_it: f64,
    prev_j: f64,
    params: &SystemParams,
) -> f64 {
    let (sd, se) = (params.sigma_d_sq, params.sigma_e_sq);
    let e_den = prev_it * g.h_e + prev_j * g.g_e + se;
    let eve = -e_den.ln() - (g.h_e * (p_it - prev_it) + g.g_e * (p_j - prev_j)) / e_den + (p_j * g.g_e + se).ln();
    let dest = match rx {
        ReceiverType::TypeI => {
            let d_den = prev_j * g.g_d + sd;
            (p_it * g.h_d + p_j * g.g_d + sd).ln() - d_den.ln() - g.g_d * (p_j - prev_j) / d_den
        }
        ReceiverType::TypeII => (p_it * g.h_d + sd).ln() - sd.ln(),
    };
    dest + eve
}

/// Surrogate objective at `power` built around `prev`, in bits. Never exceeds
/// [`model::inner_objective`] and equals it at `power == prev`.
pub fn surrogate_value(
    rx: ReceiverType,
    power: &PowerAllocation,
    prev: &PowerAllocation,
    channels: &ChannelRealization,
    params: &SystemParams,
) -> f64 {
    channels
        .gains()
        .iter()
        .enumerate()
        .map(|(i, g)| surrogate_term(rx, g, power.p_it[i], power.p_j[i], prev.p_it[i], prev.p_j[i], params))
        .sum::<f64>()
        / LN2
}

/// Larger root of `qa x^2 + qb x + qc = 0` (`qa >= 0`), if real.
fn larger_root(qa: f64, qb: f64, qc: f64) -> Option<f64> {
    if qa == 0.0 {
        return if qb != 0.0 { Some(-qc / qb) } else { None };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some(if qb <= 0.0 { (-qb + s) / (2.0 * qa) } else { 2.0 * qc / (-qb - s) })
}

/// Maximizer and value of one sub-carrier's surrogate Lagrangian
/// `ln(p_IT h_D + p_J g_D + s_D) + ln(p_J g_E + s_E) - K p_J - L p_IT`
/// (Type-II drops `p_J g_D`) over the power box, with
/// `L = d + lambda alpha2` and `K = c + e + mu alpha2`.
///
/// Type-II separates into two clamped water-fills. For Type-I the best `p_IT`
/// for a given `p_J` is the clamped water-fill `1/L - (g_D p_J + s_D)/h_D`, and
/// the resulting profile in `p_J` is concave, so its maximum is at an end of
/// `[0, P_J,peak]` or at a stationary point of one of its three pieces
/// (`p_IT` interior, `p_IT = 0`, `p_IT = P_S,peak`). All candidates are
/// evaluated and the best is kept, smallest `p_J` on ties.
#[allow(clippy::too_many_arguments)]
pub fn surrogate_box_max(
    rx: ReceiverType,
    g: &SubcarrierGains,
    c: f64,
    d: f64,
    e: f64,
    lambda: f64,
    mu: f64,
    alpha2: f64,
    params: &SystemParams,
) -> (f64, f64, f64) {
    let (sd, se) = (params.sigma_d_sq, params.sigma_e_sq);
    let (it_peak, j_peak) = (params.p_s_peak, params.p_j_peak);
    let l = d + lambda * alpha2;
    let k = c + e + mu * alpha2;
    let value = |p_it: f64, p_j: f64| -> f64 {
        let dest = match rx {
            ReceiverType::TypeI => p_it * g.h_d + p_j * g.g_d + sd,
            ReceiverType::TypeII => p_it * g.h_d + sd,
        };
        dest.ln() + (p_j * g.g_e + se).ln() - k * p_j - l * p_it
    };

    if rx == ReceiverType::TypeII {
        let p_it = if g.h_d == 0.0 { 0.0 } else { (1.0 / l - sd / g.h_d).clamp(0.0, it_peak) };
        let p_j = if g.g_e == 0.0 { 0.0 } else { (1.0 / k - se / g.g_e).clamp(0.0, j_peak) };
        return (p_it, p_j, value(p_it, p_j));
    }

    let it_of = |p_j: f64| -> f64 {
        if g.h_d == 0.0 {
            0.0
        } else {
            (1.0 / l - (g.g_d * p_j + sd) / g.h_d).clamp(0.0, it_peak)
        }
    };
    if g.g_e == 0.0 {
        let p_it = it_of(0.0);
        return (p_it, 0.0, value(p_it, 0.0));
    }

    let mut candidates = [f64::NAN; 5];
    candidates[0] = 0.0;
    candidates[1] = j_peak;
    if g.h_d > 0.0 {
        let den = k - g.g_d * l / g.h_d;
        if den > 0.0 {
            candidates[2] = 1.0 / den - se / g.g_e;
        }
    }
    // p_IT pinned at a bound: g_D/(A + x g_D) + g_E/(x g_E + s_E) = K.
    for (slot, p_it) in [(3, 0.0), (4, it_peak)] {
        let a = p_it * g.h_d + sd;
        let qa = k * g.g_d * g.g_e;
        let qb = k * (a * g.g_e + se * g.g_d) - 2.0 * g.g_d * g.g_e;
        let qc = k * a * se - g.g_d * se - g.g_e * a;
        if let Some(x) = larger_root(qa, qb, qc) {
            candidates[slot] = x;
        }
    }

    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for &x in &candidates {
        if !x.is_finite() {
            continue;
        }
        let p_j = x.clamp(0.0, j_peak);
        let p_it = it_of(p_j);
        let v = value(p_it, p_j);
        if v > best.2 || (v == best.2 && p_j < best.1) {
            best = (p_it, p_j, v);
        }
    }
    best
}

/// Maximizer of the surrogate Lagrangian at fixed duals, with `p_PT` from the
/// sign rule. Also returns the Lagrangian value in nats.
pub fn mm_inner_dual_step(
    rx: ReceiverType,
    coeffs: &SurrogateCoeffs,
    dual: DualPoint,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
) -> (PowerAllocation, f64) {
    let DualPoint { lambda, mu } = dual;
    let per_n = par::map_indexed(channels.len(), config.execution, |i| {
        let g = &channels.gains()[i];
        let (p_it, p_j, v) =
            surrogate_box_max(rx, g, coeffs.c[i], coeffs.d[i], coeffs.e[i], lambda, mu, alpha2, params);
        let p_pt = dual::solve_ppt_sign(lambda, mu, alpha2, g.h_j, params);
        (p_pt, p_it, p_j, v + ppt_score(lambda, mu, alpha2, g.h_j, params.eta) * p_pt)
    });
    let mut alloc = PowerAllocation::zeros(channels.len());
    let mut value = lambda * params.p_s_total;
    for (i, (p_pt, p_it, p_j, v)) in per_n.into_iter().enumerate() {
        alloc.p_pt[i] = p_pt;
        alloc.p_it[i] = p_it;
        alloc.p_j[i] = p_j;
        value += v;
    }
    (alloc, value)
}

/// Result of maximizing one surrogate.
#[derive(Debug, Clone)]
pub struct SurrogateStep {
    pub power: PowerAllocation,
    /// Surrogate value at `power`, bits.
    pub surrogate: f64,
    pub dual_iterations: usize,
    pub cap_reached: bool,
    pub recovery_failures: usize,
    pub repaired: bool,
}

/// Maximizes the surrogate built at `prev` over the feasible set.
///
/// The surrogate dual is minimized with the ellipsoid method; every iterate's
/// `(p_IT, p_J)` is completed with [`recover_ppt`]. The feasible candidate
/// with the highest surrogate value wins; `prev` itself and a scaled copy of
/// the best dual point's allocation are candidates too, so the surrogate
/// value never drops below its value at `prev`.
pub fn solve_surrogate(
    rx: ReceiverType,
    prev: &PowerAllocation,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
) -> SurrogateStep {
    let coeffs = SurrogateCoeffs::at(rx, prev, channels, params);
    let tol = config.feasibility_tol;
    let mut best_power = prev.clone();
    let mut best_value = surrogate_value(rx, prev, prev, channels, params);
    let mut failures = 0;

    let out = ellipsoid::minimize(
        &config.ellipsoid,
        |x| {
            let (alloc, value) = mm_inner_dual_step(rx, &coeffs, x, alpha2, channels, params, config);
            let subgradient = dual::dual_subgradient(alpha2, &alloc, channels, params);
            DualEvaluation { value, subgradient, payload: alloc }
        },
        |_, ev| {
            let a = &ev.payload;
            match recover_ppt(alpha2, &a.p_it, &a.p_j, channels, params, tol) {
                Ok(p_pt) => {
                    let cand = PowerAllocation { p_pt, p_it: a.p_it.clone(), p_j: a.p_j.clone() };
                    let v = surrogate_value(rx, &cand, prev, channels, params);
                    if v > best_value {
                        best_value = v;
                        best_power = cand;
                    }
                }
                Err(_) => failures += 1,
            }
        },
    );

    let mut repaired = false;
    let (cand, changed) = repair_allocation(alpha2, &out.best_payload.p_it, &out.best_payload.p_j, channels, params);
    let v = surrogate_value(rx, &cand, prev, channels, params);
    if v > best_value {
        best_value = v;
        best_power = cand;
        repaired = changed;
    }
    SurrogateStep {
        power: best_power,
        surrogate: best_value,
        dual_iterations: out.iterations,
        cap_reached: out.cap_reached,
        recovery_failures: failures,
        repaired,
    }
}

/// Starting point: harvest-maximizing `p_PT`, equal-split jamming, and
/// `P_S / |S_IT|` (capped at the peak) on `S_IT = {n : a_n > b_n}`.
pub fn initial_point(
    rx: ReceiverType,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
) -> PowerAllocation {
    let (p_pt, p_eh) = heuristic_ppt(params, channels);
    let (p_j, _) = heuristic_pj(rx, alpha2, p_eh, channels, params);
    let s_it: Vec<usize> = channels
        .gains()
        .iter()
        .enumerate()
        .filter(|(i, g)| g.a(rx, p_j[*i], params) > g.b(p_j[*i], params))
        .map(|(i, _)| i)
        .collect();
    let mut p_it = vec![0.0; channels.len()];
    if !s_it.is_empty() {
        let each = (params.p_s_total / s_it.len() as f64).min(params.p_s_peak);
        for &i in &s_it {
            p_it[i] = each;
        }
    }
    PowerAllocation { p_pt, p_it, p_j }
}

/// Better of [`initial_point`] and the heuristic solution (which shares its
/// `p_PT` and `p_J` but water-fills `p_IT`), with its objective. Ties keep
/// [`initial_point`].
pub fn start_point(
    rx: ReceiverType,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
) -> (PowerAllocation, f64) {
    let init = initial_point(rx, alpha2, channels, params);
    let v_init = model::inner_objective(rx, &init, channels, params);
    let (p_it, _) = heuristic_pit(rx, &init.p_j, channels, params);
    let heur = PowerAllocation { p_it, ..init.clone() };
    let v_heur = model::inner_objective(rx, &heur, channels, params);
    if v_heur > v_init {
        (heur, v_heur)
    } else {
        (init, v_init)
    }
}

/// Objective after each MM iteration, `alpha2 * inner objective` in bits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MmTrace {
    pub initial: f64,
    pub objectives: Vec<f64>,
}

impl MmTrace {
    /// Writes `iteration,objective` rows, iteration 0 being the start point.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["iteration", "objective"])?;
        wr.write_record(["0".to_string(), format!("{:?}", self.initial)])?;
        for (k, v) in self.objectives.iter().enumerate() {
            wr.write_record([(k + 1).to_string(), format!("{v:?}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MmOutcome {
    pub solution: Solution,
    pub trace: MmTrace,
    pub states: Vec<MMState>,
}

/// MM inner solution at a fixed `alpha2` in `(0, 1)`.
///
/// Stops when the objective's fractional increase drops below `eps_m` or
/// after `max_mm_iters` surrogate solves (then `cap_reached` is set).
pub fn solve_inner_mm(
    rx: ReceiverType,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<MmOutcome> {
    let time = dual::validate_instance(alpha2, channels, params, config)?;
    let (mut power, mut objective) = start_point(rx, alpha2, channels, params);
    let mut diag = Diagnostics::new(SolverKind::Mm);
    let mut trace = MmTrace { initial: alpha2 * objective, objectives: Vec::new() };
    let mut states = vec![MMState { iterate: 0, power: power.clone(), objective }];
    let mut converged = false;

    for k in 1..=config.max_mm_iters {
        let step = solve_surrogate(rx, &power, alpha2, channels, params, config);
        diag.recovery_failures += step.recovery_failures;
        diag.repaired |= step.repaired;
        diag.cap_reached |= step.cap_reached;
        let next = model::inner_objective(rx, &step.power, channels, params);
        // Guard against round-off making a tie look like a descent.
        let (next, next_power) = if next >= objective { (next, step.power) } else { (objective, power.clone()) };
        let gain = next - objective;
        power = next_power;
        objective = next;
        diag.iterations = k;
        trace.objectives.push(alpha2 * objective);
        states.push(MMState { iterate: k, power: power.clone(), objective });
        if gain <= config.eps_m * objective.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        diag.cap_reached = true;
    }
    let solution = Solution::assemble(rx, time, power, channels, params, diag);
    Ok(MmOutcome { solution, trace, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_feasible;

    fn sc(h_j: f64, h_d: f64, h_e: f64, g_d: f64, g_e: f64) -> SubcarrierGains {
        SubcarrierGains { h_j, h_d, h_e, g_d, g_e }
    }

    fn unit(n: usize) -> SystemParams {
        SystemParams::new(n, 2.0, 2.0, 1.0, 0.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn type2_water_fill_examples() {
        let p = unit(1);
        // d = 1, lambda alpha2 = 1, h_D = 1, sigma_D = 1 -> 1/2 - 1 < 0
        let g = sc(1.0, 1.0, 0.0, 0.0, 2.0);
        let (p_it, _, _) = surrogate_box_max(ReceiverType::TypeII, &g, 0.0, 1.0, 0.5, 2.0, 1.0, 0.5, &p);
        assert_eq!(p_it, 0.0);
        // e = 0.5, mu alpha2 = 0.5, sigma_E = 1, g_E = 2 -> 1 - 0.5
        let (_, p_j, _) = surrogate_box_max(ReceiverType::TypeII, &g, 0.0, 1.0, 0.5, 2.0, 1.0, 0.5, &p);
        assert!((p_j - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singular_channels() {
        let p = unit(1);
        let g = sc(1.0, 0.0, 1.0, 1.0, 0.0);
        for rx in ReceiverType::ALL {
            let (p_it, p_j, _) = surrogate_box_max(rx, &g, 0.3, 0.2, 0.0, 0.1, 0.1, 0.5, &p);
            assert_eq!((p_it, p_j), (0.0, 0.0));
        }
    }

    #[test]
    fn larger_root_is_stable() {
        // (x - 1e-9)(x + 1e9): qa = 1, qb = 1e9 - 1e-9, qc = -1
        let r = larger_root(1.0, 1e9 - 1e-9, -1.0).unwrap();
        assert!((r - 1e-9).abs() < 1e-22);
        assert_eq!(larger_root(0.0, 2.0, -4.0), Some(2.0));
        assert_eq!(larger_root(1.0, 0.0, 1.0), None);
    }

    fn instance() -> (ChannelRealization, SystemParams) {
        let ch = ChannelRealization::from_gains(&[
            sc(1.0, 2.0, 1.0, 0.2, 1.5),
            sc(0.5, 1.0, 0.5, 0.1, 0.1),
            sc(2.0, 0.3, 1.0, 0.5, 2.0),
        ])
        .unwrap();
        (ch, SystemParams::new(3, 2.0, 1.0, 0.4, 0.5, 0.1, 0.1).unwrap())
    }

    #[test]
    fn tangency_and_zero_power() {
        let (ch, p) = instance();
        for rx in ReceiverType::ALL {
            let x = initial_point(rx, 0.6, &ch, &p);
            let s = surrogate_value(rx, &x, &x, &ch, &p);
            let t = model::inner_objective(rx, &x, &ch, &p);
            assert!((s - t).abs() < 1e-10, "{s} {t}");
            let z = PowerAllocation::zeros(3);
            assert!(surrogate_value(rx, &z, &z, &ch, &p).abs() < 1e-15);
        }
    }

    #[test]
    fn mm_ascends_and_stays_feasible() {
        let (ch, p) = instance();
        let cfg = SolverConfig::default();
        for rx in ReceiverType::ALL {
            let out = solve_inner_mm(rx, 0.6, &ch, &p, &cfg).unwrap();
            let mut prev = out.trace.initial;
            for &v in &out.trace.objectives {
                assert!(v >= prev - 1e-9);
                prev = v;
            }
            for st in &out.states {
                assert!(check_feasible(out.solution.time, &st.power, &ch, &p, 1e-9).is_feasible());
            }
        }
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let t = MmTrace { initial: 1.0, objectives: vec![1.5, 1.75] };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "iteration,objective\n0,1.0\n1,1.5\n2,1.75\n");
    }
}
