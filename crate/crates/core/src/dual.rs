//! Globally optimal inner solver (fixed `alpha2`) by Lagrange duality.
//!
//! Dualizing the sum-power constraint (`lambda`) and the energy-harvesting
//! constraint (`mu`) splits the dual function into one linear problem in
//! `p_PT,n` and one two-variable problem in `(p_IT,n, p_J,n)` per sub-carrier.
//! The first has a sign-rule solution, the second is solved exactly in
//! `p_IT,n` for every `p_J,n` on a uniform grid. The ellipsoid method then
//! minimizes the dual function, and `p_PT` is recovered from the final
//! information and jamming powers by filling the strongest harvesting
//! sub-carriers first.

use serde::{Deserialize, Serialize};

use crate::ellipsoid::{self, DualEvaluation};
pub use crate::ellipsoid::{DualPoint, Ellipsoid, EllipsoidConfig};
use crate::error::{Error, Result};
use crate::model::{
    self, ChannelRealization, Diagnostics, PowerAllocation, ReceiverType, Solution, SolverKind, SubcarrierGains,
    SystemParams, TimeSplit, DEFAULT_FEASIBILITY_TOL,
};
use crate::par::{self, Execution};

const LN2: f64 = std::f64::consts::LN_2;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Numerical settings shared by the dual and MM solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Jamming-power grid step as a fraction of `P_J,peak`.
    pub eps_j_fraction: f64,
    pub ellipsoid: EllipsoidConfig,
    pub feasibility_tol: f64,
    /// MM stopping threshold on the fractional objective increase.
    pub eps_m: f64,
    pub max_mm_iters: usize,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps_j_fraction: 1e-3,
            ellipsoid: EllipsoidConfig::default(),
            feasibility_tol: DEFAULT_FEASIBILITY_TOL,
            eps_m: 1e-4,
            max_mm_iters: 50,
            execution: Execution::Parallel,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let e = &self.ellipsoid;
        let positive = [
            ("eps_j_fraction", self.eps_j_fraction),
            ("eps_e", e.volume_tol),
            ("ellipsoid radius_sq", e.radius_sq),
            ("feasibility_tol", self.feasibility_tol),
            ("eps_m", self.eps_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.eps_j_fraction > 1.0 {
            return Err(Error::invalid("eps_j_fraction must not exceed 1"));
        }
        if e.max_iters == 0 || self.max_mm_iters == 0 {
            return Err(Error::invalid("iteration caps must be positive"));
        }
        Ok(())
    }

    /// Absolute jamming grid step `eps_J`.
    pub fn eps_j(&self, params: &SystemParams) -> f64 {
        params.p_j_peak * self.eps_j_fraction
    }
}

/// Coefficient of `p_PT,n` in the Lagrangian,
/// `(1 - alpha2) (mu eta |h_J,n|^2 - lambda)`.
pub fn ppt_score(lambda: f64, mu: f64, alpha2: f64, h_j_gain_sq: f64, eta: f64) -> f64 {
    -lambda * (1.0 - alpha2) + mu * (1.0 - alpha2) * eta * h_j_gain_sq
}

/// Optimal `p_PT,n` of the linear per-sub-carrier subproblem. Ties go to 0.
pub fn solve_ppt_sign(lambda: f64, mu: f64, alpha2: f64, h_j_gain_sq: f64, params: &SystemParams) -> f64 {
    if ppt_score(lambda, mu, alpha2, h_j_gain_sq, params.eta) > 0.0 {
        params.p_s_peak
    } else {
        0.0
    }
}

/// Non-negative solution `p` of `a/(1 + a p) - b/(1 + b p) = theta`, the
/// stationarity condition of `ln(1 + a p) - ln(1 + b p) - theta p`.
///
/// Returns 0 when `a <= b` or when the stationary point is negative, and
/// infinity when `theta == 0` and `a > b`. The positive root of
/// `a b p^2 + (a + b) p + 1 - (a - b)/theta = 0` is evaluated in the
/// cancellation-free form `2((a-b)/theta - 1) / ((a+b) + sqrt(D))` with
/// `D = (a-b)^2 + 4ab(a-b)/theta`.
pub fn secrecy_stationary_point(a: f64, b: f64, theta: f64) -> f64 {
    if !(a > b) {
        return 0.0;
    }
    if theta <= 0.0 {
        return f64::INFINITY;
    }
    let diff = a - b;
    let ratio = diff / theta;
    if ratio <= 1.0 {
        return 0.0;
    }
    let disc = diff * diff + 4.0 * a * b * ratio;
    let p = 2.0 * (ratio - 1.0) / ((a + b) + disc.sqrt());
    if p.is_finite() {
        p.max(0.0)
    } else {
        // a, b so large that the products overflow: fall back to the
        // algebraically equal form scaled by 1/(ab).
        let (ia, ib) = (1.0 / a, 1.0 / b);
        let u = 0.5 * (ib - ia);
        ((u * u + (ib - ia) / theta).sqrt() - 0.5 * (ib + ia)).max(0.0)
    }
}

/// Optimal `p_IT,n` for a fixed `p_J,n` at price `lambda * alpha2` (bits/W).
pub fn solve_pit_given_pj(
    rx: ReceiverType,
    p_j: f64,
    lambda: f64,
    alpha2: f64,
    gains: &SubcarrierGains,
    params: &SystemParams,
) -> f64 {
    let a = gains.a(rx, p_j, params);
    let b = gains.b(p_j, params);
    if a <= b {
        return 0.0;
    }
    let price = lambda * alpha2;
    if price <= 0.0 {
        return params.p_s_peak;
    }
    secrecy_stationary_point(a, b, price * LN2).min(params.p_s_peak)
}

/// Lagrangian term of one sub-carrier's information/jamming subproblem.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn itj_lagrangian(
    rx: ReceiverType,
    p_it: f64,
    p_j: f64,
    lambda: f64,
    mu: f64,
    alpha2: f64,
    gains: &SubcarrierGains,
    params: &SystemParams,
) -> f64 {
    model::secrecy_term(rx, p_it, p_j, gains, params) - lambda * alpha2 * p_it - mu * alpha2 * p_j
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItjSolution {
    pub p_it: f64,
    pub p_j: f64,
    pub value: f64,
}

/// Jamming-power grid `{0, eps, 2 eps, ..., P_J,peak}`; the peak is always the
/// last point.
pub fn jamming_grid(p_j_peak: f64, eps_j: f64) -> impl Iterator<Item = f64> {
    let steps = ((p_j_peak / eps_j) - 1e-9).ceil().max(1.0) as usize;
    (0..=steps).map(move |k| if k == steps { p_j_peak } else { k as f64 * eps_j })
}

/// Golden-section steps of the local `p_J` refinement; shrinks the bracket
/// `2 eps_J` by `0.618^40`, about 1e-8.
const REFINE_STEPS: usize = 40;

/// Maximizes the `(p_IT,n, p_J,n)` Lagrangian term by a grid over `p_J,n`
/// with the exact `p_IT,n` at each grid point, then refines `p_J,n` by
/// golden-section search within one grid step of the best point. The
/// refined point replaces the grid point only if strictly better, so ties
/// keep the smallest grid `p_J`.
pub fn solve_subproblem_itj(
    rx: ReceiverType,
    lambda: f64,
    mu: f64,
    alpha2: f64,
    gains: &SubcarrierGains,
    params: &SystemParams,
    eps_j: f64,
) -> ItjSolution {
    let mut best = ItjSolution { p_it: 0.0, p_j: 0.0, value: f64::NEG_INFINITY };
    for p_j in jamming_grid(params.p_j_peak, eps_j) {
        let p_it = solve_pit_given_pj(rx, p_j, lambda, alpha2, gains, params);
        let value = itj_lagrangian(rx, p_it, p_j, lambda, mu, alpha2, gains, params);
        if value > best.value {
            best = ItjSolution { p_it, p_j, value };
        }
    }
    let eval = |p_j: f64| {
        let p_it = solve_pit_given_pj(rx, p_j, lambda, alpha2, gains, params);
        ItjSolution { p_it, p_j, value: itj_lagrangian(rx, p_it, p_j, lambda, mu, alpha2, gains, params) }
    };
    let (mut lo, mut hi) = ((best.p_j - eps_j).max(0.0), (best.p_j + eps_j).min(params.p_j_peak));
    let mut x1 = eval(hi - INV_PHI * (hi - lo));
    let mut x2 = eval(lo + INV_PHI * (hi - lo));
    for _ in 0..REFINE_STEPS {
        if x1.value >= x2.value {
            hi = x2.p_j;
            x2 = x1;
            x1 = eval(hi - INV_PHI * (hi - lo));
        } else {
            lo = x1.p_j;
            x1 = x2;
            x2 = eval(lo + INV_PHI * (hi - lo));
        }
    }
    for c in [x1, x2] {
        if c.value > best.value {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualFunctionValue {
    /// `g(lambda, mu)` in bits.
    pub value: f64,
    /// Maximizing allocation of the Lagrangian, `p_PT` from the sign rule.
    pub allocation: PowerAllocation,
    /// `(P_S - (1-a2) sum p_PT - a2 sum p_IT, (1-a2) eta sum p_PT |h_J|^2 - a2 sum p_J)`.
    pub subgradient: [f64; 2],
}

/// Subgradient of the dual function at the Lagrangian maximizer `alloc`.
pub fn dual_subgradient(
    alpha2: f64,
    alloc: &PowerAllocation,
    channels: &ChannelRealization,
    params: &SystemParams,
) -> [f64; 2] {
    let sum_pt: f64 = alloc.p_pt.iter().sum();
    let sum_it: f64 = alloc.p_it.iter().sum();
    let sum_j: f64 = alloc.p_j.iter().sum();
    let harvest = model::weighted_harvest(&alloc.p_pt, channels);
    [
        params.p_s_total - (1.0 - alpha2) * sum_pt - alpha2 * sum_it,
        (1.0 - alpha2) * params.eta * harvest - alpha2 * sum_j,
    ]
}

/// Evaluates the dual function, its maximizer and a subgradient.
pub fn dual_function_eval(
    rx: ReceiverType,
    dual: DualPoint,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
) -> DualFunctionValue {
    let DualPoint { lambda, mu } = dual;
    let eps_j = config.eps_j(params);
    let per_n = par::map_slice(channels.gains(), config.execution, |g| {
        let p_pt = solve_ppt_sign(lambda, mu, alpha2, g.h_j, params);
        let itj = solve_subproblem_itj(rx, lambda, mu, alpha2, g, params, eps_j);
        let pt_term = ppt_score(lambda, mu, alpha2, g.h_j, params.eta) * p_pt;
        (p_pt, itj, pt_term)
    });
    let mut alloc = PowerAllocation::zeros(channels.len());
    let mut value = lambda * params.p_s_total;
    for (n, (p_pt, itj, pt_term)) in per_n.into_iter().enumerate() {
        alloc.p_pt[n] = p_pt;
        alloc.p_it[n] = itj.p_it;
        alloc.p_j[n] = itj.p_j;
        value += itj.value + pt_term;
    }
    let subgradient = dual_subgradient(alpha2, &alloc, channels, params);
    DualFunctionValue { value, allocation: alloc, subgradient }
}

/// Indices sorted by harvesting gain, strongest first, ties by lowest index.
pub(crate) fn harvest_order(channels: &ChannelRealization) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..channels.len()).collect();
    let g = channels.gains();
    idx.sort_by(|&i, &j| g[j].h_j.total_cmp(&g[i].h_j));
    idx
}

/// Puts `peak` on the `floor(budget / peak)` strongest harvesting
/// sub-carriers and the remainder on the next one. Maximizes
/// `sum p_n |h_J,n|^2` subject to `sum p_n <= budget`, `0 <= p_n <= peak`.
pub fn greedy_fill(budget: f64, peak: f64, channels: &ChannelRealization) -> Vec<f64> {
    let n = channels.len();
    let mut p = vec![0.0; n];
    if !(budget > 0.0) {
        return p;
    }
    let k = (budget / peak).floor();
    let order = harvest_order(channels);
    if k >= n as f64 {
        p.iter_mut().for_each(|x| *x = peak);
        return p;
    }
    let k = k as usize;
    for &i in &order[..k] {
        p[i] = peak;
    }
    p[order[k]] = (budget - k as f64 * peak).clamp(0.0, peak);
    p
}

/// Recovers `p_PT` for given information and jamming powers by maximizing the
/// harvested energy with the source power left over, then verifies the
/// energy-harvesting constraint.
///
/// Fails with [`Error::RecoveryInfeasible`] when even the best `p_PT` cannot
/// supply `p_j`, which signals a duality gap at this dual point.
pub fn recover_ppt(
    alpha2: f64,
    p_it: &[f64],
    p_j: &[f64],
    channels: &ChannelRealization,
    params: &SystemParams,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = channels.len();
    for v in [p_it, p_j] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
        }
    }
    let required = alpha2 * p_j.iter().sum::<f64>();
    if alpha2 >= 1.0 {
        if required > 0.0 {
            return Err(Error::RecoveryInfeasible { required, available: 0.0 });
        }
        return Ok(vec![0.0; n]);
    }
    let leftover = params.p_s_total - alpha2 * p_it.iter().sum::<f64>();
    if leftover < -tol * params.p_s_total {
        return Err(Error::invalid(format!("information power alone exceeds the budget by {:.3e} W", -leftover)));
    }
    let budget = leftover.max(0.0) / (1.0 - alpha2);
    let p_pt = greedy_fill(budget, params.p_s_peak, channels);
    let available = (1.0 - alpha2) * params.eta * model::weighted_harvest(&p_pt, channels);
    if required > available + tol * available.max(required) {
        return Err(Error::RecoveryInfeasible { required, available });
    }
    Ok(p_pt)
}

/// Scales `p_it` and then `p_j` down just enough to satisfy the sum-power and
/// energy constraints, with `p_PT` from [`greedy_fill`]. Returns the feasible
/// allocation and whether anything was scaled.
pub(crate) fn repair_allocation(
    alpha2: f64,
    p_it: &[f64],
    p_j: &[f64],
    channels: &ChannelRealization,
    params: &SystemParams,
) -> (PowerAllocation, bool) {
    let mut changed = false;
    let mut p_it = p_it.to_vec();
    let mut p_j = p_j.to_vec();
    let used = alpha2 * p_it.iter().sum::<f64>();
    if used > params.p_s_total {
        let s = params.p_s_total / used * (1.0 - 1e-12);
        p_it.iter_mut().for_each(|x| *x *= s);
        changed = true;
    }
    let p_pt = if alpha2 < 1.0 {
        let budget = (params.p_s_total - alpha2 * p_it.iter().sum::<f64>()).max(0.0) / (1.0 - alpha2);
        greedy_fill(budget, params.p_s_peak, channels)
    } else {
        vec![0.0; channels.len()]
    };
    let available = (1.0 - alpha2) * params.eta * model::weighted_harvest(&p_pt, channels);
    let required = alpha2 * p_j.iter().sum::<f64>();
    if required > available {
        let s = if required > 0.0 { available / required * (1.0 - 1e-12) } else { 0.0 };
        p_j.iter_mut().for_each(|x| *x *= s);
        changed = true;
    }
    (PowerAllocation { p_pt, p_it, p_j }, changed)
}

/// Best `(p_PT, p_IT)` for fixed jamming powers.
///
/// The harvest left over after an information budget `B = sum p_IT` falls
/// as `B` grows, and the objective rises with `B`, so the optimum uses the
/// largest `B` that still powers `p_j` (found by bisection) and water-fills
/// `p_IT` over it. Returns `None` when even `B = 0` cannot supply `p_j`.
pub fn refill_information_power(
    rx: ReceiverType,
    alpha2: f64,
    p_j: &[f64],
    channels: &ChannelRealization,
    params: &SystemParams,
    tol: f64,
) -> Option<PowerAllocation> {
    if !(alpha2 > 0.0 && alpha2 < 1.0) {
        return None;
    }
    let required = alpha2 * p_j.iter().sum::<f64>();
    let available = |b: f64| {
        let p_pt = greedy_fill((params.p_s_total - alpha2 * b).max(0.0) / (1.0 - alpha2), params.p_s_peak, channels);
        (1.0 - alpha2) * params.eta * model::weighted_harvest(&p_pt, channels)
    };
    if available(0.0) < required {
        return None;
    }
    let (mut lo, mut hi) = (0.0, params.p_s_total / alpha2);
    if available(hi) < required {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if available(mid) >= required {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else {
        lo = hi;
    }
    let budget = SystemParams { p_s_total: lo, ..params.clone() };
    let (p_it, _) = crate::heuristic::heuristic_pit(rx, p_j, channels, &budget);
    let p_pt = recover_ppt(alpha2, &p_it, p_j, channels, params, tol).ok()?;
    Some(PowerAllocation { p_pt, p_it, p_j: p_j.to_vec() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualOptimum {
    pub dual: DualPoint,
    /// Smallest dual function value found.
    pub dual_value: f64,
    /// Lagrangian maximizer at `dual` (its `p_PT` is the sign-rule one).
    pub allocation: PowerAllocation,
    pub iterations: usize,
    pub cap_reached: bool,
}

fn run_dual<V>(
    rx: ReceiverType,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
    mut visit: V,
) -> DualOptimum
where
    V: FnMut(&DualPoint, &DualFunctionValue),
{
    let out = ellipsoid::minimize(
        &config.ellipsoid,
        |x| {
            let ev = dual_function_eval(rx, x, alpha2, channels, params, config);
            DualEvaluation { value: ev.value, subgradient: ev.subgradient, payload: ev }
        },
        |x, ev| visit(x, &ev.payload),
    );
    DualOptimum {
        dual: out.best_point,
        dual_value: out.best_value,
        allocation: out.best_payload.allocation,
        iterations: out.iterations,
        cap_reached: out.cap_reached,
    }
}

/// Minimizes the dual function over `lambda, mu >= 0` with the ellipsoid
/// method.
pub fn ellipsoid_minimize(
    rx: ReceiverType,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
) -> DualOptimum {
    run_dual(rx, alpha2, channels, params, config, |_, _| {})
}

fn check_interior(alpha2: f64) -> Result<TimeSplit> {
    if !(alpha2 > 0.0 && alpha2 < 1.0) {
        return Err(Error::invalid(format!("inner solvers need 0 < alpha2 < 1, got {alpha2}")));
    }
    TimeSplit::new(alpha2)
}

pub(crate) fn validate_instance(
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<TimeSplit> {
    params.validate()?;
    config.validate()?;
    channels.check_len(params)?;
    check_interior(alpha2)
}

/// Best feasible primal point seen while the dual is being minimized.
pub(crate) struct PrimalTracker {
    pub best: Option<(f64, PowerAllocation)>,
    pub failures: usize,
}

impl PrimalTracker {
    pub fn new() -> Self {
        PrimalTracker { best: None, failures: 0 }
    }

    pub fn offer(&mut self, value: f64, alloc: PowerAllocation) {
        if self.best.as_ref().map_or(true, |(v, _)| value > *v) {
            self.best = Some((value, alloc));
        }
    }
}

/// Optimal power allocation for a fixed `alpha2` in `(0, 1)`.
///
/// Every dual iterate's Lagrangian maximizer is passed through
/// [`recover_ppt`]. The jamming powers of the best candidate and of the best
/// dual point are then re-solved exactly in `(p_PT, p_IT)` by
/// [`refill_information_power`], and the feasible candidate with the highest
/// objective is returned. Failed recoveries are counted in the diagnostics. If none
/// succeeds, the best dual point's allocation is scaled into the feasible set
/// and `diagnostics.repaired` is set.
pub fn solve_inner_optimal(
    rx: ReceiverType,
    alpha2: f64,
    channels: &ChannelRealization,
    params: &SystemParams,
    config: &SolverConfig,
) -> Result<Solution> {
    let time = validate_instance(alpha2, channels, params, config)?;
    let tol = config.feasibility_tol;
    let mut tracker = PrimalTracker::new();
    let opt = run_dual(rx, alpha2, channels, params, config, |_, ev| {
        let a = &ev.allocation;
        match recover_ppt(alpha2, &a.p_it, &a.p_j, channels, params, tol) {
            Ok(p_pt) => {
                let alloc = PowerAllocation { p_pt, p_it: a.p_it.clone(), p_j: a.p_j.clone() };
                let v = model::inner_objective(rx, &alloc, channels, params);
                tracker.offer(v, alloc);
            }
            Err(_) => tracker.failures += 1,
        }
    });

    let mut diagnostics = Diagnostics::new(SolverKind::Optimal);
    diagnostics.iterations = opt.iterations;
    diagnostics.cap_reached = opt.cap_reached;
    diagnostics.recovery_failures = tracker.failures;
    let mut seeds = vec![opt.allocation.p_j.clone()];
    if let Some((_, a)) = &tracker.best {
        seeds.push(a.p_j.clone());
    }
    for p_j in seeds {
        if let Some(alloc) = refill_information_power(rx, alpha2, &p_j, channels, params, tol) {
            let v = model::inner_objective(rx, &alloc, channels, params);
            tracker.offer(v, alloc);
        }
    }
    let (value, power) = match tracker.best.take() {
        Some(best) => best,
        None => {
            let (alloc, changed) =
                repair_allocation(alpha2, &opt.allocation.p_it, &opt.allocation.p_j, channels, params);
            diagnostics.repaired = changed;
            (model::inner_objective(rx, &alloc, channels, params), alloc)
        }
    };
    diagnostics.dual_value = Some(opt.dual_value);
    diagnostics.duality_gap = Some(opt.dual_value - value);
    Ok(Solution::assemble(rx, time, power, channels, params, diagnostics))
}
