//! System model: problem constants, channel realizations, allocations, the
//! rate and harvested-energy formulas, and feasibility checking.
//!
//! Rates are in bits per channel use summed over sub-carriers. The block
//! length `T` is carried only for energy reporting; it cancels out of every
//! constraint the solvers see.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for [`check_feasible`].
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReceiverType {
    /// Destination cannot cancel the jamming signal.
    #[serde(rename = "type1")]
    TypeI,
    /// Destination knows and cancels the jamming signal.
    #[serde(rename = "type2")]
    TypeII,
}

impl ReceiverType {
    pub const ALL: [ReceiverType; 2] = [ReceiverType::TypeI, ReceiverType::TypeII];

    pub fn as_str(self) -> &'static str {
        match self {
            ReceiverType::TypeI => "type1",
            ReceiverType::TypeII => "type2",
        }
    }
}

impl fmt::Display for ReceiverType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ReceiverType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "type1" | "typei" | "i" | "1" => Ok(ReceiverType::TypeI),
            "type2" | "typeii" | "ii" | "2" => Ok(ReceiverType::TypeII),
            other => Err(Error::invalid(format!("unknown receiver type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_subcarriers: usize,
    /// Source sum-power budget `P_S` in watts.
    pub p_s_total: f64,
    /// Per-sub-carrier peak power of the source, watts.
    pub p_s_peak: f64,
    /// Per-sub-carrier peak power of the jammer, watts.
    pub p_j_peak: f64,
    /// Energy harvesting efficiency.
    pub eta: f64,
    pub sigma_d_sq: f64,
    pub sigma_e_sq: f64,
    /// Block length in seconds. Only scales reported energies.
    pub block_length: f64,
}

impl SystemParams {
    pub fn new(
        n_subcarriers: usize,
        p_s_total: f64,
        p_s_peak: f64,
        p_j_peak: f64,
        eta: f64,
        sigma_d_sq: f64,
        sigma_e_sq: f64,
    ) -> Result<Self> {
        let params = SystemParams {
            n_subcarriers,
            p_s_total,
            p_s_peak,
            p_j_peak,
            eta,
            sigma_d_sq,
            sigma_e_sq,
            block_length: 1.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 {
            return Err(Error::invalid("n_subcarriers must be positive"));
        }
        for (name, v) in [
            ("p_s_total", self.p_s_total),
            ("p_s_peak", self.p_s_peak),
            ("p_j_peak", self.p_j_peak),
            ("sigma_d_sq", self.sigma_d_sq),
            ("sigma_e_sq", self.sigma_e_sq),
            ("block_length", self.block_length),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        Ok(())
    }

    pub fn with_block_length(mut self, t: f64) -> Self {
        self.block_length = t;
        self
    }
}

/// Squared channel magnitudes of one sub-carrier.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SubcarrierGains {
    pub h_j: f64,
    pub h_d: f64,
    pub h_e: f64,
    pub g_d: f64,
    pub g_e: f64,
}

impl SubcarrierGains {
    /// Effective legitimate-link SNR per watt, `a_n`.
    pub fn a(&self, rx: ReceiverType, p_j: f64, params: &SystemParams) -> f64 {
        match rx {
            ReceiverType::TypeI => self.h_d / (p_j * self.g_d + params.sigma_d_sq),
            ReceiverType::TypeII => self.h_d / params.sigma_d_sq,
        }
    }

    /// Effective eavesdropper SNR per watt, `b_n`.
    pub fn b(&self, p_j: f64, params: &SystemParams) -> f64 {
        self.h_e / (p_j * self.g_e + params.sigma_e_sq)
    }
}

/// The five complex channel vectors over `N` sub-carriers.
///
/// Squared magnitudes are computed once at construction; every formula in the
/// crate reads only those.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_j: Vec<Complex64>,
    pub h_d: Vec<Complex64>,
    pub h_e: Vec<Complex64>,
    pub g_d: Vec<Complex64>,
    pub g_e: Vec<Complex64>,
    gains: Vec<SubcarrierGains>,
}

impl ChannelRealization {
    pub fn new(
        h_j: Vec<Complex64>,
        h_d: Vec<Complex64>,
        h_e: Vec<Complex64>,
        g_d: Vec<Complex64>,
        g_e: Vec<Complex64>,
    ) -> Result<Self> {
        let n = h_j.len();
        for v in [&h_d, &h_e, &g_d, &g_e] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
            }
        }
        let gains: Vec<SubcarrierGains> = (0..n)
            .map(|i| SubcarrierGains {
                h_j: h_j[i].norm_sqr(),
                h_d: h_d[i].norm_sqr(),
                h_e: h_e[i].norm_sqr(),
                g_d: g_d[i].norm_sqr(),
                g_e: g_e[i].norm_sqr(),
            })
            .collect();
        if gains.iter().any(|g| ![g.h_j, g.h_d, g.h_e, g.g_d, g.g_e].iter().all(|x| x.is_finite())) {
            return Err(Error::invalid("channel gains must be finite"));
        }
        Ok(ChannelRealization { h_j, h_d, h_e, g_d, g_e, gains })
    }

    /// Builds a realization with real, non-negative amplitudes whose squares
    /// are the given gains. Handy for hand-written instances.
    pub fn from_gains(gains: &[SubcarrierGains]) -> Result<Self> {
        let amp = |f: fn(&SubcarrierGains) -> f64| -> Result<Vec<Complex64>> {
            gains
                .iter()
                .map(|g| {
                    let v = f(g);
                    if v < 0.0 || !v.is_finite() {
                        Err(Error::invalid("squared gains must be finite and non-negative"))
                    } else {
                        Ok(Complex64::new(v.sqrt(), 0.0))
                    }
                })
                .collect()
        };
        Self::new(amp(|g| g.h_j)?, amp(|g| g.h_d)?, amp(|g| g.h_e)?, amp(|g| g.g_d)?, amp(|g| g.g_e)?)
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gains(&self) -> &[SubcarrierGains] {
        &self.gains
    }

    pub fn subcarrier(&self, n: usize) -> SubcarrierGains {
        self.gains[n]
    }

    pub(crate) fn check_len(&self, params: &SystemParams) -> Result<()> {
        if self.len() != params.n_subcarriers {
            return Err(Error::DimensionMismatch { expected: params.n_subcarriers, actual: self.len() });
        }
        Ok(())
    }
}

/// Time split `(alpha1, alpha2)` with `alpha1 = 1 - alpha2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSplit {
    alpha2: f64,
}

impl TimeSplit {
    pub fn new(alpha2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha2) {
            return Err(Error::invalid(format!("alpha2 must lie in [0, 1], got {alpha2}")));
        }
        Ok(TimeSplit { alpha2 })
    }

    pub fn alpha1(&self) -> f64 {
        1.0 - self.alpha2
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub p_pt: Vec<f64>,
    pub p_it: Vec<f64>,
    pub p_j: Vec<f64>,
}

impl PowerAllocation {
    pub fn zeros(n: usize) -> Self {
        PowerAllocation { p_pt: vec![0.0; n], p_it: vec![0.0; n], p_j: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.p_it.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_it.is_empty()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        for v in [&self.p_pt, &self.p_it, &self.p_j] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolverKind {
    Optimal,
    Mm,
    Heuristic,
    NoJamming,
    /// `alpha2 = 0`: no information slot, zero rate.
    Trivial,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Optimal => "optimal",
            SolverKind::Mm => "mm",
            SolverKind::Heuristic => "heuristic",
            SolverKind::NoJamming => "no-cj",
            SolverKind::Trivial => "trivial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub solver: SolverKind,
    /// Ellipsoid iterations (optimal), MM iterations (mm), or 0.
    pub iterations: usize,
    /// Best dual function value, in bits without the `alpha2` factor.
    pub dual_value: Option<f64>,
    /// `dual_value` minus the inner objective of the returned allocation.
    pub duality_gap: Option<f64>,
    pub cap_reached: bool,
    /// Dual iterates whose p_PT recovery failed the energy post-check.
    pub recovery_failures: usize,
    /// The returned allocation had to be scaled back into the feasible set.
    pub repaired: bool,
    /// Type-I heuristic found no sub-carrier where jamming helps.
    pub empty_jamming_set: bool,
}

impl Diagnostics {
    pub fn new(solver: SolverKind) -> Self {
        Diagnostics {
            solver,
            iterations: 0,
            dual_value: None,
            duality_gap: None,
            cap_reached: false,
            recovery_failures: 0,
            repaired: false,
            empty_jamming_set: false,
        }
    }

    /// Relative duality gap `(g - primal) / max(|g|, tiny)` when known.
    pub fn relative_gap(&self) -> Option<f64> {
        match (self.dual_value, self.duality_gap) {
            (Some(g), Some(gap)) => Some(gap / g.abs().max(1e-300)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub time: TimeSplit,
    pub power: PowerAllocation,
    /// Reported secrecy rate, `alpha2 * sum_n [R_D - R_E]^+` in bits.
    pub secrecy_rate: f64,
    pub diagnostics: Diagnostics,
}

impl Solution {
    pub(crate) fn assemble(
        rx: ReceiverType,
        time: TimeSplit,
        power: PowerAllocation,
        channels: &ChannelRealization,
        params: &SystemParams,
        diagnostics: Diagnostics,
    ) -> Self {
        let secrecy_rate = secrecy_rate_unchecked(rx, time, &power, channels, params);
        Solution { time, power, secrecy_rate, diagnostics }
    }

    pub fn zero(n: usize, time: TimeSplit) -> Self {
        Solution {
            time,
            power: PowerAllocation::zeros(n),
            secrecy_rate: 0.0,
            diagnostics: Diagnostics::new(SolverKind::Trivial),
        }
    }
}

/// Energy harvested by the jammer in the transfer slot,
/// `alpha1 * T * eta * sum_n p_PT,n |h_J,n|^2`.
pub fn harvested_energy(
    time: TimeSplit,
    p_pt: &[f64],
    channels: &ChannelRealization,
    params: &SystemParams,
) -> Result<f64> {
    if p_pt.len() != channels.len() {
        return Err(Error::DimensionMismatch { expected: channels.len(), actual: p_pt.len() });
    }
    if p_pt.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::invalid("p_pt entries must be finite and non-negative"));
    }
    Ok(time.alpha1() * params.block_length * params.eta * weighted_harvest(p_pt, channels))
}

/// `sum_n p_PT,n |h_J,n|^2`.
pub(crate) fn weighted_harvest(p_pt: &[f64], channels: &ChannelRealization) -> f64 {
    p_pt.iter().zip(channels.gains()).map(|(p, g)| p * g.h_j).sum()
}

fn check_scalar(name: &str, v: f64) -> Result<()> {
    if v < 0.0 || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be finite and non-negative, got {v}")));
    }
    Ok(())
}

/// Rate from source to destination on one sub-carrier, including the
/// `alpha2` factor.
pub fn rate_sd(
    rx: ReceiverType,
    alpha2: f64,
    p_it: f64,
    p_j: f64,
    gains: &SubcarrierGains,
    params: &SystemParams,
) -> Result<f64> {
    check_scalar("alpha2", alpha2)?;
    check_scalar("p_it", p_it)?;
    check_scalar("p_j", p_j)?;
    Ok(alpha2 * (p_it * gains.a(rx, p_j, params)).ln_1p() / std::f64::consts::LN_2)
}

/// Rate from source to eavesdropper on one sub-carrier, including `alpha2`.
pub fn rate_se(alpha2: f64, p_it: f64, p_j: f64, gains: &SubcarrierGains, params: &SystemParams) -> Result<f64> {
    check_scalar("alpha2", alpha2)?;
    check_scalar("p_it", p_it)?;
    check_scalar("p_j", p_j)?;
    Ok(alpha2 * (p_it * gains.b(p_j, params)).ln_1p() / std::f64::consts::LN_2)
}

/// Per-sub-carrier secrecy term without the positive part and without
/// `alpha2`, in bits.
#[inline]
pub(crate) fn secrecy_term(rx: ReceiverType, p_it: f64, p_j: f64, g: &SubcarrierGains, params: &SystemParams) -> f64 {
    let a = g.a(rx, p_j, params);
    let b = g.b(p_j, params);
    ((p_it * a).ln_1p() - (p_it * b).ln_1p()) / std::f64::consts::LN_2
}

/// Inner-problem objective: `sum_n (log2(1 + a_n p) - log2(1 + b_n p))`
/// with no positive part and no `alpha2` factor.
pub fn inner_objective(
    rx: ReceiverType,
    power: &PowerAllocation,
    channels: &ChannelRealization,
    params: &SystemParams,
) -> f64 {
    channels
        .gains()
        .iter()
        .zip(power.p_it.iter().zip(&power.p_j))
        .map(|(g, (&p_it, &p_j))| secrecy_term(rx, p_it, p_j, g, params))
        .sum()
}

fn secrecy_rate_unchecked(
    rx: ReceiverType,
    time: TimeSplit,
    power: &PowerAllocation,
    channels: &ChannelRealization,
    params: &SystemParams,
) -> f64 {
    let total: f64 = channels
        .gains()
        .iter()
        .zip(power.p_it.iter().zip(&power.p_j))
        .map(|(g, (&p_it, &p_j))| secrecy_term(rx, p_it, p_j, g, params).max(0.0))
        .sum();
    time.alpha2() * total
}

/// Reported secrecy rate `alpha2 * sum_n [R_SD,n - R_SE,n]^+` (bits).
pub fn secrecy_rate(
    rx: ReceiverType,
    time: TimeSplit,
    power: &PowerAllocation,
    channels: &ChannelRealization,
    params: &SystemParams,
) -> Result<f64> {
    power.check_len(channels.len())?;
    for v in power.p_it.iter().chain(&power.p_j) {
        check_scalar("power", *v)?;
    }
    Ok(secrecy_rate_unchecked(rx, time, power, channels, params))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `alpha1 sum p_PT + alpha2 sum p_IT > P_S`.
    SumPower {
        used: f64,
        budget: f64,
    },
    /// Jamming energy exceeds harvested energy.
    Energy {
        used: f64,
        harvested: f64,
    },
    Negative {
        vector: &'static str,
        index: usize,
        value: f64,
    },
    Peak {
        vector: &'static str,
        index: usize,
        value: f64,
        peak: f64,
    },
    Dimension {
        expected: usize,
        actual: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

#[inline]
fn within(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs <= rhs + tol * rhs.abs().max(lhs.abs())
}

/// Checks the sum-power, box and energy-harvesting constraints with relative
/// tolerance `tol`.
pub fn check_feasible(
    time: TimeSplit,
    power: &PowerAllocation,
    channels: &ChannelRealization,
    params: &SystemParams,
    tol: f64,
) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    let n = channels.len();
    for v in [&power.p_pt, &power.p_it, &power.p_j] {
        if v.len() != n {
            report.violations.push(Violation::Dimension { expected: n, actual: v.len() });
            return report;
        }
    }

    let boxes: [(&'static str, &Vec<f64>, f64); 3] = [
        ("p_pt", &power.p_pt, params.p_s_peak),
        ("p_it", &power.p_it, params.p_s_peak),
        ("p_j", &power.p_j, params.p_j_peak),
    ];
    for (name, v, peak) in boxes {
        for (i, &x) in v.iter().enumerate() {
            if x < 0.0 || x.is_nan() {
                report.violations.push(Violation::Negative { vector: name, index: i, value: x });
            } else if !within(x, peak, tol) {
                report.violations.push(Violation::Peak { vector: name, index: i, value: x, peak });
            }
        }
    }

    let used = time.alpha1() * power.p_pt.iter().sum::<f64>() + time.alpha2() * power.p_it.iter().sum::<f64>();
    if !within(used, params.p_s_total, tol) {
        report.violations.push(Violation::SumPower { used, budget: params.p_s_total });
    }

    let t = params.block_length;
    let jam = time.alpha2() * t * power.p_j.iter().sum::<f64>();
    let harvested = time.alpha1() * t * params.eta * weighted_harvest(&power.p_pt, channels);
    if !within(jam, harvested, tol) {
        report.violations.push(Violation::Energy { used: jam, harvested });
    }
    report
}
