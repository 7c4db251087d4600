//! Monte-Carlo experiment harness: configuration, sweeps, convergence traces,
//! summaries and plot data.
//!
//! # Configuration
//!
//! A flat TOML table. Every key is optional except `version`, which must be
//! `1`; unknown keys are rejected. Powers are in dBm unless the key ends in
//! `_w`, distances in metres.
//!
//! ```toml
//! version = 1
//! n_subcarriers = 32
//! realizations = 500
//! receiver = "type1"
//! schemes = ["joint-mm", "joint-heuristic", "fixed-mm", "no-cj"]
//! sweep_axis = "p_s_dbm"          # or "d_sj"
//! sweep_values = [15.0, 20.0, 25.0, 30.0, 35.0]
//! seed = 1
//! ```
//!
//! # Output
//!
//! `results.csv` has one row per (sweep value, realization, scheme) with the
//! columns of [`ResultRow`]. All schemes of one realization see the same
//! channels; `channel_hash` identifies them. Wall time is written as 0 unless
//! `record_timing = true`, so that runs with the same seed are byte-identical.
//!
//! Plot data files `plot_<metric>_<scheme>.dat` hold whitespace-separated
//! columns `x mean stderr n`, one line per sweep value, after `#` comment
//! lines.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{sample_channels, Geometry, Seed};
use crate::dual::{solve_inner_optimal, SolverConfig};
use crate::ellipsoid::EllipsoidConfig;
use crate::error::{Error, Result};
use crate::mm::{solve_inner_mm, MmTrace};
use crate::model::{ChannelRealization, ReceiverType, Solution, SystemParams};
use crate::oracle::{oracle_inner, GridSpec};
use crate::outer::{solve_benchmark, solve_joint, BenchmarkScheme, InnerSolver, OuterConfig};
use crate::par::{self, Execution};
use crate::units::{db_to_linear, dbm_to_watts};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "joint-optimal")]
    JointOptimal,
    #[serde(rename = "joint-mm")]
    JointMm,
    #[serde(rename = "joint-heuristic")]
    JointHeuristic,
    #[serde(rename = "fixed-mm")]
    FixedMm,
    #[serde(rename = "fixed-heuristic")]
    FixedHeuristic,
    #[serde(rename = "no-cj")]
    NoCj,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::JointOptimal,
        Scheme::JointMm,
        Scheme::JointHeuristic,
        Scheme::FixedMm,
        Scheme::FixedHeuristic,
        Scheme::NoCj,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::JointOptimal => "joint-optimal",
            Scheme::JointMm => "joint-mm",
            Scheme::JointHeuristic => "joint-heuristic",
            Scheme::FixedMm => "fixed-mm",
            Scheme::FixedHeuristic => "fixed-heuristic",
            Scheme::NoCj => "no-cj",
        }
    }

    /// Default scheme list: everything except the optimal solver, whose
    /// jamming grid makes it expensive at `N = 32`.
    pub fn defaults() -> Vec<Scheme> {
        Scheme::ALL.iter().copied().filter(|s| *s != Scheme::JointOptimal).collect()
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .iter()
            .copied()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// Parses a comma-separated scheme list.
pub fn parse_schemes(list: &str) -> Result<Vec<Scheme>> {
    let out: Vec<Scheme> =
        list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(Scheme::from_str).collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Config("scheme list is empty".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "p_s_dbm")]
    SourcePower,
    #[serde(rename = "d_sj")]
    JammerDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub n_subcarriers: usize,
    pub zeta0_db: f64,
    pub d0: f64,
    pub kappa: f64,
    /// Total noise power; each sub-carrier gets `1/N` of it.
    pub noise_dbm: f64,
    pub eta: f64,
    pub d_sd: f64,
    pub d_se: f64,
    /// Jammer distance when sweeping the source power.
    pub d_sj: f64,
    /// Source power when sweeping the jammer distance.
    pub p_s_dbm: f64,
    /// Per-sub-carrier source peak; defaults to the total power `P_S`.
    pub p_s_peak_w: Option<f64>,
    pub p_j_peak_w: f64,
    pub realizations: usize,
    pub sweep_axis: SweepAxis,
    pub sweep_values: Vec<f64>,
    pub receiver: ReceiverType,
    pub schemes: Vec<Scheme>,
    /// `alpha2` of the fixed-time-allocation schemes.
    pub fixed_alpha2: f64,
    pub grid_points: usize,
    pub refine: bool,
    pub eps_j_fraction: f64,
    pub eps_e: f64,
    pub eps_m: f64,
    pub max_mm_iters: usize,
    pub max_ellipsoid_iters: usize,
    pub ellipsoid_lambda0: f64,
    pub ellipsoid_mu0: f64,
    pub ellipsoid_radius_sq: f64,
    pub seed: u64,
    pub record_timing: bool,
    pub execution: Execution,
    pub trace_alpha2: f64,
    pub trace_d_sj: f64,
    pub trace_p_s_dbm: Vec<f64>,
    pub oracle_instances: usize,
    pub oracle_steps: usize,
    pub oracle_zoom_passes: usize,
    pub oracle_alpha2: f64,
    /// Jammer peak of the oracle instances, near what two sub-carriers can
    /// harvest so that the jamming axis is resolved.
    pub oracle_p_j_peak_w: f64,
    pub oracle_eps_j_fraction: f64,
    pub oracle_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            n_subcarriers: 32,
            zeta0_db: -30.0,
            d0: 1.0,
            kappa: 3.0,
            noise_dbm: -100.0,
            eta: 0.5,
            d_sd: 5.0,
            d_se: 5.0,
            d_sj: 0.5,
            p_s_dbm: 35.0,
            p_s_peak_w: None,
            p_j_peak_w: 1.0,
            realizations: 500,
            sweep_axis: SweepAxis::SourcePower,
            sweep_values: vec![15.0, 20.0, 25.0, 30.0, 35.0],
            receiver: ReceiverType::TypeI,
            schemes: Scheme::defaults(),
            fixed_alpha2: 0.5,
            grid_points: 101,
            refine: true,
            eps_j_fraction: 1e-3,
            eps_e: 1e-4,
            eps_m: 1e-4,
            max_mm_iters: 50,
            max_ellipsoid_iters: 500,
            ellipsoid_lambda0: 100.0,
            ellipsoid_mu0: 100.0,
            ellipsoid_radius_sq: 20100.0,
            seed: 1,
            record_timing: false,
            execution: Execution::Parallel,
            trace_alpha2: 0.8,
            trace_d_sj: 0.5,
            trace_p_s_dbm: vec![25.0, 35.0],
            oracle_instances: 10,
            oracle_steps: 200,
            oracle_zoom_passes: 3,
            oracle_alpha2: 0.5,
            oracle_p_j_peak_w: 0.05,
            oracle_eps_j_fraction: 1e-4,
            oracle_tol: 1e-3,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        if !text.lines().any(|l| l.trim_start().starts_with("version")) {
            return Err(Error::Config("missing 'version' key".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks every setting, including the derived system parameters and
    /// geometry of each sweep point.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        if self.realizations == 0 {
            return bad("realizations must be positive".into());
        }
        if self.sweep_values.is_empty() {
            return bad("sweep_values is empty".into());
        }
        if self.schemes.is_empty() {
            return bad("schemes is empty".into());
        }
        if !(self.fixed_alpha2 > 0.0 && self.fixed_alpha2 <= 1.0) {
            return bad(format!("fixed_alpha2 must lie in (0, 1], got {}", self.fixed_alpha2));
        }
        if !(self.trace_alpha2 > 0.0 && self.trace_alpha2 < 1.0) {
            return bad(format!("trace_alpha2 must lie in (0, 1), got {}", self.trace_alpha2));
        }
        if !(self.oracle_alpha2 > 0.0 && self.oracle_alpha2 < 1.0) {
            return bad(format!("oracle_alpha2 must lie in (0, 1), got {}", self.oracle_alpha2));
        }
        let wrap = |e: Error| Error::Config(e.to_string());
        self.solver_config().validate().map_err(wrap)?;
        self.outer_config(InnerSolver::Mm).validate().map_err(wrap)?;
        for &v in &self.sweep_values {
            let (p, g) = self.point(v).map_err(wrap)?;
            p.validate().map_err(wrap)?;
            g.validate().map_err(wrap)?;
        }
        for &p in &self.trace_p_s_dbm {
            self.params_at(p).map_err(wrap)?;
        }
        Geometry::new(self.trace_d_sj, self.d_sd, self.d_se, db_to_linear(self.zeta0_db), self.d0, self.kappa)
            .map_err(wrap)?;
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            eps_j_fraction: self.eps_j_fraction,
            ellipsoid: EllipsoidConfig {
                center: [self.ellipsoid_lambda0, self.ellipsoid_mu0],
                radius_sq: self.ellipsoid_radius_sq,
                volume_tol: self.eps_e,
                max_iters: self.max_ellipsoid_iters,
                ..EllipsoidConfig::default()
            },
            eps_m: self.eps_m,
            max_mm_iters: self.max_mm_iters,
            execution: self.execution,
            ..SolverConfig::default()
        }
    }

    pub fn outer_config(&self, inner: InnerSolver) -> OuterConfig {
        OuterConfig { grid_points: self.grid_points, refine: self.refine, inner_solver: inner, ..Default::default() }
    }

    /// System parameters at source power `p_s_dbm`.
    pub fn params_at(&self, p_s_dbm: f64) -> Result<SystemParams> {
        let p_s = dbm_to_watts(p_s_dbm);
        let n = self.n_subcarriers;
        let noise = dbm_to_watts(self.noise_dbm) / n.max(1) as f64;
        SystemParams::new(n, p_s, self.p_s_peak_w.unwrap_or(p_s), self.p_j_peak_w, self.eta, noise, noise)
    }

    pub fn geometry_at(&self, d_sj: f64) -> Result<Geometry> {
        Geometry::new(d_sj, self.d_sd, self.d_se, db_to_linear(self.zeta0_db), self.d0, self.kappa)
    }

    /// Parameters and geometry at one sweep value.
    pub fn point(&self, sweep_value: f64) -> Result<(SystemParams, Geometry)> {
        match self.sweep_axis {
            SweepAxis::SourcePower => Ok((self.params_at(sweep_value)?, self.geometry_at(self.d_sj)?)),
            SweepAxis::JammerDistance => Ok((self.params_at(self.p_s_dbm)?, self.geometry_at(sweep_value)?)),
        }
    }
}

/// One scheme on one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub receiver: ReceiverType,
    pub sweep_value: f64,
    pub realization: u64,
    pub secrecy_rate: f64,
    pub alpha2: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub channel_hash: String,
}

/// First 8 bytes of the SHA-256 of all squared gains, as hex.
pub fn channel_hash(ch: &ChannelRealization) -> String {
    let mut h = Sha256::new();
    for v in [&ch.h_j, &ch.h_d, &ch.h_e, &ch.g_d, &ch.g_e] {
        for z in v.iter() {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs one scheme.
pub fn run_scheme(
    scheme: Scheme,
    rx: ReceiverType,
    channels: &ChannelRealization,
    params: &SystemParams,
    cfg: &ExperimentConfig,
) -> Result<Solution> {
    let solver = cfg.solver_config();
    let joint = |inner| solve_joint(rx, channels, params, &cfg.outer_config(inner), &solver);
    let fixed = |inner| {
        solve_benchmark(rx, BenchmarkScheme::FixedTA { alpha2: cfg.fixed_alpha2, inner }, channels, params, &solver)
    };
    match scheme {
        Scheme::JointOptimal => joint(InnerSolver::Optimal),
        Scheme::JointMm => joint(InnerSolver::Mm),
        Scheme::JointHeuristic => joint(InnerSolver::Heuristic),
        Scheme::FixedMm => fixed(InnerSolver::Mm),
        Scheme::FixedHeuristic => fixed(InnerSolver::Heuristic),
        Scheme::NoCj => solve_benchmark(rx, BenchmarkScheme::NoCJ, channels, params, &solver),
    }
}

/// Every scheme on every (sweep value, realization).
///
/// Realizations run in parallel; rows come out ordered by sweep value,
/// realization and then the configured scheme order. Realization `k` uses
/// the seed's stream `k` at every sweep value.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let reals = cfg.realizations;
    let jobs = cfg.sweep_values.len() * reals;
    let per_job = par::map_indexed(jobs, cfg.execution, |job| -> Result<Vec<ResultRow>> {
        let x = cfg.sweep_values[job / reals];
        let r = (job % reals) as u64;
        let (params, geo) = cfg.point(x)?;
        let ch = sample_channels(&geo, cfg.n_subcarriers, Seed::new(cfg.seed, r))?;
        let hash = channel_hash(&ch);
        cfg.schemes
            .iter()
            .map(|&scheme| {
                let t = Instant::now();
                let s = run_scheme(scheme, cfg.receiver, &ch, &params, cfg)?;
                let wall = if cfg.record_timing { t.elapsed().as_secs_f64() } else { 0.0 };
                Ok(ResultRow {
                    scheme,
                    receiver: cfg.receiver,
                    sweep_value: x,
                    realization: r,
                    secrecy_rate: s.secrecy_rate,
                    alpha2: s.time.alpha2(),
                    iterations: s.diagnostics.iterations,
                    wall_time_s: wall,
                    channel_hash: hash.clone(),
                })
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(jobs * cfg.schemes.len());
    for r in per_job {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn write_results<W: Write>(w: W, rows: &[ResultRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_results<R: std::io::Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|x| x.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "secrecy_rate")]
    SecrecyRate,
    #[serde(rename = "alpha2")]
    Alpha2,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SecrecyRate => "secrecy_rate",
            Metric::Alpha2 => "alpha2",
        }
    }

    fn of(self, r: &ResultRow) -> f64 {
        match self {
            Metric::SecrecyRate => r.secrecy_rate,
            Metric::Alpha2 => r.alpha2,
        }
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "secrecy_rate" => Ok(Metric::SecrecyRate),
            "alpha2" => Ok(Metric::Alpha2),
            _ => Err(Error::Config(format!("unknown metric '{s}'"))),
        }
    }
}

/// Mean and standard error of one (scheme, sweep value) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub receiver: ReceiverType,
    pub metric: Metric,
    pub sweep_value: f64,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; 0 when `n == 1`.
    pub stderr: f64,
    pub n: usize,
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Groups rows by (scheme, receiver, sweep value) in first-appearance order
/// of the scheme and increasing sweep value.
pub fn summarize(rows: &[ResultRow], metric: Metric) -> Vec<SummaryRow> {
    let mut order: Vec<(Scheme, ReceiverType)> = Vec::new();
    let mut groups: BTreeMap<(usize, u64), (f64, Vec<f64>)> = BTreeMap::new();
    let key = |x: f64| -> u64 {
        // order-preserving map of f64 to u64
        let b = x.to_bits();
        if b >> 63 == 1 {
            !b
        } else {
            b | (1 << 63)
        }
    };
    for r in rows {
        let id = (r.scheme, r.receiver);
        let k = order.iter().position(|o| *o == id).unwrap_or_else(|| {
            order.push(id);
            order.len() - 1
        });
        groups.entry((k, key(r.sweep_value))).or_insert((r.sweep_value, Vec::new())).1.push(metric.of(r));
    }
    groups
        .into_iter()
        .map(|((k, _), (x, vals))| {
            let (mean, stderr) = mean_stderr(&vals);
            SummaryRow { scheme: order[k].0, receiver: order[k].1, metric, sweep_value: x, mean, stderr, n: vals.len() }
        })
        .collect()
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Which series to emit.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub metric: Metric,
    /// `None` keeps every scheme present in the table.
    pub schemes: Option<Vec<Scheme>>,
    pub out_dir: PathBuf,
}

/// Writes one `plot_<metric>_<scheme>.dat` per scheme and returns the paths.
pub fn emit_plotdata(rows: &[ResultRow], spec: &PlotSpec) -> Result<Vec<PathBuf>> {
    let selected: Vec<ResultRow> =
        rows.iter().filter(|r| spec.schemes.as_ref().map_or(true, |s| s.contains(&r.scheme))).cloned().collect();
    if selected.is_empty() {
        return Err(Error::EmptySelection(format!(
            "no rows for metric {} and the selected schemes",
            spec.metric.as_str()
        )));
    }
    fs::create_dir_all(&spec.out_dir)?;
    let summary = summarize(&selected, spec.metric);
    let mut by_scheme: Vec<(Scheme, ReceiverType, Vec<&SummaryRow>)> = Vec::new();
    for s in &summary {
        match by_scheme.iter_mut().find(|(sc, rx, _)| *sc == s.scheme && *rx == s.receiver) {
            Some(e) => e.2.push(s),
            None => by_scheme.push((s.scheme, s.receiver, vec![s])),
        }
    }
    let multi_rx = by_scheme.iter().any(|e| e.1 != by_scheme[0].1);
    let mut paths = Vec::new();
    for (scheme, rx, series) in by_scheme {
        let name = if multi_rx {
            format!("plot_{}_{}_{}.dat", spec.metric.as_str(), scheme, rx)
        } else {
            format!("plot_{}_{}.dat", spec.metric.as_str(), scheme)
        };
        let path = spec.out_dir.join(name);
        let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(f, "# scheme {scheme} receiver {rx} metric {}", spec.metric.as_str())?;
        writeln!(f, "# x mean stderr n")?;
        for s in series {
            writeln!(f, "{:?} {:?} {:?} {}", s.sweep_value, s.mean, s.stderr, s.n)?;
        }
        f.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

/// Creates `dir` if needed and checks that files can be written there.
pub fn prepare_output_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let probe = dir.join(".cjsim-write-test");
    fs::write(&probe, b"").map_err(|e| Error::Config(format!("cannot write to {}: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

/// MM trace at one source power.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSeries {
    pub receiver: ReceiverType,
    pub p_s_dbm: f64,
    pub trace: MmTrace,
}

/// MM objective traces at `alpha2`, jammer distance `d_sj` and each of
/// `trace_p_s_dbm`, on realization 0 of the configured seed.
pub fn run_convergence_trace(cfg: &ExperimentConfig, alpha2: f64, d_sj: f64) -> Result<Vec<TraceSeries>> {
    cfg.validate()?;
    let geo = cfg.geometry_at(d_sj)?;
    let ch = sample_channels(&geo, cfg.n_subcarriers, Seed::new(cfg.seed, 0))?;
    let solver = cfg.solver_config();
    cfg.trace_p_s_dbm
        .iter()
        .map(|&p| {
            let params = cfg.params_at(p)?;
            let out = solve_inner_mm(cfg.receiver, alpha2, &ch, &params, &solver)?;
            Ok(TraceSeries { receiver: cfg.receiver, p_s_dbm: p, trace: out.trace })
        })
        .collect()
}

/// Writes `receiver,p_s_dbm,iteration,objective` rows; iteration 0 is the
/// starting point.
pub fn write_traces<W: Write>(w: W, series: &[TraceSeries]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["receiver", "p_s_dbm", "iteration", "objective"])?;
    for s in series {
        let rows = std::iter::once(s.trace.initial).chain(s.trace.objectives.iter().copied());
        for (k, v) in rows.enumerate() {
            wr.write_record([
                s.receiver.as_str().to_string(),
                format!("{:?}", s.p_s_dbm),
                k.to_string(),
                format!("{v:?}"),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Optimal inner solver against the exhaustive oracle on one small instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheckRow {
    pub instance: u64,
    pub receiver: ReceiverType,
    pub dual_value: f64,
    pub oracle_value: f64,
    pub abs_diff: f64,
    pub pass: bool,
}

/// Compares the optimal inner solver with the oracle on `oracle_instances`
/// two-sub-carrier realizations at `oracle_alpha2`, using the source power
/// `p_s_dbm` and jammer distance `d_sj` of the configuration.
pub fn run_oracle_check(cfg: &ExperimentConfig) -> Result<Vec<OracleCheckRow>> {
    cfg.validate()?;
    let small = ExperimentConfig {
        n_subcarriers: 2,
        p_j_peak_w: cfg.oracle_p_j_peak_w,
        eps_j_fraction: cfg.oracle_eps_j_fraction,
        ..cfg.clone()
    };
    small.validate()?;
    let params = small.params_at(cfg.p_s_dbm)?;
    let geo = small.geometry_at(cfg.d_sj)?;
    let solver = small.solver_config();
    let grid = GridSpec::new(cfg.oracle_steps).with_zoom(cfg.oracle_zoom_passes);
    let a2 = cfg.oracle_alpha2;
    (0..cfg.oracle_instances as u64)
        .map(|k| {
            let ch = sample_channels(&geo, 2, Seed::new(cfg.seed, k))?;
            let d = solve_inner_optimal(cfg.receiver, a2, &ch, &params, &solver)?;
            let dual_value = a2 * crate::model::inner_objective(cfg.receiver, &d.power, &ch, &params);
            let o = oracle_inner(cfg.receiver, a2, &ch, &params, &grid)?;
            let oracle_value = a2 * o.value;
            let abs_diff = (dual_value - oracle_value).abs();
            Ok(OracleCheckRow {
                instance: k,
                receiver: cfg.receiver,
                dual_value,
                oracle_value,
                abs_diff,
                pass: abs_diff <= cfg.oracle_tol,
            })
        })
        .collect()
}

pub fn write_oracle_rows<W: Write>(w: W, rows: &[OracleCheckRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
