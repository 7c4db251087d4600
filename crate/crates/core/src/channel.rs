//! Seeded Rayleigh-fading channel generation on a line geometry, and a text
//! dump format for realizations.
//!
//! # Random streams
//!
//! Realization `k` of seed `s` is drawn from `ChaCha8Rng::seed_from_u64(s)`
//! switched to stream `k` (`set_stream(k)`). Streams are independent, so a
//! realization never depends on how many others were drawn before it, and
//! Monte-Carlo loops can generate realizations in any order or in parallel.
//! Within a stream the draws are, in order: `h_J`, `h_D`, `h_E`, `g_D`, `g_E`,
//! each as `N` complex entries with real part drawn before imaginary part,
//! both `Normal(0, sqrt(variance / 2))`.
//!
//! # Dump format
//!
//! ```text
//! # cj-ofdm channels v1
//! # n_subcarriers 32
//! # fields index h_j h_d h_e g_d g_e (re im per sub-carrier)
//! 0 <re> <im> ... (5 * N complex pairs)
//! 1 ...
//! ```
//!
//! One record per line. The five vectors appear in the order `h_j h_d h_e g_d
//! g_e`; each vector lists its `N` entries as `re im` pairs. Floats are written
//! with Rust's shortest round-trip formatting, so a dump reloads bit-exactly.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ChannelRealization;

pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    /// Source to jammer (`h_J`).
    Sj,
    /// Source to destination (`h_D`).
    Sd,
    /// Source to eavesdropper (`h_E`).
    Se,
    /// Jammer to destination (`g_D`).
    Jd,
    /// Jammer to eavesdropper (`g_E`).
    Je,
}

/// Node placement: the jammer sits on the segment between the source and the
/// (co-located) destination/eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub d_sj: f64,
    pub d_sd: f64,
    pub d_se: f64,
    /// Path loss at the reference distance (linear).
    pub zeta0: f64,
    pub d0: f64,
    pub kappa: f64,
}

impl Geometry {
    pub fn new(d_sj: f64, d_sd: f64, d_se: f64, zeta0: f64, d0: f64, kappa: f64) -> Result<Self> {
        let g = Geometry { d_sj, d_sd, d_se, zeta0, d0, kappa };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d_sj", self.d_sj), ("d_sd", self.d_sd), ("d_se", self.d_se), ("d0", self.d0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.d_sj < self.d_sd.min(self.d_se)) {
            return Err(Error::invalid(format!(
                "jammer must sit strictly between source and receivers: d_sj={} d_sd={} d_se={}",
                self.d_sj, self.d_sd, self.d_se
            )));
        }
        if !(self.zeta0.is_finite() && self.zeta0 >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::invalid("zeta0 must be non-negative and kappa finite"));
        }
        Ok(())
    }

    pub fn d_jd(&self) -> f64 {
        self.d_sd - self.d_sj
    }

    pub fn d_je(&self) -> f64 {
        self.d_se - self.d_sj
    }

    pub fn distance(&self, link: Link) -> f64 {
        match link {
            Link::Sj => self.d_sj,
            Link::Sd => self.d_sd,
            Link::Se => self.d_se,
            Link::Jd => self.d_jd(),
            Link::Je => self.d_je(),
        }
    }
}

/// Mean squared gain of a link, `zeta0 * (d / d0)^(-kappa)`.
pub fn variance_for(link: Link, geometry: &Geometry) -> Result<f64> {
    let d = geometry.distance(link);
    if !(d > 0.0) || !(geometry.d0 > 0.0) {
        return Err(Error::invalid(format!("non-positive distance {d} for {link:?}")));
    }
    Ok(geometry.zeta0 * (d / geometry.d0).powf(-geometry.kappa))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub rng_seed: u64,
    pub realization_index: u64,
}

impl Seed {
    pub fn new(rng_seed: u64, realization_index: u64) -> Self {
        Seed { rng_seed, realization_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(self.realization_index);
        rng
    }
}

fn cscg_vector(rng: &mut ChaCha8Rng, n: usize, variance: f64) -> Vec<Complex64> {
    if variance == 0.0 {
        return vec![Complex64::new(0.0, 0.0); n];
    }
    let normal = Normal::new(0.0, (variance / 2.0).sqrt()).expect("finite std-dev");
    (0..n)
        .map(|_| {
            let re = normal.sample(rng);
            let im = normal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

/// Draws i.i.d. circularly-symmetric complex Gaussian gains for all five links.
pub fn sample_channels(geometry: &Geometry, n_subcarriers: usize, seed: Seed) -> Result<ChannelRealization> {
    geometry.validate()?;
    if n_subcarriers == 0 {
        return Err(Error::invalid("n_subcarriers must be positive"));
    }
    let mut rng = seed.rng();
    let mut draw =
        |link| -> Result<Vec<Complex64>> { Ok(cscg_vector(&mut rng, n_subcarriers, variance_for(link, geometry)?)) };
    let h_j = draw(Link::Sj)?;
    let h_d = draw(Link::Sd)?;
    let h_e = draw(Link::Se)?;
    let g_d = draw(Link::Jd)?;
    let g_e = draw(Link::Je)?;
    ChannelRealization::new(h_j, h_d, h_e, g_d, g_e)
}

/// Writes realizations in the versioned text format described in the module
/// docs.
pub fn write_channels<W: Write>(mut w: W, records: &[(u64, ChannelRealization)]) -> Result<()> {
    let n = records.first().map(|(_, c)| c.len()).unwrap_or(0);
    writeln!(w, "# cj-ofdm channels v{DUMP_VERSION}")?;
    writeln!(w, "# n_subcarriers {n}")?;
    writeln!(w, "# fields index h_j h_d h_e g_d g_e (re im per sub-carrier)")?;
    for (index, ch) in records {
        if ch.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: ch.len() });
        }
        write!(w, "{index}")?;
        for v in [&ch.h_j, &ch.h_d, &ch.h_e, &ch.g_d, &ch.g_e] {
            for z in v.iter() {
                write!(w, " {:?} {:?}", z.re, z.im)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads a dump written by [`write_channels`].
pub fn read_channels<R: BufRead>(r: R) -> Result<Vec<(u64, ChannelRealization)>> {
    let mut lines = r.lines().enumerate();
    let mut header = |expect: &str| -> Result<String> {
        let (i, line) = lines.next().ok_or(Error::ChannelFormat { line: 0, msg: "truncated header".into() })?;
        let line = line?;
        line.strip_prefix(expect)
            .map(|s| s.trim().to_string())
            .ok_or(Error::ChannelFormat { line: i + 1, msg: format!("expected `{expect}`") })
    };
    let version = header("# cj-ofdm channels v")?;
    if version != DUMP_VERSION.to_string() {
        return Err(Error::ChannelFormat { line: 1, msg: format!("unsupported version {version}") });
    }
    let n: usize = header("# n_subcarriers")?
        .parse()
        .map_err(|_| Error::ChannelFormat { line: 2, msg: "bad sub-carrier count".into() })?;
    header("# fields")?;

    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::ChannelFormat { line: i + 1, msg: msg.into() };
        let mut tok = line.split_ascii_whitespace();
        let index: u64 = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("bad index"))?;
        let nums: Vec<f64> =
            tok.map(|t| t.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad("bad number"))?;
        if nums.len() != 10 * n {
            return Err(bad(&format!("expected {} numbers, found {}", 10 * n, nums.len())));
        }
        let vecs: Vec<Vec<Complex64>> =
            nums.chunks_exact(2 * n).map(|c| c.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()).collect();
        let mut it = vecs.into_iter();
        let mut next = || it.next().expect("five vectors");
        let ch = ChannelRealization::new(next(), next(), next(), next(), next())?;
        out.push((index, ch));
    }
    Ok(out)
}
