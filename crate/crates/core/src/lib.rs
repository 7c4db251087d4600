//! Joint time and power allocation for wireless-powered cooperative jamming
//! in a secure OFDM link.
//!
//! A source splits each block into a wireless-power-transfer slot (fraction
//! `alpha1`) that charges a jammer, and an information slot (fraction
//! `alpha2`) during which the jammer spends the harvested energy jamming an
//! eavesdropper. This crate maximizes the resulting secrecy rate over the
//! time split and the per-sub-carrier powers with three inner solvers:
//!
//! - [`dual`]: Lagrange dual decomposition with ellipsoid updates (globally
//!   optimal up to the duality gap and the jamming-power grid),
//! - [`mm`]: minorization-maximization with closed-form water-filling inner
//!   steps,
//! - [`heuristic`]: a non-iterative successive allocation,
//!
//! wrapped by the one-dimensional time search in [`outer`]. [`oracle`] holds
//! brute-force verifiers and [`experiment`] the Monte-Carlo harness used by the
//! `cjsim` binary.
//!
//! Data-parallel loops (per-sub-carrier subproblems, time-split grids,
//! Monte-Carlo realizations) run on rayon when the default `parallel` feature
//! is enabled and fall back to plain iterators otherwise; see [`par`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dual;
pub mod ellipsoid;
pub mod error;
pub mod experiment;
pub mod heuristic;
pub mod mm;
pub mod model;
pub mod oracle;
pub mod outer;
pub mod par;
pub mod units;

pub use error::{Error, Result};
pub use model::{
    ChannelRealization, Diagnostics, PowerAllocation, ReceiverType, Solution, SolverKind, SubcarrierGains,
    SystemParams, TimeSplit,
};
pub use par::Execution;
