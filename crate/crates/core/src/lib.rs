//! Numerics for the ADO-Heston model, a Markovian approximation of rough
//! Heston in which the variance is driven by an adjusted Dobric-Ojeda process.
//!
//! - [`kernels`]: fractional-kernel constants and the vol-of-vol kernel ν(t)
//! - [`charfn`]: Riccati exponents of the characteristic function
//! - [`skew`]: ATM implied skew for vanilla and forward-start options
//! - [`fit`]: power-law regression of skew term structures
//! - [`sim`]: drift ODE and Monte Carlo of the risk-neutral dynamics
//! - [`pricing`]: Black-Scholes and Carr-Madan forward-start pricing
//!
//! Batch evaluations (skew grids, Monte Carlo paths) run on rayon when the
//! `parallel` feature is enabled; see [`par`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charfn;
pub mod error;
pub mod fit;
pub mod kernels;
pub mod par;
pub mod pricing;
pub mod quad;
pub mod sim;
pub mod skew;
pub mod special;

pub use charfn::{CfExponents, ModelParams};
pub use error::{Error, Result};
pub use fit::{ExponentialFit, PowerLawFit, SharedExponentFit};
pub use kernels::HurstParams;
pub use par::Execution;
pub use pricing::{FftGrid, FwdStartSpec};
pub use sim::{PathSet, SimConfig, ZetaMode};
pub use skew::{QuadratureConfig, SkewCurve};
