//! Feasibility checks, code construction and verification experiments for
//! transmitting correlated sources over a multiple access channel with side
//! information.
//!
//! * [`probability`]: exact finite joint distributions, kernels, entropies.
//! * [`region`]: achievability inequalities for two and more users, and the
//!   classical special cases built on top of them.
//! * [`rate_distortion`]: binary rate-distortion and side-information searches.
//! * [`gaussian`]: closed forms for the Gaussian MAC.
//! * [`mixture`]: discrete-to-Gaussian mixture mapping and its fit.
//! * [`mc`]: Monte Carlo mutual information for mixture inputs.
//! * [`sim`]: toy-blocklength random-coding simulator.
//! * [`report`]: one-shot reproduction of every reference number.

#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments,
    clippy::large_enum_variant,
    clippy::type_complexity
)]

pub mod error;
pub mod gaussian;
pub mod mc;
pub mod mixture;
pub mod optimize;
pub mod probability;
pub mod rate_distortion;
pub mod region;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
pub use probability::{DiscreteKernel, DistortionMeasure, JointPmf, Variable};
