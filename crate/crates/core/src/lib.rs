//! Critical-threshold analysis for one-dimensional pressureless Euler-Poisson
//! dynamics with constant and variable background states.
//!
//! The crate builds the sub/super-critical threshold curves of the reduced
//! phase-plane system, simulates that system with blow-up detection, verifies
//! the comparison principles and breakdown-time bounds numerically, solves the
//! constant-background system along characteristics, and evaluates the
//! cold-ion (Maxwell-Boltzmann) global-regularity criterion.

pub mod attractive;
pub mod background;
pub mod characteristics;
pub mod cli;
pub mod coldion;
pub mod error;
pub mod odeint;
pub mod params;
pub mod phaseplane;
pub mod quad;
pub mod thresholds;

pub use background::BackgroundSpec;
pub use error::{CtError, Result};
pub use params::{
    validate_params, CaseTag, ForceSign, Params, PhasePoint, Verdict, VerdictLabel,
};
