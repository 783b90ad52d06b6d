//! Variable-invariant two-dimensional state space models.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense matrices, matrix exponential, eigenvalues, real DFT, seeded RNG.
//! * [`coupling`]: the permutation-equivariant coupling algebra `αI + β11ᵀ`.
//! * [`ssm`]: continuous/discrete block systems, ZOH discretization, stability and kernels.
//! * [`aggregation`]: permutation-invariant pooling producing the global field ψ.
//! * [`scan`]: the variable-invariant scan, the ordered-scan baseline and selective parameters.
//! * [`branches`]: long/short/spectral branches and gated fusion.
//! * [`sim`]: Watts–Strogatz/VAR(1) simulation, ridge readout, metrics and studies.
//! * [`forecast`]: the three-branch forecasting pipeline used on user data.
//! * [`kv`]: the flat `key = value` text format for systems and configs.

pub mod aggregation;
pub mod branches;
pub mod coupling;
mod error;
pub mod forecast;
pub mod kv;
pub mod numerics;
pub mod scan;
mod series;
pub mod sim;
pub mod ssm;

pub use error::{Error, Result};
pub use numerics::{Matrix, Rng};
pub use series::MultivariateSeries;
