//! Dense linear algebra and signal primitives.
//!
//! Everything here is a pure function of its inputs and safe to call from any thread.

mod dft;
mod eigen;
mod expm;
mod matrix;
mod reduce;
mod rng;

pub use dft::{irdft, rdft, ComplexSpectrum, NAIVE_DFT_MAX_LEN};
pub use eigen::{eigenvalues, spectral_radius, Complex};
pub use expm::mat_exp;
pub use matrix::Matrix;
pub use reduce::{canonical_sum, tree_sum};
pub use rng::Rng;
