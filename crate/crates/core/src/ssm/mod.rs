//! Continuous and discrete block systems.
//!
//! Per variable the state is `h = (h_h, h_v)` with continuous dynamics
//!
//! ```text
//! d/dt [h_h]   [A_h   0 ] [h_h]   [A_hψ  B_h] [ψ]
//!      [h_v] = [A_vh A_v] [h_v] + [A_vψ  B_v] [x]
//! ```
//!
//! and readout `y = C_h h_h + C_v h_v` (no feedthrough).

mod kernels;
mod stability;
mod system;
mod zoh;

pub use kernels::{convolution_kernels, convolve, ConvolutionKernels};
pub use stability::{certify_stability, StabilityReport};
pub use system::{ContinuousSystem, SystemDims};
pub use zoh::{discretize_zoh, DiscreteSystem};
