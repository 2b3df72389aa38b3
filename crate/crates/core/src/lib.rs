//! Denoising toolkit for simulated low-dose CT.
//!
//! The crate covers the whole desk-scale pipeline:
//!
//! * [`tensor`] — dense `channels x height x width` tensors and the
//!   differentiable conv/ReLU/maxpool primitives, with analytic backward
//!   passes.
//! * [`net`] — the 8-layer denoising CNN (construction, forward, backward).
//! * [`weights`] — the PDNW binary weight format shared by all networks.
//! * [`feature`] — the frozen VGG-style feature extractor used by the
//!   perceptual loss (taps `relu1_1`, `relu3_1`, `relu3_4`, plus an
//!   `identity` tap that reduces the perceptual loss to pixel MSE).
//! * [`loss`] — pixel MSE and the feature reconstruction loss, both with
//!   gradients w.r.t. the prediction.
//! * [`ctsim`] — paired low-dose/high-dose data synthesis: Shepp-Logan
//!   phantoms, parallel-beam radon transform, photon-statistics noise and
//!   filtered backprojection.
//! * [`metrics`] — PSNR and SSIM.
//! * [`trainer`] — the two-phase training protocol (MSE pretraining, then
//!   warm-start perceptual fine-tuning against the frozen feature net).
//! * [`reference`] — slow, independent reference implementations and
//!   finite-difference helpers used to verify the fast paths.

pub mod ctsim;
pub mod error;
pub mod feature;
pub mod imgio;
pub mod loss;
pub mod metrics;
pub mod net;
pub mod reference;
pub mod tensor;
pub mod trainer;
pub mod weights;

pub use error::{Error, Result};
pub use tensor::{ConvKernelBank, Scalar, Tensor3};
