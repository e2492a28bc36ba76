//! Progressive divide-and-conquer (PDAC) reconstruction of undersampled
//! Cartesian MRI, with a half-quadratic-splitting baseline.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] complex grids and the centered orthonormal 2D FFT
//! * [`sampling`] column masks, budget schedules and mask prediction
//! * [`forward`] single/multi-coil acquisition, coil maps and the phantom
//! * [`denoise`] plug-in priors used inside the iterations
//! * [`solver`] the PDAC iteration and the HQS baseline
//! * [`metrics`] PSNR / SSIM / NMSE and the diagnostic losses
//! * [`io`] binary/text file formats, run configuration and CLI commands

pub mod denoise;
pub mod error;
pub mod forward;
pub mod io;
pub mod metrics;
pub mod numerics;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use numerics::{fft2c, ifft2c, ComplexImage, KSpace};
