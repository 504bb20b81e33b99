//! Two-dimensional photoacoustic tomography workbench.
//!
//! Synthesises circular-array sensor data from initial-pressure phantoms,
//! reconstructs images by time reversal (TR), back-projection (BP) and
//! truncated back-projection (TBP), and measures resolution and contrast of
//! the results, including under-sampled sensor arrays and coarse image grids.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the accuracy targets
//! in the documentation refer to.

// `!(x > 0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod analysis;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod phantom;
pub mod reconstruct;
pub mod scalar;
pub mod signal;
pub mod specfun;
pub mod wavesolver;

pub use acquisition::{validate_config, AcquisitionConfig};
pub use error::{Error, Result};
pub use geometry::Point;
pub use grid::{ImageGrid, RoiSpec};
pub use reconstruct::{Method, Reconstruction};
pub use scalar::Real;
pub use signal::{SensorData, SourceSpectrum, Spectrum, Window};
pub use specfun::ComplexValue;

pub type AcquisitionConfig64 = AcquisitionConfig<f64>;
pub type ImageGrid64 = ImageGrid<f64>;
pub type RoiSpec64 = RoiSpec<f64>;
pub type Point64 = Point<f64>;
pub type SensorData64 = SensorData<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type SourceSpectrum64 = SourceSpectrum<f64>;
pub type Reconstruction64 = Reconstruction<f64>;
pub type QualityReport64 = analysis::QualityReport<f64>;

pub type AcquisitionConfig32 = AcquisitionConfig<f32>;
pub type ImageGrid32 = ImageGrid<f32>;
pub type SensorData32 = SensorData<f32>;
