//! Kernel-level theory of the single source/sensor pair, image-quality
//! metrics, and sampling calculators.

pub mod kernel;
pub mod metrics;
pub mod sampling;

pub use kernel::{
    intensity_profile_db, kernel_bp, kernel_bp_reduced, kernel_bp_ring_averaged, kernel_main_lobe, kernel_side_lobe,
    KernelKind, KernelSample, PairConfiguration, REFERENCE_FREQUENCY_HZ,
};
pub use metrics::{
    contrast_metrics, measure_fwhm, measure_fwhm_around, pearson_correlation, predicted_fwhm, profile_side_lobe_db,
    support_peak_position, Contrast, FwhmKind, QualityReport, SIDE_LOBE_FLOOR_DB,
};
pub use sampling::{classify_sampling, full_sampling_threshold, ppw, traverse_time, Regime};
