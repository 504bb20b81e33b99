//! Sampling calculators: image-grid points per wavelength and sensor-count
//! regimes.

use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Full-sampling sensor count of the calibration scene.
pub const CALIBRATION_FULL_COUNT: f64 = 256.0;
/// `R omega_max / c0` of the calibration scene (R = 0.1 m,
/// omega_max = 1.82e7 rad/s, c0 = 1500 m/s).
pub const CALIBRATION_ARGUMENT: f64 = 0.1 * 1.82e7 / 1500.0;

/// Sensor-count sampling regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Under,
    Critical,
    Full,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Under => "under",
            Regime::Critical => "critical",
            Regime::Full => "full",
        })
    }
}

/// Grid points per wavelength, `2 pi c0 / (omega dx)`.
pub fn ppw<T: Real>(pitch: T, omega: T, sound_speed: T) -> Result<T> {
    if !(pitch > T::zero() && omega > T::zero() && sound_speed > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "ppw needs positive inputs, got dx={pitch}, omega={omega}, c0={sound_speed}"
        )));
    }
    Ok(T::TAU() * sound_speed / (omega * pitch))
}

/// Time for a wave to cross an ROI of side `side`, `L / c0`.
pub fn traverse_time<T: Real>(side: T, sound_speed: T) -> T {
    side / sound_speed
}

/// Sensor count regarded as full sampling for `config` at band `omega_max`:
/// 256 for the calibration scene, proportional to `R omega_max / c0`.
pub fn full_sampling_threshold<T: Real>(config: &AcquisitionConfig<T>, omega_max: T) -> T {
    let arg = config.radius * omega_max / config.sound_speed;
    T::lit(CALIBRATION_FULL_COUNT) * arg / T::lit(CALIBRATION_ARGUMENT)
}

/// Regime of `n` sensors against a full-sampling count `n_full`:
/// full from `n_full`, critical from `n_full / 4`, under below.
pub fn classify_with_threshold<T: Real>(n: usize, n_full: T) -> Regime {
    let n = T::from_usize_lossy(n);
    // a relative slack absorbs rounding in the calibration constants
    let slack = T::one() - T::lit(1e-3);
    if n >= n_full * slack {
        Regime::Full
    } else if n >= n_full * T::lit(0.25) * slack {
        Regime::Critical
    } else {
        Regime::Under
    }
}

/// Regime of `n` sensors in the scene of `config` at band `omega_max`.
pub fn classify_sampling<T: Real>(n: usize, config: &AcquisitionConfig<T>, omega_max: T) -> Regime {
    classify_with_threshold(n, full_sampling_threshold(config, omega_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppw_reference_values() {
        assert!((ppw(0.2 / 512.0, 2.73e7, 1500.0_f64).unwrap() - 0.89).abs() < 0.01);
        assert!((ppw(0.1 / 256.0, 1.82e7, 1500.0_f64).unwrap() - 1.32).abs() < 0.01);
        assert!((ppw(0.2 / 2500.0, 2.73e7, 1500.0_f64).unwrap() - 4.32).abs() < 0.03);
        assert!(ppw(0.0, 1.0, 1.0_f64).is_err());
    }

    #[test]
    fn sweep_regimes() {
        let config = AcquisitionConfig::from_band(1500.0_f64, 0.1, 16, 1.2e-4, 1.82e7);
        assert_eq!(classify_sampling(16, &config, 1.82e7), Regime::Under);
        assert_eq!(classify_sampling(64, &config, 1.82e7), Regime::Critical);
        assert_eq!(classify_sampling(256, &config, 1.82e7), Regime::Full);
        assert_eq!(classify_sampling(2560, &config, 1.82e7), Regime::Full);
    }

    #[test]
    fn threshold_scales_with_band() {
        let config = AcquisitionConfig::from_band(1500.0_f64, 0.1, 16, 1.2e-4, 1.82e7);
        let a = full_sampling_threshold(&config, 1.82e7);
        let b = full_sampling_threshold(&config, 3.64e7);
        assert!((b / a - 2.0).abs() < 1e-12);
    }
}
