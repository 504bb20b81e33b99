//! Physical scene: homogeneous medium, circular array of point-like sensors,
//! and the sampled time axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Real;

/// Soft-tissue sound speed used when a scene does not specify one (m/s).
pub const DEFAULT_SOUND_SPEED: f64 = 1500.0;

/// Acquisition geometry and time axis.
///
/// Sensors sit at `R (cos theta_n, sin theta_n)` with
/// `theta_n = start_angle + 2 pi n / N`, `n = 0..N`. The default start angle is
/// zero; it exists so that a single sensor can be placed anywhere on the
/// circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig<T> {
    /// Sound speed `c0` (m/s).
    pub sound_speed: T,
    /// Array radius `R` (m).
    pub radius: T,
    /// Sensor count `N`.
    pub sensor_count: usize,
    /// Record length `T` (s).
    pub duration: T,
    /// Sampling interval (s).
    pub dt: T,
    /// Band limit of the data, `omega_max` (rad/s).
    pub omega_max: T,
    /// Angle of the first sensor (rad).
    #[serde(default)]
    pub start_angle: T,
}

impl<T: Real> AcquisitionConfig<T> {
    /// Scene with an explicit time step; the band limit is taken as half of
    /// the Nyquist frequency, `0.5 pi / dt`.
    pub fn new(sound_speed: T, radius: T, sensor_count: usize, duration: T, dt: T) -> Self {
        Self {
            sound_speed,
            radius,
            sensor_count,
            duration,
            dt,
            omega_max: T::lit(0.5) * T::PI() / dt,
            start_angle: T::zero(),
        }
    }

    /// Scene defined by its band limit; the time step oversamples Nyquist by 2,
    /// `dt = 0.5 pi / omega_max`.
    pub fn from_band(sound_speed: T, radius: T, sensor_count: usize, duration: T, omega_max: T) -> Self {
        Self {
            sound_speed,
            radius,
            sensor_count,
            duration,
            dt: T::lit(0.5) * T::PI() / omega_max,
            omega_max,
            start_angle: T::zero(),
        }
    }

    pub fn with_start_angle(mut self, angle: T) -> Self {
        self.start_angle = angle;
        self
    }

    pub fn with_sensor_count(mut self, n: usize) -> Self {
        self.sensor_count = n;
        self
    }

    /// `n_t = round(T / dt) + 1`.
    pub fn n_samples(&self) -> usize {
        (self.duration / self.dt).round().to_usize().unwrap_or(0) + 1
    }

    pub fn sample_time(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.dt
    }

    /// Arc step `h_N = 2 pi R / N`.
    pub fn arc_step(&self) -> T {
        T::TAU() * self.radius / T::from_usize_lossy(self.sensor_count.max(1))
    }

    pub fn sensor_angle(&self, n: usize) -> T {
        self.start_angle + T::TAU() * T::from_usize_lossy(n) / T::from_usize_lossy(self.sensor_count)
    }

    pub fn sensor_position(&self, n: usize) -> Point<T> {
        Point::polar(self.radius, self.sensor_angle(n))
    }

    pub fn sensor_positions(&self) -> Vec<Point<T>> {
        (0..self.sensor_count).map(|n| self.sensor_position(n)).collect()
    }

    /// Every violated invariant, in a stable order. Empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(self.sound_speed) {
            out.push(format!("sound speed must be positive, got {}", self.sound_speed));
        }
        if !positive(self.radius) {
            out.push(format!("array radius must be positive, got {}", self.radius));
        }
        if self.sensor_count == 0 {
            out.push("sensor count must be at least 1".to_string());
        }
        if !positive(self.duration) {
            out.push(format!("record length must be positive, got {}", self.duration));
        }
        if !positive(self.dt) {
            out.push(format!("time step must be positive, got {}", self.dt));
        } else if self.duration.is_finite() && self.dt > self.duration {
            out.push(format!("time step {} exceeds record length {}", self.dt, self.duration));
        }
        if !positive(self.omega_max) {
            out.push(format!("band limit must be positive, got {}", self.omega_max));
        } else if positive(self.dt) && self.omega_max > T::PI() / self.dt * (T::one() + T::lit(1e-12)) {
            out.push(format!(
                "band limit {} exceeds the Nyquist frequency {}",
                self.omega_max,
                T::PI() / self.dt
            ));
        }
        if !self.start_angle.is_finite() {
            out.push("start angle must be finite".to_string());
        }
        out
    }
}

/// `Ok` iff every invariant of the configuration holds; otherwise the full
/// list of violations.
pub fn validate_config<T: Real>(config: &AcquisitionConfig<T>) -> Result<()> {
    let v = config.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> AcquisitionConfig<f64> {
        AcquisitionConfig::new(1500.0, 0.1, 16, 1.33e-4, 1e-7)
    }

    #[test]
    fn reference_scene_is_valid() {
        assert!(validate_config(&scene()).is_ok());
        assert_eq!(scene().n_samples(), 1331);
    }

    #[test]
    fn zero_sensors_rejected() {
        let err = validate_config(&scene().with_sensor_count(0)).unwrap_err();
        assert!(err.to_string().contains("sensor count"));
    }

    #[test]
    fn oversized_time_step_rejected() {
        let mut c = scene();
        c.dt = 2e-4;
        c.omega_max = 1.0;
        let err = validate_config(&c).unwrap_err();
        assert!(err.to_string().contains("time step"));
    }

    #[test]
    fn all_violations_reported() {
        let mut c = scene();
        c.sound_speed = -1.0;
        c.radius = 0.0;
        c.sensor_count = 0;
        match validate_config(&c) {
            Err(Error::InvalidConfig(v)) => assert_eq!(v.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn band_above_nyquist_rejected() {
        let mut c = scene();
        c.omega_max = 4.0 / c.dt;
        assert!(validate_config(&c).is_err());
    }

    #[test]
    fn sensors_on_circle_and_arc_step() {
        let c = AcquisitionConfig::from_band(1500.0_f64, 0.1, 256, 1e-4, 1.82e7);
        for p in c.sensor_positions() {
            assert!((p.norm() - c.radius).abs() <= 1e-12 * c.radius);
        }
        let total = c.arc_step() * c.sensor_count as f64;
        assert!((total - std::f64::consts::TAU * c.radius).abs() <= 1e-12 * total);
    }

    #[test]
    fn start_angle_places_single_sensor() {
        let c = AcquisitionConfig::from_band(1500.0, 0.1, 1, 1e-4, 1e7).with_start_angle(std::f64::consts::PI);
        let p = c.sensor_position(0);
        assert!((p.x + 0.1).abs() < 1e-15 && p.y.abs() < 1e-15);
    }
}
