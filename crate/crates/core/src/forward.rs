//! Analytic forward model: sensor data from an initial-pressure distribution
//! through the free-space Green's function, evaluated bin by bin in the
//! frequency domain.
//!
//! The model is deliberately independent of the grid solver used by
//! time reversal, so reconstructions are never tested against data produced
//! by their own discretisation.

use num_complex::Complex;
use rayon::prelude::*;

use crate::acquisition::{validate_config, AcquisitionConfig};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::ImageGrid;
use crate::scalar::Real;
use crate::signal::{FrequencyAxis, HalfSpectrumSynth, SensorData, SourceSpectrum};
use crate::specfun::{hankel1_0, ComplexValue};

/// Default zero-padding factor of the synthesis transform.
pub const DEFAULT_PAD: usize = 2;

/// Point source of initial pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource<T> {
    pub position: Point<T>,
    pub spectrum: SourceSpectrum<T>,
    /// Scales the whole response; a phantom pixel contributes `p0 * dx^2`.
    pub amplitude: T,
}

impl<T: Real> PointSource<T> {
    pub fn new(position: Point<T>, spectrum: SourceSpectrum<T>) -> Self {
        Self {
            position,
            spectrum,
            amplitude: T::one(),
        }
    }
}

/// Free-space Green's function of the 2D Helmholtz operator,
/// `(i/4) H0^(1)(omega |x - y| / c0)`. Negative frequencies return the
/// conjugate of the value at `|omega|`.
pub fn greens0_hat<T: Real>(x: Point<T>, y: Point<T>, omega: T, sound_speed: T) -> Result<ComplexValue<T>> {
    let r = x.distance(y);
    if r == T::zero() {
        return Err(Error::Singular(format!("Green's function at coincident points ({}, {})", x.x, x.y)));
    }
    if omega == T::zero() || !omega.is_finite() {
        return Err(Error::Domain(format!("Green's function needs finite nonzero omega, got {omega}")));
    }
    let g = greens0_unchecked(omega.abs() * r / sound_speed);
    Ok(if omega < T::zero() { g.conj() } else { g })
}

/// `(i/4) H0^(1)(z)` for `z > 0`.
#[inline]
pub(crate) fn greens0_unchecked<T: Real>(z: T) -> Complex<T> {
    let h = hankel1_0(z);
    Complex::new(-h.im, h.re) * T::lit(0.25)
}

/// Spectrum recorded at `sensor` from a single point source:
/// `g_hat(y, omega) = -i omega F(omega) G0_hat(y, a, omega)` on the retained
/// bins of `axis`. The `omega = 0` bin is zero.
pub fn point_source_spectrum<T: Real>(
    source: &PointSource<T>,
    sensor: Point<T>,
    sound_speed: T,
    axis: &FrequencyAxis<T>,
) -> Result<Vec<Complex<T>>> {
    let r = sensor.distance(source.position);
    if r == T::zero() {
        return Err(Error::Singular("sensor coincides with the source".into()));
    }
    let mut out = vec![Complex::new(T::zero(), T::zero()); axis.n_omega];
    accumulate_pixel(&mut out, axis, &source.spectrum, r / sound_speed, source.amplitude);
    Ok(out)
}

/// Adds `-i omega F(omega) * weight * G0_hat(r, omega)` into `bins`.
fn accumulate_pixel<T: Real>(
    bins: &mut [Complex<T>],
    axis: &FrequencyAxis<T>,
    spectrum: &SourceSpectrum<T>,
    travel_time: T,
    weight: T,
) {
    for (k, bin) in bins.iter_mut().enumerate().skip(1) {
        let w = axis.omega(k);
        let f = spectrum.eval(w);
        if f == T::zero() {
            continue;
        }
        let g = greens0_unchecked(w * travel_time);
        // -i * w * f * weight * g
        let s = w * f * weight;
        *bin = *bin + Complex::new(g.im * s, -g.re * s);
    }
}

/// Time series recorded by every sensor of `config` from one point source.
pub fn simulate_point<T: Real>(source: &PointSource<T>, config: &AcquisitionConfig<T>, pad: usize) -> Result<SensorData<T>> {
    validate_config(config)?;
    if source.position.norm() >= config.radius {
        return Err(Error::Geometry("point source must lie strictly inside the array".into()));
    }
    let axis = FrequencyAxis::for_config(config, pad);
    let n_t = config.n_samples();
    let sensors = config.sensor_positions();
    let traces = sensors
        .par_iter()
        .map_init(
            || HalfSpectrumSynth::new(axis.n_fft),
            |synth, &y| -> Result<Vec<T>> {
                let bins = point_source_spectrum(source, y, config.sound_speed, &axis)?;
                Ok(synth.synthesize(&bins, axis.dt, n_t))
            },
        )
        .collect::<Result<Vec<_>>>()?;
    SensorData::new(config.clone(), traces)
}

/// Sensor data generated by an initial-pressure raster.
///
/// Each nonzero pixel acts as a point source of weight `p0(x) dx^2`:
/// `g_hat(y_n, omega) = -i omega F(omega) sum_x p0(x) G0_hat(y_n, x, omega) dx^2`.
/// Sensors are processed in parallel, each summing pixels in row-major order,
/// so the output does not depend on the worker count.
pub fn forward_project<T: Real>(
    p0: &ImageGrid<T>,
    config: &AcquisitionConfig<T>,
    spectrum: &SourceSpectrum<T>,
    pad: usize,
) -> Result<SensorData<T>> {
    validate_config(config)?;
    if !p0.is_finite() {
        return Err(Error::InvalidArgument("initial pressure contains non-finite values".into()));
    }
    let pixels = p0.nonzero_pixels();
    if let Some((p, _)) = pixels.iter().find(|(p, _)| p.norm() >= config.radius) {
        return Err(Error::Geometry(format!(
            "nonzero pixel at ({}, {}) lies on or outside the array circle",
            p.x, p.y
        )));
    }
    let area = p0.pitch() * p0.pitch();
    let axis = FrequencyAxis::for_config(config, pad);
    let n_t = config.n_samples();
    let c0 = config.sound_speed;
    let sensors = config.sensor_positions();
    let traces: Vec<Vec<T>> = sensors
        .par_iter()
        .map_init(
            || HalfSpectrumSynth::new(axis.n_fft),
            |synth, &y| {
                let mut bins = vec![Complex::new(T::zero(), T::zero()); axis.n_omega];
                for &(x, v) in &pixels {
                    accumulate_pixel(&mut bins, &axis, spectrum, y.distance(x) / c0, v * area);
                }
                synth.synthesize(&bins, axis.dt, n_t)
            },
        )
        .collect();
    SensorData::new(config.clone(), traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RoiSpec;

    #[test]
    fn greens_far_field_magnitude() {
        let c0 = 1500.0_f64;
        let r = 0.01;
        let omega = 20.0 * c0 / r;
        let g = greens0_hat(Point::new(r, 0.0), Point::origin(), omega, c0).unwrap();
        let expected = 0.25 * (2.0 * c0 / (std::f64::consts::PI * omega * r)).sqrt();
        assert!((g.norm() / expected - 1.0).abs() < 0.02);
    }

    #[test]
    fn greens_decays_as_inverse_sqrt() {
        let c0 = 1500.0_f64;
        let omega = 1e7;
        let a = greens0_hat(Point::new(0.01, 0.0), Point::origin(), omega, c0).unwrap();
        let b = greens0_hat(Point::new(0.04, 0.0), Point::origin(), omega, c0).unwrap();
        assert!((a.norm() / b.norm() - 2.0).abs() < 0.01);
    }

    #[test]
    fn greens_singular_and_reality() {
        let p = Point::new(0.1, 0.2);
        assert!(matches!(greens0_hat(p, p, 1.0, 1500.0), Err(Error::Singular(_))));
        let q = Point::new(0.0, 0.0);
        let pos = greens0_hat(p, q, 3e6, 1500.0).unwrap();
        let neg = greens0_hat(p, q, -3e6, 1500.0).unwrap();
        assert_eq!(pos.conj(), neg);
    }

    #[test]
    fn zero_spectrum_gives_zero_data() {
        let config = AcquisitionConfig::from_band(1500.0, 0.02, 4, 2e-5, 5e6);
        let axis = FrequencyAxis::for_config(&config, DEFAULT_PAD);
        let mut src = PointSource::new(Point::new(0.001, 0.0), SourceSpectrum::hann(5e6));
        src.amplitude = 0.0;
        let bins = point_source_spectrum(&src, config.sensor_position(0), 1500.0, &axis).unwrap();
        assert!(bins.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn sensor_on_source_rejected() {
        let config = AcquisitionConfig::from_band(1500.0, 0.02, 4, 2e-5, 5e6);
        let axis = FrequencyAxis::for_config(&config, DEFAULT_PAD);
        let y = config.sensor_position(0);
        let src = PointSource::new(y, SourceSpectrum::hann(5e6));
        assert!(point_source_spectrum(&src, y, 1500.0, &axis).is_err());
    }

    #[test]
    fn zero_phantom_gives_zero_data() {
        let config = AcquisitionConfig::from_band(1500.0, 0.02, 8, 2e-5, 5e6);
        let p0 = ImageGrid::zeros(RoiSpec::centered(0.02, 16));
        let d = forward_project(&p0, &config, &SourceSpectrum::hann(5e6), DEFAULT_PAD).unwrap();
        assert!(d.is_zero());
        assert_eq!(d.samples().len(), 8);
    }

    #[test]
    fn pixel_outside_circle_rejected() {
        let config = AcquisitionConfig::from_band(1500.0, 0.02, 8, 2e-5, 5e6);
        let spec = RoiSpec::centered(0.05, 10);
        let mut p0 = ImageGrid::zeros(spec);
        p0.set(0, 0, 1.0);
        assert!(matches!(
            forward_project(&p0, &config, &SourceSpectrum::hann(5e6), DEFAULT_PAD),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn single_pixel_matches_point_source() {
        let omega_max = 5e6;
        let config = AcquisitionConfig::from_band(1500.0, 0.02, 3, 3e-5, omega_max);
        let spec = RoiSpec::centered(0.02, 20);
        let mut p0 = ImageGrid::zeros(spec);
        p0.set(12, 7, 1.0);
        let f = SourceSpectrum::hann(omega_max);
        let d = forward_project(&p0, &config, &f, DEFAULT_PAD).unwrap();
        let mut src = PointSource::new(spec.position(12, 7), f);
        src.amplitude = spec.pitch() * spec.pitch();
        let e = simulate_point(&src, &config, DEFAULT_PAD).unwrap();
        let diff = d.combine(1.0, &e, -1.0).unwrap().l2_norm();
        assert!(diff <= 1e-12 * e.l2_norm(), "diff {diff}");
    }
}
