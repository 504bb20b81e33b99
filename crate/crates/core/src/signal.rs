//! Sensor time series, their spectra, and the source spectrum `F(omega)`.
//!
//! Fourier convention: `f_hat(omega) = integral f(t) exp(+i omega t) dt`,
//! discretised as `dt * sum_j f_j exp(+i omega_k t_j)` with
//! `omega_k = 2 pi k / (n dt)`.

use num_complex::Complex;
use realfft::RealFftPlanner;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape of the band-limited source spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Window {
    /// `0.5 (1 + cos(pi omega / omega_max))`.
    #[default]
    Hann,
    /// Flat pass band.
    Rectangular,
    /// `exp(-(omega - center)^2 / (2 width^2))`, both fractions of `omega_max`,
    /// truncated at the band limit.
    Gaussian { center: f64, width: f64 },
}

/// Real, even, band-limited source spectrum `F(omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpectrum<T> {
    pub omega_max: T,
    #[serde(default)]
    pub window: Window,
}

impl<T: Real> SourceSpectrum<T> {
    pub fn hann(omega_max: T) -> Self {
        Self {
            omega_max,
            window: Window::Hann,
        }
    }

    pub fn new(omega_max: T, window: Window) -> Self {
        Self { omega_max, window }
    }

    /// `F(omega)`; even in `omega` and zero beyond the band limit.
    pub fn eval(&self, omega: T) -> T {
        let w = omega.abs();
        if w > self.omega_max {
            return T::zero();
        }
        let u = w / self.omega_max;
        match self.window {
            Window::Hann => T::lit(0.5) * (T::one() + (T::PI() * u).cos()),
            Window::Rectangular => T::one(),
            Window::Gaussian { center, width } => {
                let d = (u - T::lit(center)) / T::lit(width);
                (-T::lit(0.5) * d * d).exp()
            }
        }
    }

    fn weighted_mean(&self, power: i32) -> T {
        // composite Simpson on [0, omega_max]
        let n = 4096;
        let h = self.omega_max / T::from_usize_lossy(n);
        let mut num = T::zero();
        let mut den = T::zero();
        for i in 0..=n {
            let w = T::from_usize_lossy(i) * h;
            let coef = if i == 0 || i == n {
                T::one()
            } else if i % 2 == 1 {
                T::lit(4.0)
            } else {
                T::lit(2.0)
            };
            let f = self.eval(w) * w.powi(power);
            num = num + coef * w * f;
            den = den + coef * f;
        }
        num / den
    }

    /// Amplitude-weighted mean of `|omega|` under `F` alone.
    pub fn mean_frequency(&self) -> T {
        self.weighted_mean(0)
    }

    /// Angular centre frequency `omega_c` of the point response.
    ///
    /// The axial back-projection pattern integrates `F(omega)` against a
    /// kernel whose amplitude grows linearly in `omega`, so the centre is the
    /// mean of `|omega|` weighted by `omega F(omega)`.
    pub fn center_frequency(&self) -> T {
        self.weighted_mean(1)
    }

    /// `lambda_c = 2 pi c0 / omega_c`.
    pub fn center_wavelength(&self, sound_speed: T) -> T {
        T::TAU() * sound_speed / self.center_frequency()
    }
}

/// Per-sensor real time series `g(y_n, k dt)`, `k = 0..n_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorData<T> {
    config: AcquisitionConfig<T>,
    samples: Vec<Vec<T>>,
}

impl<T: Real> SensorData<T> {
    pub fn new(config: AcquisitionConfig<T>, samples: Vec<Vec<T>>) -> Result<Self> {
        let n_t = config.n_samples();
        if samples.len() != config.sensor_count {
            return Err(Error::ShapeMismatch(format!(
                "{} traces for {} sensors",
                samples.len(),
                config.sensor_count
            )));
        }
        if let Some((i, row)) = samples.iter().enumerate().find(|(_, r)| r.len() != n_t) {
            return Err(Error::ShapeMismatch(format!(
                "trace {i} has {} samples, expected {n_t}",
                row.len()
            )));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sensor data contains non-finite samples".into()));
        }
        Ok(Self { config, samples })
    }

    pub fn zeros(config: AcquisitionConfig<T>) -> Self {
        let n_t = config.n_samples();
        Self {
            samples: vec![vec![T::zero(); n_t]; config.sensor_count],
            config,
        }
    }

    pub fn config(&self) -> &AcquisitionConfig<T> {
        &self.config
    }

    pub fn samples(&self) -> &[Vec<T>] {
        &self.samples
    }

    pub fn trace(&self, n: usize) -> &[T] {
        &self.samples[n]
    }

    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().flatten().all(|v| *v == T::zero())
    }

    /// `alpha * self + beta * other`, for linearity checks.
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if self.samples.len() != other.samples.len() || self.n_samples() != other.n_samples() {
            return Err(Error::ShapeMismatch("sensor data shapes differ".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| alpha * x + beta * y).collect())
            .collect();
        Ok(Self {
            config: self.config.clone(),
            samples,
        })
    }

    pub fn l2_norm(&self) -> T {
        self.samples.iter().flatten().fold(T::zero(), |a, &v| a + v * v).sqrt()
    }
}

/// Discrete angular-frequency axis of a zero-padded DFT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyAxis<T> {
    pub dt: T,
    /// Transform length (even).
    pub n_fft: usize,
    /// Retained non-negative bins, `omega_k < band`.
    pub n_omega: usize,
    pub d_omega: T,
}

impl<T: Real> FrequencyAxis<T> {
    /// Axis for `n_t` samples zero-padded by `pad` (at least 1), keeping bins
    /// strictly below `band`.
    pub fn new(dt: T, n_t: usize, pad: usize, band: T) -> Self {
        let mut n_fft = n_t.max(2) * pad.max(1);
        n_fft += n_fft % 2;
        let d_omega = T::TAU() / (T::from_usize_lossy(n_fft) * dt);
        let half = n_fft / 2;
        let mut n_omega = 0;
        while n_omega < half && T::from_usize_lossy(n_omega) * d_omega < band {
            n_omega += 1;
        }
        Self {
            dt,
            n_fft,
            n_omega,
            d_omega,
        }
    }

    pub fn for_config(config: &AcquisitionConfig<T>, pad: usize) -> Self {
        Self::new(config.dt, config.n_samples(), pad, config.omega_max)
    }

    pub fn omega(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.d_omega
    }

    /// Highest retained angular frequency, `(n_omega - 1) d_omega`.
    pub fn omega_max(&self) -> T {
        self.omega(self.n_omega.saturating_sub(1))
    }

    /// Number of retained bins strictly below `cutoff`.
    pub fn bins_below(&self, cutoff: T) -> usize {
        (0..self.n_omega).take_while(|&k| self.omega(k) < cutoff).count()
    }

    /// Weight of bin `k` in `sum over all DFT bins = sum_k weight_k * 2 Re(...)`
    /// for Hermitian integrands.
    pub fn hermitian_weight(&self, k: usize) -> T {
        if k == 0 || 2 * k == self.n_fft {
            T::lit(0.5)
        } else {
            T::one()
        }
    }
}

/// Non-negative-frequency half of the spectra of all traces.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub axis: FrequencyAxis<T>,
    /// `values[n][k]`, `k < axis.n_omega`.
    pub values: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Spectrum<T> {
    pub fn from_data(data: &SensorData<T>, pad: usize) -> Self {
        let axis = FrequencyAxis::for_config(data.config(), pad);
        let mut planner = RealFftPlanner::<T>::new();
        let r2c = planner.plan_fft_forward(axis.n_fft);
        let mut input = r2c.make_input_vec();
        let mut output = r2c.make_output_vec();
        let values = data
            .samples()
            .iter()
            .map(|trace| {
                input.iter_mut().for_each(|v| *v = T::zero());
                input[..trace.len()].copy_from_slice(trace);
                r2c.process(&mut input, &mut output).expect("fft buffer sizes");
                output[..axis.n_omega].iter().map(|c| c.conj() * axis.dt).collect()
            })
            .collect();
        Self { axis, values }
    }

    /// Real time series of length `n_t` from the retained bins (all other
    /// bins zero).
    pub fn to_time(&self, n_t: usize) -> Vec<Vec<T>> {
        let mut synth = HalfSpectrumSynth::new(self.axis.n_fft);
        self.values
            .iter()
            .map(|row| synth.synthesize(row, self.axis.dt, n_t))
            .collect()
    }
}

/// Inverse transform of a Hermitian spectrum given by its non-negative half.
pub(crate) struct HalfSpectrumSynth<T: Real> {
    c2r: std::sync::Arc<dyn realfft::ComplexToReal<T>>,
    half: Vec<Complex<T>>,
    out: Vec<T>,
}

impl<T: Real> HalfSpectrumSynth<T> {
    pub(crate) fn new(n_fft: usize) -> Self {
        let mut planner = RealFftPlanner::<T>::new();
        let c2r = planner.plan_fft_inverse(n_fft);
        let half = c2r.make_input_vec();
        let out = c2r.make_output_vec();
        Self { c2r, half, out }
    }

    /// `f_j = (1 / (n dt)) sum_k F_k exp(-i omega_k t_j)` over the Hermitian
    /// extension of `bins`, truncated to `n_t` samples.
    pub(crate) fn synthesize(&mut self, bins: &[Complex<T>], dt: T, n_t: usize) -> Vec<T> {
        let n_fft = self.out.len();
        self.half.iter_mut().for_each(|c| *c = Complex::new(T::zero(), T::zero()));
        for (dst, src) in self.half.iter_mut().zip(bins) {
            *dst = src.conj();
        }
        self.half[0].im = T::zero();
        if let Some(last) = self.half.last_mut() {
            last.im = T::zero();
        }
        self.c2r.process(&mut self.half, &mut self.out).expect("fft buffer sizes");
        let scale = (T::from_usize_lossy(n_fft) * dt).recip();
        self.out[..n_t.min(n_fft)].iter().map(|&v| v * scale).collect()
    }
}

/// Forward transform of an unpadded signal: bin `k` holds
/// `dt * sum_j s_j exp(+i omega_k t_j)`, all `n` bins (negative frequencies
/// in the upper half).
pub fn dft_forward<T: Real>(signal: &[T], dt: T) -> Result<Vec<Complex<T>>> {
    if signal.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "transform needs at least 2 samples, got {}",
            signal.len()
        )));
    }
    let mut buf: Vec<Complex<T>> = signal.iter().map(|&v| Complex::new(v, T::zero())).collect();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf.iter_mut().for_each(|c| *c = *c * dt);
    Ok(buf)
}

/// Inverse of [`dft_forward`].
pub fn dft_inverse<T: Real>(spectrum: &[Complex<T>], dt: T) -> Result<Vec<Complex<T>>> {
    if spectrum.len() < 2 {
        return Err(Error::InvalidArgument("inverse transform needs at least 2 bins".into()));
    }
    let mut buf = spectrum.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let scale = (T::from_usize_lossy(buf.len()) * dt).recip();
    buf.iter_mut().for_each(|c| *c = *c * scale);
    Ok(buf)
}

/// Band-limited interpolation by an integer `factor`: returns
/// `(n - 1) * factor + 1` samples at spacing `dt / factor`. The signal is
/// zero-padded to twice its length first so that wrap-around stays small.
pub fn upsample_band_limited<T: Real>(signal: &[T], factor: usize) -> Vec<T> {
    if factor <= 1 || signal.len() < 2 {
        return signal.to_vec();
    }
    let n = signal.len();
    let mut n_fft = 2 * n;
    n_fft += n_fft % 2;
    let mut planner = RealFftPlanner::<T>::new();
    let r2c = planner.plan_fft_forward(n_fft);
    let c2r = planner.plan_fft_inverse(n_fft * factor);
    let mut input = r2c.make_input_vec();
    input[..n].copy_from_slice(signal);
    let mut spec = r2c.make_output_vec();
    r2c.process(&mut input, &mut spec).expect("fft buffer sizes");
    // the original Nyquist bin is split evenly between +/- frequencies
    let last = spec.len() - 1;
    spec[last] = spec[last] * T::lit(0.5);
    let mut wide = c2r.make_input_vec();
    wide[..spec.len()].copy_from_slice(&spec);
    let mut out = c2r.make_output_vec();
    c2r.process(&mut wide, &mut out).expect("fft buffer sizes");
    let scale = T::from_usize_lossy(n_fft).recip();
    out.truncate((n - 1) * factor + 1);
    out.iter_mut().for_each(|v| *v = *v * scale);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Direct O(n^2) summation of the forward convention.
    fn direct_dft(s: &[f64], dt: f64) -> Vec<Complex<f64>> {
        let n = s.len();
        (0..n)
            .map(|k| {
                let w = 2.0 * PI * k as f64 / (n as f64 * dt);
                s.iter()
                    .enumerate()
                    .map(|(j, &v)| Complex::from_polar(v * dt, w * j as f64 * dt))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn dc_signal() {
        let dt = 0.01_f64;
        let s = vec![1.0; 100];
        let f = dft_forward(&s, dt).unwrap();
        assert!((f[0].re - 1.0).abs() < 1e-12, "{}", f[0]);
        assert!(f[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn cosine_at_bin_center() {
        let dt = 1e-3;
        let n = 64;
        let bin = 5;
        let w0 = 2.0 * PI * bin as f64 / (n as f64 * dt);
        let s: Vec<f64> = (0..n).map(|j| (w0 * j as f64 * dt).cos()).collect();
        let fast = dft_forward(&s, dt).unwrap();
        let slow = direct_dft(&s, dt);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        let t = n as f64 * dt;
        assert!((fast[bin].re - t / 2.0).abs() < 1e-12);
        assert!((fast[n - bin].re - t / 2.0).abs() < 1e-12);
    }

    #[test]
    fn sign_convention_is_plus() {
        let dt = 0.5;
        let s = [0.0, 1.0, 0.0, 0.0];
        let f = dft_forward(&s, dt).unwrap();
        // exp(+i omega_1 dt) with omega_1 dt = pi/2
        assert!((f[1] - Complex::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let s: Vec<f64> = (0..37).map(|j| ((j * j) as f64 * 0.37).sin()).collect();
        let back = dft_inverse(&dft_forward(&s, 0.3).unwrap(), 0.3).unwrap();
        let err: f64 = s.iter().zip(&back).map(|(a, b)| (a - b.re).powi(2) + b.im.powi(2)).sum::<f64>().sqrt();
        let norm: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err / norm < 1e-10);
    }

    #[test]
    fn empty_signal_rejected() {
        assert!(dft_forward::<f64>(&[], 1.0).is_err());
        assert!(dft_forward(&[1.0], 1.0).is_err());
    }

    #[test]
    fn half_spectrum_matches_full() {
        let config = AcquisitionConfig::new(1500.0, 0.1, 1, 63e-3, 1e-3);
        let s: Vec<f64> = (0..64).map(|j| (-((j as f64 - 20.0) / 3.0).powi(2)).exp()).collect();
        let data = SensorData::new(config.clone(), vec![s.clone()]).unwrap();
        let spec = Spectrum::from_data(&data, 1);
        let full = dft_forward(&s, 1e-3).unwrap();
        for (a, b) in spec.values[0].iter().zip(&full).take(spec.axis.n_omega) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn hann_spectrum_properties() {
        let f = SourceSpectrum::hann(10.0_f64);
        assert_eq!(f.eval(0.0), 1.0);
        assert!(f.eval(10.0).abs() < 1e-15);
        assert_eq!(f.eval(11.0), 0.0);
        assert_eq!(f.eval(3.0), f.eval(-3.0));
        // closed forms: mean = W (1/4 - 1/pi^2) / (1/2)
        let mean = 10.0 * (0.25 - 1.0 / (PI * PI)) / 0.5;
        assert!((f.mean_frequency() - mean).abs() < 1e-6);
        assert!(f.center_frequency() > f.mean_frequency());
    }

    #[test]
    fn upsampling_reproduces_band_limited_signal() {
        let dt = 1.0;
        let w = 0.3;
        let s: Vec<f64> = (0..200).map(|j| (w * j as f64).sin() * (-(j as f64 - 100.0).powi(2) / 800.0).exp()).collect();
        let up = upsample_band_limited(&s, 3);
        assert_eq!(up.len(), 199 * 3 + 1);
        for (j, v) in up.iter().enumerate().skip(60).take(400) {
            let t = j as f64 * dt / 3.0;
            let exact = (w * t).sin() * (-(t - 100.0).powi(2) / 800.0).exp();
            assert!((v - exact).abs() < 1e-6, "sample {j}: {v} vs {exact}");
        }
    }
}
