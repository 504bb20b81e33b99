//! Adjoint reconstructions: back-projection (BP), truncated back-projection
//! (TBP) and time reversal (TR).
//!
//! BP and TBP evaluate, per pixel `x`,
//!
//! ```text
//! I(x) = -(h_N / (2 pi c0)) Re sum_n integral_{|omega| < cutoff}
//!            i omega G0_hat(x, y_n, omega) conj(g_hat(y_n, omega)) d omega
//! ```
//!
//! as a sum over DFT bins with Hermitian doubling. The time-domain route
//! correlates each trace with the band-limited `dG0/dt` and is kept as an
//! independent check of the frequency route.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::greens0_unchecked;
use crate::geometry::Point;
use crate::grid::{ImageGrid, RoiSpec};
use crate::scalar::Real;
use crate::signal::{FrequencyAxis, HalfSpectrumSynth, SensorData, Spectrum};
use crate::wavesolver::{run_time_reversal, SolverSettings};

/// Zero-padding of the data transform used by BP and TBP.
pub const DEFAULT_PAD: usize = 2;

/// Radial table samples per shortest wavelength.
pub const DEFAULT_TABLE_OVERSAMPLE: usize = 24;

/// Largest `pixels * sensors * bins` product evaluated directly in
/// [`KernelEvaluation::Auto`] mode.
pub const AUTO_DIRECT_LIMIT: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tr,
    Bp,
    Tbp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Tr => "tr",
            Method::Bp => "bp",
            Method::Tbp => "tbp",
        }
    }

    pub const ALL: [Method; 3] = [Method::Tr, Method::Bp, Method::Tbp];
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tr" => Ok(Method::Tr),
            "bp" => Ok(Method::Bp),
            "tbp" => Ok(Method::Tbp),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}' (expected tr, bp or tbp)"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the per-pixel Green's function sum is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelEvaluation {
    /// Exact Hankel evaluation for every (pixel, sensor, bin).
    Direct,
    /// Per-sensor radial profile tabulated exactly, then cubic interpolation
    /// in distance. Pixels within two table steps of a sensor fall back to
    /// direct evaluation.
    Tabulated { oversample: usize },
    /// Direct up to [`AUTO_DIRECT_LIMIT`] Hankel evaluations, tabulated
    /// with the default oversampling beyond.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpOptions<T> {
    pub evaluation: KernelEvaluation,
    pub pad: usize,
    /// Raised-cosine roll-off below the TBP cutoff, as a fraction of it.
    /// `None` is the hard cutoff.
    pub taper: Option<T>,
    pub normalize: bool,
}

impl<T: Real> Default for BpOptions<T> {
    fn default() -> Self {
        Self {
            evaluation: KernelEvaluation::default(),
            pad: DEFAULT_PAD,
            taper: None,
            normalize: false,
        }
    }
}

/// A reconstructed image with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T> {
    pub method: Method,
    pub image: ImageGrid<T>,
    /// TBP cutoff (rad/s).
    pub mu: Option<T>,
    /// Divisor applied by normalisation (one when not normalised).
    pub normalization: T,
    /// Pixels zeroed because they coincide with a sensor.
    pub coincident_pixels: usize,
}

/// One reconstruction job.
#[derive(Debug, Clone)]
pub struct ReconstructionRequest<'a, T: Real> {
    pub method: Method,
    pub data: &'a SensorData<T>,
    pub roi: RoiSpec<T>,
    pub mu: Option<T>,
    pub normalize: bool,
    pub bp: BpOptions<T>,
    pub solver: SolverSettings<T>,
}

impl<'a, T: Real> ReconstructionRequest<'a, T> {
    pub fn new(method: Method, data: &'a SensorData<T>, roi: RoiSpec<T>) -> Self {
        Self {
            method,
            data,
            roi,
            mu: None,
            normalize: true,
            bp: BpOptions::default(),
            solver: SolverSettings::default(),
        }
    }

    pub fn with_mu(mut self, mu: T) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn run(&self) -> Result<Reconstruction<T>> {
        let mut bp = self.bp;
        bp.normalize = self.normalize;
        match self.method {
            Method::Bp => reconstruct_bp(self.data, &self.roi, &bp),
            Method::Tbp => {
                let mu = self
                    .mu
                    .ok_or_else(|| Error::InvalidArgument("TBP requires a truncation bound mu".into()))?;
                reconstruct_tbp(self.data, &self.roi, mu, &bp)
            }
            Method::Tr => reconstruct_tr(self.data, &self.roi, &self.solver, self.normalize),
        }
    }
}

/// Recommended TBP bound `mu = 2 pi M / (T_M * PPW)` for an `M`-point ROI
/// traversed in `T_M` seconds, targeting `ppw` points per wavelength.
pub fn recommend_mu<T: Real>(points: usize, traverse_time: T, ppw: T) -> Result<T> {
    if points == 0 || !(traverse_time > T::zero()) || !(ppw > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "recommend_mu needs positive arguments, got M={points}, T_M={traverse_time}, PPW={ppw}"
        )));
    }
    Ok(T::TAU() * T::from_usize_lossy(points) / (traverse_time * ppw))
}

/// Back-projection over the full data band.
pub fn reconstruct_bp<T: Real>(data: &SensorData<T>, roi: &RoiSpec<T>, opts: &BpOptions<T>) -> Result<Reconstruction<T>> {
    let band = data.config().omega_max;
    back_project(data, roi, band, opts, Method::Bp)
}

/// Truncated back-projection: only bins with `omega < mu` contribute.
pub fn reconstruct_tbp<T: Real>(data: &SensorData<T>, roi: &RoiSpec<T>, mu: T, opts: &BpOptions<T>) -> Result<Reconstruction<T>> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("truncation bound must be positive, got {mu}")));
    }
    let band = data.config().omega_max;
    if mu > band * (T::one() + T::lit(1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "truncation bound {mu} exceeds the data band limit {band}"
        )));
    }
    let mut r = back_project(data, roi, mu.min(band), opts, Method::Tbp)?;
    r.mu = Some(mu);
    Ok(r)
}

/// Time reversal through the wave solver.
pub fn reconstruct_tr<T: Real>(data: &SensorData<T>, roi: &RoiSpec<T>, settings: &SolverSettings<T>, normalize: bool) -> Result<Reconstruction<T>> {
    let mut image = run_time_reversal(data, roi, settings)?;
    let normalization = if normalize { image.normalize() } else { T::one() };
    Ok(Reconstruction {
        method: Method::Tr,
        image,
        mu: None,
        normalization,
        coincident_pixels: 0,
    })
}

/// Per-bin coefficients `c_{n,k}` such that the pixel value is
/// `sum_n sum_k Re[c_{n,k} H0(omega_k r_n / c0)]`.
struct BinCoefficients<T> {
    axis: FrequencyAxis<T>,
    /// `coef[n][k]` for `k < bins`.
    coef: Vec<Vec<Complex<T>>>,
    bins: usize,
}

fn bin_coefficients<T: Real>(data: &SensorData<T>, cutoff: T, opts: &BpOptions<T>) -> BinCoefficients<T> {
    let spectrum = Spectrum::from_data(data, opts.pad);
    let axis = spectrum.axis;
    let bins = axis.bins_below(cutoff);
    let config = data.config();
    // -(h_N / (2 pi c0)) * 2 * weight_k * d_omega * i omega_k * (i/4) H0 * conj(g)
    //   = (h_N d_omega / (4 pi c0)) * weight_k * omega_k * H0 * conj(g)
    let lead = config.arc_step() * axis.d_omega / (T::lit(4.0) * T::PI() * config.sound_speed);
    let taper = |w: T| -> T {
        match opts.taper {
            Some(frac) if frac > T::zero() => {
                let start = cutoff * (T::one() - frac);
                if w <= start {
                    T::one()
                } else {
                    let u = (w - start) / (cutoff - start);
                    T::lit(0.5) * (T::one() + (T::PI() * u).cos())
                }
            }
            _ => T::one(),
        }
    };
    let coef = spectrum
        .values
        .iter()
        .map(|row| {
            (0..bins)
                .map(|k| {
                    let w = axis.omega(k);
                    row[k].conj() * (lead * axis.hermitian_weight(k) * w * taper(w))
                })
                .collect()
        })
        .collect();
    BinCoefficients { axis, coef, bins }
}

/// `sum_k Re[c_k H0(omega_k t)]` for travel time `t = r / c0`.
#[inline]
fn radial_value<T: Real>(coef: &[Complex<T>], axis: &FrequencyAxis<T>, travel_time: T) -> T {
    let mut acc = T::zero();
    for (k, c) in coef.iter().enumerate().skip(1) {
        let h = crate::specfun::hankel1_0(axis.omega(k) * travel_time);
        acc = acc + c.re * h.re - c.im * h.im;
    }
    acc
}

fn back_project<T: Real>(data: &SensorData<T>, roi: &RoiSpec<T>, cutoff: T, opts: &BpOptions<T>, method: Method) -> Result<Reconstruction<T>> {
    roi.validate()?;
    let config = data.config();
    let c0 = config.sound_speed;
    let sensors = config.sensor_positions();
    let coincide_tol = roi.pitch() * T::lit(1e-6);
    let m = roi.points;

    let coincident = |x: Point<T>| sensors.iter().any(|&y| x.distance(y) <= coincide_tol);
    let mut coincident_pixels = 0;
    for i in 0..m * m {
        if coincident(roi.position(i / m, i % m)) {
            coincident_pixels += 1;
        }
    }
    if coincident_pixels > 0 {
        log::warn!("{coincident_pixels} ROI pixel(s) coincide with a sensor and were set to zero");
    }

    let mut values = if data.is_zero() {
        vec![T::zero(); m * m]
    } else {
        let bc = bin_coefficients(data, cutoff, opts);
        let evaluation = match opts.evaluation {
            KernelEvaluation::Auto if m * m * sensors.len() * bc.bins <= AUTO_DIRECT_LIMIT => KernelEvaluation::Direct,
            KernelEvaluation::Auto => KernelEvaluation::Tabulated {
                oversample: DEFAULT_TABLE_OVERSAMPLE,
            },
            other => other,
        };
        match evaluation {
            KernelEvaluation::Tabulated { oversample } => tabulated_pixels(roi, &sensors, &bc, c0, coincide_tol, oversample.max(4)),
            _ => direct_pixels(roi, &sensors, &bc, c0, coincide_tol),
        }
    };
    let mut image = ImageGrid::from_values(*roi, std::mem::take(&mut values))?;
    let normalization = if opts.normalize { image.normalize() } else { T::one() };
    Ok(Reconstruction {
        method,
        image,
        mu: None,
        normalization,
        coincident_pixels,
    })
}

fn direct_pixels<T: Real>(roi: &RoiSpec<T>, sensors: &[Point<T>], bc: &BinCoefficients<T>, c0: T, tol: T) -> Vec<T> {
    let m = roi.points;
    (0..m * m)
        .into_par_iter()
        .map(|i| {
            let x = roi.position(i / m, i % m);
            if sensors.iter().any(|&y| x.distance(y) <= tol) {
                return T::zero();
            }
            sensors
                .iter()
                .zip(&bc.coef)
                .fold(T::zero(), |acc, (&y, coef)| acc + radial_value(coef, &bc.axis, x.distance(y) / c0))
        })
        .collect()
}

/// Radial profile of one sensor sampled at `r_j = r0 + j dr`.
struct RadialTable<T> {
    r0: T,
    dr: T,
    values: Vec<T>,
}

impl<T: Real> RadialTable<T> {
    /// Four-point Lagrange interpolation; `None` outside the interior.
    fn eval(&self, r: T) -> Option<T> {
        let s = (r - self.r0) / self.dr;
        let j = s.floor().to_usize()?;
        if j < 1 || j + 2 >= self.values.len() {
            return None;
        }
        let u = s - T::from_usize_lossy(j);
        let (a, b, c, d) = (self.values[j - 1], self.values[j], self.values[j + 1], self.values[j + 2]);
        let one = T::one();
        let two = T::lit(2.0);
        let six = T::lit(6.0);
        Some(
            -a * u * (u - one) * (u - two) / six + b * (u + one) * (u - one) * (u - two) / two
                - c * (u + one) * u * (u - two) / two
                + d * (u + one) * u * (u - one) / six,
        )
    }
}

fn tabulated_pixels<T: Real>(roi: &RoiSpec<T>, sensors: &[Point<T>], bc: &BinCoefficients<T>, c0: T, tol: T, oversample: usize) -> Vec<T> {
    let m = roi.points;
    let top = bc.axis.omega(bc.bins.max(2) - 1);
    let dr = T::TAU() * c0 / (top * T::from_usize_lossy(oversample));
    let mut r_max = T::zero();
    let mut r_min = T::infinity();
    for &y in sensors {
        for &(row, col) in &[(0, 0), (0, m - 1), (m - 1, 0), (m - 1, m - 1)] {
            r_max = r_max.max(roi.position(row, col).distance(y));
        }
        // closest approach of the ROI square to this sensor
        let half = roi.side * T::lit(0.5) + roi.pitch();
        let dx = ((y.x - roi.center.x).abs() - half).max(T::zero());
        let dy = ((y.y - roi.center.y).abs() - half).max(T::zero());
        r_min = r_min.min(dx.hypot(dy));
    }
    let r0 = (r_min - T::lit(2.0) * dr).max(dr);
    let count = ((r_max - r0) / dr).ceil().to_usize().unwrap_or(0) + 4;

    // tables[n][j]: one Hankel row per radius, shared by every sensor
    let columns: Vec<Vec<T>> = (0..count)
        .into_par_iter()
        .map(|j| {
            let t = (r0 + T::from_usize_lossy(j) * dr) / c0;
            let h: Vec<Complex<T>> = (0..bc.bins).map(|k| crate::specfun::hankel1_0(bc.axis.omega(k) * t)).collect();
            bc.coef
                .iter()
                .map(|coef| {
                    coef.iter()
                        .zip(&h)
                        .skip(1)
                        .fold(T::zero(), |acc, (c, h)| acc + c.re * h.re - c.im * h.im)
                })
                .collect()
        })
        .collect();
    let tables: Vec<RadialTable<T>> = (0..sensors.len())
        .map(|n| RadialTable {
            r0,
            dr,
            values: columns.iter().map(|col| col[n]).collect(),
        })
        .collect();

    (0..m * m)
        .into_par_iter()
        .map(|i| {
            let x = roi.position(i / m, i % m);
            let mut acc = T::zero();
            for ((&y, table), coef) in sensors.iter().zip(&tables).zip(&bc.coef) {
                let r = x.distance(y);
                if r <= tol {
                    return T::zero();
                }
                acc = acc + table.eval(r).unwrap_or_else(|| radial_value(coef, &bc.axis, r / c0));
            }
            acc
        })
        .collect()
}

/// Back-projection evaluated in the time domain:
/// `I(x) = (h_N / c0) sum_n sum_j dt * dG0/dt(|x - y_n|, t_j) * g(y_n, t_j)`,
/// where `dG0/dt` is synthesised from `-i omega G0_hat` on the same band as
/// [`reconstruct_bp`]. Costs one inverse transform per (pixel, sensor); meant
/// for small scenes.
pub fn reconstruct_bp_timedomain<T: Real>(data: &SensorData<T>, roi: &RoiSpec<T>, opts: &BpOptions<T>) -> Result<Reconstruction<T>> {
    roi.validate()?;
    let config = data.config();
    let c0 = config.sound_speed;
    let sensors = config.sensor_positions();
    let axis = FrequencyAxis::for_config(config, opts.pad);
    let bins = axis.bins_below(config.omega_max);
    let n_t = data.n_samples();
    let tol = roi.pitch() * T::lit(1e-6);
    let scale = config.arc_step() / c0 * config.dt;
    let m = roi.points;
    let mut coincident_pixels = 0;

    let values: Vec<T> = (0..m * m)
        .into_par_iter()
        .map_init(
            || (HalfSpectrumSynth::new(axis.n_fft), vec![Complex::new(T::zero(), T::zero()); bins]),
            |(synth, kernel), i| {
                let x = roi.position(i / m, i % m);
                if sensors.iter().any(|&y| x.distance(y) <= tol) {
                    return None;
                }
                let mut acc = T::zero();
                for (&y, trace) in sensors.iter().zip(data.samples()) {
                    let t = x.distance(y) / c0;
                    for (k, slot) in kernel.iter_mut().enumerate() {
                        *slot = if k == 0 {
                            Complex::new(T::zero(), T::zero())
                        } else {
                            let w = axis.omega(k);
                            let g = greens0_unchecked(w * t);
                            // -i omega G0_hat
                            Complex::new(g.im * w, -g.re * w)
                        };
                    }
                    let dg = synth.synthesize(kernel, axis.dt, n_t);
                    acc = acc + dg.iter().zip(trace).fold(T::zero(), |a, (&k, &g)| a + k * g);
                }
                Some(acc * scale)
            },
        )
        .collect::<Vec<Option<T>>>()
        .into_iter()
        .map(|v| {
            v.unwrap_or_else(|| {
                coincident_pixels += 1;
                T::zero()
            })
        })
        .collect();

    let mut image = ImageGrid::from_values(*roi, values)?;
    let normalization = if opts.normalize { image.normalize() } else { T::one() };
    Ok(Reconstruction {
        method: Method::Bp,
        image,
        mu: None,
        normalization,
        coincident_pixels,
    })
}
