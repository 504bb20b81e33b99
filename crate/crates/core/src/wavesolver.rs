//! Two-dimensional k-space pseudospectral solver for the homogeneous wave
//! equation, and time-reversal reconstruction built on it.
//!
//! Each step applies the exact-dispersion two-level recurrence
//! `P^{n+1}(k) = 2 cos(c0 |k| dt) P^n(k) - P^{n-1}(k)` on a periodic grid,
//! followed by a cosine-tapered sponge in the outer `pad` nodes.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{bilinear, ImageGrid, RoiSpec};
use crate::scalar::Real;
use crate::signal::{upsample_band_limited, SensorData};

/// Sponge thickness in nodes.
pub const DEFAULT_PAD: usize = 20;

/// Largest Courant number `c0 dt / dx` the solver will use.
pub const DEFAULT_CFL: f64 = 0.3;

/// Peak damping rate of the sponge, per unit of `c0 dt / dx`.
const SPONGE_STRENGTH: f64 = 0.5;

/// How sensor samples are imposed on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Injection {
    /// Overwrite the nearest node.
    #[default]
    NearestNode,
    /// Blend into the four surrounding nodes with bilinear weights.
    Bilinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSettings {
    pub dir: PathBuf,
    pub every: usize,
}

/// Discretisation choices for time reversal.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings<T> {
    /// Grid points per wavelength at the data band limit.
    pub points_per_wavelength: T,
    pub pad: usize,
    pub cfl: T,
    pub injection: Injection,
    /// Explicit solver step; must divide the data step. `None` picks the
    /// largest divisor allowed by `cfl`.
    pub dt: Option<T>,
    pub snapshots: Option<SnapshotSettings>,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            points_per_wavelength: T::lit(2.0),
            pad: DEFAULT_PAD,
            cfl: T::lit(DEFAULT_CFL),
            injection: Injection::NearestNode,
            dt: None,
            snapshots: None,
        }
    }
}

/// 2D real FFT with a transposed half-spectrum layout: `(n/2 + 1) x n`,
/// rows indexed by `kx`, columns by `ky`.
struct Fft2d<T: Real> {
    n: usize,
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
    rows: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> Fft2d<T> {
    fn new(n: usize) -> Self {
        let mut rp = RealFftPlanner::<T>::new();
        let mut cp = FftPlanner::<T>::new();
        let h = n / 2 + 1;
        let col_fwd = cp.plan_fft_forward(n);
        let col_inv = cp.plan_fft_inverse(n);
        let scratch_len = col_fwd.get_inplace_scratch_len().max(col_inv.get_inplace_scratch_len());
        Self {
            n,
            r2c: rp.plan_fft_forward(n),
            c2r: rp.plan_fft_inverse(n),
            col_fwd,
            col_inv,
            rows: vec![Complex::default(); n * h],
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    fn half(&self) -> usize {
        self.n / 2 + 1
    }

    /// `field` (n x n, row-major) to `out` ((n/2+1) x n), unnormalised.
    fn forward(&mut self, field: &mut [T], out: &mut [Complex<T>]) {
        let (n, h) = (self.n, self.half());
        for (src, dst) in field.chunks_exact_mut(n).zip(self.rows.chunks_exact_mut(h)) {
            self.r2c.process(src, dst).expect("fft buffer sizes");
        }
        transpose(&self.rows, out, n, h);
        self.col_fwd.process_with_scratch(out, &mut self.scratch);
    }

    /// Inverse of [`Self::forward`] without the `1 / n^2` factor. Consumes `spec`.
    fn inverse(&mut self, spec: &mut [Complex<T>], field: &mut [T]) {
        let (n, h) = (self.n, self.half());
        self.col_inv.process_with_scratch(spec, &mut self.scratch);
        transpose(spec, &mut self.rows, h, n);
        for (src, dst) in self.rows.chunks_exact_mut(h).zip(field.chunks_exact_mut(n)) {
            src[0].im = T::zero();
            src[h - 1].im = T::zero();
            self.c2r.process(src, dst).expect("fft buffer sizes");
        }
    }
}

/// Blocked transpose of a row-major `rows x cols` array.
fn transpose<C: Copy>(src: &[C], dst: &mut [C], rows: usize, cols: usize) {
    const B: usize = 32;
    for rb in (0..rows).step_by(B) {
        for cb in (0..cols).step_by(B) {
            for r in rb..(rb + B).min(rows) {
                for c in cb..(cb + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Square periodic grid holding two time levels of the pressure field.
pub struct SolverGrid<T: Real> {
    n: usize,
    pitch: T,
    pad: usize,
    dt: T,
    sound_speed: T,
    p: Vec<T>,
    p_prev: Vec<T>,
    work: Vec<T>,
    spec: Vec<Complex<T>>,
    /// `cos(c0 |k| dt)` in the transposed half-spectrum layout.
    cos_table: Vec<T>,
    damping: Option<Vec<T>>,
    fft: Fft2d<T>,
    steps: usize,
}

impl<T: Real> SolverGrid<T> {
    /// `n` must be even. `pad = 0` disables the sponge (fully periodic).
    pub fn new(n: usize, pitch: T, pad: usize, dt: T, sound_speed: T) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("solver grid size must be even and >= 4, got {n}")));
        }
        if !(pitch > T::zero() && dt > T::zero() && sound_speed > T::zero()) {
            return Err(Error::InvalidArgument("solver pitch, dt and sound speed must be positive".into()));
        }
        if 2 * pad >= n {
            return Err(Error::InvalidArgument(format!("sponge of {pad} nodes does not fit a {n}-node grid")));
        }
        let h = n / 2 + 1;
        let dk = T::TAU() / (T::from_usize_lossy(n) * pitch);
        let wavenumber = |i: usize| {
            let s = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            T::lit(s) * dk
        };
        let mut cos_table = Vec::with_capacity(h * n);
        for kx in 0..h {
            let wx = wavenumber(kx);
            for ky in 0..n {
                let wy = wavenumber(ky);
                cos_table.push((sound_speed * wx.hypot(wy) * dt).cos());
            }
        }
        let damping = (pad > 0).then(|| sponge_profile(n, pad, sound_speed * dt / pitch));
        Ok(Self {
            n,
            pitch,
            pad,
            dt,
            sound_speed,
            p: vec![T::zero(); n * n],
            p_prev: vec![T::zero(); n * n],
            work: vec![T::zero(); n * n],
            spec: vec![Complex::default(); h * n],
            cos_table,
            damping,
            fft: Fft2d::new(n),
            steps: 0,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn pitch(&self) -> T {
        self.pitch
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn field(&self) -> &[T] {
        &self.p
    }

    pub fn previous_field(&self) -> &[T] {
        &self.p_prev
    }

    /// Node `(row, col)` sits at `((col - n/2) dx, (row - n/2) dx)`.
    pub fn node_position(&self, row: usize, col: usize) -> Point<T> {
        let half = T::from_usize_lossy(self.n / 2);
        Point::new(
            (T::from_usize_lossy(col) - half) * self.pitch,
            (T::from_usize_lossy(row) - half) * self.pitch,
        )
    }

    fn fractional_index(&self, p: Point<T>) -> (T, T) {
        let half = T::from_usize_lossy(self.n / 2);
        (p.y / self.pitch + half, p.x / self.pitch + half)
    }

    pub fn nearest_node(&self, p: Point<T>) -> Option<(usize, usize)> {
        let (r, c) = self.fractional_index(p);
        let r = r.round().to_usize()?;
        let c = c.round().to_usize()?;
        (r < self.n && c < self.n).then_some((r, c))
    }

    pub fn sample(&self, p: Point<T>) -> T {
        let (r, c) = self.fractional_index(p);
        bilinear(&self.p, self.n, self.n, r, c)
    }

    /// Trigonometric interpolant of the current field on the tensor grid
    /// `xs` x `ys`, row-major with one row per entry of `ys`. Reproduces the
    /// node values exactly and is exact for fields band-limited to the grid.
    pub fn interpolate_tensor(&mut self, xs: &[T], ys: &[T]) -> Vec<T> {
        let n = self.n;
        let nyquist = n / 2;
        self.work.copy_from_slice(&self.p);
        self.fft.forward(&mut self.work, &mut self.spec);
        let half = T::from_usize_lossy(nyquist);
        let pitch = self.pitch;
        let basis = |q: usize, xi: T| -> Complex<T> {
            if q == nyquist {
                // the Nyquist mode is a cosine so that real fields stay real
                Complex::new((T::PI() * xi).cos(), T::zero())
            } else {
                let s = if q < nyquist { q as f64 } else { q as f64 - n as f64 };
                Complex::from_polar(T::one(), T::TAU() * T::lit(s) * xi / T::from_usize_lossy(n))
            }
        };
        // the half spectrum covers kx in [0, n/2]; interior columns stand for a conjugate pair
        let ex: Vec<Vec<Complex<T>>> = (0..=nyquist)
            .map(|kx| {
                let w = if kx == 0 || kx == nyquist { T::one() } else { T::lit(2.0) };
                xs.iter().map(|&x| basis(kx, x / pitch + half) * w).collect()
            })
            .collect();
        let spec = &self.spec;
        let partial: Vec<Vec<Complex<T>>> = (0..n)
            .into_par_iter()
            .map(|ky| {
                let mut row = vec![Complex::new(T::zero(), T::zero()); xs.len()];
                for (kx, e) in ex.iter().enumerate() {
                    let f = spec[kx * n + ky];
                    for (acc, &b) in row.iter_mut().zip(e) {
                        *acc = *acc + f * b;
                    }
                }
                row
            })
            .collect();
        let norm = T::from_usize_lossy(n * n).recip();
        ys.par_iter()
            .flat_map_iter(|&y| {
                let xi = y / pitch + half;
                let mut out = vec![T::zero(); xs.len()];
                for (ky, row) in partial.iter().enumerate() {
                    let b = basis(ky, xi);
                    for (o, a) in out.iter_mut().zip(row) {
                        *o = *o + (*a * b).re;
                    }
                }
                out.into_iter().map(move |v| v * norm)
            })
            .collect()
    }

    pub fn set_fields(&mut self, p: Vec<T>, p_prev: Vec<T>) -> Result<()> {
        if p.len() != self.n * self.n || p_prev.len() != self.n * self.n {
            return Err(Error::ShapeMismatch("field size does not match solver grid".into()));
        }
        self.p = p;
        self.p_prev = p_prev;
        self.steps = 0;
        Ok(())
    }

    /// Initial pressure with zero initial velocity: the previous level is set
    /// to `cos(c0 |k| dt) P0`, so the recurrence reproduces
    /// `cos(c0 |k| t) P0` exactly.
    pub fn set_initial_pressure(&mut self, p0: &[T]) -> Result<()> {
        if p0.len() != self.n * self.n {
            return Err(Error::ShapeMismatch("initial pressure does not match solver grid".into()));
        }
        self.p.copy_from_slice(p0);
        self.work.copy_from_slice(p0);
        self.fft.forward(&mut self.work, &mut self.spec);
        let norm = T::from_usize_lossy(self.n * self.n).recip();
        for (s, &c) in self.spec.iter_mut().zip(&self.cos_table) {
            *s = *s * (c * norm);
        }
        self.fft.inverse(&mut self.spec, &mut self.p_prev);
        self.steps = 0;
        Ok(())
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<()> {
        self.work.copy_from_slice(&self.p);
        self.fft.forward(&mut self.work, &mut self.spec);
        let scale = T::lit(2.0) / T::from_usize_lossy(self.n * self.n);
        for (s, &c) in self.spec.iter_mut().zip(&self.cos_table) {
            *s = *s * (c * scale);
        }
        self.fft.inverse(&mut self.spec, &mut self.work);
        // work <- 2 C p - p_prev, then rotate levels
        for (w, &q) in self.work.iter_mut().zip(&self.p_prev) {
            *w = *w - q;
        }
        std::mem::swap(&mut self.p_prev, &mut self.p);
        std::mem::swap(&mut self.p, &mut self.work);
        if let Some(d) = &self.damping {
            for ((a, b), &s) in self.p.iter_mut().zip(self.p_prev.iter_mut()).zip(d) {
                *a = *a * s;
                *b = *b * s;
            }
        }
        self.steps += 1;
        if let Some(i) = self.p.iter().position(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                step: self.steps,
                detail: format!("non-finite pressure at node ({}, {})", i / self.n, i % self.n),
            });
        }
        Ok(())
    }

    /// Quadratic invariant of the undamped recurrence,
    /// `sum_k |P^n|^2 + |P^{n-1}|^2 - 2 cos(c0 |k| dt) Re(P^n conj(P^{n-1}))`,
    /// normalised by the node count. Conserved without sponge or injection;
    /// the sponge only removes from it.
    pub fn energy(&mut self) -> T {
        let h = self.n / 2 + 1;
        self.work.copy_from_slice(&self.p);
        self.fft.forward(&mut self.work, &mut self.spec);
        let cur = self.spec.clone();
        self.work.copy_from_slice(&self.p_prev);
        self.fft.forward(&mut self.work, &mut self.spec);
        let mut total = T::zero();
        for kx in 0..h {
            // the half spectrum counts interior kx columns twice
            let w = if kx == 0 || kx == h - 1 { T::one() } else { T::lit(2.0) };
            for ky in 0..self.n {
                let i = kx * self.n + ky;
                let (a, b) = (cur[i], self.spec[i]);
                let q = a.norm_sqr() + b.norm_sqr() - T::lit(2.0) * self.cos_table[i] * (a * b.conj()).re;
                total = total + w * q;
            }
        }
        total / T::from_usize_lossy(self.n * self.n * self.n * self.n)
    }

    pub fn sound_speed(&self) -> T {
        self.sound_speed
    }
}

/// Per-step multiplicative sponge, symmetric under `i -> n - i (mod n)`.
fn sponge_profile<T: Real>(n: usize, pad: usize, courant: T) -> Vec<T> {
    let half = n / 2;
    let axis: Vec<T> = (0..n)
        .map(|i| {
            let from_center = i.abs_diff(half);
            let inner = half - pad;
            if from_center <= inner {
                T::zero()
            } else {
                let u = T::from_usize_lossy(from_center - inner) / T::from_usize_lossy(pad);
                T::lit(0.5) * (T::one() - (T::PI() * u).cos())
            }
        })
        .collect();
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let w = axis[r].max(axis[c]);
            out.push((-T::lit(SPONGE_STRENGTH) * courant * w).exp());
        }
    }
    out
}

fn is_fft_friendly(mut n: usize) -> bool {
    for p in [2, 3, 5, 7] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

/// Smallest even FFT-friendly size `>= n`.
pub fn friendly_size(n: usize) -> usize {
    let mut m = n.max(4) + n % 2;
    while !is_fft_friendly(m) {
        m += 2;
    }
    m
}

/// Grid layout chosen for a time-reversal run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverLayout<T> {
    pub points: usize,
    pub pitch: T,
    pub dt: T,
    /// Solver steps per data sample.
    pub substeps: usize,
}

/// Picks pitch, size and step for `data` and `roi`: at least
/// `points_per_wavelength` nodes per wavelength at the band limit, the array
/// radius an integer number of nodes, ROI and array plus a two-node margin
/// inside the sponge.
pub fn plan_layout<T: Real>(data: &SensorData<T>, roi: &RoiSpec<T>, settings: &SolverSettings<T>) -> Result<SolverLayout<T>> {
    let config = data.config();
    let c0 = config.sound_speed;
    if !(settings.points_per_wavelength > T::zero()) || !(settings.cfl > T::zero()) {
        return Err(Error::InvalidArgument("solver resolution and CFL must be positive".into()));
    }
    let max_pitch = T::TAU() * c0 / (config.omega_max * settings.points_per_wavelength);
    let per_radius = (config.radius / max_pitch).ceil();
    let pitch = config.radius / per_radius;

    let half_roi = roi.side * T::lit(0.5) + roi.pitch();
    let extent = config
        .radius
        .max(roi.center.x.abs() + half_roi)
        .max(roi.center.y.abs() + half_roi);
    let half_nodes = (extent / pitch).ceil().to_usize().unwrap_or(0) + 2;
    let points = friendly_size(2 * (half_nodes + settings.pad));

    let data_dt = config.dt;
    let (dt, substeps) = match settings.dt {
        Some(dt) => {
            let ratio = data_dt / dt;
            let m = ratio.round();
            if !(dt > T::zero()) || m < T::one() || (ratio - m).abs() > T::lit(1e-9) * ratio {
                return Err(Error::InvalidArgument(format!(
                    "solver step {dt} does not divide the data step {data_dt}"
                )));
            }
            (dt, m.to_usize().unwrap_or(1))
        }
        None => {
            let dt_max = settings.cfl * pitch / c0;
            let m = (data_dt / dt_max).ceil().max(T::one());
            (data_dt / m, m.to_usize().unwrap_or(1))
        }
    };
    Ok(SolverLayout {
        points,
        pitch,
        dt,
        substeps,
    })
}

/// Time-reversal reconstruction.
///
/// Starting from a zero field, the solver runs over `[0, T]` and after every
/// step overwrites the sensor nodes with the reversed signals
/// `g(y_n, T - t)` (band-limited interpolation between data samples). The
/// image is the field at the final time, read onto `roi` by trigonometric
/// interpolation.
pub fn run_time_reversal<T: Real>(data: &SensorData<T>, roi: &RoiSpec<T>, settings: &SolverSettings<T>) -> Result<ImageGrid<T>> {
    roi.validate()?;
    let config = data.config();
    let r = config.radius;
    let half = roi.side * T::lit(0.5);
    // cavity: the square enclosing the array, inside which the sponge is inactive
    if (roi.center.x.abs() + half) > r * (T::one() + T::lit(1e-9)) || (roi.center.y.abs() + half) > r * (T::one() + T::lit(1e-9)) {
        return Err(Error::Geometry("ROI extends outside the cavity enclosed by the sensor array".into()));
    }
    let layout = plan_layout(data, roi, settings)?;
    let mut grid = SolverGrid::new(layout.points, layout.pitch, settings.pad, layout.dt, config.sound_speed)?;

    let traces: Vec<Vec<T>> = data
        .samples()
        .iter()
        .map(|t| upsample_band_limited(t, layout.substeps))
        .collect();
    let n_steps = layout.substeps * (data.n_samples().saturating_sub(1));
    let targets = injection_targets(&grid, &config.sensor_positions(), settings.injection)?;

    let inject = |field: &mut [T], s: usize| {
        for (trace, nodes) in traces.iter().zip(&targets) {
            let value = trace[n_steps - s];
            for &(idx, w) in nodes {
                field[idx] = field[idx] * (T::one() - w) + value * w;
            }
        }
    };

    let mut p0 = vec![T::zero(); layout.points * layout.points];
    inject(&mut p0, 0);
    let p_prev = p0.clone();
    grid.set_fields(p0, p_prev)?;

    for s in 1..=n_steps {
        grid.step()?;
        inject(&mut grid.p, s);
        if let Some(snap) = &settings.snapshots {
            if snap.every > 0 && s % snap.every == 0 {
                let path = snap.dir.join(format!("tr_{s:06}.pgm"));
                crate::io::write_field_pgm(&path, grid.field(), layout.points)?;
            }
        }
    }

    let xs: Vec<T> = (0..roi.points).map(|c| roi.coord_x(c)).collect();
    let ys: Vec<T> = (0..roi.points).map(|r| roi.coord_y(r)).collect();
    ImageGrid::from_values(*roi, grid.interpolate_tensor(&xs, &ys))
}

/// Node indices and blend weights for each sensor.
fn injection_targets<T: Real>(grid: &SolverGrid<T>, sensors: &[Point<T>], mode: Injection) -> Result<Vec<Vec<(usize, T)>>> {
    let n = grid.size();
    sensors
        .iter()
        .map(|&y| match mode {
            Injection::NearestNode => {
                let (r, c) = grid
                    .nearest_node(y)
                    .ok_or_else(|| Error::Geometry("sensor outside solver grid".into()))?;
                Ok(vec![(r * n + c, T::one())])
            }
            Injection::Bilinear => {
                let (fr, fc) = grid.fractional_index(y);
                let r0 = fr.floor().to_usize().filter(|&v| v + 1 < n);
                let c0 = fc.floor().to_usize().filter(|&v| v + 1 < n);
                let (Some(r0), Some(c0)) = (r0, c0) else {
                    return Err(Error::Geometry("sensor outside solver grid".into()));
                };
                let ar = fr - T::from_usize_lossy(r0);
                let ac = fc - T::from_usize_lossy(c0);
                Ok(vec![
                    (r0 * n + c0, (T::one() - ar) * (T::one() - ac)),
                    (r0 * n + c0 + 1, (T::one() - ar) * ac),
                    ((r0 + 1) * n + c0, ar * (T::one() - ac)),
                    ((r0 + 1) * n + c0 + 1, ar * ac),
                ])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &SolverGrid<f64>, sigma: f64) -> Vec<f64> {
        let n = grid.size();
        (0..n * n)
            .map(|i| {
                let p = grid.node_position(i / n, i % n);
                (-(p.x * p.x + p.y * p.y) / (2.0 * sigma * sigma)).exp()
            })
            .collect()
    }

    #[test]
    fn zero_field_stays_zero() {
        let mut g = SolverGrid::<f64>::new(32, 1e-3, 4, 1e-7, 1500.0).unwrap();
        for _ in 0..10 {
            g.step().unwrap();
        }
        assert!(g.field().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_odd_grid() {
        assert!(SolverGrid::<f64>::new(31, 1e-3, 4, 1e-7, 1500.0).is_err());
    }

    #[test]
    fn plane_wave_phase_speed() {
        // periodic domain, one Fourier mode along x
        let n = 64;
        let dx = 1e-3;
        let c0 = 1500.0;
        let dt = 0.3 * dx / c0;
        let mut g = SolverGrid::<f64>::new(n, dx, 0, dt, c0).unwrap();
        let k = std::f64::consts::TAU * 5.0 / (n as f64 * dx);
        let xs: Vec<f64> = (0..n * n).map(|i| g.node_position(i / n, i % n).x).collect();
        let field = |t: f64| -> Vec<f64> {
            (0..n * n)
                .map(|i| {
                    let x = xs[i];
                    (k * (x - c0 * t)).cos()
                })
                .collect()
        };
        g.set_fields(field(0.0), field(-dt)).unwrap();
        for _ in 0..100 {
            g.step().unwrap();
        }
        let t = 100.0 * dt;
        let exact = field(t);
        let err = g.field().iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // a 0.1% speed error would shift the phase by k c0 t * 1e-3
        let phase_budget = k * c0 * t * 1e-3;
        assert!(err < phase_budget, "max error {err} vs budget {phase_budget}");
    }

    #[test]
    fn tensor_interpolation_is_exact_for_grid_modes() {
        let n = 32;
        let dx = 1e-3;
        let mut g = SolverGrid::<f64>::new(n, dx, 0, 1e-7, 1500.0).unwrap();
        let span = n as f64 * dx;
        let (kx, ky) = (std::f64::consts::TAU * 3.0 / span, std::f64::consts::TAU * 7.0 / span);
        let mode = |p: Point<f64>| (kx * p.x + 0.3).cos() * (ky * p.y - 1.1).sin() + 0.25;
        let field: Vec<f64> = (0..n * n).map(|i| mode(g.node_position(i / n, i % n))).collect();
        g.set_fields(field.clone(), field).unwrap();

        let nodes: Vec<f64> = (0..n).map(|j| (j as f64 - (n / 2) as f64) * dx).collect();
        let at_nodes = g.interpolate_tensor(&nodes, &nodes);
        for (a, b) in at_nodes.iter().zip(g.field()) {
            assert!((a - b).abs() < 1e-12);
        }

        let xs = [-0.0123, 0.00037, 0.0091];
        let ys = [0.0044, -0.0157];
        let off = g.interpolate_tensor(&xs, &ys);
        for (r, &y) in ys.iter().enumerate() {
            for (c, &x) in xs.iter().enumerate() {
                assert!((off[r * xs.len() + c] - mode(Point::new(x, y))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_conserved_without_sponge() {
        let mut g = SolverGrid::<f64>::new(64, 1e-3, 0, 2e-7, 1500.0).unwrap();
        let p0 = gaussian(&g, 3e-3);
        g.set_initial_pressure(&p0).unwrap();
        let e0 = g.energy();
        for _ in 0..50 {
            g.step().unwrap();
        }
        assert!((g.energy() / e0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn energy_non_increasing_with_sponge() {
        let mut g = SolverGrid::<f64>::new(64, 1e-3, 12, 2e-7, 1500.0).unwrap();
        let p0 = gaussian(&g, 2e-3);
        g.set_initial_pressure(&p0).unwrap();
        let mut last = g.energy();
        let e0 = last;
        for _ in 0..400 {
            g.step().unwrap();
            let e = g.energy();
            assert!(e <= last * (1.0 + 1e-12), "energy grew: {last} -> {e}");
            last = e;
        }
        assert!(last < 0.05 * e0, "sponge removed too little: {last} of {e0}");
    }

    #[test]
    fn friendly_sizes() {
        assert_eq!(friendly_size(1279), 1280);
        assert_eq!(friendly_size(822), 840);
        assert!(friendly_size(3) >= 4);
    }
}
