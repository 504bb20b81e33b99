//! Imaging kernel of a single source/sensor pair and its large-argument
//! expansion.
//!
//! For a source at `a` and a sensor at `y`, the BP kernel is
//! `K_BP(x, omega) = (omega^2 / c0) G0_hat(x, y, omega) conj(G0_hat(y, a, omega))`
//! and the reduced kernel is `K~_BP = 32 pi c0^3 K_BP`.
//!
//! The leading asymptotic terms use a different scale:
//! main lobe `(2 omega c0 / (pi |y - a|)) J0(d)` and TR-minus-BP discrepancy
//! `exp(i Theta) (2 c0^2 / (pi |y - a|^2)) J1(d)`, with `d = omega |x - a| / c0`.
//! The two scales differ by `2 pi c0^2`, and `J0` is the average of the exact
//! pair kernel over sensor directions, not the kernel of one fixed sensor.
//! [`kernel_bp_ring_averaged`] applies both adjustments so that it can be
//! compared with [`kernel_main_lobe`] directly.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::forward::greens0_hat;
use crate::geometry::Point;
use crate::scalar::Real;
use crate::specfun::{j0, j1};

/// Reference frequency of the dB intensity maps (Hz).
pub const REFERENCE_FREQUENCY_HZ: f64 = 1e5;

/// Arguments below this value are outside the large-argument regime.
pub const ASYMPTOTIC_MIN_ARGUMENT: f64 = 1.0;

/// Lowest level reported by [`intensity_profile_db`] for zero values.
pub const DB_FLOOR: f64 = -300.0;

/// One source/sensor pair in a medium of sound speed `c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConfiguration<T> {
    pub source: Point<T>,
    pub sensor: Point<T>,
    pub sound_speed: T,
}

impl<T: Real> PairConfiguration<T> {
    pub fn new(source: Point<T>, sensor: Point<T>, sound_speed: T) -> Result<Self> {
        if !source.is_finite() || !sensor.is_finite() {
            return Err(Error::InvalidArgument("pair positions must be finite".into()));
        }
        if source == sensor {
            return Err(Error::Singular("source and sensor coincide".into()));
        }
        if !(sound_speed > T::zero()) {
            return Err(Error::InvalidArgument(format!("sound speed must be positive, got {sound_speed}")));
        }
        Ok(Self {
            source,
            sensor,
            sound_speed,
        })
    }

    /// `|y - a|`.
    pub fn separation(&self) -> T {
        self.sensor.distance(self.source)
    }

    /// `d = omega |x - a| / c0`.
    pub fn reduced_distance(&self, x: Point<T>, omega: T) -> T {
        omega * x.distance(self.source) / self.sound_speed
    }

    /// Angle at vertex `a` of the triangle `(a, x, y)`, opposite side
    /// `|x - y|`. Zero when `x = a`.
    pub fn theta(&self, x: Point<T>) -> T {
        let ra = x.distance(self.source);
        if ra == T::zero() {
            return T::zero();
        }
        let rs = self.separation();
        let rxy = x.distance(self.sensor);
        let cos = (ra * ra + rs * rs - rxy * rxy) / (T::lit(2.0) * ra * rs);
        cos.max(-T::one()).min(T::one()).acos()
    }

    /// True when `omega min(|y - a|, |y - x|) / c0` is large enough for the
    /// expansion to be meaningful.
    pub fn in_asymptotic_range(&self, x: Point<T>, omega: T) -> bool {
        let r = self.separation().min(self.sensor.distance(x));
        omega * r / self.sound_speed >= T::lit(ASYMPTOTIC_MIN_ARGUMENT)
    }
}

/// Kernel value with a flag telling whether the asymptotic expansion applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample<T> {
    pub value: Complex<T>,
    pub asymptotic: bool,
}

/// Exact `K_BP(x, omega)`.
pub fn kernel_bp<T: Real>(x: Point<T>, omega: T, pair: &PairConfiguration<T>) -> Result<KernelSample<T>> {
    if !(omega > T::zero()) {
        return Err(Error::Domain(format!("kernel needs omega > 0, got {omega}")));
    }
    let c0 = pair.sound_speed;
    let gx = greens0_hat(x, pair.sensor, omega, c0)?;
    let ga = greens0_hat(pair.sensor, pair.source, omega, c0)?;
    Ok(KernelSample {
        value: gx * ga.conj() * (omega * omega / c0),
        asymptotic: pair.in_asymptotic_range(x, omega),
    })
}

/// Reduced kernel `K~_BP = 32 pi c0^3 K_BP`.
pub fn kernel_bp_reduced<T: Real>(x: Point<T>, omega: T, pair: &PairConfiguration<T>) -> Result<Complex<T>> {
    let c0 = pair.sound_speed;
    Ok(kernel_bp(x, omega, pair)?.value * (T::lit(32.0) * T::PI() * c0 * c0 * c0))
}

/// `Re K~_BP / (2 pi c0^2)` averaged over `samples` sensor positions on the
/// circle of radius `|y - a|` around `a`, starting from the pair's sensor.
/// Its large-argument limit is [`kernel_main_lobe`].
pub fn kernel_bp_ring_averaged<T: Real>(x: Point<T>, omega: T, pair: &PairConfiguration<T>, samples: usize) -> Result<T> {
    if samples == 0 {
        return Err(Error::InvalidArgument("ring average needs at least one sample".into()));
    }
    let rho = pair.separation();
    let start = (pair.sensor - pair.source).y.atan2((pair.sensor - pair.source).x);
    let c0 = pair.sound_speed;
    let scale = T::TAU() * c0 * c0;
    let mut acc = T::zero();
    for j in 0..samples {
        let phi = start + T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(samples);
        let moved = PairConfiguration {
            sensor: pair.source + Point::polar(rho, phi),
            ..*pair
        };
        acc = acc + kernel_bp_reduced(x, omega, &moved)?.re;
    }
    Ok(acc / (T::from_usize_lossy(samples) * scale))
}

/// Leading main-lobe term `(2 omega c0 / (pi |y - a|)) J0(d)`.
pub fn kernel_main_lobe<T: Real>(x: Point<T>, omega: T, pair: &PairConfiguration<T>) -> T {
    let c0 = pair.sound_speed;
    T::lit(2.0) * omega * c0 / (T::PI() * pair.separation()) * j0(pair.reduced_distance(x, omega))
}

/// Leading TR-minus-BP term `exp(i Theta) (2 c0^2 / (pi |y - a|^2)) J1(d)`.
pub fn kernel_side_lobe<T: Real>(x: Point<T>, omega: T, pair: &PairConfiguration<T>) -> Complex<T> {
    let c0 = pair.sound_speed;
    let rs = pair.separation();
    let amp = T::lit(2.0) * c0 * c0 / (T::PI() * rs * rs) * j1(pair.reduced_distance(x, omega));
    Complex::from_polar(amp, pair.theta(x))
}

/// Kernel shown in an intensity map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Bp,
    TrMinusBp,
}

/// Intensity maps `20 log10(|K| / |K_main(a, omega_ref)|)` with
/// `omega_ref = 2 pi * 0.1 MHz`. Row `i` holds the map at `omegas[i]`, one
/// column per point. Both kinds use the leading-order terms so that they
/// share one scale; zero values are reported as [`DB_FLOOR`].
pub fn intensity_profile_db<T: Real>(kind: KernelKind, points: &[Point<T>], omegas: &[T], pair: &PairConfiguration<T>) -> Result<Vec<Vec<T>>> {
    let omega_ref = T::TAU() * T::lit(REFERENCE_FREQUENCY_HZ);
    let reference = kernel_main_lobe(pair.source, omega_ref, pair).abs();
    if !(reference > T::zero()) || !reference.is_finite() {
        return Err(Error::Singular("reference kernel value is zero".into()));
    }
    if let Some(w) = omegas.iter().find(|w| !(**w > T::zero())) {
        return Err(Error::Domain(format!("intensity maps need omega > 0, got {w}")));
    }
    let floor = T::lit(DB_FLOOR);
    Ok(omegas
        .iter()
        .map(|&w| {
            points
                .iter()
                .map(|&x| {
                    let v = match kind {
                        KernelKind::Bp => kernel_main_lobe(x, w, pair).abs(),
                        KernelKind::TrMinusBp => kernel_side_lobe(x, w, pair).norm(),
                    };
                    if v > T::zero() {
                        (T::lit(20.0) * (v / reference).log10()).max(floor)
                    } else {
                        floor
                    }
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> PairConfiguration<f64> {
        PairConfiguration::new(Point::new(-0.0125, 0.0), Point::new(-0.1, 0.0), 1500.0).unwrap()
    }

    #[test]
    fn pair_validation() {
        let p = Point::new(0.0, 0.0);
        assert!(PairConfiguration::new(p, p, 1500.0).is_err());
        assert!(PairConfiguration::new(p, Point::new(1.0, 0.0), 0.0).is_err());
        assert!(PairConfiguration::new(Point::new(f64::NAN, 0.0), Point::new(1.0, 0.0), 1500.0).is_err());
    }

    #[test]
    fn reduced_scaling_exact() {
        let p = pair();
        let x = Point::new(-0.012, 0.001);
        let k = kernel_bp(x, 3e6, &p).unwrap().value;
        let kr = kernel_bp_reduced(x, 3e6, &p).unwrap();
        let s = 32.0 * std::f64::consts::PI * 1500f64.powi(3);
        assert!((kr - k * s).norm() <= 1e-12 * kr.norm());
    }

    #[test]
    fn main_lobe_at_source_and_first_zero() {
        let p = pair();
        let w = 4e6;
        let peak = kernel_main_lobe(p.source, w, &p);
        assert!((peak - 2.0 * w * 1500.0 / (std::f64::consts::PI * 0.0875)).abs() < 1e-9 * peak);
        let s = 2.404_825_557_695_773 * 1500.0 / w;
        let x = p.source + Point::new(s, 0.0);
        assert!(kernel_main_lobe(x, w, &p).abs() < 1e-3 * peak);
    }

    #[test]
    fn ring_average_matches_main_lobe() {
        let p = pair();
        let w = 30.0 * 1500.0 / p.separation() * 4.0;
        let peak = kernel_main_lobe(p.source, w, &p);
        for i in 0..=12 {
            let d = 3.0 * i as f64 / 12.0;
            let x = p.source + Point::new(d * 1500.0 / w, 0.0);
            let exact = kernel_bp_ring_averaged(x, w, &p, 256).unwrap();
            let approx = kernel_main_lobe(x, w, &p);
            assert!((exact - approx).abs() < 0.05 * peak, "d={d}: {exact} vs {approx}");
        }
    }

    #[test]
    fn side_lobe_vanishes_at_source_and_is_frequency_flat() {
        let p = pair();
        assert_eq!(kernel_side_lobe(p.source, 5e6, &p).norm(), 0.0);
        let amp = |w: f64| {
            let x = p.source + Point::new(1.841_183_78 * 1500.0 / w, 0.0);
            kernel_side_lobe(x, w, &p).norm()
        };
        assert!((amp(4e6) / amp(1.6e7) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn theta_axial() {
        let p = pair();
        assert!(p.theta(Point::new(-0.02, 0.0)).abs() < 1e-12);
        assert!((p.theta(Point::new(0.0, 0.0)) - std::f64::consts::PI).abs() < 1e-6);
        assert_eq!(p.theta(p.source), 0.0);
    }

    #[test]
    fn side_to_main_ratio_halving_omega_doubles() {
        let p = pair();
        let ratio = |w: f64| {
            let x = p.source + Point::new(1.0 * 1500.0 / w, 0.0);
            kernel_side_lobe(x, w, &p).norm() / kernel_main_lobe(x, w, &p).abs()
        };
        assert!((ratio(2e6) / ratio(4e6) - 2.0).abs() < 0.02);
    }

    #[test]
    fn db_maps() {
        let p = pair();
        let wref = std::f64::consts::TAU * 1e5;
        let m = intensity_profile_db(KernelKind::Bp, &[p.source], &[wref, 2.0 * wref], &p).unwrap();
        assert!(m[0][0].abs() < 1e-9);
        assert!((m[1][0] - 20.0 * 2f64.log10()).abs() < 1e-9);
        let t = intensity_profile_db(KernelKind::TrMinusBp, &[p.source], &[wref], &p).unwrap();
        assert_eq!(t[0][0], DB_FLOOR);
        assert!(intensity_profile_db(KernelKind::Bp, &[p.source], &[0.0], &p).is_err());
    }

    #[test]
    fn low_frequency_flagged() {
        let p = pair();
        assert!(!kernel_bp(Point::new(0.0, 0.0), 100.0, &p).unwrap().asymptotic);
        assert!(kernel_bp(Point::new(0.0, 0.0), 1e7, &p).unwrap().asymptotic);
        assert!(kernel_bp(p.sensor, 1e7, &p).is_err());
    }
}
