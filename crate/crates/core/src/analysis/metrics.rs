//! Resolution and contrast metrics of reconstructed images.

use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionConfig;
use crate::analysis::sampling::{classify_sampling, ppw, Regime};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::ImageGrid;
use crate::scalar::Real;

/// Level reported when nothing lies outside the exclusion zone or the side
/// lobes are exactly zero (dB).
pub const SIDE_LOBE_FLOOR_DB: f64 = -300.0;

/// Pixels within this many pitches of a true source count towards its peak.
pub const PEAK_RADIUS_PIXELS: f64 = 2.0;

/// Side lobes are searched beyond this multiple of the FWHM.
pub const EXCLUSION_FWHM_MULTIPLE: f64 = 3.0;

/// Which lobe a predicted width refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FwhmKind {
    Main,
    Side,
}

/// Predicted FWHM: `0.48 lambda_c` for the `J0` main lobe and
/// `0.40 lambda_c` for the `J1` side lobe.
pub fn predicted_fwhm<T: Real>(kind: FwhmKind, center_wavelength: T) -> T {
    match kind {
        FwhmKind::Main => T::lit(0.48) * center_wavelength,
        FwhmKind::Side => T::lit(0.40) * center_wavelength,
    }
}

/// Width between the half-maximum crossings on either side of the sample at
/// `peak`, with linear interpolation between samples.
fn fwhm_at<T: Real>(profile: &[T], pitch: T, peak: usize) -> Result<T> {
    let top = profile[peak];
    if !(top > T::zero()) {
        return Err(Error::Unresolved(format!("peak value {top} is not positive")));
    }
    let half = top * T::lit(0.5);
    let left = (0..peak).rev().find(|&j| profile[j] < half).map(|j| {
        let (a, b) = (profile[j], profile[j + 1]);
        T::from_usize_lossy(j) + (half - a) / (b - a)
    });
    let right = (peak + 1..profile.len()).find(|&j| profile[j] < half).map(|j| {
        let (a, b) = (profile[j - 1], profile[j]);
        T::from_usize_lossy(j - 1) + (a - half) / (a - b)
    });
    match (left, right) {
        (Some(l), Some(r)) => Ok((r - l) * pitch),
        _ => Err(Error::Unresolved("no half-maximum crossing on one side of the peak".into())),
    }
}

/// FWHM of the global maximum of a sampled profile (first maximum on ties).
pub fn measure_fwhm<T: Real>(profile: &[T], pitch: T) -> Result<T> {
    if profile.is_empty() {
        return Err(Error::InvalidArgument("empty profile".into()));
    }
    if !(pitch > T::zero()) {
        return Err(Error::InvalidArgument(format!("pitch must be positive, got {pitch}")));
    }
    let peak = argmax(profile, 0, profile.len());
    fwhm_at(profile, pitch, peak)
}

/// FWHM of the largest sample within `window` samples of `center`.
pub fn measure_fwhm_around<T: Real>(profile: &[T], pitch: T, center: usize, window: usize) -> Result<T> {
    if center >= profile.len() {
        return Err(Error::InvalidArgument(format!("centre {center} outside a profile of {}", profile.len())));
    }
    if !(pitch > T::zero()) {
        return Err(Error::InvalidArgument(format!("pitch must be positive, got {pitch}")));
    }
    let lo = center.saturating_sub(window);
    let hi = (center + window + 1).min(profile.len());
    fwhm_at(profile, pitch, argmax(profile, lo, hi))
}

fn argmax<T: Real>(profile: &[T], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for i in lo..hi {
        if profile[i] > profile[best] {
            best = i;
        }
    }
    best
}

/// Largest `|profile|` outside the main lobe around the largest sample within
/// `window` of `center`, in dB relative to that sample. The main lobe ends at
/// the first local minimum of `|profile|` on each side.
pub fn profile_side_lobe_db<T: Real>(profile: &[T], center: usize, window: usize) -> Result<T> {
    if center >= profile.len() {
        return Err(Error::InvalidArgument(format!("centre {center} outside a profile of {}", profile.len())));
    }
    let abs: Vec<T> = profile.iter().map(|v| v.abs()).collect();
    let lo = center.saturating_sub(window);
    let hi = (center + window + 1).min(abs.len());
    let peak = argmax(&abs, lo, hi);
    if !(abs[peak] > T::zero()) {
        return Err(Error::Unresolved("profile is zero around the centre".into()));
    }
    let mut left = peak;
    while left > 0 && abs[left - 1] < abs[left] {
        left -= 1;
    }
    let mut right = peak;
    while right + 1 < abs.len() && abs[right + 1] < abs[right] {
        right += 1;
    }
    let side = abs[..left]
        .iter()
        .chain(&abs[right + 1..])
        .fold(T::zero(), |m, &v| m.max(v));
    Ok(to_db(side, abs[peak]))
}

fn to_db<T: Real>(value: T, reference: T) -> T {
    if value > T::zero() {
        (T::lit(20.0) * (value / reference).log10()).max(T::lit(SIDE_LOBE_FLOOR_DB))
    } else {
        T::lit(SIDE_LOBE_FLOOR_DB)
    }
}

/// Peak and side-lobe level of an image with known source positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contrast<T> {
    /// Largest `|value|` within two pixels of a true source.
    pub peak: T,
    /// Largest `|value|` beyond the exclusion radius, dB relative to `peak`.
    pub side_lobe_db: T,
    /// Exclusion radius around each source (m).
    pub exclusion_radius: T,
    /// Axial FWHM through the first source, when resolvable (m).
    pub fwhm: Option<T>,
}

/// Contrast of a (normalised) image against the true source positions.
///
/// The exclusion radius is three times the FWHM of `|image|` along the row
/// through the first source, or two pixels when that width is unresolved.
pub fn contrast_metrics<T: Real>(image: &ImageGrid<T>, truth: &[Point<T>]) -> Result<Contrast<T>> {
    if truth.is_empty() {
        return Err(Error::InvalidArgument("contrast needs at least one true source".into()));
    }
    let spec = image.spec();
    let pitch = spec.pitch();
    let (row, col) = spec
        .nearest(truth[0])
        .ok_or_else(|| Error::Geometry("true source lies outside the ROI".into()))?;
    let abs_row: Vec<T> = image.row(row).iter().map(|v| v.abs()).collect();
    let fwhm = measure_fwhm_around(&abs_row, pitch, col, PEAK_RADIUS_PIXELS as usize).ok();
    let exclusion = fwhm.map_or(T::lit(2.0) * pitch, |w| T::lit(EXCLUSION_FWHM_MULTIPLE) * w);
    let near = T::lit(PEAK_RADIUS_PIXELS) * pitch * (T::one() + T::lit(1e-9));

    let m = spec.points;
    let mut peak = T::zero();
    let mut side = T::zero();
    for i in 0..m * m {
        let x = spec.position(i / m, i % m);
        let d = truth.iter().fold(T::infinity(), |acc, &a| acc.min(x.distance(a)));
        let v = image.values()[i].abs();
        if d <= near {
            peak = peak.max(v);
        }
        if d > exclusion {
            side = side.max(v);
        }
    }
    let side_lobe_db = if peak > T::zero() {
        to_db(side, peak)
    } else {
        T::lit(SIDE_LOBE_FLOOR_DB)
    };
    Ok(Contrast {
        peak,
        side_lobe_db,
        exclusion_radius: exclusion,
        fwhm,
    })
}

/// Pearson correlation of two equally sized samples.
pub fn pearson_correlation<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::ShapeMismatch(format!("correlation of {} and {} samples", a.len(), b.len())));
    }
    let n = T::from_usize_lossy(a.len());
    let ma = a.iter().fold(T::zero(), |s, &v| s + v) / n;
    let mb = b.iter().fold(T::zero(), |s, &v| s + v) / n;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if saa == T::zero() || sbb == T::zero() {
        return Err(Error::Unresolved("correlation of a constant sample".into()));
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Position of the largest `|image|` over the nonzero pixels of `phantom`,
/// the stand-in source position for extended phantoms.
pub fn support_peak_position<T: Real>(image: &ImageGrid<T>, phantom: &ImageGrid<T>) -> Result<Point<T>> {
    if phantom.spec() != image.spec() {
        return Err(Error::ShapeMismatch("image and phantom grids differ".into()));
    }
    let m = image.points();
    let best = image
        .values()
        .iter()
        .zip(phantom.values())
        .enumerate()
        .filter(|(_, (_, p))| **p != T::zero())
        .fold(None, |best: Option<(usize, T)>, (i, (v, _))| match best {
            Some((_, b)) if b >= v.abs() => best,
            _ => Some((i, v.abs())),
        });
    let (i, _) = best.ok_or_else(|| Error::InvalidArgument("phantom has no support".into()))?;
    Ok(image.spec().position(i / m, i % m))
}

/// Quality summary of one reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport<T> {
    pub fwhm: Option<T>,
    pub peak: T,
    pub side_lobe_level: T,
    pub ppw: T,
    pub regime: Regime,
    pub correlation: Option<T>,
}

impl<T: Real> QualityReport<T> {
    /// Assesses `image` against source positions and, optionally, the
    /// ground-truth phantom. Without source positions the phantom's
    /// [`support_peak_position`] stands in. PPW is evaluated at `omega` on
    /// the image grid.
    pub fn assess(
        image: &ImageGrid<T>,
        truth: &[Point<T>],
        phantom: Option<&ImageGrid<T>>,
        config: &AcquisitionConfig<T>,
        omega: T,
    ) -> Result<Self> {
        if let Some(p) = phantom {
            if p.spec() != image.spec() {
                return Err(Error::ShapeMismatch("image and phantom grids differ".into()));
            }
        }
        let inferred;
        let truth = match (truth.is_empty(), phantom) {
            (true, Some(p)) => {
                inferred = [support_peak_position(image, p)?];
                &inferred[..]
            }
            _ => truth,
        };
        let contrast = contrast_metrics(image, truth)?;
        let correlation = phantom.and_then(|p| pearson_correlation(image.values(), p.values()).ok());
        Ok(Self {
            fwhm: contrast.fwhm,
            peak: contrast.peak,
            side_lobe_level: contrast.side_lobe_db,
            ppw: ppw(image.pitch(), omega, config.sound_speed)?,
            regime: classify_sampling(config.sensor_count, config, config.omega_max),
            correlation,
        })
    }
}
