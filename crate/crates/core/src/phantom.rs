//! Initial-pressure phantoms: point and disc sources, a seeded procedural
//! vessel tree, and raster import.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{bilinear, ImageGrid, RoiSpec};
use crate::scalar::Real;

/// Bounds on the nonzero fraction of a vessel phantom.
pub const VASCULAR_MIN_FILL: f64 = 0.005;
pub const VASCULAR_MAX_FILL: f64 = 0.05;

/// Vessel support stays inside this fraction of the ROI half-side.
pub const VASCULAR_SUPPORT: f64 = 0.95;

/// Description of a phantom, as read from scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhantomSpec {
    Point {
        x: f64,
        y: f64,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    Disc {
        x: f64,
        y: f64,
        radius: f64,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    Vascular {
        seed: u64,
        #[serde(default = "default_branches")]
        branches: usize,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    Raster {
        path: PathBuf,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    Empty,
}

fn unit() -> f64 {
    1.0
}

fn default_branches() -> usize {
    5
}

impl PhantomSpec {
    /// Positions of the point-like sources, used as truth by the metrics.
    pub fn truth_positions<T: Real>(&self) -> Vec<Point<T>> {
        match *self {
            PhantomSpec::Point { x, y, .. } | PhantomSpec::Disc { x, y, .. } => vec![Point::new(T::lit(x), T::lit(y))],
            _ => Vec::new(),
        }
    }

    fn amplitude(&self) -> f64 {
        match *self {
            PhantomSpec::Point { amplitude, .. }
            | PhantomSpec::Disc { amplitude, .. }
            | PhantomSpec::Vascular { amplitude, .. }
            | PhantomSpec::Raster { amplitude, .. } => amplitude,
            PhantomSpec::Empty => 1.0,
        }
    }

    /// Rasterises the phantom on `roi` and checks that its support lies
    /// strictly inside an array of radius `array_radius`.
    pub fn build<T: Real>(&self, roi: &RoiSpec<T>, array_radius: T) -> Result<ImageGrid<T>> {
        roi.validate()?;
        let mut grid = match self {
            PhantomSpec::Point { x, y, .. } => make_point(Point::new(T::lit(*x), T::lit(*y)), roi)?,
            PhantomSpec::Disc { x, y, radius, .. } => make_disc(Point::new(T::lit(*x), T::lit(*y)), T::lit(*radius), roi)?,
            PhantomSpec::Vascular { seed, branches, .. } => make_vascular(*seed, roi, *branches)?,
            PhantomSpec::Raster { path, .. } => load_raster(path, roi)?,
            PhantomSpec::Empty => ImageGrid::zeros(*roi),
        };
        let amp = T::lit(self.amplitude());
        if amp != T::one() {
            grid.values_mut().iter_mut().for_each(|v| *v = *v * amp);
        }
        if let Some((p, _)) = grid.nonzero_pixels().iter().find(|(p, _)| p.norm() >= array_radius) {
            return Err(Error::Geometry(format!(
                "phantom support at ({}, {}) is not strictly inside the array",
                p.x, p.y
            )));
        }
        Ok(grid)
    }
}

/// Single pixel of value one at the node nearest to `a`.
pub fn make_point<T: Real>(a: Point<T>, roi: &RoiSpec<T>) -> Result<ImageGrid<T>> {
    roi.validate()?;
    let (r, c) = roi
        .nearest(a)
        .ok_or_else(|| Error::Geometry(format!("point ({}, {}) lies outside the ROI", a.x, a.y)))?;
    let mut grid = ImageGrid::zeros(*roi);
    grid.set(r, c, T::one());
    Ok(grid)
}

/// Uniform disc of value one; every node within `radius` of `center`.
pub fn make_disc<T: Real>(center: Point<T>, radius: T, roi: &RoiSpec<T>) -> Result<ImageGrid<T>> {
    roi.validate()?;
    if !(radius > T::zero()) {
        return Err(Error::InvalidArgument(format!("disc radius must be positive, got {radius}")));
    }
    if !roi.contains(center) {
        return Err(Error::Geometry("disc centre lies outside the ROI".into()));
    }
    Ok(ImageGrid::from_fn(*roi, |r, c| {
        if roi.position(r, c).distance(center) <= radius {
            T::one()
        } else {
            T::zero()
        }
    }))
}

/// Canvas in pixel units shared by the vessel drawing routines.
struct Canvas {
    m: usize,
    cells: Vec<bool>,
    filled: usize,
    max_fill: usize,
    /// Squared support radius around the centre, in pixels.
    support2: f64,
}

impl Canvas {
    fn inside(&self, r: f64, c: f64) -> bool {
        let h = self.m as f64 / 2.0;
        (r - h).powi(2) + (c - h).powi(2) <= self.support2
    }

    fn full(&self) -> bool {
        self.filled >= self.max_fill
    }

    /// Stamps a square brush of `width` pixels centred near `(r, c)`.
    fn stamp(&mut self, r: f64, c: f64, width: usize) {
        let lo = -((width as isize - 1) / 2);
        for dr in lo..lo + width as isize {
            for dc in lo..lo + width as isize {
                let (rr, cc) = (r.round() as isize + dr, c.round() as isize + dc);
                if rr < 0 || cc < 0 || rr as usize >= self.m || cc as usize >= self.m {
                    continue;
                }
                if !self.inside(rr as f64, cc as f64) {
                    continue;
                }
                let i = rr as usize * self.m + cc as usize;
                if !self.cells[i] {
                    if self.full() {
                        return;
                    }
                    self.cells[i] = true;
                    self.filled += 1;
                }
            }
        }
    }
}

/// Draws one random-walk segment and recurses into two children.
fn grow(canvas: &mut Canvas, rng: &mut ChaCha8Rng, start: (f64, f64), heading: f64, depth: usize, generations: usize) {
    if depth >= generations || canvas.full() {
        return;
    }
    let width = 3usize.saturating_sub(depth).max(1);
    let m = canvas.m as f64;
    let length = m * rng.gen_range(0.08..0.2) * 0.85f64.powi(depth as i32);
    let steps = length.ceil() as usize;
    let (mut r, mut c) = start;
    let mut dir = heading;
    for _ in 0..steps {
        dir += rng.gen_range(-0.25..0.25);
        let (nr, nc) = (r + dir.sin(), c + dir.cos());
        if !canvas.inside(nr, nc) || canvas.full() {
            return;
        }
        r = nr;
        c = nc;
        canvas.stamp(r, c, width);
    }
    let spread = rng.gen_range(0.3..0.8);
    let tilt = rng.gen_range(-0.15..0.15);
    grow(canvas, rng, (r, c), dir + spread + tilt, depth + 1, generations);
    grow(canvas, rng, (r, c), dir - spread + tilt, depth + 1, generations);
}

/// Seeded binary vessel tree of 1-3 pixel wide random-walk segments with
/// `branches` generations. Values are 0 or 1; the nonzero fraction is kept
/// between 0.5% and 5% by adding trees or stopping the drawing, and the
/// support stays inside 95% of the ROI half-side around its centre.
pub fn make_vascular<T: Real>(seed: u64, roi: &RoiSpec<T>, branches: usize) -> Result<ImageGrid<T>> {
    roi.validate()?;
    if branches == 0 {
        return Err(Error::InvalidArgument("vessel tree needs at least one generation".into()));
    }
    let m = roi.points;
    let total = m * m;
    let support = VASCULAR_SUPPORT * m as f64 / 2.0;
    let mut canvas = Canvas {
        m,
        cells: vec![false; total],
        filled: 0,
        max_fill: ((VASCULAR_MAX_FILL * total as f64).floor() as usize).max(1),
        support2: support * support,
    };
    let min_fill = (VASCULAR_MIN_FILL * total as f64).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = m as f64 / 2.0;
    // a tree count cap guards degenerate tiny grids
    for tree in 0..64 {
        if tree > 0 && canvas.filled >= min_fill {
            break;
        }
        let rad = support * rng.gen_range(0.0..0.6);
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        let root = (h + rad * ang.sin(), h + rad * ang.cos());
        let heading = rng.gen_range(0.0..std::f64::consts::TAU);
        grow(&mut canvas, &mut rng, root, heading, 0, branches);
    }
    let values = canvas.cells.iter().map(|&b| if b { T::one() } else { T::zero() }).collect();
    ImageGrid::from_values(*roi, values)
}

/// Loads an 8/16-bit grayscale PGM or PNG, maps it linearly to `[0, 1]`
/// (white is one) and resamples it bilinearly onto `roi`. The top image row
/// maps to the largest `y`.
pub fn load_raster<T: Real>(path: impl AsRef<Path>, roi: &RoiSpec<T>) -> Result<ImageGrid<T>> {
    roi.validate()?;
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let img = reader.decode()?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values: Vec<f64> = match img {
        image::DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        image::DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        other => {
            return Err(Error::format(
                path.display().to_string(),
                format!("expected a grayscale image, found {:?}", other.color()),
            ))
        }
    };
    if w == 0 || h == 0 {
        return Err(Error::format(path.display().to_string(), "empty image"));
    }
    let m = roi.points;
    let sx = w as f64 / m as f64;
    let sy = h as f64 / m as f64;
    Ok(ImageGrid::from_fn(*roi, |r, c| {
        // pixel-centre alignment, flipped vertically
        let u = ((c as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
        let v = ((m - 1 - r) as f64 + 0.5) * sy - 0.5;
        let v = v.clamp(0.0, (h - 1) as f64);
        T::lit(bilinear(&values, h, w, v, u))
    }))
}
