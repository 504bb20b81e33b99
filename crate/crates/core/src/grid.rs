//! Square region-of-interest rasters.
//!
//! Node `j` along an axis sits at `center + (j - floor(M/2)) * pitch`, so for
//! even `M` the centre node lies exactly on the ROI centre. Values are stored
//! row-major with the row index running along `y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Real;

/// Geometry of a square ROI raster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiSpec<T> {
    /// Side length `L` (m).
    pub side: T,
    /// Points per side `M`.
    pub points: usize,
    /// ROI centre (m).
    pub center: Point<T>,
}

impl<T: Real> RoiSpec<T> {
    pub fn centered(side: T, points: usize) -> Self {
        Self {
            side,
            points,
            center: Point::origin(),
        }
    }

    /// Pixel pitch `L / M`.
    pub fn pitch(&self) -> T {
        self.side / T::from_usize_lossy(self.points)
    }

    fn offset(&self) -> T {
        T::from_usize_lossy(self.points / 2)
    }

    pub fn coord_x(&self, col: usize) -> T {
        self.center.x + (T::from_usize_lossy(col) - self.offset()) * self.pitch()
    }

    pub fn coord_y(&self, row: usize) -> T {
        self.center.y + (T::from_usize_lossy(row) - self.offset()) * self.pitch()
    }

    pub fn position(&self, row: usize, col: usize) -> Point<T> {
        Point::new(self.coord_x(col), self.coord_y(row))
    }

    /// Fractional (row, col) index of a position.
    pub fn fractional_index(&self, p: Point<T>) -> (T, T) {
        let h = self.pitch();
        ((p.y - self.center.y) / h + self.offset(), (p.x - self.center.x) / h + self.offset())
    }

    /// True when `p` lies in the nominal square `center +- L/2`.
    pub fn contains(&self, p: Point<T>) -> bool {
        let half = self.side * T::lit(0.5);
        (p.x - self.center.x).abs() <= half && (p.y - self.center.y).abs() <= half
    }

    /// Nearest pixel to `p`, if `p` lies inside the ROI.
    pub fn nearest(&self, p: Point<T>) -> Option<(usize, usize)> {
        if !p.is_finite() || !self.contains(p) {
            return None;
        }
        let (r, c) = self.fractional_index(p);
        let clamp = |v: T| {
            let i = v.round().max(T::zero()).to_usize().unwrap_or(0);
            i.min(self.points - 1)
        };
        Some((clamp(r), clamp(c)))
    }

    /// Largest distance from the origin to any ROI node.
    pub fn max_radius(&self) -> T {
        let mut r = T::zero();
        for &row in &[0, self.points - 1] {
            for &col in &[0, self.points - 1] {
                r = r.max(self.position(row, col).norm());
            }
        }
        r
    }

    pub fn len(&self) -> usize {
        self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 || !(self.side.is_finite() && self.side > T::zero()) || !self.center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ROI needs positive side and point count, got side {} with {} points",
                self.side, self.points
            )));
        }
        Ok(())
    }
}

/// Raster of pixel values over a [`RoiSpec`]: an initial-pressure phantom or a
/// reconstructed image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid<T> {
    spec: RoiSpec<T>,
    values: Vec<T>,
}

impl<T: Real> ImageGrid<T> {
    pub fn zeros(spec: RoiSpec<T>) -> Self {
        Self {
            values: vec![T::zero(); spec.len()],
            spec,
        }
    }

    pub fn from_values(spec: RoiSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                spec.points,
                spec.points
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: RoiSpec<T>, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let m = spec.points;
        let values = (0..m * m).map(|i| f(i / m, i % m)).collect();
        Self { spec, values }
    }

    pub fn spec(&self) -> &RoiSpec<T> {
        &self.spec
    }

    pub fn points(&self) -> usize {
        self.spec.points
    }

    pub fn pitch(&self) -> T {
        self.spec.pitch()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.spec.points + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: T) {
        let m = self.spec.points;
        self.values[row * m + col] = v;
    }

    pub fn row(&self, row: usize) -> &[T] {
        let m = self.spec.points;
        &self.values[row * m..(row + 1) * m]
    }

    pub fn column(&self, col: usize) -> Vec<T> {
        (0..self.spec.points).map(|r| self.get(r, col)).collect()
    }

    /// Index and value of the largest `|value|`; ties resolve to the first
    /// pixel in row-major order.
    pub fn argmax_abs(&self) -> (usize, T) {
        let mut best = (0, T::zero());
        for (i, &v) in self.values.iter().enumerate() {
            if v.abs() > best.1 {
                best = (i, v.abs());
            }
        }
        best
    }

    pub fn max_abs(&self) -> T {
        self.argmax_abs().1
    }

    /// Divides by the maximum absolute value. Returns the divisor (one for an
    /// all-zero image, which is left untouched).
    pub fn normalize(&mut self) -> T {
        let m = self.max_abs();
        if m > T::zero() {
            let inv = m.recip();
            self.values.iter_mut().for_each(|v| *v = *v * inv);
            m
        } else {
            T::one()
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v != T::zero()).count()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Bilinear interpolation at `p`; zero outside the node hull.
    pub fn sample_bilinear(&self, p: Point<T>) -> T {
        let (r, c) = self.spec.fractional_index(p);
        bilinear(&self.values, self.spec.points, self.spec.points, r, c)
    }

    /// Nonzero pixels as `(position, value)`, row-major.
    pub fn nonzero_pixels(&self) -> Vec<(Point<T>, T)> {
        let m = self.spec.points;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, &v)| (self.spec.position(i / m, i % m), v))
            .collect()
    }

    pub fn l2_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
    }

    /// `||self - other|| / ||other||`.
    pub fn relative_l2(&self, other: &Self) -> T {
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
            .sqrt();
        let denom = other.l2_norm();
        if denom > T::zero() {
            diff / denom
        } else {
            diff
        }
    }
}

/// Bilinear interpolation on a row-major `rows x cols` array at fractional
/// index `(r, c)`. Zero outside the array.
pub(crate) fn bilinear<T: Real>(values: &[T], rows: usize, cols: usize, r: T, c: T) -> T {
    if !(r >= T::zero() && c >= T::zero()) {
        return T::zero();
    }
    let r0 = r.floor().to_usize().unwrap_or(usize::MAX);
    let c0 = c.floor().to_usize().unwrap_or(usize::MAX);
    if r0 >= rows || c0 >= cols {
        return T::zero();
    }
    let fr = r - T::from_usize_lossy(r0);
    let fc = c - T::from_usize_lossy(c0);
    let r1 = (r0 + 1).min(rows - 1);
    let c1 = (c0 + 1).min(cols - 1);
    let at = |i: usize, j: usize| values[i * cols + j];
    let top = at(r0, c0) * (T::one() - fc) + at(r0, c1) * fc;
    let bottom = at(r1, c0) * (T::one() - fc) + at(r1, c1) * fc;
    top * (T::one() - fr) + bottom * fr
}
