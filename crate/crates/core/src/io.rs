//! File formats: sensor data (CSV and binary), images (16-bit PGM and CSV),
//! JSON sidecars and profile tables.
//!
//! Sensor CSV: a `#` line holding the acquisition config as JSON, then one
//! comma-separated row per sensor.
//!
//! Sensor binary: magic `PATD`, `u32` sensor count, `u32` sample count, `f64`
//! time step, then row-major `f64` samples, all little-endian.
//!
//! Image CSV: a `#` line holding the ROI spec as JSON, then one row per grid
//! row, row 0 first (smallest `y`). PGM files put the largest `y` at the top.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::acquisition::AcquisitionConfig;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{ImageGrid, RoiSpec};
use crate::scalar::Real;
use crate::signal::SensorData;

const MAGIC: &[u8; 4] = b"PATD";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn config_to_f64<T: Real>(c: &AcquisitionConfig<T>) -> AcquisitionConfig<f64> {
    AcquisitionConfig {
        sound_speed: c.sound_speed.as_f64(),
        radius: c.radius.as_f64(),
        sensor_count: c.sensor_count,
        duration: c.duration.as_f64(),
        dt: c.dt.as_f64(),
        omega_max: c.omega_max.as_f64(),
        start_angle: c.start_angle.as_f64(),
    }
}

fn config_from_f64<T: Real>(c: &AcquisitionConfig<f64>) -> AcquisitionConfig<T> {
    AcquisitionConfig {
        sound_speed: T::lit(c.sound_speed),
        radius: T::lit(c.radius),
        sensor_count: c.sensor_count,
        duration: T::lit(c.duration),
        dt: T::lit(c.dt),
        omega_max: T::lit(c.omega_max),
        start_angle: T::lit(c.start_angle),
    }
}

fn roi_to_f64<T: Real>(r: &RoiSpec<T>) -> RoiSpec<f64> {
    RoiSpec {
        side: r.side.as_f64(),
        points: r.points,
        center: Point::new(r.center.x.as_f64(), r.center.y.as_f64()),
    }
}

fn roi_from_f64<T: Real>(r: &RoiSpec<f64>) -> RoiSpec<T> {
    RoiSpec {
        side: T::lit(r.side),
        points: r.points,
        center: Point::new(T::lit(r.center.x), T::lit(r.center.y)),
    }
}

fn write_row<T: Real>(out: &mut impl Write, row: &[T]) -> std::io::Result<()> {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.write_all(b",")?;
        }
        write!(out, "{}", v.as_f64())?;
    }
    out.write_all(b"\n")
}

fn parse_row<T: Real>(line: &str, context: &str) -> Result<Vec<T>> {
    line.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map(T::lit)
                .map_err(|e| Error::format(context, format!("bad number '{}': {e}", s.trim())))
        })
        .collect()
}

/// Reads the JSON header line and the numeric rows of a CSV file.
fn read_csv_with_header<H: DeserializeOwned, T: Real>(path: &Path) -> Result<(H, Vec<Vec<T>>)> {
    let context = path.display().to_string();
    let mut lines = open(path)?.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::format(&context, "empty file"))?
        .map_err(|e| Error::io(path, e))?;
    let json = first
        .strip_prefix('#')
        .ok_or_else(|| Error::format(&context, "missing '#' header line"))?;
    let header: H = serde_json::from_str(json.trim()).map_err(|e| Error::format(&context, format!("header: {e}")))?;
    let mut rows = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(parse_row(&line, &context)?);
    }
    Ok((header, rows))
}

/// Writes sensor data as CSV with a JSON config header.
pub fn write_sensor_csv<T: Real>(path: impl AsRef<Path>, data: &SensorData<T>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let header = serde_json::to_string(&config_to_f64(data.config()))?;
    let body = (|| -> std::io::Result<()> {
        writeln!(out, "# {header}")?;
        for row in data.samples() {
            write_row(&mut out, row)?;
        }
        out.flush()
    })();
    body.map_err(|e| Error::io(path, e))
}

pub fn read_sensor_csv<T: Real>(path: impl AsRef<Path>) -> Result<SensorData<T>> {
    let path = path.as_ref();
    let (config, rows): (AcquisitionConfig<f64>, Vec<Vec<T>>) = read_csv_with_header(path)?;
    SensorData::new(config_from_f64(&config), rows)
}

/// Writes sensor data in the little-endian `PATD` layout.
pub fn write_sensor_binary<T: Real>(path: impl AsRef<Path>, data: &SensorData<T>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let to_u32 = |n: usize, what: &str| u32::try_from(n).map_err(|_| Error::format(path.display().to_string(), format!("{what} {n} exceeds u32")));
    let n = to_u32(data.samples().len(), "sensor count")?;
    let n_t = to_u32(data.n_samples(), "sample count")?;
    let body = (|| -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&n.to_le_bytes())?;
        out.write_all(&n_t.to_le_bytes())?;
        out.write_all(&data.config().dt.as_f64().to_le_bytes())?;
        for row in data.samples() {
            for v in row {
                out.write_all(&v.as_f64().to_le_bytes())?;
            }
        }
        out.flush()
    })();
    body.map_err(|e| Error::io(path, e))
}

/// Reads a `PATD` file; the sensor count, sample count and time step must
/// agree with `config`, which the layout does not store in full.
pub fn read_sensor_binary<T: Real>(path: impl AsRef<Path>, config: &AcquisitionConfig<T>) -> Result<SensorData<T>> {
    let path = path.as_ref();
    let context = path.display().to_string();
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(Error::format(&context, "missing PATD header"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let (n, n_t, dt) = (u32_at(4), u32_at(8), f64_at(12));
    let expected = 20 + 8 * n * n_t;
    if bytes.len() != expected {
        return Err(Error::format(&context, format!("expected {expected} bytes, found {}", bytes.len())));
    }
    if n != config.sensor_count || n_t != config.n_samples() {
        return Err(Error::format(
            &context,
            format!("file holds {n}x{n_t} samples, config expects {}x{}", config.sensor_count, config.n_samples()),
        ));
    }
    let cdt = config.dt.as_f64();
    if (dt - cdt).abs() > 1e-9 * cdt.abs() {
        return Err(Error::format(&context, format!("file time step {dt} differs from config {cdt}")));
    }
    let samples = (0..n)
        .map(|s| (0..n_t).map(|k| T::lit(f64_at(20 + 8 * (s * n_t + k)))).collect())
        .collect();
    SensorData::new(config.clone(), samples)
}

/// Writes an image as CSV with a JSON ROI header.
pub fn write_image_csv<T: Real>(path: impl AsRef<Path>, image: &ImageGrid<T>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let header = serde_json::to_string(&roi_to_f64(image.spec()))?;
    let body = (|| -> std::io::Result<()> {
        writeln!(out, "# {header}")?;
        for r in 0..image.points() {
            write_row(&mut out, image.row(r))?;
        }
        out.flush()
    })();
    body.map_err(|e| Error::io(path, e))
}

pub fn read_image_csv<T: Real>(path: impl AsRef<Path>) -> Result<ImageGrid<T>> {
    let path = path.as_ref();
    let (spec, rows): (RoiSpec<f64>, Vec<Vec<T>>) = read_csv_with_header(path)?;
    let spec = roi_from_f64(&spec);
    if rows.len() != spec.points || rows.iter().any(|r| r.len() != spec.points) {
        return Err(Error::format(path.display().to_string(), "row count or width differs from the header"));
    }
    ImageGrid::from_values(spec, rows.concat())
}

/// Min-max scaling of raw values to 16-bit levels, in file row order.
fn to_levels<T: Real>(values: &[T]) -> Vec<u16> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.as_f64()), hi.max(v.as_f64())));
    let span = hi - lo;
    values
        .iter()
        .map(|v| {
            if span > 0.0 {
                ((v.as_f64() - lo) / span * 65535.0).round() as u16
            } else {
                0
            }
        })
        .collect()
}

/// Binary PGM with maxval 65535 and big-endian samples. The image crate's
/// PNM encoder only emits 8-bit graymaps, so the header is written here.
fn write_pgm16(path: &Path, levels: Vec<u16>, width: usize, height: usize) -> Result<()> {
    if levels.len() != width * height {
        return Err(Error::ShapeMismatch("pixel count differs from image size".into()));
    }
    let mut out = create(path)?;
    let body = (|| -> std::io::Result<()> {
        write!(out, "P5\n{width} {height}\n65535\n")?;
        for v in &levels {
            out.write_all(&v.to_be_bytes())?;
        }
        out.flush()
    })();
    body.map_err(|e| Error::io(path, e))
}

/// Writes a 16-bit binary PGM, min-max scaled, largest `y` on top.
pub fn write_image_pgm<T: Real>(path: impl AsRef<Path>, image: &ImageGrid<T>) -> Result<()> {
    let m = image.points();
    let flipped: Vec<T> = (0..m).rev().flat_map(|r| image.row(r).iter().copied()).collect();
    write_pgm16(path.as_ref(), to_levels(&flipped), m, m)
}

/// Writes an `n x n` solver field as a 16-bit PGM (debug snapshots).
pub fn write_field_pgm<T: Real>(path: impl AsRef<Path>, field: &[T], n: usize) -> Result<()> {
    if field.len() != n * n {
        return Err(Error::ShapeMismatch(format!("{} values for a {n}x{n} field", field.len())));
    }
    let flipped: Vec<T> = (0..n).rev().flat_map(|r| field[r * n..(r + 1) * n].iter().copied()).collect();
    write_pgm16(path.as_ref(), to_levels(&flipped), n, n)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<S: Serialize + ?Sized>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let mut out = create(path)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_json<D: DeserializeOwned>(path: impl AsRef<Path>) -> Result<D> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes named columns of equal length as CSV.
pub fn write_columns_csv<T: Real>(path: impl AsRef<Path>, names: &[&str], columns: &[Vec<T>]) -> Result<()> {
    let path = path.as_ref();
    if names.len() != columns.len() {
        return Err(Error::ShapeMismatch(format!("{} names for {} columns", names.len(), columns.len())));
    }
    let len = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != len) {
        return Err(Error::ShapeMismatch("columns differ in length".into()));
    }
    let mut out = create(path)?;
    let body = (|| -> std::io::Result<()> {
        writeln!(out, "{}", names.join(","))?;
        let mut row = Vec::with_capacity(columns.len());
        for i in 0..len {
            row.clear();
            row.extend(columns.iter().map(|c| c[i]));
            write_row(&mut out, &row)?;
        }
        out.flush()
    })();
    body.map_err(|e| Error::io(path, e))
}

/// Writes a horizontal profile (`x`, value) through `row` of an image.
pub fn write_profile_csv<T: Real>(path: impl AsRef<Path>, image: &ImageGrid<T>, row: usize) -> Result<()> {
    if row >= image.points() {
        return Err(Error::InvalidArgument(format!("row {row} outside a {}-row image", image.points())));
    }
    let spec = image.spec();
    let xs = (0..image.points()).map(|c| spec.coord_x(c)).collect();
    write_columns_csv(path, &["x", "value"], &[xs, image.row(row).to_vec()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> SensorData<f64> {
        let config = AcquisitionConfig::from_band(1500.0, 0.02, 3, 1e-6, 5e6);
        let n_t = config.n_samples();
        let rows = (0..3).map(|s| (0..n_t).map(|k| (s * n_t + k) as f64 * 0.1 - 1.0 / 3.0).collect()).collect();
        SensorData::new(config, rows).unwrap()
    }

    #[test]
    fn sensor_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        let d = data();
        write_sensor_csv(&p, &d).unwrap();
        assert_eq!(read_sensor_csv::<f64>(&p).unwrap(), d);
        // derived time steps must survive the JSON header bit for bit
        for omega in [4e6, 1.82e7, 2.73e7, 3.3e6] {
            let config = AcquisitionConfig::from_band(1500.0, 0.02, 1, 1e-6, omega).with_start_angle(std::f64::consts::PI);
            let zeros = SensorData::zeros(config.clone());
            write_sensor_csv(&p, &zeros).unwrap();
            assert_eq!(read_sensor_csv::<f64>(&p).unwrap().config(), &config);
        }
    }

    #[test]
    fn sensor_binary_round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.bin");
        let d = data();
        write_sensor_binary(&p, &d).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..4], b"PATD");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 20 + 8 * 3 * d.n_samples());
        assert_eq!(read_sensor_binary(&p, d.config()).unwrap(), d);
        let other = d.config().clone().with_sensor_count(4);
        assert!(read_sensor_binary(&p, &other).is_err());
    }

    #[test]
    fn image_csv_and_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let spec = RoiSpec::centered(0.01, 5);
        let img = ImageGrid::from_fn(spec, |r, c| r as f64 - 0.5 * c as f64);
        let p = dir.path().join("i.csv");
        write_image_csv(&p, &img).unwrap();
        assert_eq!(read_image_csv::<f64>(&p).unwrap(), img);
        let q = dir.path().join("i.pgm");
        write_image_pgm(&q, &img).unwrap();
        let back = image::open(&q).unwrap().into_luma16();
        assert_eq!(back.dimensions(), (5, 5));
        // top-left of the file is the last row, first column: the maximum
        assert_eq!(back.get_pixel(0, 0)[0], 65535);
        assert_eq!(back.get_pixel(4, 4)[0], 0);
    }

    #[test]
    fn missing_file_is_io_error() {
        let e = read_sensor_csv::<f64>("/nonexistent/x.csv").unwrap_err();
        assert!(e.is_io());
    }
}
