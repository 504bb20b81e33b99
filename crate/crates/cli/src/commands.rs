//! The four verbs. Every output except `run.log` is a deterministic function
//! of the scenario and flags.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use patrec::analysis::{
    intensity_profile_db, support_peak_position, traverse_time, KernelKind, PairConfiguration, QualityReport, Regime,
};
use patrec::forward::forward_project;
use patrec::phantom::PhantomSpec;
use patrec::reconstruct::{recommend_mu, reconstruct_bp, reconstruct_tbp, reconstruct_tr, Reconstruction};
use patrec::{io, AcquisitionConfig64, ImageGrid64, Method, Point64, RoiSpec64, SensorData64, SourceSpectrum64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scenario::Scenario;
use crate::{logging, AnalyzeArgs, CommonArgs, ReconstructArgs};

pub const DATA_FILE: &str = "sensor_data.csv";
pub const PHANTOM_FILE: &str = "phantom";
pub const COMPARISON_FILE: &str = "comparison.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Scenario with command-line overrides applied.
struct Context {
    scenario: Scenario,
    out: PathBuf,
    config: AcquisitionConfig64,
    roi: RoiSpec64,
    spectrum: SourceSpectrum64,
}

impl Context {
    /// `single_count`: whether `--sensors` overrides the scenario's count
    /// (one value) rather than listing sweep entries.
    fn new(args: &CommonArgs, single_count: bool) -> CliResult<Self> {
        let mut scenario = Scenario::load(&args.scenario)?;
        let out = args.out.clone().unwrap_or_else(|| scenario.output.dir.clone());
        logging::init(&out)?;
        info!("scenario {}", args.scenario.display());
        if let Some(seed) = args.seed {
            match &mut scenario.phantom {
                PhantomSpec::Vascular { seed: s, .. } => *s = seed,
                _ => warn!("--seed ignored: the phantom is not procedural"),
            }
        }
        let mut config = scenario.config()?;
        if single_count {
            match args.sensors.as_slice() {
                [] => {}
                [n] => config = config.with_sensor_count(*n),
                _ => return Err(CliError::usage("--sensors takes a single count outside a sweep")),
            }
        }
        patrec::validate_config(&config)?;
        let roi = scenario.roi();
        let spectrum = scenario.spectrum(&config);
        Ok(Self {
            scenario,
            out,
            config,
            roi,
            spectrum,
        })
    }

    fn phantom(&self) -> CliResult<ImageGrid64> {
        let phantom = self.scenario.phantom.build(&self.roi, self.config.radius)?;
        if phantom.count_nonzero() == 0 {
            warn!("phantom is empty; sensor data will be zero");
        }
        Ok(phantom)
    }

    fn methods(&self, args: &ReconstructArgs) -> Vec<Method> {
        if args.method.is_empty() {
            self.scenario.reconstruct.methods.clone()
        } else {
            args.method.clone()
        }
    }

    /// TBP bound: `--mu`, the scenario's `mu`, or a recommendation from the
    /// PPW target, capped at the data band limit.
    fn mu(&self, args: &ReconstructArgs, config: &AcquisitionConfig64) -> CliResult<f64> {
        let explicit = args.mu.or(self.scenario.reconstruct.mu);
        let mu = match explicit {
            Some(mu) => mu,
            None => {
                let target = args.ppw_target.or(self.scenario.reconstruct.ppw_target).ok_or_else(|| {
                    CliError::usage("TBP needs --mu, reconstruct.mu, --ppw-target or reconstruct.ppw_target")
                })?;
                let mu = recommend_mu(self.roi.points, traverse_time(self.roi.side, config.sound_speed), target)?;
                info!("recommended TBP bound {mu:.4e} rad/s for {target} points per wavelength");
                mu
            }
        };
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(CliError::usage(format!("TBP bound must be positive, got {mu}")));
        }
        if mu > config.omega_max {
            if explicit.is_some() {
                return Err(CliError::usage(format!(
                    "TBP bound {mu:.4e} exceeds the data band limit {:.4e}",
                    config.omega_max
                )));
            }
            warn!("recommended TBP bound exceeds the band limit; using {:.4e}", config.omega_max);
            return Ok(config.omega_max);
        }
        Ok(mu)
    }

    fn simulate(&self, phantom: &ImageGrid64, config: &AcquisitionConfig64) -> CliResult<SensorData64> {
        let t = Instant::now();
        let data = forward_project(phantom, config, &self.spectrum, self.scenario.reconstruct.pad)?;
        info!(
            "simulated {} sensors x {} samples from {} source pixels in {:.2} s",
            config.sensor_count,
            data.n_samples(),
            phantom.count_nonzero(),
            t.elapsed().as_secs_f64()
        );
        Ok(data)
    }

    fn reconstruct(&self, data: &SensorData64, method: Method, mu: Option<f64>) -> CliResult<Reconstruction<f64>> {
        let t = Instant::now();
        let opts = self.scenario.bp_options();
        let rec = match method {
            Method::Bp => reconstruct_bp(data, &self.roi, &opts)?,
            Method::Tbp => {
                let mu = mu.ok_or_else(|| CliError::usage("TBP requires a truncation bound"))?;
                reconstruct_tbp(data, &self.roi, mu, &opts)?
            }
            Method::Tr => reconstruct_tr(data, &self.roi, &self.scenario.solver_settings(), opts.normalize)?,
        };
        info!(
            "{method} reconstruction with {} sensors in {:.2} s",
            data.config().sensor_count,
            t.elapsed().as_secs_f64()
        );
        if rec.coincident_pixels > 0 {
            warn!("{method}: {} pixel(s) coincide with a sensor and were set to zero", rec.coincident_pixels);
        }
        Ok(rec)
    }

    fn write_image(&self, path_stem: &Path, image: &ImageGrid64) -> CliResult<()> {
        io::write_image_csv(path_stem.with_extension("csv"), image)?;
        if self.scenario.output.pgm {
            io::write_image_pgm(path_stem.with_extension("pgm"), image)?;
        }
        Ok(())
    }
}

/// Provenance written next to each reconstructed image.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ImageSidecar {
    method: Method,
    mu: Option<f64>,
    normalization: f64,
    coincident_pixels: usize,
    roi: RoiSpec64,
    acquisition: AcquisitionConfig64,
    solver_points_per_wavelength: Option<f64>,
}

/// One analysed image.
#[derive(Debug, Clone, Serialize)]
struct AnalysisRecord {
    image: String,
    method: Option<Method>,
    mu: Option<f64>,
    sensors: usize,
    #[serde(flatten)]
    report: QualityReport<f64>,
}

#[derive(Debug, Serialize)]
struct ComparisonRow {
    image: String,
    method: String,
    sensors: usize,
    regime: Regime,
    fwhm_mm: Option<f64>,
    peak: f64,
    side_lobe_db: f64,
    ppw: f64,
    correlation: Option<f64>,
    reference_fwhm_mm: Option<f64>,
    reference_peak: Option<f64>,
}

fn image_stem(dir: &Path, method: Method) -> PathBuf {
    dir.join(format!("image_{method}"))
}

fn write_reconstruction(ctx: &Context, dir: &Path, rec: &Reconstruction<f64>, config: &AcquisitionConfig64) -> CliResult<PathBuf> {
    let stem = image_stem(dir, rec.method);
    ctx.write_image(&stem, &rec.image)?;
    let sidecar = ImageSidecar {
        method: rec.method,
        mu: rec.mu,
        normalization: rec.normalization,
        coincident_pixels: rec.coincident_pixels,
        roi: *rec.image.spec(),
        acquisition: config.clone(),
        solver_points_per_wavelength: (rec.method == Method::Tr).then_some(ctx.scenario.reconstruct.solver_ppw),
    };
    io::write_json(stem.with_extension("json"), &sidecar)?;
    Ok(stem.with_extension("csv"))
}

fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> CliResult<()> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Quality report of one image, its profile CSV through the analysed source,
/// and the comparison row.
fn assess(
    ctx: &Context,
    image: &ImageGrid64,
    phantom: &ImageGrid64,
    sidecar: Option<&ImageSidecar>,
    label: &str,
    dir: &Path,
) -> CliResult<(AnalysisRecord, ComparisonRow)> {
    if image.spec() != phantom.spec() {
        return Err(CliError::usage(format!(
            "image {label} is on a {} x {} grid over {} m, the scenario ROI is {} x {} over {} m",
            image.points(),
            image.points(),
            image.spec().side,
            phantom.points(),
            phantom.points(),
            phantom.spec().side
        )));
    }
    let config = sidecar.map_or(&ctx.config, |s| &s.acquisition);
    let method = sidecar.map(|s| s.method);
    let mu = sidecar.and_then(|s| s.mu);
    let omega = mu.unwrap_or(config.omega_max);
    let truth = ctx.scenario.truth();
    let has_support = phantom.count_nonzero() > 0;
    let report = QualityReport::assess(image, &truth, has_support.then_some(phantom), config, omega)?;

    let focus = match truth.first() {
        Some(&p) => Some(p),
        None if has_support => Some(support_peak_position(image, phantom)?),
        None => None,
    };
    if let Some((row, _)) = focus.and_then(|p| image.spec().nearest(p)) {
        io::write_profile_csv(dir.join(format!("profile_{label}.csv")), image, row)?;
    }

    let reference = method.and_then(|m| ctx.scenario.analyze.reference.get(m.name())).copied().unwrap_or_default();
    let row = ComparisonRow {
        image: label.to_string(),
        method: method.map_or_else(|| "-".to_string(), |m| m.to_string()),
        sensors: config.sensor_count,
        regime: report.regime,
        fwhm_mm: report.fwhm.map(|w| w * 1e3),
        peak: report.peak,
        side_lobe_db: report.side_lobe_level,
        ppw: report.ppw,
        correlation: report.correlation,
        reference_fwhm_mm: reference.fwhm_mm,
        reference_peak: reference.peak,
    };
    let record = AnalysisRecord {
        image: label.to_string(),
        method,
        mu,
        sensors: config.sensor_count,
        report,
    };
    io::write_json(dir.join(format!("report_{label}.json")), &record)?;
    Ok((record, row))
}

/// Intensity maps of the leading-order kernels around the first source,
/// for the scenario's first sensor.
fn write_kernel_maps(ctx: &Context) -> CliResult<()> {
    let Some(maps) = &ctx.scenario.analyze.kernel_maps else {
        return Ok(());
    };
    let Some(&source) = ctx.scenario.truth().first() else {
        return Err(CliError::usage("kernel maps need a point source (phantom point/disc or analyze.truth)"));
    };
    let pair = PairConfiguration::new(source, ctx.config.sensor_position(0), ctx.config.sound_speed)?;
    let spec = RoiSpec64 {
        side: maps.side,
        points: maps.points,
        center: source,
    };
    let points: Vec<Point64> = (0..spec.len()).map(|i| spec.position(i / spec.points, i % spec.points)).collect();
    let omegas: Vec<f64> = maps.frequencies_hz.iter().map(|f| f * std::f64::consts::TAU).collect();
    for (kind, name) in [(KernelKind::Bp, "bp"), (KernelKind::TrMinusBp, "tr_minus_bp")] {
        let rows = intensity_profile_db(kind, &points, &omegas, &pair)?;
        for (values, f) in rows.into_iter().zip(&maps.frequencies_hz) {
            let image = ImageGrid64::from_values(spec, values)?;
            ctx.write_image(&ctx.out.join(format!("kernel_{name}_{:.0}hz_db", f)), &image)?;
        }
    }
    info!("kernel maps written for {} frequencies", omegas.len());
    Ok(())
}

pub fn simulate(args: &CommonArgs) -> CliResult<()> {
    let ctx = Context::new(args, true)?;
    let phantom = ctx.phantom()?;
    ctx.write_image(&ctx.out.join(PHANTOM_FILE), &phantom)?;
    let data = ctx.simulate(&phantom, &ctx.config)?;
    io::write_sensor_csv(ctx.out.join(DATA_FILE), &data)?;
    info!("wrote {}", ctx.out.join(DATA_FILE).display());
    Ok(())
}

fn load_or_simulate(ctx: &Context, pipeline: bool) -> CliResult<SensorData64> {
    if pipeline {
        let phantom = ctx.phantom()?;
        ctx.write_image(&ctx.out.join(PHANTOM_FILE), &phantom)?;
        let data = ctx.simulate(&phantom, &ctx.config)?;
        io::write_sensor_csv(ctx.out.join(DATA_FILE), &data)?;
        return Ok(data);
    }
    let path = ctx.out.join(DATA_FILE);
    if !path.exists() {
        return Err(CliError::usage(format!(
            "no sensor data at {}; run `simulate` first or pass --pipeline",
            path.display()
        )));
    }
    let data: SensorData64 = io::read_sensor_csv(&path)?;
    if data.config() != &ctx.config {
        return Err(CliError::usage(format!(
            "{} was simulated for a different acquisition; rerun `simulate` or pass --pipeline",
            path.display()
        )));
    }
    Ok(data)
}

fn reconstruct_all(ctx: &Context, args: &ReconstructArgs, data: &SensorData64, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let methods = ctx.methods(args);
    let mu = if methods.contains(&Method::Tbp) {
        Some(ctx.mu(args, data.config())?)
    } else {
        None
    };
    methods
        .iter()
        .map(|&m| {
            let rec = ctx.reconstruct(data, m, mu)?;
            write_reconstruction(ctx, dir, &rec, data.config())
        })
        .collect()
}

pub fn reconstruct(args: &ReconstructArgs) -> CliResult<()> {
    let ctx = Context::new(&args.common, true)?;
    let data = load_or_simulate(&ctx, args.pipeline)?;
    reconstruct_all(&ctx, args, &data, &ctx.out)?;
    Ok(())
}

fn read_sidecar(image: &Path) -> CliResult<Option<ImageSidecar>> {
    let path = image.with_extension("json");
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(io::read_json(&path)?))
}

fn label_of(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    stem.strip_prefix("image_").map(str::to_string).unwrap_or(stem)
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let rargs = &args.reconstruct;
    let ctx = Context::new(&rargs.common, true)?;
    let images: Vec<PathBuf> = if rargs.pipeline {
        let data = load_or_simulate(&ctx, true)?;
        reconstruct_all(&ctx, rargs, &data, &ctx.out)?
    } else if !args.images.is_empty() {
        args.images.clone()
    } else {
        ctx.methods(rargs)
            .iter()
            .map(|&m| image_stem(&ctx.out, m).with_extension("csv"))
            .filter(|p| p.exists())
            .collect()
    };
    if images.is_empty() {
        return Err(CliError::usage(format!(
            "no images to analyse in {}; run `reconstruct` first, pass --images or --pipeline",
            ctx.out.display()
        )));
    }
    let phantom = ctx.phantom()?;
    let mut rows = Vec::new();
    for path in &images {
        if !path.exists() {
            return Err(CliError::usage(format!("image {} not found", path.display())));
        }
        let image: ImageGrid64 = io::read_image_csv(path)?;
        let sidecar = read_sidecar(path)?;
        let label = label_of(path);
        let (_, row) = assess(&ctx, &image, &phantom, sidecar.as_ref(), &label, &ctx.out)?;
        info!(
            "{label}: fwhm {} peak {:.3} side lobe {:.1} dB",
            row.fwhm_mm.map_or("unresolved".into(), |w| format!("{w:.3} mm")),
            row.peak,
            row.side_lobe_db
        );
        rows.push(row);
    }
    write_csv(&ctx.out.join(COMPARISON_FILE), &rows)?;
    write_kernel_maps(&ctx)?;
    Ok(())
}

pub fn sweep(args: &ReconstructArgs) -> CliResult<()> {
    let ctx = Context::new(&args.common, false)?;
    let counts = if args.common.sensors.is_empty() {
        ctx.scenario.sweep.sensors.clone()
    } else {
        args.common.sensors.clone()
    };
    if counts.is_empty() {
        return Err(CliError::usage("sweep needs sensor counts (--sensors or sweep.sensors)"));
    }
    let phantom = ctx.phantom()?;
    ctx.write_image(&ctx.out.join(PHANTOM_FILE), &phantom)?;
    let mut rows = Vec::new();
    for &n in &counts {
        let config = ctx.config.clone().with_sensor_count(n);
        patrec::validate_config(&config)?;
        let dir = ctx.out.join(format!("n{n}"));
        let data = ctx.simulate(&phantom, &config)?;
        for path in reconstruct_all(&ctx, args, &data, &dir)? {
            let image: ImageGrid64 = io::read_image_csv(&path)?;
            let sidecar = read_sidecar(&path)?;
            let (_, row) = assess(&ctx, &image, &phantom, sidecar.as_ref(), &label_of(&path), &dir)?;
            rows.push(row);
        }
    }
    write_csv(&ctx.out.join(SUMMARY_FILE), &rows)?;
    info!("sweep over {counts:?} sensors written to {}", ctx.out.display());
    Ok(())
}
