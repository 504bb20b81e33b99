//! Scenario files: TOML with one section per pipeline stage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use patrec::phantom::PhantomSpec;
use patrec::reconstruct::{BpOptions, KernelEvaluation};
use patrec::wavesolver::SolverSettings;
use patrec::{validate_config, AcquisitionConfig64, Method, Point64, RoiSpec64, SourceSpectrum64, Window};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub acquisition: AcquisitionSection,
    #[serde(default)]
    pub source: SourceSection,
    pub phantom: PhantomSpec,
    pub roi: RoiSection,
    #[serde(default)]
    pub reconstruct: ReconstructSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionSection {
    #[serde(default = "default_sound_speed")]
    pub sound_speed: f64,
    pub radius: f64,
    pub sensors: usize,
    pub duration: f64,
    /// Band limit (rad/s); the time step follows as `0.5 pi / omega_max`.
    pub omega_max: Option<f64>,
    /// Explicit time step (s); the band limit follows as `0.5 pi / dt`.
    pub dt: Option<f64>,
    /// Angle of the first sensor, degrees counter-clockwise from +x.
    #[serde(default)]
    pub start_angle_deg: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    #[serde(default)]
    pub window: Window,
    /// Band limit of the source spectrum; defaults to the data band limit.
    pub omega_max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiSection {
    pub side: f64,
    pub points: usize,
    #[serde(default)]
    pub center: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    #[default]
    Auto,
    Direct,
    Tabulated,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructSection {
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    /// TBP truncation bound (rad/s).
    pub mu: Option<f64>,
    /// Target points per wavelength from which a TBP bound is recommended
    /// when `mu` is not given.
    pub ppw_target: Option<f64>,
    #[serde(default = "yes")]
    pub normalize: bool,
    /// Time-reversal solver resolution, grid points per shortest wavelength.
    #[serde(default = "default_solver_ppw")]
    pub solver_ppw: f64,
    #[serde(default)]
    pub kernel: KernelMode,
    /// Zero-padding factor of the data transforms.
    #[serde(default = "default_pad")]
    pub pad: usize,
}

impl Default for ReconstructSection {
    fn default() -> Self {
        Self {
            methods: all_methods(),
            mu: None,
            ppw_target: None,
            normalize: true,
            solver_ppw: default_solver_ppw(),
            kernel: KernelMode::default(),
            pad: default_pad(),
        }
    }
}

/// Reference values printed next to measured ones in comparison tables.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub fwhm_mm: Option<f64>,
    pub peak: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelMapSection {
    pub frequencies_hz: Vec<f64>,
    /// Side of the square map centred on the source (m).
    pub side: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    /// Source positions (m); defaults to the phantom's point sources.
    pub truth: Option<Vec<[f64; 2]>>,
    /// Reference values per method name.
    #[serde(default)]
    pub reference: BTreeMap<String, Reference>,
    pub kernel_maps: Option<KernelMapSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub sensors: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Also write 16-bit PGM renderings of images.
    #[serde(default = "yes")]
    pub pgm: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_out(),
            pgm: true,
        }
    }
}

fn default_sound_speed() -> f64 {
    patrec::acquisition::DEFAULT_SOUND_SPEED
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn yes() -> bool {
    true
}

fn default_solver_ppw() -> f64 {
    2.0
}

fn default_pad() -> usize {
    patrec::forward::DEFAULT_PAD
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Scenario {
    /// Reads and validates a scenario. Relative raster paths are resolved
    /// against the scenario's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::usage(format!("scenario file {} not found", path.display())),
            _ => CliError::io(path, e),
        })?;
        let mut scenario: Scenario =
            toml::from_str(&text).map_err(|e| CliError::usage(format!("invalid scenario {}: {e}", path.display())))?;
        if let PhantomSpec::Raster { path: raster, .. } = &mut scenario.phantom {
            if raster.is_relative() {
                if let Some(dir) = path.parent() {
                    *raster = dir.join(&*raster);
                }
            }
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> CliResult<()> {
        validate_config(&self.config()?)?;
        self.roi().validate()?;
        if self.reconstruct.methods.is_empty() {
            return Err(CliError::usage("reconstruct.methods is empty"));
        }
        if !(self.reconstruct.solver_ppw > 0.0) {
            return Err(CliError::usage("reconstruct.solver_ppw must be positive"));
        }
        if self.reconstruct.pad == 0 {
            return Err(CliError::usage("reconstruct.pad must be at least 1"));
        }
        for (name, v) in [("reconstruct.mu", self.reconstruct.mu), ("reconstruct.ppw_target", self.reconstruct.ppw_target)] {
            if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                return Err(CliError::usage(format!("{name} must be positive")));
            }
        }
        for key in self.analyze.reference.keys() {
            key.parse::<Method>()
                .map_err(|_| CliError::usage(format!("analyze.reference.{key} is not a method name")))?;
        }
        if let Some(maps) = &self.analyze.kernel_maps {
            if maps.frequencies_hz.is_empty() || maps.frequencies_hz.iter().any(|f| !(*f > 0.0)) {
                return Err(CliError::usage("analyze.kernel_maps.frequencies_hz must be positive and non-empty"));
            }
            if !(maps.side > 0.0) || maps.points == 0 {
                return Err(CliError::usage("analyze.kernel_maps needs a positive side and point count"));
            }
        }
        Ok(())
    }

    pub fn config(&self) -> CliResult<AcquisitionConfig64> {
        let a = &self.acquisition;
        let config = match (a.omega_max, a.dt) {
            (Some(w), None) => AcquisitionConfig64::from_band(a.sound_speed, a.radius, a.sensors, a.duration, w),
            (None, Some(dt)) => AcquisitionConfig64::new(a.sound_speed, a.radius, a.sensors, a.duration, dt),
            _ => return Err(CliError::usage("acquisition needs exactly one of omega_max and dt")),
        };
        Ok(config.with_start_angle(a.start_angle_deg.to_radians()))
    }

    pub fn roi(&self) -> RoiSpec64 {
        RoiSpec64 {
            side: self.roi.side,
            points: self.roi.points,
            center: Point64::new(self.roi.center[0], self.roi.center[1]),
        }
    }

    pub fn spectrum(&self, config: &AcquisitionConfig64) -> SourceSpectrum64 {
        SourceSpectrum64::new(self.source.omega_max.unwrap_or(config.omega_max), self.source.window)
    }

    pub fn truth(&self) -> Vec<Point64> {
        match &self.analyze.truth {
            Some(points) => points.iter().map(|p| Point64::new(p[0], p[1])).collect(),
            None => self.phantom.truth_positions(),
        }
    }

    pub fn bp_options(&self) -> BpOptions<f64> {
        BpOptions {
            evaluation: match self.reconstruct.kernel {
                KernelMode::Auto => KernelEvaluation::Auto,
                KernelMode::Direct => KernelEvaluation::Direct,
                KernelMode::Tabulated => KernelEvaluation::Tabulated {
                    oversample: patrec::reconstruct::DEFAULT_TABLE_OVERSAMPLE,
                },
            },
            pad: self.reconstruct.pad,
            taper: None,
            normalize: self.reconstruct.normalize,
        }
    }

    pub fn solver_settings(&self) -> SolverSettings<f64> {
        SolverSettings {
            points_per_wavelength: self.reconstruct.solver_ppw,
            ..SolverSettings::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[acquisition]
radius = 0.1
sensors = 1
duration = 1.33e-4
omega_max = 2.73e7
start_angle_deg = 180.0

[phantom]
kind = "point"
x = -0.0125
y = 0.0

[roi]
side = 0.2
points = 512
"#;

    #[test]
    fn minimal_scenario_defaults() {
        let s: Scenario = toml::from_str(MINIMAL).unwrap();
        s.validate().unwrap();
        let c = s.config().unwrap();
        assert_eq!(c.sound_speed, 1500.0);
        assert!((c.sensor_position(0).x + 0.1).abs() < 1e-15);
        assert_eq!(s.reconstruct.methods, Method::ALL.to_vec());
        assert_eq!(s.truth(), vec![Point64::new(-0.0125, 0.0)]);
        assert_eq!(s.output.dir, PathBuf::from("out"));
    }

    #[test]
    fn rejects_unknown_keys_and_double_band() {
        let extra = format!("{MINIMAL}\n[output]\ndirr = \"x\"\n");
        assert!(toml::from_str::<Scenario>(&extra).is_err());
        let both = MINIMAL.replace("omega_max = 2.73e7", "omega_max = 2.73e7\ndt = 1e-8");
        let s: Scenario = toml::from_str(&both).unwrap();
        assert!(s.validate().is_err());
    }

    #[test]
    fn rejects_unknown_method() {
        let bad = format!("{MINIMAL}\n[reconstruct]\nmethods = [\"fbp\"]\n");
        assert!(toml::from_str::<Scenario>(&bad).is_err());
    }
}
