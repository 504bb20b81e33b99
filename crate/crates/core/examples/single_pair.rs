//! Single source/sensor pair on a coarse 512 x 512 grid: prints axial FWHM,
//! normalised peak and axial side-lobe level for BP, TBP and (with `--tr`) TR.
//!
//! `cargo run --release -p patrec --example single_pair -- [--tr]`

use patrec::analysis::{contrast_metrics, measure_fwhm_around, profile_side_lobe_db};
use patrec::forward::{simulate_point, PointSource, DEFAULT_PAD};
use patrec::reconstruct::{reconstruct_bp, reconstruct_tbp, reconstruct_tr, BpOptions, Reconstruction};
use patrec::wavesolver::SolverSettings;
use patrec::{AcquisitionConfig64, Point64, Result, RoiSpec64, SourceSpectrum64};

fn report(r: &Reconstruction<f64>, source: Point64) -> Result<()> {
    let spec = r.image.spec();
    let (row, col) = spec.nearest(source).expect("source inside ROI");
    let profile = r.image.row(row);
    let abs: Vec<f64> = profile.iter().map(|v| v.abs()).collect();
    let fwhm = measure_fwhm_around(&abs, spec.pitch(), col, 2);
    let side = profile_side_lobe_db(profile, col, 2)?;
    let contrast = contrast_metrics(&r.image, &[source])?;
    println!(
        "{:>4}: fwhm {:>8} mm  peak {:.3}  axial side lobe {:.1} dB  image side lobe {:.1} dB",
        r.method.name(),
        fwhm.map(|w| format!("{:.3}", w * 1e3)).unwrap_or_else(|e| e.to_string()),
        contrast.peak,
        side,
        contrast.side_lobe_db,
    );
    let lo = col.saturating_sub(8);
    let hi = (col + 9).min(profile.len());
    let values: Vec<String> = profile[lo..hi].iter().map(|v| format!("{v:+.2}")).collect();
    println!("      row {row}, cols {lo}..{hi}: {}", values.join(" "));
    Ok(())
}

fn main() -> Result<()> {
    let with_tr = std::env::args().any(|a| a == "--tr");
    let omega_max = 2.73e7;
    let config = AcquisitionConfig64::from_band(1500.0, 0.1, 1, 1.33e-4, omega_max).with_start_angle(std::f64::consts::PI);
    let source = Point64::new(-0.0125, 0.0);
    let spectrum = SourceSpectrum64::hann(omega_max);
    println!(
        "centre frequency {:.3e} rad/s, centre wavelength {:.3} mm",
        spectrum.center_frequency(),
        spectrum.center_wavelength(1500.0) * 1e3
    );
    let data = simulate_point(&PointSource::new(source, spectrum), &config, DEFAULT_PAD)?;
    let roi = RoiSpec64::centered(0.2, 512);
    let opts = BpOptions {
        normalize: true,
        ..BpOptions::default()
    };
    let t = std::time::Instant::now();
    let bp = reconstruct_bp(&data, &roi, &opts)?;
    println!("bp took {:.1} s, {} coincident pixel(s)", t.elapsed().as_secs_f64(), bp.coincident_pixels);
    report(&bp, source)?;
    let tbp = reconstruct_tbp(&data, &roi, 6.82e6, &opts)?;
    report(&tbp, source)?;
    if with_tr {
        let t = std::time::Instant::now();
        let tr = reconstruct_tr(&data, &roi, &SolverSettings::default(), true)?;
        println!("tr took {:.1} s", t.elapsed().as_secs_f64());
        report(&tr, source)?;
    }
    Ok(())
}
