use patrec::forward::{forward_project, simulate_point, PointSource, DEFAULT_PAD};
use patrec::phantom::{load_raster, make_disc, PhantomSpec};
use patrec::reconstruct::{reconstruct_bp, reconstruct_tr, BpOptions, Method, ReconstructionRequest};
use patrec::wavesolver::{SolverGrid, SolverSettings};
use patrec::{
    AcquisitionConfig, AcquisitionConfig64, Error, ImageGrid64, Point, Point64, RoiSpec, RoiSpec64, SourceSpectrum, SourceSpectrum64,
};

const OMEGA_MAX: f64 = 4e6;

fn ring(sensors: usize) -> AcquisitionConfig64 {
    AcquisitionConfig64::from_band(1500.0, 0.02, sensors, 3e-5, OMEGA_MAX)
}

fn argmax_pixel(image: &ImageGrid64) -> (usize, usize) {
    let (i, _) = image.argmax_abs();
    (i / image.points(), i % image.points())
}

#[test]
fn every_method_localises_a_point_source() {
    let config = ring(128);
    let source = Point64::new(0.003, -0.002);
    let data = simulate_point(&PointSource::new(source, SourceSpectrum64::hann(OMEGA_MAX)), &config, DEFAULT_PAD).unwrap();
    let roi = RoiSpec64::centered(0.02, 40);
    let (r0, c0) = roi.nearest(source).unwrap();
    for method in Method::ALL {
        let mut req = ReconstructionRequest::new(method, &data, roi);
        if method == Method::Tbp {
            req = req.with_mu(3e6);
        }
        let rec = req.run().unwrap();
        let (r, c) = argmax_pixel(&rec.image);
        assert!(r.abs_diff(r0) <= 1 && c.abs_diff(c0) <= 1, "{method}: ({r}, {c}) vs ({r0}, {c0})");
        assert!((rec.image.max_abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_precision_tracks_double_precision() {
    let source = (0.002, 0.001);
    let c64 = ring(16);
    let d64 = simulate_point(&PointSource::new(Point64::new(source.0, source.1), SourceSpectrum64::hann(OMEGA_MAX)), &c64, DEFAULT_PAD).unwrap();
    let b64 = reconstruct_bp(&d64, &RoiSpec64::centered(0.016, 24), &BpOptions::default()).unwrap();

    let c32 = AcquisitionConfig::<f32>::from_band(1500.0, 0.02, 16, 3e-5, OMEGA_MAX as f32);
    let spectrum = SourceSpectrum::<f32>::hann(OMEGA_MAX as f32);
    let d32 = simulate_point(&PointSource::new(Point::new(source.0 as f32, source.1 as f32), spectrum), &c32, DEFAULT_PAD).unwrap();
    let b32 = reconstruct_bp(&d32, &RoiSpec::<f32>::centered(0.016, 24), &BpOptions::default()).unwrap();

    let num: f64 = b64.image.values().iter().zip(b32.image.values()).map(|(a, b)| (a - *b as f64).powi(2)).sum();
    let den: f64 = b64.image.values().iter().map(|a| a * a).sum();
    assert!((num / den).sqrt() < 1e-3, "{}", (num / den).sqrt());
}

#[test]
fn disc_phantom_round_trip_correlates() {
    let config = ring(64);
    let roi = RoiSpec64::centered(0.016, 32);
    let disc = make_disc(Point64::new(0.001, 0.0), 0.003, &roi).unwrap();
    let data = forward_project(&disc, &config, &SourceSpectrum64::hann(OMEGA_MAX), DEFAULT_PAD).unwrap();
    let bp = reconstruct_bp(&data, &roi, &BpOptions::default()).unwrap();
    let r = patrec::analysis::pearson_correlation(bp.image.values(), disc.values()).unwrap();
    assert!(r > 0.5, "{r}");
}

#[test]
fn phantom_outside_the_array_is_rejected() {
    let roi = RoiSpec64::centered(0.05, 20);
    let spec = PhantomSpec::Point { x: 0.021, y: 0.0, amplitude: 1.0 };
    assert!(matches!(spec.build(&roi, 0.02), Err(Error::Geometry(_))));
    assert!(spec.build(&roi, 0.03).is_ok());
}

#[test]
fn raster_import_reads_grey_levels_and_rejects_colour() {
    let dir = tempfile::tempdir().unwrap();
    let roi = RoiSpec64::centered(0.01, 8);

    let grey = dir.path().join("grey.png");
    image::GrayImage::from_fn(8, 8, |x, _| image::Luma([if x < 4 { 0 } else { 255 }])).save(&grey).unwrap();
    let g = load_raster(&grey, &roi).unwrap();
    assert_eq!(g.get(3, 0), 0.0);
    assert_eq!(g.get(3, 7), 1.0);

    let deep = dir.path().join("deep.png");
    image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_fn(8, 8, |_, y| image::Luma([if y == 0 { 65535 } else { 0 }]))
        .save(&deep)
        .unwrap();
    let d = load_raster(&deep, &roi).unwrap();
    // the top image row is the largest y, i.e. the last grid row
    assert_eq!(d.get(7, 3), 1.0);
    assert_eq!(d.get(0, 3), 0.0);

    let colour = dir.path().join("colour.png");
    image::RgbImage::new(8, 8).save(&colour).unwrap();
    assert!(load_raster(&colour, &roi).is_err());
    assert!(load_raster(dir.path().join("missing.png"), &roi).unwrap_err().is_io());
}

#[test]
fn solver_keeps_a_centred_blob_four_fold_symmetric() {
    let n = 64;
    let mut g = SolverGrid::<f64>::new(n, 1e-4, 8, 2e-8, 1500.0).unwrap();
    let p0: Vec<f64> = (0..n * n)
        .map(|i| {
            let p = g.node_position(i / n, i % n);
            (-(p.x * p.x + p.y * p.y) / (2.0 * 3e-4f64.powi(2))).exp()
        })
        .collect();
    g.set_initial_pressure(&p0).unwrap();
    for _ in 0..200 {
        g.step().unwrap();
    }
    let f = g.field();
    let h = n / 2;
    for d in 1..h {
        let v = f[h * n + h + d];
        for w in [f[h * n + h - d], f[(h + d) * n + h], f[(h - d) * n + h]] {
            assert!((v - w).abs() <= 1e-12 * f.iter().fold(0.0f64, |a, x| a.max(x.abs())));
        }
    }
}

#[test]
fn time_reversal_of_zero_data_is_zero() {
    let config = ring(16);
    let data = patrec::SensorData64::zeros(config);
    let tr = reconstruct_tr(&data, &RoiSpec64::centered(0.02, 16), &SolverSettings::default(), true).unwrap();
    assert_eq!(tr.image.count_nonzero(), 0);
}
