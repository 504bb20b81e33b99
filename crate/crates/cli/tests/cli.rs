use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
[acquisition]
radius = 0.02
sensors = 8
duration = 3.0e-5
omega_max = 4.0e6

[phantom]
kind = "point"
x = 0.002
y = -0.001

[roi]
side = 0.02
points = 32

[reconstruct]
methods = ["tr", "bp", "tbp"]
mu = 2.0e6
"#;

fn scenario(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn patrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patrec")).args(args).output().unwrap()
}

fn run(args: &[&str], s: &Path, out: &Path) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    patrec(&all)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_data_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&["simulate"], &s, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["sensor_data.csv", "phantom.csv", "phantom.pgm", "run.log"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let data: patrec::SensorData64 = patrec::io::read_sensor_csv(out.join("sensor_data.csv")).unwrap();
    assert_eq!(data.config().sensor_count, 8);
    assert!(!data.is_zero());
}

#[test]
fn empty_phantom_gives_zero_data_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("kind = \"point\"\nx = 0.002\ny = -0.001", "kind = \"empty\"");
    let s = scenario(dir.path(), &text);
    let out = dir.path().join("out");
    let o = run(&["simulate"], &s, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let data: patrec::SensorData64 = patrec::io::read_sensor_csv(out.join("sensor_data.csv")).unwrap();
    assert!(data.is_zero());
    assert!(stderr(&o).contains("empty"));
    // zero data reconstruct to a zero image
    let o = run(&["reconstruct", "--method", "bp"], &s, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let img: patrec::ImageGrid64 = patrec::io::read_image_csv(out.join("image_bp.csv")).unwrap();
    assert_eq!(img.count_nonzero(), 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    let missing = dir.path().join("nope.toml");
    assert_eq!(code(&run(&["simulate"], &missing, &out)), 1);
    assert_eq!(code(&run(&["reconstruct", "--method", "fbp"], &s, &out)), 1);
    assert_eq!(code(&patrec(&["frobnicate"])), 1);
    // no data yet
    let o = run(&["reconstruct", "--method", "bp"], &s, &out);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--pipeline"));
    // TBP with neither a bound nor a PPW target
    let no_mu = scenario(dir.path(), &SMALL.replace("mu = 2.0e6\n", ""));
    assert_eq!(code(&run(&["reconstruct", "--method", "tbp", "--pipeline"], &no_mu, &out)), 1);
    // invalid scenario content
    let bad = scenario(dir.path(), &SMALL.replace("radius = 0.02", "radius = -0.02"));
    assert_eq!(code(&run(&["simulate"], &bad, &out)), 1);
}

#[test]
fn io_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), SMALL);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = run(&["simulate"], &s, &blocker.join("out"));
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    let base = ["simulate", "--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let bin = env!("CARGO_BIN_EXE_patrec");
    let o = Command::new(bin).args(base).env("PATREC_THREADS", "0").output().unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(bin).args(base).env("PATREC_THREADS", "1").output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn pipeline_reconstruct_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&["reconstruct", "--pipeline"], &s, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for m in ["tr", "bp", "tbp"] {
        for ext in ["csv", "pgm", "json"] {
            assert!(out.join(format!("image_{m}.{ext}")).exists());
        }
    }
    let o = run(&["analyze"], &s, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert!(lines[0].starts_with("image,method,sensors,regime,fwhm_mm,peak"));
    assert_eq!(lines.len(), 4);
    for m in ["tr", "bp", "tbp"] {
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join(format!("report_{m}.json"))).unwrap()).unwrap();
        assert_eq!(report["method"], m);
        assert!(report["peak"].as_f64().unwrap() > 0.5);
        assert!(out.join(format!("profile_{m}.csv")).exists());
    }
}

#[test]
fn truth_image_has_unit_peak_and_grid_mismatch_fails() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    assert_eq!(code(&run(&["simulate"], &s, &out)), 0);
    let phantom = out.join("phantom.csv");
    let o = run(&["analyze", "--images", phantom.to_str().unwrap()], &s, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report_phantom.json")).unwrap()).unwrap();
    assert_eq!(report["peak"].as_f64().unwrap(), 1.0);

    let other = dir.path().join("other.csv");
    let grid = patrec::ImageGrid64::zeros(patrec::RoiSpec64::centered(0.02, 16));
    patrec::io::write_image_csv(&other, &grid).unwrap();
    assert_eq!(code(&run(&["analyze", "--images", other.to_str().unwrap()], &s, &out)), 1);
}

#[test]
fn sweep_writes_summary_and_rejects_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), SMALL);
    let out = dir.path().join("out");
    assert_eq!(code(&run(&["sweep"], &s, &out)), 1);
    let o = run(&["sweep", "--sensors", "4,8", "--method", "bp,tbp"], &s, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 2);
    assert!(out.join("n4/image_bp.csv").exists());
    assert!(out.join("n8/report_tbp.json").exists());
}

#[test]
fn single_entry_sweep_matches_reconstruct_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run(&["sweep", "--sensors", "8", "--method", "bp,tbp"], &s, &a)), 0);
    assert_eq!(code(&run(&["reconstruct", "--pipeline", "--method", "bp,tbp"], &s, &b)), 0);
    assert_eq!(code(&run(&["analyze", "--method", "bp,tbp"], &s, &b)), 0);
    for f in ["image_bp.csv", "image_tbp.csv", "image_tbp.json", "report_bp.json", "report_tbp.json"] {
        assert_eq!(
            std::fs::read(a.join("n8").join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace(
        "kind = \"point\"\nx = 0.002\ny = -0.001",
        "kind = \"vascular\"\nseed = 11",
    );
    let s = scenario(dir.path(), &text);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert_eq!(code(&run(&["analyze", "--pipeline", "--seed", "5"], &s, out)), 0);
    }
    let mut compared = 0;
    for entry in std::fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "run.log" {
            continue;
        }
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name:?} differs");
        compared += 1;
    }
    assert!(compared > 10);
    let log = std::fs::read_to_string(a.join("run.log")).unwrap();
    assert!(log.contains("scenario"));
}
