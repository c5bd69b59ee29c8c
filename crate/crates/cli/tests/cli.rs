use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn elastica(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastica")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_circle(dir: &Path, name: &str, r: f64) {
    let pts: Vec<[f64; 2]> = (0..1024).map(|i| TAU * i as f64 / 1024.0).map(|a| [r * a.cos(), r * a.sin()]).collect();
    fs::write(dir.join(name), json!({ "points": pts }).to_string()).unwrap();
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn energy_curve_of_unit_circle() {
    let dir = tempfile::tempdir().unwrap();
    write_circle(dir.path(), "circle.json", 1.0);
    let o = elastica(dir.path(), &["energy-curve", "circle.json", "--p", "2", "-o", "e.json"]);
    assert!(o.status.success());
    let total: f64 = stdout(&o).trim().parse().unwrap();
    assert!((total - 2.0 * TAU).abs() < 1e-2, "{total}");
    let v = read(dir.path(), "e.json");
    assert_eq!(v["format"], 1);
    assert_eq!(v["command"], "energy-curve");
}

#[test]
fn savare_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = elastica(dir.path(), &["savare", "--n", "3", "-o", "s.json"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1");
    let v = read(dir.path(), "s.json");
    assert_eq!(v["report"]["energy_below_three_halves"], true);
    assert_eq!(v["report"]["counts_in_one_three"], true);
    let gaps: Vec<f64> = v["report"]["weak"].as_array().unwrap().iter().filter(|r| r["test"] == "t").map(|r| r["gap"].as_f64().unwrap()).collect();
    assert!((gaps[1] / gaps[0] - 0.5).abs() < 0.1, "{gaps:?}");
}

#[test]
fn gallery_honours_fixture_dir_and_check_family_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_elastica"))
        .current_dir(dir.path())
        .env("ELASTICA_FIXTURES", dir.path().join("fx"))
        .args(["gallery", "example-one"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fx = dir.path().join("fx");
    assert!(fx.join("figEF.pgm").exists());
    let o = elastica(&fx, &["check-family", "fig5_gamma1_gamma2.json", "figEF.pgm", "-o", "v.json"]);
    assert_eq!(o.status.code(), Some(0));
    let summary: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(summary["condition_iii"], "fail");
    assert_eq!(summary["failures"], json!(["condition_iii"]));
    let v = read(&fx, "v.json");
    assert_eq!(v["format"], 1);
    // The verdict reloads into the library type.
    let _: elastica::nesting::NestingVerdict<f64> = serde_json::from_value(v["verdict"].clone()).unwrap();
    let o = elastica(&fx, &["check-family", "fig5_gamma3_gamma2.json", "figEF.pgm"]);
    let summary: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(summary["is_member"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write_circle(dir.path(), "circle.json", 1.0);
    let bad_params = elastica(dir.path(), &["energy-curve", "circle.json", "--p", "0.5"]);
    assert_eq!(bad_params.status.code(), Some(2));
    let missing = elastica(dir.path(), &["energy-curve", "nope.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.json"));
    let collapse = elastica(dir.path(), &["offset", "circle.json", "--delta", "-1.5"]);
    assert_eq!(collapse.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&collapse.stderr).contains("offset_curve"));
    let unknown = elastica(dir.path(), &["gallery", "nope"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn offset_output_reloads() {
    let dir = tempfile::tempdir().unwrap();
    write_circle(dir.path(), "circle.json", 2.0);
    let o = elastica(dir.path(), &["offset", "circle.json", "--delta", "0.5", "-o", "off.json"]);
    assert!(o.status.success());
    let v = read(dir.path(), "off.json");
    let c: elastica::Curve64 = serde_json::from_value(v["curve"].clone()).unwrap();
    assert!((c.length() - TAU * 2.5).abs() < 1e-2);
    let predicted: f64 = stdout(&o).trim().parse().unwrap();
    assert!((predicted - (TAU * 2.5 + TAU / 2.5)).abs() < 1e-2);
}

#[test]
fn image_energies_are_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    write_circle(dir.path(), "circle.json", 1.0);
    let o = elastica(dir.path(), &["smooth", "circle.json", "--collar", "0.3", "--n", "256", "--image", "disk.pgm", "-o", "smooth.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f: f64 = stdout(&o).trim().parse().unwrap();
    assert!((f - 2.0 * TAU).abs() < 0.05 * 2.0 * TAU, "{f}");
    let one = elastica(dir.path(), &["--threads", "1", "energy-image", "disk.pgm", "-o", "one.json"]);
    let four = elastica(dir.path(), &["--threads", "4", "energy-image", "disk.pgm", "-o", "four.json"]);
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(fs::read(dir.path().join("one.json")).unwrap(), fs::read(dir.path().join("four.json")).unwrap());
    let csv = elastica(dir.path(), &["energy-image", "disk.pgm", "-o", "levels.csv"]);
    assert!(csv.status.success());
    assert!(fs::read_to_string(dir.path().join("levels.csv")).unwrap().lines().count() > 64);
}

#[test]
fn relaxed_and_clip_on_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["mirrored-arcs", "drop-in-domain"] {
        assert!(elastica(dir.path(), &["gallery", name, "-o", "."]).status.success());
    }
    let o = elastica(dir.path(), &["relaxed-cusped", "fig6_mirrored_arcs.json"]);
    let total: f64 = stdout(&o).trim().parse().unwrap();
    assert!((total - (8.0 * TAU / 6.0 + 2.0)).abs() < 1e-2, "{total}");
    let o = elastica(dir.path(), &["relaxed-cusped", "fig10_drop.json", "-o", "r.json"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "inf");
    assert_eq!(read(dir.path(), "r.json")["finite"], false);
    let o = elastica(dir.path(), &["clip", "fig10_curve.json", "fig10_omega.json"]);
    assert!(o.status.success());
    assert!(stdout(&o).trim().parse::<f64>().unwrap().is_finite());
}
