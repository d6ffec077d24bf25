use std::path::Path;
use std::process::{Command, Output};

use lifting_cli::io::{encode_cost_volume, write_image};
use lifting_core::image::Image;
use lifting_core::lifting::CostVolume;
use serde_json::Value;
use tempfile::TempDir;

fn lift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn error_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not json ({e}): {text}"))
}

fn read_report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn gradient_image(dir: &Path, name: &str, w: usize, h: usize, channels: usize) -> String {
    let data = (0..w * h * channels).map(|k| ((k * 37) % 101) as f64 / 100.0).collect();
    let path = dir.join(name);
    write_image(&path, &Image::new(w, h, channels, data).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn brachistochrone_writes_outputs_deterministically() {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = lift(&[
            "brachistochrone",
            "--grid",
            "9x6",
            "--max-iters",
            "3000",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for file in ["curve.csv", "history.csv", "report.json"] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file} differs"
        );
    }
    let report = read_report(&a);
    assert_eq!(report["cells"], serde_json::json!([8, 5]));
    assert!(report.get("wall_time_s").is_none());
    let curve = std::fs::read_to_string(a.join("curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 9);
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!("# small run\ngrid = 7x5\nmax_iters = 100\nout = {}\n", out.display()),
    )
    .unwrap();
    let o = lift(&["brachistochrone", "--config", cfg.to_str().unwrap(), "--max-iters", "50", "--wall-time"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_report(&out);
    assert_eq!(report["cells"], serde_json::json!([6, 4]));
    assert!(report["solver"]["iterations"].as_u64().unwrap() <= 50);
    assert!(report["wall_time_s"].is_number());
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let o = lift(&["brachistochrone"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["class"], "usage");

    let o = lift(&["denoise", "--out", tmp.path().to_str().unwrap(), "--beta", "fast"]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "labels = 8\ncolour = red\n").unwrap();
    let o = lift(&["denoise", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = error_json(&o);
    assert_eq!(err["error"]["class"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn unreadable_inputs_exit_with_three() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = lift(&[
        "denoise",
        "--input",
        tmp.path().join("missing.pgm").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["error"]["exit_code"], 3);

    let vol = tmp.path().join("bad.cvol");
    std::fs::write(&vol, b"CVOL 2 2 2\n\0\0").unwrap();
    let o = lift(&["stereo", "--volume", vol.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(error_json(&o)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("payload size mismatch"));
}

#[test]
fn denoise_small_image() {
    let tmp = TempDir::new().unwrap();
    let input = gradient_image(tmp.path(), "in.pgm", 5, 4, 1);
    let out = tmp.path().join("out");
    let o = lift(&[
        "denoise",
        "--input",
        &input,
        "--labels",
        "4",
        "--max-iters",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_report(&out);
    assert_eq!(report["width"], 5);
    assert_eq!(report["height"], 4);
    assert!(out.join("denoised.pgm").exists());
    let values = std::fs::read_to_string(out.join("values.csv")).unwrap();
    assert_eq!(values.lines().count(), 21);
}

#[test]
fn stereo_from_cost_volume() {
    let tmp = TempDir::new().unwrap();
    let volume = CostVolume::new(4, 3, 3, (0..36).map(|k| ((k * 7) % 5) as f32).collect()).unwrap();
    let path = tmp.path().join("v.cvol");
    std::fs::write(&path, encode_cost_volume(&volume)).unwrap();
    let out = tmp.path().join("out");
    let o = lift(&[
        "stereo",
        "--volume",
        path.to_str().unwrap(),
        "--max-iters",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_report(&out)["labels"], 3);
    assert!(out.join("disparity.pgm").exists());
}

#[test]
fn register_small_pair() {
    let tmp = TempDir::new().unwrap();
    let fixed = gradient_image(tmp.path(), "f.ppm", 3, 3, 3);
    let moving = gradient_image(tmp.path(), "m.ppm", 3, 3, 3);
    let out = tmp.path().join("out");
    let o = lift(&[
        "register",
        "--fixed",
        &fixed,
        "--moving",
        &moving,
        "--epsilon",
        "0.1",
        "--max-iters",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for file in ["forward.csv", "backward.csv", "warped.ppm", "inverse_warped.ppm", "report.json"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
}

#[test]
fn selftest_passes() {
    let o = lift(&["selftest"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 6);
    assert!(!text.contains("FAIL"));
}
