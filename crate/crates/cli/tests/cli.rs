mod support;

use std::path::Path;
use std::process::{Command, Output};

use bonemap4d::export::decode_pfm;
use bonemap4d::sampler::{
    plan_windows, read_latent, sample, toy::Coupled, Conditioning, LatentGrid, WindowConfig,
};
use support::{bin, fixture};

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// The single stderr line, parsed.
fn error_line(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "stderr: {text}");
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn render_walk_writes_all_maps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("maps");
    let o = run(&[
        "render",
        "--poses",
        p(&fixture("walk.json")),
        "--cameras",
        p(&fixture("cameras_6view.json")),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let count = |prefix: &str, ext: &str| {
        names
            .iter()
            .filter(|n| n.starts_with(prefix) && n.ends_with(ext))
            .count()
    };
    assert_eq!(count("depth_", ".pfm"), 144);
    assert_eq!(count("normal_", ".pfm"), 144);
    assert_eq!(count("depth_", ".png"), 144);
    assert_eq!(count("normal_", ".png"), 144);
    assert_eq!(names.len(), 576, "no temporary files left behind");
    let depth = decode_pfm(&std::fs::read(out.join("depth_f023_v05.pfm")).unwrap()).unwrap();
    assert_eq!((depth.width, depth.height, depth.channels), (576, 576, 1));
    assert!(depth.data.iter().any(|d| *d > 0.0));
}

#[test]
fn render_size_and_no_png() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "render",
        "--poses",
        p(&fixture("tpose.json")),
        "--cameras",
        p(&fixture("cameras_8view.json")),
        "--out",
        p(dir.path()),
        "--size",
        "96",
        "--no-png",
        "--depth-mode",
        "z",
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 16);
    let n = decode_pfm(&std::fs::read(dir.path().join("normal_f000_v03.pfm")).unwrap()).unwrap();
    assert_eq!((n.width, n.height, n.channels), (96, 96, 3));
}

#[test]
fn missing_camera_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_cameras.json");
    let o = run(&[
        "render",
        "--poses",
        p(&fixture("walk.json")),
        "--cameras",
        p(&missing),
        "--out",
        p(&dir.path().join("out")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = error_line(&o);
    assert_eq!(err["code"], 2);
    assert_eq!(err["error"], "io");
    assert!(err["message"].as_str().unwrap().contains(p(&missing)));
}

#[test]
fn zero_steps_is_usage_error() {
    let o = run(&["sample-demo", "--steps", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "usage");
}

#[test]
fn zero_steps_from_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"sample_demo": {"steps": 0}}"#).unwrap();
    let o = run(&["--config", p(&cfg), "sample-demo"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_plan_is_validation_error() {
    let o = run(&[
        "sample-demo",
        "--t-long",
        "4",
        "--t-ol",
        "4",
        "--steps",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_line(&o)["error"], "config");
}

#[test]
fn unknown_flag_and_missing_subcommand() {
    assert_eq!(run(&["render", "--bogus"]).status.code(), Some(1));
    let o = run(&[]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "usage");
}

#[test]
fn bad_thread_env_is_usage_error() {
    let o = Command::new(bin())
        .args(["sample-demo", "--steps", "1"])
        .env("BONEMAP4D_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"sample_demo": {"steps": 12, "seed": 3, "windows": {"t_long": 10, "t_ol": 2}}}"#,
    )
    .unwrap();
    let o = run(&[
        "--config",
        p(&cfg),
        "sample-demo",
        "--seed",
        "9",
        "--print-config",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let s = &v["sample_demo"];
    assert_eq!(s["steps"], 12);
    assert_eq!(s["seed"], 9);
    assert_eq!(s["windows"]["t_long"], 10);
    assert_eq!(s["windows"]["t_ol"], 2);
    assert_eq!(s["windows"]["n_long"], 6);
    assert_eq!(s["branch_mix"], 0.5);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"render": {"sise": 3}}"#).unwrap();
    let o = run(&["--config", p(&cfg), "render"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sample_demo_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let z = dir.path().join("z0.bin");
    let csv = dir.path().join("m.csv");
    let o = run(&[
        "sample-demo",
        "--frames",
        "6",
        "--views",
        "4",
        "--t-long",
        "4",
        "--t-ol",
        "2",
        "--n-long",
        "3",
        "--n-ol",
        "1",
        "--steps",
        "5",
        "--denoiser",
        "coupled",
        "--seed",
        "11",
        "--out",
        p(&z),
        "--metrics",
        p(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = WindowConfig {
        t_long: 4,
        t_ol: 2,
        n_long: 3,
        n_ol: 1,
        ..WindowConfig::default()
    };
    let plan = plan_windows(6, 4, &cfg).unwrap();
    let noise = LatentGrid::gaussian(6, 4, (4, 8, 8), 5, 11);
    let want = sample(
        &noise,
        5,
        &plan,
        &Coupled::default(),
        &Conditioning::default(),
        0.5,
    )
    .unwrap();
    let got = read_latent(&z).unwrap();
    assert_eq!(got.timestep(), 0);
    for (a, b) in got.data().iter().zip(want.data().iter()) {
        assert_eq!(*a, *b as f32 as f64);
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,timestep,max_seam");
    assert_eq!(lines.len(), 7);
    assert!(lines[6].starts_with("5,0,"));
}

#[test]
fn align_writes_shifts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = run(&[
        "align",
        "--poses",
        p(&fixture("walk.json")),
        "--cameras",
        p(&fixture("cameras_8view.json")),
        "--out",
        p(&out),
        "--reference-pelvis",
        "300,300",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["frames"].as_array().unwrap().len(), 24);
    assert_eq!(v["frames"][0]["views"].as_array().unwrap().len(), 8);
    assert!(v["temporal"]["dx"].is_i64());
}

#[test]
fn inspect_outputs() {
    let o = run(&[
        "inspect",
        "ellipsoids",
        "--poses",
        p(&fixture("tpose.json")),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 22);

    let o = run(&[
        "inspect",
        "ellipsoids",
        "--poses",
        p(&fixture("tpose.json")),
        "--frame",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(3));

    let o = run(&[
        "inspect",
        "embeddings",
        "--cameras",
        p(&fixture("cameras_6view.json")),
        "--frames",
        "5",
        "--dim",
        "8",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cameras"].as_array().unwrap().len(), 6);
    assert_eq!(v["cameras"][0].as_array().unwrap().len(), 72);
    assert_eq!(v["frames"].as_array().unwrap().len(), 5);

    let o = run(&[
        "inspect",
        "embeddings",
        "--cameras",
        p(&fixture("cameras_6view.json")),
        "--dim",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
