use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nlos_ltm::io::{encode_nlir, read_nlir, write_nlir};
use nlos_ltm::sim::{ImpulseResponse, RelayTopology, TimeAxis};
use nlos_ltm::Vec3;

const BIN: &str = env!("CARGO_BIN_EXE_nlos-ltm");

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SCENE: &str = r#"{
  "patches": [
    {"center": [0.0, 0.7, 0.0], "normal": [0.0, -1.0, 0.0], "area": 0.02, "albedo": 1.0},
    {"center": [0.3, 0.6, 0.2], "normal": [-0.4, -1.0, -0.2], "area": 0.02, "albedo": 0.8, "material": {"phong": {"exponent": 10.0}}}
  ],
  "relay": {
    "laser": {"grid": {"center": [0.0, 0.0, 0.0], "size": [1.0, 1.0], "counts": [4, 4]}},
    "spad": {"grid": {"center": [0.0, 0.0, 0.0], "size": [1.0, 1.0], "counts": [4, 4]}}
  },
  "time": {"bin_width": 85e-12, "bin_count": 160},
  "max_bounces": 2
}"#;

const RUN: &str = r#"{
  "scene": "scene.json",
  "impulse": "capture.nlir",
  "output_dir": "out",
  "wave": {"wavelength": 0.5},
  "grid": {"origin": [-0.25, 0.45, -0.25], "counts": [5, 3, 5], "pitch": 0.125},
  "epsilon": {"relative": 0.2},
  "bands": [[0.0, 0.3], [0.3, 0.8], [0.8, null]],
  "sources": [0, 7, 31, 37, 62],
  "threads": 2
}"#;

fn workspace(dir: &Path) -> PathBuf {
    fs::write(dir.join("scene.json"), SCENE).unwrap();
    fs::write(dir.join("run.json"), RUN).unwrap();
    dir.join("run.json")
}

fn stage(args: &[&str], config: &Path) {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["-c", config.to_str().unwrap()]);
    let o = run(&all);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
}

fn pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let cfg = workspace(dir);
    stage(&["simulate"], &cfg);
    stage(&["direct"], &cfg);
    stage(&["mask"], &cfg);
    stage(&["column", "--focus", "2,1,2"], &cfg);
    stage(&["column", "--focus", "2,1,2", "--gate", "higher"], &cfg);
    stage(&["indirect-all"], &cfg);
    stage(&["ltm", "--masked"], &cfg);
    stage(&["bands"], &cfg);
    let mut files = vec![("capture.nlir".to_string(), fs::read(dir.join("capture.nlir")).unwrap())];
    let mut names: Vec<_> = fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    for n in names {
        let bytes = fs::read(dir.join("out").join(&n)).unwrap();
        files.push((n, bytes));
    }
    files
}

#[test]
fn info_reports_fixture_shape() {
    let path = fixtures().join("impulse_1x1x4.nlir");
    let o = run(&["info", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for needle in ["K_p=1", "K_i=1", "bins=4"] {
        assert!(text.contains(needle), "missing {needle} in {text}");
    }
}

#[test]
fn fixture_round_trips_bit_exactly() {
    let path = fixtures().join("impulse_1x1x4.nlir");
    let original = fs::read(&path).unwrap();
    assert_eq!(original.len(), 124);
    let h = read_nlir(&path).unwrap();
    assert_eq!(h.trace(0, 0), &[0.0, 2.5, 1.0, 0.0078125]);
    assert_eq!(h.topology.laser_points[0], Vec3::new(-0.25, 0.0, 0.125));
    assert_eq!(encode_nlir(&h), original);
}

#[test]
fn pipeline_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = pipeline(a.path());
    let fb = pipeline(b.path());
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    for expected in [
        "direct.nlvx",
        "direct.pgm",
        "direct.txt",
        "mask.nlvx",
        "column_2_1_2.nlvx",
        "indirect.nlvx",
        "ltm.csv",
        "ltm.nltm",
        "band_0.csv",
        "band_2.nltm",
    ] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
    assert_eq!(fa.len(), fb.len());
    for ((na, ba), (nb, bb)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        assert!(ba == bb, "{na} differs between runs");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = workspace(dir.path());
    stage(&["simulate"], &cfg);
    stage(&["direct", "--threads", "1"], &cfg);
    let one = fs::read(dir.path().join("out/direct.nlvx")).unwrap();
    stage(&["direct", "--threads", "4"], &cfg);
    let four = fs::read(dir.path().join("out/direct.nlvx")).unwrap();
    assert_eq!(one, four);
}

#[test]
fn empty_scene_gives_black_image() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = workspace(dir.path());
    let topo = RelayTopology {
        laser_points: vec![Vec3::new(-0.2, 0.0, 0.0), Vec3::new(0.2, 0.0, 0.0)],
        spad_points: vec![Vec3::new(0.0, 0.0, -0.2), Vec3::new(0.0, 0.0, 0.2)],
        wall_normal: Vec3::new(0.0, 1.0, 0.0),
    };
    let h = ImpulseResponse::zeros(topo, TimeAxis::new(85e-12, 64, 0.0).unwrap());
    write_nlir(&h, &dir.path().join("capture.nlir")).unwrap();
    stage(&["direct"], &cfg);
    let pgm = fs::read(dir.path().join("out/direct.pgm")).unwrap();
    let header = b"P5\n5 5\n255\n";
    assert!(pgm.starts_with(header), "unexpected header");
    assert_eq!(pgm.len(), header.len() + 25);
    assert!(pgm[header.len()..].iter().all(|&p| p == 0));
}

#[test]
fn bands_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = workspace(dir.path());
    stage(&["simulate"], &cfg);
    stage(&["ltm"], &cfg);
    stage(&["bands", "--intervals", "0:0.5,0.5:"], &cfg);
    assert!(dir.path().join("out/band_1.nltm").exists());
    assert!(!dir.path().join("out/band_2.nltm").exists());
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = run(&["direct", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("usage"));
}

#[test]
fn bad_focus_is_usage_error() {
    let o = run(&["column", "-c", "run.json", "--focus", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn focus_outside_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = workspace(dir.path());
    stage(&["simulate"], &cfg);
    let o = run(&["column", "-c", cfg.to_str().unwrap(), "--focus", "9,0,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_configs_name_the_key() {
    let dir = fixtures().join("bad_config");
    let table = fs::read_to_string(dir.join("keys.txt")).unwrap();
    let mut checked = 0;
    for line in table.lines().filter(|l| !l.trim().is_empty()) {
        let (name, key) = line.split_once(' ').unwrap();
        let path = dir.join(format!("{name}.json"));
        let o = run(&["direct", "-c", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        let msg = stderr(&o);
        assert!(msg.contains(key), "{name}: expected {key:?} in {msg:?}");
        checked += 1;
    }
    assert!(checked >= 15);
}

#[test]
fn missing_config_is_io_error() {
    let o = run(&["direct", "-c", "/nonexistent/run.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/run.json"));
}

#[test]
fn missing_impulse_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = workspace(dir.path());
    let o = run(&["direct", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn corrupt_files_are_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = fs::read(fixtures().join("impulse_1x1x4.nlir")).unwrap();
    let cases: Vec<(&str, Vec<u8>)> = vec![
        ("magic.nlir", [b"NLIX".as_slice(), &good[4..]].concat()),
        ("short.nlir", good[..100].to_vec()),
        ("header.nlir", good[..10].to_vec()),
        ("version.nlir", [b"NLIR".as_slice(), &[9, 0, 0, 0], &good[8..]].concat()),
    ];
    for (name, bytes) in cases {
        let path = dir.path().join(name);
        fs::write(&path, bytes).unwrap();
        let o = run(&["info", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(3), "{name}: {}", stderr(&o));
    }

    let cfg = workspace(dir.path());
    fs::copy(dir.path().join("short.nlir"), dir.path().join("capture.nlir")).unwrap();
    let o = run(&["direct", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn stale_mask_for_other_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = workspace(dir.path());
    stage(&["simulate"], &cfg);
    stage(&["direct"], &cfg);
    stage(&["mask"], &cfg);
    let other = RUN.replace("\"counts\": [5, 3, 5]", "\"counts\": [5, 3, 4]");
    fs::write(&cfg, other).unwrap();
    let o = run(&["indirect-all", "-c", cfg.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}
