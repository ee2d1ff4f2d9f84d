use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hatcat::{run_sequence, QuantumState, RunOptions};
use hatcat_cli::runfile::RunFile;
use tempfile::TempDir;

fn hatcat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hatcat"))
        .args(args)
        .current_dir(dir)
        .env("HATCAT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = hatcat(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

fn header(path: &Path) -> Vec<String> {
    csv::Reader::from_path(path)
        .unwrap()
        .headers()
        .unwrap()
        .iter()
        .map(String::from)
        .collect()
}

fn column(path: &Path, i: usize) -> Vec<f64> {
    rows(path).iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn hat_writes_full_simplex() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["hat", "--sites", "3", "--atoms-per-site", "20", "--xi", "0"],
    );
    let path = d.path().join("hat.csv");
    assert_eq!(header(&path), ["N_alpha", "N_beta", "probability"]);
    let p = column(&path, 2);
    assert_eq!(p.len(), 1891);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    let first = &rows(&path)[..2];
    assert_eq!((first[0][0].as_str(), first[0][1].as_str()), ("0", "0"));
    assert_eq!((first[1][0].as_str(), first[1][1].as_str()), ("0", "1"));
}

#[test]
fn hat_with_no_atoms_is_a_single_row() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["hat", "--atoms-per-site", "0", "--out", "z.csv"]);
    assert_eq!(rows(&d.path().join("z.csv")), vec![vec!["0", "0", "1"]]);
}

#[test]
fn hat_is_angle_independent() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["hat", "--atoms-per-site", "6", "--out", "a.csv"]);
    ok(
        d.path(),
        &["hat", "--atoms-per-site", "6", "--xi", "0.7", "--out", "b.csv"],
    );
    ok(
        d.path(),
        &["hat", "--atoms-per-site", "6", "--xi=-2.1", "--out", "c.csv"],
    );
    let a = column(&d.path().join("a.csv"), 2);
    for other in ["b.csv", "c.csv"] {
        for (x, y) in a.iter().zip(column(&d.path().join(other), 2)) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn ground_sweep_writes_one_file_and_sidecar_per_ratio() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["ground", "--atoms", "12", "--uj", "0,50", "--out", "g/ground.csv"],
    );
    for v in ["0", "50"] {
        let csv = d.path().join(format!("g/ground_uj{v}.csv"));
        let p = column(&csv, 2);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(d.path().join(format!("g/ground_uj{v}.meta.json"))).unwrap())
                .unwrap();
        assert!(meta["residual"].as_f64().unwrap() < 1e-8);
        assert_eq!(meta["dim"], 91);
        assert!(meta["gap"].as_f64().unwrap() > 0.0);
    }
    // all atoms condense into the α mode without interactions
    let free = rows(&d.path().join("g/ground_uj0.csv"));
    let corner = free.iter().find(|r| r[0] == "12" && r[1] == "0").unwrap();
    assert!((corner[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn single_ratio_keeps_the_given_name() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &[
            "ground",
            "--atoms",
            "6",
            "--uj",
            "5",
            "--boundary",
            "open",
            "--out",
            "one.csv",
        ],
    );
    assert!(d.path().join("one.csv").exists());
    assert!(d.path().join("one.meta.json").exists());
}

#[test]
fn run_file_round_trips_exactly() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &[
            "detect",
            "--atoms-per-site",
            "6",
            "--detections",
            "7",
            "--seed",
            "42",
            "--eta-dist",
            "gauss:1.0,0.05",
        ],
    );
    let file = RunFile::read(&d.path().join("run.json")).unwrap();
    assert_eq!(file.events.len(), 7);
    assert_eq!(file.seed, 42);
    assert_eq!(file.final_state.total_atoms, 11);
    let opts = RunOptions {
        eta: "gauss:1.0,0.05".parse().unwrap(),
        ..Default::default()
    };
    let direct = run_sequence(&QuantumState::uniform_fock(3, 6).unwrap(), 7, &opts, 42).unwrap();
    assert_eq!(file.events, direct.events);
    let read = file.final_state().unwrap();
    for (a, b) in read.amplitudes().iter().zip(direct.final_state.amplitudes()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
    assert_eq!(RunFile::from_json(&file.to_json().unwrap()).unwrap(), file);
}

#[test]
fn same_seed_gives_byte_identical_run_files() {
    let d = TempDir::new().unwrap();
    let args = |out: &'static str| {
        [
            "detect",
            "--atoms-per-site",
            "10",
            "--detections",
            "12",
            "--seed",
            "9",
            "--out",
            out,
        ]
    };
    ok(d.path(), &args("a.json"));
    ok(d.path(), &args("b.json"));
    ok(
        d.path(),
        &[
            "detect",
            "--atoms-per-site",
            "10",
            "--detections",
            "12",
            "--seed",
            "10",
            "--out",
            "c.json",
        ],
    );
    let a = fs::read(d.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(d.path().join("b.json")).unwrap());
    assert_ne!(a, fs::read(d.path().join("c.json")).unwrap());
}

#[test]
fn zero_detections_echo_the_input_state() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["detect", "--atoms-per-site", "4", "--detections", "0"]);
    let file = RunFile::read(&d.path().join("run.json")).unwrap();
    assert!(file.events.is_empty());
    let s = file.final_state().unwrap();
    assert_eq!(s.amplitude(&[4, 4, 4]).re, 1.0);
    assert_eq!(s.total_atoms(), 12);
}

#[test]
fn too_many_detections_is_a_usage_error() {
    let d = TempDir::new().unwrap();
    let out = hatcat(d.path(), &["detect", "--atoms-per-site", "2", "--detections", "7"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!d.path().join("run.json").exists());
}

#[test]
fn phase_and_number_on_a_cat_run() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["detect", "--atoms-per-site", "20", "--detections", "20", "--seed", "3"],
    );
    let out = ok(d.path(), &["phase", "--run", "run.json", "--grid", "64"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let asym: f64 = stdout
        .lines()
        .next()
        .unwrap()
        .strip_prefix("swap_asymmetry ")
        .unwrap()
        .parse()
        .unwrap();
    assert!(asym < 1e-8);
    let grid = d.path().join("phase.csv");
    assert_eq!(header(&grid), ["phi_ba", "phi_cb", "probability"]);
    let p = column(&grid, 2);
    assert_eq!(p.len(), 64 * 64);
    assert!((p.iter().sum::<f64>() / p.len() as f64 - 1.0).abs() < 1e-9);
    let peaks: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("phase.peaks.json")).unwrap()).unwrap();
    assert!(peaks["peak_height"].as_f64().unwrap() > 2.0);

    ok(d.path(), &["number", "--run", "run.json", "--grid", "64"]);
    let n = d.path().join("number.csv");
    assert_eq!(header(&n), ["N_a", "N_b", "probability"]);
    assert!((column(&n, 2).iter().sum::<f64>() - 1.0).abs() < 1e-10);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("number.fringe.json")).unwrap()).unwrap();
    for key in ["predicted_frequency", "measured_frequency_b", "frequency_error_bins"] {
        assert!(report[key].is_f64(), "{key}");
    }
}

#[test]
fn fock_input_has_no_cat_structure() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["detect", "--atoms-per-site", "5", "--detections", "0"]);
    let out = hatcat(d.path(), &["phase", "--run", "run.json", "--grid", "32"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no cat structure"));
    let p = column(&d.path().join("phase.csv"), 2);
    assert!(p.iter().all(|v| (v - 1.0).abs() < 1e-12));

    ok(d.path(), &["number", "--run", "run.json"]);
    let nonzero: Vec<_> = rows(&d.path().join("number.csv"))
        .into_iter()
        .filter(|r| r[2] != "0")
        .collect();
    assert_eq!(nonzero, vec![vec!["5", "5", "1"]]);
    assert!(!d.path().join("number.fringe.json").exists());
}

#[test]
fn coherent_reports_swap_verdicts() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["coherent", "--phases", "0.3,-1.1,2.4", "--grid", "128"]);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("coherent.swap.json")).unwrap()).unwrap();
    assert_eq!(v["invariant"], true);
    assert_eq!(v["swap"], serde_json::json!([0, 2]));
    let p = column(&d.path().join("coherent.csv"), 1);
    assert_eq!(p.len(), 128);
    assert!((p.iter().sum::<f64>() * 2.0 * std::f64::consts::PI / 128.0 - 1.0).abs() < 1e-10);

    ok(
        d.path(),
        &["coherent", "--phases=0.3,-1.1,2.4", "--swap", "0,1", "--out", "ns.csv"],
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("ns.swap.json")).unwrap()).unwrap();
    assert_eq!(v["invariant"], false);
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    assert_eq!(hatcat(d.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(hatcat(d.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(hatcat(d.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        hatcat(d.path(), &["hat", "--atoms-per-site", "x"]).status.code(),
        Some(1)
    );
    assert_eq!(hatcat(d.path(), &["hat", "--sites", "4"]).status.code(), Some(1));
    assert_eq!(
        hatcat(d.path(), &["detect", "--eta-dist", "delta:-1"]).status.code(),
        Some(1)
    );
    assert_eq!(
        hatcat(d.path(), &["phase", "--run", "missing.json"]).status.code(),
        Some(1)
    );
    fs::write(d.path().join("old.json"), r#"{"format":"hatcat-run","version":99}"#).unwrap();
    let out = hatcat(d.path(), &["number", "--run", "old.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_lists_defaults() {
    let d = TempDir::new().unwrap();
    let text = String::from_utf8(ok(d.path(), &["detect", "--help"]).stdout).unwrap();
    for needle in [
        "[default: 100]",
        "[default: delta:1]",
        "[default: run.json]",
        "HATCAT_THREADS",
    ] {
        assert!(text.contains(needle), "{needle} missing from:\n{text}");
    }
}
