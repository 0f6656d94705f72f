mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cornermap::io::{read_columns, write_arc_csv, MapFile};
use cornermap::{CornerConfig, HarmonicCornerMap, SeriesCoefficients};
use cornermap_cli::{EXIT_BAD_INPUT, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_VALIDATION};

fn cornermap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cornermap"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn angle_figures_match_goldens() {
    for beta in [0.5, 1.5] {
        let dir = tempfile::tempdir().unwrap();
        let (angles, mesh) = common::figures(beta, dir.path()).unwrap();
        common::angle_structure(&angles, beta).unwrap();
        common::mesh_structure(&mesh).unwrap();
    }
}

#[test]
fn angle_tables_are_readable() {
    let dir = tempfile::tempdir().unwrap();
    let o = cornermap(dir.path(), &["angles", "--beta", "1.5"]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("phi_of_theta.csv")).unwrap();
    let (head, cols) = read_columns(text.as_bytes()).unwrap();
    assert_eq!(head, ["theta", "phi", "phi_conformal"]);
    assert!(cols[0].len() > 180);
    let h = 0.75 * std::f64::consts::PI;
    assert!(cols[1].iter().all(|p| p.abs() <= h));
}

#[test]
fn negative_b1_is_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("bad.json");
    let f = MapFile {
        beta: 1.5,
        sigma_plus: 1.0,
        sigma_minus: 1.0,
        radius: 1.0,
        a: vec![1.0, 0.2],
        b: vec![-1.0, 0.1],
    };
    fs::write(&coeffs, f.to_json().unwrap()).unwrap();
    for cmd in ["angles", "trace", "validate"] {
        let o = cornermap(dir.path(), &[cmd, "--coeffs", coeffs.to_str().unwrap()]);
        assert_eq!(code(&o), EXIT_BAD_INPUT, "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    fs::write(&coeffs, "{ not json").unwrap();
    assert_eq!(code(&cornermap(dir.path(), &["angles", "--coeffs", coeffs.to_str().unwrap()])), EXIT_BAD_INPUT);
}

#[test]
fn bad_configs_are_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    for text in [
        "[corner\nbeta = 1.5\n",
        "[corner]\nbeta = abc\n",
        "[corner]\nbeta = 2.5\n",
        "[winslow]\nordering = spiral\n",
        "[winslow]\nrelaxation = 2.5\n",
        "[trace]\nr_min = 0.1\nr_max = 0.01\n",
    ] {
        fs::write(&cfg, text).unwrap();
        let o = cornermap(dir.path(), &["angles", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), EXIT_BAD_INPUT, "{text:?}");
    }
    let missing = dir.path().join("missing.cfg");
    assert_eq!(code(&cornermap(dir.path(), &["angles", "--config", missing.to_str().unwrap()])), EXIT_BAD_INPUT);
    assert_eq!(code(&cornermap(dir.path(), &["winslow", "--grid", "17x17"])), EXIT_BAD_INPUT);
}

#[test]
fn unconverged_winslow_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "[corner]\nbeta = 1.5\n[winslow]\ndomain = sector\nmax_iters = 3\n").unwrap();
    let o = cornermap(dir.path(), &["winslow", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_NOT_CONVERGED);
    assert!(dir.path().join("grid.csv").exists());
}

#[test]
fn winslow_writes_grid_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "[corner]\nbeta = 1.75\n[winslow]\ndomain = sector\n").unwrap();
    let o = cornermap(dir.path(), &["winslow", "--config", cfg.to_str().unwrap(), "--grid", "17,17"]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["fold_cells"], serde_json::json!([[7, 0]]));
    let grid = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let g = cornermap::WinslowGrid::<f64>::from_csv(grid.as_bytes()).unwrap();
    assert_eq!((g.nx, g.ny), (17, 17));
    let svg = fs::read_to_string(dir.path().join("grid.svg")).unwrap();
    assert!(svg.contains("folded cells: 1"));
    assert_eq!(svg.matches("<polygon").count(), 1);
}

#[test]
fn trace_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let o = cornermap(dir.path(), &["trace", "--beta", "1.5"]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 6);
    for e in entries {
        assert!(e["errors"].as_array().unwrap().is_empty(), "{e}");
    }
    let text = fs::read_to_string(dir.path().join("forward_0.csv")).unwrap();
    let (head, cols) = read_columns(text.as_bytes()).unwrap();
    assert_eq!(head, ["rho", "theta", "u", "v"]);
    assert_eq!(cols[0].len(), 6 * 24 + 1);
}

#[test]
fn fit_recovers_written_arc() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CornerConfig::new(1.25, 1.0, 1.0, 1.0).unwrap();
    let pairs = [(1.0, 2.0), (0.3, -0.2), (0.05, 0.1)];
    let map = HarmonicCornerMap::new(cfg, SeriesCoefficients::from_pairs(&pairs, 4).unwrap());
    let arc = dir.path().join("arc.csv");
    write_arc_csv(fs::File::create(&arc).unwrap(), &map.arc_samples(2048)).unwrap();
    let conf = dir.path().join("fit.cfg");
    fs::write(&conf, format!("[corner]\nbeta = 1.25\n[fit]\narc = {}\nterms = 4\n", arc.display())).unwrap();
    let o = cornermap(dir.path(), &["fit", "--config", conf.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let m = MapFile::from_json(&fs::read_to_string(dir.path().join("coeffs.json")).unwrap()).unwrap();
    for (k, &(a, b)) in pairs.iter().enumerate() {
        assert!((m.a[k] - a).abs() < 1e-8 && (m.b[k] - b).abs() < 1e-8, "term {}", k + 1);
    }
    assert!(m.a[3].abs() < 1e-8 && m.b[3].abs() < 1e-8);
}

#[test]
fn validate_exit_code_tracks_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = cornermap(dir.path(), &["validate"]);
    let out = String::from_utf8_lossy(&o.stdout);
    let summary = out.lines().last().unwrap();
    if summary.ends_with(" 0 failed") {
        assert_eq!(code(&o), EXIT_OK);
    } else {
        assert_eq!(code(&o), EXIT_VALIDATION);
    }
    assert!(dir.path().join("validate.json").exists());
    assert_eq!(fs::read_to_string(dir.path().join("validate.txt")).unwrap(), out);
}
