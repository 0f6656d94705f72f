#![allow(dead_code)]

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use cornermap_cli::config::ConfigFile;
use cornermap_cli::{cmd_angles, cmd_mesh_images, AnglesOutput, MeshOutput, RunConfig};

/// Set to rewrite the golden files instead of comparing against them.
pub const UPDATE_VAR: &str = "CORNERMAP_UPDATE_GOLDEN";

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var_os(UPDATE_VAR).is_some() {
        fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        fs::write(&path, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = fs::read_to_string(&path).map_err(|e| format!("{}: {e} (set {UPDATE_VAR}=1 to create)", path.display()))?;
    if want != actual {
        let line = want
            .lines()
            .zip(actual.lines())
            .position(|(a, b)| a != b)
            .map_or_else(|| "length".to_owned(), |k| format!("line {}", k + 1));
        return Err(format!("{name} differs from golden at {line}"));
    }
    Ok(())
}

pub fn run_config(beta: f64, out: &Path) -> RunConfig {
    let mut c = ConfigFile::default();
    c.set("corner.beta", beta.to_string());
    c.set("output.dir", out.display().to_string());
    RunConfig::from_config(&c).expect("valid config")
}

pub fn figure_name(kind: &str, beta: f64, file: &Path) -> String {
    format!("{kind}_beta{beta}_{}", file.file_name().unwrap().to_string_lossy())
}

/// Runs the angle and mesh commands and compares every text output with its golden.
pub fn figures(beta: f64, dir: &Path) -> Result<(AnglesOutput, MeshOutput), String> {
    let rc = run_config(beta, dir);
    let angles = cmd_angles(&rc).map_err(|e| e.to_string())?;
    let mesh = cmd_mesh_images(&rc).map_err(|e| e.to_string())?;
    for f in angles.files.iter().chain(mesh.files.iter().filter(|p| p.extension().is_some_and(|e| e == "svg"))) {
        let text = fs::read_to_string(f).map_err(|e| e.to_string())?;
        check_golden(&figure_name("fig", beta, f), &text)?;
    }
    Ok((angles, mesh))
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
}

/// Three pieces per law with jumps where the step plots put them.
pub fn angle_structure(out: &AnglesOutput, beta: f64) -> Result<(), String> {
    let h = PI * beta / 2.0;
    let inv: Vec<f64> = out.inverse.jumps().iter().map(|j| j.location).collect();
    let fwd: Vec<f64> = out.forward.jumps().iter().map(|j| j.location).collect();
    let (want_inv, want_fwd) = if beta > 1.0 {
        (vec![out.theta_star], vec![-h, h])
    } else {
        (vec![0.0, PI], vec![out.phi_star])
    };
    if out.inverse.pieces.len() != 3 || out.forward.pieces.len() != 3 {
        return Err(format!(
            "piece counts {} / {}",
            out.inverse.pieces.len(),
            out.forward.pieces.len()
        ));
    }
    if !close(&inv, &want_inv) {
        return Err(format!("inverse jumps at {inv:?}, expected {want_inv:?}"));
    }
    if !close(&fwd, &want_fwd) {
        return Err(format!("forward jumps at {fwd:?}, expected {want_fwd:?}"));
    }
    let svg = fs::read_to_string(&out.files[2]).map_err(|e| e.to_string())?;
    let label = if beta > 1.0 { ">theta*<" } else { ">phi*<" };
    if !svg.contains(label) {
        return Err(format!("angles.svg has no {label} guide label"));
    }
    Ok(())
}

/// Five circles and eight rays in each mesh and each image.
pub fn mesh_structure(out: &MeshOutput) -> Result<(), String> {
    for (name, lines) in [
        ("Xi", &out.xi.mesh),
        ("F^-1(Xi)", &out.xi.image),
        ("T", &out.t.mesh),
        ("F(T)", &out.t.image),
    ] {
        if lines.len() != 13 {
            return Err(format!("{name}: {} polylines", lines.len()));
        }
        if let Some(l) = lines.iter().find(|l| l.points.len() < 2) {
            return Err(format!("{name}: `{}` has {} points", l.label, l.points.len()));
        }
    }
    let svg = fs::read_to_string(&out.files[0]).map_err(|e| e.to_string())?;
    let n = svg.matches("<polyline").count();
    if n != 52 {
        return Err(format!("mesh_images.svg has {n} polylines"));
    }
    Ok(())
}
