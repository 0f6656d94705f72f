//! Batch commands behind the `cornermap` binary.
//!
//! Each `cmd_*` function writes its files under `RunConfig::out_dir` and
//! returns the data it plotted so tests can check structure directly.

pub mod config;
pub mod suite;
pub mod svg;

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use cornermap::asymptotics::{conformal_phi_of_theta, conformal_theta_of_phi};
use cornermap::io::{fmt_float, read_arc_csv, write_curve_csv, MapFile};
use cornermap::series::{fit_from_arc_with, DEFAULT_PANELS};
use cornermap::tracer::{
    compare_with_asymptotics, estimate_exit_angle, forward_candidates, inverse_candidates, log_radii,
    mesh_images, trace_forward_ray, trace_inverse_ray,
};
use cornermap::{
    AngleLaw, AsymptoticKit64, CornerConfig, DiscrepancyReport, DomainBoundary64, Error, ExitAngleEstimate,
    FitOptions, HarmonicCornerMap64, MeshImages, MeshSpec, Polyline, SectorTestCase, SeriesCoefficients,
    SolveOptions, SolveReport, SweepOrdering, WinslowGrid64,
};
use serde::Serialize;

use crate::config::{ConfigError, ConfigFile};
use crate::suite::Row;
use crate::svg::{Panel, Style, Svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_BAD_INPUT: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn bad_input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_BAD_INPUT,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_)
            | Error::Domain { .. }
            | Error::Constraint { .. }
            | Error::Case { .. }
            | Error::InvalidDomain(_)
            | Error::DegenerateSide { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => EXIT_BAD_INPUT,
            Error::Diverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::bad_input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::bad_input(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::bad_input(format!("json: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const DEFAULT_A: [f64; 3] = [1.0, 0.3, 0.05];
pub const DEFAULT_B: [f64; 3] = [2.0, 0.4, -0.05];

#[derive(Clone, Debug, PartialEq)]
pub enum CoeffSource {
    Inline { a: Vec<f64>, b: Vec<f64> },
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    /// Sector of the configured `beta` and radius with the arc split over three square sides.
    Sector,
    Square,
    Rectangle([f64; 4]),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WinslowParams {
    pub nx: usize,
    pub ny: usize,
    pub tolerance: f64,
    pub relaxation: f64,
    pub max_iters: Option<usize>,
    pub ordering: SweepOrdering,
    pub domain: DomainSpec,
    pub arc_segments: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceParams {
    /// `None` picks directions on both sides of and at the special angle.
    pub thetas: Option<Vec<f64>>,
    pub phis: Option<Vec<f64>>,
    pub r_min: f64,
    pub r_max: f64,
    pub per_decade: usize,
}

/// Everything a command needs, validated before dispatch.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Corner parameters; unset values come from a coefficient file or the defaults.
    pub beta: Option<f64>,
    pub sigma_plus: Option<f64>,
    pub sigma_minus: Option<f64>,
    pub radius: Option<f64>,
    pub coeffs: Option<CoeffSource>,
    pub out_dir: PathBuf,
    pub winslow: WinslowParams,
    pub trace: TraceParams,
    pub fit_arc: Option<PathBuf>,
    pub fit_terms: usize,
    pub seed: u64,
    pub mesh_resolution: usize,
    pub mesh_rho_max: f64,
}

fn bad(key: &str, msg: impl fmt::Display) -> CliError {
    CliError::bad_input(format!("{key}: {msg}"))
}

impl RunConfig {
    pub fn from_config(c: &ConfigFile) -> CliResult<Self> {
        let coeffs = match (c.get("coeffs.file"), c.f64_list("coeffs.a")?, c.f64_list("coeffs.b")?) {
            (Some(p), _, _) => Some(CoeffSource::File(PathBuf::from(p))),
            (None, Some(a), Some(b)) => Some(CoeffSource::Inline { a, b }),
            (None, None, None) => None,
            _ => return Err(bad("coeffs", "both `a` and `b` are required")),
        };
        let ordering = match c.get("winslow.ordering").unwrap_or("lexicographic") {
            "lexicographic" => SweepOrdering::Lexicographic,
            "four_color" | "four-color" => SweepOrdering::FourColor,
            other => return Err(bad("winslow.ordering", format!("unknown ordering `{other}`"))),
        };
        let domain = match c.get("winslow.domain").unwrap_or("square") {
            "sector" => DomainSpec::Sector,
            "square" => DomainSpec::Square,
            "rectangle" => {
                let r = c
                    .f64_list("winslow.rectangle")?
                    .ok_or_else(|| bad("winslow.rectangle", "required for a rectangle domain"))?;
                let r: [f64; 4] = r
                    .try_into()
                    .map_err(|_| bad("winslow.rectangle", "expected x0, x1, y0, y1"))?;
                DomainSpec::Rectangle(r)
            }
            path => DomainSpec::File(PathBuf::from(path)),
        };
        let rc = Self {
            beta: c.f64("corner.beta")?,
            sigma_plus: c.f64("corner.sigma_plus")?,
            sigma_minus: c.f64("corner.sigma_minus")?,
            radius: c.f64("corner.radius")?,
            coeffs,
            out_dir: PathBuf::from(c.get("output.dir").unwrap_or("out")),
            winslow: WinslowParams {
                nx: c.usize("winslow.nx")?.unwrap_or(17),
                ny: c.usize("winslow.ny")?.unwrap_or(17),
                tolerance: c.f64("winslow.tolerance")?.unwrap_or(cornermap::winslow::DEFAULT_TOLERANCE),
                relaxation: c.f64("winslow.relaxation")?.unwrap_or(cornermap::winslow::DEFAULT_RELAXATION),
                max_iters: c.usize("winslow.max_iters")?,
                ordering,
                domain,
                arc_segments: c.usize("winslow.arc_segments")?.unwrap_or(64),
            },
            trace: TraceParams {
                thetas: c.f64_list("trace.theta")?,
                phis: c.f64_list("trace.phi")?,
                r_min: c.f64("trace.r_min")?.unwrap_or(1e-8),
                r_max: c.f64("trace.r_max")?.unwrap_or(1e-2),
                per_decade: c.usize("trace.per_decade")?.unwrap_or(24),
            },
            fit_arc: c.get("fit.arc").map(PathBuf::from),
            fit_terms: c.usize("fit.terms")?.unwrap_or(8),
            seed: match c.get("seed") {
                Some(s) => s.parse().map_err(|_| bad("seed", format!("`{s}` is not an integer")))?,
                None => 7,
            },
            mesh_resolution: c.usize("mesh.resolution")?.unwrap_or(160),
            mesh_rho_max: c.f64("mesh.rho_max")?.unwrap_or(1.0),
        };
        rc.validate()?;
        Ok(rc)
    }

    fn validate(&self) -> CliResult<()> {
        let w = &self.winslow;
        if w.nx < 3 || w.ny < 3 {
            return Err(bad("winslow grid", format!("{}x{} needs nx, ny >= 3", w.nx, w.ny)));
        }
        if !(w.tolerance > 0.0) {
            return Err(bad("winslow.tolerance", "must be positive"));
        }
        if !(w.relaxation > 0.0 && w.relaxation < 2.0) {
            return Err(bad("winslow.relaxation", "must lie in (0, 2)"));
        }
        let t = &self.trace;
        if !(t.r_min > 0.0 && t.r_min < t.r_max && t.r_max <= 1.0) {
            return Err(bad("trace", "need 0 < r_min < r_max <= 1"));
        }
        if t.per_decade < 2 {
            return Err(bad("trace.per_decade", "need at least 2"));
        }
        if self.fit_terms == 0 {
            return Err(bad("fit.terms", "need at least 1"));
        }
        if self.mesh_resolution < 2 || !(self.mesh_rho_max > 0.0) {
            return Err(bad("mesh", "need resolution >= 2 and rho_max > 0"));
        }
        if self.coeffs.as_ref().is_none_or(|s| matches!(s, CoeffSource::Inline { .. })) {
            self.corner_config(None)?;
        }
        Ok(())
    }

    fn corner_config(&self, file: Option<&MapFile>) -> CliResult<CornerConfig<f64>> {
        let pick = |v: Option<f64>, f: Option<f64>, d: f64| v.or(f).unwrap_or(d);
        Ok(CornerConfig::new(
            pick(self.beta, file.map(|m| m.beta), 1.5),
            pick(self.sigma_plus, file.map(|m| m.sigma_plus), 1.0),
            pick(self.sigma_minus, file.map(|m| m.sigma_minus), 1.0),
            pick(self.radius, file.map(|m| m.radius), 1.0),
        )?)
    }

    /// The map described by the corner keys and coefficient source.
    pub fn map(&self) -> CliResult<HarmonicCornerMap64> {
        let (file, a, b) = match &self.coeffs {
            Some(CoeffSource::File(p)) => {
                let text = fs::read_to_string(p).map_err(|e| bad(&p.display().to_string(), e))?;
                let m = MapFile::from_json(&text)?;
                let (a, b) = (m.a.clone(), m.b.clone());
                (Some(m), a, b)
            }
            Some(CoeffSource::Inline { a, b }) => (None, a.clone(), b.clone()),
            None => (None, DEFAULT_A.to_vec(), DEFAULT_B.to_vec()),
        };
        let cfg = self.corner_config(file.as_ref())?;
        let coeffs = SeriesCoefficients::new(a, b)?;
        Ok(HarmonicCornerMap64::new(cfg, coeffs))
    }

    fn out(&self, name: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out_dir)?;
        Ok(self.out_dir.join(name))
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| bad(&path.display().to_string(), e))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> CliResult<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn csv_text(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&v| fmt_float(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn tick(x: f64) -> String {
    format!("{x:.3}")
}

// ---------------------------------------------------------------- angles

#[derive(Clone, Debug, Serialize)]
pub struct AnglesOutput {
    pub inverse: AngleLaw<f64>,
    pub forward: AngleLaw<f64>,
    pub theta_star: f64,
    pub phi_star: f64,
    pub files: Vec<PathBuf>,
}

/// Uniform samples over `[lo, hi]` with the jump locations inserted.
fn law_abscissae(law: &AngleLaw<f64>, n: usize) -> Vec<f64> {
    let (lo, hi) = law.domain();
    let mut xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    xs.extend(law.jumps().iter().map(|j| j.location));
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    xs
}

fn plot_law(svg: &mut Svg, rect: (f64, f64, f64, f64), law: &AngleLaw<f64>, conformal: (f64, f64), names: [&str; 3]) {
    let (lo, hi) = law.domain();
    let vals: Vec<f64> = law.pieces.iter().map(|p| p.value).collect();
    let vmin = vals.iter().copied().fold(conformal.0.min(conformal.1), f64::min);
    let vmax = vals.iter().copied().fold(conformal.0.max(conformal.1), f64::max);
    let pad = 0.08 * (vmax - vmin).max(1e-9);
    let panel = Panel::new(svg, rect, (lo, hi), (vmin - pad, vmax + pad));
    panel.frame(svg, names[2]);
    let (xl, xh, xm) = (tick(lo), tick(hi), tick(0.5 * (lo + hi)));
    let (yl, yh) = (tick(vmin), tick(vmax));
    panel.ticks(
        svg,
        &[(lo, &xl), (0.5 * (lo + hi), &xm), (hi, &xh)],
        &[(vmin, &yl), (vmax, &yh)],
    );
    panel.labels(svg, names[0], names[1]);
    panel.polyline(svg, &[(lo, conformal.0), (hi, conformal.1)], &Style::dashed("#c0392b", 1.2));
    for j in law.jumps() {
        if j.location > lo && j.location < hi {
            let guide = [(j.location, vmin - pad), (j.location, vmax + pad)];
            panel.polyline(svg, &guide, &Style::dashed("#888888", 0.8));
            let (px, py) = panel.map(j.location, vmax + pad);
            svg.text((px, py + 14.0), &format!("{}*", names[0]), 11.0, "middle");
        }
    }
    let step = Style::solid("#1f4e9c", 2.0);
    for p in &law.pieces {
        if p.lo == p.hi {
            panel.marker(svg, p.lo, p.value, true, "#1f4e9c");
            continue;
        }
        panel.polyline(svg, &[(p.lo, p.value), (p.hi, p.value)], &step);
        panel.marker(svg, p.lo, p.value, p.lo_closed, "#1f4e9c");
        panel.marker(svg, p.hi, p.value, p.hi_closed, "#1f4e9c");
    }
}

/// Tabulates and plots `phi(theta)` and `theta(phi)` with the conformal lines.
pub fn cmd_angles(rc: &RunConfig) -> CliResult<AnglesOutput> {
    let map = rc.map()?;
    let kit = AsymptoticKit64::new(map.clone())?;
    let beta = map.config().beta();
    let h = map.config().half_angle();
    let inverse = kit.inverse_law();
    let forward = kit.forward_law();

    let rows: Vec<Vec<f64>> = law_abscissae(&inverse, 180)
        .into_iter()
        .map(|t| vec![t, inverse.eval(t).unwrap_or(f64::NAN), conformal_phi_of_theta(beta, t)])
        .collect();
    let inv_path = rc.out("phi_of_theta.csv")?;
    write_text(&inv_path, &csv_text(&["theta", "phi", "phi_conformal"], &rows))?;
    let rows: Vec<Vec<f64>> = law_abscissae(&forward, 180)
        .into_iter()
        .map(|p| vec![p, forward.eval(p).unwrap_or(f64::NAN), conformal_theta_of_phi(beta, p)])
        .collect();
    let fwd_path = rc.out("theta_of_phi.csv")?;
    write_text(&fwd_path, &csv_text(&["phi", "theta", "theta_conformal"], &rows))?;

    let mut svg = Svg::new(980.0, 420.0);
    svg.text((490.0, 24.0), &format!("exit angles, beta = {beta}"), 15.0, "middle");
    plot_law(&mut svg, (80.0, 70.0, 380.0, 280.0), &inverse, (-h, h), ["theta", "phi", "phi(theta)"]);
    plot_law(&mut svg, (570.0, 70.0, 380.0, 280.0), &forward, (0.0, PI), ["phi", "theta", "theta(phi)"]);
    let svg_path = rc.out("angles.svg")?;
    write_text(&svg_path, &svg.finish())?;

    Ok(AnglesOutput {
        inverse,
        forward,
        theta_star: kit.theta_star(),
        phi_star: map.derived().phi_star,
        files: vec![inv_path, fwd_path, svg_path],
    })
}

// ---------------------------------------------------------------- trace

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub kind: &'static str,
    pub angle: f64,
    pub file: Option<PathBuf>,
    pub samples: usize,
    pub estimate: Option<ExitAngleEstimate<f64>>,
    pub discrepancy: Option<DiscrepancyReport<f64>>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceOutput {
    pub theta_star: f64,
    pub phi_star: f64,
    pub entries: Vec<TraceEntry>,
}

/// Traces inverse and forward curves, writing one CSV per curve plus `trace.json`.
pub fn cmd_trace(rc: &RunConfig) -> CliResult<TraceOutput> {
    let map = rc.map()?;
    let kit = AsymptoticKit64::new(map.clone())?;
    let h = map.config().half_angle();
    let ts = kit.theta_star();
    let ps = map.derived().phi_star;
    let t = &rc.trace;
    let radii = log_radii(map.config().radius(), t.r_min, t.r_max, t.per_decade);
    let thetas = t.thetas.clone().unwrap_or_else(|| vec![0.5 * ts, ts, 0.5 * (ts + PI)]);
    let phis = t.phis.clone().unwrap_or_else(|| vec![0.5 * (ps - h), ps, 0.5 * (ps + h)]);

    let mut entries = Vec::new();
    for (k, &theta) in thetas.iter().enumerate() {
        let curve = trace_inverse_ray(&map, theta, &radii);
        entries.push(trace_entry(rc, "inverse", theta, &format!("inverse_{k}.csv"), curve, &kit, &inverse_candidates(&map))?);
    }
    for (k, &phi) in phis.iter().enumerate() {
        let curve = trace_forward_ray(&map, phi, &radii);
        entries.push(trace_entry(rc, "forward", phi, &format!("forward_{k}.csv"), curve, &kit, &forward_candidates(&kit))?);
    }
    let out = TraceOutput {
        theta_star: ts,
        phi_star: ps,
        entries,
    };
    write_json(&rc.out("trace.json")?, &out)?;
    Ok(out)
}

fn trace_entry(
    rc: &RunConfig,
    kind: &'static str,
    angle: f64,
    name: &str,
    curve: cornermap::Result<cornermap::TracedCurve64>,
    kit: &AsymptoticKit64,
    candidates: &[f64],
) -> CliResult<TraceEntry> {
    let mut e = TraceEntry {
        kind,
        angle,
        file: None,
        samples: 0,
        estimate: None,
        discrepancy: None,
        errors: Vec::new(),
    };
    let curve = match curve {
        Ok(c) => c,
        Err(err) => {
            e.errors.push(err.to_string());
            return Ok(e);
        }
    };
    let path = rc.out(name)?;
    let f = fs::File::create(&path)?;
    write_curve_csv(f, &curve)?;
    e.file = Some(path);
    e.samples = curve.len();
    match estimate_exit_angle(&curve, candidates) {
        Ok(v) => e.estimate = Some(v),
        Err(err) => e.errors.push(err.to_string()),
    }
    match compare_with_asymptotics(&curve, kit) {
        Ok(v) => e.discrepancy = Some(v),
        Err(err) => e.errors.push(err.to_string()),
    }
    Ok(e)
}

// ---------------------------------------------------------------- mesh images

#[derive(Clone, Debug, Serialize)]
pub struct MeshOutput {
    pub xi: MeshImages<f64>,
    pub t: MeshImages<f64>,
    pub files: Vec<PathBuf>,
}

fn bbox(lines: &[Polyline<f64>]) -> ((f64, f64), (f64, f64)) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in lines.iter().flat_map(|l| &l.points) {
        b = (b.0.min(p[0]), b.1.max(p[0]), b.2.min(p[1]), b.3.max(p[1]));
    }
    if !b.0.is_finite() {
        return ((-1.0, 1.0), (-1.0, 1.0));
    }
    let pad = 0.05 * (b.1 - b.0).max(b.3 - b.2).max(1e-9);
    ((b.0 - pad, b.1 + pad), (b.2 - pad, b.3 + pad))
}

fn draw_mesh(svg: &mut Svg, rect: (f64, f64, f64, f64), title: &str, lines: &[Polyline<f64>]) {
    let (xr, yr) = bbox(lines);
    let panel = Panel::equal(svg, rect, xr, yr);
    panel.frame(svg, title);
    for l in lines {
        let radial = l.label.starts_with("theta=") || l.label.starts_with("phi=");
        let color = if radial { "#c0392b" } else { "#1f4e9c" };
        let style = if l.truncated {
            Style::dashed(color, 1.2)
        } else {
            Style::solid(color, 1.2)
        };
        let pts: Vec<(f64, f64)> = l.points.iter().map(|p| (p[0], p[1])).collect();
        panel.polyline(svg, &pts, &style);
    }
}

/// Renders the polar test meshes and their images.
pub fn cmd_mesh_images(rc: &RunConfig) -> CliResult<MeshOutput> {
    let map = rc.map()?;
    let xi = mesh_images(
        &map,
        &MeshSpec::InversePolar {
            circles: 5,
            rays: 8,
            rho_max: rc.mesh_rho_max,
            resolution: rc.mesh_resolution,
        },
    );
    let t = mesh_images(
        &map,
        &MeshSpec::ForwardPolar {
            arcs: 5,
            rays: 8,
            resolution: rc.mesh_resolution,
        },
    );
    let mut svg = Svg::new(900.0, 860.0);
    svg.text(
        (450.0, 24.0),
        &format!("polar meshes and images, beta = {}", map.config().beta()),
        15.0,
        "middle",
    );
    draw_mesh(&mut svg, (40.0, 60.0, 390.0, 350.0), "Xi (w-plane)", &xi.mesh);
    draw_mesh(&mut svg, (470.0, 60.0, 390.0, 350.0), "F^-1(Xi) (z-plane)", &xi.image);
    draw_mesh(&mut svg, (40.0, 480.0, 390.0, 350.0), "T (z-plane)", &t.mesh);
    draw_mesh(&mut svg, (470.0, 480.0, 390.0, 350.0), "F(T) (w-plane)", &t.image);
    let svg_path = rc.out("mesh_images.svg")?;
    write_text(&svg_path, &svg.finish())?;
    let json_path = rc.out("mesh_images.json")?;
    let mut out = MeshOutput {
        xi,
        t,
        files: vec![svg_path, json_path.clone()],
    };
    write_json(&json_path, &out)?;
    out.files.dedup();
    Ok(out)
}

// ---------------------------------------------------------------- winslow

#[derive(Clone, Debug, Serialize)]
pub struct WinslowOutput {
    pub domain: DomainBoundary64,
    pub grid: WinslowGrid64,
    pub report: SolveReport<f64>,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct WinslowSummary<'a> {
    nx: usize,
    ny: usize,
    domain: &'a DomainBoundary64,
    report: &'a SolveReport<f64>,
}

pub fn winslow_domain(rc: &RunConfig) -> CliResult<DomainBoundary64> {
    Ok(match &rc.winslow.domain {
        DomainSpec::Square => DomainBoundary64::unit_square(),
        DomainSpec::Rectangle(r) => DomainBoundary64::rectangle(r[0], r[1], r[2], r[3])?,
        DomainSpec::Sector => {
            SectorTestCase::new(rc.beta.unwrap_or(1.5), rc.radius.unwrap_or(1.0), rc.winslow.arc_segments)?.domain()
        }
        DomainSpec::File(p) => {
            let text = fs::read_to_string(p).map_err(|e| bad(&p.display().to_string(), e))?;
            DomainBoundary64::from_json(&text)?
        }
    })
}

/// Solves the Winslow system and writes `grid.csv`, `report.json` and `grid.svg`.
/// A run that stops without converging still writes its files.
pub fn cmd_winslow(rc: &RunConfig) -> CliResult<WinslowOutput> {
    let domain = winslow_domain(rc)?;
    let w = &rc.winslow;
    let opts = SolveOptions {
        tolerance: w.tolerance,
        max_iters: w.max_iters,
        relaxation: w.relaxation,
        ordering: w.ordering,
    };
    let (grid, report) = cornermap::winslow::solve(&domain, w.nx, w.ny, &opts)?;
    let grid_path = rc.out("grid.csv")?;
    grid.to_csv(fs::File::create(&grid_path)?)?;
    let report_path = rc.out("report.json")?;
    write_json(
        &report_path,
        &WinslowSummary {
            nx: w.nx,
            ny: w.ny,
            domain: &domain,
            report: &report,
        },
    )?;
    let svg_path = rc.out("grid.svg")?;
    write_text(&svg_path, &grid_svg(&domain, &grid, &report))?;
    Ok(WinslowOutput {
        domain,
        grid,
        report,
        files: vec![grid_path, report_path, svg_path],
    })
}

fn grid_svg(domain: &DomainBoundary64, g: &WinslowGrid64, report: &SolveReport<f64>) -> String {
    let mut svg = Svg::new(640.0, 640.0);
    let title = format!(
        "Winslow grid {}x{}, {} sweeps, folded cells: {}",
        g.nx,
        g.ny,
        report.iterations,
        report.fold_cells.len()
    );
    svg.text((320.0, 24.0), &title, 14.0, "middle");
    let (x0, x1, y0, y1) = g.boundary_bbox();
    let pad = 0.05 * (x1 - x0).max(y1 - y0);
    let panel = Panel::equal(&mut svg, (30.0, 50.0, 580.0, 570.0), (x0 - pad, x1 + pad), (y0 - pad, y1 + pad));
    for &(i, j) in &report.fold_cells {
        let px: Vec<(f64, f64)> = g.cell(i, j).iter().map(|p| panel.map(p[0], p[1])).collect();
        svg.polygon(&px, "#f5a3a3", "#c0392b");
    }
    let st = Style::solid("#1f4e9c", 0.8);
    for j in 0..g.ny {
        let row: Vec<(f64, f64)> = (0..g.nx).map(|i| g.node(i, j)).map(|p| (p[0], p[1])).collect();
        panel.polyline(&mut svg, &row, &st);
    }
    for i in 0..g.nx {
        let col: Vec<(f64, f64)> = (0..g.ny).map(|j| g.node(i, j)).map(|p| (p[0], p[1])).collect();
        panel.polyline(&mut svg, &col, &st);
    }
    let mut outline: Vec<(f64, f64)> = domain.vertices().iter().map(|p| (p[0], p[1])).collect();
    outline.push(outline[0]);
    panel.polyline(&mut svg, &outline, &Style::solid("black", 1.5));
    for &m in domain.corner_markers() {
        let v = domain.vertices()[m];
        panel.marker(&mut svg, v[0], v[1], true, "black");
    }
    svg.finish()
}

// ---------------------------------------------------------------- validate

#[derive(Clone, Debug, Serialize)]
pub struct ValidateOutput {
    pub rows: Vec<Row>,
    pub files: Vec<PathBuf>,
}

impl ValidateOutput {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:<4} {:<56} {:<26} {:>12}  {}\n", "", "case", "quantity", "measured", "expected");
        for r in &self.rows {
            let m = r.measured.map_or("-".to_owned(), |v| format!("{v:.6}"));
            s.push_str(&format!(
                "{:<4} {:<56} {:<26} {:>12}  {}{}\n",
                if r.pass { "PASS" } else { "FAIL" },
                r.case,
                r.quantity,
                m,
                r.expected_text(),
                if r.note.is_empty() { String::new() } else { format!("  ({})", r.note) }
            ));
        }
        let failed = self.rows.iter().filter(|r| !r.pass).count();
        s.push_str(&format!("{} rows, {} failed\n", self.rows.len(), failed));
        s
    }
}

/// Runs the oracle table: the configured map when coefficients are given, else the default suite.
pub fn cmd_validate(rc: &RunConfig) -> CliResult<ValidateOutput> {
    let rows = if rc.coeffs.is_some() {
        let map = rc.map()?;
        let mut rows = suite::map_rows("config", &map);
        rows.extend(suite::jump_rows("config", &map));
        rows
    } else {
        suite::default_suite(rc.seed)
    };
    let json = rc.out("validate.json")?;
    let table = rc.out("validate.txt")?;
    let mut out = ValidateOutput {
        rows,
        files: vec![json.clone(), table.clone()],
    };
    write_json(&json, &out.rows)?;
    write_text(&table, &out.table())?;
    out.files.dedup();
    Ok(out)
}

// ---------------------------------------------------------------- fit

/// Fits series coefficients to arc data from `fit.arc` and writes `coeffs.json`.
pub fn cmd_fit(rc: &RunConfig) -> CliResult<MapFile> {
    let arc = rc
        .fit_arc
        .as_ref()
        .ok_or_else(|| bad("fit.arc", "an arc CSV is required"))?;
    let f = fs::File::open(arc).map_err(|e| bad(&arc.display().to_string(), e))?;
    let samples = read_arc_csv::<f64, _>(f)?;
    let cfg = rc.corner_config(None)?;
    let coeffs = fit_from_arc_with(
        &cfg,
        &cfg.derive_params(),
        &samples,
        FitOptions {
            n_terms: rc.fit_terms,
            panels: DEFAULT_PANELS,
        },
    )?;
    let m = MapFile::from_map(&HarmonicCornerMap64::new(cfg, coeffs));
    write_text(&rc.out("coeffs.json")?, &(m.to_json()? + "\n"))?;
    Ok(m)
}
