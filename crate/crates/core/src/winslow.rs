//! Winslow grid generation on the parameter square `(-1/2, 1/2) x (0, 1)`.
//!
//! The grid is the discrete inverse `x(u, v)` of a harmonic map onto the
//! square. Each coordinate satisfies
//! `(x_v^2 + y_v^2) x_uu - 2 (x_u x_v + y_u y_v) x_uv + (x_u^2 + y_u^2) x_vv = 0`,
//! discretized by central differences and relaxed by frozen-coefficient SOR.

use log::{debug, info};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corner::CornerConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{fit_from_arc_with, FitOptions, HarmonicCornerMap};

pub const DEFAULT_RELAXATION: f64 = 1.7;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// `max_iters` defaults to this multiple of `max(nx, ny)`.
pub const ITERS_PER_NODE: usize = 200;

/// Closed counterclockwise polyline with its four square-side sub-arcs.
///
/// `side_map[k]` is the vertex where square corner `k` lands, corners ordered
/// `(-1/2, 0)`, `(1/2, 0)`, `(1/2, 1)`, `(-1/2, 1)`. Side `k` runs from
/// `side_map[k]` to `side_map[(k + 1) % 4]` along the polyline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBoundary<T> {
    vertices: Vec<[T; 2]>,
    side_map: [usize; 4],
    #[serde(default)]
    corner_markers: Vec<usize>,
}

fn cross<T: Scalar>(o: [T; 2], a: [T; 2], b: [T; 2]) -> T {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_intersect<T: Scalar>(p1: [T; 2], p2: [T; 2], q1: [T; 2], q2: [T; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    let on = |a: [T; 2], b: [T; 2], p: [T; 2], d: T| {
        d == z
            && p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

impl<T: Scalar> DomainBoundary<T> {
    pub fn new(vertices: Vec<[T; 2]>, side_map: [usize; 4], corner_markers: Vec<usize>) -> Result<Self> {
        let d = Self {
            vertices,
            side_map,
            corner_markers,
        };
        d.validate()?;
        Ok(d)
    }

    /// Checks the polyline is simple and counterclockwise and that `side_map` partitions it.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::InvalidDomain(format!("{n} vertices, need at least 3")));
        }
        if self.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDomain("non-finite vertex".into()));
        }
        if let Some(&k) = self.side_map.iter().chain(&self.corner_markers).find(|&&k| k >= n) {
            return Err(Error::InvalidDomain(format!("vertex index {k} out of range")));
        }
        let s0 = self.side_map[0];
        let offs: Vec<usize> = self.side_map.iter().map(|&k| (k + n - s0) % n).collect();
        if !offs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidDomain(format!(
                "side_map {:?} is not in counterclockwise order",
                self.side_map
            )));
        }
        if self.signed_area() <= T::zero() {
            return Err(Error::InvalidDomain("polyline is not counterclockwise".into()));
        }
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::InvalidDomain(format!("edges {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }

    pub fn signed_area(&self) -> T {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<T>()
            * T::half()
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn side_map(&self) -> [usize; 4] {
        self.side_map
    }

    pub fn corner_markers(&self) -> &[usize] {
        &self.corner_markers
    }

    /// Axis-aligned rectangle with the square corners on its corners.
    pub fn rectangle(x0: T, x1: T, y0: T, y1: T) -> Result<Self> {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]], [0, 1, 2, 3], vec![])
    }

    /// The parameter square itself.
    pub fn unit_square() -> Self {
        Self::rectangle(-T::half(), T::half(), T::zero(), T::one()).expect("valid square")
    }

    /// Vertices of side `k` from its start corner to its end corner.
    pub fn side(&self, k: usize) -> Vec<[T; 2]> {
        let n = self.vertices.len();
        let (a, b) = (self.side_map[k % 4], self.side_map[(k + 1) % 4]);
        let len = (b + n - a) % n;
        (0..=len).map(|s| self.vertices[(a + s) % n]).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Boundary node positions, each side listed in increasing `u` or `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryNodes<T> {
    pub bottom: Vec<[T; 2]>,
    pub right: Vec<[T; 2]>,
    pub top: Vec<[T; 2]>,
    pub left: Vec<[T; 2]>,
}

/// `n` points at equal arclength along a polyline, endpoints included.
fn resample<T: Scalar>(poly: &[[T; 2]], n: usize, side: usize) -> Result<Vec<[T; 2]>> {
    let mut cum = vec![T::zero()];
    for w in poly.windows(2) {
        let l = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        cum.push(*cum.last().expect("non-empty") + l);
    }
    let total = *cum.last().expect("non-empty");
    if !(total > T::zero()) {
        return Err(Error::DegenerateSide { side });
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        if k == 0 {
            out.push(poly[0]);
            continue;
        }
        if k == n - 1 {
            out.push(*poly.last().expect("non-empty"));
            continue;
        }
        let s = total * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1);
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let l = cum[seg + 1] - cum[seg];
        let t = if l > T::zero() { (s - cum[seg]) / l } else { T::zero() };
        let (a, b) = (poly[seg], poly[seg + 1]);
        out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    Ok(out)
}

/// Constant-speed placement of boundary nodes on each side.
pub fn parameterize_boundary<T: Scalar>(
    domain: &DomainBoundary<T>,
    nx: usize,
    ny: usize,
) -> Result<BoundaryNodes<T>> {
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidConfig(format!("grid {nx}x{ny}: need nx, ny >= 3")));
    }
    let bottom = resample(&domain.side(0), nx, 0)?;
    let right = resample(&domain.side(1), ny, 1)?;
    let mut top = resample(&domain.side(2), nx, 2)?;
    top.reverse();
    let mut left = resample(&domain.side(3), ny, 3)?;
    left.reverse();
    Ok(BoundaryNodes {
        bottom,
        right,
        top,
        left,
    })
}

/// Node coordinates over the square; node `(i, j)` sits at `u = -1/2 + i/(nx-1)`, `v = j/(ny-1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WinslowGrid<T> {
    pub nx: usize,
    pub ny: usize,
    /// Row-major by `j`: index `j * nx + i`.
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Scalar> WinslowGrid<T> {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node(&self, i: usize, j: usize) -> [T; 2] {
        let k = self.idx(i, j);
        [self.x[k], self.y[k]]
    }

    pub fn set_node(&mut self, i: usize, j: usize, p: [T; 2]) {
        let k = self.idx(i, j);
        self.x[k] = p[0];
        self.y[k] = p[1];
    }

    pub fn param_u(&self, i: usize) -> T {
        -T::half() + T::from_usize_lossy(i) / T::from_usize_lossy(self.nx - 1)
    }

    pub fn param_v(&self, j: usize) -> T {
        T::from_usize_lossy(j) / T::from_usize_lossy(self.ny - 1)
    }

    /// The uniform lattice of the square itself.
    pub fn lattice(nx: usize, ny: usize) -> Self {
        let mut g = Self {
            nx,
            ny,
            x: vec![T::zero(); nx * ny],
            y: vec![T::zero(); nx * ny],
        };
        for j in 0..ny {
            for i in 0..nx {
                let p = [g.param_u(i), g.param_v(j)];
                g.set_node(i, j, p);
            }
        }
        g
    }

    /// Transfinite (Coons) interpolation of the boundary nodes.
    pub fn transfinite(b: &BoundaryNodes<T>) -> Self {
        let (nx, ny) = (b.bottom.len(), b.left.len());
        let mut g = Self {
            nx,
            ny,
            x: vec![T::zero(); nx * ny],
            y: vec![T::zero(); nx * ny],
        };
        let (p00, p10, p11, p01) = (b.bottom[0], b.bottom[nx - 1], b.top[nx - 1], b.top[0]);
        for j in 0..ny {
            let t = T::from_usize_lossy(j) / T::from_usize_lossy(ny - 1);
            for i in 0..nx {
                let s = T::from_usize_lossy(i) / T::from_usize_lossy(nx - 1);
                let one = T::one();
                let mut p = [T::zero(); 2];
                for c in 0..2 {
                    p[c] = (one - t) * b.bottom[i][c] + t * b.top[i][c] + (one - s) * b.left[j][c]
                        + s * b.right[j][c]
                        - ((one - s) * (one - t) * p00[c]
                            + s * (one - t) * p10[c]
                            + s * t * p11[c]
                            + (one - s) * t * p01[c]);
                }
                g.set_node(i, j, p);
            }
        }
        // keep boundary nodes exact
        for i in 0..nx {
            g.set_node(i, 0, b.bottom[i]);
            g.set_node(i, ny - 1, b.top[i]);
        }
        for j in 0..ny {
            g.set_node(0, j, b.left[j]);
            g.set_node(nx - 1, j, b.right[j]);
        }
        g
    }

    /// Bounding box `(xmin, xmax, ymin, ymax)` of the boundary nodes.
    pub fn boundary_bbox(&self) -> (T, T, T, T) {
        let mut bb = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
        for j in 0..self.ny {
            for i in 0..self.nx {
                if i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny {
                    let p = self.node(i, j);
                    bb = (bb.0.min(p[0]), bb.1.max(p[0]), bb.2.min(p[1]), bb.3.max(p[1]));
                }
            }
        }
        bb
    }

    /// The four corners of cell `(i, j)`, counterclockwise in parameter space.
    pub fn cell(&self, i: usize, j: usize) -> [[T; 2]; 4] {
        [self.node(i, j), self.node(i + 1, j), self.node(i + 1, j + 1), self.node(i, j + 1)]
    }

    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i", "j", "x", "y"])?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.node(i, j);
                wr.write_record([
                    i.to_string(),
                    j.to_string(),
                    format!("{:.16e}", p[0].as_f64()),
                    format!("{:.16e}", p[1].as_f64()),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn from_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let bad = || Error::InvalidConfig(format!("bad grid row {:?}", rec));
            let i: usize = rec.get(0).and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            let j: usize = rec.get(1).and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            let x: f64 = rec.get(2).and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            let y: f64 = rec.get(3).and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            rows.push((i, j, x, y));
        }
        let nx = rows.iter().map(|r| r.0).max().map_or(0, |m| m + 1);
        let ny = rows.iter().map(|r| r.1).max().map_or(0, |m| m + 1);
        if rows.len() != nx * ny || nx < 2 || ny < 2 {
            return Err(Error::InvalidConfig(format!(
                "{} rows do not form an {nx}x{ny} grid",
                rows.len()
            )));
        }
        let mut g = Self {
            nx,
            ny,
            x: vec![T::zero(); nx * ny],
            y: vec![T::zero(); nx * ny],
        };
        for (i, j, x, y) in rows {
            g.set_node(i, j, [T::lit(x), T::lit(y)]);
        }
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrdering {
    /// Gauss-Seidel order, `i` fastest.
    #[default]
    Lexicographic,
    /// Four colors by `(i mod 2, j mod 2)`; no two nodes of one color share a
    /// 9-point stencil, so each color is updated in parallel.
    FourColor,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions<T> {
    pub tolerance: T,
    /// `None` means `200 * max(nx, ny)`.
    pub max_iters: Option<usize>,
    pub relaxation: T,
    pub ordering: SweepOrdering,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(DEFAULT_TOLERANCE),
            max_iters: None,
            relaxation: T::lit(DEFAULT_RELAXATION),
            ordering: SweepOrdering::Lexicographic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport<T> {
    pub iterations: usize,
    pub converged: bool,
    /// Largest Jacobi update `|x* - x|` on the initial grid.
    pub initial_residual: T,
    /// Largest node displacement of every sweep.
    pub final_update: Vec<T>,
    pub fold_cells: Vec<(usize, usize)>,
    /// Interior nodes found outside the boundary bounding box, summed over sweeps.
    pub bbox_violations: usize,
}

impl<T: Scalar> SolveReport<T> {
    pub fn last_update(&self) -> Option<T> {
        self.final_update.last().copied()
    }
}

/// The stencil target `x*` of interior node `(i, j)` for both coordinates.
fn stencil<T: Scalar>(g: &WinslowGrid<T>, i: usize, j: usize, hu2: T, hv2: T) -> [T; 2] {
    let nx = g.nx;
    let k = j * nx + i;
    let (e, w, n, s) = (k + 1, k - 1, k + nx, k - nx);
    let (ne, nw, se, sw) = (n + 1, n - 1, s + 1, s - 1);
    let two = T::two();
    let four = T::lit(4.0);
    let xu = (g.x[e] - g.x[w]) / two;
    let yu = (g.y[e] - g.y[w]) / two;
    let xv = (g.x[n] - g.x[s]) / two;
    let yv = (g.y[n] - g.y[s]) / two;
    let alpha = xv * xv + yv * yv;
    let beta = xu * xv + yu * yv;
    let gamma = xu * xu + yu * yu;
    // derivatives above are in index units; rescale the coefficients to (u, v)
    let (alpha, beta, gamma) = (alpha / hv2, beta / (hu2 * hv2).sqrt(), gamma / hu2);
    let denom = two * alpha / hu2 + two * gamma / hv2;
    if !(denom > T::zero()) {
        return [g.x[k], g.y[k]];
    }
    let mix = |f: &[T]| (f[ne] - f[nw] - f[se] + f[sw]) / (four * (hu2 * hv2).sqrt());
    let x = (alpha * (g.x[e] + g.x[w]) / hu2 + gamma * (g.x[n] + g.x[s]) / hv2 - two * beta * mix(&g.x)) / denom;
    let y = (alpha * (g.y[e] + g.y[w]) / hu2 + gamma * (g.y[n] + g.y[s]) / hv2 - two * beta * mix(&g.y)) / denom;
    [x, y]
}

fn max_jacobi_update<T: Scalar>(g: &WinslowGrid<T>, hu2: T, hv2: T) -> T {
    (1..g.ny - 1)
        .into_par_iter()
        .map(|j| {
            (1..g.nx - 1)
                .map(|i| {
                    let p = stencil(g, i, j, hu2, hv2);
                    let q = g.node(i, j);
                    (p[0] - q[0]).hypot(p[1] - q[1])
                })
                .fold(T::zero(), T::max)
        })
        .reduce(T::zero, T::max)
}

/// Solves the Winslow system on `domain` with an `nx x ny` node grid.
pub fn solve<T: Scalar>(
    domain: &DomainBoundary<T>,
    nx: usize,
    ny: usize,
    opts: &SolveOptions<T>,
) -> Result<(WinslowGrid<T>, SolveReport<T>)> {
    let b = parameterize_boundary(domain, nx, ny)?;
    solve_from(WinslowGrid::transfinite(&b), opts)
}

/// Relaxes an initial grid whose boundary nodes are already placed.
pub fn solve_from<T: Scalar>(
    mut g: WinslowGrid<T>,
    opts: &SolveOptions<T>,
) -> Result<(WinslowGrid<T>, SolveReport<T>)> {
    let omega = opts.relaxation;
    if !(omega > T::zero() && omega < T::two()) {
        return Err(Error::Domain {
            what: "relaxation",
            value: omega.as_f64(),
            range: "(0, 2)".into(),
        });
    }
    if !(opts.tolerance > T::zero()) {
        return Err(Error::Domain {
            what: "tolerance",
            value: opts.tolerance.as_f64(),
            range: "(0, inf)".into(),
        });
    }
    let (nx, ny) = (g.nx, g.ny);
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidConfig(format!("grid {nx}x{ny}: need nx, ny >= 3")));
    }
    let max_iters = opts.max_iters.unwrap_or(ITERS_PER_NODE * nx.max(ny));
    let hu = T::one() / T::from_usize_lossy(nx - 1);
    let hv = T::one() / T::from_usize_lossy(ny - 1);
    let (hu2, hv2) = (hu * hu, hv * hv);
    let bbox = g.boundary_bbox();
    let slack = T::lit(1e-12) * (bbox.1 - bbox.0).max(bbox.3 - bbox.2).max(T::one());

    let initial_residual = max_jacobi_update(&g, hu2, hv2);
    let mut history = Vec::new();
    let mut violations = 0usize;
    let mut converged = initial_residual < opts.tolerance;
    if converged {
        debug!("initial grid already satisfies tolerance ({initial_residual})");
    }
    let mut sweep = 0;
    while !converged && sweep < max_iters {
        sweep += 1;
        let update = match opts.ordering {
            SweepOrdering::Lexicographic => {
                let mut m = T::zero();
                for j in 1..ny - 1 {
                    for i in 1..nx - 1 {
                        let p = stencil(&g, i, j, hu2, hv2);
                        let q = g.node(i, j);
                        let d = [omega * (p[0] - q[0]), omega * (p[1] - q[1])];
                        g.set_node(i, j, [q[0] + d[0], q[1] + d[1]]);
                        m = m.max(d[0].hypot(d[1]));
                    }
                }
                m
            }
            SweepOrdering::FourColor => {
                let mut m = T::zero();
                for color in 0..4 {
                    let updates: Vec<(usize, usize, [T; 2])> = (1..ny - 1)
                        .into_par_iter()
                        .flat_map_iter(|j| {
                            let g = &g;
                            (1..nx - 1)
                                .filter(move |i| (i % 2) + 2 * (j % 2) == color)
                                .map(move |i| {
                                    let p = stencil(g, i, j, hu2, hv2);
                                    let q = g.node(i, j);
                                    (i, j, [q[0] + omega * (p[0] - q[0]), q[1] + omega * (p[1] - q[1])])
                                })
                        })
                        .collect();
                    for (i, j, p) in updates {
                        let q = g.node(i, j);
                        m = m.max((p[0] - q[0]).hypot(p[1] - q[1]));
                        g.set_node(i, j, p);
                    }
                }
                m
            }
        };
        if !update.is_finite() {
            return Err(Error::Diverged { sweep });
        }
        history.push(update);
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let p = g.node(i, j);
                if p[0] < bbox.0 - slack || p[0] > bbox.1 + slack || p[1] < bbox.2 - slack || p[1] > bbox.3 + slack {
                    violations += 1;
                }
            }
        }
        converged = update < opts.tolerance;
    }
    let folds = fold_cells(&g);
    info!(
        "winslow {nx}x{ny}: {} sweeps, converged = {converged}, {} folded cells",
        sweep,
        folds.len()
    );
    Ok((
        g,
        SolveReport {
            iterations: sweep,
            converged,
            initial_residual,
            final_update: history,
            fold_cells: folds,
            bbox_violations: violations,
        },
    ))
}

/// Cells with a non-positive signed area at any of their four corners.
pub fn fold_cells<T: Scalar>(g: &WinslowGrid<T>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let c = g.cell(i, j);
            let folded = (0..4).any(|k| cross(c[(k + 3) % 4], c[k], c[(k + 1) % 4]) <= T::zero());
            if folded {
                out.push((i, j));
            }
        }
    }
    out
}

/// Image residuals `|F(x_ij) - (u_i, v_j)|` of a grid under a harmonic map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompositionReport<T> {
    /// Over all interior nodes.
    pub max: T,
    /// Interior nodes with `sqrt(u^2 + v^2) < near_radius`.
    pub near_corner: T,
    /// Interior nodes at least `near_radius` from the vertex image and from the square corners.
    pub far_field: T,
    pub boundary_deviation: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompositionOptions<T> {
    /// Allowed `|F - (u, 0)|` on the bottom side.
    pub side_tolerance: T,
    /// Allowed `|F - (u, v)|` on the other three sides.
    pub arc_tolerance: T,
    pub near_radius: T,
}

impl<T: Scalar> Default for CompositionOptions<T> {
    fn default() -> Self {
        Self {
            side_tolerance: T::lit(1e-8),
            arc_tolerance: T::lit(0.02),
            near_radius: T::lit(0.25),
        }
    }
}

pub fn composition_residual<T: Scalar>(
    g: &WinslowGrid<T>,
    map: &HarmonicCornerMap<T>,
    opts: &CompositionOptions<T>,
) -> Result<CompositionReport<T>> {
    let cfg = map.config();
    let h = cfg.half_angle();
    let big = cfg.radius();
    let geo = T::lit(1e-9) * big.max(T::one());
    let polar = |p: [T; 2]| (p[0].hypot(p[1]), p[1].atan2(p[0]));
    for i in 0..g.nx {
        let (r, phi) = polar(g.node(i, 0));
        if r > geo && ((phi.abs() - h).abs() > T::lit(1e-9) || r > big + geo) {
            return Err(Error::NotApplicable(format!(
                "bottom node {i} at r = {r}, phi = {phi} is not on the sector sides"
            )));
        }
    }
    let eval = |p: [T; 2]| -> Result<Complex<T>> {
        let (r, phi) = polar(p);
        if r > big * (T::one() + T::lit(1e-9)) || phi.abs() > h + T::lit(1e-9) {
            return Err(Error::NotApplicable(format!("node ({}, {}) lies outside the sector", p[0], p[1])));
        }
        map.evaluate(r.min(big), phi.max(-h).min(h))
    };
    let mut boundary_deviation = T::zero();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let edge = i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny;
            if !edge {
                continue;
            }
            let w = eval(g.node(i, j))?;
            let dev = (w - Complex::new(g.param_u(i), g.param_v(j))).norm();
            let tol = if j == 0 { opts.side_tolerance } else { opts.arc_tolerance };
            if dev > tol {
                return Err(Error::Misaligned {
                    deviation: dev.as_f64(),
                    tolerance: tol.as_f64(),
                });
            }
            boundary_deviation = boundary_deviation.max(dev);
        }
    }
    let half = T::half();
    let kinks = [[-half, T::zero()], [half, T::zero()], [half, T::one()], [-half, T::one()]];
    let (mut near, mut far, mut all) = (T::zero(), T::zero(), T::zero());
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let (u, v) = (g.param_u(i), g.param_v(j));
            let dev = (eval(g.node(i, j))? - Complex::new(u, v)).norm();
            all = all.max(dev);
            if u.hypot(v) < opts.near_radius {
                near = near.max(dev);
            } else if kinks.iter().all(|k| (u - k[0]).hypot(v - k[1]) >= opts.near_radius) {
                far = far.max(dev);
            }
        }
    }
    Ok(CompositionReport {
        max: all,
        near_corner: near,
        far_field: far,
        boundary_deviation,
    })
}

/// A sector of opening `pi beta` mapped onto the square.
///
/// The two straight sides go to the bottom side at speed `1/(2R)`. The arc is
/// split at `ARC_SPLIT` of its length onto the right, top and left sides; the
/// split is deliberately asymmetric so that the fitted map has `a_1 != 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorTestCase<T> {
    pub beta: T,
    pub radius: T,
    /// Polygon segments along the arc; a multiple of 8.
    pub arc_segments: usize,
}

pub const ARC_SPLIT: [f64; 2] = [0.25, 0.625];

impl<T: Scalar> SectorTestCase<T> {
    pub fn new(beta: T, radius: T, arc_segments: usize) -> Result<Self> {
        if arc_segments == 0 || !arc_segments.is_multiple_of(8) {
            return Err(Error::InvalidConfig(format!(
                "arc_segments = {arc_segments} must be a positive multiple of 8"
            )));
        }
        let sigma = T::one() / (T::two() * radius);
        CornerConfig::new(beta, sigma, sigma, radius)?;
        Ok(Self {
            beta,
            radius,
            arc_segments,
        })
    }

    pub fn config(&self) -> CornerConfig<T> {
        let sigma = T::one() / (T::two() * self.radius);
        CornerConfig::new(self.beta, sigma, sigma, self.radius).expect("validated in new")
    }

    /// Vertex index of the sector vertex in [`Self::domain`].
    pub const CORNER_VERTEX: usize = 1;

    pub fn domain(&self) -> DomainBoundary<T> {
        let h = self.config().half_angle();
        let m = self.arc_segments;
        let big = self.radius;
        let mut v = vec![
            [big * h.cos(), big * h.sin()],
            [T::zero(), T::zero()],
            [big * h.cos(), -big * h.sin()],
        ];
        for k in 1..m {
            let phi = -h + T::two() * h * T::from_usize_lossy(k) / T::from_usize_lossy(m);
            v.push([big * phi.cos(), big * phi.sin()]);
        }
        let ka = m / 4;
        let kb = 5 * m / 8;
        DomainBoundary::new(v, [0, 2, 2 + ka, 2 + kb], vec![Self::CORNER_VERTEX]).expect("valid sector polygon")
    }

    /// Target point on the square boundary for the arc point at angle `phi`.
    pub fn arc_target(&self, phi: T) -> Complex<T> {
        let h = self.config().half_angle();
        let s = ((phi + h) / (T::two() * h)).max(T::zero()).min(T::one());
        let (sa, sb) = (T::lit(ARC_SPLIT[0]), T::lit(ARC_SPLIT[1]));
        let half = T::half();
        if s <= sa {
            Complex::new(half, s / sa)
        } else if s <= sb {
            Complex::new(half - (s - sa) / (sb - sa), T::one())
        } else {
            Complex::new(-half, T::one() - (s - sb) / (T::one() - sb))
        }
    }

    /// Series fit of the harmonic map with the boundary data of [`Self::domain`].
    pub fn harmonic_map(&self, n_terms: usize, panels: usize) -> Result<HarmonicCornerMap<T>> {
        let cfg = self.config();
        let h = cfg.half_angle();
        let samples: Vec<(T, Complex<T>)> = (0..=panels)
            .map(|k| {
                let phi = if k == panels {
                    h
                } else {
                    -h + T::two() * h * T::from_usize_lossy(k) / T::from_usize_lossy(panels)
                };
                (phi, self.arc_target(phi))
            })
            .collect();
        let coeffs = fit_from_arc_with(&cfg, &cfg.derive_params(), &samples, FitOptions { n_terms, panels })?;
        Ok(HarmonicCornerMap::new(cfg, coeffs))
    }

    /// Index `(i, 0)` of the grid node that lands on the sector vertex.
    pub fn corner_node(nx: usize) -> (usize, usize) {
        ((nx - 1) / 2, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_sides_and_orientation() {
        let d = DomainBoundary::<f64>::unit_square();
        assert!((d.signed_area() - 1.0).abs() < 1e-15);
        assert_eq!(d.side(2), vec![[0.5, 1.0], [-0.5, 1.0]]);
        assert_eq!(d.side(3), vec![[-0.5, 1.0], [-0.5, 0.0]]);
    }

    #[test]
    fn clockwise_and_self_intersecting_rejected() {
        let cw = DomainBoundary::new(
            vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]],
            [0, 1, 2, 3],
            vec![],
        );
        assert!(matches!(cw, Err(Error::InvalidDomain(_))));
        let bow = DomainBoundary::new(
            vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.5]],
            [0, 1, 2, 3],
            vec![],
        );
        assert!(bow.is_err());
        let order = DomainBoundary::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            [0, 2, 1, 3],
            vec![],
        );
        assert!(order.is_err());
    }

    #[test]
    fn repeated_corner_is_degenerate_side() {
        let d = DomainBoundary::new(
            vec![[0.0f64, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            [0, 1, 2, 2],
            vec![],
        );
        // side_map must be strictly increasing, so a zero-length side is caught there
        assert!(d.is_err());
        let pts = [[1.0f64, 1.0], [1.0, 1.0]];
        assert!(matches!(resample(&pts, 5, 2), Err(Error::DegenerateSide { side: 2 })));
    }

    #[test]
    fn lattice_is_stationary() {
        let g = WinslowGrid::<f64>::lattice(9, 7);
        let hu = 1.0 / 8.0;
        let hv = 1.0 / 6.0;
        assert!(max_jacobi_update(&g, hu * hu, hv * hv) < 1e-15);
    }

    #[test]
    fn single_reflected_node_folds_its_cells() {
        let mut g = WinslowGrid::<f64>::lattice(5, 5);
        // push node (2, 2) across the diagonal of cell (2, 2)
        g.set_node(2, 2, [0.3, 0.8]);
        let f = fold_cells(&g);
        assert!(f.contains(&(2, 2)));
        assert!(f.iter().all(|&(i, j)| (1..=2).contains(&i) && (1..=2).contains(&j)));
    }
}
