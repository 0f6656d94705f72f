//! The harmonic corner map `F = Q + sum (a_n + i b_n) psi_n` on the sector.
//!
//! The basis is `psi_n = Im[(i z^{1/beta})^n] = r^{n/beta} sin(n (phi/beta + pi/2))`
//! with the principal branch fixed by `arg z = phi`. Every `psi_n` vanishes on
//! both sides, so the side data of `F` is carried entirely by `Q`. Note that
//! `psi_2 = -r^{2/beta} sin(2 phi/beta)`; downstream constants that involve
//! `(a_2, b_2)` are written in this convention.

use num_complex::Complex;
use serde::Serialize;

use crate::corner::{CornerConfig, DerivedParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default truncation order.
pub const DEFAULT_TERMS: usize = 8;
/// Default composite-Simpson panel count for arc projections.
pub const DEFAULT_PANELS: usize = 2048;
/// Relative admissibility threshold for fitted `a_1` and `b_1`.
pub const DEGENERATE_THRESHOLD: f64 = 1e-10;

/// `psi_n(r, phi) = r^{n/beta} sin(n (phi/beta + pi/2))`.
pub fn basis_psi<T: Scalar>(n: usize, beta: T, r: T, phi: T) -> Result<T> {
    let h = T::FRAC_PI_2() * beta;
    let tol = T::epsilon() * T::lit(64.0) * h.max(T::one());
    if n == 0 {
        return Err(Error::Domain {
            what: "n",
            value: 0.0,
            range: "[1, inf)".into(),
        });
    }
    if !r.is_finite() || r < T::zero() {
        return Err(Error::Domain {
            what: "r",
            value: r.as_f64(),
            range: "[0, inf)".into(),
        });
    }
    if !phi.is_finite() || phi.abs() > h + tol {
        return Err(Error::Domain {
            what: "phi",
            value: phi.as_f64(),
            range: format!("[-{h}, {h}]"),
        });
    }
    let t = phi.max(-h).min(h) / beta + T::FRAC_PI_2();
    let nn = T::from_usize_lossy(n);
    Ok(r.powf(nn / beta) * (nn * t).sin())
}

/// Truncated series coefficients `a_1..a_N`, `b_1..b_N` with `a_1 != 0`, `b_1 > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesCoefficients<T> {
    a: Vec<T>,
    b: Vec<T>,
}

impl<T: Scalar> SeriesCoefficients<T> {
    pub fn new(a: Vec<T>, b: Vec<T>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidConfig(format!(
                "coefficient sequences differ in length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        if a.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "truncation order must be at least 2, got {}",
                a.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite coefficient".into()));
        }
        if a[0] == T::zero() || !(b[0] > T::zero()) {
            return Err(Error::Constraint {
                a1: a[0].as_f64(),
                b1: b[0].as_f64(),
            });
        }
        Ok(Self { a, b })
    }

    /// Builds coefficients from `(a_n, b_n)` pairs, zero-padding to `n_terms`.
    pub fn from_pairs(pairs: &[(T, T)], n_terms: usize) -> Result<Self> {
        let n = n_terms.max(pairs.len());
        let mut a = vec![T::zero(); n];
        let mut b = vec![T::zero(); n];
        for (k, &(ak, bk)) in pairs.iter().enumerate() {
            a[k] = ak;
            b[k] = bk;
        }
        Self::new(a, b)
    }

    pub fn n_terms(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn a1(&self) -> T {
        self.a[0]
    }

    pub fn b1(&self) -> T {
        self.b[0]
    }

    pub fn a2(&self) -> T {
        self.a[1]
    }

    pub fn b2(&self) -> T {
        self.b[1]
    }

    /// `a_n + i b_n`, 1-based.
    pub fn complex(&self, n: usize) -> Complex<T> {
        Complex::new(self.a[n - 1], self.b[n - 1])
    }
}

/// Analytic Jacobian `d(u,v)/d(x,y)` at a sector point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobian<T> {
    /// Rows `u`, `v`; columns `x`, `y`.
    pub matrix: [[T; 2]; 2],
    pub det: T,
    /// Set at the vertex of a reentrant corner, where `grad r^{1/beta}` is unbounded.
    pub singular: bool,
}

/// Harmonic map of the sector given by its linear part and truncated series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicCornerMap<T> {
    config: CornerConfig<T>,
    derived: DerivedParams<T>,
    coeffs: SeriesCoefficients<T>,
}

impl<T: Scalar> HarmonicCornerMap<T> {
    pub fn new(config: CornerConfig<T>, coeffs: SeriesCoefficients<T>) -> Self {
        let derived = config.derive_params();
        Self {
            config,
            derived,
            coeffs,
        }
    }

    pub fn config(&self) -> &CornerConfig<T> {
        &self.config
    }

    pub fn derived(&self) -> &DerivedParams<T> {
        &self.derived
    }

    pub fn coeffs(&self) -> &SeriesCoefficients<T> {
        &self.coeffs
    }

    fn check_point(&self, r: T, phi: T) -> Result<(T, T)> {
        let r = self.config.check_radius(r)?;
        let rmax = self.config.radius() * (T::one() + T::epsilon() * T::lit(64.0));
        if r > rmax {
            return Err(Error::Domain {
                what: "r",
                value: r.as_f64(),
                range: format!("[0, {}]", self.config.radius()),
            });
        }
        Ok((r, self.config.check_angle(phi)?))
    }

    /// `F(r e^{i phi})`. On the sides the exact boundary data is returned.
    pub fn evaluate(&self, r: T, phi: T) -> Result<Complex<T>> {
        let (r, phi) = self.check_point(r, phi)?;
        Ok(self.eval_unchecked(r, phi))
    }

    pub(crate) fn eval_unchecked(&self, r: T, phi: T) -> Complex<T> {
        if let Some(side) = self.config.side_of(phi) {
            return Complex::new(self.config.side_value(side, r), T::zero());
        }
        if r == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let beta = self.config.beta();
        let q = -self.derived.mu * r * (phi - self.derived.phi_star).sin();
        let t = phi / beta + T::FRAC_PI_2();
        let base = r.powf(T::one() / beta);
        let mut power = T::one();
        let (mut u, mut v) = (q, T::zero());
        for (k, (&ak, &bk)) in self.coeffs.a.iter().zip(&self.coeffs.b).enumerate() {
            power *= base;
            let psi = power * (T::from_usize_lossy(k + 1) * t).sin();
            u += ak * psi;
            v += bk * psi;
        }
        Complex::new(u, v)
    }

    /// `F` at a Cartesian point of the closed sector.
    pub fn evaluate_xy(&self, x: T, y: T) -> Result<Complex<T>> {
        self.evaluate(x.hypot(y), y.atan2(x))
    }

    pub fn jacobian(&self, r: T, phi: T) -> Result<Jacobian<T>> {
        let (r, phi) = self.check_point(r, phi)?;
        let beta = self.config.beta();
        let d = &self.derived;
        // Q = mu x sin(phi*) - mu y cos(phi*) is linear in (x, y).
        let mut m = [
            [d.mu * d.phi_star.sin(), -d.mu * d.phi_star.cos()],
            [T::zero(), T::zero()],
        ];
        let t = phi / beta + T::FRAC_PI_2();
        // grad psi_n = (n/beta) r^{n/beta - 1} (sin(n t - phi), cos(n t - phi))
        for (k, (&ak, &bk)) in self.coeffs.a.iter().zip(&self.coeffs.b).enumerate() {
            let nn = T::from_usize_lossy(k + 1);
            let scale = nn / beta * r.powf(nn / beta - T::one());
            let ang = nn * t - phi;
            let (gx, gy) = (scale * ang.sin(), scale * ang.cos());
            m[0][0] += ak * gx;
            m[0][1] += ak * gy;
            m[1][0] += bk * gx;
            m[1][1] += bk * gy;
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let singular = r == T::zero() && beta > T::one();
        Ok(Jacobian {
            matrix: m,
            det,
            singular,
        })
    }

    /// Max 5-point discrete Laplacian of `u` and `v` over the default interior
    /// stencil centres with grid step `h`.
    pub fn harmonicity_residual(&self, h: T) -> Result<T> {
        let centers = interior_centers(&self.config);
        discrete_laplacian_max(&self.config, |x, y| self.evaluate_xy(x, y), &centers, h)
    }

    /// Samples `F` on the arc `r = R` at `panels + 1` equally spaced angles, sides included.
    pub fn arc_samples(&self, panels: usize) -> Vec<(T, Complex<T>)> {
        uniform_arc_angles(&self.config, panels)
            .into_iter()
            .map(|phi| (phi, self.eval_unchecked(self.config.radius(), phi)))
            .collect()
    }
}

pub(crate) fn uniform_arc_angles<T: Scalar>(cfg: &CornerConfig<T>, panels: usize) -> Vec<T> {
    let h = cfg.half_angle();
    let m = T::from_usize_lossy(panels);
    (0..=panels)
        .map(|k| {
            if k == panels {
                h
            } else {
                -h + T::two() * h * T::from_usize_lossy(k) / m
            }
        })
        .collect()
}

/// Stencil centres spread over the sector interior, away from the vertex and the arc.
pub fn interior_centers<T: Scalar>(cfg: &CornerConfig<T>) -> Vec<(T, T)> {
    let h = cfg.half_angle();
    let mut out = Vec::new();
    for rf in [0.35, 0.55, 0.75] {
        for pf in [-0.6, -0.3, 0.0, 0.3, 0.6] {
            let r = cfg.radius() * T::lit(rf);
            let phi = h * T::lit(pf);
            out.push((r * phi.cos(), r * phi.sin()));
        }
    }
    out
}

/// Max over `centers` of the 5-point Laplacian `|Delta_h f|` of both components.
/// Centres whose stencil leaves the sector are rejected.
pub fn discrete_laplacian_max<T, F>(
    cfg: &CornerConfig<T>,
    f: F,
    centers: &[(T, T)],
    h: T,
) -> Result<T>
where
    T: Scalar,
    F: Fn(T, T) -> Result<Complex<T>>,
{
    let four = T::lit(4.0);
    let mut worst = T::zero();
    for &(x, y) in centers {
        let pts = [(x + h, y), (x - h, y), (x, y + h), (x, y - h)];
        for &(px, py) in &pts {
            let ang = py.atan2(px);
            if ang.abs() > cfg.half_angle() || px.hypot(py) > cfg.radius() {
                return Err(Error::Domain {
                    what: "stencil point",
                    value: ang.as_f64(),
                    range: "closed sector".into(),
                });
            }
        }
        let c = f(x, y)?;
        let mut sum = Complex::new(T::zero(), T::zero());
        for &(px, py) in &pts {
            sum += f(px, py)?;
        }
        let lap = (sum - c * four) / (h * h);
        worst = worst.max(lap.re.abs()).max(lap.im.abs());
    }
    Ok(worst)
}

/// Options for [`fit_from_arc_with`].
#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    pub n_terms: usize,
    /// Simpson panels used when the samples must be resampled.
    pub panels: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_terms: DEFAULT_TERMS,
            panels: DEFAULT_PANELS,
        }
    }
}

/// Recovers series coefficients from values of `F` on the arc `r = R`.
pub fn fit_from_arc<T: Scalar>(
    cfg: &CornerConfig<T>,
    d: &DerivedParams<T>,
    samples: &[(T, Complex<T>)],
    n_terms: usize,
) -> Result<SeriesCoefficients<T>> {
    fit_from_arc_with(
        cfg,
        d,
        samples,
        FitOptions {
            n_terms,
            ..FitOptions::default()
        },
    )
}

/// Sine-series projection of `F - Q` on the arc.
///
/// With `t = (phi + pi beta/2)/beta in [0, pi]`,
/// `a_n + i b_n = (2/pi) R^{-n/beta} int_0^pi (F - Q) sin(n t) dt`, evaluated by
/// composite Simpson. Samples on a uniform grid with an even number of panels
/// are integrated directly; anything else is first resampled by a natural cubic
/// spline onto `opts.panels` panels.
pub fn fit_from_arc_with<T: Scalar>(
    cfg: &CornerConfig<T>,
    d: &DerivedParams<T>,
    samples: &[(T, Complex<T>)],
    opts: FitOptions,
) -> Result<SeriesCoefficients<T>> {
    let n_terms = opts.n_terms;
    if n_terms < 2 {
        return Err(Error::InvalidConfig("n_terms must be at least 2".into()));
    }
    let need = 8 * n_terms;
    if samples.len() < need {
        return Err(Error::InsufficientSamples {
            got: samples.len(),
            need,
        });
    }
    let beta = cfg.beta();
    let radius = cfg.radius();
    let h = cfg.half_angle();

    let mut pts: Vec<(T, Complex<T>)> = Vec::with_capacity(samples.len());
    for &(phi, w) in samples {
        let phi = cfg.check_angle(phi)?;
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite arc value at phi = {phi}")));
        }
        pts.push((phi, w));
    }
    pts.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite angles"));
    pts.dedup_by(|p, q| p.0 == q.0);

    let scale = pts
        .iter()
        .map(|(_, w)| w.norm())
        .fold(T::zero(), T::max)
        .max(T::min_positive_value());
    let end_tol = T::lit(1e-6).max(T::epsilon() * T::lit(1e3)) * scale.max(T::one());
    for &(phi, w) in &pts {
        if let Some(side) = cfg.side_of(phi) {
            let expect = Complex::new(cfg.side_value(side, radius), T::zero());
            let dev = (w - expect).norm();
            if dev > end_tol {
                return Err(Error::ArcEndpointMismatch {
                    phi: phi.as_f64(),
                    deviation: dev.as_f64(),
                });
            }
        }
    }

    // g(t) = F - Q on the arc.
    let to_t = |phi: T| (phi + h) / beta;
    let g_of = |phi: T, w: Complex<T>| {
        let q = -d.mu * radius * (phi - d.phi_star).sin();
        Complex::new(w.re - q, w.im)
    };

    let grid: Vec<Complex<T>> = match uniform_panels(&pts, h) {
        Some(_) => pts.iter().map(|&(phi, w)| g_of(phi, w)).collect(),
        None => {
            let mut ts = Vec::with_capacity(pts.len() + 2);
            let mut gs = Vec::with_capacity(pts.len() + 2);
            if cfg.side_of(pts[0].0) != Some(1) {
                ts.push(T::zero());
                gs.push(Complex::new(T::zero(), T::zero()));
            }
            for &(phi, w) in &pts {
                ts.push(to_t(phi));
                gs.push(g_of(phi, w));
            }
            if cfg.side_of(pts[pts.len() - 1].0) != Some(-1) {
                ts.push(T::PI());
                gs.push(Complex::new(T::zero(), T::zero()));
            }
            let re = NaturalSpline::new(&ts, &gs.iter().map(|g| g.re).collect::<Vec<_>>());
            let im = NaturalSpline::new(&ts, &gs.iter().map(|g| g.im).collect::<Vec<_>>());
            let m = opts.panels + opts.panels % 2;
            (0..=m)
                .map(|k| {
                    let t = T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(m);
                    Complex::new(re.eval(t), im.eval(t))
                })
                .collect()
        }
    };

    let panels = grid.len() - 1;
    let dt = T::PI() / T::from_usize_lossy(panels);
    let three = T::lit(3.0);
    let mut a = Vec::with_capacity(n_terms);
    let mut b = Vec::with_capacity(n_terms);
    for n in 1..=n_terms {
        let nn = T::from_usize_lossy(n);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, g) in grid.iter().enumerate() {
            let w = if k == 0 || k == panels {
                T::one()
            } else if k % 2 == 1 {
                T::lit(4.0)
            } else {
                T::two()
            };
            let t = dt * T::from_usize_lossy(k);
            acc += *g * (w * (nn * t).sin());
        }
        let c = acc * (dt / three * T::two() / T::PI() * radius.powf(-nn / beta));
        a.push(c.re);
        b.push(c.im);
    }

    let threshold = T::lit(DEGENERATE_THRESHOLD) * scale;
    let arc_a1 = a[0] * radius.powf(T::one() / beta);
    let arc_b1 = b[0] * radius.powf(T::one() / beta);
    if arc_a1.abs() < threshold || arc_b1 < threshold {
        return Err(Error::DegenerateFit {
            a1: a[0].as_f64(),
            b1: b[0].as_f64(),
            threshold: threshold.as_f64(),
        });
    }
    SeriesCoefficients::new(a, b)
}

/// `Some(panels)` when the sorted samples form a uniform grid over the closed
/// arc with an even number of panels.
fn uniform_panels<T: Scalar>(pts: &[(T, Complex<T>)], h: T) -> Option<usize> {
    let n = pts.len();
    if n < 3 || !(n - 1).is_multiple_of(2) {
        return None;
    }
    let panels = n - 1;
    let step = T::two() * h / T::from_usize_lossy(panels);
    let tol = step * T::lit(1e-9);
    for (k, &(phi, _)) in pts.iter().enumerate() {
        let expect = -h + step * T::from_usize_lossy(k);
        if (phi - expect).abs() > tol {
            return None;
        }
    }
    Some(panels)
}

/// Natural cubic spline through `(x_k, y_k)` with strictly increasing `x`.
struct NaturalSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    m: Vec<T>,
}

impl<T: Scalar> NaturalSpline<T> {
    fn new(x: &[T], y: &[T]) -> Self {
        let n = x.len();
        let mut m = vec![T::zero(); n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let k = n - 2;
            let mut diag = vec![T::zero(); k];
            let mut upper = vec![T::zero(); k];
            let mut rhs = vec![T::zero(); k];
            for i in 0..k {
                let h0 = x[i + 1] - x[i];
                let h1 = x[i + 2] - x[i + 1];
                diag[i] = T::two() * (h0 + h1);
                upper[i] = h1;
                rhs[i] = T::lit(6.0) * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                let prev = rhs[i - 1];
                rhs[i] -= w * prev;
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    fn eval(&self, t: T) -> T {
        let n = self.x.len();
        let i = match self.x.iter().position(|&xi| xi > t) {
            Some(0) => 0,
            Some(p) => p - 1,
            None => n - 2,
        }
        .min(n - 2);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let hseg = x1 - x0;
        let a = (x1 - t) / hseg;
        let b = (t - x0) / hseg;
        let six = T::lit(6.0);
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * hseg * hseg / six
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;
    use crate::corner::linear_part_q;

    fn quarter() -> CornerConfig<f64> {
        CornerConfig::symmetric(0.5, 1.0).unwrap()
    }

    #[test]
    fn basis_examples() {
        for n in 1..6 {
            assert!(basis_psi(n, 0.5, 0.7, FRAC_PI_4).unwrap().abs() < 1e-15);
        }
        assert!((basis_psi(1, 0.5f64, 0.5, 0.0).unwrap() - 0.25).abs() < 1e-15);
        for beta in [0.3, 0.5, 1.5, 1.9] {
            assert!(basis_psi::<f64>(2, beta, 1.0, 0.0).unwrap().abs() < 1e-15);
        }
        assert!(basis_psi(1, 0.5, 0.5, 1.0).is_err());
        assert!(basis_psi(0, 0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn second_basis_function_sign() {
        // psi_2 = -r^{2/beta} sin(2 phi / beta)
        let (beta, r, phi) = (0.75f64, 0.4f64, 0.3f64);
        let psi2 = basis_psi(2, beta, r, phi).unwrap();
        let expect = -r.powf(2.0 / beta) * (2.0 * phi / beta).sin();
        assert!((psi2 - expect).abs() < 1e-15);
    }

    #[test]
    fn evaluate_examples() {
        let c = quarter();
        let coeffs = SeriesCoefficients::from_pairs(&[(1.0, 1.0)], 8).unwrap();
        let map = HarmonicCornerMap::new(c, coeffs);
        let w = map.evaluate(0.3, -FRAC_PI_4).unwrap();
        assert_eq!(w, Complex::new(0.3, 0.0));
        let w = map.evaluate(0.1, 0.0).unwrap();
        assert!((w.re - 0.01).abs() < 1e-15 && (w.im - 0.01).abs() < 1e-15);
        assert_eq!(map.evaluate(0.0, 0.2).unwrap(), Complex::new(0.0, 0.0));
        assert!(map.evaluate(1.5, 0.0).is_err());
        assert!(map.evaluate(0.5, 1.0).is_err());
    }

    #[test]
    fn coefficient_constraints() {
        assert!(matches!(
            SeriesCoefficients::new(vec![0.0, 1.0], vec![1.0, 0.0]),
            Err(Error::Constraint { .. })
        ));
        assert!(matches!(
            SeriesCoefficients::new(vec![1.0, 1.0], vec![-1.0, 0.0]),
            Err(Error::Constraint { .. })
        ));
        assert!(SeriesCoefficients::new(vec![1.0], vec![1.0]).is_err());
        assert!(SeriesCoefficients::new(vec![1.0, 2.0], vec![1.0]).is_err());
    }

    fn fd_jacobian(map: &HarmonicCornerMap<f64>, x: f64, y: f64, step: f64) -> [[f64; 2]; 2] {
        let fx = (map.evaluate_xy(x + step, y).unwrap() - map.evaluate_xy(x - step, y).unwrap())
            / (2.0 * step);
        let fy = (map.evaluate_xy(x, y + step).unwrap() - map.evaluate_xy(x, y - step).unwrap())
            / (2.0 * step);
        [[fx.re, fy.re], [fx.im, fy.im]]
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for beta in [0.5, 0.8, 1.3, 1.7] {
            let c = CornerConfig::new(beta, 1.3, 0.7, 1.0).unwrap();
            let coeffs =
                SeriesCoefficients::from_pairs(&[(0.8, 1.1), (-0.3, 0.4), (0.2, -0.1)], 6).unwrap();
            let map = HarmonicCornerMap::new(c, coeffs);
            for &(r, pf) in &[(0.4, 0.0), (0.6, 0.5), (0.3, -0.7), (0.8, 0.2)] {
                let phi: f64 = pf * c.half_angle();
                let (x, y) = (r * phi.cos(), r * phi.sin());
                let j = map.jacobian(r, phi).unwrap();
                let fd = fd_jacobian(&map, x, y, 1e-6);
                let norm = j.matrix.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                for i in 0..2 {
                    for k in 0..2 {
                        assert!(
                            (j.matrix[i][k] - fd[i][k]).abs() < 1e-6 * norm,
                            "beta {beta} r {r} entry ({i},{k}): {} vs {}",
                            j.matrix[i][k],
                            fd[i][k]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn jacobian_positive_near_vertex() {
        let c = quarter();
        let coeffs = SeriesCoefficients::from_pairs(&[(1.0, 1.0)], 8).unwrap();
        let map = HarmonicCornerMap::new(c, coeffs);
        let d = *map.derived();
        // det ~ 2 mu b1 cos(phi*) r as r -> 0 when beta = 1/2.
        let r = 1e-8;
        let j = map.jacobian(r, 0.0).unwrap();
        let limit = 2.0 * d.mu * 1.0 * d.phi_star.cos();
        assert!(j.det > 0.0);
        assert!((j.det / r - limit).abs() < 1e-6 * limit);
        let j = map.jacobian(0.05, 0.0).unwrap();
        let fd = fd_jacobian(&map, 0.05, 0.0, 1e-7);
        let fd_det = fd[0][0] * fd[1][1] - fd[0][1] * fd[1][0];
        assert!((j.det - fd_det).abs() < 1e-6 * j.det.abs());
    }

    #[test]
    fn jacobian_flags_reentrant_vertex() {
        let c = CornerConfig::symmetric(1.5, 1.0).unwrap();
        let map = HarmonicCornerMap::new(c, SeriesCoefficients::from_pairs(&[(1.0, 1.0)], 2).unwrap());
        assert!(map.jacobian(0.0, 0.0).unwrap().singular);
        assert!(!map.jacobian(0.1, 0.0).unwrap().singular);
        let convex = HarmonicCornerMap::new(quarter(), SeriesCoefficients::from_pairs(&[(1.0, 1.0)], 2).unwrap());
        let j = convex.jacobian(0.0, 0.0).unwrap();
        assert!(!j.singular && j.det == 0.0);
    }

    #[test]
    fn fit_recovers_constructed_coefficients() {
        let c = CornerConfig::new(0.5, 1.0, 1.0, 1.0).unwrap();
        let coeffs = SeriesCoefficients::from_pairs(&[(2.0, 3.0), (-1.0, 0.5)], 8).unwrap();
        let map = HarmonicCornerMap::new(c, coeffs);
        let fitted = fit_from_arc(&c, map.derived(), &map.arc_samples(2048), 8).unwrap();
        let expect: [(f64, f64); 2] = [(2.0, 3.0), (-1.0, 0.5)];
        for n in 0..8 {
            let (ea, eb) = expect.get(n).copied().unwrap_or((0.0, 0.0));
            assert!((fitted.a()[n] - ea).abs() < 1e-8, "a{} = {}", n + 1, fitted.a()[n]);
            assert!((fitted.b()[n] - eb).abs() < 1e-8, "b{} = {}", n + 1, fitted.b()[n]);
        }
    }

    #[test]
    fn fit_of_linear_part_is_degenerate() {
        let c = CornerConfig::new(0.7, 2.0, 1.0, 1.0).unwrap();
        let d = c.derive_params();
        let samples: Vec<_> = uniform_arc_angles(&c, 512)
            .into_iter()
            .map(|phi| (phi, Complex::new(linear_part_q(&c, &d, 1.0, phi).unwrap(), 0.0)))
            .collect();
        assert!(matches!(
            fit_from_arc(&c, &d, &samples, 8),
            Err(Error::DegenerateFit { .. })
        ));
    }

    #[test]
    fn fit_rejects_short_and_inconsistent_input() {
        let c = quarter();
        let d = c.derive_params();
        let few: Vec<_> = (0..10).map(|k| (k as f64 * 0.01, Complex::new(0.0, 0.0))).collect();
        assert!(matches!(
            fit_from_arc(&c, &d, &few, 8),
            Err(Error::InsufficientSamples { got: 10, need: 64 })
        ));
        let coeffs = SeriesCoefficients::from_pairs(&[(1.0, 1.0)], 4).unwrap();
        let map = HarmonicCornerMap::new(c, coeffs);
        let mut samples = map.arc_samples(256);
        samples[0].1 = Complex::new(5.0, 0.0);
        assert!(matches!(
            fit_from_arc(&c, &d, &samples, 4),
            Err(Error::ArcEndpointMismatch { .. })
        ));
    }

    #[test]
    fn fit_from_nonuniform_samples() {
        let c = CornerConfig::new(1.4, 1.0, 0.6, 1.0).unwrap();
        let coeffs = SeriesCoefficients::from_pairs(&[(0.7, 1.2), (0.3, -0.2)], 4).unwrap();
        let map = HarmonicCornerMap::new(c, coeffs);
        let h = c.half_angle();
        // Interior-only, jittered angles.
        let samples: Vec<_> = (0..400)
            .map(|k| {
                let s = (k as f64 + 0.5 + 0.3 * (k as f64 * 1.7).sin()) / 400.0;
                let phi = -h + 2.0 * h * s;
                (phi, map.evaluate(1.0, phi).unwrap())
            })
            .collect();
        let fitted = fit_from_arc(&c, map.derived(), &samples, 4).unwrap();
        assert!((fitted.a1() - 0.7).abs() < 1e-4);
        assert!((fitted.b1() - 1.2).abs() < 1e-4);
        assert!((fitted.a2() - 0.3).abs() < 1e-4);
        assert!((fitted.b2() + 0.2).abs() < 1e-4);
    }

    #[test]
    fn linear_part_is_discretely_harmonic() {
        let c = CornerConfig::new(1.5, 2.0, 1.0, 1.0).unwrap();
        let d = c.derive_params();
        let centers = interior_centers(&c);
        let res = discrete_laplacian_max(
            &c,
            |x: f64, y: f64| Ok(Complex::new(linear_part_q(&c, &d, x.hypot(y), y.atan2(x))?, 0.0)),
            &centers,
            1e-3,
        )
        .unwrap();
        assert!(res < 1e-8, "residual {res}");
    }

    #[test]
    fn single_basis_term_second_order() {
        let c = CornerConfig::symmetric(0.6, 1.0).unwrap();
        let centers = interior_centers(&c);
        let psi3 = |x: f64, y: f64| Ok(Complex::new(basis_psi(3, 0.6, x.hypot(y), y.atan2(x))?, 0.0));
        let coarse = discrete_laplacian_max(&c, psi3, &centers, 1e-2).unwrap();
        let fine = discrete_laplacian_max(&c, psi3, &centers, 5e-3).unwrap();
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn stencil_outside_sector_rejected() {
        let c = quarter();
        let map = HarmonicCornerMap::new(c, SeriesCoefficients::from_pairs(&[(1.0, 1.0)], 2).unwrap());
        assert!(map.harmonicity_residual(0.5).is_err());
    }
}
