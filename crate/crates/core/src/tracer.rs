//! Numerical curve tracing used as an independent check of the asymptotics.
//!
//! Inverse curves are found by bisection on `Im[F(r e^{i phi}) e^{-i theta}]`
//! at each radius, following the branch of the previous (larger) radius.
//! Forward curves are plain evaluations of `F` along a ray.

use log::{debug, warn};
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::AsymptoticKit;
use crate::corner::CornerKind;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::HarmonicCornerMap;

/// Default sampling density for traced curves.
pub const SAMPLES_PER_DECADE: usize = 48;
/// Residual of the log-log fit above which a curve is not in its asymptotic regime.
pub const POOR_FIT_RESIDUAL: f64 = 0.1;
/// Fewest samples in the innermost decade for the order to be read from it alone.
pub const INNER_DECADE_MIN: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// `F^{-1}` of the ray `arg w = theta`, sampled as `phi(r)`.
    InverseLevel,
    /// `F` of the ray `arg z = phi`, sampled as `theta(rho)`.
    ForwardRay,
}

/// Samples of a traced curve ordered from the largest radius toward the vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracedCurve<T> {
    pub kind: CurveKind,
    /// `theta` of the inverse ray or `phi` of the forward ray.
    pub angle: T,
    /// Radii `r` in the `z`-plane.
    pub radii: Vec<T>,
    /// `r` for inverse curves, `rho = |w|` for forward curves.
    pub params: Vec<T>,
    /// `phi` for inverse curves, `theta = arg w` for forward curves.
    pub ordinates: Vec<T>,
    /// Curve points: `z` for inverse curves, `w` for forward curves.
    pub points: Vec<Complex<T>>,
}

impl<T: Scalar> TracedCurve<T> {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Points as `(x, y)` / `(u, v)` pairs.
    pub fn cartesian(&self) -> Vec<(T, T)> {
        self.points.iter().map(|p| (p.re, p.im)).collect()
    }

    /// Points in the frame rotated by `angle`: `(U + iV) = w e^{-i angle}`.
    pub fn rotated(&self, angle: T) -> Vec<(T, T)> {
        let rot = Complex::from_polar(T::one(), -angle);
        self.points
            .iter()
            .map(|p| {
                let q = *p * rot;
                (q.re, q.im)
            })
            .collect()
    }
}

/// `per_decade` log-spaced radii from `hi * R` down to `lo * R`, decreasing.
pub fn log_radii<T: Scalar>(radius: T, lo: T, hi: T, per_decade: usize) -> Vec<T> {
    let (llo, lhi) = (lo.log10(), hi.log10());
    let n = ((lhi - llo) * T::from_usize_lossy(per_decade))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let ten = T::lit(10.0);
    (0..=n)
        .map(|k| radius * ten.powf(lhi - (lhi - llo) * T::from_usize_lossy(k) / T::from_usize_lossy(n)))
        .collect()
}

/// Default radii: 48 per decade over `[1e-6, 1e-1] R`.
pub fn default_radii<T: Scalar>(radius: T) -> Vec<T> {
    log_radii(radius, T::lit(1e-6), T::lit(1e-1), SAMPLES_PER_DECADE)
}

fn prepare_radii<T: Scalar>(map: &HarmonicCornerMap<T>, r_samples: &[T]) -> Result<Vec<T>> {
    let big = map.config().radius();
    let mut rs = Vec::with_capacity(r_samples.len());
    for &r in r_samples {
        if !(r > T::zero() && r <= big) {
            return Err(Error::Domain {
                what: "r",
                value: r.as_f64(),
                range: format!("(0, {big}]"),
            });
        }
        rs.push(r);
    }
    rs.sort_by(|a, b| b.partial_cmp(a).expect("finite radii"));
    rs.dedup();
    Ok(rs)
}

fn bisect<T: Scalar, G: Fn(T) -> T>(g: &G, mut lo: T, mut hi: T, mut glo: T, tol: T) -> T {
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = (lo + hi) * T::half();
        let gm = g(mid);
        if gm == T::zero() {
            return mid;
        }
        if (gm > T::zero()) == (glo > T::zero()) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * T::half()
}

fn angle_tolerance<T: Scalar>(h: T) -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(8.0) * h)
}

/// Traces `L_theta = F^{-1}(ray theta)` as `phi_theta(r)`.
pub fn trace_inverse_ray<T: Scalar>(
    map: &HarmonicCornerMap<T>,
    theta: T,
    r_samples: &[T],
) -> Result<TracedCurve<T>> {
    let cfg = map.config();
    let h = cfg.half_angle();
    if !(theta >= T::zero() && theta <= T::PI()) {
        return Err(Error::Domain {
            what: "theta",
            value: theta.as_f64(),
            range: "[0, pi]".into(),
        });
    }
    let rs = prepare_radii(map, r_samples)?;
    let on_side = if theta == T::zero() {
        Some(-h)
    } else if theta == T::PI() {
        Some(h)
    } else {
        None
    };
    if let Some(side) = on_side {
        if cfg.kind() == CornerKind::Reentrant {
            return Err(Error::UnsupportedAngle {
                theta: theta.as_f64(),
                beta: cfg.beta().as_f64(),
            });
        }
        return Ok(TracedCurve {
            kind: CurveKind::InverseLevel,
            angle: theta,
            radii: rs.clone(),
            params: rs.clone(),
            ordinates: vec![side; rs.len()],
            points: rs.iter().map(|&r| Complex::from_polar(r, side)).collect(),
        });
    }

    let (st, ct) = theta.sin_cos();
    let tol = angle_tolerance(h);
    let mut ordinates = Vec::with_capacity(rs.len());
    let mut prev: Option<T> = None;
    for &r in &rs {
        let g = |phi: T| {
            let w = map.eval_unchecked(r, phi);
            w.im * ct - w.re * st
        };
        let phi = match prev {
            None => first_root(&g, h, tol),
            Some(p) => follow_root(&g, p, h, tol),
        }
        .ok_or(Error::NoRoot { radius: r.as_f64() })?;
        ordinates.push(phi);
        prev = Some(phi);
    }
    Ok(TracedCurve {
        kind: CurveKind::InverseLevel,
        angle: theta,
        points: rs
            .iter()
            .zip(&ordinates)
            .map(|(&r, &p)| Complex::from_polar(r, p))
            .collect(),
        radii: rs.clone(),
        params: rs,
        ordinates,
    })
}

fn first_root<T: Scalar, G: Fn(T) -> T>(g: &G, h: T, tol: T) -> Option<T> {
    const SCAN: usize = 512;
    let step = T::two() * h / T::from_usize_lossy(SCAN);
    let mut found = Vec::new();
    let mut x0 = -h;
    let mut g0 = g(x0);
    for k in 1..=SCAN {
        let x1 = if k == SCAN { h } else { -h + step * T::from_usize_lossy(k) };
        let g1 = g(x1);
        if g0 == T::zero() {
            found.push(x0);
        } else if g1 != T::zero() && (g0 > T::zero()) != (g1 > T::zero()) {
            found.push(bisect(g, x0, x1, g0, tol));
        }
        x0 = x1;
        g0 = g1;
    }
    if found.len() > 1 {
        debug!("{} roots at the outermost radius; following the first", found.len());
    }
    found.first().copied()
}

/// Root nearest to `prev`, found by widening a window around it.
fn follow_root<T: Scalar, G: Fn(T) -> T>(g: &G, prev: T, h: T, tol: T) -> Option<T> {
    let g0 = g(prev);
    if g0 == T::zero() {
        return Some(prev);
    }
    let pos = g0 > T::zero();
    let mut width = h * T::lit(1e-6);
    let (mut left, mut right) = (prev, prev);
    let mut gr = g0;
    loop {
        let nl = (prev - width).max(-h);
        let nr = (prev + width).min(h);
        let gnl = g(nl);
        let gnr = g(nr);
        let flip_l = gnl == T::zero() || (gnl > T::zero()) != pos;
        let flip_r = gnr == T::zero() || (gnr > T::zero()) != pos;
        match (flip_l, flip_r) {
            (true, true) => {
                let a = bisect(g, nl, left, gnl, tol);
                let b = bisect(g, right, nr, gr, tol);
                return Some(if (prev - a).abs() <= (b - prev).abs() { a } else { b });
            }
            (true, false) => return Some(bisect(g, nl, left, gnl, tol)),
            (false, true) => return Some(bisect(g, right, nr, gr, tol)),
            (false, false) => {}
        }
        if nl <= -h && nr >= h {
            return None;
        }
        left = nl;
        right = nr;
        gr = gnr;
        width *= T::two();
    }
}

/// Images `F(r e^{i phi})` along the ray `phi`, as `theta(rho)`.
pub fn trace_forward_ray<T: Scalar>(
    map: &HarmonicCornerMap<T>,
    phi: T,
    r_samples: &[T],
) -> Result<TracedCurve<T>> {
    let phi = map.config().check_angle(phi)?;
    let rs = prepare_radii(map, r_samples)?;
    let points: Vec<Complex<T>> = rs.iter().map(|&r| map.eval_unchecked(r, phi)).collect();
    Ok(TracedCurve {
        kind: CurveKind::ForwardRay,
        angle: phi,
        params: points.iter().map(|w| w.norm()).collect(),
        ordinates: points.iter().map(|w| w.im.atan2(w.re)).collect(),
        radii: rs,
        points,
    })
}

/// Limit, convergence order and fit quality of a traced curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExitAngleEstimate<T> {
    /// Candidate limit nearest to the innermost sample.
    pub limit_angle: T,
    /// Fitted `p` in `ordinate ~ A + C param^p` over the innermost decade; `None` when the
    /// curve sits on its limit.
    pub order_estimate: Option<T>,
    /// Signed `C`.
    pub coefficient: T,
    /// RMS residual of the log-log fit.
    pub fit_residual: T,
    /// `A` from a free three-parameter fit, independent of the candidate list.
    pub extrapolated_limit: Option<T>,
    /// `|ordinate - A|` at the innermost sample.
    pub final_deviation: T,
}

/// Least-squares line `y = intercept + slope x`; returns `(slope, intercept, rms)`.
pub fn fit_line<T: Scalar>(xs: &[T], ys: &[T]) -> (T, T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let intercept = my - slope * mx;
    let ss = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum::<T>();
    (slope, intercept, (ss / n).sqrt())
}

fn check_span<T: Scalar>(params: &[T]) -> Result<()> {
    let pos: Vec<T> = params.iter().copied().filter(|p| *p > T::zero()).collect();
    let decades = if pos.len() >= 2 {
        let max = pos.iter().copied().fold(T::zero(), T::max);
        let min = pos.iter().copied().fold(T::infinity(), T::min);
        (max / min).log10()
    } else {
        T::zero()
    };
    if params.len() < 12 || decades < T::two() {
        return Err(Error::ShortCurve {
            samples: params.len(),
            decades: decades.as_f64(),
        });
    }
    Ok(())
}

/// Fits `ordinate ~ A + C param^p` with `A` drawn from `candidates`.
pub fn estimate_exit_angle<T: Scalar>(
    curve: &TracedCurve<T>,
    candidates: &[T],
) -> Result<ExitAngleEstimate<T>> {
    estimate_power_limit(&curve.params, &curve.ordinates, candidates)
}

/// Exit-angle estimation over arbitrary `(param, ordinate)` samples.
pub fn estimate_power_limit<T: Scalar>(
    params: &[T],
    ordinates: &[T],
    candidates: &[T],
) -> Result<ExitAngleEstimate<T>> {
    check_span(params)?;
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no candidate limits".into()));
    }
    let inner = params
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite parameters"))
        .map(|(i, _)| i)
        .expect("non-empty curve");
    let last = ordinates[inner];
    let limit = candidates
        .iter()
        .copied()
        .min_by(|a, b| {
            (*a - last)
                .abs()
                .partial_cmp(&(*b - last).abs())
                .expect("finite candidates")
        })
        .expect("non-empty candidates");
    let final_deviation = (last - limit).abs();
    let exact_tol = T::lit(1e-10) * limit.abs().max(T::one());
    let max_dev = ordinates
        .iter()
        .map(|&o| (o - limit).abs())
        .fold(T::zero(), T::max);
    if max_dev <= exact_tol {
        return Ok(ExitAngleEstimate {
            limit_angle: limit,
            order_estimate: None,
            coefficient: T::zero(),
            fit_residual: T::zero(),
            extrapolated_limit: Some(limit),
            final_deviation,
        });
    }
    // samples whose deviation is at rounding level carry no order information
    let kept: Vec<(T, T)> = params
        .iter()
        .zip(ordinates)
        .map(|(&p, &o)| (p, o - limit))
        .filter(|&(p, d)| p > T::zero() && d.abs() > exact_tol)
        .collect();
    let kept_params: Vec<T> = kept.iter().map(|s| s.0).collect();
    if let Err(e) = check_span(&kept_params) {
        if final_deviation <= exact_tol {
            return Ok(ExitAngleEstimate {
                limit_angle: limit,
                order_estimate: None,
                coefficient: T::zero(),
                fit_residual: T::zero(),
                extrapolated_limit: Some(limit),
                final_deviation,
            });
        }
        return Err(e);
    }
    let log_pts = |pts: &[(T, T)]| -> (Vec<T>, Vec<T>) { pts.iter().map(|&(p, d)| (p.ln(), d.abs().ln())).unzip() };
    let (lx, ly) = log_pts(&kept);
    let (slope, _, rms) = fit_line(&lx, &ly);
    if rms > T::lit(POOR_FIT_RESIDUAL) || !(slope > T::zero()) {
        return Err(Error::PoorFit {
            residual: rms.as_f64(),
            limit: POOR_FIT_RESIDUAL,
        });
    }
    // order and coefficient from the innermost decade, where the next term is smallest
    let p_min = kept_params.iter().copied().fold(T::infinity(), T::min);
    let inner: Vec<(T, T)> = kept.iter().copied().filter(|s| s.0 <= T::lit(10.0) * p_min).collect();
    let inner = if inner.len() >= INNER_DECADE_MIN { inner } else { kept };
    let (ix, iy) = log_pts(&inner);
    let (order, intercept, _) = fit_line(&ix, &iy);
    let signed: T = inner.iter().map(|s| s.1).sum();
    let sign = if signed < T::zero() { -T::one() } else { T::one() };
    Ok(ExitAngleEstimate {
        limit_angle: limit,
        order_estimate: Some(order),
        coefficient: sign * intercept.exp(),
        fit_residual: rms,
        extrapolated_limit: free_power_fit(params, ordinates).map(|(a, _, _)| a),
        final_deviation,
    })
}

/// Least squares of `y = A + C x^p` over `p`, returning `(A, C, p)`.
pub fn free_power_fit<T: Scalar>(xs: &[T], ys: &[T]) -> Option<(T, T, T)> {
    let cost = |p: T| -> (T, T, T) {
        let zs: Vec<T> = xs.iter().map(|&x| x.powf(p)).collect();
        let (c, a, rms) = fit_line(&zs, ys);
        (rms, a, c)
    };
    let (lo, hi) = (T::lit(0.02).ln(), T::lit(4.0).ln());
    const GRID: usize = 200;
    let at = |k: usize| (lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(GRID)).exp();
    let best = (0..=GRID)
        .min_by(|&i, &j| cost(at(i)).0.partial_cmp(&cost(at(j)).0).unwrap_or(std::cmp::Ordering::Equal))?;
    // golden section on the bracketing grid cells
    let (mut a, mut b) = (at(best.saturating_sub(1)).ln(), at((best + 1).min(GRID)).ln());
    let g = T::lit(0.618_033_988_749_894_8);
    for _ in 0..80 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if cost(x1.exp()).0 < cost(x2.exp()).0 {
            b = x2;
        } else {
            a = x1;
        }
    }
    let p = ((a + b) * T::half()).exp();
    let (rms, aa, cc) = cost(p);
    rms.is_finite().then_some((aa, cc, p))
}

/// Which ordinate a comparison is made in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// `phi(r)` of an inverse curve.
    InversePolar,
    /// `v(u)` of a forward curve.
    Cartesian,
    /// `V(U)` of a forward curve in the frame rotated by `theta*`.
    Rotated,
    /// `theta(rho)` of a forward curve.
    ForwardPolar,
}

/// Traced-versus-asymptotic discrepancy over the samples inside the asymptotic radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiscrepancyReport<T> {
    pub frame: Frame,
    pub samples: usize,
    pub max_abs: T,
    pub rms: T,
    /// Slope of `log |traced - predicted|` against `log |abscissa|`.
    pub empirical_remainder_exponent: Option<T>,
    /// Remainder exponent implied by the next terms of the expansion.
    pub predicted_remainder_exponent: Option<T>,
}

/// Compares a traced curve with the leading-order asymptotics in its natural frame.
pub fn compare_with_asymptotics<T: Scalar>(
    curve: &TracedCurve<T>,
    kit: &AsymptoticKit<T>,
) -> Result<DiscrepancyReport<T>> {
    let frame = match (curve.kind, kit.map().config().kind()) {
        (CurveKind::InverseLevel, _) => Frame::InversePolar,
        (CurveKind::ForwardRay, CornerKind::Convex) => Frame::Cartesian,
        (CurveKind::ForwardRay, CornerKind::Reentrant) => Frame::Rotated,
    };
    compare_in_frame(curve, kit, frame)
}

pub fn compare_in_frame<T: Scalar>(
    curve: &TracedCurve<T>,
    kit: &AsymptoticKit<T>,
    frame: Frame,
) -> Result<DiscrepancyReport<T>> {
    let cfg = kit.map().config();
    let beta = cfg.beta();
    let inv = T::one() / beta;
    let one = T::one();
    let two = T::two();
    let mut args = Vec::new();
    let mut diffs = Vec::new();
    let predicted;
    match (frame, curve.kind) {
        (Frame::InversePolar, CurveKind::InverseLevel) => {
            let theta = curve.angle;
            for (&r, &phi) in curve.params.iter().zip(&curve.ordinates) {
                if r > kit.r_max() {
                    continue;
                }
                let p = kit.phi_theta_asym(r, theta)?;
                args.push(r);
                diffs.push(phi - p.value);
            }
            predicted = if theta == T::zero() || theta == T::PI() {
                None
            } else if kit.is_special_angle(theta) {
                Some((T::lit(3.0) * inv - one).min(two * (two * inv - one)))
            } else {
                match cfg.kind() {
                    CornerKind::Convex => Some(two * (inv - one)),
                    CornerKind::Reentrant => kit.gamma(),
                }
            };
        }
        (Frame::Cartesian, CurveKind::ForwardRay)
        | (Frame::Rotated, CurveKind::ForwardRay)
        | (Frame::ForwardPolar, CurveKind::ForwardRay) => {
            let phi = curve.angle;
            let special = (phi - kit.map().derived().phi_star).abs()
                <= T::lit(1e-12) * cfg.half_angle().max(one);
            for (k, &r) in curve.radii.iter().enumerate() {
                if r > kit.r_max() {
                    continue;
                }
                let w = curve.points[k];
                let (arg, ord, pred) = match frame {
                    Frame::Cartesian => (w.re, w.im, kit.forward_curve_cartesian(w.re, phi)?),
                    Frame::Rotated => {
                        let q = kit.rotate(w);
                        (q.re, q.im, kit.forward_curve_cartesian(q.re, phi)?)
                    }
                    _ => {
                        let rho = curve.params[k];
                        (rho, curve.ordinates[k], kit.forward_curve_polar(rho, phi)?)
                    }
                };
                args.push(arg);
                diffs.push(ord - pred);
            }
            predicted = Some(match (frame, special) {
                (Frame::Cartesian, false) => two * inv - one,
                (Frame::Cartesian, true) => two,
                (Frame::Rotated, true) => T::lit(3.0),
                (Frame::Rotated, false) => (two * beta - one).min(two),
                (_, true) => two,
                (_, false) => (two * beta - two).min(one),
            });
        }
        _ => {
            return Err(Error::NotApplicable(format!(
                "{frame:?} frame for a {:?} curve",
                curve.kind
            )))
        }
    }
    if args.is_empty() {
        return Err(Error::NotApplicable(
            "no samples inside the asymptotic radius".into(),
        ));
    }
    let n = T::from_usize_lossy(diffs.len());
    let max_abs = diffs.iter().map(|d| d.abs()).fold(T::zero(), T::max);
    let rms = (diffs.iter().map(|d| *d * *d).sum::<T>() / n).sqrt();
    let (lx, ly): (Vec<T>, Vec<T>) = args
        .iter()
        .zip(&diffs)
        .filter(|(a, d)| a.abs() > T::zero() && d.abs() > T::zero())
        .map(|(a, d)| (a.abs().ln(), d.abs().ln()))
        .unzip();
    let empirical = (lx.len() >= 3).then(|| fit_line(&lx, &ly).0);
    Ok(DiscrepancyReport {
        frame,
        samples: diffs.len(),
        max_abs,
        rms,
        empirical_remainder_exponent: empirical,
        predicted_remainder_exponent: predicted,
    })
}

/// Candidate limits of inverse curves: `{-pi beta/2, phi*, pi beta/2}`.
pub fn inverse_candidates<T: Scalar>(map: &HarmonicCornerMap<T>) -> Vec<T> {
    let h = map.config().half_angle();
    vec![-h, map.derived().phi_star, h]
}

/// Candidate limits of forward curves: `{0, theta*, pi}`.
pub fn forward_candidates<T: Scalar>(kit: &AsymptoticKit<T>) -> Vec<T> {
    vec![T::zero(), kit.theta_star(), T::PI()]
}

/// Polar test meshes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeshSpec<T> {
    /// Circles `rho = n rho_max / circles` and rays `theta = pi n/(rays - 1)` in the `w`-plane.
    InversePolar {
        circles: usize,
        rays: usize,
        rho_max: T,
        resolution: usize,
    },
    /// Arcs `r = n R/arcs` and rays `phi = pi beta/2 (2n/(rays - 1) - 1)` in the `z`-plane.
    ForwardPolar {
        arcs: usize,
        rays: usize,
        resolution: usize,
    },
}

impl<T: Scalar> MeshSpec<T> {
    /// Five circles and eight rays through the upper half-plane.
    pub fn xi() -> Self {
        MeshSpec::InversePolar {
            circles: 5,
            rays: 8,
            rho_max: T::one(),
            resolution: 160,
        }
    }

    /// Five arcs and eight rays through the sector.
    pub fn t() -> Self {
        MeshSpec::ForwardPolar {
            arcs: 5,
            rays: 8,
            resolution: 160,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polyline<T> {
    pub label: String,
    pub points: Vec<[T; 2]>,
    pub truncated: bool,
}

/// A polar mesh and its image, both as polylines.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshImages<T> {
    /// The mesh itself (`w`-plane for `InversePolar`, `z`-plane for `ForwardPolar`).
    pub mesh: Vec<Polyline<T>>,
    /// `F^{-1}(mesh)` or `F(mesh)`.
    pub image: Vec<Polyline<T>>,
    pub warnings: Vec<String>,
}

pub fn mesh_images<T: Scalar>(map: &HarmonicCornerMap<T>, spec: &MeshSpec<T>) -> MeshImages<T> {
    match *spec {
        MeshSpec::InversePolar {
            circles,
            rays,
            rho_max,
            resolution,
        } => inverse_mesh(map, circles, rays, rho_max, resolution.max(2)),
        MeshSpec::ForwardPolar {
            arcs,
            rays,
            resolution,
        } => forward_mesh(map, arcs, rays, resolution.max(2)),
    }
}

fn frac<T: Scalar>(k: usize, n: usize) -> T {
    T::from_usize_lossy(k) / T::from_usize_lossy(n)
}

fn inverse_mesh<T: Scalar>(
    map: &HarmonicCornerMap<T>,
    circles: usize,
    rays: usize,
    rho_max: T,
    res: usize,
) -> MeshImages<T> {
    let cfg = map.config();
    let h = cfg.half_angle();
    let big = cfg.radius();
    let mut mesh = Vec::new();
    let mut image = Vec::new();
    let mut warnings = Vec::new();
    let ray_angles: Vec<T> = (0..rays)
        .map(|n| if n + 1 == rays { T::PI() } else { T::PI() * frac(n, rays.max(2) - 1) })
        .collect();

    for n in 1..=circles {
        let rho = rho_max * frac(n, circles);
        mesh.push(Polyline {
            label: format!("rho={}", rho),
            points: (0..=res)
                .map(|k| {
                    let t = T::PI() * frac(k, res);
                    [rho * t.cos(), rho * t.sin()]
                })
                .collect(),
            truncated: false,
        });
    }
    for &theta in &ray_angles {
        mesh.push(Polyline {
            label: format!("theta={}", theta),
            points: vec![[T::zero(), T::zero()], [rho_max * theta.cos(), rho_max * theta.sin()]],
            truncated: false,
        });
    }

    // circle preimages: |F(r e^{i phi})| = rho along each ray phi
    let circle_images: Vec<(Polyline<T>, Option<String>)> = (1..=circles)
        .into_par_iter()
        .map(|n| {
            let rho = rho_max * frac(n, circles);
            let mut pts = Vec::new();
            let mut missing = 0usize;
            for k in 0..=res {
                let phi = if k == res { h } else { -h + T::two() * h * frac(k, res) };
                match circle_preimage(map, phi, rho) {
                    Some(r) => pts.push([r * phi.cos(), r * phi.sin()]),
                    None => missing += 1,
                }
            }
            let warn = (missing > 0).then(|| {
                format!("circle rho={rho}: {missing} of {} directions have no preimage inside r <= {big}", res + 1)
            });
            (
                Polyline {
                    label: format!("rho={}", rho),
                    points: pts,
                    truncated: missing > 0,
                },
                warn,
            )
        })
        .collect();
    for (p, w) in circle_images {
        image.push(p);
        warnings.extend(w);
    }

    let ray_images: Vec<(Polyline<T>, Option<String>)> = ray_angles
        .par_iter()
        .map(|&theta| {
            let label = format!("theta={}", theta);
            if theta == T::zero() || theta == T::PI() {
                // Side data: the real half-axes are the images of the sides.
                let (phi, speed) = if theta == T::zero() {
                    (-h, cfg.sigma_plus())
                } else {
                    (h, cfg.sigma_minus())
                };
                let rmax = (rho_max / speed).min(big);
                let pts = (0..=res)
                    .map(|k| {
                        let r = rmax * frac(k, res);
                        [r * phi.cos(), r * phi.sin()]
                    })
                    .collect();
                return (
                    Polyline {
                        label,
                        points: pts,
                        truncated: false,
                    },
                    None,
                );
            }
            let radii: Vec<T> = (1..=res).map(|k| big * frac(k, res)).collect();
            match trace_inverse_ray(map, theta, &radii) {
                Ok(curve) => {
                    let mut pts: Vec<[T; 2]> = curve
                        .points
                        .iter()
                        .rev()
                        .take_while(|z| map.eval_unchecked(z.norm(), z.im.atan2(z.re)).norm() <= rho_max)
                        .map(|z| [z.re, z.im])
                        .collect();
                    pts.insert(0, [T::zero(), T::zero()]);
                    (
                        Polyline {
                            label,
                            points: pts,
                            truncated: false,
                        },
                        None,
                    )
                }
                Err(e) => (
                    Polyline {
                        label: label.clone(),
                        points: vec![[T::zero(), T::zero()]],
                        truncated: true,
                    },
                    Some(format!("{label}: {e}")),
                ),
            }
        })
        .collect();
    for (p, w) in ray_images {
        image.push(p);
        warnings.extend(w);
    }
    for w in &warnings {
        warn!("{w}");
    }
    MeshImages {
        mesh,
        image,
        warnings,
    }
}

/// Smallest `r in (0, R]` with `|F(r e^{i phi})| = rho`.
fn circle_preimage<T: Scalar>(map: &HarmonicCornerMap<T>, phi: T, rho: T) -> Option<T> {
    let big = map.config().radius();
    let g = |r: T| map.eval_unchecked(r, phi).norm() - rho;
    const SCAN: usize = 64;
    let mut r0 = T::zero();
    let mut g0 = -rho;
    for k in 1..=SCAN {
        let r1 = big * frac(k, SCAN);
        let g1 = g(r1);
        if g1 >= T::zero() {
            if g1 == T::zero() {
                return Some(r1);
            }
            return Some(bisect(&g, r0, r1, g0, big * T::lit(1e-13)));
        }
        r0 = r1;
        g0 = g1;
    }
    None
}

fn forward_mesh<T: Scalar>(
    map: &HarmonicCornerMap<T>,
    arcs: usize,
    rays: usize,
    res: usize,
) -> MeshImages<T> {
    let cfg = map.config();
    let h = cfg.half_angle();
    let big = cfg.radius();
    let mut mesh = Vec::new();
    let mut image = Vec::new();
    let arc_pts = |r: T| -> Vec<(T, T)> {
        (0..=res)
            .map(|k| (r, if k == res { h } else { -h + T::two() * h * frac(k, res) }))
            .collect()
    };
    let ray_pts = |phi: T| -> Vec<(T, T)> { (0..=res).map(|k| (big * frac(k, res), phi)).collect() };
    let mut push = |label: String, polar: Vec<(T, T)>| {
        mesh.push(Polyline {
            label: label.clone(),
            points: polar.iter().map(|&(r, p)| [r * p.cos(), r * p.sin()]).collect(),
            truncated: false,
        });
        image.push(Polyline {
            label,
            points: polar
                .iter()
                .map(|&(r, p)| {
                    let w = map.eval_unchecked(r, p);
                    [w.re, w.im]
                })
                .collect(),
            truncated: false,
        });
    };
    for n in 1..=arcs {
        let r = big * frac(n, arcs);
        push(format!("r={}", r), arc_pts(r));
    }
    for n in 0..rays {
        let phi = if n + 1 == rays {
            h
        } else if n == 0 {
            -h
        } else {
            h * (T::two() * frac(n, rays.max(2) - 1) - T::one())
        };
        push(format!("phi={}", phi), ray_pts(phi));
    }
    MeshImages {
        mesh,
        image,
        warnings: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corner::CornerConfig;
    use crate::series::SeriesCoefficients;
    use std::f64::consts::PI;

    fn map(beta: f64, sp: f64, sm: f64, pairs: &[(f64, f64)], n: usize) -> HarmonicCornerMap<f64> {
        let cfg = CornerConfig::new(beta, sp, sm, 1.0).unwrap();
        HarmonicCornerMap::new(cfg, SeriesCoefficients::from_pairs(pairs, n).unwrap())
    }

    #[test]
    fn radii_are_log_spaced_and_decreasing() {
        let r = default_radii(1.0f64);
        assert_eq!(r.len(), 241);
        assert!((r[0] - 0.1).abs() < 1e-15);
        assert!((r[240] - 1e-6).abs() < 1e-18);
        assert!(r.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn exact_curve_at_theta_star_without_higher_terms() {
        // u - v cot(theta*) = Q + (a1 - b1 cot theta*) psi_1 = Q, so the curve is phi = phi*.
        let m = map(0.75, 1.0, 1.0, &[(0.5, 1.0)], 2);
        let ts = (1.0f64).atan2(0.5);
        let c = trace_inverse_ray(&m, ts, &default_radii(1.0)).unwrap();
        for &p in &c.ordinates {
            assert!((p - m.derived().phi_star).abs() < 1e-11, "phi = {p}");
        }
        let est = estimate_exit_angle(&c, &inverse_candidates(&m)).unwrap();
        assert!(est.order_estimate.is_none());
        assert_eq!(est.limit_angle, 0.0);
    }

    #[test]
    fn side_rays_from_boundary_data() {
        let m = map(0.5, 1.0, 1.0, &[(1.0, 1.0)], 2);
        let c = trace_inverse_ray(&m, 0.0, &[0.1, 0.01]).unwrap();
        assert!(c.ordinates.iter().all(|&p| p == -PI / 4.0));
        let m = map(1.5, 1.0, 1.0, &[(1.0, 1.0)], 2);
        assert!(matches!(
            trace_inverse_ray(&m, PI, &[0.1]),
            Err(Error::UnsupportedAngle { .. })
        ));
    }

    #[test]
    fn forward_side_ray_is_real() {
        let m = map(1.5, 1.0, 2.0, &[(1.0, 1.0)], 4);
        let c = trace_forward_ray(&m, -0.75 * PI, &default_radii(1.0)).unwrap();
        assert!(c.ordinates.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn synthetic_power_law() {
        let rs = log_radii(1.0f64, 1e-6, 1e-1, 24);
        let ord: Vec<f64> = rs.iter().map(|r| 0.3 + 2.0 * r.sqrt()).collect();
        let est = estimate_power_limit(&rs, &ord, &[0.0, 0.3, 1.0]).unwrap();
        assert_eq!(est.limit_angle, 0.3);
        assert!((est.order_estimate.unwrap() - 0.5).abs() < 1e-3);
        assert!((est.coefficient - 2.0).abs() < 1e-6);
        let (a, c, p) = free_power_fit(&rs, &ord).unwrap();
        assert!((a - 0.3).abs() < 1e-6 && (c - 2.0).abs() < 1e-4 && (p - 0.5).abs() < 1e-4);
    }

    #[test]
    fn short_curves_rejected() {
        let rs = log_radii(1.0f64, 1e-2, 1e-1, 24);
        let ord = vec![0.0; rs.len()];
        assert!(matches!(
            estimate_power_limit(&rs, &ord, &[0.0]),
            Err(Error::ShortCurve { .. })
        ));
    }

    #[test]
    fn noisy_curve_is_poor_fit() {
        let rs = log_radii(1.0f64, 1e-6, 1e-1, 24);
        let ord: Vec<f64> = rs
            .iter()
            .enumerate()
            .map(|(k, r)| 0.3 + r * if k % 2 == 0 { 1.0 } else { 1e3 })
            .collect();
        assert!(matches!(
            estimate_power_limit(&rs, &ord, &[0.3]),
            Err(Error::PoorFit { .. })
        ));
    }

    #[test]
    fn mesh_counts() {
        let m = map(0.5, 1.0, 1.0, &[(1.0, 1.0), (0.1, -0.1)], 4);
        let xi = mesh_images(&m, &MeshSpec::xi());
        assert_eq!(xi.mesh.len(), 13);
        assert_eq!(xi.image.len(), 13);
        let t = mesh_images(&m, &MeshSpec::t());
        assert_eq!(t.mesh.len(), 13);
        assert_eq!(t.image.len(), 13);
        // side rays of T land on the real axis
        for line in t.image.iter().filter(|l| l.label.starts_with("phi=")).take(1) {
            assert!(line.points.iter().all(|p| p[1] == 0.0));
        }
        let last = t.image.last().unwrap();
        assert!(last.points.iter().all(|p| p[1] == 0.0 && p[0] <= 0.0));
    }
}
