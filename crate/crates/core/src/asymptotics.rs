//! Closed-form corner asymptotics and exit-angle laws.
//!
//! Inverse curves `L_theta = F^{-1}(ray theta)` are described by `phi_theta(r)`;
//! forward curves `l_phi = F(ray phi)` by `v(u)`, by `V(U)` in the frame rotated by
//! `theta*`, or by `theta_phi(rho)`.
//!
//! Constants that involve `(a_2, b_2)` follow the basis convention of
//! [`crate::series`], where `psi_2 = -r^{2/beta} sin(2 phi/beta)`. Relative to
//! the form with `+sin(2 phi/beta)` this flips the sign of `E1*` and of the
//! quadratic coefficient of `V*(U)`.

use log::debug;
use num_complex::Complex;
use serde::Serialize;

use crate::corner::{CornerConfig, CornerKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::HarmonicCornerMap;

/// Relative size of `a1 - b1 cot theta` below which `theta` is treated as `theta*`.
pub const SPECIAL_ANGLE_TOL: f64 = 1e-8;
/// Default upper radius of the advertised asymptotic range, as a fraction of `R`.
pub const DEFAULT_ASYM_FRACTION: f64 = 0.1;

/// The unique `theta in (0, pi)` with `a1 - b1 cot theta = 0`.
pub fn theta_star<T: Scalar>(a1: T, b1: T) -> Result<T> {
    if a1 == T::zero() || !(b1 > T::zero()) || !a1.is_finite() || !b1.is_finite() {
        return Err(Error::Constraint {
            a1: a1.as_f64(),
            b1: b1.as_f64(),
        });
    }
    Ok(b1.atan2(a1))
}

/// Conformal reference `K(z) = (e^{i pi beta/2} z)^{1/beta}` of the sector onto the upper half-plane.
pub fn conformal_map<T: Scalar>(cfg: &CornerConfig<T>, r: T, phi: T) -> Result<Complex<T>> {
    let phi = cfg.check_angle(phi)?;
    if !r.is_finite() || r < T::zero() {
        return Err(Error::Domain {
            what: "r",
            value: r.as_f64(),
            range: "[0, inf)".into(),
        });
    }
    let beta = cfg.beta();
    Ok(Complex::from_polar(
        r.powf(T::one() / beta),
        phi / beta + T::FRAC_PI_2(),
    ))
}

/// Exit angle of the conformal image of the ray `phi`: `phi/beta + pi/2`.
pub fn conformal_theta_of_phi<T: Scalar>(beta: T, phi: T) -> T {
    phi / beta + T::FRAC_PI_2()
}

/// Inverse conformal law `beta theta - pi beta/2`.
pub fn conformal_phi_of_theta<T: Scalar>(beta: T, theta: T) -> T {
    beta * theta - T::FRAC_PI_2() * beta
}

/// Asymptotic prediction plus range bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticValue<T> {
    pub value: T,
    /// `r` exceeds the advertised asymptotic radius.
    pub out_of_range: bool,
    /// The raw formula left the closed sector and was clamped to a side.
    pub clamped: bool,
}

/// `offset + coefficient * |arg|^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerLaw<T> {
    pub offset: T,
    pub coefficient: T,
    pub exponent: T,
}

impl<T: Scalar> PowerLaw<T> {
    pub fn eval(&self, arg: T) -> T {
        self.offset + self.coefficient * arg.abs().powf(self.exponent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleLawKind {
    /// `phi(theta)`: exit angle at the vertex of `F^{-1}(ray theta)`.
    InverseExit,
    /// `theta(phi)`: exit angle at the origin of `F(ray phi)`.
    ForwardExit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnglePiece<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
    pub value: T,
}

impl<T: Scalar> AnglePiece<T> {
    fn contains(&self, x: T) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

/// Discontinuity of an angle law at `location`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Jump<T> {
    pub location: T,
    pub left: Option<T>,
    pub at: T,
    pub right: Option<T>,
    pub magnitude: T,
}

/// Piecewise-constant exit-angle correspondence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleLaw<T> {
    pub kind: AngleLawKind,
    pub pieces: Vec<AnglePiece<T>>,
}

impl<T: Scalar> AngleLaw<T> {
    pub fn eval(&self, x: T) -> Option<T> {
        self.pieces.iter().find(|p| p.contains(x)).map(|p| p.value)
    }

    pub fn domain(&self) -> (T, T) {
        (self.pieces[0].lo, self.pieces[self.pieces.len() - 1].hi)
    }

    /// Breakpoints where the one-sided limits or the point value disagree.
    pub fn jumps(&self) -> Vec<Jump<T>> {
        let mut locs: Vec<T> = Vec::new();
        for p in &self.pieces {
            for x in [p.lo, p.hi] {
                if !locs.contains(&x) {
                    locs.push(x);
                }
            }
        }
        locs.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        let mut out = Vec::new();
        for x in locs {
            let Some(at) = self.eval(x) else { continue };
            let left = self
                .pieces
                .iter()
                .find(|p| !p.is_point() && p.hi == x)
                .map(|p| p.value);
            let right = self
                .pieces
                .iter()
                .find(|p| !p.is_point() && p.lo == x)
                .map(|p| p.value);
            let vals: Vec<T> = [left, Some(at), right].into_iter().flatten().collect();
            let mut magnitude = T::zero();
            for i in 0..vals.len() {
                for j in i + 1..vals.len() {
                    magnitude = magnitude.max((vals[i] - vals[j]).abs());
                }
            }
            if magnitude > T::zero() {
                out.push(Jump {
                    location: x,
                    left,
                    at,
                    right,
                    magnitude,
                });
            }
        }
        out
    }

    /// The jump at `x`, if any.
    pub fn jump_at(&self, x: T) -> Option<Jump<T>> {
        self.jumps().into_iter().find(|j| j.location == x)
    }
}

fn piece<T>(lo: T, hi: T, lo_closed: bool, hi_closed: bool, value: T) -> AnglePiece<T> {
    AnglePiece {
        lo,
        hi,
        lo_closed,
        hi_closed,
        value,
    }
}

/// Derived asymptotic constants and closed-form evaluators for one map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticKit<T> {
    map: HarmonicCornerMap<T>,
    theta_star: T,
    r_max: T,
}

impl<T: Scalar> AsymptoticKit<T> {
    pub fn new(map: HarmonicCornerMap<T>) -> Result<Self> {
        let c = map.coeffs();
        let theta_star = theta_star(c.a1(), c.b1())?;
        let r_max = map.config().radius() * T::lit(DEFAULT_ASYM_FRACTION);
        Ok(Self {
            map,
            theta_star,
            r_max,
        })
    }

    pub fn with_r_max(mut self, r_max: T) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn map(&self) -> &HarmonicCornerMap<T> {
        &self.map
    }

    fn cfg(&self) -> &CornerConfig<T> {
        self.map.config()
    }

    fn beta(&self) -> T {
        self.cfg().beta()
    }

    fn mu(&self) -> T {
        self.map.derived().mu
    }

    fn phi_star(&self) -> T {
        self.map.derived().phi_star
    }

    pub fn theta_star(&self) -> T {
        self.theta_star
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    /// `min{1/beta, 2(1 - 1/beta)}` for a reentrant corner.
    pub fn gamma(&self) -> Option<T> {
        let inv = T::one() / self.beta();
        match self.cfg().kind() {
            CornerKind::Reentrant => Some(inv.min(T::two() * (T::one() - inv))),
            CornerKind::Convex => None,
        }
    }

    fn c1(&self, theta: T) -> T {
        let c = self.map.coeffs();
        c.a1() - c.b1() / theta.tan()
    }

    fn c2(&self, theta: T) -> T {
        let c = self.map.coeffs();
        c.a2() - c.b2() / theta.tan()
    }

    fn modulus1(&self) -> T {
        let c = self.map.coeffs();
        c.a1().hypot(c.b1())
    }

    /// Whether `theta` is close enough to `theta*` to use the special branch.
    pub fn is_special_angle(&self, theta: T) -> bool {
        theta > T::zero()
            && theta < T::PI()
            && self.c1(theta).abs() < T::lit(SPECIAL_ANGLE_TOL) * self.modulus1()
    }

    /// `E1(theta) = mu^{-1} (a1 - b1 cot theta) cos(phi*/beta)`.
    pub fn e1(&self, theta: T) -> T {
        self.c1(theta) / self.mu() * (self.phi_star() / self.beta()).cos()
    }

    /// `E1* = -mu^{-1} (a2 - b2 cot theta*) sin(2 phi*/beta)`.
    pub fn e1_star(&self) -> T {
        -self.c2(self.theta_star) / self.mu() * (T::two() * self.phi_star() / self.beta()).sin()
    }

    /// `F1(theta) = mu / (a1 - b1 cot theta)`.
    pub fn f1(&self, theta: T) -> T {
        self.mu() / self.c1(theta)
    }

    /// Exponent of the leading correction of `phi_theta(r)`.
    pub fn inverse_order(&self, theta: T) -> T {
        let inv = T::one() / self.beta();
        if self.is_special_angle(theta) {
            T::two() * inv - T::one()
        } else {
            (inv - T::one()).abs()
        }
    }

    /// Leading-order `phi_theta(r)` near the vertex.
    pub fn phi_theta_asym(&self, r: T, theta: T) -> Result<AsymptoticValue<T>> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::Domain {
                what: "r",
                value: r.as_f64(),
                range: "(0, R]".into(),
            });
        }
        if !(theta >= T::zero() && theta <= T::PI()) {
            return Err(Error::Domain {
                what: "theta",
                value: theta.as_f64(),
                range: "[0, pi]".into(),
            });
        }
        let h = self.cfg().half_angle();
        let beta = self.beta();
        let inv = T::one() / beta;
        let kind = self.cfg().kind();
        let raw = if theta == T::zero() || theta == T::PI() {
            if kind == CornerKind::Reentrant {
                return Err(Error::UnsupportedAngle {
                    theta: theta.as_f64(),
                    beta: beta.as_f64(),
                });
            }
            if theta == T::zero() {
                -h
            } else {
                h
            }
        } else if self.is_special_angle(theta) {
            self.phi_star() + self.e1_star() * r.powf(T::two() * inv - T::one())
        } else {
            match kind {
                CornerKind::Convex => self.phi_star() + self.e1(theta) * r.powf(inv - T::one()),
                CornerKind::Reentrant => {
                    let bf = beta * self.f1(theta);
                    let rr = r.powf(T::one() - inv);
                    if theta < self.theta_star {
                        -h - bf * (h + self.phi_star()).sin() * rr
                    } else {
                        h - bf * (h - self.phi_star()).sin() * rr
                    }
                }
            }
        };
        let value = raw.max(-h).min(h);
        let clamped = value != raw;
        let out_of_range = r > self.r_max;
        if clamped || out_of_range {
            debug!(
                "asymptotic-range exit: r = {r}, theta = {theta}, raw phi = {raw}, clamped = {clamped}"
            );
        }
        Ok(AsymptoticValue {
            value,
            out_of_range,
            clamped,
        })
    }

    /// `phi(theta)` exit-angle law.
    pub fn inverse_law(&self) -> AngleLaw<T> {
        let h = self.cfg().half_angle();
        let (pi, ts, ps) = (T::PI(), self.theta_star, self.phi_star());
        let pieces = match self.cfg().kind() {
            CornerKind::Convex => vec![
                piece(T::zero(), T::zero(), true, true, -h),
                piece(T::zero(), pi, false, false, ps),
                piece(pi, pi, true, true, h),
            ],
            CornerKind::Reentrant => vec![
                piece(T::zero(), ts, true, false, -h),
                piece(ts, ts, true, true, ps),
                piece(ts, pi, false, true, h),
            ],
        };
        AngleLaw {
            kind: AngleLawKind::InverseExit,
            pieces,
        }
    }

    /// `theta(phi)` exit-angle law.
    pub fn forward_law(&self) -> AngleLaw<T> {
        let h = self.cfg().half_angle();
        let (pi, ts, ps) = (T::PI(), self.theta_star, self.phi_star());
        let pieces = match self.cfg().kind() {
            CornerKind::Convex => vec![
                piece(-h, ps, true, false, T::zero()),
                piece(ps, ps, true, true, ts),
                piece(ps, h, false, true, pi),
            ],
            CornerKind::Reentrant => vec![
                piece(-h, -h, true, true, T::zero()),
                piece(-h, h, false, false, ts),
                piece(h, h, true, true, pi),
            ],
        };
        AngleLaw {
            kind: AngleLawKind::ForwardExit,
            pieces,
        }
    }

    /// `phi(theta)`; the argument is clamped to `[0, pi]`.
    pub fn phi_of_theta(&self, theta: T) -> T {
        let x = theta.max(T::zero()).min(T::PI());
        self.inverse_law().eval(x).expect("law covers [0, pi]")
    }

    /// `theta(phi)`; the argument is clamped to the closed sector.
    pub fn theta_of_phi(&self, phi: T) -> T {
        let h = self.cfg().half_angle();
        let x = phi.max(-h).min(h);
        self.forward_law().eval(x).expect("law covers the sector")
    }

    fn is_special_direction(&self, phi: T) -> bool {
        (phi - self.phi_star()).abs() <= T::lit(1e-12) * self.cfg().half_angle().max(T::one())
    }

    fn check_open_direction(&self, phi: T) -> Result<T> {
        let phi = self.cfg().check_angle(phi)?;
        let c = (phi / self.beta()).cos();
        if c.abs() <= T::lit(1e-12) {
            return Err(Error::SingularDirection { phi: phi.as_f64() });
        }
        Ok(phi)
    }

    /// Leading power law of the forward curve `l_phi` in Cartesian form:
    /// `v(|u|)` for a convex corner, `V(U)` in the frame rotated by `theta*` for a reentrant one.
    pub fn forward_cartesian_law(&self, phi: T) -> Result<PowerLaw<T>> {
        let phi = self.check_open_direction(phi)?;
        let c = self.map.coeffs();
        let (a1, b1) = (c.a1(), c.b1());
        let beta = self.beta();
        let inv = T::one() / beta;
        let mu = self.mu();
        let ps = self.phi_star();
        let special = self.is_special_direction(phi);
        let law = match (self.cfg().kind(), special) {
            (CornerKind::Convex, false) => PowerLaw {
                offset: T::zero(),
                coefficient: b1 * (phi * inv).cos() / (mu * (phi - ps).sin().abs()).powf(inv),
                exponent: inv,
            },
            (CornerKind::Convex, true) => PowerLaw {
                offset: T::zero(),
                coefficient: b1 / a1,
                exponent: T::one(),
            },
            (CornerKind::Reentrant, true) => PowerLaw {
                offset: T::zero(),
                coefficient: self.special_quadratic_coefficient(),
                exponent: T::two(),
            },
            (CornerKind::Reentrant, false) => PowerLaw {
                offset: T::zero(),
                coefficient: self.reentrant_ray_coefficient(phi),
                exponent: beta,
            },
        };
        Ok(law)
    }

    /// `-2 (a1 b2 - a2 b1) tan(phi*/beta) / (a1^2 + b1^2)^{3/2}`.
    fn special_quadratic_coefficient(&self) -> T {
        let c = self.map.coeffs();
        let cross = c.a1() * c.b2() - c.a2() * c.b1();
        let m = self.modulus1();
        -T::two() * cross * (self.phi_star() / self.beta()).tan() / (m * m * m)
    }

    /// `mu b1 sin(phi - phi*) / (|c1|^{beta+1} cos^beta(phi/beta))`.
    fn reentrant_ray_coefficient(&self, phi: T) -> T {
        let beta = self.beta();
        let m = self.modulus1();
        self.mu() * self.map.coeffs().b1() * (phi - self.phi_star()).sin()
            / (m.powf(beta + T::one()) * (phi / beta).cos().powf(beta))
    }

    /// Leading-order ordinate of `l_phi` at abscissa `arg` (`u` or rotated `U`).
    pub fn forward_curve_cartesian(&self, arg: T, phi: T) -> Result<T> {
        let law = self.forward_cartesian_law(phi)?;
        if self.cfg().kind() == CornerKind::Convex && law.exponent == T::one() {
            // slope case keeps the sign of u
            return Ok(law.coefficient * arg);
        }
        Ok(law.eval(arg))
    }

    /// `theta_phi(rho) = theta* + C rho^p` for a reentrant corner.
    pub fn forward_polar_law(&self, phi: T) -> Result<PowerLaw<T>> {
        if self.cfg().kind() != CornerKind::Reentrant {
            return Err(Error::Case {
                beta: self.beta().as_f64(),
                expected: "(1, 2)",
            });
        }
        let phi = self.check_open_direction(phi)?;
        let (coefficient, exponent) = if self.is_special_direction(phi) {
            (self.special_quadratic_coefficient(), T::one())
        } else {
            (self.reentrant_ray_coefficient(phi), self.beta() - T::one())
        };
        Ok(PowerLaw {
            offset: self.theta_star,
            coefficient,
            exponent,
        })
    }

    pub fn forward_curve_polar(&self, rho: T, phi: T) -> Result<T> {
        Ok(self.forward_polar_law(phi)?.eval(rho))
    }

    /// `w e^{-i theta*}`: coordinates in the frame aligned with `theta*`.
    pub fn rotate(&self, w: Complex<T>) -> Complex<T> {
        w * Complex::from_polar(T::one(), -self.theta_star)
    }
}
