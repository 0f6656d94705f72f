//! Corner geometry, boundary speeds and the linear part of the map.
//!
//! The sector is `{0 < r < R, |phi| < pi*beta/2}`. Side `L+` is the ray
//! `phi = -pi*beta/2` and is sent to the positive real axis with speed
//! `sigma_plus`; side `L-` is `phi = +pi*beta/2` and goes to the negative
//! real axis with speed `sigma_minus`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Convex (`0 < beta < 1`) or reentrant (`1 < beta < 2`) corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerKind {
    Convex,
    Reentrant,
}

/// Opening factor, side speeds and radius of a corner. Angle of the corner is `pi*beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CornerConfig<T> {
    beta: T,
    sigma_plus: T,
    sigma_minus: T,
    radius: T,
}

impl<T: Scalar> CornerConfig<T> {
    pub fn new(beta: T, sigma_plus: T, sigma_minus: T, radius: T) -> Result<Self> {
        let finite = [beta, sigma_plus, sigma_minus, radius]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        let two = T::two();
        if !(beta > T::zero() && beta < two) || beta == T::one() {
            return Err(Error::InvalidConfig(format!(
                "beta = {beta} must lie in (0,1) or (1,2)"
            )));
        }
        // sin(pi*beta) must be usable as a divisor.
        if (T::PI() * beta).sin().abs() <= T::epsilon() * T::lit(16.0) {
            return Err(Error::InvalidConfig(format!(
                "beta = {beta} is numerically indistinguishable from 0, 1 or 2"
            )));
        }
        if !(sigma_plus > T::zero() && sigma_minus > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "side speeds must be positive (sigma+ = {sigma_plus}, sigma- = {sigma_minus})"
            )));
        }
        if !(radius > T::zero()) {
            return Err(Error::InvalidConfig(format!("radius = {radius} must be positive")));
        }
        Ok(Self {
            beta,
            sigma_plus,
            sigma_minus,
            radius,
        })
    }

    /// Symmetric corner of unit radius.
    pub fn symmetric(beta: T, sigma: T) -> Result<Self> {
        Self::new(beta, sigma, sigma, T::one())
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn sigma_plus(&self) -> T {
        self.sigma_plus
    }

    pub fn sigma_minus(&self) -> T {
        self.sigma_minus
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn kind(&self) -> CornerKind {
        if self.beta < T::one() {
            CornerKind::Convex
        } else {
            CornerKind::Reentrant
        }
    }

    /// `pi*beta/2`, the angular coordinate of side `L-`.
    pub fn half_angle(&self) -> T {
        T::FRAC_PI_2() * self.beta
    }

    /// Rounding slack used when deciding whether an angle lies on a side.
    pub(crate) fn side_tolerance(&self) -> T {
        T::epsilon() * T::lit(64.0) * self.half_angle().max(T::one())
    }

    /// Checks `phi` against the closed sector and snaps values within
    /// rounding distance of a side exactly onto it.
    pub fn check_angle(&self, phi: T) -> Result<T> {
        let h = self.half_angle();
        let tol = self.side_tolerance();
        if !phi.is_finite() || phi < -h - tol || phi > h + tol {
            return Err(Error::Domain {
                what: "phi",
                value: phi.as_f64(),
                range: format!("[-{h}, {h}]"),
            });
        }
        Ok(phi.max(-h).min(h))
    }

    /// `Some(+1)` on `L+`, `Some(-1)` on `L-`, `None` in the open sector.
    pub(crate) fn side_of(&self, phi: T) -> Option<i8> {
        let h = self.half_angle();
        let tol = self.side_tolerance();
        if (phi + h).abs() <= tol {
            Some(1)
        } else if (phi - h).abs() <= tol {
            Some(-1)
        } else {
            None
        }
    }

    pub(crate) fn check_radius(&self, r: T) -> Result<T> {
        if !r.is_finite() || r < T::zero() {
            return Err(Error::Domain {
                what: "r",
                value: r.as_f64(),
                range: format!("[0, {}]", self.radius),
            });
        }
        Ok(r)
    }

    /// Boundary data on the corner contour: `sigma_plus*r` on `L+`, `-sigma_minus*r` on `L-`.
    pub fn side_value(&self, side: i8, r: T) -> T {
        if side > 0 {
            self.sigma_plus * r
        } else {
            -self.sigma_minus * r
        }
    }

    pub fn derive_params(&self) -> DerivedParams<T> {
        derive_params(self)
    }
}

/// Amplitude `mu` and preferred direction `phi_star` of the linear part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedParams<T> {
    pub mu: T,
    pub phi_star: T,
}

/// Closed-form `mu` and `phi_star` fixed by the side speeds and the opening angle.
pub fn derive_params<T: Scalar>(cfg: &CornerConfig<T>) -> DerivedParams<T> {
    let (sp, sm) = (cfg.sigma_plus, cfg.sigma_minus);
    let pb = T::PI() * cfg.beta;
    let mu = (sp * sp + sm * sm + T::two() * sp * sm * pb.cos()).sqrt() / pb.sin().abs();
    let phi_star = ((sp - sm) / (sp + sm) * cfg.half_angle().tan()).atan();
    DerivedParams { mu, phi_star }
}

/// `Q(r e^{i phi}) = -mu r sin(phi - phi_star)`: the harmonic function linear
/// in `z` that reproduces the side data.
pub fn linear_part_q<T: Scalar>(
    cfg: &CornerConfig<T>,
    d: &DerivedParams<T>,
    r: T,
    phi: T,
) -> Result<T> {
    let r = cfg.check_radius(r)?;
    let phi = cfg.check_angle(phi)?;
    Ok(-d.mu * r * (phi - d.phi_star).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn cfg(beta: f64, sp: f64, sm: f64) -> CornerConfig<f64> {
        CornerConfig::new(beta, sp, sm, 1.0).unwrap()
    }

    #[test]
    fn rejects_invalid_configs() {
        for beta in [0.0, 1.0, 2.0, -0.5, 2.5, f64::NAN] {
            assert!(CornerConfig::new(beta, 1.0, 1.0, 1.0).is_err(), "beta {beta}");
        }
        assert!(CornerConfig::new(0.5, 0.0, 1.0, 1.0).is_err());
        assert!(CornerConfig::new(0.5, 1.0, -1.0, 1.0).is_err());
        assert!(CornerConfig::new(0.5, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn symmetric_quarter_corner() {
        let d = cfg(0.5, 1.0, 1.0).derive_params();
        assert_eq!(d.phi_star, 0.0);
        assert!((d.mu - 2f64.sqrt()).abs() < 1e-15);
        // Closed form sigma / sin(pi beta / 2) in the symmetric case.
        assert!((d.mu - 1.0 / (PI * 0.25).sin()).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_phi_star() {
        let d = cfg(0.5, 2.0, 1.0).derive_params();
        assert!((d.phi_star - (1.0f64 / 3.0).atan()).abs() < 1e-15);
        assert!((d.phi_star - 0.321_750_554_396_642_2).abs() < 1e-12);
    }

    #[test]
    fn linear_part_on_sides() {
        let c = cfg(0.5, 1.0, 1.0);
        let d = c.derive_params();
        let q = linear_part_q(&c, &d, 0.3, -FRAC_PI_4).unwrap();
        assert!((q - 0.3).abs() < 1e-15);
        assert_eq!(linear_part_q(&c, &d, 0.0, 0.7).unwrap(), 0.0);

        let c = cfg(0.5, 2.0, 1.0);
        let d = c.derive_params();
        let q = linear_part_q(&c, &d, 1.0, FRAC_PI_4).unwrap();
        assert!((q + 1.0).abs() < 1e-15);
        let q = linear_part_q(&c, &d, 1.0, -FRAC_PI_4).unwrap();
        assert!((q - 2.0).abs() < 1e-15);
    }

    #[test]
    fn linear_part_rejects_outside_angles() {
        let c = cfg(0.5, 1.0, 1.0);
        let d = c.derive_params();
        assert!(matches!(
            linear_part_q(&c, &d, 0.1, 1.0),
            Err(Error::Domain { what: "phi", .. })
        ));
        assert!(linear_part_q(&c, &d, -0.1, 0.0).is_err());
    }

    #[test]
    fn reentrant_phi_star_inside_sector() {
        for (sp, sm) in [(1.0, 5.0), (5.0, 1.0), (0.1, 3.0)] {
            let c = cfg(1.7, sp, sm);
            let d = c.derive_params();
            assert!(d.mu > 0.0);
            assert!(d.phi_star.abs() < c.half_angle());
        }
    }

    #[test]
    fn single_precision_agrees() {
        let c = CornerConfig::<f32>::new(0.75, 2.0, 1.0, 1.0).unwrap();
        let d = c.derive_params();
        let d64 = cfg(0.75, 2.0, 1.0).derive_params();
        assert!((d.mu as f64 - d64.mu).abs() < 1e-6);
        assert!((d.phi_star as f64 - d64.phi_star).abs() < 1e-6);
    }
}
