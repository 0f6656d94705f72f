use std::f64::consts::PI;

use cornermap::asymptotics::{conformal_phi_of_theta, conformal_theta_of_phi};
use cornermap::tracer::log_radii;
use cornermap::{AsymptoticKit, CornerConfig, HarmonicCornerMap, SeriesCoefficients};

const BETAS: [f64; 6] = [0.4, 0.5, 0.75, 1.25, 1.5, 1.75];

fn kit(beta: f64, sp: f64, sm: f64) -> AsymptoticKit<f64> {
    let cfg = CornerConfig::new(beta, sp, sm, 1.0).unwrap();
    let coeffs = SeriesCoefficients::from_pairs(&[(0.8, 1.6), (-0.3, 0.4), (0.1, -0.1)], 3).unwrap();
    AsymptoticKit::new(HarmonicCornerMap::new(cfg, coeffs)).unwrap()
}

#[test]
fn special_angles_correspond() {
    for beta in BETAS {
        for (sp, sm) in [(1.0, 1.0), (1.2, 0.8), (0.5, 2.0)] {
            let k = kit(beta, sp, sm);
            let ps = k.map().derived().phi_star;
            assert_eq!(k.phi_of_theta(k.theta_star()), ps, "beta = {beta}");
            assert_eq!(k.theta_of_phi(ps), k.theta_star(), "beta = {beta}");
        }
    }
}

#[test]
fn jump_magnitudes() {
    for beta in BETAS {
        let k = kit(beta, 1.2, 0.8);
        if beta > 1.0 {
            let j = k.inverse_law().jump_at(k.theta_star()).expect("jump at theta*");
            assert!((j.magnitude - PI * beta).abs() < 1e-12, "beta = {beta}: {}", j.magnitude);
        } else {
            let ps = k.map().derived().phi_star;
            let j = k.forward_law().jump_at(ps).expect("jump at phi*");
            assert!((j.magnitude - PI).abs() < 1e-12, "beta = {beta}: {}", j.magnitude);
        }
    }
}

#[test]
fn laws_cover_their_domains() {
    for beta in BETAS {
        let k = kit(beta, 1.2, 0.8);
        let h = PI * beta / 2.0;
        let inv = k.inverse_law();
        assert_eq!(inv.domain(), (0.0, PI));
        let fwd = k.forward_law();
        assert_eq!(fwd.domain(), (-h, h));
        for i in 0..=100 {
            let theta = PI * i as f64 / 100.0;
            let phi = inv.eval(theta).expect("theta covered");
            assert!(phi.abs() <= h, "beta = {beta}, theta = {theta}");
            let phi = -h + 2.0 * h * i as f64 / 100.0;
            let theta = fwd.eval(phi).expect("phi covered");
            assert!((0.0..=PI).contains(&theta));
        }
    }
}

#[test]
fn asymptotic_formula_stays_in_sector() {
    for beta in BETAS {
        let k = kit(beta, 1.2, 0.8);
        let h = PI * beta / 2.0;
        for r in log_radii(1.0, 1e-8, 1e-1, 8) {
            for i in 0..=40 {
                let theta = PI * i as f64 / 40.0;
                if beta > 1.0 && (i == 0 || i == 40) {
                    assert!(k.phi_theta_asym(r, theta).is_err());
                    continue;
                }
                let v = k.phi_theta_asym(r, theta).unwrap();
                assert!(v.value.abs() <= h, "beta = {beta}, r = {r}, theta = {theta}: {}", v.value);
                assert!(!v.out_of_range);
            }
        }
    }
}

#[test]
fn conformal_law_agrees_at_sides() {
    for beta in [0.4, 0.5, 0.75] {
        let k = kit(beta, 1.0, 1.0);
        for theta in [0.0, PI] {
            assert!((k.phi_of_theta(theta) - conformal_phi_of_theta(beta, theta)).abs() < 1e-12);
        }
        let h = PI * beta / 2.0;
        for phi in [-h, h] {
            assert!((k.theta_of_phi(phi) - conformal_theta_of_phi(beta, phi)).abs() < 1e-12);
        }
    }
}

#[test]
fn gamma_only_for_reentrant() {
    for beta in BETAS {
        let k = kit(beta, 1.0, 1.0);
        match k.gamma() {
            Some(g) => {
                assert!(beta > 1.0);
                assert!((g - (1.0 / beta).min(2.0 * (1.0 - 1.0 / beta))).abs() < 1e-15);
            }
            None => assert!(beta < 1.0),
        }
    }
}
