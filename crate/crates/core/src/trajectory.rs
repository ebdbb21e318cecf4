//! Closed-form orbits. With `ρ = −Θ(r)` every nonradial orbit satisfies
//! `ρ = (1 + e cos(β(θ − θ₀)))/p`, so it closes whenever β is rational.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::SurfaceSpec;
use crate::invariants::{conserved, ConservedSet};
use crate::report;
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicParams {
    pub p: f64,
    pub e: f64,
    /// Orientation, reduced to `[0, 2π/β)`.
    pub theta0: f64,
}

pub fn conic_params(s: &SurfaceSpec, c: &ConservedSet) -> Result<ConicParams> {
    if c.p_theta == 0.0 {
        return Err(Error::DegenerateOrbit);
    }
    let beta = s.beta();
    let g = s.gamma_c();
    let period = 2.0 * PI / beta;
    let mut theta0 = c.i2.atan2(c.i1) / beta;
    theta0 = theta0.rem_euclid(period);
    if theta0 >= period {
        theta0 = 0.0;
    }
    Ok(ConicParams {
        p: beta * beta * c.p_theta * c.p_theta / g,
        e: beta * c.magnitude() / g,
        theta0,
    })
}

pub fn rho_of_theta(cp: &ConicParams, beta: f64, theta: f64) -> f64 {
    (1.0 + cp.e * (beta * (theta - cp.theta0)).cos()) / cp.p
}

/// Inverse of `ρ = −Θ(r)` on `(r_N, r_S)`; decreasing in ρ.
pub fn r_from_rho(s: &SurfaceSpec, rho: f64) -> f64 {
    (FRAC_PI_2 - (s.amplitude() * s.beta() * rho).atan()) / s.sqrt_k()
}

/// Turning radii `(pericentre, apocentre)` of the conic through `cp`, with the
/// apocentre at `r_S` when the orbit is unbounded towards the south pole.
pub fn turning_radii(s: &SurfaceSpec, cp: &ConicParams) -> (f64, f64) {
    let rho_max = (1.0 + cp.e) / cp.p;
    let rho_min = (1.0 - cp.e) / cp.p;
    (r_from_rho(s, rho_max), r_from_rho(s, rho_min))
}

/// Largest `|−Θ(r(t)) − ρ(θ(t))|` along `traj`, with the conic taken from
/// the initial state.
pub fn compare_orbit(s: &SurfaceSpec, traj: &Trajectory) -> Result<f64> {
    let cp = initial_conic(s, traj)?;
    let mut worst: f64 = 0.0;
    for smp in &traj.samples {
        let rho = -s.profile(smp.state.r)?.theta;
        worst = worst.max((rho - rho_of_theta(&cp, s.beta(), smp.state.theta)).abs());
    }
    Ok(worst)
}

fn initial_conic(s: &SurfaceSpec, traj: &Trajectory) -> Result<ConicParams> {
    let first = traj
        .samples
        .first()
        .ok_or_else(|| Error::validation("trajectory", "empty"))?;
    conic_params(s, &conserved(s, &first.state)?)
}

pub const COMPARISON_HEADER: [&str; 4] = ["theta", "rho_numeric", "rho_analytic", "deviation"];

pub fn write_comparison<W: Write>(s: &SurfaceSpec, traj: &Trajectory, out: W) -> Result<()> {
    let cp = initial_conic(s, traj)?;
    let mut w = report::csv_writer(out, &COMPARISON_HEADER)?;
    for smp in &traj.samples {
        let numeric = -s.profile(smp.state.r)?.theta;
        let analytic = rho_of_theta(&cp, s.beta(), smp.state.theta);
        report::write_row(&mut w, &[smp.state.theta, numeric, analytic, (numeric - analytic).abs()])?;
    }
    report::finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, PhaseState, Termination};

    fn sphere() -> SurfaceSpec {
        SurfaceSpec::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn sphere_equator_conic() {
        let s = sphere();
        let c = conserved(&s, &PhaseState::new(PI / 2.0, 0.0, 0.0, 1.0)).unwrap();
        let cp = conic_params(&s, &c).unwrap();
        assert!((cp.p - 1.0).abs() < 1e-15);
        assert!((cp.e - 1.0).abs() < 1e-15);
        assert!((cp.theta0 - PI).abs() < 1e-15);
        assert!(rho_of_theta(&cp, 1.0, 0.0).abs() < 1e-15);
    }

    #[test]
    fn semi_latus_on_half_cone() {
        let s = SurfaceSpec::new(1.0, 0.5, 1.0).unwrap();
        let c = conserved(&s, &PhaseState::new(1.0, 0.0, 0.3, 2.0)).unwrap();
        assert!((conic_params(&s, &c).unwrap().p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn radial_orbit_is_degenerate() {
        let s = sphere();
        let c = conserved(&s, &PhaseState::new(1.0, 0.0, 0.3, 0.0)).unwrap();
        assert_eq!(conic_params(&s, &c), Err(Error::DegenerateOrbit));
    }

    #[test]
    fn circular_case_is_constant() {
        let cp = ConicParams { p: 2.0, e: 0.0, theta0: 0.3 };
        for th in [0.0, 1.0, 10.0] {
            assert_eq!(rho_of_theta(&cp, 0.7, th), 0.5);
        }
    }

    #[test]
    fn rho_period_is_two_pi_over_beta() {
        let cp = ConicParams { p: 1.3, e: 0.4, theta0: 0.2 };
        let beta = 2.0 / 3.0;
        for th in [0.0, 0.9, 2.5] {
            assert!((rho_of_theta(&cp, beta, th) - rho_of_theta(&cp, beta, th + 3.0 * PI)).abs() < 1e-14);
        }
    }

    #[test]
    fn r_from_rho_examples() {
        let s = sphere();
        assert!((r_from_rho(&s, 0.0) - PI / 2.0).abs() < 1e-15);
        assert!((r_from_rho(&s, 1.0) - PI / 4.0).abs() < 1e-15);
        let k4 = SurfaceSpec::new(4.0, 0.25, 1.0).unwrap();
        for i in 1..50 {
            let r = k4.r_south() * i as f64 / 50.0;
            let back = r_from_rho(&k4, -k4.profile(r).unwrap().theta);
            assert!((back - r).abs() < 1e-12);
        }
        assert!(r_from_rho(&s, 1e12) < 1e-11);
        assert!((r_from_rho(&s, -1e12) - PI).abs() < 1e-11);
    }

    #[test]
    fn circular_orbit_stays_at_constant_radius() {
        // Circular when ṗ_r = 0: p_θ² f'/f³ = γ/f².
        let s = SurfaceSpec::new(1.0, 0.5, 1.0).unwrap();
        let r0 = 0.6;
        let p_theta = (s.gamma_c() * s.f(r0) / s.df(r0)).sqrt();
        let x0 = PhaseState::new(r0, 0.0, 0.0, p_theta);
        let cp = conic_params(&s, &conserved(&s, &x0).unwrap()).unwrap();
        assert!(cp.e < 1e-12);
        let traj = integrate(&s, &x0, 20.0, 1e-10, 1e-3).unwrap();
        assert_eq!(traj.termination, Termination::TimeLimit);
        for smp in &traj.samples {
            assert!((smp.state.r - r0).abs() < 1e-8);
        }
    }

    #[test]
    fn numeric_orbit_follows_conic() {
        let s = sphere();
        let x0 = PhaseState::new(1.2, 0.4, 0.1, 0.8);
        let traj = integrate(&s, &x0, 30.0, 1e-10, 1e-3).unwrap();
        assert!(compare_orbit(&s, &traj).unwrap() < 1e-6);
        let mut buf = Vec::new();
        write_comparison(&s, &traj, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("theta,rho_numeric,rho_analytic,deviation\n"));
    }
}
