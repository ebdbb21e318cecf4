//! Random phase-space samples for the verification suites.

use crate::dynamics::PhaseState;
use crate::error::{Error, Result};
use crate::geometry::SurfaceSpec;
use crate::invariants::conserved;
use crate::trajectory::{conic_params, turning_radii};
use rand::Rng;
use std::f64::consts::PI;

/// A generic state with `r` in the middle 80% of `(r_N, r_S)`, momenta in
/// `[-2, 2]` and `|p_θ| ≥ 0.2`.
pub fn random_state<R: Rng>(s: &SurfaceSpec, rng: &mut R) -> PhaseState {
    let r = s.r_south() * rng.gen_range(0.1..0.9);
    let p_theta = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    PhaseState::new(r, rng.gen_range(-PI..PI), rng.gen_range(-2.0..2.0), p_theta)
}

/// A nonradial state whose conic stays inside `[0.1 r_S, 0.9 r_S]`, drawn
/// by rejection.
pub fn random_bounded_state<R: Rng>(s: &SurfaceSpec, rng: &mut R) -> Result<PhaseState> {
    let (lo, hi) = (0.1 * s.r_south(), 0.9 * s.r_south());
    for _ in 0..10_000 {
        let r = s.r_south() * rng.gen_range(0.15..0.85);
        let p = s.profile(r)?;
        let speed = (s.gamma_c() * (p.theta.abs() + 1.0 / (s.amplitude() * s.beta()))).sqrt();
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let x = PhaseState::new(
            r,
            rng.gen_range(0.0..2.0 * PI),
            speed * rng.gen_range(-0.7..0.7),
            sign * p.f * speed * rng.gen_range(0.3..1.3),
        );
        let cp = conic_params(s, &conserved(s, &x)?)?;
        let (peri, apo) = turning_radii(s, &cp);
        if peri >= lo && apo <= hi {
            return Ok(x);
        }
    }
    Err(Error::Numerical("no bounded orbit found in 10000 draws".into()))
}
