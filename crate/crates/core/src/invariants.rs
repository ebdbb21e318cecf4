//! First integrals of the Kepler-type flow: energy, angular momentum and the
//! two components of the generalized Runge–Lenz vector.

use crate::dynamics::{hamiltonian, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::SurfaceSpec;
use crate::report;
use nalgebra::SMatrix;
use std::io::Write;

/// Default relative finite-difference step for brackets and gradients.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSet {
    pub h: f64,
    pub p_theta: f64,
    pub i1: f64,
    pub i2: f64,
}

impl ConservedSet {
    /// Magnitude `I = √(I₁² + I₂²)`.
    pub fn magnitude(&self) -> f64 {
        self.i1.hypot(self.i2)
    }
}

/// Quantities whose Poisson bracket with H can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integral {
    H,
    PTheta,
    I1,
    I2,
}

impl Integral {
    pub fn eval(self, s: &SurfaceSpec, x: &PhaseState) -> Result<f64> {
        let c = conserved(s, x)?;
        Ok(match self {
            Integral::H => c.h,
            Integral::PTheta => c.p_theta,
            Integral::I1 => c.i1,
            Integral::I2 => c.i2,
        })
    }
}

pub fn conserved(s: &SurfaceSpec, x: &PhaseState) -> Result<ConservedSet> {
    let p = s.profile(x.r)?;
    let h = hamiltonian(s, x)?;
    let beta = s.beta();
    let g = s.gamma_c();
    let (sn, cs) = (beta * x.theta).sin_cos();
    let pp = x.p_r * x.p_theta;
    let q = beta * p.theta * x.p_theta * x.p_theta;
    Ok(ConservedSet {
        h,
        p_theta: x.p_theta,
        i1: sn * pp - cs * q - g / beta * cs,
        i2: -cs * pp - sn * q - g / beta * sn,
    })
}

/// Right-hand side of `I₁² + I₂² = 2p_θ²H − K p_θ⁴/β² + γ²/β²`.
pub fn dependency_rhs(s: &SurfaceSpec, c: &ConservedSet) -> f64 {
    let b2 = s.beta() * s.beta();
    let p2 = c.p_theta * c.p_theta;
    let g = s.gamma_c();
    2.0 * p2 * c.h - s.curvature() * p2 * p2 / b2 + g * g / b2
}

/// `|I₁² + I₂² − RHS|`; zero up to round-off for every state.
pub fn dependency_residual(s: &SurfaceSpec, x: &PhaseState) -> Result<f64> {
    let c = conserved(s, x)?;
    Ok((c.i1 * c.i1 + c.i2 * c.i2 - dependency_rhs(s, &c)).abs())
}

/// `rel_step · max(1, |x|)` per coordinate, with `r` measured from the
/// nearest pole rather than from `r_N`.
fn fd_steps(s: &SurfaceSpec, x: &PhaseState, rel_step: f64) -> [f64; 4] {
    let mut mag = x.to_array().map(f64::abs);
    mag[0] = (x.r - s.r_north()).min(s.r_south() - x.r).abs();
    mag.map(|m| rel_step * m.max(1.0))
}

/// Central-difference gradient of `which` in `(r, θ, p_r, p_θ)`.
pub fn gradient(s: &SurfaceSpec, x: &PhaseState, which: Integral, rel_step: f64) -> Result<[f64; 4]> {
    if !(rel_step > 0.0 && rel_step.is_finite()) {
        return Err(Error::validation("step", "must be positive and finite"));
    }
    let steps = fd_steps(s, x, rel_step);
    let base = x.to_array();
    let mut grad = [0.0; 4];
    for k in 0..4 {
        let h = steps[k];
        let mut plus = base;
        let mut minus = base;
        plus[k] += h;
        minus[k] -= h;
        if plus[k] == base[k] || minus[k] == base[k] {
            return Err(Error::Numerical(format!("finite-difference step {h} underflows at {:?}", base)));
        }
        let fp = which.eval(s, &PhaseState::from_array(plus))?;
        let fm = which.eval(s, &PhaseState::from_array(minus))?;
        grad[k] = (fp - fm) / (plus[k] - minus[k]);
    }
    Ok(grad)
}

/// `|{F, H}|` from central-difference gradients with relative step `rel_step`.
pub fn poisson_bracket_residual(
    s: &SurfaceSpec,
    x: &PhaseState,
    which: Integral,
    rel_step: f64,
) -> Result<f64> {
    let df = gradient(s, x, which, rel_step)?;
    let dh = gradient(s, x, Integral::H, rel_step)?;
    // Coordinates (r, θ) pair with momenta (p_r, p_θ).
    let bracket = df[0] * dh[2] - df[2] * dh[0] + df[1] * dh[3] - df[3] * dh[1];
    Ok(bracket.abs())
}

/// Numerical rank of the 3×4 gradient matrix of `(H, p_θ, I₁)`.
pub fn integral_rank(s: &SurfaceSpec, x: &PhaseState, rel_step: f64, rel_tol: f64) -> Result<usize> {
    let rows = [
        gradient(s, x, Integral::H, rel_step)?,
        gradient(s, x, Integral::PTheta, rel_step)?,
        gradient(s, x, Integral::I1, rel_step)?,
    ];
    let m = SMatrix::<f64, 3, 4>::from_fn(|i, j| rows[i][j]);
    let sv = m.singular_values();
    let max = sv.max();
    Ok(sv.iter().filter(|&&v| v > rel_tol * max).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Drift {
    pub h: f64,
    pub p_theta: f64,
    pub i1: f64,
    pub i2: f64,
}

impl Drift {
    pub fn max(&self) -> f64 {
        self.h.max(self.p_theta).max(self.i1).max(self.i2)
    }
}

/// Largest absolute deviation of each integral from its initial value.
pub fn drift_along_flow(s: &SurfaceSpec, traj: &Trajectory) -> Result<Drift> {
    if traj.samples.len() < 2 {
        return Err(Error::validation("trajectory", "needs at least two samples"));
    }
    let c0 = conserved(s, &traj.samples[0].state)?;
    let mut d = Drift::default();
    for smp in &traj.samples[1..] {
        let c = conserved(s, &smp.state)?;
        d.h = d.h.max((c.h - c0.h).abs());
        d.p_theta = d.p_theta.max((c.p_theta - c0.p_theta).abs());
        d.i1 = d.i1.max((c.i1 - c0.i1).abs());
        d.i2 = d.i2.max((c.i2 - c0.i2).abs());
    }
    Ok(d)
}

pub const REPORT_HEADER: [&str; 7] = ["r", "theta", "p_r", "p_theta", "bracket_I1", "bracket_I2", "dependency"];

/// One row per state: the state followed by `|{I₁,H}|`, `|{I₂,H}|` and the
/// dependency residual.
pub fn write_report<W: Write>(s: &SurfaceSpec, states: &[PhaseState], out: W) -> Result<()> {
    let mut w = report::csv_writer(out, &REPORT_HEADER)?;
    for x in states {
        report::write_row(
            &mut w,
            &[
                x.r,
                x.theta,
                x.p_r,
                x.p_theta,
                poisson_bracket_residual(s, x, Integral::I1, FD_STEP)?,
                poisson_bracket_residual(s, x, Integral::I2, FD_STEP)?,
                dependency_residual(s, x)?,
            ],
        )?;
    }
    report::finish(w)
}
