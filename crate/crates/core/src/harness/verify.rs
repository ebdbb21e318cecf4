//! The `verify` mode: every invariant of the library checked on one surface.

use super::config::RunConfig;
use super::sampling::{random_bounded_state, random_state};
use crate::block::{
    classify_regularizability, default_block, extrapolate_gamma_zero, gamma_exit, gamma_limits, make_block,
    numeric_transit, south_pole_block_check, TransitOptions,
};
use crate::blowup::{equilibria_and_eigenvalues, fit_slope, manifold_arc, numeric_spectrum, McGeheeState};
use crate::dynamics::{integrate_with, IntegrateOptions, PhaseState, Termination};
use crate::error::Result;
use crate::geometry::SurfaceSpec;
use crate::invariants::{dependency_residual, drift_along_flow, integral_rank, poisson_bracket_residual, Integral, FD_STEP};
use crate::report::fmt_num;
use crate::trajectory::compare_orbit;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl SuiteResult {
    fn below(name: &'static str, value: f64, threshold: f64) -> Self {
        SuiteResult {
            name,
            value,
            threshold,
            passed: value < threshold,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} value={} threshold={}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            fmt_num(self.value),
            fmt_num(self.threshold)
        )
    }
}

/// Runs all suites; also returns the random states used for the pointwise
/// checks so the caller can write them out.
pub fn verify_suite(s: &SurfaceSpec, cfg: &RunConfig) -> Result<(Vec<SuiteResult>, Vec<PhaseState>)> {
    let v = &cfg.verify;
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
    let states: Vec<PhaseState> = (0..v.states).map(|_| random_state(s, &mut rng)).collect();
    let mut out = Vec::new();

    let mut dep: f64 = 0.0;
    let mut br = [0.0f64; 3];
    let mut min_rank = 4;
    for x in &states {
        dep = dep.max(dependency_residual(s, x)?);
        for (k, which) in [Integral::I1, Integral::I2, Integral::PTheta].into_iter().enumerate() {
            br[k] = br[k].max(poisson_bracket_residual(s, x, which, FD_STEP)?);
        }
        min_rank = min_rank.min(integral_rank(s, x, FD_STEP, 1e-8)?);
    }
    out.push(SuiteResult::below("dependency", dep, 1e-10));
    out.push(SuiteResult::below("bracket_I1", br[0], 1e-6));
    out.push(SuiteResult::below("bracket_I2", br[1], 1e-6));
    out.push(SuiteResult::below("bracket_p_theta", br[2], 1e-6));
    out.push(SuiteResult {
        name: "integral_rank",
        value: min_rank as f64,
        threshold: 3.0,
        passed: min_rank == 3,
    });
    out.push(bracket_order(s, &states)?);

    let tol = cfg.integrator.tol.value();
    let t_end = v.t_end.value();
    let (mut drift, mut shape, mut barrier) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for _ in 0..v.orbits {
        let x0 = random_bounded_state(s, &mut rng)?;
        let traj = integrate_with(s, &x0, t_end, &IntegrateOptions::new(tol))?;
        if traj.termination != Termination::TimeLimit {
            drift = f64::INFINITY;
            continue;
        }
        drift = drift.max(drift_along_flow(s, &traj)?.max());
        shape = shape.max(compare_orbit(s, &traj)?);
        let h = crate::dynamics::hamiltonian(s, &x0)?;
        for smp in &traj.samples {
            let th = s.profile(smp.state.r)?.theta;
            if th > 0.0 {
                barrier = barrier.max(s.gamma_c() * th - h);
            }
        }
    }
    out.push(SuiteResult::below("conservation", drift, 1e-8));
    out.push(SuiteResult::below("orbit_shape", shape, 1e-6));
    out.push(SuiteResult::below("south_barrier", barrier.max(0.0), 1e-8));

    let arc = manifold_arc(s, 0.0, 0.05, 1e-12)?;
    let th: Vec<f64> = arc.iter().map(|p| p.theta).collect();
    let ch: Vec<f64> = arc.iter().map(|p| p.chi).collect();
    let slope = fit_slope(&th, &ch).unwrap_or(f64::NAN);
    out.push(SuiteResult::below("manifold_slope", (slope - 0.5 * s.beta()).abs(), 1e-8));

    let eq = equilibria_and_eigenvalues(s);
    let mut spec_err: f64 = 0.0;
    for c in [eq.s_plus, eq.s_minus] {
        let num = numeric_spectrum(s, &McGeheeState::new(0.0, 0.0, c.v, 0.0), 1e-5)?;
        let mut expect = c.eigenvalues;
        expect.sort_by(f64::total_cmp);
        for (a, b) in num.iter().zip(expect) {
            spec_err = spec_err.max((a - b).abs());
        }
    }
    out.push(SuiteResult::below("equilibrium_spectrum", spec_err, 1e-6));

    let h = cfg.block.h.value();
    let bs = match &cfg.block.delta {
        Some(d) => make_block(s, h, d.value())?,
        None => default_block(s, h)?,
    };
    let opts = TransitOptions {
        tol: cfg.block.tol.value(),
        tau_cap: cfg.block.tau_cap.value(),
    };
    let um = bs.u_max(s);
    let mut map_err: f64 = 0.0;
    for i in 0..5 {
        let mag = um * (0.05 + 0.9 * i as f64 / 4.0);
        for u in [mag, -mag] {
            let theta = 0.3 * i as f64;
            let tr = numeric_transit(&bs, s, theta, u, &opts)?;
            map_err = map_err.max((tr.exit.theta - theta - gamma_exit(&bs, s, u)?).abs());
        }
    }
    out.push(SuiteResult::below("block_map", map_err, 1e-6));

    let (plus, minus) = gamma_limits(s);
    let gp = extrapolate_gamma_zero(&bs, s, 1.0, &opts)?;
    let gm = extrapolate_gamma_zero(&bs, s, -1.0, &opts)?;
    out.push(SuiteResult::below("gamma_zero_limits", (gp - plus).abs().max((gm - minus).abs()), 1e-3));

    let verdict = classify_regularizability(s, crate::geometry::DEFAULT_M_MAX)?;
    let consistent = verdict.orbifold_n.is_none_or(|n| verdict.north == Some(2 * n));
    out.push(SuiteResult {
        name: "verdict_consistency",
        value: if consistent { 0.0 } else { 1.0 },
        threshold: 1.0,
        passed: consistent,
    });

    // A south block needs h > 0 and δ > γ/h.
    let south = south_pole_block_check(s, 1.0, 2.0 * s.gamma_c(), 8, &opts)?;
    out.push(SuiteResult {
        name: "south_block_exit",
        value: (south.transits - south.exited) as f64,
        threshold: 1.0,
        passed: south.all_exit() && !south.vacuous,
    });

    Ok((out, states))
}

// Bracket residuals are pure truncation error at moderate steps, so halving
// the step should divide them by about four.
fn bracket_order(s: &SurfaceSpec, states: &[PhaseState]) -> Result<SuiteResult> {
    let (coarse, fine) = (1e-2, 5e-3);
    let mut worst = 0.0f64;
    for x in states.iter().take(20) {
        for which in [Integral::I1, Integral::I2] {
            let a = poisson_bracket_residual(s, x, which, coarse)?;
            let b = poisson_bracket_residual(s, x, which, fine)?;
            if a > 1e-9 {
                worst = worst.max(((a / b).log2() - 2.0).abs());
            }
        }
    }
    Ok(SuiteResult::below("bracket_order", worst, 0.5))
}
