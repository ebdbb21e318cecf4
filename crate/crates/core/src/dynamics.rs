//! Canonical equations of motion on the surface (unit mass) and their
//! adaptive propagation.

use crate::error::{Error, Result};
use crate::geometry::SurfaceSpec;
use crate::report;
use std::io::Write;
use crate::invariants::conserved;
use crate::ode::{locate_crossing, locate_crossing_after, Control, Crossing, DenseStep, Dop853};

/// Canonical state `(r, θ, p_r, p_θ)`. θ is kept unreduced so winding can be
/// measured; reduce modulo 2π only for display.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseState {
    pub r: f64,
    pub theta: f64,
    pub p_r: f64,
    pub p_theta: f64,
}

impl PhaseState {
    pub fn new(r: f64, theta: f64, p_r: f64, p_theta: f64) -> Self {
        PhaseState { r, theta, p_r, p_theta }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.r, self.theta, self.p_r, self.p_theta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        PhaseState::new(a[0], a[1], a[2], a[3])
    }

    /// Same configuration with both momenta reversed.
    pub fn reversed(self) -> Self {
        PhaseState::new(self.r, self.theta, -self.p_r, -self.p_theta)
    }
}

/// `H = p_r²/2 + p_θ²/(2f²) + γΘ(r)`.
pub fn hamiltonian(s: &SurfaceSpec, x: &PhaseState) -> Result<f64> {
    let p = s.profile(x.r)?;
    Ok(0.5 * x.p_r * x.p_r + 0.5 * x.p_theta * x.p_theta / (p.f * p.f) + p.potential)
}

fn field(s: &SurfaceSpec, y: &[f64; 4]) -> [f64; 4] {
    let f = s.f(y[0]);
    let df = s.df(y[0]);
    let f2 = f * f;
    let p_theta = y[3];
    [
        y[2],
        p_theta / f2,
        p_theta * p_theta * df / (f2 * f) - s.gamma_c() / f2,
        0.0,
    ]
}

/// Time derivative `(ṙ, θ̇, ṗ_r, ṗ_θ)` of the state.
pub fn eom(s: &SurfaceSpec, x: &PhaseState) -> Result<PhaseState> {
    s.profile(x.r)?;
    Ok(PhaseState::from_array(field(s, &x.to_array())))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    TimeLimit,
    /// r dropped below `r_N + collision_margin`; hand off to blow-up coordinates.
    CollisionApproach,
    NumericalFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: PhaseState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory always holds the initial sample")
    }

    pub fn is_failure(&self) -> bool {
        matches!(self.termination, Termination::NumericalFailure(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub tol: f64,
    /// Defaults to `1e-3 * r_S` when `None`.
    pub collision_margin: Option<f64>,
    /// Emit samples on a uniform grid instead of at every accepted step.
    pub sample_dt: Option<f64>,
    pub max_steps: usize,
}

impl IntegrateOptions {
    pub fn new(tol: f64) -> Self {
        IntegrateOptions {
            tol,
            collision_margin: None,
            sample_dt: None,
            max_steps: 2_000_000,
        }
    }
}

pub fn default_collision_margin(s: &SurfaceSpec) -> f64 {
    1e-3 * s.r_south()
}

pub(crate) fn validate_tol(tol: f64) -> Result<()> {
    if !(1e-14..=1e-3).contains(&tol) {
        return Err(Error::validation("tol", format!("{tol} outside [1e-14, 1e-3]")));
    }
    Ok(())
}

fn validate_state(s: &SurfaceSpec, x: &PhaseState) -> Result<()> {
    if !x.to_array().iter().all(|v| v.is_finite()) {
        return Err(Error::validation("state", "components must be finite"));
    }
    if x.r <= s.r_north() || x.r >= s.r_south() {
        return Err(Error::validation(
            "state.r",
            format!("{} outside ({}, {})", x.r, s.r_north(), s.r_south()),
        ));
    }
    Ok(())
}

fn solver(opts: &IntegrateOptions) -> Dop853 {
    let mut ode = Dop853::new(opts.tol);
    ode.max_steps = opts.max_steps;
    ode
}

/// Propagates `x0` from `t = 0` to `t_end` with default options.
pub fn integrate(
    s: &SurfaceSpec,
    x0: &PhaseState,
    t_end: f64,
    tol: f64,
    collision_margin: f64,
) -> Result<Trajectory> {
    let opts = IntegrateOptions {
        collision_margin: Some(collision_margin),
        ..IntegrateOptions::new(tol)
    };
    integrate_with(s, x0, t_end, &opts)
}

/// Propagates `x0` from `t = 0` to `t_end`. Stops early with
/// [`Termination::CollisionApproach`] near the north pole. Runtime failures of
/// the integrator are reported through [`Termination::NumericalFailure`] with
/// the samples gathered so far; invalid input is an `Err`.
pub fn integrate_with(
    s: &SurfaceSpec,
    x0: &PhaseState,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    validate_tol(opts.tol)?;
    validate_state(s, x0)?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::validation("t_end", "must be positive and finite"));
    }
    let margin = opts.collision_margin.unwrap_or_else(|| default_collision_margin(s));
    if !(margin > 0.0 && margin < s.r_equator()) {
        return Err(Error::validation("collision_margin", format!("{margin} not in (0, r_equator)")));
    }
    if let Some(dt) = opts.sample_dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::validation("sample_dt", "must be positive"));
        }
    }
    let r_stop = s.r_north() + margin;
    let mut samples = vec![Sample { t: 0.0, state: *x0 }];
    if x0.r <= r_stop {
        return Ok(Trajectory {
            samples,
            termination: Termination::CollisionApproach,
        });
    }

    let mut next_grid = 1usize;
    let mut collided = false;
    let result = solver(opts).solve(
        |_, y| field(s, y),
        0.0,
        x0.to_array(),
        t_end,
        |step: &DenseStep<4>| {
            let hit = locate_crossing(step, |_, y| y[0] - r_stop, Crossing::Falling);
            let upper = hit.unwrap_or(step.t1);
            match opts.sample_dt {
                Some(dt) => loop {
                    let tg = next_grid as f64 * dt;
                    if tg > upper || tg > t_end {
                        break;
                    }
                    let y = if tg == step.t1 { step.y1 } else { step.eval(tg) };
                    samples.push(Sample { t: tg, state: PhaseState::from_array(y) });
                    next_grid += 1;
                },
                None => {
                    if hit.is_none() {
                        samples.push(Sample { t: step.t1, state: PhaseState::from_array(step.y1) });
                    }
                }
            }
            if let Some(te) = hit {
                collided = true;
                let y = step.eval(te);
                if samples.last().is_none_or(|last| te > last.t) {
                    samples.push(Sample { t: te, state: PhaseState::from_array(y) });
                }
                return Control::StopAt(te, y);
            }
            Control::Continue
        },
    );
    let termination = match result {
        Ok(out) => {
            if collided {
                Termination::CollisionApproach
            } else {
                if samples.last().is_none_or(|last| out.t > last.t) {
                    samples.push(Sample { t: out.t, state: PhaseState::from_array(out.y) });
                }
                Termination::TimeLimit
            }
        }
        Err(Error::Numerical(msg)) => Termination::NumericalFailure(msg),
        Err(e) => return Err(e),
    };
    Ok(Trajectory { samples, termination })
}

/// Integrates from `x0` at `t = 0` and returns the crossings of `g` (up to
/// `limit` of them) before `t_end`. Propagation stops at the `limit`-th hit.
pub fn find_events<G>(
    s: &SurfaceSpec,
    x0: &PhaseState,
    t_end: f64,
    tol: f64,
    g: G,
    crossing: Crossing,
    limit: usize,
) -> Result<Vec<Sample>>
where
    G: Fn(f64, &PhaseState) -> f64,
{
    validate_tol(tol)?;
    validate_state(s, x0)?;
    let r_stop = s.r_north() + default_collision_margin(s);
    let mut hits = Vec::new();
    if limit == 0 {
        return Ok(hits);
    }
    Dop853::new(tol).solve(
        |_, y| field(s, y),
        0.0,
        x0.to_array(),
        t_end,
        |step: &DenseStep<4>| {
            // Resume the search just past each hit so several events in one
            // step are all reported.
            let mut from = step.t0;
            while let Some(te) =
                locate_crossing_after(step, from, |t, y| g(t, &PhaseState::from_array(*y)), crossing)
            {
                let y = step.eval(te);
                hits.push(Sample { t: te, state: PhaseState::from_array(y) });
                if hits.len() >= limit {
                    return Control::StopAt(te, y);
                }
                from = te + (step.t1 - step.t0) * 1e-9;
                if from >= step.t1 {
                    break;
                }
            }
            if step.y1[0] < r_stop {
                return Control::StopAt(step.t1, step.y1);
            }
            Control::Continue
        },
    )?;
    Ok(hits)
}

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "r", "theta", "p_r", "p_theta", "H", "I1", "I2"];

pub fn write_trajectory<W: Write>(s: &SurfaceSpec, traj: &Trajectory, out: W) -> Result<()> {
    let mut w = report::csv_writer(out, &TRAJECTORY_HEADER)?;
    for smp in &traj.samples {
        let x = smp.state;
        let c = conserved(s, &x)?;
        report::write_row(&mut w, &[smp.t, x.r, x.theta, x.p_r, x.p_theta, c.h, c.i1, c.i2])?;
    }
    report::finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sphere() -> SurfaceSpec {
        SurfaceSpec::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let s = sphere();
        let h = hamiltonian(&s, &PhaseState::new(PI / 2.0, 0.0, 0.0, 1.0)).unwrap();
        assert!((h - 0.5).abs() < 1e-15);
        let h0 = hamiltonian(&s, &PhaseState::new(PI / 2.0, 3.7, 0.0, 0.0)).unwrap();
        assert!(h0.abs() < 1e-15);
        let half = SurfaceSpec::new(1.0, 0.5, 1.0).unwrap();
        let h1 = hamiltonian(&half, &PhaseState::new(PI / 2.0, 0.0, 1.0, 0.0)).unwrap();
        assert!((h1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eom_examples() {
        let s = sphere();
        let d = eom(&s, &PhaseState::new(PI / 2.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(d.r.abs() < 1e-15);
        assert!((d.theta - 1.0).abs() < 1e-15);
        assert!((d.p_r + 1.0).abs() < 1e-15);
        assert_eq!(d.p_theta, 0.0);

        let d2 = eom(&s, &PhaseState::new(PI / 4.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((d2.p_r + 2.0).abs() < 1e-13);
        assert!(eom(&s, &PhaseState::new(0.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn bounded_sphere_orbit_conserves_energy() {
        let s = sphere();
        let x0 = PhaseState::new(PI / 2.0, 0.0, 0.0, 1.0);
        let traj = integrate(&s, &x0, 10.0, 1e-10, default_collision_margin(&s)).unwrap();
        assert_eq!(traj.termination, Termination::TimeLimit);
        let h0 = hamiltonian(&s, &x0).unwrap();
        for smp in &traj.samples {
            assert!((hamiltonian(&s, &smp.state).unwrap() - h0).abs() < 1e-8);
        }
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(traj.last().t, 10.0);
    }

    #[test]
    fn radial_infall_reaches_collision_approach() {
        let s = SurfaceSpec::new(1.0, 0.5, 1.0).unwrap();
        let x0 = PhaseState::new(1.0, 0.3, -0.2, 0.0);
        let traj = integrate(&s, &x0, 50.0, 1e-10, default_collision_margin(&s)).unwrap();
        assert_eq!(traj.termination, Termination::CollisionApproach);
        let last = traj.last();
        assert!((last.state.r - default_collision_margin(&s)).abs() < 1e-9);
        assert!(last.t < 50.0);
    }

    #[test]
    fn uniform_sampling_grid() {
        let s = sphere();
        let x0 = PhaseState::new(PI / 2.0, 0.0, 0.0, 1.0);
        let opts = IntegrateOptions {
            sample_dt: Some(0.25),
            ..IntegrateOptions::new(1e-10)
        };
        let traj = integrate_with(&s, &x0, 2.0, &opts).unwrap();
        let ts: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
        assert_eq!(ts, (0..=8).map(|i| i as f64 * 0.25).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = sphere();
        let x0 = PhaseState::new(1.0, 0.0, 0.0, 1.0);
        assert!(integrate(&s, &x0, 1.0, 1e-2, 1e-3).is_err());
        assert!(integrate(&s, &x0, -1.0, 1e-10, 1e-3).is_err());
        assert!(integrate(&s, &PhaseState::new(4.0, 0.0, 0.0, 0.0), 1.0, 1e-10, 1e-3).is_err());
    }

    #[test]
    fn finds_every_pericentre() {
        let s = sphere();
        let x0 = PhaseState::new(1.2, 0.0, 0.0, 0.8);
        let hits = find_events(&s, &x0, 30.0, 1e-10, |_, x| x.p_r, Crossing::Either, usize::MAX).unwrap();
        assert!(hits.len() >= 4);
        for h in &hits {
            assert!(h.state.p_r.abs() < 1e-9);
        }
        assert!(hits.windows(2).all(|w| w[1].t > w[0].t));
    }
}
