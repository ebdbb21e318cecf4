//! McGehee coordinates near a pole.
//!
//! With `v = p_r/√|Θ|`, `u = p_θ/(f√|Θ|)` and the time change
//! `dτ = (√|Θ|/f) dt` the equations of motion become
//!
//! ```text
//! r' = f v
//! v' = u² f' − v²/(2fΘ) − γ/(f|Θ|)
//! θ' = u
//! u' = −u v (f' + 1/(2fΘ))
//! ```
//!
//! Every coefficient is analytic up to the pole (`fΘ = −cos(√K r)/β`), so the
//! field extends to the collision manifold `N = {r = r_N, u² + v² = 2γ}`.

use crate::dynamics::PhaseState;
use crate::error::{Error, Result};
use crate::geometry::SurfaceSpec;
use crate::ode::{locate_crossing, Control, Crossing, DenseStep, Dop853};
use crate::report;
use nalgebra::Matrix4;
use std::f64::consts::PI;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct McGeheeState {
    pub r: f64,
    pub theta: f64,
    pub v: f64,
    pub u: f64,
}

impl McGeheeState {
    pub fn new(r: f64, theta: f64, v: f64, u: f64) -> Self {
        McGeheeState { r, theta, v, u }
    }
}

/// Side of the equator a regularized computation lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `[r_N, r_eq)`, where Θ < 0.
    North,
    /// `(r_eq, r_S]`, where Θ > 0.
    South,
}

impl Chart {
    /// sgn Θ on the chart.
    pub fn sign(self) -> f64 {
        match self {
            Chart::North => -1.0,
            Chart::South => 1.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Chart::North => "north",
            Chart::South => "south",
        }
    }

    pub fn contains(self, s: &SurfaceSpec, r: f64) -> bool {
        match self {
            Chart::North => r >= s.r_north() && r < s.r_equator(),
            Chart::South => r > s.r_equator() && r <= s.r_south(),
        }
    }

    fn check(self, s: &SurfaceSpec, r: f64) -> Result<()> {
        if self.contains(s, r) {
            Ok(())
        } else {
            Err(Error::ChartDomain { r, chart: self.name() })
        }
    }
}

// |cos(√K r)| below this counts as the equator.
const EQUATOR_EPS: f64 = 1e-12;

fn equator_check(s: &SurfaceSpec, r: f64) -> Result<()> {
    if (s.sqrt_k() * r).cos().abs() <= EQUATOR_EPS {
        Err(Error::EquatorDegeneracy { r })
    } else {
        Ok(())
    }
}

pub fn to_mcgehee(s: &SurfaceSpec, x: &PhaseState) -> Result<McGeheeState> {
    let p = s.profile(x.r)?;
    equator_check(s, x.r)?;
    let root = p.theta.abs().sqrt();
    Ok(McGeheeState::new(x.r, x.theta, x.p_r / root, x.p_theta / (p.f * root)))
}

pub fn from_mcgehee(s: &SurfaceSpec, y: &McGeheeState) -> Result<PhaseState> {
    let p = s.profile(y.r)?;
    equator_check(s, y.r)?;
    let root = p.theta.abs().sqrt();
    Ok(PhaseState::new(y.r, y.theta, y.v * root, y.u * p.f * root))
}

/// `sgn(Θ)(u² + v²)/2 + γ − h/Θ`, which vanishes on the energy level `h`.
/// Well defined on N, where `h/Θ = 0`.
pub fn energy_relation_residual(s: &SurfaceSpec, chart: Chart, y: &McGeheeState, h: f64) -> f64 {
    chart.sign() * 0.5 * (y.u * y.u + y.v * y.v) + s.gamma_c() - h * s.inv_theta(y.r)
}

/// Energy of a regularized state away from the pole.
pub fn energy_of(s: &SurfaceSpec, y: &McGeheeState) -> Result<f64> {
    let p = s.profile(y.r)?;
    Ok(p.theta.abs() * 0.5 * (y.u * y.u + y.v * y.v) + p.potential)
}

/// The regularized field for `[r, v, θ, u]` without chart checks.
pub(crate) fn field4(s: &SurfaceSpec, chart: Chart, y: &[f64; 4]) -> [f64; 4] {
    let (r, v, u) = (y[0], y[1], y[3]);
    let f = s.f(r);
    let df = s.df(r);
    let q = 1.0 / s.f_theta(r);
    [
        f * v,
        u * u * df - 0.5 * v * v * q - chart.sign() * s.gamma_c() * q,
        u,
        -u * v * (df + 0.5 * q),
    ]
}

/// `dt/dτ = f/√|Θ|`, zero on N.
pub(crate) fn time_rate(s: &SurfaceSpec, r: f64) -> f64 {
    s.f(r) * s.inv_theta(r).abs().sqrt()
}

// `[r, v, θ, u, t]`: the regularized field plus the physical clock.
pub(crate) fn field5(s: &SurfaceSpec, chart: Chart, y: &[f64; 5]) -> [f64; 5] {
    let d = field4(s, chart, &[y[0], y[1], y[2], y[3]]);
    [d[0], d[1], d[2], d[3], time_rate(s, y[0])]
}

/// τ-derivative `(r', θ', v', u')` in the north-pole chart, including N.
pub fn regularized_eom(s: &SurfaceSpec, y: &McGeheeState) -> Result<McGeheeState> {
    regularized_eom_in(s, Chart::North, y)
}

pub fn regularized_eom_in(s: &SurfaceSpec, chart: Chart, y: &McGeheeState) -> Result<McGeheeState> {
    chart.check(s, y.r)?;
    let d = field4(s, chart, &[y.r, y.v, y.theta, y.u]);
    Ok(McGeheeState::new(d[0], d[2], d[1], d[3]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegSample {
    pub tau: f64,
    /// Physical time accumulated from `dt = (f/√|Θ|) dτ`.
    pub t: f64,
    pub state: McGeheeState,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegTermination {
    TauLimit,
    /// r came within the margin of the equator.
    ChartExit,
    NumericalFailure(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegTrajectory {
    pub chart: Chart,
    pub samples: Vec<RegSample>,
    pub termination: RegTermination,
}

impl RegTrajectory {
    pub fn last(&self) -> &RegSample {
        self.samples.last().expect("regularized trajectory always holds the initial sample")
    }
}

fn pack(y: &McGeheeState, t: f64) -> [f64; 5] {
    [y.r, y.v, y.theta, y.u, t]
}

fn unpack(tau: f64, y: &[f64; 5]) -> RegSample {
    RegSample {
        tau,
        t: y[4],
        state: McGeheeState::new(y[0], y[2], y[1], y[3]),
    }
}

/// Integrates the north-chart field in τ from `y0` (at `t = 0`).
pub fn integrate_regularized(s: &SurfaceSpec, y0: &McGeheeState, tau_end: f64, tol: f64) -> Result<RegTrajectory> {
    integrate_regularized_in(s, Chart::North, y0, tau_end, tol)
}

/// Integrates in τ on either chart. τ may run backwards (`tau_end < 0`).
/// Stops with [`RegTermination::ChartExit`] within `pole_margin` of the equator.
pub fn integrate_regularized_in(
    s: &SurfaceSpec,
    chart: Chart,
    y0: &McGeheeState,
    tau_end: f64,
    tol: f64,
) -> Result<RegTrajectory> {
    crate::dynamics::validate_tol(tol)?;
    chart.check(s, y0.r)?;
    if ![y0.theta, y0.v, y0.u].iter().all(|c| c.is_finite()) {
        return Err(Error::validation("state", "components must be finite"));
    }
    if !tau_end.is_finite() || tau_end == 0.0 {
        return Err(Error::validation("tau_end", "must be finite and nonzero"));
    }
    let margin = s.pole_margin();
    let edge = match chart {
        Chart::North => s.r_equator() - margin,
        Chart::South => s.r_equator() + margin,
    };
    // Positive inside the chart, away from the equator margin.
    let inside = move |r: f64| match chart {
        Chart::North => edge - r,
        Chart::South => r - edge,
    };
    // Off N the radial variable is ln of the distance to the pole, so that
    // deep near-collision passes keep relative accuracy in r.
    let pole = match chart {
        Chart::North => s.r_north(),
        Chart::South => s.r_south(),
    };
    let side = -chart.sign();
    let logarithmic = y0.r != pole;
    let to_r = move |z: f64| if logarithmic { pole + side * z.exp() } else { z };
    let z0 = if logarithmic { (side * (y0.r - pole)).ln() } else { y0.r };
    let field = move |y: &[f64; 5]| {
        let r = to_r(y[0]);
        let mut d = field5(s, chart, &[r, y[1], y[2], y[3], y[4]]);
        if logarithmic {
            d[0] /= side * (r - pole);
        }
        d
    };
    let sample = move |tau: f64, y: &[f64; 5]| unpack(tau, &[to_r(y[0]), y[1], y[2], y[3], y[4]]);
    let mut samples = vec![RegSample { tau: 0.0, t: 0.0, state: *y0 }];
    let mut exited = false;
    let res = Dop853::new(tol).solve(
        |_, y| field(y),
        0.0,
        [z0, y0.v, y0.theta, y0.u, 0.0],
        tau_end,
        |step: &DenseStep<5>| {
            if let Some(te) = locate_crossing(step, |_, y| inside(to_r(y[0])), Crossing::Falling) {
                exited = true;
                let y = step.eval(te);
                samples.push(sample(te, &y));
                return Control::StopAt(te, y);
            }
            samples.push(sample(step.t1, &step.y1));
            Control::Continue
        },
    );
    let termination = match res {
        Ok(_) if exited => RegTermination::ChartExit,
        Ok(_) => RegTermination::TauLimit,
        Err(Error::Numerical(msg)) => RegTermination::NumericalFailure(msg),
        Err(e) => return Err(e),
    };
    Ok(RegTrajectory { chart, samples, termination })
}

/// The invariant torus at the pole: a circle of radius `√(2γ)` in `(u, v)`
/// over every θ, parametrized by `u = √(2γ) cos χ`, `v = √(2γ) sin χ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionManifold {
    pub gamma_c: f64,
    pub radius: f64,
}

impl CollisionManifold {
    pub fn new(s: &SurfaceSpec) -> Self {
        CollisionManifold {
            gamma_c: s.gamma_c(),
            radius: (2.0 * s.gamma_c()).sqrt(),
        }
    }

    pub fn point(&self, theta: f64, chi: f64) -> McGeheeState {
        McGeheeState::new(0.0, theta, self.radius * chi.sin(), self.radius * chi.cos())
    }

    pub fn chi(&self, y: &McGeheeState) -> f64 {
        y.v.atan2(y.u)
    }
}

/// χ after the angle moves from `theta_start` to `theta_end` along N.
pub fn flow_on_manifold(s: &SurfaceSpec, chi0: f64, theta_start: f64, theta_end: f64) -> f64 {
    chi0 + 0.5 * s.beta() * (theta_end - theta_start)
}

/// One row of a manifold arc; χ is unwrapped along the arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldPoint {
    pub tau: f64,
    pub theta: f64,
    pub chi: f64,
    pub u: f64,
    pub v: f64,
}

/// Integrates the flow on N from `χ = −π/2 + offset` (just above S⁻) at angle
/// `theta0` until `χ = π/2 − offset`. The arc must stop short of S⁺: the
/// equilibria are unstable off the circle, so round-off would otherwise be
/// amplified without bound.
pub fn manifold_arc(s: &SurfaceSpec, theta0: f64, offset: f64, tol: f64) -> Result<Vec<ManifoldPoint>> {
    crate::dynamics::validate_tol(tol)?;
    if !(offset > 0.0 && offset < 0.5 * PI) {
        return Err(Error::validation("chi_offset", format!("{offset} outside (0, π/2)")));
    }
    let cm = CollisionManifold::new(s);
    let y0 = cm.point(theta0, -0.5 * PI + offset);
    let v_stop = cm.radius * offset.cos();
    let mut raw = vec![unpack(0.0, &pack(&y0, 0.0))];
    let mut done = false;
    Dop853::new(tol).solve(
        |_, y| field5(s, Chart::North, y),
        0.0,
        pack(&y0, 0.0),
        MANIFOLD_TAU_CAP,
        |step: &DenseStep<5>| {
            if let Some(te) = locate_crossing(step, |_, y| y[1] - v_stop, Crossing::Rising) {
                done = true;
                let y = step.eval(te);
                raw.push(unpack(te, &y));
                return Control::StopAt(te, y);
            }
            raw.push(unpack(step.t1, &step.y1));
            Control::Continue
        },
    )?;
    if !done {
        return Err(Error::Numerical(format!("manifold arc did not reach S+ within tau = {MANIFOLD_TAU_CAP}")));
    }
    let mut out: Vec<ManifoldPoint> = Vec::with_capacity(raw.len());
    let mut prev = -0.5 * PI + offset;
    for smp in &raw {
        let wrapped = cm.chi(&smp.state);
        let chi = wrapped + 2.0 * PI * ((prev - wrapped) / (2.0 * PI)).round();
        prev = chi;
        out.push(ManifoldPoint {
            tau: smp.tau,
            theta: smp.state.theta,
            chi,
            u: smp.state.u,
            v: smp.state.v,
        });
    }
    Ok(out)
}

const MANIFOLD_TAU_CAP: f64 = 1e4;

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

pub const MANIFOLD_HEADER: [&str; 5] = ["tau", "theta", "chi", "u", "v"];

pub fn write_manifold_arc<W: Write>(arc: &[ManifoldPoint], out: W) -> Result<()> {
    let mut w = report::csv_writer(out, &MANIFOLD_HEADER)?;
    for p in arc {
        report::write_row(&mut w, &[p.tau, p.theta, p.chi, p.u, p.v])?;
    }
    report::finish(w)
}

/// A circle of equilibria on N and the spectrum of the linearization there,
/// ordered as the `(r, v, θ, u)` diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumCircle {
    pub v: f64,
    pub eigenvalues: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibria {
    pub s_plus: EquilibriumCircle,
    pub s_minus: EquilibriumCircle,
}

pub fn equilibria_and_eigenvalues(s: &SurfaceSpec) -> Equilibria {
    let beta = s.beta().abs();
    let w = (2.0 * s.gamma_c()).sqrt();
    let circle = |sign: f64| EquilibriumCircle {
        v: sign * w,
        eigenvalues: [sign * beta * w, sign * beta * w, 0.0, -sign * 0.5 * beta * w],
    };
    Equilibria {
        s_plus: circle(1.0),
        s_minus: circle(-1.0),
    }
}

/// Central-difference Jacobian of the north-chart field in `(r, v, θ, u)`.
/// The stencil may poke below `r_N`; the field is analytic there.
pub fn numeric_jacobian(s: &SurfaceSpec, y: &McGeheeState, step: f64) -> Result<Matrix4<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::validation("step", "must be positive and finite"));
    }
    Chart::North.check(s, y.r)?;
    let base = [y.r, y.v, y.theta, y.u];
    let mut jac = Matrix4::zeros();
    for k in 0..4 {
        let mut plus = base;
        let mut minus = base;
        plus[k] += step;
        minus[k] -= step;
        let fp = field4(s, Chart::North, &plus);
        let fm = field4(s, Chart::North, &minus);
        for i in 0..4 {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Eigenvalues of the numeric Jacobian, sorted ascending by real part.
/// Fails if any has a non-negligible imaginary part.
pub fn numeric_spectrum(s: &SurfaceSpec, y: &McGeheeState, step: f64) -> Result<[f64; 4]> {
    let jac = numeric_jacobian(s, y, step)?;
    let ev = jac.complex_eigenvalues();
    let mut out = [0.0; 4];
    for (i, z) in ev.iter().enumerate() {
        if z.im.abs() > 1e-9 * (1.0 + z.re.abs()) {
            return Err(Error::Numerical(format!("complex eigenvalue {z} at {y:?}")));
        }
        out[i] = z.re;
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, Termination};

    fn sphere() -> SurfaceSpec {
        SurfaceSpec::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn coordinate_change_example() {
        let s = sphere();
        let y = to_mcgehee(&s, &PhaseState::new(PI / 4.0, 0.0, 1.0, 0.1)).unwrap();
        assert!((y.v - 1.0).abs() < 1e-15);
        assert!((y.u - 0.1 * 2f64.sqrt()).abs() < 1e-15);
        let z = to_mcgehee(&s, &PhaseState::new(1.0, 2.0, 0.0, 0.0)).unwrap();
        assert_eq!((z.u, z.v), (0.0, 0.0));
    }

    #[test]
    fn equator_is_degenerate() {
        let s = sphere();
        assert!(matches!(
            to_mcgehee(&s, &PhaseState::new(PI / 2.0, 0.0, 1.0, 1.0)),
            Err(Error::EquatorDegeneracy { .. })
        ));
    }

    #[test]
    fn round_trip_is_identity() {
        let s = SurfaceSpec::new(4.0, 0.25, 2.0).unwrap();
        let x = PhaseState::new(0.3, 1.0, -0.4, 0.9);
        let back = from_mcgehee(&s, &to_mcgehee(&s, &x).unwrap()).unwrap();
        for (a, b) in x.to_array().iter().zip(back.to_array()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let s = SurfaceSpec::from_beta(1.0, 0.5, 2.0).unwrap();
        let w = 2.0;
        for v in [w, -w] {
            let d = regularized_eom(&s, &McGeheeState::new(0.0, 0.7, v, 0.0)).unwrap();
            assert_eq!(d.r, 0.0);
            assert!(d.v.abs() < 1e-15 && d.theta == 0.0 && d.u == 0.0);
        }
    }

    #[test]
    fn field_on_manifold() {
        let s = SurfaceSpec::from_beta(1.0, 2.0 / 3.0, 1.0).unwrap();
        let cm = CollisionManifold::new(&s);
        let y = cm.point(0.0, 0.4);
        let d = regularized_eom(&s, &y).unwrap();
        let b = s.beta();
        assert_eq!(d.r, 0.0);
        assert!((d.theta - y.u).abs() < 1e-15);
        assert!((d.u + y.u * y.v * b / 2.0).abs() < 1e-14);
        assert!((d.v - b * y.u * y.u / 2.0).abs() < 1e-14);
    }

    #[test]
    fn chart_is_enforced() {
        let s = sphere();
        assert!(matches!(
            regularized_eom(&s, &McGeheeState::new(2.0, 0.0, 0.0, 0.0)),
            Err(Error::ChartDomain { .. })
        ));
        assert!(regularized_eom_in(&s, Chart::South, &McGeheeState::new(2.0, 0.0, 0.0, 0.0)).is_ok());
    }

    #[test]
    fn manifold_flow_formula() {
        let s = SurfaceSpec::from_beta(1.0, 0.5, 1.0).unwrap();
        assert_eq!(flow_on_manifold(&s, 0.3, 1.0, 1.0), 0.3);
        assert!((flow_on_manifold(&s, 0.0, 0.0, 4.0) - 1.0).abs() < 1e-15);
        // On the sphere a full circuit takes χ from −π/2 to π/2.
        assert!((flow_on_manifold(&sphere(), -PI / 2.0, 0.0, 2.0 * PI) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn manifold_arc_slope_and_monotone_v() {
        let s = SurfaceSpec::from_beta(1.0, 0.5, 1.0).unwrap();
        let arc = manifold_arc(&s, 0.0, 0.05, 1e-12).unwrap();
        assert!((arc.last().unwrap().chi - (PI / 2.0 - 0.05)).abs() < 1e-8);
        let th: Vec<f64> = arc.iter().map(|p| p.theta).collect();
        let ch: Vec<f64> = arc.iter().map(|p| p.chi).collect();
        assert!((fit_slope(&th, &ch).unwrap() - 0.25).abs() < 1e-8);
        assert!(arc.windows(2).all(|w| w[1].v >= w[0].v - 1e-12));
        let mut buf = Vec::new();
        write_manifold_arc(&arc, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("tau,theta,chi,u,v\n"));
    }

    #[test]
    fn sphere_spectrum() {
        let s = sphere();
        let eq = equilibria_and_eigenvalues(&s);
        let r2 = 2f64.sqrt();
        assert_eq!(eq.s_plus.eigenvalues, [r2, r2, 0.0, -r2 / 2.0]);
        let num = numeric_spectrum(&s, &McGeheeState::new(0.0, 0.0, eq.s_plus.v, 0.0), 1e-5).unwrap();
        let mut expect = eq.s_plus.eigenvalues;
        expect.sort_by(f64::total_cmp);
        for (a, b) in num.iter().zip(expect) {
            assert!((a - b).abs() < 1e-6, "{num:?}");
        }
    }

    #[test]
    fn regularized_time_matches_physical_clock() {
        let s = SurfaceSpec::from_beta(1.0, 2.0 / 3.0, 1.0).unwrap();
        let x0 = PhaseState::new(0.5, 0.2, -0.3, 0.4);
        let y0 = to_mcgehee(&s, &x0).unwrap();
        let h = crate::dynamics::hamiltonian(&s, &x0).unwrap();
        let reg = integrate_regularized(&s, &y0, 1.5, 1e-11).unwrap();
        assert_eq!(reg.termination, RegTermination::TauLimit);
        for smp in &reg.samples {
            assert!(energy_relation_residual(&s, Chart::North, &smp.state, h).abs() < 1e-8);
        }
        let end = reg.last();
        let phys = integrate(&s, &x0, end.t, 1e-11, 1e-6).unwrap();
        assert_eq!(phys.termination, Termination::TimeLimit);
        let x_end = from_mcgehee(&s, &end.state).unwrap();
        for (a, b) in x_end.to_array().iter().zip(phys.last().state.to_array()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn radial_collision_reaches_manifold_in_finite_time() {
        let s = sphere();
        let x0 = PhaseState::new(0.5, 0.0, -0.5, 0.0);
        let y0 = to_mcgehee(&s, &x0).unwrap();
        let reg = integrate_regularized(&s, &y0, 40.0, 1e-11).unwrap();
        let end = reg.last();
        assert!(end.state.r < 1e-12);
        // Physical clock saturates: the last stretch of τ adds almost no t.
        let mid = reg.samples.iter().find(|p| p.tau >= 30.0).unwrap();
        assert!(end.t - mid.t < 1e-9);
        assert!((end.state.v + 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn near_collision_transits_from_lower_to_upper_circle() {
        let s = sphere();
        let cm = CollisionManifold::new(&s);
        let mut y0 = cm.point(0.0, -PI / 2.0 + 0.3);
        y0.r = 1e-9;
        let reg = integrate_regularized(&s, &y0, 60.0, 1e-11).unwrap();
        assert!(y0.v < 0.0);
        assert!(reg.samples.iter().any(|p| p.state.v > 0.0));
    }
}
