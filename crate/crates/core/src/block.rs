//! Isolating blocks `B(h, δ) = {1/|Θ| ≤ δ}` around the poles, the map across
//! a block and the regularizability verdicts that follow from it.
//!
//! An orbit entering the north block at angle θ with transverse velocity u
//! leaves at `θ + Γ(u)`. As `u → 0±` the shift tends to `±2π/|β|`; the map
//! extends continuously across the collision orbits exactly when these two
//! limits agree on the circle, i.e. when `β = 2/m`.

use crate::blowup::{field4, time_rate, Chart, McGeheeState};
use crate::error::{Error, Result};
use crate::geometry::{match_ratio, SurfaceSpec, RATIONALITY_TOL};
use crate::ode::{locate_crossing, Control, Crossing, DenseStep, Dop853};
use crate::report;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

/// Bisection tolerance for the boundary radius.
pub const RADIUS_TOL: f64 = 1e-13;
const MAX_HALVINGS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpec {
    pub h: f64,
    pub delta: f64,
    /// Boundary radius, where `1/|Θ(r_δ)| = δ`.
    pub r_delta: f64,
    /// `|Θ| f` at `r_δ`.
    pub k1: f64,
    /// `β Θ |Θ| f²` at `r_δ`.
    pub k2: f64,
    /// `(hδ + γ) f'(r_δ)² − γβ²/2`; positive for an isolating block.
    pub convexity_margin: f64,
}

impl BlockSpec {
    /// `u² + v²` on the boundary, `2γ + 2hδ`.
    pub fn boundary_radius_sq(&self, s: &SurfaceSpec) -> f64 {
        2.0 * s.gamma_c() + 2.0 * self.h * self.delta
    }

    pub fn u_max(&self, s: &SurfaceSpec) -> f64 {
        self.boundary_radius_sq(s).sqrt()
    }

    /// Entry point on b⁺ (v < 0) for the given `(θ, u)`.
    pub fn entry_state(&self, s: &SurfaceSpec, theta: f64, u: f64) -> Result<McGeheeState> {
        let v = -self.boundary_v(s, u)?;
        Ok(McGeheeState::new(self.r_delta, theta, v, u))
    }

    fn boundary_v(&self, s: &SurfaceSpec, u: f64) -> Result<f64> {
        let bound = self.boundary_radius_sq(s);
        // A few ulps of slack so that u = u_max itself is accepted.
        if !(u.is_finite() && u * u <= bound * (1.0 + 4.0 * f64::EPSILON)) {
            return Err(Error::ZetaDomain { u, bound });
        }
        Ok((bound - u * u).max(0.0).sqrt())
    }
}

/// Block value `1/|Θ|` on the north chart, `Lβ tan(√K r)`.
pub fn block_value(s: &SurfaceSpec, r: f64) -> f64 {
    s.inv_theta(r).abs()
}

/// Solves `1/|Θ(r)| = δ` on the north chart by bisection.
pub fn boundary_radius(s: &SurfaceSpec, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::validation("delta", "must be positive and finite"));
    }
    let (mut lo, mut hi) = (s.r_north(), s.r_equator());
    while hi - lo > RADIUS_TOL {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if block_value(s, mid) < delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(hδ + γ) f'(r_δ)² − γβ²/2`.
pub fn convexity_margin(s: &SurfaceSpec, h: f64, delta: f64, r_delta: f64) -> f64 {
    let df = s.df(r_delta);
    (h * delta + s.gamma_c()) * df * df - 0.5 * s.gamma_c() * s.beta() * s.beta()
}

fn check_energy(h: f64) -> Result<()> {
    if h.is_finite() {
        Ok(())
    } else {
        Err(Error::validation("h", "must be finite"))
    }
}

pub fn make_block(s: &SurfaceSpec, h: f64, delta: f64) -> Result<BlockSpec> {
    check_energy(h)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::validation("delta", format!("{delta} must be positive and finite")));
    }
    if h != 0.0 && delta >= s.gamma_c() / h.abs() {
        return Err(Error::validation(
            "delta",
            format!("{delta} must be below gamma_c/|h| = {}", s.gamma_c() / h.abs()),
        ));
    }
    let r_delta = boundary_radius(s, delta)?;
    let margin = convexity_margin(s, h, delta, r_delta);
    if margin <= 0.0 {
        return Err(Error::BlockTooLarge { delta, margin });
    }
    let f = s.f(r_delta);
    let th = s.theta(r_delta);
    Ok(BlockSpec {
        h,
        delta,
        r_delta,
        k1: th.abs() * f,
        k2: s.beta() * th * th.abs() * f * f,
        convexity_margin: margin,
    })
}

/// Starts at `0.5 γ/|h|` (or `0.5 Lβ` when `h = 0`) and halves until the
/// block is convex.
pub fn default_delta(s: &SurfaceSpec, h: f64) -> Result<f64> {
    check_energy(h)?;
    let mut delta = if h == 0.0 {
        0.5 * s.amplitude() * s.beta()
    } else {
        0.5 * s.gamma_c() / h.abs()
    };
    for _ in 0..MAX_HALVINGS {
        let r = boundary_radius(s, delta)?;
        if convexity_margin(s, h, delta, r) > 0.0 {
            return Ok(delta);
        }
        delta *= 0.5;
    }
    Err(Error::Numerical(format!("no convex block found for h = {h}")))
}

pub fn default_block(s: &SurfaceSpec, h: f64) -> Result<BlockSpec> {
    make_block(s, h, default_delta(s, h)?)
}

/// Angle ζ(u) with `θ₀ = θ − ζ − π/(2β)` (mod `2π/β`) for the entry point on
/// b⁺, where θ₀ is the pericentre direction of the orbit.
///
/// `cos βζ ∝ k₁uv` and `sin βζ ∝ k₂u² + γ/β`. The second factor changes sign
/// for large |u| on small blocks, so the branch is taken from both rather
/// than from the arc-cosine alone: βζ lies in `(π/2, 3π/2)` for u > 0 and in
/// `(−π/2, π/2)` for u < 0.
pub fn zeta(bs: &BlockSpec, s: &SurfaceSpec, u: f64) -> Result<f64> {
    let v = -bs.boundary_v(s, u)?;
    let beta = s.beta();
    let c = bs.k1 * u * v;
    let sn = bs.k2 * u * u + s.gamma_c() / beta;
    let mut angle = sn.atan2(c);
    if u > 0.0 && angle < 0.0 {
        angle += 2.0 * PI;
    }
    Ok(angle / beta)
}

/// θ-shift across the block, `θ_out − θ_in`.
pub fn gamma_exit(bs: &BlockSpec, s: &SurfaceSpec, u: f64) -> Result<f64> {
    if u == 0.0 {
        return Err(Error::AsymptoticSet);
    }
    gamma_branch(bs, s, u, u > 0.0)
}

fn gamma_branch(bs: &BlockSpec, s: &SurfaceSpec, u: f64, upper: bool) -> Result<f64> {
    let beta = s.beta();
    let z = zeta(bs, s, u)?;
    Ok(if upper {
        3.0 * PI / beta - 2.0 * z
    } else {
        -2.0 * z - PI / beta
    })
}

/// One-sided limits `(Γ(0+), Γ(0−)) = (2π/|β|, −2π/|β|)`.
pub fn gamma_limits(s: &SurfaceSpec) -> (f64, f64) {
    let g = 2.0 * PI / s.beta().abs();
    (g, -g)
}

/// The closure of Γ onto `u = 0` through the `u ≤ 0` branch.
pub fn extended_gamma(bs: &BlockSpec, s: &SurfaceSpec, u: f64) -> Result<f64> {
    gamma_branch(bs, s, u, u > 0.0)
}

/// Distance of `(Γ(0+) − Γ(0−))/2π` from the nearest integer; zero exactly
/// when the extended map is continuous on the circle.
pub fn extension_gap(s: &SurfaceSpec) -> f64 {
    let (plus, minus) = gamma_limits(s);
    let turns = (plus - minus) / (2.0 * PI);
    (turns - turns.round()).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockExit {
    pub theta: f64,
    pub u: f64,
    pub v: f64,
}

/// Analytic map from b⁺ to b⁻: `(θ, u) ↦ (θ + Γ(u), u, +√(2γ + 2hδ − u²))`.
pub fn map_across_block(bs: &BlockSpec, s: &SurfaceSpec, theta: f64, u: f64) -> Result<BlockExit> {
    let g = gamma_exit(bs, s, u)?;
    Ok(BlockExit {
        theta: theta + g,
        u,
        v: bs.boundary_v(s, u)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitOptions {
    pub tol: f64,
    pub tau_cap: f64,
}

impl Default for TransitOptions {
    fn default() -> Self {
        TransitOptions { tol: 1e-12, tau_cap: 1e3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transit {
    pub exit: McGeheeState,
    pub tau: f64,
    /// Physical time spent inside the block.
    pub t: f64,
}

// Transit state `[ln r, v, θ, u, t]`. Near-collision passes push r many
// orders of magnitude down, where an absolute tolerance on r itself would
// lose all relative accuracy.
fn log_field(s: &SurfaceSpec, chart: Chart, y: &[f64; 5]) -> [f64; 5] {
    let r = y[0].exp();
    let d = field4(s, chart, &[r, y[1], y[2], y[3]]);
    [d[0] / r, d[1], d[2], d[3], time_rate(s, r)]
}

/// Integrates from `y0` on a block boundary at `r_b` until the orbit crosses
/// the boundary again. `outward` is the sign of `r − r_b` on leaving.
fn transit_from(
    s: &SurfaceSpec,
    chart: Chart,
    y0: &McGeheeState,
    r_b: f64,
    outward: f64,
    forward: bool,
    opts: &TransitOptions,
) -> Result<Transit> {
    crate::dynamics::validate_tol(opts.tol)?;
    if !(opts.tau_cap > 0.0 && opts.tau_cap.is_finite()) {
        return Err(Error::validation("tau_cap", "must be positive and finite"));
    }
    let ln_rb = r_b.ln();
    let start = [y0.r.ln(), y0.v, y0.theta, y0.u, 0.0];
    let tau_end = if forward { opts.tau_cap } else { -opts.tau_cap };
    let mut hit: Option<(f64, [f64; 5])> = None;
    Dop853::new(opts.tol).solve(
        |_, y| log_field(s, chart, y),
        0.0,
        start,
        tau_end,
        |step: &DenseStep<5>| {
            if let Some(te) = locate_crossing(step, |_, y| outward * (y[0] - ln_rb), Crossing::Rising) {
                let y = step.eval(te);
                hit = Some((te, y));
                return Control::StopAt(te, y);
            }
            Control::Continue
        },
    )?;
    let (tau, y) = hit.ok_or(Error::TransitTimeout { tau_cap: opts.tau_cap })?;
    Ok(Transit {
        exit: McGeheeState::new(y[0].exp(), y[2], y[1], y[3]),
        tau,
        t: y[4],
    })
}

/// Integrates the regularized flow from the b⁺ point `(θ, u)` to its exit on b⁻.
pub fn numeric_transit(bs: &BlockSpec, s: &SurfaceSpec, theta: f64, u: f64, opts: &TransitOptions) -> Result<Transit> {
    if u == 0.0 {
        return Err(Error::AsymptoticSet);
    }
    let y0 = bs.entry_state(s, theta, u)?;
    transit_from(s, Chart::North, &y0, bs.r_delta, 1.0, true, opts)
}

/// Integrates backwards in τ from an exit point on b⁻ to its entry on b⁺.
pub fn reverse_transit(bs: &BlockSpec, s: &SurfaceSpec, exit: &McGeheeState, opts: &TransitOptions) -> Result<Transit> {
    if !(exit.v > 0.0) {
        return Err(Error::validation("exit.v", "exit points have v > 0"));
    }
    transit_from(s, Chart::North, exit, bs.r_delta, 1.0, false, opts)
}

/// Numeric estimate of `Γ(0±)`: transits at `|u| = 10⁻¹ … 10⁻⁴` and one
/// Richardson step on the last two (Γ is linear in |u| near the asymptotic set).
pub fn extrapolate_gamma_zero(bs: &BlockSpec, s: &SurfaceSpec, sign: f64, opts: &TransitOptions) -> Result<f64> {
    let us = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut shifts = [0.0; 4];
    for (k, &mag) in us.iter().enumerate() {
        let u = sign.signum() * mag;
        let tr = numeric_transit(bs, s, 0.0, u, opts)?;
        shifts[k] = tr.exit.theta;
    }
    Ok((10.0 * shifts[3] - shifts[2]) / 9.0)
}

/// Second τ-derivative of the block value along the orbit through the
/// tangency point `(θ, ±u_max, v = 0)`, from a central difference over the
/// integrated flow. Positive for a convex boundary.
pub fn tangency_curvature(bs: &BlockSpec, s: &SurfaceSpec, theta: f64, sign: f64, step: f64) -> Result<f64> {
    let u = sign.signum() * bs.u_max(s);
    let y0 = [bs.r_delta, 0.0, theta, u];
    let ode = Dop853::new(1e-13);
    let mut ends = [0.0; 2];
    for (k, dir) in [1.0, -1.0].into_iter().enumerate() {
        let out = ode.solve(|_, y| field4(s, Chart::North, y), 0.0, y0, dir * step, |_| Control::Continue)?;
        ends[k] = block_value(s, out.y[0]);
    }
    Ok((ends[0] - 2.0 * bs.delta + ends[1]) / (step * step))
}

pub const BLOCK_MAP_HEADER: [&str; 5] = ["u", "gamma_analytic", "gamma_numeric", "deviation", "tau"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMapRow {
    pub u: f64,
    pub gamma_analytic: f64,
    pub gamma_numeric: f64,
    pub tau: f64,
}

impl BlockMapRow {
    pub fn deviation(&self) -> f64 {
        (self.gamma_analytic - self.gamma_numeric).abs()
    }
}

pub fn block_map_row(bs: &BlockSpec, s: &SurfaceSpec, theta: f64, u: f64, opts: &TransitOptions) -> Result<BlockMapRow> {
    let analytic = gamma_exit(bs, s, u)?;
    let tr = numeric_transit(bs, s, theta, u, opts)?;
    Ok(BlockMapRow {
        u,
        gamma_analytic: analytic,
        gamma_numeric: tr.exit.theta - theta,
        tau: tr.tau,
    })
}

pub fn write_block_map<W: Write>(rows: &[BlockMapRow], out: W) -> Result<()> {
    let mut w = report::csv_writer(out, &BLOCK_MAP_HEADER)?;
    for r in rows {
        report::write_row(&mut w, &[r.u, r.gamma_analytic, r.gamma_numeric, r.deviation(), r.tau])?;
    }
    report::finish(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizabilityVerdict {
    pub beta: f64,
    /// `Some(m)` when the north pole is block regularizable with `|β| = 2/m`.
    pub north: Option<u32>,
    /// `Some(n)` when the surface is an orbifold with `|β| = 1/n`; then `north = Some(2n)`.
    pub orbifold_n: Option<u32>,
}

impl RegularizabilityVerdict {
    /// The south pole is never reached, so its block is always regularizable.
    pub fn south_regularizable(&self) -> bool {
        true
    }
}

impl fmt::Display for RegularizabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: Option<u32>| x.map_or_else(|| "none".to_string(), |m| m.to_string());
        write!(
            f,
            "beta={} north={} south=regularizable orbifold={}",
            report::fmt_num(self.beta),
            opt(self.north),
            opt(self.orbifold_n)
        )
    }
}

/// North verdict from `|β| = 2/m` with `m ≤ m_max`; the orbifold index is
/// only reported when the matching `m = 2n` is also within range.
pub fn classify_regularizability(s: &SurfaceSpec, m_max: u32) -> Result<RegularizabilityVerdict> {
    if m_max == 0 {
        return Err(Error::validation("m_max", "must be at least 1"));
    }
    let beta = s.beta().abs();
    let north = match_ratio(2.0, beta, m_max, RATIONALITY_TOL);
    let orbifold_n = s
        .classify_orbifold(m_max / 2)
        .filter(|&n| north == Some(2 * n));
    Ok(RegularizabilityVerdict {
        beta: s.beta(),
        north,
        orbifold_n,
    })
}

/// Radius beyond which no state of energy `h` can go: `γΘ(r*) = h`.
pub fn barrier_radius(s: &SurfaceSpec, h: f64) -> f64 {
    (0.5 * PI + (s.amplitude() * s.beta() * h / s.gamma_c()).atan()) / s.sqrt_k()
}

/// South block boundary, where `1/Θ(r) = δ` with Θ > 0.
pub fn south_boundary_radius(s: &SurfaceSpec, delta: f64) -> f64 {
    s.r_south() - (delta / (s.amplitude() * s.beta())).atan() / s.sqrt_k()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SouthReport {
    pub h: f64,
    pub delta: f64,
    /// No state of energy `h` reaches the south hemisphere at all.
    pub vacuous: bool,
    pub transits: usize,
    pub exited: usize,
    pub max_tau: f64,
    /// Largest `|u_out − u_in|` and `|v_out + v_in|` over the sample.
    pub max_u_mismatch: f64,
    pub max_v_mismatch: f64,
    /// Largest radius reached inside the block, against `barrier_radius`.
    pub max_r: f64,
    pub barrier_r: f64,
}

impl SouthReport {
    pub fn all_exit(&self) -> bool {
        self.exited == self.transits
    }
}

/// Samples `samples` entry points on the south block boundary and checks
/// that each orbit leaves again in finite τ. The block is non-empty only
/// for `h > 0` and `δ > γ/h`; otherwise the report is vacuous.
pub fn south_pole_block_check(
    s: &SurfaceSpec,
    h: f64,
    delta: f64,
    samples: usize,
    opts: &TransitOptions,
) -> Result<SouthReport> {
    check_energy(h)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::validation("delta", "must be positive and finite"));
    }
    let barrier_r = barrier_radius(s, h);
    let mut report = SouthReport {
        h,
        delta,
        vacuous: true,
        transits: 0,
        exited: 0,
        max_tau: 0.0,
        max_u_mismatch: 0.0,
        max_v_mismatch: 0.0,
        max_r: 0.0,
        barrier_r,
    };
    let radius_sq = 2.0 * (h * delta - s.gamma_c());
    if h <= 0.0 || radius_sq <= 0.0 {
        return Ok(report);
    }
    report.vacuous = false;
    let r_b = south_boundary_radius(s, delta);
    let u_max = radius_sq.sqrt();
    for k in 0..samples {
        // Interior of (−u_max, u_max), skipping the tangency endpoints.
        let u = u_max * (-0.95 + 1.9 * (k as f64 + 0.5) / samples as f64);
        let v_in = (radius_sq - u * u).sqrt();
        let y0 = McGeheeState::new(r_b, 0.0, v_in, u);
        report.transits += 1;
        let tr = match transit_from(s, Chart::South, &y0, r_b, -1.0, true, opts) {
            Ok(tr) => tr,
            Err(Error::TransitTimeout { .. }) => continue,
            Err(e) => return Err(e),
        };
        report.exited += 1;
        report.max_tau = report.max_tau.max(tr.tau);
        report.max_u_mismatch = report.max_u_mismatch.max((tr.exit.u - u).abs());
        report.max_v_mismatch = report.max_v_mismatch.max((tr.exit.v + v_in).abs());
        report.max_r = report.max_r.max(deepest_radius(s, &y0, &tr, opts)?);
    }
    Ok(report)
}

// Largest r along a south transit; r peaks where v changes sign.
fn deepest_radius(s: &SurfaceSpec, y0: &McGeheeState, tr: &Transit, opts: &TransitOptions) -> Result<f64> {
    let mut best = y0.r;
    Dop853::new(opts.tol).solve(
        |_, y| field4(s, Chart::South, y),
        0.0,
        [y0.r, y0.v, y0.theta, y0.u],
        tr.tau,
        |step: &DenseStep<4>| {
            best = best.max(step.y1[0]);
            if let Some(tp) = locate_crossing(step, |_, y| y[1], Crossing::Falling) {
                best = best.max(step.eval(tp)[0]);
            }
            Control::Continue
        },
    )?;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::from_mcgehee;
    use crate::invariants::conserved;
    use crate::trajectory::conic_params;

    fn sphere() -> SurfaceSpec {
        SurfaceSpec::new(1.0, 1.0, 1.0).unwrap()
    }

    // Independent oracle: Γ = 2(θ₀ − θ_in) from the conic through the entry
    // point, with the pericentre half-width from ρ(θ) = 1/δ.
    fn conic_gamma(bs: &BlockSpec, s: &SurfaceSpec, u: f64) -> f64 {
        let y = bs.entry_state(s, 0.0, u).unwrap();
        let x = from_mcgehee(s, &y).unwrap();
        let cp = conic_params(s, &conserved(s, &x).unwrap()).unwrap();
        let half = ((cp.p / bs.delta - 1.0) / cp.e).clamp(-1.0, 1.0).acos() / s.beta();
        2.0 * half * u.signum()
    }

    #[test]
    fn sphere_block_example() {
        let s = sphere();
        let bs = make_block(&s, -0.5, 0.5).unwrap();
        assert!((bs.r_delta - (0.5f64).atan()).abs() < 1e-12);
        assert!((1.0 / bs.r_delta.tan() - 2.0).abs() < 1e-11);
        assert!(bs.convexity_margin > 0.0);
        assert!((bs.boundary_radius_sq(&s) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn delta_limits() {
        let s = sphere();
        assert!(matches!(make_block(&s, -0.5, 2.0), Err(Error::Validation { .. })));
        assert!(matches!(make_block(&s, 0.0, 1.5), Err(Error::BlockTooLarge { .. })));
        let zero = make_block(&s, 0.0, 0.5).unwrap();
        assert_eq!(zero.boundary_radius_sq(&s), 2.0);
    }

    #[test]
    fn default_delta_halves_until_convex() {
        let s = SurfaceSpec::from_beta(1.0, 2.0, 1.0).unwrap();
        let d = default_delta(&s, -1.0).unwrap();
        assert!(d < 0.5);
        assert!(make_block(&s, -1.0, d).is_ok());
    }

    #[test]
    fn zeta_symmetries() {
        let s = SurfaceSpec::from_beta(1.0, 2.0 / 3.0, 1.0).unwrap();
        let bs = default_block(&s, -1.0).unwrap();
        let b = s.beta();
        assert!((zeta(&bs, &s, 0.0).unwrap() - PI / (2.0 * b)).abs() < 1e-14);
        for u in [0.1, 0.5, 0.9 * bs.u_max(&s)] {
            let sum = b * zeta(&bs, &s, u).unwrap() + b * zeta(&bs, &s, -u).unwrap();
            assert!((sum - PI).abs() < 1e-12);
        }
        assert!(matches!(zeta(&bs, &s, 2.0 * bs.u_max(&s)), Err(Error::ZetaDomain { .. })));
    }

    #[test]
    fn gamma_matches_conic_oracle() {
        for beta in [1.0, 2.0 / 3.0, 0.5, 2.0] {
            let s = SurfaceSpec::from_beta(1.0, beta, 1.0).unwrap();
            for h in [-1.0, 0.0, 1.0] {
                let bs = default_block(&s, h).unwrap();
                let um = bs.u_max(&s);
                for frac in [-0.99, -0.5, -0.05, 0.01, 0.3, 0.8, 0.99] {
                    let u = frac * um;
                    let g = gamma_exit(&bs, &s, u).unwrap();
                    assert!((g - conic_gamma(&bs, &s, u)).abs() < 1e-9, "beta={beta} h={h} u={u}");
                }
            }
        }
    }

    #[test]
    fn gamma_limits_and_tangency() {
        let s = SurfaceSpec::from_beta(1.0, 0.5, 1.0).unwrap();
        let bs = default_block(&s, -1.0).unwrap();
        let (plus, minus) = gamma_limits(&s);
        assert!((gamma_exit(&bs, &s, 1e-9).unwrap() - plus).abs() < 1e-6);
        assert!((gamma_exit(&bs, &s, -1e-9).unwrap() - minus).abs() < 1e-6);
        assert!(gamma_exit(&bs, &s, bs.u_max(&s)).unwrap().abs() < 1e-12);
        assert_eq!(gamma_exit(&bs, &s, 0.0), Err(Error::AsymptoticSet));
        for u in [0.2, 0.7] {
            let a = gamma_exit(&bs, &s, u).unwrap();
            let b = gamma_exit(&bs, &s, -u).unwrap();
            assert!((a + b).abs() < 1e-12);
        }
        assert!((extended_gamma(&bs, &s, 0.0).unwrap() - minus).abs() < 1e-12);
    }

    #[test]
    fn extension_gap_detects_two_over_m() {
        for m in 1..8 {
            let s = SurfaceSpec::from_beta(1.0, 2.0 / m as f64, 1.0).unwrap();
            assert!(extension_gap(&s) < 1e-12);
        }
        assert!(extension_gap(&SurfaceSpec::from_beta(1.0, 0.37, 1.0).unwrap()) > 1e-3);
    }

    #[test]
    fn map_flips_v_and_keeps_u() {
        let s = sphere();
        let bs = default_block(&s, -0.5).unwrap();
        let a = map_across_block(&bs, &s, 0.0, 0.3).unwrap();
        let b = map_across_block(&bs, &s, 1.0, 0.3).unwrap();
        let entry = bs.entry_state(&s, 0.0, 0.3).unwrap();
        assert_eq!(a.u, 0.3);
        assert!((a.v + entry.v).abs() < 1e-15);
        assert!(((b.theta - 1.0) - a.theta).abs() < 1e-14);
    }

    #[test]
    fn numeric_transit_agrees_with_map() {
        let s = sphere();
        let bs = default_block(&s, -0.5).unwrap();
        let opts = TransitOptions::default();
        for u in [0.3, -0.3] {
            let tr = numeric_transit(&bs, &s, 0.2, u, &opts).unwrap();
            let an = map_across_block(&bs, &s, 0.2, u).unwrap();
            assert!((tr.exit.theta - an.theta).abs() < 1e-6);
            assert!((tr.exit.u - an.u).abs() < 1e-6);
            assert!((tr.exit.v - an.v).abs() < 1e-6);
            assert!((tr.exit.r - bs.r_delta).abs() < 1e-9);
        }
    }

    #[test]
    fn reverse_transit_recovers_entry() {
        let s = SurfaceSpec::from_beta(1.0, 2.0 / 3.0, 1.0).unwrap();
        let bs = default_block(&s, 1.0).unwrap();
        let opts = TransitOptions::default();
        let entry = bs.entry_state(&s, 0.4, 0.25).unwrap();
        let fwd = numeric_transit(&bs, &s, 0.4, 0.25, &opts).unwrap();
        let back = reverse_transit(&bs, &s, &fwd.exit, &opts).unwrap();
        assert!((back.exit.theta - entry.theta).abs() < 1e-6);
        assert!((back.exit.v - entry.v).abs() < 1e-6);
        assert!((back.exit.u - entry.u).abs() < 1e-6);
        assert!((back.tau + fwd.tau).abs() < 1e-6);
    }

    #[test]
    fn extrapolated_limit_on_sphere() {
        let s = sphere();
        let bs = default_block(&s, -0.5).unwrap();
        let opts = TransitOptions::default();
        let plus = extrapolate_gamma_zero(&bs, &s, 1.0, &opts).unwrap();
        let minus = extrapolate_gamma_zero(&bs, &s, -1.0, &opts).unwrap();
        assert!((plus - 2.0 * PI).abs() < 1e-3, "{plus}");
        assert!((minus + 2.0 * PI).abs() < 1e-3, "{minus}");
    }

    #[test]
    fn tangency_is_convex() {
        let s = SurfaceSpec::from_beta(1.0, 0.5, 1.0).unwrap();
        let bs = default_block(&s, -1.0).unwrap();
        for sign in [1.0, -1.0] {
            assert!(tangency_curvature(&bs, &s, 0.0, sign, 1e-3).unwrap() > 0.0);
        }
    }

    #[test]
    fn verdict_examples() {
        let v = classify_regularizability(&sphere(), 64).unwrap();
        assert_eq!((v.north, v.orbifold_n), (Some(2), Some(1)));
        let s = SurfaceSpec::from_beta(1.0, 0.4, 1.0).unwrap();
        let v = classify_regularizability(&s, 64).unwrap();
        assert_eq!((v.north, v.orbifold_n), (Some(5), None));
        let s = SurfaceSpec::from_beta(1.0, 0.37, 1.0).unwrap();
        let v = classify_regularizability(&s, 64).unwrap();
        assert_eq!(v.north, None);
        assert_eq!(v.to_string(), "beta=0.37 north=none south=regularizable orbifold=none");
        assert!(classify_regularizability(&s, 0).is_err());
    }

    #[test]
    fn south_block_transits_exit() {
        let s = sphere();
        let opts = TransitOptions::default();
        let rep = south_pole_block_check(&s, 1.0, 1.5, 12, &opts).unwrap();
        assert!(!rep.vacuous);
        assert_eq!(rep.transits, 12);
        assert!(rep.all_exit());
        assert!(rep.max_u_mismatch < 1e-8 && rep.max_v_mismatch < 1e-8);
        assert!(rep.max_r <= rep.barrier_r + 1e-9);
        assert!(south_pole_block_check(&s, -1.0, 1.5, 12, &opts).unwrap().vacuous);
    }

    #[test]
    fn barrier_radius_solves_energy_bound() {
        let s = SurfaceSpec::new(4.0, 0.25, 1.5).unwrap();
        for h in [-2.0, 0.0, 0.7] {
            let r = barrier_radius(&s, h);
            assert!((s.gamma_c() * s.theta(r) - h).abs() < 1e-12);
        }
    }
}
