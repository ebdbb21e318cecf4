//! Adaptive explicit Runge–Kutta integration.
//!
//! [`Dop853`] is the Dormand–Prince 8(5,3) embedded pair with PI step-size
//! control and a seventh-order continuous extension. Every accepted step is
//! handed to an observer as a [`DenseStep`], which can be evaluated anywhere
//! inside the step; event location ([`locate_crossing`]) works on top of that.

#[allow(clippy::excessive_precision)]
mod tableau;

use crate::error::{Error, Result};
use tableau::{A, C, D, E3_SHIFT, E5, STAGES, STAGES_EXT};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
// PI controller exponents for an error estimator of order 7.
const ALPHA: f64 = 0.7 / 8.0;
const BETA: f64 = 0.4 / 8.0;

/// Integrator settings. `rtol`/`atol` bound the local error estimate per
/// component by `atol + rtol * |y|`.
#[derive(Debug, Clone, Copy)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
    pub h_init: Option<f64>,
}

impl Dop853 {
    pub fn new(tol: f64) -> Self {
        Dop853 {
            rtol: tol,
            atol: tol,
            max_steps: 2_000_000,
            h_max: f64::INFINITY,
            h_init: None,
        }
    }

    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    coeffs: [[f64; N]; 7],
}

impl<const N: usize> DenseStep<N> {
    /// Evaluates the interpolant at `t`, which should lie in the step.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        if h == 0.0 {
            return self.y0;
        }
        let x = (t - self.t0) / h;
        let mut y = [0.0; N];
        for (i, f) in self.coeffs.iter().rev().enumerate() {
            for k in 0..N {
                y[k] += f[k];
                y[k] *= if i % 2 == 0 { x } else { 1.0 - x };
            }
        }
        for k in 0..N {
            y[k] += self.y0[k];
        }
        y
    }
}

/// What the observer wants after seeing a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control<const N: usize> {
    Continue,
    /// Stop the integration at the given point inside the step.
    StopAt(f64, [f64; N]),
}

#[derive(Debug, Clone)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub rejected: usize,
    /// True when the observer ended the integration before `t_end`.
    pub stopped: bool,
}

fn rms_scaled<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, b)| (a / b) * (a / b)).sum();
    (s / N as f64).sqrt()
}

fn all_finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl Dop853 {
    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(Error::validation("rtol", "must be positive and finite"));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(Error::validation("atol", "must be positive and finite"));
        }
        if !(self.h_max > 0.0) {
            return Err(Error::validation("h_max", "must be positive"));
        }
        Ok(())
    }

    fn initial_step<const N: usize, F>(
        &self,
        field: &F,
        t0: f64,
        y0: &[f64; N],
        f0: &[f64; N],
        direction: f64,
    ) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut scale = [0.0; N];
        for k in 0..N {
            scale[k] = self.atol + y0[k].abs() * self.rtol;
        }
        let d0 = rms_scaled(y0, &scale);
        let d1 = rms_scaled(f0, &scale);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let mut y1 = [0.0; N];
        for k in 0..N {
            y1[k] = y0[k] + direction * h0 * f0[k];
        }
        let f1 = field(t0 + direction * h0, &y1);
        let mut df = [0.0; N];
        for k in 0..N {
            df[k] = f1[k] - f0[k];
        }
        let d2 = if all_finite(&f1) {
            rms_scaled(&df, &scale) / h0
        } else {
            f64::INFINITY
        };
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }

    /// Integrates `y' = field(t, y)` from `t0` towards `t_end` (either
    /// direction). The observer sees each accepted step and may stop early.
    pub fn solve<const N: usize, F, O>(
        &self,
        field: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        mut observer: O,
    ) -> Result<Outcome<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: FnMut(&DenseStep<N>) -> Control<N>,
    {
        self.validate()?;
        if !t0.is_finite() || !t_end.is_finite() {
            return Err(Error::validation("t_end", "integration bounds must be finite"));
        }
        if !all_finite(&y0) {
            return Err(Error::validation("y0", "initial state must be finite"));
        }
        let mut t = t0;
        let mut y = y0;
        let mut outcome = Outcome {
            t,
            y,
            steps: 0,
            rejected: 0,
            stopped: false,
        };
        if t_end == t0 {
            return Ok(outcome);
        }
        let direction = (t_end - t0).signum();
        let mut f = field(t, &y);
        if !all_finite(&f) {
            return Err(Error::Numerical(format!(
                "vector field not finite at initial state {y0:?}"
            )));
        }
        let mut h_abs = match self.h_init {
            Some(h) => h.abs().min(self.h_max),
            None => self.initial_step(&field, t, &y, &f, direction),
        };
        let mut err_prev: f64 = 1e-4;
        let mut k = [[0.0; N]; STAGES_EXT];

        loop {
            if outcome.steps >= self.max_steps {
                return Err(Error::Numerical(format!(
                    "step budget of {} exhausted at t = {t}",
                    self.max_steps
                )));
            }
            let min_step = 10.0 * (next_toward(t, direction) - t).abs();
            h_abs = h_abs.min(self.h_max);
            let mut rejected_once = false;

            // Attempt steps until one is accepted.
            let (t_new, y_new, f_new, err) = loop {
                if h_abs < min_step {
                    return Err(Error::Numerical(format!(
                        "step size underflow at t = {t}, state {y:?}"
                    )));
                }
                let mut t_new = t + direction * h_abs;
                if direction * (t_new - t_end) > 0.0 {
                    t_new = t_end;
                }
                let h = t_new - t;

                k[0] = f;
                for s in 1..STAGES {
                    let mut ys = y;
                    for j in 0..s {
                        let a = A[s][j];
                        if a != 0.0 {
                            for c in 0..N {
                                ys[c] += h * a * k[j][c];
                            }
                        }
                    }
                    k[s] = field(t + C[s] * h, &ys);
                }
                let mut y_new = y;
                for j in 0..STAGES {
                    let b = A[STAGES][j];
                    if b != 0.0 {
                        for c in 0..N {
                            y_new[c] += h * b * k[j][c];
                        }
                    }
                }
                let f_new = field(t_new, &y_new);
                k[STAGES] = f_new;

                let err = if all_finite(&y_new) && all_finite(&f_new) && k.iter().take(STAGES).all(all_finite) {
                    self.error_norm(&k, h, &y, &y_new)
                } else {
                    f64::INFINITY
                };

                if err <= 1.0 {
                    break (t_new, y_new, f_new, err);
                }
                outcome.rejected += 1;
                rejected_once = true;
                let factor = if err.is_finite() {
                    (SAFETY * err.powf(-ALPHA)).max(MIN_FACTOR)
                } else {
                    0.25
                };
                h_abs *= factor;
            };

            // Extra stages for the continuous extension.
            let h = t_new - t;
            for s in (STAGES + 1)..STAGES_EXT {
                let mut ys = y;
                for j in 0..s {
                    let a = A[s][j];
                    if a != 0.0 {
                        for c in 0..N {
                            ys[c] += h * a * k[j][c];
                        }
                    }
                }
                k[s] = field(t + C[s] * h, &ys);
            }
            let mut coeffs = [[0.0; N]; 7];
            for c in 0..N {
                let dy = y_new[c] - y[c];
                coeffs[0][c] = dy;
                coeffs[1][c] = h * f[c] - dy;
                coeffs[2][c] = 2.0 * dy - h * (f_new[c] + f[c]);
                for (row, d) in D.iter().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..STAGES_EXT {
                        acc += d[j] * k[j][c];
                    }
                    coeffs[3 + row][c] = h * acc;
                }
            }
            let step = DenseStep {
                t0: t,
                t1: t_new,
                y0: y,
                y1: y_new,
                coeffs,
            };

            outcome.steps += 1;
            t = t_new;
            y = y_new;
            f = f_new;

            if let Control::StopAt(ts, ys) = observer(&step) {
                outcome.t = ts;
                outcome.y = ys;
                outcome.stopped = true;
                return Ok(outcome);
            }
            if t == t_end {
                outcome.t = t;
                outcome.y = y;
                return Ok(outcome);
            }

            let err_c = err.max(1e-10);
            let mut factor = SAFETY * err_c.powf(-ALPHA) * err_prev.powf(BETA);
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if rejected_once {
                factor = factor.min(1.0);
            }
            h_abs *= factor;
            err_prev = err_c;
        }
    }

    fn error_norm<const N: usize>(
        &self,
        k: &[[f64; N]; STAGES_EXT],
        h: f64,
        y: &[f64; N],
        y_new: &[f64; N],
    ) -> f64 {
        let mut e5 = 0.0;
        let mut e3 = 0.0;
        for c in 0..N {
            let scale = self.atol + y[c].abs().max(y_new[c].abs()) * self.rtol;
            let mut s5 = 0.0;
            let mut s3 = 0.0;
            for j in 0..=STAGES {
                s5 += E5[j] * k[j][c];
                // E3 is B with three corrections; B is row STAGES of A.
                let b = if j < STAGES { A[STAGES][j] } else { 0.0 };
                s3 += b * k[j][c];
            }
            for &(j, shift) in E3_SHIFT.iter() {
                s3 -= shift * k[j][c];
            }
            e5 += (s5 / scale).powi(2);
            e3 += (s3 / scale).powi(2);
        }
        if e5 == 0.0 && e3 == 0.0 {
            return 0.0;
        }
        let denom = e5 + 0.01 * e3;
        h.abs() * e5 / (denom * N as f64).sqrt()
    }
}

fn next_toward(t: f64, direction: f64) -> f64 {
    if direction > 0.0 {
        next_up(t)
    } else {
        -next_up(-t)
    }
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

/// Which sign changes of an event function count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// From negative to non-negative.
    Rising,
    /// From positive to non-positive.
    Falling,
    Either,
}

impl Crossing {
    fn matches(self, before: f64, after: f64) -> bool {
        match self {
            Crossing::Rising => before < 0.0 && after >= 0.0,
            Crossing::Falling => before > 0.0 && after <= 0.0,
            Crossing::Either => {
                (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0)
            }
        }
    }
}

// Interior probes per step; catches pairs of roots inside one step.
const EVENT_PROBES: usize = 8;

/// Finds the first crossing of `g` inside `step` (in integration order) by
/// probing the interpolant and bisecting to machine precision.
pub fn locate_crossing<const N: usize, G>(step: &DenseStep<N>, g: G, crossing: Crossing) -> Option<f64>
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    locate_crossing_after(step, step.t0, g, crossing)
}

/// Like [`locate_crossing`] but only searches from `t_start` to the end of the step.
pub fn locate_crossing_after<const N: usize, G>(
    step: &DenseStep<N>,
    t_start: f64,
    g: G,
    crossing: Crossing,
) -> Option<f64>
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    let mut ta = t_start;
    let mut ga = if t_start == step.t0 {
        g(step.t0, &step.y0)
    } else {
        g(t_start, &step.eval(t_start))
    };
    for i in 1..=EVENT_PROBES {
        let tb = if i == EVENT_PROBES {
            step.t1
        } else {
            t_start + (step.t1 - t_start) * (i as f64 / EVENT_PROBES as f64)
        };
        let yb = if i == EVENT_PROBES { step.y1 } else { step.eval(tb) };
        let gb = g(tb, &yb);
        if crossing.matches(ga, gb) {
            return Some(bisect(step, &g, ta, ga, tb));
        }
        ta = tb;
        ga = gb;
    }
    None
}

fn bisect<const N: usize, G>(step: &DenseStep<N>, g: &G, mut a: f64, ga: f64, mut b: f64) -> f64
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    let sa = ga.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m, &step.eval(m));
        if gm.signum() == sa && gm != 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_one_period() {
        let out = Dop853::new(1e-12)
            .solve(oscillator, 0.0, [1.0, 0.0], 2.0 * PI, |_| Control::Continue)
            .unwrap();
        assert!((out.y[0] - 1.0).abs() < 1e-10);
        assert!(out.y[1].abs() < 1e-10);
        assert!(!out.stopped);
    }

    #[test]
    fn backward_integration_returns() {
        let ode = Dop853::new(1e-12);
        let fwd = ode
            .solve(oscillator, 0.0, [0.3, -0.7], 5.0, |_| Control::Continue)
            .unwrap();
        let back = ode
            .solve(oscillator, 5.0, fwd.y, 0.0, |_| Control::Continue)
            .unwrap();
        assert!((back.y[0] - 0.3).abs() < 1e-10);
        assert!((back.y[1] + 0.7).abs() < 1e-10);
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let mut worst: f64 = 0.0;
        Dop853::new(1e-11)
            .solve(oscillator, 0.0, [1.0, 0.0], 10.0, |step| {
                for i in 0..=10 {
                    let t = step.t0 + (step.t1 - step.t0) * i as f64 / 10.0;
                    let y = step.eval(t);
                    worst = worst.max((y[0] - t.cos()).abs()).max((y[1] + t.sin()).abs());
                }
                Control::Continue
            })
            .unwrap();
        assert!(worst < 1e-9, "dense error {worst}");
    }

    #[test]
    fn global_error_converges_at_high_order() {
        // y' = y on [0, 1]; fixed steps via h_init and large tolerance.
        let err = |n: usize| {
            let h = 1.0 / n as f64;
            let ode = Dop853 {
                rtol: 1.0,
                atol: 1.0,
                max_steps: 10_000,
                h_max: h,
                h_init: Some(h),
            };
            let out = ode
                .solve(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, |_| Control::Continue)
                .unwrap();
            (out.y[0] - std::f64::consts::E).abs()
        };
        let e1 = err(4);
        let e2 = err(8);
        let order = (e1 / e2).log2();
        assert!(order > 7.0, "observed order {order} (errors {e1:e}, {e2:e})");
    }

    #[test]
    fn locates_zero_crossing() {
        let mut hit = None;
        Dop853::new(1e-12)
            .solve(oscillator, 0.0, [1.0, 0.0], 10.0, |step| {
                if let Some(t) = locate_crossing(step, |_, y| y[0], Crossing::Falling) {
                    hit = Some(t);
                    return Control::StopAt(t, step.eval(t));
                }
                Control::Continue
            })
            .unwrap();
        assert!((hit.unwrap() - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let ode = Dop853::new(-1.0);
        assert!(ode
            .solve(oscillator, 0.0, [1.0, 0.0], 1.0, |_| Control::Continue)
            .is_err());
    }

    #[test]
    fn singular_field_underflows() {
        // y' = 1/y blows up at finite time going down from y=1 with y' = -1/y.
        let res = Dop853::new(1e-10).solve(
            |_, y: &[f64; 1]| [-1.0 / y[0].max(0.0).sqrt().max(0.0).powi(3)],
            0.0,
            [1.0],
            10.0,
            |_| Control::Continue,
        );
        assert!(matches!(res, Err(Error::Numerical(_))));
    }
}
