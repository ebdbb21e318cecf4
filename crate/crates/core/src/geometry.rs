//! The constant-curvature family of spherical surfaces of revolution.
//!
//! The metric is `ds² = dr² + f(r)² dθ²` with `f(r) = L sin(√K r)`, so the
//! north pole sits at `r = 0` and the south pole at `r = π/√K`. The single
//! shape parameter is `β = L√K = f'(r_N)`; `β = 1` is the round sphere.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Relative tolerance used when matching β against `1/n` or `2/m`.
pub const RATIONALITY_TOL: f64 = 1e-9;
/// Default search bound for the integer in `1/n` and `2/m`.
pub const DEFAULT_M_MAX: u32 = 64;
/// Derivative-based checks stay this fraction of `r_S - r_N` away from the poles.
pub const POLE_MARGIN_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpec {
    curvature: f64,
    amplitude: f64,
    beta: f64,
    gamma_c: f64,
    sqrt_k: f64,
}

/// Closed-form quantities at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub f: f64,
    pub df: f64,
    /// Θ(r), the antiderivative of `1/f²` fixed as `-cot(√K r)/(L²√K)`.
    pub theta: f64,
    /// V(r) = γ Θ(r).
    pub potential: f64,
}

fn check_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be positive and finite, got {value}")))
    }
}

impl SurfaceSpec {
    /// Builds the surface `f(r) = L sin(√K r)` with potential coupling `γ`.
    pub fn new(curvature: f64, amplitude: f64, gamma_c: f64) -> Result<Self> {
        check_positive("K", curvature)?;
        check_positive("L", amplitude)?;
        check_positive("gamma_c", gamma_c)?;
        let sqrt_k = curvature.sqrt();
        Ok(SurfaceSpec {
            curvature,
            amplitude,
            beta: amplitude * sqrt_k,
            gamma_c,
            sqrt_k,
        })
    }

    /// Same family, parametrized by β instead of L (`L = β/√K`).
    pub fn from_beta(curvature: f64, beta: f64, gamma_c: f64) -> Result<Self> {
        check_positive("K", curvature)?;
        check_positive("beta", beta)?;
        Self::new(curvature, beta / curvature.sqrt(), gamma_c)
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma_c(&self) -> f64 {
        self.gamma_c
    }
    pub fn sqrt_k(&self) -> f64 {
        self.sqrt_k
    }
    pub fn r_north(&self) -> f64 {
        0.0
    }
    pub fn r_south(&self) -> f64 {
        PI / self.sqrt_k
    }
    /// Radius where Θ changes sign.
    pub fn r_equator(&self) -> f64 {
        0.5 * PI / self.sqrt_k
    }
    /// Whether the profile curve can be realized with unit speed in ℝ³.
    pub fn embeddable(&self) -> bool {
        self.beta <= 1.0
    }
    pub fn pole_margin(&self) -> f64 {
        POLE_MARGIN_FRACTION * (self.r_south() - self.r_north())
    }

    pub(crate) fn f(&self, r: f64) -> f64 {
        self.amplitude * (self.sqrt_k * r).sin()
    }
    pub(crate) fn df(&self, r: f64) -> f64 {
        self.beta * (self.sqrt_k * r).cos()
    }
    pub(crate) fn theta(&self, r: f64) -> f64 {
        -1.0 / ((self.sqrt_k * r).tan() * self.amplitude * self.beta)
    }
    /// `f Θ = -cos(√K r)/β`, finite at both poles.
    pub(crate) fn f_theta(&self, r: f64) -> f64 {
        -(self.sqrt_k * r).cos() / self.beta
    }
    /// `1/Θ = -L β tan(√K r)`, finite away from the equator.
    pub(crate) fn inv_theta(&self, r: f64) -> f64 {
        -self.amplitude * self.beta * (self.sqrt_k * r).tan()
    }

    fn check_open_interval(&self, r: f64) -> Result<()> {
        if !r.is_finite() {
            return Err(Error::validation("r", "must be finite"));
        }
        if r <= self.r_north() || r >= self.r_south() {
            return Err(Error::PoleEvaluation { r });
        }
        Ok(())
    }

    /// `(f, f', Θ, V)` at `r`; fails at (or beyond) the poles.
    pub fn profile(&self, r: f64) -> Result<Profile> {
        self.check_open_interval(r)?;
        let theta = self.theta(r);
        Ok(Profile {
            f: self.f(r),
            df: self.df(r),
            theta,
            potential: self.gamma_c * theta,
        })
    }

    /// Evaluates `(1/f²) d/dr (f² dV/dr)` with nested central differences of V.
    /// The result is a discretization residual and should be close to zero.
    pub fn laplace_beltrami_residual(&self, r: f64, step: f64) -> Result<f64> {
        self.check_open_interval(r)?;
        check_positive("step", step)?;
        let margin = self.pole_margin();
        if r - step < self.r_north() + margin || r + step > self.r_south() - margin {
            return Err(Error::Numerical(format!(
                "finite-difference stencil at r = {r} with step {step} reaches the pole margin {margin}"
            )));
        }
        let v = |x: f64| self.gamma_c * self.theta(x);
        let half = 0.5 * step;
        let flux = |x: f64| {
            let f = self.f(x);
            f * f * (v(x + half) - v(x - half)) / step
        };
        let f = self.f(r);
        Ok((flux(r + half) - flux(r - half)) / (step * f * f))
    }

    /// Returns `n` when β = 1/n for some `n ≤ m_max`: the cone angle at both
    /// poles is then `2π/n` and the surface is an orbifold of revolution.
    pub fn classify_orbifold(&self, m_max: u32) -> Option<u32> {
        match_ratio(1.0, self.beta, m_max, RATIONALITY_TOL)
    }

    /// Height `g(r) = ∫₀ʳ √(1 - f'(ρ)²) dρ` of the unit-speed profile curve.
    pub fn embedding_profile(&self, r: f64) -> Result<f64> {
        if !self.embeddable() {
            return Err(Error::EmbeddingUnavailable { beta: self.beta });
        }
        if !(r >= self.r_north() && r <= self.r_south()) {
            return Err(Error::validation(
                "r",
                format!("{r} outside [{}, {}]", self.r_north(), self.r_south()),
            ));
        }
        let integrand = |rho: f64| {
            let d = self.df(rho);
            (1.0 - d * d).max(0.0).sqrt()
        };
        Ok(crate::quadrature::integrate(integrand, 0.0, r, 1e-13))
    }
}

/// Matches `value` against `numerator / m` for an integer `1 ≤ m ≤ max`
/// within relative tolerance `rel_tol`.
pub fn match_ratio(numerator: f64, value: f64, max: u32, rel_tol: f64) -> Option<u32> {
    if !(value.is_finite() && value > 0.0) || max == 0 {
        return None;
    }
    let m = (numerator / value).round();
    if m < 1.0 || m > max as f64 {
        return None;
    }
    let target = numerator / m;
    if (value - target).abs() <= rel_tol * target {
        Some(m as u32)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn sphere() -> SurfaceSpec {
        SurfaceSpec::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn make_surface_examples() {
        let s = sphere();
        assert_eq!(s.beta(), 1.0);
        assert_eq!(s.r_north(), 0.0);
        assert_eq!(s.r_south(), PI);

        let half = SurfaceSpec::new(1.0, 0.5, 1.0).unwrap();
        assert_eq!(half.beta(), 0.5);
        assert_eq!(half.r_south(), PI);

        let scaled = SurfaceSpec::new(4.0, 0.25, 1.0).unwrap();
        assert_eq!(scaled.beta(), 0.5);
        assert_eq!(scaled.r_south(), PI / 2.0);
        assert!(scaled.embeddable());
        assert!(!SurfaceSpec::from_beta(1.0, 2.0, 1.0).unwrap().embeddable());
    }

    #[test]
    fn make_surface_rejects_non_positive() {
        for (k, l, g, field) in [
            (0.0, 1.0, 1.0, "K"),
            (1.0, -1.0, 1.0, "L"),
            (1.0, 1.0, 0.0, "gamma_c"),
            (f64::NAN, 1.0, 1.0, "K"),
        ] {
            match SurfaceSpec::new(k, l, g) {
                Err(Error::Validation { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected validation error, got {other:?}"),
            }
        }
    }

    #[test]
    fn profile_examples() {
        let s = sphere();
        let p = s.profile(PI / 2.0).unwrap();
        assert!(close(p.f, 1.0, 1e-15));
        assert!(close(p.df, 0.0, 1e-15));
        assert!(close(p.theta, 0.0, 1e-15));
        assert!(close(p.potential, 0.0, 1e-15));

        let q = s.profile(PI / 4.0).unwrap();
        assert!(close(q.f, 2f64.sqrt() / 2.0, 1e-15));
        assert!(close(q.theta, -1.0, 1e-15));

        assert!(s.profile(1e-9).unwrap().theta < -1e8);
        assert!(s.profile(PI - 1e-9).unwrap().theta > 1e8);
    }

    #[test]
    fn profile_rejects_poles() {
        let s = sphere();
        assert!(matches!(s.profile(0.0), Err(Error::PoleEvaluation { .. })));
        assert!(matches!(s.profile(PI), Err(Error::PoleEvaluation { .. })));
    }

    #[test]
    fn theta_is_antiderivative_of_inverse_f_squared() {
        let s = SurfaceSpec::new(4.0, 0.25, 1.0).unwrap();
        let h = 1e-5;
        for i in 1..20 {
            let r = s.r_south() * i as f64 / 20.0;
            let d = (s.theta(r + h) - s.theta(r - h)) / (2.0 * h);
            let f = s.f(r);
            assert!((d * f * f - 1.0).abs() < 1e-7, "r={r}");
        }
    }

    #[test]
    fn laplace_beltrami_examples() {
        let s = sphere();
        assert!(s.laplace_beltrami_residual(PI / 2.0, 1e-4).unwrap().abs() < 1e-6);
        assert!(s.laplace_beltrami_residual(PI / 4.0, 1e-4).unwrap().abs() < 1e-6);
        let half = SurfaceSpec::new(1.0, 0.5, 1.0).unwrap();
        assert!(half.laplace_beltrami_residual(1.0, 1e-4).unwrap().abs() < 1e-6);
    }

    #[test]
    fn laplace_beltrami_near_pole_is_numerical_failure() {
        let s = sphere();
        assert!(matches!(
            s.laplace_beltrami_residual(2e-3, 1e-3),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn orbifold_examples() {
        assert_eq!(sphere().classify_orbifold(DEFAULT_M_MAX), Some(1));
        let third = SurfaceSpec::from_beta(1.0, 1.0 / 3.0, 1.0).unwrap();
        assert_eq!(third.classify_orbifold(DEFAULT_M_MAX), Some(3));
        let two_fifths = SurfaceSpec::from_beta(1.0, 0.4, 1.0).unwrap();
        assert_eq!(two_fifths.classify_orbifold(DEFAULT_M_MAX), None);
        let irrational = SurfaceSpec::from_beta(1.0, 0.5f64.sqrt(), 1.0).unwrap();
        assert_eq!(irrational.classify_orbifold(DEFAULT_M_MAX), None);
    }

    #[test]
    fn orbifold_respects_bound() {
        let s = SurfaceSpec::from_beta(1.0, 1.0 / 10.0, 1.0).unwrap();
        assert_eq!(s.classify_orbifold(9), None);
        assert_eq!(s.classify_orbifold(10), Some(10));
    }

    #[test]
    fn embedding_examples() {
        let s = sphere();
        assert!(close(s.embedding_profile(PI / 2.0).unwrap(), 1.0, 1e-12));
        assert_eq!(s.embedding_profile(0.0).unwrap(), 0.0);
        let abstract_metric = SurfaceSpec::from_beta(1.0, 2.0, 1.0).unwrap();
        assert!(matches!(
            abstract_metric.embedding_profile(1.0),
            Err(Error::EmbeddingUnavailable { .. })
        ));
    }

    #[test]
    fn match_ratio_edges() {
        assert_eq!(match_ratio(2.0, 2.0 / 7.0, 64, RATIONALITY_TOL), Some(7));
        assert_eq!(match_ratio(2.0, 2.0 / 7.0, 6, RATIONALITY_TOL), None);
        assert_eq!(match_ratio(2.0, 0.37, 64, RATIONALITY_TOL), None);
        assert_eq!(match_ratio(2.0, 3.0, 64, RATIONALITY_TOL), None);
        assert_eq!(match_ratio(1.0, 0.0, 64, RATIONALITY_TOL), None);
    }
}
