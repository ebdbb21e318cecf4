use std::f64::consts::PI;

use curved_kepler::block::{default_block, gamma_exit, numeric_transit, reverse_transit, zeta, TransitOptions};
use curved_kepler::blowup::{energy_of, energy_relation_residual, from_mcgehee, integrate_regularized, to_mcgehee, Chart};
use curved_kepler::dynamics::{default_collision_margin, hamiltonian, integrate, PhaseState};
use curved_kepler::geometry::SurfaceSpec;
use curved_kepler::harness::sampling::random_bounded_state;
use curved_kepler::harness::Real;
use curved_kepler::invariants::dependency_residual;
use curved_kepler::trajectory::r_from_rho;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Fixed seed so runs are reproducible.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x6b65_706c),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn surface() -> impl Strategy<Value = SurfaceSpec> {
    (0.25f64..4.0, 0.2f64..2.0, 0.5f64..2.0).prop_map(|(k, b, g)| SurfaceSpec::from_beta(k, b, g).unwrap())
}

fn state_on(s: &SurfaceSpec) -> impl Strategy<Value = PhaseState> {
    let rs = s.r_south();
    (0.05f64..0.95, -PI..PI, -2.0f64..2.0, -2.0f64..2.0)
        .prop_map(move |(x, th, pr, pt)| PhaseState::new(x * rs, th, pr, pt))
}

fn surface_and_state() -> impl Strategy<Value = (SurfaceSpec, PhaseState)> {
    surface().prop_flat_map(|s| (Just(s), state_on(&s)))
}

fn surface_and_bounded_state() -> impl Strategy<Value = (SurfaceSpec, PhaseState)> {
    (surface(), any::<u64>()).prop_map(|(s, seed)| {
        let x = random_bounded_state(&s, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        (s, x)
    })
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn dependency_identity_holds((s, x) in surface_and_state()) {
        let scale = 1.0 + hamiltonian(&s, &x).unwrap().abs() * x.p_theta.powi(2) + x.p_theta.powi(4);
        prop_assert!(dependency_residual(&s, &x).unwrap() < 1e-11 * scale);
    }

    #[test]
    fn profile_curvature_identity(s in surface(), x in 0.1f64..0.9) {
        let r = x * s.r_south();
        let h = 1e-4;
        let f = |r| s.profile(r).unwrap().f;
        let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        prop_assert!((d2 + s.curvature() * f(r)).abs() < 1e-6);
        // Θ' = 1/f²
        let p = s.profile(r).unwrap();
        let k = 1e-6 * s.r_south();
        let dth = (s.profile(r + k).unwrap().theta - s.profile(r - k).unwrap().theta) / (2.0 * k);
        prop_assert!((dth * p.f * p.f - 1.0).abs() < 1e-6);
    }

    #[test]
    fn r_from_rho_inverts_theta(s in surface(), x in 0.01f64..0.99) {
        let r = x * s.r_south();
        let rho = -s.profile(r).unwrap().theta;
        prop_assert!((r_from_rho(&s, rho) - r).abs() < 1e-12 * s.r_south());
    }

    #[test]
    fn mcgehee_round_trip((s, x) in surface_and_state()) {
        prop_assume!((x.r - s.r_equator()).abs() > 1e-3 * s.r_south());
        let y = to_mcgehee(&s, &x).unwrap();
        let back = from_mcgehee(&s, &y).unwrap();
        for (a, b) in back.to_array().iter().zip(x.to_array()) {
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
        let h = hamiltonian(&s, &x).unwrap();
        prop_assert!((energy_of(&s, &y).unwrap() - h).abs() < 1e-10 * (1.0 + h.abs()));
    }

    #[test]
    fn embedding_profile_monotone(b in 0.1f64..1.0, a in 0.0f64..1.0, c in 0.0f64..1.0) {
        let s = SurfaceSpec::from_beta(1.0, b, 1.0).unwrap();
        let (lo, hi) = if a < c { (a, c) } else { (c, a) };
        let g1 = s.embedding_profile(lo * s.r_south()).unwrap();
        let g2 = s.embedding_profile(hi * s.r_south()).unwrap();
        prop_assert!(g2 >= g1 - 1e-13);
    }

    #[test]
    fn orbifold_index_recovered(n in 1u32..=64) {
        let s = SurfaceSpec::from_beta(1.0, 1.0 / n as f64, 1.0).unwrap();
        prop_assert_eq!(s.classify_orbifold(64), Some(n));
    }

    #[test]
    fn rational_text_round_trips(p in 1i64..1000, q in 1i64..1000) {
        let r = Real::parse(&format!("{p}/{q}")).unwrap();
        prop_assert_eq!(r.value(), p as f64 / q as f64);
        prop_assert_eq!(r.to_string(), format!("{p}/{q}"));
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn zeta_reflection_and_gamma_odd(s in surface(), h in -2.0f64..-0.1, frac in 0.01f64..0.99) {
        let bs = default_block(&s, h).unwrap();
        let u = frac * bs.u_max(&s);
        let b = s.beta();
        prop_assert!((b * zeta(&bs, &s, -u).unwrap() - (PI - b * zeta(&bs, &s, u).unwrap())).abs() < 1e-12);
        prop_assert!((gamma_exit(&bs, &s, u).unwrap() + gamma_exit(&bs, &s, -u).unwrap()).abs() < 1e-11 / b);
    }

    // Arcs entering the block away from the asymptotic set, checked while
    // they stay inside the block.
    #[test]
    fn regularized_arc_keeps_energy(
        s in surface(),
        h in -2.0f64..-0.1,
        frac in 0.05f64..0.95,
        sign in prop::bool::ANY,
    ) {
        let bs = default_block(&s, h).unwrap();
        let u = if sign { frac } else { -frac } * bs.u_max(&s);
        let y0 = bs.entry_state(&s, 0.0, u).unwrap();
        let arc = integrate_regularized(&s, &y0, 50.0, 1e-10).unwrap();
        let inside = arc.samples.iter().skip(1).take_while(|p| p.state.r < bs.r_delta);
        for smp in inside {
            let y = &smp.state;
            let res = energy_relation_residual(&s, Chart::North, y, h);
            let size = 1.0 + 0.5 * (y.u * y.u + y.v * y.v) + s.gamma_c();
            prop_assert!(res.abs() < 1e-8 * size);
        }
    }

    #[test]
    fn time_reversal_returns((s, x) in surface_and_bounded_state()) {
        let t_end = 3.0;
        let m = default_collision_margin(&s);
        let fwd = integrate(&s, &x, t_end, 1e-11, m).unwrap();
        prop_assume!(fwd.last().t == t_end);
        let back = integrate(&s, &fwd.last().state.reversed(), t_end, 1e-11, m).unwrap();
        prop_assume!(back.last().t == t_end);
        let end = back.last().state.reversed();
        // θ is unreduced; compare it against the total angle swept.
        let swept = (fwd.last().state.theta - x.theta).abs().max(1.0);
        prop_assert!((end.theta - x.theta).abs() < 1e-6 * swept);
        for (a, b) in [(end.r, x.r), (end.p_r, x.p_r), (end.p_theta, x.p_theta)] {
            prop_assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn transit_is_invertible(s in surface(), frac in 0.05f64..0.95, sign in prop::bool::ANY) {
        let bs = default_block(&s, -0.5).unwrap();
        let u = if sign { frac } else { -frac } * bs.u_max(&s);
        let opts = TransitOptions::default();
        let fwd = numeric_transit(&bs, &s, 0.3, u, &opts).unwrap();
        let back = reverse_transit(&bs, &s, &fwd.exit, &opts).unwrap();
        let entry = bs.entry_state(&s, 0.3, u).unwrap();
        prop_assert!((back.exit.theta - entry.theta).abs() < 1e-6);
        prop_assert!((back.exit.u - entry.u).abs() < 1e-6);
        prop_assert!((back.exit.v - entry.v).abs() < 1e-6);
    }
}
