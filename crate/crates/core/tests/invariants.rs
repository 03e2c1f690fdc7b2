//! Cross-module invariants on random inputs.

use mixing_core::euler::{
    divergence_defect, kappa_for_target_rate, nonlinear_term, velocity_from_vorticity, EulerGrid, EulerWorkspace,
    NaiveDft, VorticityState,
};
use mixing_core::lattice::{build_lattice, LatticeBox};
use mixing_core::mc::{realness_defect, ModeState, ModeSystem};
use mixing_core::spectrum::{
    h_minus1_drift, integrate, transport_rhs, DtPolicy, MasterOperator, Sampling, SpectrumState, TruncationPolicy,
};
use mixing_core::theta::{make_theta, ThetaFamily};
use mixing_core::FOUR_PI_SQ;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Symmetric spectrum with random entries on `0 < |k|_∞ ≤ r`.
fn random_spectrum(lattice: &LatticeBox, r: i64, seed: u64) -> SpectrumState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; lattice.len()];
    for id in lattice.representatives() {
        if lattice.sup_norm(id) <= r && rng.random_bool(0.6) {
            let v = rng.random::<f64>();
            y[id] = v;
            y[lattice.pair(id)] = v;
        }
    }
    let one = lattice.id_of(&[1, 0]).unwrap();
    y[one] += 0.5;
    y[lattice.pair(one)] += 0.5;
    SpectrumState::new(lattice, y).unwrap()
}

fn family(radius: u8) -> ThetaFamily {
    if radius == 1 {
        ThetaFamily::UnitShell
    } else {
        ThetaFamily::Shells { radius: radius as f64 }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conservative_flow_keeps_mass_and_shrinks_every_lp_norm(
        seed in any::<u64>(), radius in 1u8..=2, kappa in 0.2f64..2.0,
    ) {
        let b = build_lattice(2, 8).unwrap();
        let theta = make_theta(&family(radius), &b).unwrap();
        let y0 = random_spectrum(&b, 3, seed);
        let margin = theta.support_sup_norm();
        let op = MasterOperator::transport(&b, &theta, kappa, TruncationPolicy::conservative(margin)).unwrap();
        let sampling = Sampling { stride: 1, p_list: vec![1.5, 2.0, 4.0], beta_list: vec![], margin };
        let traj = integrate(&b, &op, &y0, 2e-3, DtPolicy::default(), &sampling).unwrap();
        let m0 = traj.samples[0].mass;
        for s in &traj.samples {
            prop_assert!(((s.mass - m0) / m0).abs() < 1e-12);
            prop_assert!(s.min_value >= 0.0);
        }
        for i in 0..3 {
            for w in traj.lp_series(i).windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} > {}", w[1], w[0]);
            }
        }
    }

    #[test]
    fn h_minus1_drift_matches_the_generator_away_from_the_boundary(
        seed in any::<u64>(), radius in 1u8..=2, kappa in 0.2f64..2.0,
    ) {
        let b = build_lattice(2, 9).unwrap();
        let theta = make_theta(&family(radius), &b).unwrap();
        let margin = theta.support_sup_norm();
        let y = random_spectrum(&b, 9 - 2 * margin - 1, seed);
        let drift = h_minus1_drift(&b, &y.values, &theta, kappa).unwrap();
        prop_assert!(!drift.boundary_warning);
        let rhs = transport_rhs(&b, &y.values, &theta, kappa, TruncationPolicy::conservative(margin)).unwrap();
        let terms: Vec<f64> = b
            .ids()
            .filter(|&id| b.norm_sq(id) > 0)
            .map(|id| rhs[id] / (FOUR_PI_SQ * b.norm_sq(id) as f64))
            .collect();
        let oracle: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        prop_assert!((drift.drift - oracle).abs() <= 1e-12 * scale.max(1e-300), "{} vs {oracle}", drift.drift);
    }

    #[test]
    fn mode_system_steps_preserve_reality(seed in any::<u64>(), kappa in 0.1f64..2.0) {
        let b = build_lattice(2, 6).unwrap();
        let theta = make_theta(&ThetaFamily::Shells { radius: 2.0 }, &b).unwrap();
        let sys = ModeSystem::new(&b, &theta, kappa, 0.5, 0.05).unwrap();
        let mut s = ModeState::from_spectrum(&b, &random_spectrum(&b, 2, seed)).unwrap();
        let dt = 0.5 * sys.stability_budget();
        let f = sys.factors(dt);
        let mut draw = sys.zero_draw(dt);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..50 {
            draw.refill(&mut rng);
            sys.em_step(&mut s, &draw, &f).unwrap();
        }
        prop_assert_eq!(realness_defect(&b, &s), 0.0);
    }

    #[test]
    fn regularized_velocity_is_solenoidal_and_advection_neutral(
        seed in any::<u64>(), alpha in 0.1f64..2.0, modes in 2i64..20,
    ) {
        let grid = EulerGrid::new(12, alpha).unwrap();
        let w = VorticityState::random_low_modes(&grid, modes, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let u = velocity_from_vorticity(&grid, &w);
        prop_assert!(divergence_defect(&grid, &u) < 1e-15);
        let mut fft = NaiveDft::new(12);
        let mut ws = EulerWorkspace::new(&grid);
        let mut out = Vec::new();
        let r = nonlinear_term(&grid, &mut fft, &mut ws, &w.modes.amps, &mut out).unwrap();
        prop_assert!(r.orthogonality < 1e-10, "{}", r.orthogonality);
    }

    #[test]
    fn sized_kappa_meets_the_target_rate_with_equality(
        lambda in 0.01f64..10.0, r in 0.0f64..10.0, alpha in 0.1f64..2.0, cutoff in 2.0f64..12.0,
    ) {
        let s = kappa_for_target_rate(lambda, r, alpha, cutoff).unwrap();
        prop_assert!(s.kappa > 0.0);
        prop_assert!(s.slack.abs() <= 1e-9 * lambda.max(1.0), "slack {}", s.slack);
        let more = kappa_for_target_rate(2.0 * lambda, r, alpha, cutoff).unwrap();
        prop_assert!(more.kappa > s.kappa);
    }
}
