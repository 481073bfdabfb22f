use hybrid_ins::liegroup::{hat, Mat3, Vec3};
use hybrid_ins::observers::Variant;
use hybrid_ins::riccati::*;
use hybrid_ins::simkit::{reference_scenario, simulate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference_omega(t: f64) -> Vec3 {
    Vec3::new(0.8 + 0.3 * (1.3 * t).sin(), -0.4 * (0.7 * t).cos(), 0.1 + 0.2 * t.sin())
}

#[test]
fn riccati_solution_stays_positive_definite_for_100_s() {
    for variant in [Variant::RiccatiGain, Variant::RiccatiGainGyroBias, Variant::RiccatiGainFullBias] {
        let mut sc = reference_scenario(variant, false);
        sc.run.duration = 100.0;
        sc.run.log_every = 100;
        let log = simulate(&sc).unwrap();
        let (p_m, p_big) = log.p_bounds.unwrap();
        assert!(p_m > 0.0 && p_big.is_finite(), "{variant:?}: bounds ({p_m}, {p_big})");
        for rec in &log.records {
            let p = rec.state.p.as_ref().unwrap();
            assert!((p - p.transpose()).amax() <= 1e-12 * p.amax());
            check_pd(p, rec.t()).unwrap();
        }
        println!("{}: p_m = {p_m:.6e}, p_M = {p_big:.6e}", variant.name());
    }
}

#[test]
fn factorized_transition_matches_direct_integration() {
    for (t, tau) in [(1.0, 0.0), (3.7, 1.2), (10.0, 2.0)] {
        let fac = transition_factorized(reference_omega, t, tau, 2000);
        let dir = transition_direct(|s| CreVariant::NoBias6.a_matrix(&reference_omega(s)), 6, t, tau, 2000);
        let rel = (&fac - &dir).norm() / dir.norm();
        assert!(rel < 1e-6, "({t}, {tau}): relative difference {rel:e}");
    }
}

#[test]
fn gramian_is_positive_definite_for_every_variant() {
    for cv in [CreVariant::NoBias6, CreVariant::GyroBias6, CreVariant::FullBias9] {
        for omega in [reference_omega as fn(f64) -> Vec3, |_| Vec3::zeros()] {
            for t in [0.0, 2.5, 7.0] {
                let l = gramian_min_eig(cv, omega, t, 1.0).unwrap();
                assert!(l > 1e-6, "{cv:?} at t = {t}: {l}");
            }
        }
    }
}

/// For six states `CΦ(s,t) = R̄(s)[I, (s-t)I]`, so the Gramian over a window
/// of length `d` is `[[1, d/2], [d/2, d²/3]] ⊗ I` whatever `ω` is.
#[test]
fn six_state_gramian_matches_closed_form() {
    for d in [0.5, 1.0, 2.0] {
        let w = gramian(CreVariant::GyroBias6, reference_omega, 1.3, d).unwrap();
        let mut expect = DMat::zeros(6, 6);
        for i in 0..3 {
            expect[(i, i)] = 1.0;
            expect[(i, i + 3)] = d / 2.0;
            expect[(i + 3, i)] = d / 2.0;
            expect[(i + 3, i + 3)] = d * d / 3.0;
        }
        assert!((&w - &expect).amax() < 1e-9, "window {d}: {}", (&w - &expect).amax());
    }
    // smallest eigenvalue of [[1, 1/2], [1/2, 1/3]]
    let l = gramian_min_eig(CreVariant::NoBias6, |_| Vec3::zeros(), 0.0, 1.0).unwrap();
    let expect = (4.0 - 13f64.sqrt()) / 6.0;
    assert!((l - expect).abs() < 1e-12);
}

#[test]
fn observability_determinant_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut draw = |r: f64| Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r));
    for _ in 0..1000 {
        let (w, wd, b, bd) = (draw(10.0), draw(10.0), draw(1.0), draw(1.0));
        let d = observability_det(&w, &wd, &b, &bd);
        assert!((d - 1.0).abs() < 1e-9, "det = {d}");
    }
}

#[test]
fn observability_matrix_blocks() {
    let w = Vec3::new(0.3, -1.0, 2.0);
    let wd = Vec3::new(0.1, 0.0, -0.5);
    let o = observability_matrix(&w, &wd, &Vec3::zeros(), &Vec3::zeros());
    let wx = hat(&w);
    let block = |i: usize, j: usize| -> Mat3 { o.fixed_view::<3, 3>(3 * i, 3 * j).into_owned() };
    assert_eq!(block(0, 0), Mat3::identity());
    assert_eq!(block(1, 0), -wx);
    assert!((block(2, 0) - (wx * wx - hat(&wd))).amax() < 1e-15);
    assert_eq!(block(2, 1), wx * -2.0);
}
