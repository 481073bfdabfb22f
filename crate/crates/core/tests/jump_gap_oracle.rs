//! Brute-force check of the lower bound on `Δ*_M`, one block of random
//! configurations per branch.

use hybrid_ins::landmarks::*;
use hybrid_ins::liegroup::{Mat3, Rot3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 100;

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    loop {
        let q: [f64; 4] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n < 1.0 {
            let [w, x, y, z] = q.map(|c| c / n);
            return Mat3::new(
                1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
                2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
                2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y),
            );
        }
    }
}

/// Unit-weight landmarks `±√(λᵢ/2) vᵢ`, whose scatter matrix is
/// `V diag(λ) Vᵀ`.
fn landmarks_for(eigs: [f64; 3], v: &Mat3) -> LandmarkSet {
    let mut pts = Vec::new();
    for i in 0..3 {
        let col: Vec3 = v.column(i).into_owned();
        let s = (eigs[i] / 2.0).sqrt();
        pts.push(col * s);
        pts.push(-col * s);
    }
    LandmarkSet::new(pts, vec![1.0; 6]).unwrap()
}

/// `Δ_M(u, v) = tr M - 2λ_v - uᵀMu + 2λ_v(uᵀv)²` for an eigenvector `v`
/// with eigenvalue `λ_v`.
fn delta_oracle(m: &Mat3, u: &Vec3, v: &Vec3) -> f64 {
    let lv = (v.transpose() * m * v)[0];
    m.trace() - 2.0 * lv - (u.transpose() * m * u)[0] + 2.0 * lv * u.dot(v).powi(2)
}

/// Minimum over unit vectors of each eigenspace of `M`
/// (grouping eigenvalues that agree to 1e-9) of the maximum over the axes.
fn brute_force(m: &Mat3, axes: &[Vec3], rng: &mut ChaCha8Rng) -> f64 {
    let eig = m.symmetric_eigen();
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
    let mut groups: Vec<Vec<Vec3>> = Vec::new();
    let mut last = f64::NAN;
    for &i in &idx {
        let l = eig.eigenvalues[i];
        let col: Vec3 = eig.eigenvectors.column(i).into_owned();
        if (l - last).abs() <= 1e-9 * l.abs().max(1.0) {
            groups.last_mut().unwrap().push(col);
        } else {
            groups.push(vec![col]);
        }
        last = l;
    }
    let score = |v: &Vec3| axes.iter().map(|u| delta_oracle(m, u, v)).fold(f64::NEG_INFINITY, f64::max);
    let mut best = f64::INFINITY;
    for g in &groups {
        if g.len() == 1 {
            best = best.min(score(&g[0]));
            continue;
        }
        let draw = |rng: &mut ChaCha8Rng| {
            let mut v = Vec3::zeros();
            for b in g {
                v += b * rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            v
        };
        // random search, then a shrinking-step local search from the best draw
        let mut v_best = g[0];
        let mut s_best = score(&v_best);
        for _ in 0..5_000 {
            let v = draw(rng);
            if v.norm() > 1e-6 && score(&v.normalize()) < s_best {
                v_best = v.normalize();
                s_best = score(&v_best);
            }
        }
        let mut step = 0.1;
        for _ in 0..4_000 {
            let v = (v_best + draw(rng) * step).normalize();
            let s = score(&v);
            if s < s_best {
                v_best = v;
                s_best = s;
            } else {
                step *= 0.998;
            }
        }
        best = best.min(s_best);
    }
    best
}

fn check_branch(branch: Branch, seed: u64, draw: impl Fn(&mut ChaCha8Rng) -> ([f64; 3], bool)) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..CASES {
        let (eigs, orthogonal) = draw(&mut rng);
        let v = random_rotation(&mut rng);
        let lm = landmarks_for(eigs, &v);
        let policy = if orthogonal {
            let q = random_rotation(&mut rng);
            AxisPolicy::Orthogonal([q.column(0).into(), q.column(1).into(), q.column(2).into()])
        } else {
            AxisPolicy::Eigenbasis
        };
        let qset = build_transformation_set(&lm, 0.8 * std::f64::consts::PI, policy).unwrap();
        assert_eq!(qset.branch(), branch, "case {case}: eigenvalues {eigs:?}");
        let bound = gap_lower_bound(&lm.eigenvalues(), branch);
        let brute = brute_force(&lm.m(), qset.axes(), &mut rng);
        let lib = delta_m_star(&lm, &qset);
        assert!(brute >= bound - 1e-9 * bound.abs().max(1.0), "case {case}: brute {brute} < bound {bound}");
        assert!(lib >= bound - 1e-9 * bound.abs().max(1.0), "case {case}: library {lib} < bound {bound}");
        // the library value is the exact minimum; the search can only land above it
        assert!(brute >= lib - 1e-9 * lib.abs().max(1.0), "case {case}: search {brute} below library {lib}");
        assert!(brute - lib <= 1e-4 * lib.abs().max(1.0), "case {case}: library {lib} vs search {brute}");
    }
}

#[test]
fn bound_holds_with_all_eigenvalues_equal() {
    check_branch(Branch::EigenAllEqual, 1, |rng| {
        let l = rng.random_range(0.5..5.0);
        ([l; 3], false)
    });
}

#[test]
fn bound_holds_with_two_equal_eigenvalues() {
    check_branch(Branch::EigenTwoEqual, 2, |rng| {
        let a: f64 = rng.random_range(0.5..5.0);
        let mut b: f64 = rng.random_range(0.1..6.0);
        while (b - a).abs() < 0.05 {
            b = rng.random_range(0.1..6.0);
        }
        let mut e = [a, a, b];
        let k = rng.random_range(0..3);
        e.swap(2, k);
        (e, false)
    });
}

#[test]
fn bound_holds_with_distinct_eigenvalues() {
    check_branch(Branch::EigenDistinct, 3, |rng| loop {
        let e: [f64; 3] = [rng.random_range(0.1..6.0), rng.random_range(0.1..6.0), rng.random_range(0.1..6.0)];
        if (e[0] - e[1]).abs() > 0.05 && (e[1] - e[2]).abs() > 0.05 && (e[0] - e[2]).abs() > 0.05 {
            return (e, false);
        }
    });
}

#[test]
fn bound_holds_for_orthogonal_triples() {
    check_branch(Branch::OrthogonalTriple, 4, |rng| loop {
        let e: [f64; 3] = [rng.random_range(0.1..6.0), rng.random_range(0.1..6.0), rng.random_range(0.1..6.0)];
        let max = e.iter().copied().fold(0.0, f64::max);
        if e.iter().sum::<f64>() - 2.0 * max > 0.1 {
            return (e, true);
        }
    });
}

#[test]
fn bench_value_is_three() {
    let lm = hybrid_ins::simkit::bench_landmarks();
    let qset = build_transformation_set(&lm, 0.8 * std::f64::consts::PI, AxisPolicy::Eigenbasis).unwrap();
    assert_eq!(qset.branch(), Branch::EigenDistinct);
    assert!((delta_m_star(&lm, &qset) - 3.0).abs() < 1e-12);
    assert!((gap_lower_bound(&lm.eigenvalues(), qset.branch()) - 3.0).abs() < 1e-12);
}

#[test]
fn oracle_agrees_with_library_delta() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let v = random_rotation(&mut rng);
        let lm = landmarks_for([rng.random_range(0.1..5.0), rng.random_range(0.1..5.0), rng.random_range(0.1..5.0)], &v);
        let m = lm.m();
        let (_, vecs) = sorted_eigen(&m);
        let u: Vec3 = Rot3::exp(&Vec3::new(rng.random(), rng.random(), rng.random())).matrix().column(0).into();
        for e in &vecs {
            assert!((delta_m(&u, e, &m) - delta_oracle(&m, &u, e)).abs() < 1e-9);
        }
    }
}
