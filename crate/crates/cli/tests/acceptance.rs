//! Acceptance run: one PASS/FAIL line per criterion. The detailed suites
//! live next to each module; this target re-checks every criterion end to
//! end and reports the measured numbers.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use hybrid_ins::landmarks::*;
use hybrid_ins::liegroup::*;
use hybrid_ins::observers::*;
use hybrid_ins::riccati::*;
use hybrid_ins::simkit::lyapunov::*;
use hybrid_ins::simkit::*;
use hybrid_ins_cli::csvio::{emit_estimates, parse_estimates, EstimateRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn run(sc: &Scenario) -> Result<(RunLog, f64), String> {
    let start = Instant::now();
    let log = simulate(sc).map_err(|e| e.to_string())?;
    Ok((log, start.elapsed().as_secs_f64()))
}

fn rms_after(log: &RunLog, from: f64) -> [f64; 5] {
    let errs: Vec<[f64; 5]> = log.records.iter().filter(|r| r.t() >= from).map(|r| r.errors().unwrap().as_array()).collect();
    let mut out = [0.0; 5];
    for e in &errs {
        for i in 0..5 {
            out[i] += e[i] * e[i] / errs.len() as f64;
        }
    }
    out.map(f64::sqrt)
}

fn rotation(rng: &mut ChaCha8Rng) -> Rot3 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n < 1.0 {
            let v = Vec3::new(q[1], q[2], q[3]) / n;
            let angle = 2.0 * v.norm().atan2(q[0] / n);
            return if v.norm() < 1e-12 { Rot3::identity() } else { Rot3::from_angle_axis(angle, &v.normalize()).unwrap() };
        }
    }
}

fn vec3(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for variant in [Variant::FixedGainGyroBias, Variant::RiccatiGainGyroBias] {
        let (log, secs) = run(&reference_scenario(variant, false))?;
        let e = log.final_errors().unwrap();
        ensure!(e.rot < 1e-3 && e.pos < 1e-2 && e.b_omega < 1e-3, "{}: final errors {e:?}", variant.name());
        ensure!(secs < 10.0, "{}: {secs:.1} s", variant.name());

        let noisy = reference_scenario(variant, true);
        let mut clean_start = noisy.clone();
        clean_start.initial = InitialEstimate {
            pose: PoseInit::Error(ErrorCoords { r: Rot3::identity(), v: Vec3::zeros(), p: Vec3::zeros(), p_e: Vec3::zeros() }),
            b_omega: noisy.imu.gyro_bias,
            b_accel: noisy.imu.accel_bias,
        };
        let (log, secs_n) = run(&noisy)?;
        let (floor_log, _) = run(&clean_start)?;
        let (steady, floor) = (rms_after(&log, 20.0), rms_after(&floor_log, 20.0));
        let worst = (0..4).map(|i| steady[i] / floor[i]).fold(0.0, f64::max);
        ensure!(worst < 10.0, "{}: steady/floor ratio {worst:.2}", variant.name());
        ensure!(secs_n < 10.0, "{}: noisy run {secs_n:.1} s", variant.name());
        notes.push(format!("{} rot {:.1e}, worst noise ratio {worst:.2}, {secs:.2} s", variant.name(), e.rot));
    }
    Ok(notes.join("; "))
}

fn criterion_2() -> Outcome {
    let mut sc = reference_scenario(Variant::RiccatiGainFullBias, false);
    sc.run.duration = 40.0;
    let (log, _) = run(&sc)?;
    let e = log.final_errors().unwrap();
    ensure!(e.max() < 1e-2, "final errors {e:?}");
    Ok(format!("max final error {:.1e} at 40 s", e.max()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let base = reference_scenario(Variant::FixedGain, false);
    let bound = jump_bound(&base.observer);
    let mut most = 0;
    for case in 0..50 {
        let mut sc = base.clone();
        sc.run.duration = 5.0;
        let r = rotation(&mut rng);
        sc.initial.pose = PoseInit::Error(ErrorCoords { r, v: Vec3::zeros(), p: Vec3::zeros(), p_e: Vec3::zeros() });
        let (log, _) = run(&sc)?;
        ensure!(log.jumps.len() <= bound, "case {case}: {} jumps > {bound}", log.jumps.len());
        most = most.max(log.jumps.len());
    }
    let bench = ObserverConfig::new(ObserverParams::new(Variant::FixedGain), bench_landmarks()).map_err(|e| e.to_string())?;
    ensure!(jump_bound(&bench) == 7, "bench bound {}", jump_bound(&bench));
    Ok(format!("at most {most} jumps, bound {bound}; bench bound 7"))
}

fn lyapunov_ok(cfg: &ObserverConfig, log: &RunLog) -> Result<DecayFit, String> {
    let params = admissible_params(cfg, log).map_err(|e| e.to_string())?;
    let l = lyapunov_series(cfg, log, &params).map_err(|e| e.to_string())?;
    let delta = cfg.geometry.gap.delta;
    for i in 0..l.len() - 1 {
        let t = log.records[i].t();
        if log.records[i].jump_flag {
            ensure!(l[i] - l[i + 1] >= delta * (1.0 - 1e-6), "jump at {t}: drop {} < {delta}", l[i] - l[i + 1]);
        } else {
            ensure!(l[i + 1] <= l[i] + 1e-6 * l[0], "flow at {t}: {} -> {}", l[i], l[i + 1]);
        }
    }
    let fit = post_jump_decay(log, &l, 1e-10).ok_or("no decay segment")?;
    ensure!(fit.slope < 0.0 && fit.r_squared > 0.99, "fit {fit:?}");
    Ok(fit)
}

fn criterion_4() -> Outcome {
    let mut sc = reference_scenario(Variant::FixedGain, false);
    sc.run.duration = 20.0;
    let (log, _) = run(&sc)?;
    let fit = lyapunov_ok(&sc.observer, &log)?;
    Ok(format!("{} jump(s), decay slope {:.3}, R² {:.4}", log.jumps.len(), fit.slope, fit.r_squared))
}

fn criterion_5() -> Outcome {
    let hover = |hybrid: bool| {
        let mut params = ObserverParams::new(Variant::FixedGain);
        params.hybrid = hybrid;
        let mut sc = reference_scenario(Variant::FixedGain, false);
        sc.trajectory = Trajectory { path: hybrid_ins::simkit::Path::Hover { position: Vec3::zeros() }, omega: AngularRate::constant(Vec3::zeros()), r0: Rot3::identity() };
        sc.observer = ObserverConfig::new(params, bench_landmarks()).unwrap();
        sc.imu.rate_hz = 1000.0;
        sc.sensor.rate_hz = 1000.0;
        sc.run.duration = 20.0;
        sc
    };
    let points = undesired_equilibria(&hover(false).observer);
    ensure!(!points.is_empty() && points.len() <= 3, "{} points", points.len());
    let mut worst: f64 = 0.0;
    for (k, eq) in points.iter().enumerate() {
        let mut sc = hover(false);
        sc.initial.pose = PoseInit::Error(*eq);
        let (log, _) = run(&sc)?;
        ensure!(log.jumps.is_empty(), "point {k}: continuous observer jumped");
        let p_c = sc.observer.geometry.landmarks.p_c();
        for r in &log.records {
            let e = ErrorCoords::between(&r.truth.unwrap().x, &r.state.x, &p_c);
            let d = (e.r.matrix() - eq.r.matrix()).amax().max((e.v - eq.v).amax()).max((e.p_e - eq.p_e).amax());
            worst = worst.max(d);
        }
        ensure!(worst < 1e-6, "point {k}: drift {worst:e}");
        let mut sc = hover(true);
        sc.initial.pose = PoseInit::Error(*eq);
        let (log, _) = run(&sc)?;
        ensure!(log.jumps.first().is_some_and(|j| j.t == 0.0), "point {k}: no jump at t = 0");
        lyapunov_ok(&sc.observer, &log).map_err(|e| format!("point {k}: {e}"))?;
    }
    Ok(format!("{} points, continuous drift {worst:.1e}, hybrid jumps at t = 0", points.len()))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for variant in Variant::ALL {
        let cfg = ObserverConfig::new(reference_params(variant), reference_landmarks()).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let truth = SE23::new(rotation(&mut rng), vec3(&mut rng, 10.0), vec3(&mut rng, 10.0));
            let r_hat = rotation(&mut rng);
            let imu = ImuReading { omega: vec3(&mut rng, 2.0), accel: vec3(&mut rng, 10.0) };
            let ys: Vec<Vec3> = cfg.geometry.landmarks.points().iter().map(|p| truth.r.transpose() * (p - truth.p)).collect();
            let r_tilde_dot = |est: SE23| {
                let state = ObserverState::new(&cfg, 0.0, est, Vec3::zeros(), Vec3::zeros());
                let d = flow_derivative(&cfg, 0.0, &FlowVars::from_state(&state), &imu, Some(Observation { geometry: &cfg.geometry, ys: &ys }));
                truth.r.matrix() * hat(&imu.omega) * est.r.matrix().transpose() + truth.r.matrix() * d.r.transpose()
            };
            let base = r_tilde_dot(SE23::new(r_hat, truth.v, truth.p));
            let moved = r_tilde_dot(SE23::new(r_hat, truth.v + vec3(&mut rng, 20.0), truth.p + vec3(&mut rng, 20.0)));
            worst = worst.max((moved - base).amax());
        }
    }
    ensure!(worst < 1e-9, "difference {worst:e}");
    Ok(format!("max difference {worst:.1e} over {} variants", Variant::ALL.len()))
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    for variant in [Variant::RiccatiGain, Variant::RiccatiGainGyroBias, Variant::RiccatiGainFullBias] {
        let mut sc = reference_scenario(variant, false);
        sc.run.duration = 100.0;
        sc.run.log_every = 100;
        let (log, _) = run(&sc)?;
        for r in &log.records {
            let p = r.state.p.as_ref().unwrap();
            ensure!((p - p.transpose()).amax() <= 1e-12 * p.amax(), "{}: asymmetric at {}", variant.name(), r.t());
            check_pd(p, r.t()).map_err(|e| e.to_string())?;
        }
        let (lo, hi) = log.p_bounds.ok_or("no P bounds")?;
        ensure!(lo > 0.0 && hi.is_finite(), "bounds ({lo}, {hi})");
        notes.push(format!("{} p_m {lo:.3e} p_M {hi:.3e}", variant.name()));
    }
    let omega = |t: f64| Vec3::new(0.8 + 0.3 * (1.3 * t).sin(), -0.4 * (0.7 * t).cos(), 0.1 + 0.2 * t.sin());
    let fac = transition_factorized(omega, 4.0, 0.5, 2000);
    let dir = transition_direct(|s| CreVariant::NoBias6.a_matrix(&omega(s)), 6, 4.0, 0.5, 2000);
    let rel = (&fac - &dir).norm() / dir.norm();
    ensure!(rel < 1e-6, "transition difference {rel:e}");
    for cv in [CreVariant::NoBias6, CreVariant::GyroBias6, CreVariant::FullBias9] {
        let l = gramian_min_eig(cv, omega, 2.0, 1.0).map_err(|e| e.to_string())?;
        ensure!(l > 0.0, "{cv:?}: Gramian λ_min {l}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = observability_det(&vec3(&mut rng, 10.0), &vec3(&mut rng, 10.0), &vec3(&mut rng, 1.0), &vec3(&mut rng, 1.0));
        worst = worst.max((d - 1.0).abs());
    }
    ensure!(worst < 1e-9, "det deviation {worst:e}");
    notes.push(format!("transition {rel:.1e}, det deviation {worst:.1e}"));
    Ok(notes.join("; "))
}

/// `Δ_M(u, v)` minimized over unit `v` in each eigenspace by random search,
/// maximized over the axes.
fn searched_delta_star(lm: &LandmarkSet, axes: &[Vec3], rng: &mut ChaCha8Rng) -> f64 {
    let m = lm.m();
    let eig = m.symmetric_eigen();
    let delta = |u: &Vec3, v: &Vec3| {
        let lv = (v.transpose() * m * v)[0];
        m.trace() - 2.0 * lv - (u.transpose() * m * u)[0] + 2.0 * lv * u.dot(v).powi(2)
    };
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let same: Vec<Vec3> = (0..3)
            .filter(|j| (eig.eigenvalues[*j] - eig.eigenvalues[i]).abs() < 1e-9)
            .map(|j| eig.eigenvectors.column(j).into_owned())
            .collect();
        for k in 0..2000 {
            let v = if k == 0 { same[0] } else { same.iter().map(|b| b * rng.random_range(-1.0..1.0)).sum::<Vec3>() };
            if v.norm() < 1e-6 {
                continue;
            }
            let v = v.normalize();
            best = best.min(axes.iter().map(|u| delta(u, &v)).fold(f64::NEG_INFINITY, f64::max));
            if same.len() == 1 {
                break;
            }
        }
    }
    best
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tightest = f64::INFINITY;
    for branch in [Branch::EigenAllEqual, Branch::EigenTwoEqual, Branch::EigenDistinct, Branch::OrthogonalTriple] {
        let mut n = 0;
        while n < 100 {
            let a: f64 = rng.random_range(0.2..5.0);
            let eigs = match branch {
                Branch::EigenAllEqual => [a; 3],
                Branch::EigenTwoEqual => [a, a, rng.random_range(0.2..5.0)],
                _ => std::array::from_fn(|_| rng.random_range(0.2..5.0)),
            };
            let v = rotation(&mut rng);
            let pts: Vec<Vec3> = (0..6).map(|i| v.matrix().column(i / 2).into_owned() * (eigs[i / 2] / 2.0).sqrt() * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let lm = LandmarkSet::new(pts, vec![1.0; 6]).map_err(|e| e.to_string())?;
            let policy = if branch == Branch::OrthogonalTriple {
                let q = rotation(&mut rng);
                AxisPolicy::Orthogonal([q.matrix().column(0).into(), q.matrix().column(1).into(), q.matrix().column(2).into()])
            } else {
                AxisPolicy::Eigenbasis
            };
            let Ok(qset) = build_transformation_set(&lm, 0.8 * PI, policy) else { continue };
            if qset.branch() != branch {
                continue;
            }
            let bound = gap_lower_bound(&lm.eigenvalues(), branch);
            let searched = searched_delta_star(&lm, qset.axes(), &mut rng);
            ensure!(searched >= bound - 1e-9, "{branch:?}: searched {searched} < bound {bound}");
            tightest = tightest.min(searched - bound);
            n += 1;
        }
    }
    let lm = bench_landmarks();
    let qset = build_transformation_set(&lm, 0.8 * PI, AxisPolicy::Eigenbasis).map_err(|e| e.to_string())?;
    let bench = delta_m_star(&lm, &qset);
    ensure!((bench - 3.0).abs() < 1e-12, "bench Δ*_M = {bench}");
    Ok(format!("400 cases, smallest margin over the bound {tightest:.1e}; bench Δ*_M = {bench}"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let a = SE23::new(rotation(&mut rng), vec3(&mut rng, 20.0), vec3(&mut rng, 20.0));
        let b = SE23::new(rotation(&mut rng), vec3(&mut rng, 20.0), vec3(&mut rng, 20.0));
        let scale = a.matrix().amax().max(b.matrix().amax());
        worst = worst.max(((a * b).matrix() - a.matrix() * b.matrix()).amax() / scale / scale);
        worst = worst.max(((a * a.inverse()).matrix() - Mat5::identity()).amax() / scale);
        let w = vec3(&mut rng, 10.0);
        let w = if w.norm() > 10.0 { w.normalize() * 10.0 } else { w };
        let u = Tangent::new(w, vec3(&mut rng, 10.0), vec3(&mut rng, 10.0));
        let x = exp_se23(&u);
        let r = x.r.matrix();
        worst = worst.max((r.transpose() * r - Mat3::identity()).amax()).max((r.determinant() - 1.0).abs());
        let c = vec3(&mut rng, 5.0);
        worst = worst.max((hat(&w) * c - w.cross(&c)).amax() / 50.0);
        let ad = adjoint(&a, &u).matrix();
        let conj = a.matrix() * u.matrix() * a.inverse().matrix();
        worst = worst.max((ad - conj).amax() / conj.amax().max(1.0));
    }
    ensure!(worst < 1e-9, "worst relative defect {worst:e}");
    Ok(format!("worst relative defect {worst:.1e} on 2000 samples"))
}

fn bin(args: &[&std::ffi::OsStr]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_hybrid-ins")).args(args).output().map_err(|e| e.to_string())?;
    ensure!(o.status.success(), "{:?} failed: {}", args, String::from_utf8_lossy(&o.stderr));
    Ok(())
}

fn criterion_10() -> Outcome {
    let sc = reference_scenario(Variant::RiccatiGainGyroBias, false);
    let mut sc = sc;
    sc.run.duration = 3.0;
    let log = simulate(&sc).map_err(|e| e.to_string())?;
    let rows: Vec<EstimateRow> = log.records.iter().map(EstimateRow::from_record).collect();
    let text = emit_estimates(&rows);
    let back = parse_estimates(&text).map_err(|e| e.to_string())?;
    ensure!(back == rows && emit_estimates(&back) == text, "estimate CSV does not round trip");

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/multirate.scenario");
    let noisy = std::fs::read_to_string(&scenario)
        .map_err(|e| e.to_string())?
        .replace("gyro_noise_var = 0.0", "gyro_noise_var = 0.4")
        .replace("accel_noise_var = 0.0", "accel_noise_var = 0.1")
        .replace("duration = 60.0", "duration = 20.0");
    let cfg = tmp.path().join("noisy.scenario");
    std::fs::write(&cfg, noisy).map_err(|e| e.to_string())?;
    let os = |s: &str| std::ffi::OsString::from(s);
    let dirs: Vec<_> = ["a", "b", "replay"].iter().map(|d| tmp.path().join(d)).collect();
    for d in &dirs[..2] {
        bin(&[&os("simulate"), cfg.as_os_str(), &os("--out"), d.as_os_str(), &os("--seed"), &os("42")])?;
    }
    for f in ["estimates.csv", "summary.json", "bundle/imu.csv", "bundle/landmark_obs.csv"] {
        let (a, b) = (std::fs::read(dirs[0].join(f)), std::fs::read(dirs[1].join(f)));
        ensure!(a.is_ok() && a.ok() == b.ok(), "{f} differs between seeded runs");
    }
    bin(&[&os("replay"), dirs[0].join("bundle").as_os_str(), &os("--config"), cfg.as_os_str(), &os("--out"), dirs[2].as_os_str()])?;
    let read = |d: &Path| parse_estimates(&std::fs::read_to_string(d.join("estimates.csv")).unwrap()).unwrap();
    let (sim, rep) = (read(&dirs[0]), read(&dirs[2]));
    ensure!(sim.len() == rep.len(), "{} vs {} rows", sim.len(), rep.len());
    let mut worst: f64 = 0.0;
    for (a, b) in sim.iter().zip(&rep) {
        let xa = a.q.iter().chain(&a.p).chain(&a.v).chain(&a.b_omega).chain(&a.b_accel);
        let xb = b.q.iter().chain(&b.p).chain(&b.v).chain(&b.b_omega).chain(&b.b_accel);
        worst = xa.zip(xb).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
    }
    ensure!(worst < 1e-6, "replay differs by {worst:e}");
    Ok(format!("{} rows exact; replay difference {worst:.1e}; seeded outputs byte-identical", rows.len()))
}

#[test]
fn acceptance() {
    let checks: [fn() -> Outcome; 10] = [
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
        criterion_9, criterion_10,
    ];
    let outcomes: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = checks.iter().map(|c| s.spawn(move || catch_unwind(AssertUnwindSafe(c)))).collect();
        handles
            .into_iter()
            .map(|h| match h.join().unwrap() {
                Ok(o) => o,
                Err(p) => Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())),
            })
            .collect()
    });
    let mut failed = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        match o {
            Ok(detail) => println!("criterion {:>2}: PASS ({detail})", i + 1),
            Err(why) => {
                println!("criterion {:>2}: FAIL ({why})", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
