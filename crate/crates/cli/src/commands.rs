//! The three subcommands. Each builds all of its output in memory and only
//! touches the output directory once the run has succeeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hybrid_ins::landmarks::Branch;
use hybrid_ins::observers::ObserverConfig;
use hybrid_ins::riccati::{gramian_min_eig, observability_det, CreVariant};
use hybrid_ins::simkit::lyapunov::{admissible_params, jump_bound, lyapunov_series, mu_limit, post_jump_decay};
use hybrid_ins::simkit::{
    bench_landmarks, run_continuous, run_stream, synthesize_stream, Mode, RunLog, StreamOptions, TruthSample,
};
use hybrid_ins::liegroup::Vec3;
use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::csvio::{self, EstimateRow};
use crate::error::CliError;
use crate::schema::{ModeName, ScenarioFile};

pub const ESTIMATES_FILE: &str = "estimates.csv";
pub const SUMMARY_FILE: &str = "summary.json";
/// Subdirectory of a multi-rate simulate output holding the replay bundle.
pub const BUNDLE_DIR: &str = "bundle";

/// `𝓛` values below this fraction of the post-jump start are treated as
/// numerical floor and left out of the decay fit.
const DECAY_FIT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ErrorSummary {
    pub rot: f64,
    pub pos: f64,
    pub vel: f64,
    pub b_omega: f64,
    pub b_accel: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct JumpSummary {
    pub t: f64,
    pub j: usize,
    pub axis: usize,
    pub mu_q: f64,
}

/// Run summary written as `summary.json`. Contains no timing data, so it is
/// reproducible byte for byte.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub command: String,
    pub config_hash: String,
    pub variant: String,
    pub mode: String,
    pub seed: Option<u64>,
    pub records: usize,
    pub t_final: f64,
    pub jump_count: usize,
    pub jump_bound: usize,
    pub jumps: Vec<JumpSummary>,
    pub final_errors: Option<ErrorSummary>,
    /// Slope of `ln 𝓛` after the last jump.
    pub decay_rate: Option<f64>,
    pub decay_r_squared: Option<f64>,
    /// `[p_m, p_M]`, extreme eigenvalues of the Riccati solution.
    pub p_bounds: Option<[f64; 2]>,
    pub skipped_frames: usize,
    pub warnings: Vec<String>,
}

impl Summary {
    fn new(command: &str, hash: String, cfg: &ObserverConfig, mode: Mode, seed: Option<u64>, log: &RunLog) -> Self {
        let last = log.last();
        let final_errors = log.final_errors().map(|e| ErrorSummary {
            rot: e.rot,
            pos: e.pos,
            vel: e.vel,
            b_omega: e.b_omega,
            b_accel: e.b_accel,
        });
        let fit = if last.truth.is_some() {
            admissible_params(cfg, log)
                .and_then(|p| lyapunov_series(cfg, log, &p))
                .ok()
                .and_then(|series| post_jump_decay(log, &series, DECAY_FIT_FLOOR))
        } else {
            None
        };
        Summary {
            command: command.to_string(),
            config_hash: hash,
            variant: cfg.params.variant.name().to_string(),
            mode: mode.name().to_string(),
            seed,
            records: log.records.len(),
            t_final: last.t(),
            jump_count: log.jumps.len(),
            jump_bound: jump_bound(cfg),
            jumps: log.jumps.iter().map(|j| JumpSummary { t: j.t, j: j.j, axis: j.axis, mu_q: j.mu_q }).collect(),
            final_errors,
            decay_rate: fit.map(|f| f.slope),
            decay_r_squared: fit.map(|f| f.r_squared),
            p_bounds: log.p_bounds.map(|(a, b)| [a, b]),
            skipped_frames: log.skipped_frames,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }
}

/// Files produced by a command, relative to its output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub files: Vec<(PathBuf, String)>,
    pub summary: Summary,
}

impl Output {
    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        for (rel, text) in &self.files {
            let path = out.join(rel);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// SHA-256 over the canonical JSON form of the parsed configuration, so
/// formatting and comments do not change it.
pub fn config_hash(file: &ScenarioFile) -> String {
    let canonical = serde_json::to_string(file).expect("scenario serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn estimates(log: &RunLog) -> String {
    let rows: Vec<EstimateRow> = log.records.iter().map(EstimateRow::from_record).collect();
    csvio::emit_estimates(&rows)
}

/// Options of `simulate` that override the scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimulateOptions {
    pub mode: Option<ModeName>,
    pub seed: Option<u64>,
}

pub fn simulate(scenario: &Path, opts: SimulateOptions) -> Result<Output, CliError> {
    let mut file = ScenarioFile::parse(&read_text(scenario)?)?;
    if let Some(run) = file.run.as_mut() {
        if let Some(m) = opts.mode {
            run.mode = m;
        }
        if let Some(s) = opts.seed {
            run.seed = s;
        }
    }
    let hash = config_hash(&file);
    let sc = file.scenario()?;
    info!("simulating {} ({}, {})", scenario.display(), sc.observer.params.variant.name(), sc.run.mode.name());
    let mut files = Vec::new();
    let log = match sc.run.mode {
        Mode::Continuous => run_continuous(&sc)?,
        Mode::Algorithm1 => {
            let (stream, truths) = synthesize_stream(&sc)?;
            let init = sc.initial.state(&sc.observer, &truths[0].x, truths[0].t)?;
            let opts = StreamOptions { log_every: sc.run.log_every, divergence_threshold: sc.run.divergence_threshold };
            let log = run_stream(&sc.observer, &stream, init, Some(&truths), opts)?;
            for (name, text) in csvio::emit_bundle(&stream, &sc.observer.geometry.landmarks, Some(&truths)) {
                files.push((Path::new(BUNDLE_DIR).join(name), text));
            }
            log
        }
    };
    let mut summary = Summary::new("simulate", hash, &sc.observer, sc.run.mode, Some(sc.run.seed), &log);
    if log.skipped_frames > 0 {
        summary.warnings.push(format!("{} landmark frame(s) skipped", log.skipped_frames));
    }
    files.insert(0, (PathBuf::from(ESTIMATES_FILE), estimates(&log)));
    files.insert(1, (PathBuf::from(SUMMARY_FILE), summary.to_json()));
    Ok(Output { files, summary })
}

fn truth_at(truth: Option<&[TruthSample]>, t: f64) -> Option<TruthSample> {
    truth?.iter().find(|s| (s.t - t).abs() <= 1e-9).copied()
}

pub fn replay(bundle: &Path, config: &Path) -> Result<Output, CliError> {
    let file = ScenarioFile::parse(&read_text(config)?)?;
    let hash = config_hash(&file);
    let data = csvio::read_bundle(bundle)?;
    let mut warnings = data.warnings.clone();
    // Without any landmarks the jump geometry is never consulted; a
    // placeholder set keeps the configuration well-formed for dead reckoning.
    let landmarks = match data.landmarks.clone() {
        Some(l) => l,
        None => {
            warnings.push(format!("{} lists no landmarks", csvio::LANDMARKS_FILE));
            bench_landmarks()
        }
    };
    let cfg = file.observer_config(landmarks)?;
    let run = file.run_spec();
    let t0 = data.stream.imu[0].t;
    let truth = data.truth.as_deref();
    let x_ref = truth_at(truth, t0).map_or_else(hybrid_ins::liegroup::SE23::identity, |s| s.x);
    let init = file.initial_estimate()?.state(&cfg, &x_ref, t0)?;
    let opts = StreamOptions { log_every: run.log_every, divergence_threshold: run.divergence_threshold };
    let log = run_stream(&cfg, &data.stream, init, truth, opts)?;
    for w in &warnings {
        warn!("{w}");
    }
    let mut summary = Summary::new("replay", hash, &cfg, Mode::Algorithm1, None, &log);
    summary.warnings = warnings;
    if log.skipped_frames > 0 {
        summary.warnings.push(format!("{} landmark frame(s) skipped", log.skipped_frames));
    }
    let files = vec![
        (PathBuf::from(ESTIMATES_FILE), estimates(&log)),
        (PathBuf::from(SUMMARY_FILE), summary.to_json()),
    ];
    Ok(Output { files, summary })
}

const GRAMIAN_WINDOW: f64 = 1.0;
const SPOT_CHECK_TIMES: [f64; 5] = [0.0, 0.7, 1.9, 3.1, 8.3];

fn branch_text(b: Branch) -> &'static str {
    match b {
        Branch::EigenAllEqual => "eigenbasis axes, all eigenvalues equal: bound 2λ/3",
        Branch::EigenTwoEqual => "eigenbasis axes, two equal eigenvalues: bound min{2λ_pair, λ_single}",
        Branch::EigenDistinct => "eigenbasis axes, distinct eigenvalues: bound tr(M) - λ_max",
        Branch::OrthogonalTriple => "orthogonal axes: bound 2(tr(M) - 2λ_max)/3",
    }
}

fn v3(v: &Vec3) -> String {
    format!("[{:.6}, {:.6}, {:.6}]", v.x, v.y, v.z)
}

/// Human-readable report on landmark geometry, jump parameters and
/// observability for a scenario.
pub fn diagnose(scenario: &Path) -> Result<String, CliError> {
    let file = ScenarioFile::parse(&read_text(scenario)?)?;
    let landmarks = file.landmark_set()?;
    let cfg = file.observer_config(landmarks)?;
    let g = &cfg.geometry;
    let lm = &g.landmarks;
    let mut s = String::new();
    let eig = lm.eigenvalues();
    let vecs = lm.eigenvectors();
    let _ = writeln!(s, "landmarks: {}", lm.len());
    let _ = writeln!(s, "k_c: {:.6}", lm.k_c());
    let _ = writeln!(s, "p_c: {}", v3(&lm.p_c()));
    let _ = writeln!(s, "M eigenvalues: [{:.9}, {:.9}, {:.9}]", eig[0], eig[1], eig[2]);
    for (i, u) in vecs.iter().enumerate() {
        let _ = writeln!(s, "  u{}: {}", i + 1, v3(u));
    }
    let _ = writeln!(s, "branch: {}", branch_text(g.qset.branch()));
    let _ = writeln!(s, "theta: {:.6} pi", g.qset.theta() / std::f64::consts::PI);
    let _ = writeln!(s, "lower bound on Delta*_M: {:.9}", g.gap.lower_bound);
    let _ = writeln!(s, "Delta*_M: {:.9}", g.gap.delta_m_star);
    let _ = writeln!(s, "delta_max = (1 - cos theta) Delta*_M: {:.9}", g.gap.delta_max);
    let _ = writeln!(s, "recommended delta range: (0, {:.9})", g.gap.delta_max);
    let _ = writeln!(s, "delta: {:.9}", g.gap.delta);
    let _ = writeln!(s, "jump bound: {}", jump_bound(&cfg));
    let _ = writeln!(s, "mu limit: {:.6}", mu_limit(lm.k_c(), cfg.params.k_p, cfg.params.k_v));

    let traj = file.trajectory.as_ref().map(|_| file.trajectory()).transpose()?;
    let omega = |t: f64| traj.as_ref().map_or_else(Vec3::zeros, |tr| tr.omega.at(t));
    let omega_dot = |t: f64| traj.as_ref().map_or_else(Vec3::zeros, |tr| tr.omega.derivative(t));
    let _ = writeln!(s, "Gramian lambda_min over a {GRAMIAN_WINDOW} s window:");
    for (name, cv) in [
        ("riccati-gain", CreVariant::NoBias6),
        ("riccati-gain-gyro-bias", CreVariant::GyroBias6),
        ("riccati-gain-full-bias", CreVariant::FullBias9),
    ] {
        let mins: Vec<f64> = SPOT_CHECK_TIMES
            .iter()
            .map(|&t| gramian_min_eig(cv, omega, t, GRAMIAN_WINDOW))
            .collect::<Result<_, _>>()?;
        let lo = mins.iter().copied().fold(f64::INFINITY, f64::min);
        let _ = writeln!(s, "  {name}: {lo:.6e}");
    }
    let _ = writeln!(s, "det of the observability matrix (b_omega = 0):");
    for &t in &SPOT_CHECK_TIMES {
        let d = observability_det(&omega(t), &omega_dot(t), &Vec3::zeros(), &Vec3::zeros());
        let _ = writeln!(s, "  t = {t}: {d:.12}");
    }
    Ok(s)
}
