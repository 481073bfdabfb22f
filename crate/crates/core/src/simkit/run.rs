//! Run loops and their logs.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::landmarks::{mu_q, HybridGeometry};
use crate::liegroup::{Rot3, Vec3, SE23};
use crate::observers::{self, discrete_update, flow_step, jump, should_jump, ImuReading, Observation, ObserverConfig, ObserverState};
use crate::riccati::eig_bounds;

use super::scenario::{Mode, Scenario};

/// Truth at one instant, including the IMU biases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub x: SE23,
    pub b_omega: Vec3,
    pub b_accel: Vec3,
}

/// Error norms: `|R̃|_I`, `‖p-p̂‖`, `‖v-v̂‖`, `‖b_ω-b̂_ω‖`, `‖b_a-b̂_a‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub rot: f64,
    pub pos: f64,
    pub vel: f64,
    pub b_omega: f64,
    pub b_accel: f64,
}

impl ErrorNorms {
    pub fn between(truth: &TruthSample, est: &ObserverState) -> Self {
        ErrorNorms {
            rot: (truth.x.r * est.x.r.transpose()).distance(),
            pos: (truth.x.p - est.x.p).norm(),
            vel: (truth.x.v - est.x.v).norm(),
            b_omega: (truth.b_omega - est.b_omega).norm(),
            b_accel: (truth.b_accel - est.b_accel).norm(),
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.rot, self.pos, self.vel, self.b_omega, self.b_accel]
    }

    pub fn max(&self) -> f64 {
        self.as_array().into_iter().fold(0.0, f64::max)
    }
}

/// One logged instant. A jump produces two records at the same time: the
/// state before (with `jump_flag`) and after.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub state: ObserverState,
    pub truth: Option<TruthSample>,
    /// `μ_Q` at this instant, `NaN` when no landmark frame was available.
    pub mu_q: f64,
    pub jump_flag: bool,
}

impl LogRecord {
    pub fn t(&self) -> f64 {
        self.state.t
    }

    pub fn errors(&self) -> Option<ErrorNorms> {
        self.truth.as_ref().map(|tr| ErrorNorms::between(tr, &self.state))
    }
}

/// A jump event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    /// Jump counter before the jump.
    pub j: usize,
    pub axis: usize,
    pub mu_q: f64,
}

/// Result of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub records: Vec<LogRecord>,
    pub jumps: Vec<JumpEvent>,
    /// Extreme eigenvalues of the Riccati solution over the logged instants.
    pub p_bounds: Option<(f64, f64)>,
    /// Landmark frames that could not be used.
    pub skipped_frames: usize,
}

impl RunLog {
    fn new() -> Self {
        RunLog { records: Vec::new(), jumps: Vec::new(), p_bounds: None, skipped_frames: 0 }
    }

    fn push(&mut self, rec: LogRecord) {
        if let Some(p) = &rec.state.p {
            let (lo, hi) = eig_bounds(p);
            self.p_bounds = Some(match self.p_bounds {
                Some((a, b)) => (a.min(lo), b.max(hi)),
                None => (lo, hi),
            });
        }
        self.records.push(rec);
    }

    pub fn last(&self) -> &LogRecord {
        self.records.last().expect("a run log always holds the initial record")
    }

    pub fn final_errors(&self) -> Option<ErrorNorms> {
        self.last().errors()
    }

    /// Largest error norms over records with `t ≥ from`.
    pub fn max_errors_after(&self, from: f64) -> Option<ErrorNorms> {
        let mut out: Option<ErrorNorms> = None;
        for e in self.records.iter().filter(|r| r.t() >= from).filter_map(|r| r.errors()) {
            out = Some(match out {
                None => e,
                Some(o) => ErrorNorms {
                    rot: o.rot.max(e.rot),
                    pos: o.pos.max(e.pos),
                    vel: o.vel.max(e.vel),
                    b_omega: o.b_omega.max(e.b_omega),
                    b_accel: o.b_accel.max(e.b_accel),
                },
            });
        }
        out
    }
}

fn check_divergence(state: &ObserverState, truth: Option<&TruthSample>, threshold: f64) -> Result<()> {
    let size = match truth {
        Some(tr) => ErrorNorms::between(tr, state).max(),
        None => state.x.v.norm().max(state.x.p.norm()),
    };
    if !(size <= threshold) {
        return Err(Error::Divergence { t: state.t, what: format!("error norm {size:.3e} exceeds {threshold:.3e}") });
    }
    Ok(())
}

/// Applies jumps while the test fires, logging before/after pairs. At most
/// `|ℚ|` consecutive jumps are allowed at one instant.
fn jump_loop(
    state: &mut ObserverState,
    obs: Observation<'_>,
    truth: Option<TruthSample>,
    log: &mut RunLog,
) -> Result<bool> {
    let limit = obs.geometry.qset.len();
    let mut count = 0;
    while let Some(d) = should_jump(state, obs) {
        if count == limit {
            return Err(Error::JumpCycle { t: state.t, limit });
        }
        log.push(LogRecord { state: state.clone(), truth, mu_q: d.mu_q, jump_flag: true });
        log.jumps.push(JumpEvent { t: state.t, j: state.j, axis: d.index, mu_q: d.mu_q });
        *state = jump(state, obs.geometry, d.index);
        let after = mu_q(&state.x, obs.geometry, obs.ys);
        log.push(LogRecord { state: state.clone(), truth, mu_q: after, jump_flag: false });
        count += 1;
    }
    Ok(count > 0)
}

struct Noise {
    rng: ChaCha20Rng,
    gyro: Normal<f64>,
    accel: Normal<f64>,
    landmark: Normal<f64>,
}

impl Noise {
    fn new(sc: &Scenario) -> Self {
        let n = |var: f64| Normal::new(0.0, var.sqrt()).expect("variance validated");
        Noise {
            rng: ChaCha20Rng::seed_from_u64(sc.run.seed),
            gyro: n(sc.imu.gyro_noise_var),
            accel: n(sc.imu.accel_noise_var),
            landmark: n(sc.sensor.noise_var),
        }
    }

    fn vec(&mut self, which: fn(&Noise) -> Normal<f64>) -> Vec3 {
        let d = which(self);
        Vec3::new(d.sample(&mut self.rng), d.sample(&mut self.rng), d.sample(&mut self.rng))
    }

    fn imu(&mut self) -> (Vec3, Vec3) {
        (self.vec(|n| n.gyro), self.vec(|n| n.accel))
    }

    fn landmarks(&mut self, n: usize) -> Vec<Vec3> {
        (0..n).map(|_| self.vec(|n| n.landmark)).collect()
    }

    fn dropped(&mut self, p: f64) -> bool {
        p > 0.0 && self.rng.random::<f64>() < p
    }
}

fn clean_imu(sc: &Scenario, r: &Rot3, t: f64) -> ImuReading {
    ImuReading {
        omega: sc.trajectory.omega.at(t) + sc.imu.gyro_bias,
        accel: sc.trajectory.specific_force(r, t, &sc.observer.params.gravity) + sc.imu.accel_bias,
    }
}

fn clean_landmarks(sc: &Scenario, x: &SE23) -> Vec<Vec3> {
    let rt = x.r.transpose();
    sc.observer.geometry.landmarks.points().iter().map(|p| rt * (p - x.p)).collect()
}

fn truth_at(sc: &Scenario, r: Rot3, t: f64) -> TruthSample {
    TruthSample { t, x: sc.trajectory.pose(r, t), b_omega: sc.imu.gyro_bias, b_accel: sc.imu.accel_bias }
}

/// Simulates the scenario in its configured mode.
pub fn simulate(sc: &Scenario) -> Result<RunLog> {
    match sc.run.mode {
        Mode::Continuous => run_continuous(sc),
        Mode::Algorithm1 => run_algorithm1(sc),
    }
}

/// Continuous-time run. Truth attitude is integrated with ten RK4 substeps
/// per observer step; measurements are synthesized at every RK4 stage time,
/// with one noise draw held over each step. The jump test runs after each
/// step on the end-of-step measurements.
pub fn run_continuous(sc: &Scenario) -> Result<RunLog> {
    sc.validate()?;
    let cfg = &sc.observer;
    let dt = sc.run.dt;
    let n = (sc.run.duration / dt).round().max(1.0) as usize;
    let mut noise = Noise::new(sc);
    let mut r_true = sc.trajectory.r0;
    let mut truth = truth_at(sc, r_true, 0.0);
    let mut state = sc.initial.state(cfg, &truth.x, 0.0)?;
    let mut log = RunLog::new();
    let ys0 = clean_landmarks(sc, &truth.x);
    let mu0 = mu_q(&state.x, &cfg.geometry, &ys0);
    let jumped = cfg.params.hybrid
        && jump_loop(&mut state, Observation { geometry: &cfg.geometry, ys: &ys0 }, Some(truth), &mut log)?;
    if !jumped {
        log.push(LogRecord { state: state.clone(), truth: Some(truth), mu_q: mu0, jump_flag: false });
    }
    for k in 0..n {
        let t = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;
        let path = sc.trajectory.advance_attitude(&r_true, t, dt);
        let r_mid = path[path.len() / 2 - 1];
        let r_end = *path.last().unwrap();
        let stages = [(t, r_true), (t + 0.5 * dt, r_mid), (t1, r_end)];
        let (n_w, n_a) = noise.imu();
        let n_y = noise.landmarks(cfg.geometry.landmarks.len());
        let visible = !noise.dropped(sc.sensor.dropout);
        let sample = |s: f64| -> (ImuReading, Option<Vec<Vec3>>) {
            let (ts, r) = stages
                .iter()
                .min_by(|a, b| (a.0 - s).abs().total_cmp(&(b.0 - s).abs()))
                .copied()
                .unwrap();
            let mut imu = clean_imu(sc, &r, ts);
            imu.omega += n_w;
            imu.accel += n_a;
            let ys = visible.then(|| {
                let x = sc.trajectory.pose(r, ts);
                clean_landmarks(sc, &x).iter().zip(&n_y).map(|(y, e)| y + e).collect()
            });
            (imu, ys)
        };
        state = flow_step(cfg, &state, dt, sample)?;
        state.t = t1;
        r_true = r_end;
        truth = truth_at(sc, r_true, t1);
        let (_, ys_end) = sample(t1);
        let mut jumped = false;
        if let (true, Some(ys)) = (cfg.params.hybrid, ys_end.as_deref()) {
            jumped = jump_loop(&mut state, Observation { geometry: &cfg.geometry, ys }, Some(truth), &mut log)?;
        }
        check_divergence(&state, Some(&truth), sc.run.divergence_threshold)?;
        if !jumped && ((k + 1) % sc.run.log_every == 0 || k + 1 == n) {
            let m = ys_end.as_deref().map_or(f64::NAN, |ys| mu_q(&state.x, &cfg.geometry, ys));
            log.push(LogRecord { state: state.clone(), truth: Some(truth), mu_q: m, jump_flag: false });
        }
    }
    Ok(log)
}

/// IMU sample, held until the next one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    pub reading: ImuReading,
}

/// Landmark frame. `ids` index the configured landmark set.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub ids: Vec<usize>,
    pub ys: Vec<Vec3>,
}

/// Time-ordered sensor data for the multi-rate loop.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurementStream {
    pub imu: Vec<ImuSample>,
    pub frames: Vec<Frame>,
}

/// Samples the scenario at the IMU rate with landmark frames every
/// `imu_rate / landmark_rate` samples. Returns the stream and the truth at
/// every IMU sample.
pub fn synthesize_stream(sc: &Scenario) -> Result<(MeasurementStream, Vec<TruthSample>)> {
    sc.validate()?;
    let rate = sc.imu.rate_hz;
    let every = (rate / sc.sensor.rate_hz).round() as usize;
    let n = (sc.run.duration * rate).round() as usize;
    let nl = sc.observer.geometry.landmarks.len();
    let mut noise = Noise::new(sc);
    let mut stream = MeasurementStream::default();
    let mut truths = Vec::with_capacity(n + 1);
    let mut r = sc.trajectory.r0;
    for k in 0..=n {
        let t = k as f64 / rate;
        if k > 0 {
            let t0 = (k - 1) as f64 / rate;
            r = *sc.trajectory.advance_attitude(&r, t0, t - t0).last().unwrap();
        }
        let truth = truth_at(sc, r, t);
        let (n_w, n_a) = noise.imu();
        let mut reading = clean_imu(sc, &r, t);
        reading.omega += n_w;
        reading.accel += n_a;
        stream.imu.push(ImuSample { t, reading });
        if k % every == 0 {
            let n_y = noise.landmarks(nl);
            if !noise.dropped(sc.sensor.dropout) {
                let ys = clean_landmarks(sc, &truth.x).iter().zip(&n_y).map(|(y, e)| y + e).collect();
                stream.frames.push(Frame { t, ids: (0..nl).collect(), ys });
            }
        }
        truths.push(truth);
    }
    Ok((stream, truths))
}

/// Options for [`run_stream`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamOptions {
    pub log_every: usize,
    pub divergence_threshold: f64,
}

fn truth_lookup(truth: Option<&[TruthSample]>, t: f64) -> Option<TruthSample> {
    let tr = truth?;
    let i = tr.partition_point(|s| s.t < t - 1e-9);
    tr.get(i).filter(|s| (s.t - t).abs() <= 1e-9).copied()
}

/// Multi-rate loop over a measurement stream. Between events the estimate
/// is predicted with the latest IMU sample held constant, in steps no
/// longer than `max_dt`. At each frame: discrete correction, then the jump
/// test. Frames whose landmark subset is degenerate are skipped.
pub fn run_stream(
    cfg: &ObserverConfig,
    stream: &MeasurementStream,
    init: ObserverState,
    truth: Option<&[TruthSample]>,
    opts: StreamOptions,
) -> Result<RunLog> {
    if stream.imu.is_empty() {
        return Err(Error::InvalidArgument("measurement stream has no IMU samples".into()));
    }
    if stream.imu.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidArgument("IMU timestamps must be strictly increasing".into()));
    }
    if stream.frames.windows(2).any(|w| !(w[1].t >= w[0].t)) {
        return Err(Error::InvalidArgument("frame timestamps must be non-decreasing".into()));
    }
    let all: Vec<usize> = (0..cfg.geometry.landmarks.len()).collect();
    let mut cache: HashMap<Vec<usize>, Option<HybridGeometry>> = HashMap::new();
    let mut log = RunLog::new();
    let mut state = init;
    state.t = stream.imu[0].t;
    let mut fi = stream.frames.partition_point(|f| f.t < state.t);
    log.skipped_frames += fi;
    let max_dt = cfg.params.max_dt;

    let mut process = |state: &mut ObserverState, frame: &Frame, log: &mut RunLog| -> Result<(bool, f64)> {
        let geometry = if frame.ids == all {
            Some(&cfg.geometry)
        } else {
            cache
                .entry(frame.ids.clone())
                .or_insert_with(|| cfg.geometry_for(&frame.ids).ok())
                .as_ref()
        };
        let Some(geometry) = geometry else {
            log.skipped_frames += 1;
            return Ok((false, f64::NAN));
        };
        let obs = Observation { geometry, ys: &frame.ys };
        *state = discrete_update(cfg, state, obs)?;
        let tr = truth_lookup(truth, state.t);
        let jumped = if cfg.params.hybrid { jump_loop(state, obs, tr, log)? } else { false };
        Ok((jumped, mu_q(&state.x, geometry, &frame.ys)))
    };

    let propagate_to = |state: &mut ObserverState, target: f64, imu: &ImuReading| -> Result<()> {
        let span = target - state.t;
        if span <= 0.0 {
            return Ok(());
        }
        let n = (span / max_dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for _ in 0..n {
            *state = observers::propagate(cfg, state, h, imu)?;
        }
        state.t = target;
        Ok(())
    };

    let mut mu_now = f64::NAN;
    let mut jumped = false;
    while fi < stream.frames.len() && stream.frames[fi].t <= state.t {
        let (j, m) = process(&mut state, &stream.frames[fi], &mut log)?;
        jumped |= j;
        mu_now = m;
        fi += 1;
    }
    if !jumped {
        log.push(LogRecord { state: state.clone(), truth: truth_lookup(truth, state.t), mu_q: mu_now, jump_flag: false });
    }
    let n = stream.imu.len();
    for k in 0..n - 1 {
        let reading = stream.imu[k].reading;
        let t_next = stream.imu[k + 1].t;
        let mut jumped = false;
        let mut mu_now = f64::NAN;
        while fi < stream.frames.len() && stream.frames[fi].t < t_next {
            propagate_to(&mut state, stream.frames[fi].t, &reading)?;
            let _ = process(&mut state, &stream.frames[fi], &mut log)?;
            fi += 1;
        }
        propagate_to(&mut state, t_next, &reading)?;
        while fi < stream.frames.len() && stream.frames[fi].t <= t_next {
            let (j, m) = process(&mut state, &stream.frames[fi], &mut log)?;
            jumped |= j;
            mu_now = m;
            fi += 1;
        }
        let tr = truth_lookup(truth, t_next);
        check_divergence(&state, tr.as_ref(), opts.divergence_threshold)?;
        if !jumped && ((k + 1) % opts.log_every == 0 || k + 2 == n) {
            log.push(LogRecord { state: state.clone(), truth: tr, mu_q: mu_now, jump_flag: false });
        }
    }
    log.skipped_frames += stream.frames.len() - fi;
    Ok(log)
}

/// Synthesizes the scenario's stream and runs the multi-rate loop on it.
pub fn run_algorithm1(sc: &Scenario) -> Result<RunLog> {
    let (stream, truths) = synthesize_stream(sc)?;
    let init = sc.initial.state(&sc.observer, &truths[0].x, truths[0].t)?;
    run_stream(
        &sc.observer,
        &stream,
        init,
        Some(&truths),
        StreamOptions { log_every: sc.run.log_every, divergence_threshold: sc.run.divergence_threshold },
    )
}
