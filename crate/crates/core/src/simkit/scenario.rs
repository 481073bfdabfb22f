//! Scenario description and the reference configurations.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::landmarks::LandmarkSet;
use crate::liegroup::{Rot3, Vec3, SE23};
use crate::observers::{ErrorCoords, ObserverConfig, ObserverParams, ObserverState, RiccatiSettings, Variant};
use crate::riccati::CreVariant;

use super::trajectory::{AngularRate, Path, Trajectory};

/// How the run loop consumes measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Continuous flows with measurements available at every integration
    /// stage, jump test after every step.
    Continuous,
    /// Multi-rate loop: open-loop prediction between landmark frames,
    /// discrete correction and jump test at each frame.
    Algorithm1,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Continuous => "continuous",
            Mode::Algorithm1 => "algorithm1",
        }
    }
}

/// IMU model: `ω_y = ω + b_ω + n_ω`, `a_y = Rᵀ(v̇ - g) + b_a + n_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSpec {
    pub rate_hz: f64,
    pub gyro_bias: Vec3,
    pub accel_bias: Vec3,
    /// Per-sample variance of each gyro component.
    pub gyro_noise_var: f64,
    /// Per-sample variance of each accelerometer component.
    pub accel_noise_var: f64,
}

/// Landmark sensor: `yᵢ = Rᵀ(pᵢ - p) + nᵢ` for every landmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkSensorSpec {
    pub rate_hz: f64,
    pub noise_var: f64,
    /// Probability that a whole frame is lost.
    pub dropout: f64,
}

/// Which axis an initial attitude offset uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisChoice {
    /// Eigenvector of `M` by descending eigenvalue index.
    Eigenvector(usize),
    Vector(Vec3),
}

/// Initial pose estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoseInit {
    /// `R̂(0) = 𝓡_a(angle, axis)R(0)` with the given `v̂(0)`, `p̂(0)`.
    AttitudeOffset { angle: f64, axis: AxisChoice, v: Vec3, p: Vec3 },
    /// The estimate that realizes this error at `t = 0`.
    Error(ErrorCoords),
    Absolute(SE23),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialEstimate {
    pub pose: PoseInit,
    pub b_omega: Vec3,
    pub b_accel: Vec3,
}

impl InitialEstimate {
    pub fn state(&self, cfg: &ObserverConfig, truth: &SE23, t: f64) -> Result<ObserverState> {
        let x = match self.pose {
            PoseInit::AttitudeOffset { angle, axis, v, p } => {
                let u = match axis {
                    AxisChoice::Eigenvector(i) if i < 3 => cfg.geometry.landmarks.eigenvectors()[i],
                    AxisChoice::Eigenvector(i) => return invalid(format!("eigenvector index {i} out of range")),
                    AxisChoice::Vector(u) => u,
                };
                SE23::new(Rot3::from_angle_axis(angle, &u)? * truth.r, v, p)
            }
            PoseInit::Error(e) => e.estimate_for(truth, &cfg.geometry.landmarks.p_c()),
            PoseInit::Absolute(x) => x,
        };
        Ok(ObserverState::new(cfg, t, x, self.b_omega, self.b_accel))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub duration: f64,
    /// Integration step in continuous mode.
    pub dt: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Log every n-th step (continuous) or IMU sample (multi-rate).
    pub log_every: usize,
    /// Error or estimate norm that counts as divergence.
    pub divergence_threshold: f64,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec { duration: 30.0, dt: 1e-3, mode: Mode::Continuous, seed: 0, log_every: 10, divergence_threshold: 1e6 }
    }
}

/// Everything needed to simulate one run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub trajectory: Trajectory,
    pub imu: ImuSpec,
    pub sensor: LandmarkSensorSpec,
    pub observer: ObserverConfig,
    pub initial: InitialEstimate,
    pub run: RunSpec,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        if !(r.duration.is_finite() && r.duration > 0.0) {
            return invalid("duration must be positive");
        }
        if !(r.dt.is_finite() && r.dt > 0.0) {
            return invalid("dt must be positive");
        }
        if !(r.divergence_threshold > 0.0) {
            return invalid("divergence threshold must be positive");
        }
        if r.log_every == 0 {
            return invalid("log_every must be at least 1");
        }
        if !(self.imu.rate_hz > 0.0 && self.sensor.rate_hz > 0.0) {
            return invalid("sensor rates must be positive");
        }
        if self.imu.gyro_noise_var < 0.0 || self.imu.accel_noise_var < 0.0 || self.sensor.noise_var < 0.0 {
            return invalid("noise variances must be non-negative");
        }
        if !(0.0..1.0).contains(&self.sensor.dropout) {
            return invalid("dropout probability must lie in [0, 1)");
        }
        if r.mode == Mode::Algorithm1 {
            let ratio = self.imu.rate_hz / self.sensor.rate_hz;
            if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
                return invalid("IMU rate must be an integer multiple of the landmark rate");
            }
        }
        if let Path::Waypoints(s) = &self.trajectory.path {
            if s.start() > 0.0 || s.end() < r.duration {
                return invalid("waypoints must cover [0, duration]");
            }
        }
        Ok(())
    }
}

/// The fixed landmark set shipped with the reference scenarios.
pub fn reference_landmarks() -> LandmarkSet {
    LandmarkSet::uniform(
        [
            [5.9, -1.4, 4.6],
            [4.0, 5.7, -1.4],
            [-2.2, 5.0, 3.4],
            [-2.6, -1.3, -0.2],
            [-4.0, -4.2, 5.8],
            [-0.9, -5.2, 1.9],
        ]
        .iter()
        .map(|p| Vec3::from(*p))
        .collect(),
    )
    .expect("reference landmarks are well posed")
}

/// Six landmarks on the coordinate axes with unit weights, `p_c = 0` and
/// `M = diag(3, 2, 1)`.
pub fn bench_landmarks() -> LandmarkSet {
    let (a, c) = (1.5f64.sqrt(), 0.5f64.sqrt());
    LandmarkSet::new(
        vec![
            Vec3::new(a, 0.0, 0.0),
            Vec3::new(-a, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, c),
            Vec3::new(0.0, 0.0, -c),
        ],
        vec![1.0; 6],
    )
    .expect("bench landmarks are well posed")
}

/// Circle of radius 10 at height 10 traversed at 0.8 rad/s, with the body
/// rate held at `[sin(0.3π), 0, 0.1]`.
pub fn reference_trajectory() -> Trajectory {
    Trajectory {
        path: Path::Circle { radius: 10.0, rate: 0.8, height: 10.0, center: Vec3::zeros() },
        omega: AngularRate::constant(Vec3::new((0.3 * PI).sin(), 0.0, 0.1)),
        r0: Rot3::identity(),
    }
}

/// Reference observer tuning for a variant: `k_R = 1`, `k_v = k_p = 3`,
/// `k_ω = 1`, and for Riccati variants `P(0) = 0.5I, V = I, Q = 10I`
/// (six states) or `P(0) = I, V = 0.05I, Q = 10I` (nine states).
pub fn reference_params(variant: Variant) -> ObserverParams {
    let mut p = ObserverParams::new(variant);
    p.riccati = variant.cre_variant().map(|cv| match cv {
        CreVariant::FullBias9 => RiccatiSettings::isotropic(cv, 1.0, 0.05, 10.0),
        _ => RiccatiSettings::isotropic(cv, 0.5, 1.0, 10.0),
    });
    p
}

/// Reference scenario: circle trajectory, reference landmarks, IMU at
/// 200 Hz, landmarks at 20 Hz, true biases `b_ω = [-0.1, 0.02, 0.02]` and
/// `b_a = [-0.01, 0.55, 0.07]` (zeroed for variants that do not estimate
/// them), and `R̂(0) = 𝓡_a(0.99π, u₁)R(0)` with all other estimates zero.
/// `noisy` selects gyro/accelerometer/landmark variances 0.4/0.1/0.1.
pub fn reference_scenario(variant: Variant, noisy: bool) -> Scenario {
    let observer = ObserverConfig::new(reference_params(variant), reference_landmarks()).expect("reference config is valid");
    let (gv, av, lv) = if noisy { (0.4, 0.1, 0.1) } else { (0.0, 0.0, 0.0) };
    Scenario {
        trajectory: reference_trajectory(),
        imu: ImuSpec {
            rate_hz: 200.0,
            gyro_bias: if variant.estimates_gyro_bias() { Vec3::new(-0.1, 0.02, 0.02) } else { Vec3::zeros() },
            accel_bias: if variant.estimates_accel_bias() { Vec3::new(-0.01, 0.55, 0.07) } else { Vec3::zeros() },
            gyro_noise_var: gv,
            accel_noise_var: av,
        },
        sensor: LandmarkSensorSpec { rate_hz: 20.0, noise_var: lv, dropout: 0.0 },
        observer,
        initial: InitialEstimate {
            pose: PoseInit::AttitudeOffset { angle: 0.99 * PI, axis: AxisChoice::Eigenvector(0), v: Vec3::zeros(), p: Vec3::zeros() },
            b_omega: Vec3::zeros(),
            b_accel: Vec3::zeros(),
        },
        run: RunSpec::default(),
    }
}

/// Per-frame gains for the multi-rate loop: the continuous reference gains
/// times the 0.05 s frame period, with `k_p = k_v = 0.15`.
pub fn reference_params_algorithm1(variant: Variant) -> ObserverParams {
    let mut p = reference_params(variant);
    p.k_r = 0.05;
    p.k_omega = 0.05;
    p.k_p = 0.15;
    p.k_v = 0.15;
    p
}

/// [`reference_scenario`] run through the multi-rate loop with the
/// per-frame gains of [`reference_params_algorithm1`], for 60 s.
pub fn reference_scenario_algorithm1(variant: Variant, noisy: bool) -> Scenario {
    let mut sc = reference_scenario(variant, noisy);
    sc.observer =
        ObserverConfig::new(reference_params_algorithm1(variant), reference_landmarks()).expect("reference config is valid");
    sc.run.mode = Mode::Algorithm1;
    sc.run.duration = 60.0;
    sc
}
