//! Scenario file schema (TOML). Unknown keys are rejected everywhere.

use std::f64::consts::PI;

use hybrid_ins::landmarks::{AxisPolicy, DeltaRule, LandmarkSet};
use hybrid_ins::liegroup::{Rot3, Vec3};
use hybrid_ins::observers::{ObserverConfig, ObserverParams, RiccatiSettings, Variant};
use hybrid_ins::simkit::{
    reference_params, AngularRate, AxisChoice, CubicSpline, ImuSpec, InitialEstimate, LandmarkSensorSpec, Mode, Path,
    PoseInit, RunSpec, Scenario, Trajectory,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

type V3 = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub trajectory: Option<TrajectorySection>,
    pub imu: Option<ImuSection>,
    pub landmarks: Option<LandmarkSection>,
    pub observer: ObserverSection,
    pub riccati: Option<RiccatiSection>,
    pub run: Option<RunSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Circle,
    Hover,
    Waypoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub kind: PathKind,
    pub radius: Option<f64>,
    pub rate: Option<f64>,
    pub height: Option<f64>,
    pub center: Option<V3>,
    pub position: Option<V3>,
    pub times: Option<Vec<f64>>,
    pub points: Option<Vec<V3>>,
    /// Constant part of the body angular velocity.
    pub omega: V3,
    #[serde(default)]
    pub omega_amplitude: V3,
    #[serde(default)]
    pub omega_frequency: V3,
    /// Initial attitude as angle (rad) about a unit axis; identity if absent.
    #[serde(default)]
    pub initial_attitude_angle: f64,
    #[serde(default = "z_axis")]
    pub initial_attitude_axis: V3,
}

fn z_axis() -> V3 {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImuSection {
    pub rate_hz: f64,
    #[serde(default)]
    pub gyro_bias: V3,
    #[serde(default)]
    pub accel_bias: V3,
    #[serde(default)]
    pub gyro_noise_var: f64,
    #[serde(default)]
    pub accel_noise_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandmarkSection {
    pub points: Vec<V3>,
    /// Defaults to `1/n` each.
    pub weights: Option<Vec<f64>>,
    pub rate_hz: f64,
    #[serde(default)]
    pub noise_var: f64,
    #[serde(default)]
    pub dropout: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxesKind {
    Eigenbasis,
    Orthogonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSection {
    pub variant: String,
    #[serde(default = "yes")]
    pub hybrid: bool,
    pub k_r: f64,
    pub k_p: f64,
    pub k_v: f64,
    pub k_omega: f64,
    #[serde(default = "default_gravity")]
    pub gravity: V3,
    #[serde(default = "default_theta")]
    pub theta_over_pi: f64,
    #[serde(default = "default_axes")]
    pub axes: AxesKind,
    pub orthogonal_axes: Option<[V3; 3]>,
    pub delta_factor: Option<f64>,
    pub delta: Option<f64>,
    #[serde(default = "default_max_dt")]
    pub max_dt: f64,
    #[serde(default)]
    pub initial: InitialSection,
}

fn yes() -> bool {
    true
}
fn default_gravity() -> V3 {
    hybrid_ins::observers::DEFAULT_GRAVITY
}
fn default_theta() -> f64 {
    0.8
}
fn default_axes() -> AxesKind {
    AxesKind::Eigenbasis
}
fn default_max_dt() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// Attitude offset angle as a multiple of π.
    #[serde(default)]
    pub attitude_angle_over_pi: f64,
    /// 1-based index of the eigenvector of `M` used as offset axis.
    pub attitude_axis_eigenvector: Option<usize>,
    pub attitude_axis: Option<V3>,
    #[serde(default)]
    pub velocity: V3,
    #[serde(default)]
    pub position: V3,
    #[serde(default)]
    pub gyro_bias: V3,
    #[serde(default)]
    pub accel_bias: V3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiccatiSection {
    pub p0: f64,
    pub v: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Continuous,
    Algorithm1,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::Continuous => Mode::Continuous,
            ModeName::Algorithm1 => Mode::Algorithm1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub duration: f64,
    #[serde(default = "default_max_dt")]
    pub dt: f64,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_log_every")]
    pub log_every: usize,
    #[serde(default = "default_divergence")]
    pub divergence_threshold: f64,
}

fn default_mode() -> ModeName {
    ModeName::Continuous
}
fn default_log_every() -> usize {
    10
}
fn default_divergence() -> f64 {
    1e6
}

fn schema<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Schema(msg.into()))
}

fn v3(a: V3) -> Vec3 {
    Vec3::from(a)
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    /// Observer tuning, without landmarks.
    pub fn observer_params(&self) -> Result<ObserverParams, CliError> {
        let o = &self.observer;
        let Some(variant) = Variant::from_name(&o.variant) else {
            let names: Vec<_> = Variant::ALL.iter().map(|v| v.name()).collect();
            return schema(format!("unknown variant `{}`; expected one of {}", o.variant, names.join(", ")));
        };
        let mut p = reference_params(variant);
        p.hybrid = o.hybrid;
        p.k_r = o.k_r;
        p.k_p = o.k_p;
        p.k_v = o.k_v;
        p.k_omega = o.k_omega;
        p.gravity = v3(o.gravity);
        p.theta = o.theta_over_pi * PI;
        p.max_dt = o.max_dt;
        p.policy = match (o.axes, o.orthogonal_axes) {
            (AxesKind::Eigenbasis, None) => AxisPolicy::Eigenbasis,
            (AxesKind::Orthogonal, Some(a)) => AxisPolicy::Orthogonal([v3(a[0]), v3(a[1]), v3(a[2])]),
            (AxesKind::Eigenbasis, Some(_)) => return schema("`orthogonal_axes` requires axes = \"orthogonal\""),
            (AxesKind::Orthogonal, None) => return schema("axes = \"orthogonal\" requires `orthogonal_axes`"),
        };
        p.delta_rule = match (o.delta_factor, o.delta) {
            (None, None) => DeltaRule::default(),
            (Some(f), None) => DeltaRule::Factor(f),
            (None, Some(d)) => DeltaRule::Fixed(d),
            (Some(_), Some(_)) => return schema("give at most one of `delta_factor` and `delta`"),
        };
        match (variant.cre_variant(), &self.riccati) {
            (Some(cv), Some(r)) => p.riccati = Some(RiccatiSettings::isotropic(cv, r.p0, r.v, r.q)),
            (None, Some(_)) => return schema(format!("[riccati] does not apply to variant `{}`", o.variant)),
            _ => {}
        }
        Ok(p)
    }

    pub fn landmark_set(&self) -> Result<LandmarkSet, CliError> {
        let Some(l) = &self.landmarks else { return schema("missing [landmarks] section") };
        let pts: Vec<Vec3> = l.points.iter().copied().map(v3).collect();
        let n = pts.len();
        let ws = l.weights.clone().unwrap_or_else(|| vec![1.0 / n.max(1) as f64; n]);
        LandmarkSet::new(pts, ws).map_err(CliError::Core)
    }

    pub fn observer_config(&self, landmarks: LandmarkSet) -> Result<ObserverConfig, CliError> {
        ObserverConfig::new(self.observer_params()?, landmarks).map_err(CliError::Core)
    }

    pub fn initial_estimate(&self) -> Result<InitialEstimate, CliError> {
        let i = &self.observer.initial;
        let axis = match (i.attitude_axis_eigenvector, i.attitude_axis) {
            (Some(k), None) if (1..=3).contains(&k) => AxisChoice::Eigenvector(k - 1),
            (Some(k), None) => return schema(format!("attitude_axis_eigenvector {k} outside 1..=3")),
            (None, Some(a)) => AxisChoice::Vector(v3(a)),
            (None, None) => AxisChoice::Eigenvector(0),
            (Some(_), Some(_)) => return schema("give at most one of `attitude_axis_eigenvector` and `attitude_axis`"),
        };
        Ok(InitialEstimate {
            pose: PoseInit::AttitudeOffset {
                angle: i.attitude_angle_over_pi * PI,
                axis,
                v: v3(i.velocity),
                p: v3(i.position),
            },
            b_omega: v3(i.gyro_bias),
            b_accel: v3(i.accel_bias),
        })
    }

    pub fn run_spec(&self) -> RunSpec {
        match &self.run {
            None => RunSpec::default(),
            Some(r) => RunSpec {
                duration: r.duration,
                dt: r.dt,
                mode: r.mode.into(),
                seed: r.seed,
                log_every: r.log_every,
                divergence_threshold: r.divergence_threshold,
            },
        }
    }

    pub fn trajectory(&self) -> Result<Trajectory, CliError> {
        let Some(t) = &self.trajectory else { return schema("missing [trajectory] section") };
        let used: &[(&str, bool)] = &[
            ("radius", t.radius.is_some()),
            ("rate", t.rate.is_some()),
            ("height", t.height.is_some()),
            ("center", t.center.is_some()),
            ("position", t.position.is_some()),
            ("times", t.times.is_some()),
            ("points", t.points.is_some()),
        ];
        let allowed: &[&str] = match t.kind {
            PathKind::Circle => &["radius", "rate", "height", "center"],
            PathKind::Hover => &["position"],
            PathKind::Waypoints => &["times", "points"],
        };
        for (name, present) in used {
            if *present && !allowed.contains(name) {
                return schema(format!("trajectory key `{name}` is not used by kind {:?}", t.kind));
            }
        }
        let need = |x: Option<f64>, name: &str| x.ok_or_else(|| CliError::Schema(format!("trajectory needs `{name}`")));
        let path = match t.kind {
            PathKind::Circle => Path::Circle {
                radius: need(t.radius, "radius")?,
                rate: need(t.rate, "rate")?,
                height: need(t.height, "height")?,
                center: v3(t.center.unwrap_or_default()),
            },
            PathKind::Hover => Path::Hover {
                position: v3(t.position.ok_or_else(|| CliError::Schema("trajectory needs `position`".into()))?),
            },
            PathKind::Waypoints => {
                let (Some(ts), Some(ps)) = (&t.times, &t.points) else {
                    return schema("waypoints need `times` and `points`");
                };
                Path::Waypoints(CubicSpline::new(ts.clone(), ps.iter().copied().map(v3).collect()).map_err(CliError::Core)?)
            }
        };
        let r0 = Rot3::from_angle_axis(t.initial_attitude_angle, &v3(t.initial_attitude_axis)).map_err(CliError::Core)?;
        Ok(Trajectory {
            path,
            omega: AngularRate { offset: v3(t.omega), amplitude: v3(t.omega_amplitude), frequency: v3(t.omega_frequency) },
            r0,
        })
    }

    /// Full simulation scenario.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let trajectory = self.trajectory()?;
        let Some(imu) = &self.imu else { return schema("missing [imu] section") };
        let Some(l) = &self.landmarks else { return schema("missing [landmarks] section") };
        if self.run.is_none() {
            return schema("missing [run] section");
        }
        let observer = self.observer_config(self.landmark_set()?)?;
        let sc = Scenario {
            trajectory,
            imu: ImuSpec {
                rate_hz: imu.rate_hz,
                gyro_bias: v3(imu.gyro_bias),
                accel_bias: v3(imu.accel_bias),
                gyro_noise_var: imu.gyro_noise_var,
                accel_noise_var: imu.accel_noise_var,
            },
            sensor: LandmarkSensorSpec { rate_hz: l.rate_hz, noise_var: l.noise_var, dropout: l.dropout },
            observer,
            initial: self.initial_estimate()?,
            run: self.run_spec(),
        };
        sc.validate().map_err(|e| CliError::Schema(e.to_string()))?;
        Ok(sc)
    }
}
