//! Hybrid observers on SE₂(3).
//!
//! All variants share one structure: the estimate `X̂ = (R̂, v̂, p̂)` flows as
//!
//! ```text
//! dX̂/dt = f(X̂, ω_y - b̂_ω, a_y - b̂_a) - Δ X̂,    f(X, ω, a) = [Rω×  g+Ra  v; 0]
//! ```
//!
//! where `Δ` is the innovation built from landmark measurements, and jumps
//! `X̂ ← X_q⁻¹X̂` whenever `μ_Q(X̂) ≥ δ`. Variants differ in whether the
//! translational gains are fixed or come from a Riccati equation, and in
//! which IMU biases are estimated.

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector5;

use crate::error::{invalid, Error, Result};
use crate::integrate::{rk4, OdeState};
use crate::landmarks::{jump_decision, AxisPolicy, DeltaRule, HybridGeometry, JumpDecision, LandmarkSet};
use crate::liegroup::{adjoint, exp_se23, hat, proj_antisym, proj_se23_gains, psi, Mat3, Mat5, Rot3, Tangent, Vec3, SE23};
use crate::riccati::{self, check_pd, continuous_gain, discrete_gain, extract_gains, symmetrize, CreVariant, DMat, Gains};

/// Standard gravity in a z-up frame.
pub const DEFAULT_GRAVITY: [f64; 3] = [0.0, 0.0, -9.81];

/// Observer family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Fixed gains, no bias estimation.
    FixedGain,
    /// Riccati gains, no bias estimation.
    RiccatiGain,
    /// Fixed gains with gyro bias estimation.
    FixedGainGyroBias,
    /// Riccati gains with gyro bias estimation.
    RiccatiGainGyroBias,
    /// Riccati gains with gyro and accelerometer bias estimation.
    RiccatiGainFullBias,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::FixedGain,
        Variant::RiccatiGain,
        Variant::FixedGainGyroBias,
        Variant::RiccatiGainGyroBias,
        Variant::RiccatiGainFullBias,
    ];

    pub fn estimates_gyro_bias(&self) -> bool {
        matches!(self, Variant::FixedGainGyroBias | Variant::RiccatiGainGyroBias | Variant::RiccatiGainFullBias)
    }

    pub fn estimates_accel_bias(&self) -> bool {
        matches!(self, Variant::RiccatiGainFullBias)
    }

    pub fn cre_variant(&self) -> Option<CreVariant> {
        match self {
            Variant::FixedGain | Variant::FixedGainGyroBias => None,
            Variant::RiccatiGain => Some(CreVariant::NoBias6),
            Variant::RiccatiGainGyroBias => Some(CreVariant::GyroBias6),
            Variant::RiccatiGainFullBias => Some(CreVariant::FullBias9),
        }
    }

    /// Stable identifier used in files and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Variant::FixedGain => "fixed-gain",
            Variant::RiccatiGain => "riccati-gain",
            Variant::FixedGainGyroBias => "fixed-gain-gyro-bias",
            Variant::RiccatiGainGyroBias => "riccati-gain-gyro-bias",
            Variant::RiccatiGainFullBias => "riccati-gain-full-bias",
        }
    }

    pub fn from_name(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }
}

/// A matrix that is either constant or a function of time.
#[derive(Clone)]
pub enum Schedule {
    Constant(DMat),
    Varying(Arc<dyn Fn(f64) -> DMat + Send + Sync>),
}

impl Schedule {
    pub fn at(&self, t: f64) -> DMat {
        match self {
            Schedule::Constant(m) => m.clone(),
            Schedule::Varying(f) => f(t),
        }
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            Schedule::Varying(_) => f.write_str("Varying(..)"),
        }
    }
}

/// Weights of the Riccati equation.
#[derive(Debug, Clone)]
pub struct RiccatiSettings {
    pub p0: DMat,
    /// Process weight `V`, n×n.
    pub v: Schedule,
    /// Output weight `Q`, 3×3.
    pub q: Schedule,
}

impl RiccatiSettings {
    /// `P(0) = p0·I`, `V = v·I`, `Q = q·I`.
    pub fn isotropic(variant: CreVariant, p0: f64, v: f64, q: f64) -> Self {
        let n = variant.dim();
        RiccatiSettings {
            p0: DMat::identity(n, n) * p0,
            v: Schedule::Constant(DMat::identity(n, n) * v),
            q: Schedule::Constant(DMat::identity(3, 3) * q),
        }
    }
}

/// Observer tuning. In continuous mode the scalar gains are rates; in the
/// discrete update they are applied once per landmark frame.
#[derive(Debug, Clone)]
pub struct ObserverParams {
    pub variant: Variant,
    /// Enables the jump map. With it off, the observer is purely continuous.
    pub hybrid: bool,
    pub k_r: f64,
    pub k_p: f64,
    pub k_v: f64,
    pub k_omega: f64,
    pub gravity: Vec3,
    pub theta: f64,
    pub policy: AxisPolicy,
    pub delta_rule: DeltaRule,
    pub riccati: Option<RiccatiSettings>,
    /// Largest integration step.
    pub max_dt: f64,
}

impl ObserverParams {
    /// Defaults: `k_R = 1`, `k_p = k_v = 3`, `k_ω = 1`, `θ = 0.8π`, eigenbasis
    /// axes, `δ = 0.3(1-cosθ)Δ*_M`, jumps enabled. Riccati variants get
    /// `P(0) = I`, `V = I`, `Q = 10I`.
    pub fn new(variant: Variant) -> Self {
        ObserverParams {
            variant,
            hybrid: true,
            k_r: 1.0,
            k_p: 3.0,
            k_v: 3.0,
            k_omega: 1.0,
            gravity: Vec3::from(DEFAULT_GRAVITY),
            theta: 0.8 * std::f64::consts::PI,
            policy: AxisPolicy::Eigenbasis,
            delta_rule: DeltaRule::default(),
            riccati: variant.cre_variant().map(|c| RiccatiSettings::isotropic(c, 1.0, 1.0, 10.0)),
            max_dt: 1e-3,
        }
    }
}

/// Validated observer configuration with its landmark geometry.
#[derive(Debug, Clone)]
pub struct ObserverConfig {
    pub params: ObserverParams,
    pub geometry: HybridGeometry,
}

impl ObserverConfig {
    pub fn new(params: ObserverParams, landmarks: LandmarkSet) -> Result<Self> {
        for (name, k) in [("k_R", params.k_r), ("k_p", params.k_p), ("k_v", params.k_v), ("k_omega", params.k_omega)] {
            if !(k.is_finite() && k > 0.0) {
                return invalid(format!("gain {name} must be positive"));
            }
        }
        if !(params.max_dt.is_finite() && params.max_dt > 0.0) {
            return invalid("max_dt must be positive");
        }
        match (params.variant.cre_variant(), &params.riccati) {
            (Some(cv), Some(rs)) => {
                let n = cv.dim();
                if rs.p0.shape() != (n, n) {
                    return invalid(format!("P(0) must be {n}x{n}"));
                }
                check_pd(&rs.p0, 0.0).map_err(|_| Error::InvalidArgument("P(0) must be positive definite".into()))?;
                let v = rs.v.at(0.0);
                let q = rs.q.at(0.0);
                if v.shape() != (n, n) || q.shape() != (3, 3) {
                    return invalid(format!("V must be {n}x{n} and Q 3x3"));
                }
                check_pd(&v, 0.0).map_err(|_| Error::InvalidArgument("V must be positive definite".into()))?;
                check_pd(&q, 0.0).map_err(|_| Error::InvalidArgument("Q must be positive definite".into()))?;
            }
            (Some(_), None) => return invalid("Riccati variant needs Riccati settings"),
            (None, _) => {}
        }
        let geometry = HybridGeometry::new(landmarks, params.theta, params.policy, params.delta_rule)?;
        Ok(ObserverConfig { params, geometry })
    }

    /// Geometry restricted to the landmarks with the given indices.
    pub fn geometry_for(&self, indices: &[usize]) -> Result<HybridGeometry> {
        let sub = self.geometry.landmarks.subset(indices)?;
        HybridGeometry::new(sub, self.params.theta, self.params.policy, self.params.delta_rule)
    }

    fn riccati_dims(&self) -> Option<(CreVariant, &RiccatiSettings)> {
        self.params.variant.cre_variant().zip(self.params.riccati.as_ref())
    }
}

/// Bias-compensated IMU reading pair before compensation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuReading {
    pub omega: Vec3,
    pub accel: Vec3,
}

/// Landmark measurements `yᵢ = Rᵀ(pᵢ - p)` in the order of `geometry`.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub geometry: &'a HybridGeometry,
    pub ys: &'a [Vec3],
}

/// Observer state.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub t: f64,
    pub x: SE23,
    pub b_omega: Vec3,
    pub b_accel: Vec3,
    /// Riccati solution, for Riccati variants.
    pub p: Option<DMat>,
    /// Number of jumps so far.
    pub j: usize,
}

impl ObserverState {
    pub fn new(cfg: &ObserverConfig, t: f64, x: SE23, b_omega: Vec3, b_accel: Vec3) -> Self {
        let v = cfg.params.variant;
        ObserverState {
            t,
            x,
            b_omega: if v.estimates_gyro_bias() { b_omega } else { Vec3::zeros() },
            b_accel: if v.estimates_accel_bias() { b_accel } else { Vec3::zeros() },
            p: cfg.params.riccati.as_ref().filter(|_| v.cre_variant().is_some()).map(|r| r.p0.clone()),
            j: 0,
        }
    }
}

/// Innovation and the residual sums it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Innovation {
    pub delta: Tangent,
    /// `Δ_R = Σkᵢỹᵢ(pᵢ-p_c)ᵀ`
    pub delta_r: Mat3,
    /// `Δ_p = Σkᵢỹᵢ`
    pub delta_p: Vec3,
}

/// Selector that copies the position column of the weighted residual matrix
/// into both translational columns before the gain projection.
fn column_selector() -> Mat5 {
    let mut k = Mat5::zeros();
    k.fixed_view_mut::<3, 3>(0, 0).copy_from(&Mat3::identity());
    k[(4, 3)] = 1.0;
    k[(4, 4)] = 1.0;
    k
}

/// `Δ = -Ad_{X_c} ℙ_𝒦(X_c⁻¹(r - X̂b)K_n rᵀX_c⁻ᵀ)` with `X_c = 𝒯(I, 0, p_c)`,
/// `rᵢ = [pᵢ; 0; 1]`, `bᵢ = [yᵢ; 0; 1]` and `K_n = diag(kᵢ)`.
pub fn innovation(x_hat: &SE23, landmarks: &LandmarkSet, ys: &[Vec3], k_r: f64, k_v: &Mat3, k_p: &Mat3) -> Innovation {
    let xc = SE23::new(Rot3::identity(), Vec3::zeros(), landmarks.p_c());
    let xc_inv = xc.inverse().matrix();
    let xh = x_hat.matrix();
    let mut acc = Mat5::zeros();
    for ((p, y), k) in landmarks.points().iter().zip(ys).zip(landmarks.weights()) {
        let r = Vector5::new(p.x, p.y, p.z, 0.0, 1.0);
        let b = Vector5::new(y.x, y.y, y.z, 0.0, 1.0);
        acc += (r - xh * b) * r.transpose() * *k;
    }
    let inner = xc_inv * acc * xc_inv.transpose();
    let delta_r = inner.fixed_view::<3, 3>(0, 0).into_owned();
    let delta_p = inner.fixed_view::<3, 1>(0, 4).into_owned();
    let proj = proj_se23_gains(&(inner * column_selector()), k_r, k_v, k_p);
    Innovation { delta: -adjoint(&xc, &proj), delta_r, delta_p }
}

/// The same innovation assembled directly from `Δ_R` and `Δ_p`:
/// `Δ = -[k_Rℙ_a(Δ_R), K_vΔ_p, K_pΔ_p - k_Rℙ_a(Δ_R)p_c]`.
pub fn innovation_from_blocks(delta_r: &Mat3, delta_p: &Vec3, p_c: &Vec3, k_r: f64, k_v: &Mat3, k_p: &Mat3) -> Tangent {
    let pa = proj_antisym(delta_r) * k_r;
    Tangent::new(-psi(delta_r) * k_r, -(k_v * delta_p), -(k_p * delta_p - pa * p_c))
}

/// Gains at the given estimate: constant for fixed-gain variants, from
/// `L = PCᵀQ` for Riccati variants.
pub fn flow_gains(cfg: &ObserverConfig, r_hat: &Rot3, p: Option<&DMat>, k_c: f64, t: f64) -> Gains {
    match (cfg.riccati_dims(), p) {
        (Some((cv, rs)), Some(p)) => {
            let l = continuous_gain(p, &cv.c_matrix(), &rs.q.at(t));
            extract_gains(&l, r_hat, k_c).expect("dimensions validated in ObserverConfig::new")
        }
        _ => Gains { k_p: Mat3::identity() * cfg.params.k_p, k_v: Mat3::identity() * cfg.params.k_v, k_a: None },
    }
}

/// Integrated quantities during flows. The rotation is carried as a plain
/// matrix and projected back onto SO(3) after each step.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowVars {
    pub r: Mat3,
    pub v: Vec3,
    pub p: Vec3,
    pub b_omega: Vec3,
    pub b_accel: Vec3,
    pub cov: Option<DMat>,
}

impl OdeState for FlowVars {
    fn add_scaled(&self, h: f64, d: &Self) -> Self {
        FlowVars {
            r: self.r + d.r * h,
            v: self.v + d.v * h,
            p: self.p + d.p * h,
            b_omega: self.b_omega + d.b_omega * h,
            b_accel: self.b_accel + d.b_accel * h,
            cov: match (&self.cov, &d.cov) {
                (Some(a), Some(b)) => Some(a + b * h),
                (a, _) => a.clone(),
            },
        }
    }
}

impl FlowVars {
    pub fn from_state(s: &ObserverState) -> Self {
        FlowVars { r: *s.x.r.matrix(), v: s.x.v, p: s.x.p, b_omega: s.b_omega, b_accel: s.b_accel, cov: s.p.clone() }
    }
}

/// `f(X, ω, a) = [Rω×  g+Ra  v; 0]`
pub fn kinematics(x: &SE23, omega: &Vec3, accel: &Vec3, gravity: &Vec3) -> Mat5 {
    let mut f = Mat5::zeros();
    f.fixed_view_mut::<3, 3>(0, 0).copy_from(&(x.r.matrix() * hat(omega)));
    f.fixed_view_mut::<3, 1>(0, 3).copy_from(&(gravity + x.r * *accel));
    f.fixed_view_mut::<3, 1>(0, 4).copy_from(&x.v);
    f
}

/// Time derivative of all flow quantities. Without an observation the
/// innovation vanishes and the Riccati equation loses its output term.
pub fn flow_derivative(cfg: &ObserverConfig, t: f64, s: &FlowVars, imu: &ImuReading, obs: Option<Observation<'_>>) -> FlowVars {
    let variant = cfg.params.variant;
    let r = Rot3::from_matrix_unchecked(s.r);
    let x = SE23::new(r, s.v, s.p);
    let w_hat = imu.omega - s.b_omega;
    let a_hat = imu.accel - s.b_accel;
    let mut d_bw = Vec3::zeros();
    let mut d_ba = Vec3::zeros();
    let mut f = kinematics(&x, &w_hat, &a_hat, &cfg.params.gravity);
    if let Some(o) = obs {
        let lm = &o.geometry.landmarks;
        let g = flow_gains(cfg, &r, s.cov.as_ref(), lm.k_c(), t);
        let inn = innovation(&x, lm, o.ys, cfg.params.k_r, &g.k_v, &g.k_p);
        f -= inn.delta.matrix() * x.matrix();
        if variant.estimates_gyro_bias() {
            d_bw = -(r.matrix().transpose() * psi(&inn.delta_r)) * cfg.params.k_omega;
        }
        if let (true, Some(k_a)) = (variant.estimates_accel_bias(), g.k_a) {
            d_ba = -(r.matrix().transpose() * k_a * inn.delta_p);
        }
    }
    let cov = match (cfg.riccati_dims(), &s.cov) {
        (Some((cv, rs)), Some(p)) => {
            let a = cv.a_matrix(&w_hat);
            let v = rs.v.at(t);
            Some(if obs.is_some() {
                riccati::cre_rhs(p, &a, &cv.c_matrix(), &rs.q.at(t), &v)
            } else {
                &a * p + p * a.transpose() + v
            })
        }
        _ => None,
    };
    FlowVars {
        r: f.fixed_view::<3, 3>(0, 0).into_owned(),
        v: f.fixed_view::<3, 1>(0, 3).into_owned(),
        p: f.fixed_view::<3, 1>(0, 4).into_owned(),
        b_omega: d_bw,
        b_accel: d_ba,
        cov,
    }
}

fn finish_step(state: &ObserverState, s: FlowVars, t: f64) -> Result<ObserverState> {
    let cov = match s.cov {
        Some(p) => {
            let p = symmetrize(&p);
            check_pd(&p, t)?;
            Some(p)
        }
        None => None,
    };
    let finite = s.r.iter().chain(s.v.iter()).chain(s.p.iter()).chain(s.b_omega.iter()).chain(s.b_accel.iter());
    if !finite.copied().all(f64::is_finite) {
        return Err(Error::Divergence { t, what: "non-finite estimate".into() });
    }
    Ok(ObserverState {
        t,
        x: SE23::new(Rot3::orthonormalize(&s.r), s.v, s.p),
        b_omega: s.b_omega,
        b_accel: s.b_accel,
        p: cov,
        j: state.j,
    })
}

/// Inputs at one instant during a flow step: IMU readings and, if a frame is
/// available, measurements of every landmark in `cfg.geometry`.
pub type FlowInput = (ImuReading, Option<Vec<Vec3>>);

/// One RK4 step of the continuous observer. `input` is queried at the
/// stage times `t`, `t + dt/2` and `t + dt`.
pub fn flow_step(cfg: &ObserverConfig, state: &ObserverState, dt: f64, input: impl Fn(f64) -> FlowInput) -> Result<ObserverState> {
    let t0 = state.t;
    let next = rk4(t0, dt, &FlowVars::from_state(state), |t, s| {
        let (imu, ys) = input(t);
        let obs = ys.as_deref().map(|ys| Observation { geometry: &cfg.geometry, ys });
        flow_derivative(cfg, t, s, &imu, obs)
    });
    finish_step(state, next, t0 + dt)
}

/// Open-loop prediction between landmark frames with the IMU reading held
/// constant: biases stay fixed and `P` follows `AP + PAᵀ + V`.
pub fn propagate(cfg: &ObserverConfig, state: &ObserverState, dt: f64, imu: &ImuReading) -> Result<ObserverState> {
    let t0 = state.t;
    let next = rk4(t0, dt, &FlowVars::from_state(state), |t, s| flow_derivative(cfg, t, s, imu, None));
    finish_step(state, next, t0 + dt)
}

/// Discrete correction at a landmark frame:
/// `X̂ ← exp(-Δ)X̂`, `b̂_ω ← b̂_ω - k_ωR̂ᵀψ(Δ_R)`, `b̂_a ← b̂_a - R̂ᵀK_aΔ_p`
/// and `P ← P - LCP` with `L = PCᵀ(CPCᵀ + Q⁻¹)⁻¹`.
pub fn discrete_update(cfg: &ObserverConfig, state: &ObserverState, obs: Observation<'_>) -> Result<ObserverState> {
    let lm = &obs.geometry.landmarks;
    let r_prior = state.x.r;
    let (gains, p_next) = match (cfg.riccati_dims(), &state.p) {
        (Some((cv, rs)), Some(p)) => {
            let (l, p_next) = discrete_gain(p, &cv.c_matrix(), &rs.q.at(state.t), state.t)?;
            (extract_gains(&l, &r_prior, lm.k_c())?, Some(p_next))
        }
        _ => (flow_gains(cfg, &r_prior, None, lm.k_c(), state.t), None),
    };
    let inn = innovation(&state.x, lm, obs.ys, cfg.params.k_r, &gains.k_v, &gains.k_p);
    let x = exp_se23(&(-inn.delta)).compose(&state.x);
    let x = SE23::new(Rot3::orthonormalize(x.r.matrix()), x.v, x.p);
    let mut next = state.clone();
    next.x = x;
    next.p = p_next;
    let rt = r_prior.matrix().transpose();
    if cfg.params.variant.estimates_gyro_bias() {
        next.b_omega -= rt * psi(&inn.delta_r) * cfg.params.k_omega;
    }
    if let (true, Some(k_a)) = (cfg.params.variant.estimates_accel_bias(), gains.k_a) {
        next.b_accel -= rt * k_a * inn.delta_p;
    }
    Ok(next)
}

/// The jump test: returns the decision when `μ_Q ≥ δ`.
pub fn should_jump(state: &ObserverState, obs: Observation<'_>) -> Option<JumpDecision> {
    let d = jump_decision(&state.x, obs.geometry, obs.ys);
    (d.mu_q >= obs.geometry.gap.delta).then_some(d)
}

/// Jump map `X̂ ← X_q⁻¹X̂`. Biases and `P` are unchanged.
pub fn jump(state: &ObserverState, geometry: &HybridGeometry, index: usize) -> ObserverState {
    let xq = geometry.qset.elements()[index];
    let mut next = state.clone();
    next.x = xq.inverse().compose(&state.x);
    next.j += 1;
    next
}

/// Estimation error in the coordinates used by the stability analysis:
/// `R̃ = RR̂ᵀ`, `ṽ = v - R̃v̂`, `p̃ = p - R̃p̂` and `p̃_e = p̃ - (I-R̃)p_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorCoords {
    pub r: Rot3,
    pub v: Vec3,
    pub p: Vec3,
    pub p_e: Vec3,
}

impl ErrorCoords {
    pub fn between(truth: &SE23, estimate: &SE23, p_c: &Vec3) -> Self {
        let r = truth.r * estimate.r.transpose();
        let v = truth.v - r * estimate.v;
        let p = truth.p - r * estimate.p;
        let p_e = p - (Mat3::identity() - r.matrix()) * p_c;
        ErrorCoords { r, v, p, p_e }
    }

    /// The estimate producing this error for the given truth.
    pub fn estimate_for(&self, truth: &SE23, p_c: &Vec3) -> SE23 {
        let rt = self.r.transpose();
        let p_tilde = self.p_e + (Mat3::identity() - self.r.matrix()) * p_c;
        SE23::new(rt * truth.r, rt * (truth.v - self.v), rt * (truth.p - p_tilde))
    }
}

/// Undesired equilibria of the continuous fixed-gain observer: `R̃` a half
/// turn about an eigenvector of `M`, `p̃_e = (I-R̃)g/(k_c k_v)` and
/// `ṽ = k_c k_p p̃_e`. One point per eigenvector.
pub fn undesired_equilibria(cfg: &ObserverConfig) -> Vec<ErrorCoords> {
    let lm = &cfg.geometry.landmarks;
    let (k_c, k_p, k_v) = (lm.k_c(), cfg.params.k_p, cfg.params.k_v);
    lm.eigenvectors()
        .iter()
        .map(|u| {
            let r = Rot3::from_angle_axis(std::f64::consts::PI, u).expect("eigenvectors are unit");
            let p_e = (Mat3::identity() - r.matrix()) * cfg.params.gravity / (k_c * k_v);
            ErrorCoords { r, v: p_e * (k_c * k_p), p: p_e + (Mat3::identity() - r.matrix()) * lm.p_c(), p_e }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn landmarks() -> LandmarkSet {
        LandmarkSet::uniform(vec![
            Vec3::new(5.9, -1.4, 4.6),
            Vec3::new(4.0, 5.7, -1.4),
            Vec3::new(-2.2, 5.0, 3.4),
            Vec3::new(-2.6, -1.3, -0.2),
            Vec3::new(-4.0, -4.2, 5.8),
            Vec3::new(-0.9, -5.2, 1.9),
        ])
        .unwrap()
    }

    fn measure(x: &SE23, lm: &LandmarkSet) -> Vec<Vec3> {
        lm.points().iter().map(|p| x.r.transpose() * (p - x.p)).collect()
    }

    #[test]
    fn zero_error_gives_zero_innovation() {
        let lm = landmarks();
        let x = SE23::new(Rot3::exp(&Vec3::new(0.3, -0.2, 1.0)), Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 2.0));
        let inn = innovation(&x, &lm, &measure(&x, &lm), 1.0, &Mat3::identity(), &Mat3::identity());
        assert!(inn.delta.norm() < 1e-13);
    }

    #[test]
    fn pure_position_offset() {
        let lm = landmarks();
        let truth = SE23::new(Rot3::exp(&Vec3::new(0.1, 0.2, -0.4)), Vec3::zeros(), Vec3::new(1.0, -2.0, 0.5));
        let d = Vec3::new(0.3, -0.1, 0.2);
        let est = SE23::new(truth.r, truth.v, truth.p - d);
        let inn = innovation(&est, &lm, &measure(&truth, &lm), 1.0, &Mat3::identity(), &Mat3::identity());
        assert!(inn.delta_r.amax() < 1e-12);
        assert_relative_eq!(inn.delta_p, d * lm.k_c(), epsilon = 1e-12);
    }

    #[test]
    fn undesired_equilibria_count() {
        let cfg = ObserverConfig::new(ObserverParams::new(Variant::FixedGain), landmarks()).unwrap();
        let pts = undesired_equilibria(&cfg);
        assert_eq!(pts.len(), 3);
        for e in pts {
            assert_relative_eq!(e.r.distance(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn riccati_variant_requires_settings() {
        let mut p = ObserverParams::new(Variant::RiccatiGain);
        p.riccati = None;
        assert!(ObserverConfig::new(p, landmarks()).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(Variant::from_name(v.name()), Some(v));
        }
    }
}
