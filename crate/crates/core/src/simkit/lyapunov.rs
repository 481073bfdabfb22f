//! Lyapunov function evaluation along logged runs.
//!
//! The rotational part is `𝓛_R = tr((I-R̃)M)`, extended for gyro-bias
//! variants by `‖b̃_ω‖²/k_ω - μ̄ψ(R̃)ᵀR̂b̃_ω`. The translational part is
//! `𝓛_p = ½‖p̃_e‖² + ‖ṽ‖²/(2k_c k_v) - μ p̃_eᵀṽ` for fixed gains, or
//! `𝗑ᵀP⁻¹𝗑` with `𝗑 = [Rᵀp̃_e, Rᵀṽ, b̃_a]` for Riccati gains. The total is
//! `𝓛 = 𝓛_R + ε𝓛_p`.

use crate::error::{invalid, Result};
use crate::landmarks::{m_bar, sorted_eigen};
use crate::liegroup::{psi, Mat3};
use crate::observers::{ErrorCoords, ObserverConfig};
use crate::riccati::DMat;

use super::run::RunLog;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovParams {
    pub epsilon: f64,
    pub mu: f64,
    pub mu_bar: f64,
}

/// Upper limit on `μ`: `min{1/√(k_c k_v), 4k_p/(4k_v + k_c k_p²)}`.
pub fn mu_limit(k_c: f64, k_p: f64, k_v: f64) -> f64 {
    (1.0 / (k_c * k_v).sqrt()).min(4.0 * k_p / (4.0 * k_v + k_c * k_p * k_p))
}

/// `ϱ(M, R̃) = 1 - |R̃|²_I cos²(u, M̄u)` with `u` the rotation axis of `R̃`.
pub fn rho(m: &Mat3, r_tilde: &crate::liegroup::Rot3) -> f64 {
    let aa = r_tilde.to_angle_axis();
    let mb = m_bar(m);
    let mu = mb * aa.axis;
    let c = if mu.norm() > 0.0 { aa.axis.dot(&mu) / mu.norm() } else { 1.0 };
    let d = r_tilde.distance();
    1.0 - d * d * c * c
}

/// Rotational decay constant `λ_R = 4k_R ϱ_M λ_min(M̲̄)` with
/// `M̲ = tr(M̄²)I - 2M̄²` and `M̲̄ = ½(tr(M̲)I - M̲)`.
pub fn lambda_r(m: &Mat3, k_r: f64, rho_min: f64) -> f64 {
    let mb = m_bar(m);
    let mb2 = mb * mb;
    let m_under = Mat3::identity() * mb2.trace() - mb2 * 2.0;
    let (e, _) = sorted_eigen(&m_bar(&m_under));
    4.0 * k_r * rho_min * e[2]
}

/// Upper limit on `ε` for the fixed-gain form: `λ_R λ_min(P₃)/(4c₁²)`, with
/// `P₃ = [(k_p - μk_v)k_c, μk_c k_p/2; μk_c k_p/2, μ]` and
/// `c₁ = max{‖g‖/(k_c k_v), μ‖g‖}`.
pub fn epsilon_limit(cfg: &ObserverConfig, mu: f64, rho_min: f64) -> f64 {
    let lm = &cfg.geometry.landmarks;
    let (k_c, k_p, k_v) = (lm.k_c(), cfg.params.k_p, cfg.params.k_v);
    let a = (k_p - mu * k_v) * k_c;
    let b = mu * k_c * k_p / 2.0;
    let d = mu;
    let l_min = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let g = cfg.params.gravity.norm();
    let c1 = (g / (k_c * k_v)).max(mu * g);
    lambda_r(&lm.m(), cfg.params.k_r, rho_min) * l_min / (4.0 * c1 * c1)
}

/// Parameters satisfying the admissibility conditions along the run: `μ` at
/// half its limit, `ϱ_M` taken as the minimum over the logged flow samples,
/// `ε` at half its limit, `μ̄ = 0`.
pub fn admissible_params(cfg: &ObserverConfig, log: &RunLog) -> Result<LyapunovParams> {
    let lm = &cfg.geometry.landmarks;
    let mu = 0.5 * mu_limit(lm.k_c(), cfg.params.k_p, cfg.params.k_v);
    let mut rho_min = f64::INFINITY;
    for r in log.records.iter().filter(|r| !r.jump_flag) {
        let Some(tr) = r.truth else { return invalid("Lyapunov evaluation needs truth") };
        rho_min = rho_min.min(rho(&lm.m(), &(tr.x.r * r.state.x.r.transpose())));
    }
    Ok(LyapunovParams { epsilon: 0.5 * epsilon_limit(cfg, mu, rho_min.max(0.0)), mu, mu_bar: 0.0 })
}

/// `𝓛` at every record of the run.
pub fn lyapunov_series(cfg: &ObserverConfig, log: &RunLog, params: &LyapunovParams) -> Result<Vec<f64>> {
    let lm = &cfg.geometry.landmarks;
    let (m, p_c, k_c) = (lm.m(), lm.p_c(), lm.k_c());
    let variant = cfg.params.variant;
    let mut out = Vec::with_capacity(log.records.len());
    for rec in &log.records {
        let Some(tr) = rec.truth else { return invalid("Lyapunov evaluation needs truth") };
        let e = ErrorCoords::between(&tr.x, &rec.state.x, &p_c);
        let mut l_r = ((Mat3::identity() - e.r.matrix()) * m).trace();
        if variant.estimates_gyro_bias() {
            let b = tr.b_omega - rec.state.b_omega;
            l_r += b.norm_squared() / cfg.params.k_omega - params.mu_bar * psi(e.r.matrix()).dot(&(rec.state.x.r * b));
        }
        let l_p = match &rec.state.p {
            Some(p) => {
                let rt = tr.x.r.matrix().transpose();
                let n = p.nrows();
                let mut x = DMat::zeros(n, 1);
                x.fixed_view_mut::<3, 1>(0, 0).copy_from(&(rt * e.p_e));
                x.fixed_view_mut::<3, 1>(3, 0).copy_from(&(rt * e.v));
                if n == 9 {
                    x.fixed_view_mut::<3, 1>(6, 0).copy_from(&(tr.b_accel - rec.state.b_accel));
                }
                let Some(chol) = p.clone().cholesky() else { return invalid("Riccati solution is not positive definite") };
                (x.transpose() * chol.solve(&x))[(0, 0)]
            }
            None => {
                0.5 * e.p_e.norm_squared() + e.v.norm_squared() / (2.0 * k_c * cfg.params.k_v) - params.mu * e.p_e.dot(&e.v)
            }
        };
        out.push(l_r + params.epsilon * l_p);
    }
    Ok(out)
}

/// Least-squares line through `(t, ln 𝓛)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Fits `ln y = a + s t` over the samples with `y > 0`.
pub fn fit_log_decay(ts: &[f64], ys: &[f64]) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = ts.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(t, y)| (*t, y.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 3 {
        return None;
    }
    let (mt, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(DecayFit { slope, intercept: my - slope * mt, r_squared, samples: pts.len() })
}

/// Fit over the segment after the last jump, truncated where `𝓛` first falls
/// below `floor` times its value at the segment start (the numerical floor).
pub fn post_jump_decay(log: &RunLog, series: &[f64], floor: f64) -> Option<DecayFit> {
    let start = log.records.iter().rposition(|r| r.jump_flag).map_or(0, |i| i + 1);
    let l0 = *series.get(start)?;
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (r, l) in log.records[start..].iter().zip(&series[start..]) {
        if *l < floor * l0 {
            break;
        }
        ts.push(r.t());
        ys.push(*l);
    }
    fit_log_decay(&ts, &ys)
}

/// `(λ_min, λ_max)` of `M̄`, which bound `tr((I-R̃)M)` by `4λ|R̃|²_I`.
pub fn m_bar_bounds(m: &Mat3) -> (f64, f64) {
    let (e, _) = sorted_eigen(&m_bar(m));
    (e[2], e[0])
}

/// Upper bound on the number of jumps: `⌈4λ_max(M̄)/δ⌉`.
pub fn jump_bound(cfg: &ObserverConfig) -> usize {
    let (_, hi) = m_bar_bounds(&cfg.geometry.landmarks.m());
    (4.0 * hi / cfg.geometry.gap.delta).ceil() as usize
}

