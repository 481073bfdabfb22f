//! Continuous Riccati equation for the translational error and the
//! associated gain extraction and observability checks.
//!
//! The error state is `[Rᵀp̃_e, Rᵀṽ]` (six states) or `[Rᵀp̃_e, Rᵀṽ, b̃_a]`
//! (nine states). With `ϖ` the bias-compensated angular velocity:
//!
//! ```text
//! six:   A = ⎡-ϖ×   I ⎤        nine:  A = ⎡-ϖ×   I    0⎤     C = [I 0 …]
//!            ⎣  0  -ϖ×⎦                   ⎢  0  -ϖ×   I⎥
//!                                         ⎣  0    0   0⎦
//! ```

use nalgebra::{DMatrix, SMatrix};

use crate::error::{invalid, Error, Result};
use crate::integrate::rk4;
use crate::liegroup::{hat, Mat3, Rot3, Vec3};

pub type DMat = DMatrix<f64>;

/// State layout of the Riccati equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CreVariant {
    /// Six states, `ϖ = ω_y`.
    NoBias6,
    /// Six states, `ϖ = ω_y - b̂_ω`.
    GyroBias6,
    /// Nine states including the accelerometer bias error.
    FullBias9,
}

impl CreVariant {
    pub fn dim(&self) -> usize {
        match self {
            CreVariant::NoBias6 | CreVariant::GyroBias6 => 6,
            CreVariant::FullBias9 => 9,
        }
    }

    pub fn a_matrix(&self, w: &Vec3) -> DMat {
        let n = self.dim();
        let mut a = DMat::zeros(n, n);
        let wx = -hat(w);
        a.fixed_view_mut::<3, 3>(0, 0).copy_from(&wx);
        a.fixed_view_mut::<3, 3>(3, 3).copy_from(&wx);
        a.fixed_view_mut::<3, 3>(0, 3).copy_from(&Mat3::identity());
        if n == 9 {
            a.fixed_view_mut::<3, 3>(3, 6).copy_from(&Mat3::identity());
        }
        a
    }

    pub fn c_matrix(&self) -> DMat {
        let mut c = DMat::zeros(3, self.dim());
        c.fixed_view_mut::<3, 3>(0, 0).copy_from(&Mat3::identity());
        c
    }
}

/// Fails with [`Error::RiccatiDivergence`] unless `p` is finite and
/// admits a Cholesky factorization.
pub fn check_pd(p: &DMat, t: f64) -> Result<()> {
    if !p.iter().all(|x| x.is_finite()) || p.clone().cholesky().is_none() {
        return Err(Error::RiccatiDivergence { t });
    }
    Ok(())
}

pub fn symmetrize(p: &DMat) -> DMat {
    (p + p.transpose()) * 0.5
}

/// `AP + PAᵀ - PCᵀQCP + V`
pub fn cre_rhs(p: &DMat, a: &DMat, c: &DMat, q: &DMat, v: &DMat) -> DMat {
    let pct = p * c.transpose();
    a * p + p * a.transpose() - &pct * q * pct.transpose() + v
}

/// One RK4 step of the Riccati equation followed by symmetrization and a
/// definiteness check. `a_of_t` supplies `A` at the stage times.
pub fn cre_step(
    p: &DMat,
    t: f64,
    dt: f64,
    a_of_t: impl Fn(f64) -> DMat,
    c: &DMat,
    q: &DMat,
    v: &DMat,
) -> Result<DMat> {
    let next = rk4(t, dt, p, |s, x| cre_rhs(x, &a_of_t(s), c, q, v));
    let next = symmetrize(&next);
    check_pd(&next, t + dt)?;
    Ok(next)
}

/// Open-loop covariance flow `Ṗ = AP + PAᵀ + V`.
pub fn covariance_propagate(p: &DMat, t: f64, dt: f64, a_of_t: impl Fn(f64) -> DMat, v: &DMat) -> Result<DMat> {
    let next = rk4(t, dt, p, |s, x| {
        let a = a_of_t(s);
        &a * x + x * a.transpose() + v
    });
    let next = symmetrize(&next);
    check_pd(&next, t + dt)?;
    Ok(next)
}

/// Continuous gain `L = PCᵀQ`.
pub fn continuous_gain(p: &DMat, c: &DMat, q: &DMat) -> DMat {
    p * c.transpose() * q
}

/// Discrete correction: `L = PCᵀ(CPCᵀ + Q⁻¹)⁻¹` and `P⁺ = P - LCP`.
pub fn discrete_gain(p: &DMat, c: &DMat, q: &DMat, t: f64) -> Result<(DMat, DMat)> {
    let q_inv = q
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("output weight Q is singular".into()))?;
    let s = c * p * c.transpose() + q_inv;
    let s_inv = s.try_inverse().ok_or(Error::RiccatiDivergence { t })?;
    let l = p * c.transpose() * s_inv;
    let next = symmetrize(&(p - &l * c * p));
    check_pd(&next, t)?;
    Ok((l, next))
}

/// Observer gains in the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub k_p: Mat3,
    pub k_v: Mat3,
    pub k_a: Option<Mat3>,
}

/// `K_p = R̂L₁R̂ᵀ/k_c`, `K_v = R̂L₂R̂ᵀ/k_c` and, for nine states,
/// `K_a = R̂L₃R̂ᵀ/k_c`, where `Lᵢ` are the 3×3 row blocks of `L`.
pub fn extract_gains(l: &DMat, r_hat: &Rot3, k_c: f64) -> Result<Gains> {
    if l.ncols() != 3 || !(l.nrows() == 6 || l.nrows() == 9) {
        return invalid(format!("gain matrix must be 6x3 or 9x3, got {}x{}", l.nrows(), l.ncols()));
    }
    let r = r_hat.matrix();
    let block = |i: usize| -> Mat3 {
        let li: Mat3 = l.fixed_view::<3, 3>(3 * i, 0).into_owned();
        r * li * r.transpose() / k_c
    };
    Ok(Gains { k_p: block(0), k_v: block(1), k_a: (l.nrows() == 9).then(|| block(2)) })
}

/// Extreme eigenvalues `(min, max)` of a symmetric matrix.
pub fn eig_bounds(p: &DMat) -> (f64, f64) {
    let e = p.clone().symmetric_eigenvalues();
    (e.min(), e.max())
}

/// Transition matrix `Φ(t, τ)` of the six-state `A` obtained from the
/// factorization `Φ = T(t) exp(Ā(t-τ)) T(τ)ᵀ`, where `T = blkdiag(R̄, R̄)`,
/// `dR̄/ds = (-ϖ)× R̄` with `R̄(τ) = I`, and `Ā = [0 I; 0 0]`.
pub fn transition_factorized(omega: impl Fn(f64) -> Vec3, t: f64, tau: f64, steps: usize) -> DMat {
    let rbar = integrate_rbar(&omega, tau, t, steps);
    let s = t - tau;
    let mut phi = DMat::zeros(6, 6);
    phi.fixed_view_mut::<3, 3>(0, 0).copy_from(&rbar);
    phi.fixed_view_mut::<3, 3>(3, 3).copy_from(&rbar);
    phi.fixed_view_mut::<3, 3>(0, 3).copy_from(&(rbar * s));
    phi
}

fn integrate_rbar(omega: &impl Fn(f64) -> Vec3, from: f64, to: f64, steps: usize) -> Mat3 {
    let n = steps.max(1);
    let h = (to - from) / n as f64;
    let mut r = Mat3::identity();
    for k in 0..n {
        r = rk4(from + k as f64 * h, h, &r, |s, x| -hat(&omega(s)) * x);
    }
    r
}

/// Transition matrix by direct RK4 integration of `dΦ/ds = A(s)Φ`.
pub fn transition_direct(a_of_t: impl Fn(f64) -> DMat, n: usize, t: f64, tau: f64, steps: usize) -> DMat {
    let steps = steps.max(1);
    let h = (t - tau) / steps as f64;
    let mut phi = DMat::identity(n, n);
    for k in 0..steps {
        phi = rk4(tau + k as f64 * h, h, &phi, |s, x| a_of_t(s) * x);
    }
    phi
}

/// Normalized observability Gramian `W = (1/δ)∫ₜ^{t+δ} Φ(s,t)ᵀCᵀCΦ(s,t) ds`
/// by composite Simpson quadrature. Six-state variants use the factorized
/// transition matrix; the nine-state variant integrates `Φ` directly.
pub fn gramian(variant: CreVariant, omega: impl Fn(f64) -> Vec3, t: f64, window: f64) -> Result<DMat> {
    if !(window > 0.0) {
        return invalid("Gramian window must be positive");
    }
    const INTERVALS: usize = 64;
    const SUBSTEPS: usize = 8;
    let n = variant.dim();
    let c = variant.c_matrix();
    let h = window / INTERVALS as f64;
    let mut w = DMat::zeros(n, n);
    let mut phi = DMat::identity(n, n);
    let mut rbar = Mat3::identity();
    for k in 0..=INTERVALS {
        let s = t + k as f64 * h;
        if k > 0 {
            let s0 = s - h;
            match variant {
                CreVariant::FullBias9 => {
                    let hs = h / SUBSTEPS as f64;
                    for i in 0..SUBSTEPS {
                        let si = s0 + i as f64 * hs;
                        phi = rk4(si, hs, &phi, |r, x| variant.a_matrix(&omega(r)) * x);
                    }
                }
                _ => {
                    rbar = integrate_rbar(&omega, s0, s, SUBSTEPS) * rbar;
                    phi.fill(0.0);
                    let el = s - t;
                    phi.fixed_view_mut::<3, 3>(0, 0).copy_from(&rbar);
                    phi.fixed_view_mut::<3, 3>(3, 3).copy_from(&rbar);
                    phi.fixed_view_mut::<3, 3>(0, 3).copy_from(&(rbar * el));
                }
            }
        }
        let cp = &c * &phi;
        let weight = if k == 0 || k == INTERVALS {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w += cp.transpose() * cp * weight;
    }
    Ok(w * (h / 3.0) / window)
}

/// Smallest eigenvalue of [`gramian`].
pub fn gramian_min_eig(variant: CreVariant, omega: impl Fn(f64) -> Vec3, t: f64, window: f64) -> Result<f64> {
    Ok(eig_bounds(&gramian(variant, omega, t, window)?).0)
}

/// Observability matrix of the nine-state pair `(A, C)`:
///
/// ```text
/// ⎡ I              0      0 ⎤
/// ⎢ -ϖ×            I      0 ⎥
/// ⎣ (ϖ×)² - ϖ̇×   -2ϖ×    I ⎦
/// ```
/// with `ϖ = ω - b̂_ω`.
pub fn observability_matrix(omega: &Vec3, omega_dot: &Vec3, b_omega: &Vec3, b_omega_dot: &Vec3) -> SMatrix<f64, 9, 9> {
    let w = hat(&(omega - b_omega));
    let wd = hat(&(omega_dot - b_omega_dot));
    let mut o = SMatrix::<f64, 9, 9>::identity();
    o.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-w));
    o.fixed_view_mut::<3, 3>(6, 0).copy_from(&(w * w - wd));
    o.fixed_view_mut::<3, 3>(6, 3).copy_from(&(w * -2.0));
    o
}

/// `det` of [`observability_matrix`] by LU factorization.
pub fn observability_det(omega: &Vec3, omega_dot: &Vec3, b_omega: &Vec3, b_omega_dot: &Vec3) -> f64 {
    observability_matrix(omega, omega_dot, b_omega, b_omega_dot).determinant()
}
