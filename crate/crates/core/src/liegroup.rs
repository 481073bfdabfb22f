//! Rotations, the extended pose group SE₂(3) and its Lie algebra.
//!
//! An element of SE₂(3) is stored as `(R, v, p)` and embeds as the 5×5 matrix
//!
//! ```text
//! ⎡ R  v  p ⎤
//! ⎢ 0  1  0 ⎥
//! ⎣ 0  0  1 ⎦
//! ```
//!
//! A tangent vector `[Ω α ν; 0]` is stored as `(ω, α, ν)` with `Ω = ω×`.

use nalgebra::{Matrix3, Matrix5, SymmetricEigen, Vector3, Vector5};
use std::f64::consts::PI;
use std::ops::Mul;

use crate::error::{invalid, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Mat5 = Matrix5<f64>;

/// Numeric tolerances shared by the validating constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entry of `RᵀR - I` accepted as a rotation.
    pub orthogonality: f64,
    /// Max deviation of `‖u‖` from 1 accepted as a unit vector.
    pub unit_norm: f64,
    /// Below this rotation angle the exponential uses Taylor coefficients.
    pub small_angle: f64,
}

pub const TOL: Tolerances = Tolerances {
    orthogonality: 1e-9,
    unit_norm: 1e-9,
    small_angle: 1e-6,
};

/// `hat(w) x = w × x`
pub fn hat(w: &Vec3) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Inverse of [`hat`]. Fails if `m` is not antisymmetric.
pub fn vee(m: &Mat3) -> Result<Vec3> {
    let scale = m.amax().max(1.0);
    if (m + m.transpose()).amax() > TOL.orthogonality * scale {
        return invalid("vee: matrix is not antisymmetric");
    }
    Ok(Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Antisymmetric part `(A - Aᵀ)/2`.
pub fn proj_antisym(a: &Mat3) -> Mat3 {
    (a - a.transpose()) * 0.5
}

/// `ψ(A) = vee(proj_antisym(A))`, so that `⟨⟨A, u×⟩⟩ = 2 uᵀψ(A)`.
pub fn psi(a: &Mat3) -> Vec3 {
    0.5 * Vec3::new(
        a[(2, 1)] - a[(1, 2)],
        a[(0, 2)] - a[(2, 0)],
        a[(1, 0)] - a[(0, 1)],
    )
}

/// Frobenius inner product `tr(AᵀB)`.
pub fn frob_inner(a: &Mat3, b: &Mat3) -> f64 {
    a.component_mul(b).sum()
}

/// A rotation matrix. Construct with [`Rot3::from_matrix`] (validated) or
/// [`Rot3::orthonormalize`] (projected).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot3(Mat3);

impl Rot3 {
    pub fn identity() -> Self {
        Rot3(Mat3::identity())
    }

    pub fn from_matrix(m: Mat3) -> Result<Self> {
        if !m.iter().all(|x| x.is_finite()) {
            return invalid("rotation has non-finite entries");
        }
        let defect = (m.transpose() * m - Mat3::identity()).amax();
        if defect > TOL.orthogonality || m.determinant() <= 0.0 {
            return invalid(format!("not a rotation (orthogonality defect {defect:.3e})"));
        }
        Ok(Rot3(m))
    }

    /// Wraps `m` without checking. Callers guarantee `m ∈ SO(3)`.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rot3(m)
    }

    /// Nearest rotation in Frobenius norm (polar factor).
    pub fn orthonormalize(m: &Mat3) -> Self {
        let svd = m.svd(true, true);
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let mut d = Mat3::identity();
        if (u * vt).determinant() < 0.0 {
            d[(2, 2)] = -1.0;
        }
        Rot3(u * d * vt)
    }

    /// `exp(θ u×) = I + sinθ u× + (1-cosθ)(u×)²`.
    pub fn from_angle_axis(theta: f64, axis: &Vec3) -> Result<Self> {
        if !theta.is_finite() {
            return invalid("angle is not finite");
        }
        check_unit(axis)?;
        let (s, c) = if theta.abs() == PI {
            // PI as an f64 is slightly short of π; snap so half turns are exact involutions.
            (0.0, -1.0)
        } else {
            theta.sin_cos()
        };
        let u = hat(axis);
        Ok(Rot3(Mat3::identity() + u * s + u * u * (1.0 - c)))
    }

    /// Exponential of `w×` for any `w`.
    pub fn exp(w: &Vec3) -> Self {
        let theta = w.norm();
        let (a, b) = so3_coeffs(theta);
        let wx = hat(w);
        Rot3(Mat3::identity() + wx * a + wx * wx * b)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rot3(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    /// `|R|_I = sqrt(tr(I - R)/4)`, in `[0, 1]`.
    pub fn distance(&self) -> f64 {
        ((3.0 - self.0.trace()) * 0.25).clamp(0.0, 1.0).sqrt()
    }

    pub fn to_angle_axis(&self) -> AngleAxis {
        AngleAxis::from_rotation(self)
    }
}

impl Mul for Rot3 {
    type Output = Rot3;
    fn mul(self, rhs: Rot3) -> Rot3 {
        Rot3(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for Rot3 {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

/// `|R|_I` for a rotation.
pub fn rot_distance(r: &Rot3) -> f64 {
    r.distance()
}

fn check_unit(u: &Vec3) -> Result<()> {
    if !u.iter().all(|x| x.is_finite()) || (u.norm() - 1.0).abs() > TOL.unit_norm {
        return invalid(format!("axis is not a unit vector (norm {})", u.norm()));
    }
    Ok(())
}

/// `(sinθ/θ, (1-cosθ)/θ²)`
fn so3_coeffs(theta: f64) -> (f64, f64) {
    if theta < TOL.small_angle {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        let h = (0.5 * theta).sin() / theta;
        (theta.sin() / theta, 2.0 * h * h)
    }
}

/// `((1-cosθ)/θ², (θ-sinθ)/θ³)`, the left-Jacobian coefficients.
fn jacobian_coeffs(theta: f64) -> (f64, f64) {
    if theta < TOL.small_angle {
        let t2 = theta * theta;
        (0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0)
    } else {
        // half-angle form avoids the cancellation in 1 - cosθ
        let h = (0.5 * theta).sin() / theta;
        (2.0 * h * h, (theta - theta.sin()) / (theta * theta * theta))
    }
}

/// Angle in `[0, π]` and unit axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleAxis {
    pub angle: f64,
    pub axis: Vec3,
}

impl AngleAxis {
    pub fn new(angle: f64, axis: Vec3) -> Result<Self> {
        check_unit(&axis)?;
        Ok(AngleAxis { angle, axis })
    }

    pub fn to_rotation(&self) -> Rot3 {
        Rot3::from_angle_axis(self.angle, &self.axis).expect("axis validated at construction")
    }

    /// Logarithm. At the identity the axis is arbitrary and `e₃` is returned.
    pub fn from_rotation(r: &Rot3) -> Self {
        let m = r.matrix();
        let s_vec = psi(m);
        let s = s_vec.norm();
        let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let angle = s.atan2(c);
        if s < 1e-15 && c > 0.0 {
            return AngleAxis { angle: 0.0, axis: Vec3::z() };
        }
        if c > 0.0 {
            return AngleAxis { angle, axis: s_vec / s };
        }
        // Near π the symmetric part (1-cosθ) uuᵀ is better conditioned.
        let b = (m + m.transpose()) * 0.5 - Mat3::identity() * c;
        let eig = SymmetricEigen::new(b);
        let k = eig.eigenvalues.imax();
        let mut axis: Vec3 = eig.eigenvectors.column(k).into_owned().normalize();
        if axis.dot(&s_vec) < 0.0 {
            axis = -axis;
        }
        AngleAxis { angle, axis }
    }
}

/// `𝓡_a(θ, u)`
pub fn rot_angle_axis(theta: f64, axis: &Vec3) -> Result<Rot3> {
    Rot3::from_angle_axis(theta, axis)
}

/// Element `(R, v, p)` of SE₂(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SE23 {
    pub r: Rot3,
    pub v: Vec3,
    pub p: Vec3,
}

impl SE23 {
    pub fn new(r: Rot3, v: Vec3, p: Vec3) -> Self {
        SE23 { r, v, p }
    }

    pub fn identity() -> Self {
        SE23::new(Rot3::identity(), Vec3::zeros(), Vec3::zeros())
    }

    pub fn matrix(&self) -> Mat5 {
        let mut m = Mat5::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.r.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.v);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.p);
        m
    }

    /// Validating inverse of [`SE23::matrix`].
    pub fn from_matrix(m: &Mat5) -> Result<Self> {
        let bottom = m.fixed_view::<2, 5>(3, 0);
        let expect = Mat5::identity().fixed_view::<2, 5>(3, 0).into_owned();
        if (bottom - expect).amax() > TOL.orthogonality {
            return invalid("bottom rows of an SE2(3) matrix must be [0 0 0 1 0; 0 0 0 0 1]");
        }
        let r = Rot3::from_matrix(m.fixed_view::<3, 3>(0, 0).into_owned())?;
        Ok(SE23::new(
            r,
            m.fixed_view::<3, 1>(0, 3).into_owned(),
            m.fixed_view::<3, 1>(0, 4).into_owned(),
        ))
    }

    pub fn inverse(&self) -> Self {
        let rt = self.r.transpose();
        SE23::new(rt, -(rt * self.v), -(rt * self.p))
    }

    pub fn compose(&self, other: &SE23) -> SE23 {
        SE23::new(
            self.r * other.r,
            self.r * other.v + self.v,
            self.r * other.p + self.p,
        )
    }

    /// Action on a homogeneous 5-vector.
    pub fn act(&self, x: &Vector5<f64>) -> Vector5<f64> {
        self.matrix() * x
    }
}

impl Mul for SE23 {
    type Output = SE23;
    fn mul(self, rhs: SE23) -> SE23 {
        self.compose(&rhs)
    }
}

/// Element `[ω× α ν; 0]` of the Lie algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    pub omega: Vec3,
    pub alpha: Vec3,
    pub nu: Vec3,
}

impl Tangent {
    pub fn new(omega: Vec3, alpha: Vec3, nu: Vec3) -> Self {
        Tangent { omega, alpha, nu }
    }

    pub fn zero() -> Self {
        Tangent::new(Vec3::zeros(), Vec3::zeros(), Vec3::zeros())
    }

    pub fn matrix(&self) -> Mat5 {
        let mut m = Mat5::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat(&self.omega));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.alpha);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.nu);
        m
    }

    pub fn from_matrix(m: &Mat5) -> Result<Self> {
        if m.fixed_view::<2, 5>(3, 0).amax() > TOL.orthogonality {
            return invalid("bottom rows of a tangent matrix must vanish");
        }
        Ok(Tangent::new(
            vee(&m.fixed_view::<3, 3>(0, 0).into_owned())?,
            m.fixed_view::<3, 1>(0, 3).into_owned(),
            m.fixed_view::<3, 1>(0, 4).into_owned(),
        ))
    }

    pub fn scale(&self, s: f64) -> Self {
        Tangent::new(self.omega * s, self.alpha * s, self.nu * s)
    }

    pub fn norm(&self) -> f64 {
        (self.omega.norm_squared() + self.alpha.norm_squared() + self.nu.norm_squared()).sqrt()
    }
}

impl std::ops::Neg for Tangent {
    type Output = Tangent;
    fn neg(self) -> Tangent {
        self.scale(-1.0)
    }
}

impl std::ops::Add for Tangent {
    type Output = Tangent;
    fn add(self, o: Tangent) -> Tangent {
        Tangent::new(self.omega + o.omega, self.alpha + o.alpha, self.nu + o.nu)
    }
}

impl std::ops::Sub for Tangent {
    type Output = Tangent;
    fn sub(self, o: Tangent) -> Tangent {
        self + (-o)
    }
}

/// Closed-form exponential. The rotation block is Rodrigues' formula and
/// the two translation columns are mapped by the left Jacobian of SO(3).
pub fn exp_se23(u: &Tangent) -> SE23 {
    let theta = u.omega.norm();
    let wx = hat(&u.omega);
    let (a, b) = jacobian_coeffs(theta);
    let jl = Mat3::identity() + wx * a + wx * wx * b;
    SE23::new(Rot3::exp(&u.omega), jl * u.alpha, jl * u.nu)
}

/// `Ad_X U = X U X⁻¹`.
pub fn adjoint(x: &SE23, u: &Tangent) -> Tangent {
    let w = x.r * u.omega;
    let wx = hat(&w);
    Tangent::new(w, x.r * u.alpha - wx * x.v, x.r * u.nu - wx * x.p)
}

/// `ℙ(A) = [ℙ_a(A₁) a₂ a₃; 0]`, the orthogonal projection onto the algebra.
pub fn proj_se23(a: &Mat5) -> Tangent {
    proj_se23_gains(a, 1.0, &Mat3::identity(), &Mat3::identity())
}

/// Gain-weighted projection `[k_R ℙ_a(A₁) K_v a₂ K_p a₃; 0]`.
pub fn proj_se23_gains(a: &Mat5, k_r: f64, k_v: &Mat3, k_p: &Mat3) -> Tangent {
    let a1 = a.fixed_view::<3, 3>(0, 0).into_owned();
    let a2 = a.fixed_view::<3, 1>(0, 3).into_owned();
    let a3 = a.fixed_view::<3, 1>(0, 4).into_owned();
    Tangent::new(psi(&a1) * k_r, k_v * a2, k_p * a3)
}
