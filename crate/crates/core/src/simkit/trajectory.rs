//! Analytic ground-truth trajectories.

use crate::error::{invalid, Result};
use crate::integrate::rk4;
use crate::liegroup::{hat, Mat3, Rot3, Vec3, SE23};

/// Position path with analytic first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum Path {
    /// `p(t) = center + [r cos(wt), r sin(wt), height]`.
    Circle { radius: f64, rate: f64, height: f64, center: Vec3 },
    /// Fixed position.
    Hover { position: Vec3 },
    /// Natural cubic spline through timed waypoints.
    Waypoints(CubicSpline),
}

impl Path {
    /// `(p, ṗ, p̈)` at `t`.
    pub fn eval(&self, t: f64) -> (Vec3, Vec3, Vec3) {
        match self {
            Path::Circle { radius, rate, height, center } => {
                let (s, c) = (rate * t).sin_cos();
                let w2 = rate * rate;
                (
                    center + Vec3::new(radius * c, radius * s, *height),
                    Vec3::new(-radius * rate * s, radius * rate * c, 0.0),
                    Vec3::new(-radius * w2 * c, -radius * w2 * s, 0.0),
                )
            }
            Path::Hover { position } => (*position, Vec3::zeros(), Vec3::zeros()),
            Path::Waypoints(s) => s.eval(t),
        }
    }
}

/// Angular velocity in the body frame, `ω(t) = offset + amplitude ⊙ sin(frequency ⊙ t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularRate {
    pub offset: Vec3,
    pub amplitude: Vec3,
    pub frequency: Vec3,
}

impl AngularRate {
    pub fn constant(w: Vec3) -> Self {
        AngularRate { offset: w, amplitude: Vec3::zeros(), frequency: Vec3::zeros() }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.offset + self.amplitude.component_mul(&(self.frequency * t).map(f64::sin))
    }

    pub fn derivative(&self, t: f64) -> Vec3 {
        self.amplitude.component_mul(&self.frequency).component_mul(&(self.frequency * t).map(f64::cos))
    }
}

/// Ground truth: a position path plus an attitude driven by `ω(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub path: Path,
    pub omega: AngularRate,
    pub r0: Rot3,
}

/// Truth attitude integrator with a fixed number of RK4 substeps.
pub const TRUTH_SUBSTEPS: usize = 10;

impl Trajectory {
    /// Advances `R` from `t` to `t + dt` by RK4 on `Ṙ = Rω×`, using
    /// [`TRUTH_SUBSTEPS`] substeps, and returns the attitude at each substep end.
    pub fn advance_attitude(&self, r: &Rot3, t: f64, dt: f64) -> Vec<Rot3> {
        let h = dt / TRUTH_SUBSTEPS as f64;
        let mut m: Mat3 = *r.matrix();
        let mut out = Vec::with_capacity(TRUTH_SUBSTEPS);
        for k in 0..TRUTH_SUBSTEPS {
            m = rk4(t + k as f64 * h, h, &m, |s, x| x * hat(&self.omega.at(s)));
            out.push(Rot3::orthonormalize(&m));
        }
        out
    }

    /// Truth pose at `t` for a given attitude.
    pub fn pose(&self, r: Rot3, t: f64) -> SE23 {
        let (p, v, _) = self.path.eval(t);
        SE23::new(r, v, p)
    }

    /// Apparent acceleration `Rᵀ(v̇ - g)`.
    pub fn specific_force(&self, r: &Rot3, t: f64, gravity: &Vec3) -> Vec3 {
        let (_, _, a) = self.path.eval(t);
        r.matrix().transpose() * (a - gravity)
    }
}

/// Natural cubic spline, one per axis, through `(tᵢ, pᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    times: Vec<f64>,
    points: Vec<Vec3>,
    second: Vec<Vec3>,
}

impl CubicSpline {
    pub fn new(times: Vec<f64>, points: Vec<Vec3>) -> Result<Self> {
        let n = times.len();
        if n < 2 || points.len() != n {
            return invalid("spline needs at least two waypoints with matching times");
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("waypoint times must be strictly increasing");
        }
        // Tridiagonal system for second derivatives with zero end conditions.
        let mut second = vec![Vec3::zeros(); n];
        if n > 2 {
            let mut diag = vec![0.0; n];
            let mut rhs = vec![Vec3::zeros(); n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = times[i] - times[i - 1];
                let h1 = times[i + 1] - times[i];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = ((points[i + 1] - points[i]) / h1 - (points[i] - points[i - 1]) / h0) * 6.0;
                if i > 1 {
                    let w = h0 / diag[i - 1];
                    diag[i] -= w * upper[i - 1];
                    rhs[i] = rhs[i] - rhs[i - 1] * w;
                }
            }
            for i in (1..n - 1).rev() {
                let next = if i + 1 < n - 1 { second[i + 1] * upper[i] } else { Vec3::zeros() };
                second[i] = (rhs[i] - next) / diag[i];
            }
        }
        Ok(CubicSpline { times, points, second })
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// `(p, ṗ, p̈)`; outside the knot range the end segments are extended.
    pub fn eval(&self, t: f64) -> (Vec3, Vec3, Vec3) {
        let n = self.times.len();
        let i = self.times.partition_point(|&x| x <= t).clamp(1, n - 1) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let (a, b) = ((t1 - t) / h, (t - t0) / h);
        let (y0, y1, m0, m1) = (self.points[i], self.points[i + 1], self.second[i], self.second[i + 1]);
        let p = y0 * a + y1 * b + (m0 * (a * a * a - a) + m1 * (b * b * b - b)) * (h * h / 6.0);
        let v = (y1 - y0) / h + (m1 * (3.0 * b * b - 1.0) - m0 * (3.0 * a * a - 1.0)) * (h / 6.0);
        let acc = m0 * a + m1 * b;
        (p, v, acc)
    }
}
