//! Landmark geometry and the hybrid jump machinery built on it.
//!
//! For weighted landmarks `(pᵢ, kᵢ)` the scalar `k_c = Σkᵢ`, the weighted
//! centroid `p_c` and the scatter `M = Σkᵢ(pᵢ-p_c)(pᵢ-p_c)ᵀ` determine
//! the attitude information content. The transformation set `ℚ` holds
//! rotations by a fixed angle `θ` about the axes of `𝕌`, each placed to
//! rotate about `p_c`; the jump test compares the cost `Υ` before and after
//! applying the best element of `ℚ`.

use nalgebra::SymmetricEigen;

use crate::error::{invalid, Error, Result};
use crate::liegroup::{Mat3, Rot3, Vec3, SE23};

/// Relative gap under which two eigenvalues of `M` are treated as equal.
pub const REPEATED_EIGENVALUE_GAP: f64 = 1e-7;
/// Relative size under which an eigenvalue of `M` is treated as zero.
pub const ZERO_EIGENVALUE: f64 = 1e-9;
/// Fraction of `(1-cosθ)Δ*_M` used for the default gap `δ`.
pub const DEFAULT_DELTA_FACTOR: f64 = 0.3;

/// Weighted landmark configuration and its derived scatter geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    points: Vec<Vec3>,
    weights: Vec<f64>,
    k_c: f64,
    p_c: Vec3,
    m: Mat3,
    eigenvalues: Vec3,
    eigenvectors: [Vec3; 3],
}

impl LandmarkSet {
    /// Builds the set. Needs at least three landmarks, positive weights and
    /// a scatter with at least two nonzero eigenvalues.
    pub fn new(points: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return invalid("landmark and weight counts differ");
        }
        if points.len() < 3 {
            return Err(Error::InsufficientLandmarks { found: points.len() });
        }
        if points.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
            return invalid("landmark coordinates must be finite");
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return invalid("landmark weights must be positive");
        }
        let k_c: f64 = weights.iter().sum();
        let p_c = points
            .iter()
            .zip(&weights)
            .fold(Vec3::zeros(), |acc, (p, k)| acc + p * *k)
            / k_c;
        let m = points.iter().zip(&weights).fold(Mat3::zeros(), |acc, (p, k)| {
            let d = p - p_c;
            acc + d * d.transpose() * *k
        });
        let (eigenvalues, eigenvectors) = sorted_eigen(&m);
        let scale = eigenvalues[0].max(f64::MIN_POSITIVE);
        if eigenvalues[0] <= 0.0 || eigenvalues[1] <= ZERO_EIGENVALUE * scale {
            return Err(Error::CollinearLandmarks);
        }
        Ok(LandmarkSet { points, weights, k_c, p_c, m, eigenvalues, eigenvectors })
    }

    /// Equal weights `1/n`.
    pub fn uniform(points: Vec<Vec3>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![1.0 / n.max(1) as f64; n])
    }

    /// The landmarks with the given indices, keeping their weights.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut pts = Vec::with_capacity(indices.len());
        let mut ws = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.points.len() {
                return invalid(format!("landmark index {i} out of range"));
            }
            pts.push(self.points[i]);
            ws.push(self.weights[i]);
        }
        Self::new(pts, ws)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn k_c(&self) -> f64 {
        self.k_c
    }
    pub fn p_c(&self) -> Vec3 {
        self.p_c
    }
    pub fn m(&self) -> Mat3 {
        self.m
    }
    /// Eigenvalues of `M` in descending order.
    pub fn eigenvalues(&self) -> Vec3 {
        self.eigenvalues
    }
    /// Unit eigenvectors matching [`LandmarkSet::eigenvalues`], each with its
    /// largest-magnitude component positive.
    pub fn eigenvectors(&self) -> [Vec3; 3] {
        self.eigenvectors
    }
    /// `M̄ = ½(tr(M)I - M)`
    pub fn m_bar(&self) -> Mat3 {
        m_bar(&self.m)
    }
}

/// `½(tr(M)I - M)`
pub fn m_bar(m: &Mat3) -> Mat3 {
    (Mat3::identity() * m.trace() - m) * 0.5
}

/// Eigen-decomposition of a symmetric 3×3 matrix, sorted descending, with
/// a deterministic sign per eigenvector.
pub fn sorted_eigen(m: &Mat3) -> (Vec3, [Vec3; 3]) {
    let eig = SymmetricEigen::new(*m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = Vec3::new(eig.eigenvalues[idx[0]], eig.eigenvalues[idx[1]], eig.eigenvalues[idx[2]]);
    let vecs = idx.map(|i| {
        let v: Vec3 = eig.eigenvectors.column(i).into_owned().normalize();
        if v[v.iamax()] < 0.0 { -v } else { v }
    });
    (vals, vecs)
}

/// How the axis set `𝕌` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisPolicy {
    /// The eigenvectors of `M`.
    Eigenbasis,
    /// A user-supplied orthonormal triple.
    Orthogonal([Vec3; 3]),
}

/// Which case of the lower bound on `Δ*_M` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `𝕌` is an eigenbasis and all eigenvalues are equal and positive.
    EigenAllEqual,
    /// `𝕌` is an eigenbasis and exactly two eigenvalues are equal.
    EigenTwoEqual,
    /// `𝕌` is an eigenbasis and the eigenvalues are distinct.
    EigenDistinct,
    /// Any orthonormal triple, with `tr(M) > 2λ_max`.
    OrthogonalTriple,
}

/// Jump transformation set `ℚ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformationSet {
    theta: f64,
    axes: Vec<Vec3>,
    rotations: Vec<Rot3>,
    elements: Vec<SE23>,
    branch: Branch,
}

impl TransformationSet {
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn axes(&self) -> &[Vec3] {
        &self.axes
    }
    pub fn rotations(&self) -> &[Rot3] {
        &self.rotations
    }
    /// `X_q = 𝒯(R_q, 0, (I-R_q)p_c)` for each axis.
    pub fn elements(&self) -> &[SE23] {
        &self.elements
    }
    pub fn branch(&self) -> Branch {
        self.branch
    }
    pub fn len(&self) -> usize {
        self.axes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }
}

/// Builds `ℚ` for `θ ∈ (0, π]`, checking that one branch of the lower bound
/// on `Δ*_M` applies.
pub fn build_transformation_set(
    landmarks: &LandmarkSet,
    theta: f64,
    policy: AxisPolicy,
) -> Result<TransformationSet> {
    if !(theta > 0.0 && theta <= std::f64::consts::PI) {
        return invalid(format!("jump angle {theta} outside (0, pi]"));
    }
    let axes = match policy {
        AxisPolicy::Eigenbasis => landmarks.eigenvectors().to_vec(),
        AxisPolicy::Orthogonal(triple) => {
            for u in &triple {
                if (u.norm() - 1.0).abs() > 1e-9 {
                    return invalid("axis set must contain unit vectors");
                }
            }
            for i in 0..3 {
                for j in i + 1..3 {
                    if triple[i].dot(&triple[j]).abs() > 1e-9 {
                        return invalid("axis set must be mutually orthogonal");
                    }
                }
            }
            triple.to_vec()
        }
    };
    let branch = classify(&landmarks.eigenvalues(), policy)?;
    let p_c = landmarks.p_c();
    let mut rotations = Vec::with_capacity(axes.len());
    let mut elements = Vec::with_capacity(axes.len());
    for u in &axes {
        let rq = Rot3::from_angle_axis(theta, u)?;
        rotations.push(rq);
        elements.push(SE23::new(rq, Vec3::zeros(), p_c - rq * p_c));
    }
    Ok(TransformationSet { theta, axes, rotations, elements, branch })
}

fn same(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= REPEATED_EIGENVALUE_GAP * scale
}

/// Picks the applicable branch from descending eigenvalues.
pub fn classify(eigs: &Vec3, policy: AxisPolicy) -> Result<Branch> {
    let scale = eigs[0].abs().max(f64::MIN_POSITIVE);
    let zero3 = eigs[2] <= ZERO_EIGENVALUE * scale;
    let e12 = same(eigs[0], eigs[1], scale);
    let e23 = same(eigs[1], eigs[2], scale);
    if policy == AxisPolicy::Eigenbasis {
        if !zero3 {
            return Ok(match (e12, e23) {
                (true, true) => Branch::EigenAllEqual,
                (false, false) => Branch::EigenDistinct,
                _ => Branch::EigenTwoEqual,
            });
        }
        if !e12 && !e23 {
            return Ok(Branch::EigenDistinct);
        }
    }
    if eigs.sum() - 2.0 * eigs[0] > ZERO_EIGENVALUE * scale {
        return Ok(Branch::OrthogonalTriple);
    }
    Err(Error::ConfigurationUnsupported(format!(
        "no admissible axis set for scatter eigenvalues ({:.6e}, {:.6e}, {:.6e})",
        eigs[0], eigs[1], eigs[2]
    )))
}

/// Lower bound on `Δ*_M` for the given branch.
pub fn gap_lower_bound(eigs: &Vec3, branch: Branch) -> f64 {
    let tr = eigs.sum();
    match branch {
        Branch::EigenAllEqual => 2.0 / 3.0 * eigs[0],
        Branch::EigenTwoEqual => {
            let scale = eigs[0].abs().max(f64::MIN_POSITIVE);
            let (pair, single) = if same(eigs[0], eigs[1], scale) {
                (eigs[0], eigs[2])
            } else {
                (eigs[1], eigs[0])
            };
            (2.0 * pair).min(single)
        }
        Branch::EigenDistinct => tr - eigs[0],
        Branch::OrthogonalTriple => 2.0 / 3.0 * (tr - 2.0 * eigs[0]),
    }
}

/// `Δ_M(u, v) = uᵀ(tr(M_v)I - M_v)u` with `M_v = M(I - 2vvᵀ)`.
pub fn delta_m(u: &Vec3, v: &Vec3, m: &Mat3) -> f64 {
    let mv = m * (Mat3::identity() - v * v.transpose() * 2.0);
    (u.transpose() * (Mat3::identity() * mv.trace() - mv) * u)[0]
}

/// Candidate minimizers of `v ↦ max_{u∈𝕌} Δ_M(u, v)` over the unit vectors
/// of each eigenspace of `M`. A simple eigenvalue contributes its
/// eigenvector. On a repeated pair spanned by `e₁, e₂`, with
/// `v = cosφ e₁ + sinφ e₂`, each `Δ_M(u, v)` is `c + A cos2φ + B sin2φ`, so
/// the minimum of the maximum sits at the minimum of one sinusoid or where
/// two of them cross; all of those points are returned. On a triple
/// eigenvalue `Δ_M(u, v) = 2λ(uᵀv)²` for the orthonormal axes, minimized at
/// the normalized sum of the axes.
fn eigen_candidates(landmarks: &LandmarkSet, axes: &[Vec3]) -> Vec<Vec3> {
    let m = landmarks.m();
    let eigs = landmarks.eigenvalues();
    let vecs = landmarks.eigenvectors();
    let scale = eigs[0].abs().max(f64::MIN_POSITIVE);
    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..3 {
        let last = clusters.last_mut().unwrap();
        if same(eigs[*last.last().unwrap()], eigs[i], scale) {
            last.push(i);
        } else {
            clusters.push(vec![i]);
        }
    }
    let mut out = Vec::new();
    for c in clusters {
        match c.len() {
            1 => out.push(vecs[c[0]]),
            2 => {
                let (e1, e2) = (vecs[c[0]], vecs[c[1]]);
                let lambda = 0.5 * (eigs[c[0]] + eigs[c[1]]);
                // coefficients (c, A, B) of each axis as a function of ψ = 2φ
                let waves: Vec<(f64, f64, f64)> = axes
                    .iter()
                    .map(|u| {
                        let (a, b) = (u.dot(&e1), u.dot(&e2));
                        let k = m.trace() - 2.0 * lambda - (u.transpose() * m * u)[0];
                        (k + lambda * (a * a + b * b), lambda * (a * a - b * b), 2.0 * lambda * a * b)
                    })
                    .collect();
                let mut psis = vec![0.0];
                for (i, &(ci, ai, bi)) in waves.iter().enumerate() {
                    if ai != 0.0 || bi != 0.0 {
                        psis.push((-bi).atan2(-ai));
                    }
                    for &(cj, aj, bj) in &waves[i + 1..] {
                        let (da, db) = (ai - aj, bi - bj);
                        let r = da.hypot(db);
                        if r > 0.0 && (cj - ci).abs() <= r {
                            let base = db.atan2(da);
                            let off = ((cj - ci) / r).acos();
                            psis.push(base + off);
                            psis.push(base - off);
                        }
                    }
                }
                out.extend(psis.into_iter().map(|psi| {
                    let phi = 0.5 * psi;
                    e1 * phi.cos() + e2 * phi.sin()
                }));
            }
            _ => out.push(axes.iter().fold(Vec3::zeros(), |a, u| a + u).normalize()),
        }
    }
    out
}

/// `Δ*_M = min_{v∈𝓔(M)} max_{u∈𝕌} Δ_M(u, v)`, with `𝓔(M)` the unit
/// eigenvectors of `M`.
pub fn delta_m_star(landmarks: &LandmarkSet, qset: &TransformationSet) -> f64 {
    let m = landmarks.m();
    eigen_candidates(landmarks, qset.axes())
        .iter()
        .map(|v| {
            qset.axes()
                .iter()
                .map(|u| delta_m(u, v, &m))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Hysteresis gap `δ` for the jump test together with the quantities it was
/// checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridGap {
    pub delta: f64,
    pub delta_m_star: f64,
    pub lower_bound: f64,
    /// `(1-cosθ)Δ*_M`; `δ` must lie strictly below it.
    pub delta_max: f64,
}

/// How `δ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    /// `δ = factor · (1-cosθ)Δ*_M`, with `factor ∈ (0, 1)`.
    Factor(f64),
    /// An explicit value.
    Fixed(f64),
}

impl Default for DeltaRule {
    fn default() -> Self {
        DeltaRule::Factor(DEFAULT_DELTA_FACTOR)
    }
}

impl HybridGap {
    pub fn new(landmarks: &LandmarkSet, qset: &TransformationSet, rule: DeltaRule) -> Result<Self> {
        let dms = delta_m_star(landmarks, qset);
        let delta_max = (1.0 - qset.theta().cos()) * dms;
        let delta = match rule {
            DeltaRule::Factor(f) if f > 0.0 && f < 1.0 => f * delta_max,
            DeltaRule::Factor(f) => return invalid(format!("delta factor {f} outside (0, 1)")),
            DeltaRule::Fixed(d) => d,
        };
        if !(delta > 0.0 && delta < delta_max) {
            return invalid(format!("delta {delta} outside (0, {delta_max})"));
        }
        Ok(HybridGap {
            delta,
            delta_m_star: dms,
            lower_bound: gap_lower_bound(&landmarks.eigenvalues(), qset.branch()),
            delta_max,
        })
    }
}

/// Everything the jump test needs for one landmark configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridGeometry {
    pub landmarks: LandmarkSet,
    pub qset: TransformationSet,
    pub gap: HybridGap,
}

impl HybridGeometry {
    pub fn new(landmarks: LandmarkSet, theta: f64, policy: AxisPolicy, rule: DeltaRule) -> Result<Self> {
        let qset = build_transformation_set(&landmarks, theta, policy)?;
        let gap = HybridGap::new(&landmarks, &qset, rule)?;
        Ok(HybridGeometry { landmarks, qset, gap })
    }
}

/// `Υ(X̂) = ½Σkᵢ‖(pᵢ-p_c) - R̂(yᵢ-y_c)‖²` with `y_c` the weighted mean of
/// the body-frame measurements.
pub fn upsilon(r_hat: &Rot3, landmarks: &LandmarkSet, ys: &[Vec3]) -> f64 {
    let k = landmarks.weights();
    let y_c = ys.iter().zip(k).fold(Vec3::zeros(), |a, (y, w)| a + y * *w) / landmarks.k_c();
    let p_c = landmarks.p_c();
    landmarks
        .points()
        .iter()
        .zip(ys)
        .zip(k)
        .map(|((p, y), w)| 0.5 * w * ((p - p_c) - *r_hat * (y - y_c)).norm_squared())
        .sum()
}

/// Outcome of the jump test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpDecision {
    /// `μ_Q = Υ(X̂) - min_q Υ(X_q⁻¹X̂)`.
    pub mu_q: f64,
    /// Lowest index attaining the minimum.
    pub index: usize,
}

/// Evaluates `μ_Q` and the minimizing element of `ℚ`.
pub fn jump_decision(x_hat: &SE23, geometry: &HybridGeometry, ys: &[Vec3]) -> JumpDecision {
    let here = upsilon(&x_hat.r, &geometry.landmarks, ys);
    let mut best = f64::INFINITY;
    let mut index = 0;
    for (i, rq) in geometry.qset.rotations().iter().enumerate() {
        let c = upsilon(&(rq.transpose() * x_hat.r), &geometry.landmarks, ys);
        if c < best {
            best = c;
            index = i;
        }
    }
    JumpDecision { mu_q: here - best, index }
}

/// `μ_Q(X̂)`
pub fn mu_q(x_hat: &SE23, geometry: &HybridGeometry, ys: &[Vec3]) -> f64 {
    jump_decision(x_hat, geometry, ys).mu_q
}

/// Index of the element of `ℚ` minimizing `Υ(X_q⁻¹X̂)`, lowest on ties.
pub fn gamma_select(x_hat: &SE23, geometry: &HybridGeometry, ys: &[Vec3]) -> usize {
    jump_decision(x_hat, geometry, ys).index
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Six landmarks on the axes with `M = diag(3, 2, 1)` and `p_c = 0`.
    fn bench() -> LandmarkSet {
        let (a, b, c) = (1.5f64.sqrt(), 1.0, 0.5f64.sqrt());
        LandmarkSet::new(
            vec![
                Vec3::new(a, 0.0, 0.0),
                Vec3::new(-a, 0.0, 0.0),
                Vec3::new(0.0, b, 0.0),
                Vec3::new(0.0, -b, 0.0),
                Vec3::new(0.0, 0.0, c),
                Vec3::new(0.0, 0.0, -c),
            ],
            vec![1.0; 6],
        )
        .unwrap()
    }

    #[test]
    fn bench_scatter_is_diagonal() {
        let l = bench();
        assert_relative_eq!(l.m(), Mat3::from_diagonal(&Vec3::new(3.0, 2.0, 1.0)), epsilon = 1e-14);
        assert_relative_eq!(l.eigenvalues(), Vec3::new(3.0, 2.0, 1.0), epsilon = 1e-14);
        assert_eq!(l.k_c(), 6.0);
    }

    #[test]
    fn too_few_landmarks() {
        let e = LandmarkSet::uniform(vec![Vec3::x(), Vec3::y()]).unwrap_err();
        assert_eq!(e, Error::InsufficientLandmarks { found: 2 });
    }

    #[test]
    fn collinear_landmarks_rejected() {
        let pts = (0..4).map(|i| Vec3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert_eq!(LandmarkSet::uniform(pts).unwrap_err(), Error::CollinearLandmarks);
    }

    #[test]
    fn nonpositive_weight_rejected() {
        let pts = vec![Vec3::x(), Vec3::y(), Vec3::z()];
        assert!(LandmarkSet::new(pts, vec![1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn delta_m_examples() {
        let m = Mat3::from_diagonal(&Vec3::new(3.0, 2.0, 1.0));
        let e = [Vec3::x(), Vec3::y(), Vec3::z()];
        assert_relative_eq!(delta_m(&e[0], &e[0], &m), 3.0);
        assert_relative_eq!(delta_m(&e[1], &e[1], &m), 4.0);
        assert_relative_eq!(delta_m(&e[2], &e[2], &m), 5.0);
    }

    #[test]
    fn bench_delta_m_star_is_three() {
        let l = bench();
        let q = build_transformation_set(&l, 0.8 * PI, AxisPolicy::Eigenbasis).unwrap();
        assert_eq!(q.branch(), Branch::EigenDistinct);
        assert_relative_eq!(delta_m_star(&l, &q), 3.0, epsilon = 1e-12);
        assert_relative_eq!(gap_lower_bound(&l.eigenvalues(), q.branch()), 3.0);
    }

    #[test]
    fn theta_out_of_range() {
        let l = bench();
        assert!(build_transformation_set(&l, 0.0, AxisPolicy::Eigenbasis).is_err());
        assert!(build_transformation_set(&l, 3.5, AxisPolicy::Eigenbasis).is_err());
    }

    #[test]
    fn planar_isotropic_is_unsupported() {
        let pts = vec![Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y()];
        let l = LandmarkSet::uniform(pts).unwrap();
        let e = build_transformation_set(&l, 0.8 * PI, AxisPolicy::Eigenbasis).unwrap_err();
        assert!(matches!(e, Error::ConfigurationUnsupported(_)));
    }

    #[test]
    fn bench_mu_q_at_half_turn() {
        let l = bench();
        let g = HybridGeometry::new(l.clone(), 0.8 * PI, AxisPolicy::Eigenbasis, DeltaRule::default()).unwrap();
        let rt = Rot3::from_angle_axis(PI, &Vec3::x()).unwrap();
        // Truth at the identity; R̂ = R̃ᵀ.
        let ys: Vec<Vec3> = l.points().to_vec();
        let x_hat = SE23::new(rt.transpose(), Vec3::zeros(), Vec3::zeros());
        assert_relative_eq!(upsilon(&x_hat.r, &l, &ys), 6.0, epsilon = 1e-12);
        let d = jump_decision(&x_hat, &g, &ys);
        assert_relative_eq!(d.mu_q, (1.0 - (0.8 * PI).cos()) * 3.0, epsilon = 1e-12);
        assert_relative_eq!(d.mu_q, 5.4270509831248424, epsilon = 1e-12);
        assert_relative_eq!(g.gap.delta, 1.6281152949374527, epsilon = 1e-12);
        assert_eq!(d.index, 0);
    }

    #[test]
    fn gamma_prefers_lowest_index_on_ties() {
        // Cube corners: M is isotropic, so every axis gives the same cost at the identity.
        let mut pts = Vec::new();
        for s in [[1., 1., 1.], [1., -1., -1.], [-1., 1., -1.], [-1., -1., 1.]] {
            pts.push(Vec3::new(s[0], s[1], s[2]));
        }
        let l = LandmarkSet::uniform(pts).unwrap();
        let triple = [Vec3::x(), Vec3::y(), Vec3::z()];
        let g = HybridGeometry::new(l.clone(), 0.8 * PI, AxisPolicy::Orthogonal(triple), DeltaRule::default()).unwrap();
        let ys = l.points().to_vec();
        assert_eq!(gamma_select(&SE23::identity(), &g, &ys), 0);
    }
}
