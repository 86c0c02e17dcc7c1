//! Algebra of 2D fourth-order symmetric tensors and their odeco subset.
//!
//! A symmetric tensor is stored either by its five independent components
//! ([`SymTensor4`]) or by its coefficients in the orthonormal circular
//! harmonics basis `{1/√(2π), cos2θ/√π, sin2θ/√π, cos4θ/√π, sin4θ/√π}`
//! ([`OdecoQ`]). A frame `(φ, λ, μ)` maps to the odeco tensor
//! `λ û⊗4 + μ v̂⊗4` with `û = (cos φ, sin φ)` and `v̂` = `û` rotated by +90°.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::OdecoError;

pub const SQRT_PI: f64 = 1.772_453_850_905_516;
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_2;

/// `q0 = Q0_PER_SUM · (λ + μ)` on the variety.
pub const Q0_PER_SUM: f64 = 3.0 / 8.0 * SQRT_2PI;
/// `|(q1, q2)| = Q12_PER_DIFF · |λ − μ|` on the variety.
pub const Q12_PER_DIFF: f64 = SQRT_PI / 2.0;
/// `|(q3, q4)| = Q34_PER_SUM · (λ + μ)` on the variety.
pub const Q34_PER_SUM: f64 = SQRT_PI / 8.0;

/// Rows map `[t1111, t1112, t1122, t1222, t2222]` to `q`.
pub const TENSOR_TO_Q: [[f64; 5]; 5] = [
    [3.0 / 8.0 * SQRT_2PI, 0.0, 3.0 / 4.0 * SQRT_2PI, 0.0, 3.0 / 8.0 * SQRT_2PI],
    [0.5 * SQRT_PI, 0.0, 0.0, 0.0, -0.5 * SQRT_PI],
    [0.0, SQRT_PI, 0.0, SQRT_PI, 0.0],
    [1.0 / 8.0 * SQRT_PI, 0.0, -3.0 / 4.0 * SQRT_PI, 0.0, 1.0 / 8.0 * SQRT_PI],
    [0.0, 0.5 * SQRT_PI, 0.0, -0.5 * SQRT_PI, 0.0],
];

/// Rows map `q` to `[t1111, t1112, t1122, t1222, t2222]`.
pub const Q_TO_TENSOR: [[f64; 5]; 5] = [
    [1.0 / SQRT_2PI, 1.0 / SQRT_PI, 0.0, 1.0 / SQRT_PI, 0.0],
    [0.0, 0.0, 0.5 / SQRT_PI, 0.0, 1.0 / SQRT_PI],
    [1.0 / (3.0 * SQRT_2PI), 0.0, 0.0, -1.0 / SQRT_PI, 0.0],
    [0.0, 0.0, 0.5 / SQRT_PI, 0.0, -1.0 / SQRT_PI],
    [1.0 / SQRT_2PI, -1.0 / SQRT_PI, 0.0, 1.0 / SQRT_PI, 0.0],
];

/// Circular-harmonics coefficients `(q0, …, q4)` of one tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OdecoQ(pub [f64; 5]);

impl OdecoQ {
    pub const ZERO: OdecoQ = OdecoQ([0.0; 5]);

    pub fn new(q0: f64, q1: f64, q2: f64, q3: f64, q4: f64) -> Self {
        OdecoQ([q0, q1, q2, q3, q4])
    }

    pub fn from_slice(s: &[f64]) -> Self {
        OdecoQ([s[0], s[1], s[2], s[3], s[4]])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_isotropic(&self) -> bool {
        self.0[1] == 0.0 && self.0[2] == 0.0
    }

    /// Magnitude of the `4θ` harmonic.
    pub fn quartic_magnitude(&self) -> f64 {
        self.0[3].hypot(self.0[4])
    }
}

impl Index<usize> for OdecoQ {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for OdecoQ {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for OdecoQ {
    type Output = OdecoQ;
    fn add(self, rhs: OdecoQ) -> OdecoQ {
        OdecoQ(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for OdecoQ {
    type Output = OdecoQ;
    fn sub(self, rhs: OdecoQ) -> OdecoQ {
        OdecoQ(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<OdecoQ> for f64 {
    type Output = OdecoQ;
    fn mul(self, rhs: OdecoQ) -> OdecoQ {
        OdecoQ(rhs.0.map(|x| self * x))
    }
}

/// The five independent components of a fully symmetric 2×2×2×2 tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymTensor4 {
    pub t1111: f64,
    pub t1112: f64,
    pub t1122: f64,
    pub t1222: f64,
    pub t2222: f64,
}

impl SymTensor4 {
    pub fn from_array(t: [f64; 5]) -> Self {
        SymTensor4 { t1111: t[0], t1112: t[1], t1122: t[2], t1222: t[3], t2222: t[4] }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.t1111, self.t1112, self.t1122, self.t1222, self.t2222]
    }

    /// Entry `T_{ijkl}` with zero-based indices in `{0, 1}`.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.to_array()[i + j + k + l]
    }

    /// Dense `2×2×2×2` array.
    pub fn full(&self) -> [[[[f64; 2]; 2]; 2]; 2] {
        let t = self.to_array();
        std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|l| t[i + j + k + l])))
        })
    }

    /// Rank-one tensor `w⊗4`.
    pub fn rank_one(w: [f64; 2]) -> Self {
        let [c, s] = w;
        SymTensor4 {
            t1111: c * c * c * c,
            t1112: c * c * c * s,
            t1122: c * c * s * s,
            t1222: c * s * s * s,
            t2222: s * s * s * s,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        SymTensor4::from_array(self.to_array().map(|x| a * x))
    }

    pub fn plus(&self, other: &SymTensor4) -> Self {
        let (a, b) = (self.to_array(), other.to_array());
        SymTensor4::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }

    /// `T w³`: contraction over three indices, leaving a vector.
    pub fn contract3(&self, w: [f64; 2]) -> [f64; 2] {
        let [c, s] = w;
        [
            self.t1111 * c * c * c
                + 3.0 * self.t1112 * c * c * s
                + 3.0 * self.t1122 * c * s * s
                + self.t1222 * s * s * s,
            self.t1112 * c * c * c
                + 3.0 * self.t1122 * c * c * s
                + 3.0 * self.t1222 * c * s * s
                + self.t2222 * s * s * s,
        ]
    }

    /// `T w⁴`, the homogeneous polynomial `p_T` evaluated at `w`.
    pub fn contract4(&self, w: [f64; 2]) -> f64 {
        let v = self.contract3(w);
        v[0] * w[0] + v[1] * w[1]
    }
}

/// A frame: direction angle and the sizes along `û` and `v̂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame2 {
    pub phi: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl Frame2 {
    /// Builds the canonical representative with `phi ∈ [0, π/2)`.
    pub fn new(phi: f64, lambda: f64, mu: f64) -> Result<Self, OdecoError> {
        if !(lambda > 0.0 && mu > 0.0) || !lambda.is_finite() || !mu.is_finite() {
            return Err(OdecoError::InvalidFrame { lambda, mu });
        }
        Ok(Self::canonical(phi, lambda, mu))
    }

    fn canonical(phi: f64, lambda: f64, mu: f64) -> Self {
        let mut phi = phi.rem_euclid(PI);
        let (mut lambda, mut mu) = (lambda, mu);
        if phi >= FRAC_PI_2 {
            phi -= FRAC_PI_2;
            std::mem::swap(&mut lambda, &mut mu);
        }
        // rem_euclid can round up to exactly π/2
        if phi >= FRAC_PI_2 {
            phi = 0.0;
            std::mem::swap(&mut lambda, &mut mu);
        }
        Frame2 { phi, lambda, mu }
    }

    pub fn isotropic(phi: f64, size: f64) -> Result<Self, OdecoError> {
        Self::new(phi, size, size)
    }

    pub fn u_hat(&self) -> [f64; 2] {
        [self.phi.cos(), self.phi.sin()]
    }

    pub fn v_hat(&self) -> [f64; 2] {
        [-self.phi.sin(), self.phi.cos()]
    }

    /// Frame vectors of the representative rotated by `branch` quarter turns.
    ///
    /// Branch `m` has `u` at angle `φ + mπ/2` with size `λ` for even `m`
    /// and `μ` for odd `m`; `v` is always `u`'s direction turned by +90°.
    pub fn vectors(&self, branch: i32) -> ([f64; 2], [f64; 2]) {
        let m = branch.rem_euclid(4);
        let ang = self.phi + m as f64 * FRAC_PI_2;
        let (su, sv) = if m % 2 == 0 { (self.lambda, self.mu) } else { (self.mu, self.lambda) };
        let (s, c) = ang.sin_cos();
        ([su * c, su * s], [-sv * s, sv * c])
    }

    pub fn area(&self) -> f64 {
        self.lambda * self.mu
    }
}

/// Odeco tensor of a frame, in circular-harmonics coefficients.
pub fn q_from_frame(f: &Frame2) -> Result<OdecoQ, OdecoError> {
    if !(f.lambda > 0.0 && f.mu > 0.0) {
        return Err(OdecoError::InvalidFrame { lambda: f.lambda, mu: f.mu });
    }
    Ok(q_from_parts(f.phi, f.lambda, f.mu))
}

/// Same as [`q_from_frame`] without the sign check (sizes may be any real).
pub fn q_from_parts(phi: f64, lambda: f64, mu: f64) -> OdecoQ {
    let sum = lambda + mu;
    let diff = lambda - mu;
    let (s2, c2) = (2.0 * phi).sin_cos();
    let (s4, c4) = (4.0 * phi).sin_cos();
    OdecoQ([
        Q0_PER_SUM * sum,
        Q12_PER_DIFF * diff * c2,
        Q12_PER_DIFF * diff * s2,
        Q34_PER_SUM * sum * c4,
        Q34_PER_SUM * sum * s4,
    ])
}

/// Partial derivatives of [`q_from_parts`] with respect to `(φ, λ, μ)`.
pub fn q_from_parts_jacobian(phi: f64, lambda: f64, mu: f64) -> [[f64; 3]; 5] {
    let sum = lambda + mu;
    let diff = lambda - mu;
    let (s2, c2) = (2.0 * phi).sin_cos();
    let (s4, c4) = (4.0 * phi).sin_cos();
    [
        [0.0, Q0_PER_SUM, Q0_PER_SUM],
        [-2.0 * Q12_PER_DIFF * diff * s2, Q12_PER_DIFF * c2, -Q12_PER_DIFF * c2],
        [2.0 * Q12_PER_DIFF * diff * c2, Q12_PER_DIFF * s2, -Q12_PER_DIFF * s2],
        [-4.0 * Q34_PER_SUM * sum * s4, Q34_PER_SUM * c4, Q34_PER_SUM * c4],
        [4.0 * Q34_PER_SUM * sum * c4, Q34_PER_SUM * s4, Q34_PER_SUM * s4],
    ]
}

fn mat5_apply(m: &[[f64; 5]; 5], x: &[f64; 5]) -> [f64; 5] {
    std::array::from_fn(|i| (0..5).map(|j| m[i][j] * x[j]).sum())
}

pub fn tensor_from_q(q: &OdecoQ) -> SymTensor4 {
    SymTensor4::from_array(mat5_apply(&Q_TO_TENSOR, &q.0))
}

pub fn q_from_tensor(t: &SymTensor4) -> OdecoQ {
    OdecoQ(mat5_apply(&TENSOR_TO_Q, &t.to_array()))
}

/// Value of the basis functions at `theta`, in coefficient order.
pub fn basis_values(theta: f64) -> [f64; 5] {
    let (s2, c2) = (2.0 * theta).sin_cos();
    let (s4, c4) = (4.0 * theta).sin_cos();
    [1.0 / SQRT_2PI, c2 / SQRT_PI, s2 / SQRT_PI, c4 / SQRT_PI, s4 / SQRT_PI]
}

/// `p_T(θ)`.
pub fn eval_poly(q: &OdecoQ, theta: f64) -> f64 {
    let b = basis_values(theta);
    (0..5).map(|i| q.0[i] * b[i]).sum()
}

/// The three quadratic residuals whose common zero set is the odeco variety.
pub fn odeco_residuals(q: &OdecoQ) -> [f64; 3] {
    let [q0, q1, q2, q3, q4] = q.0;
    let sqrt2 = std::f64::consts::SQRT_2;
    [
        q0 * q0 - 18.0 * (q3 * q3 + q4 * q4),
        sqrt2 * q0 * q1 - 6.0 * q1 * q3 - 6.0 * q2 * q4,
        sqrt2 * q0 * q2 - 6.0 * q1 * q4 + 6.0 * q2 * q3,
    ]
}

/// Gradients of the residuals with respect to `q`, one row per residual.
pub fn odeco_residuals_gradient(q: &OdecoQ) -> [[f64; 5]; 3] {
    let [q0, q1, q2, q3, q4] = q.0;
    let sqrt2 = std::f64::consts::SQRT_2;
    [
        [2.0 * q0, 0.0, 0.0, -36.0 * q3, -36.0 * q4],
        [sqrt2 * q1, sqrt2 * q0 - 6.0 * q3, -6.0 * q4, -6.0 * q1, -6.0 * q2],
        [sqrt2 * q2, -6.0 * q4, sqrt2 * q0 + 6.0 * q3, 6.0 * q2, -6.0 * q1],
    ]
}

/// Product of the sizes, `λμ` on the variety.
pub fn area(q: &OdecoQ) -> f64 {
    let [q0, q1, q2, _, _] = q.0;
    (8.0 / 9.0 * q0 * q0 - (q1 * q1 + q2 * q2)) / PI
}

pub fn area_gradient(q: &OdecoQ) -> [f64; 5] {
    let [q0, q1, q2, _, _] = q.0;
    [16.0 / 9.0 * q0 / PI, -2.0 * q1 / PI, -2.0 * q2 / PI, 0.0, 0.0]
}

/// Result of projecting a tensor onto the odeco variety.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    /// The nearest odeco tensor.
    pub q: OdecoQ,
    /// Direction of `û`, not canonicalized.
    pub phi: f64,
    /// Signed sizes of the projected tensor along `û` and `v̂`.
    pub lambda: f64,
    pub mu: f64,
}

const DEGENERATE_REL: f64 = 1e-12;

/// Squared norm of the part of `q` captured by the odeco tensor of angle `phi`
/// once its sizes are optimal; maximizing it minimizes the projection distance.
fn captured(q: &OdecoQ, phi: f64) -> (f64, f64, f64) {
    let [q0, q1, q2, q3, q4] = q.0;
    let (s2, c2) = (2.0 * phi).sin_cos();
    let (s4, c4) = (4.0 * phi).sin_cos();
    let a = Q0_PER_SUM;
    let b = Q34_PER_SUM;
    let sum_num = a * q0 + b * (q3 * c4 + q4 * s4);
    let r2 = q1 * c2 + q2 * s2;
    let f = sum_num * sum_num / (a * a + b * b) + r2 * r2;
    let dsum = b * 4.0 * (-q3 * s4 + q4 * c4);
    let dr2 = 2.0 * (-q1 * s2 + q2 * c2);
    let df = 2.0 * sum_num * dsum / (a * a + b * b) + 2.0 * r2 * dr2;
    let d2sum = -16.0 * b * (q3 * c4 + q4 * s4);
    let d2r2 = -4.0 * r2;
    let d2f = 2.0 * (dsum * dsum + sum_num * d2sum) / (a * a + b * b) + 2.0 * (dr2 * dr2 + r2 * d2r2);
    (f, df, d2f)
}

/// Nearest odeco tensor in coefficient-space Euclidean distance.
///
/// For a fixed angle the optimal sizes are linear least-squares fits, so the
/// search reduces to maximizing a trigonometric polynomial in `φ`: dense
/// sampling picks the basin, Newton polishes the stationary point.
pub fn project_odeco(q: &OdecoQ) -> Result<Projection, OdecoError> {
    let scale = q.norm();
    if q.quartic_magnitude() <= DEGENERATE_REL * scale || scale == 0.0 {
        return Err(OdecoError::Degenerate);
    }
    if area(q) <= 0.0 {
        return Err(OdecoError::NonPositiveArea { area: area(q) });
    }
    let phi4 = q.0[4].atan2(q.0[3]) / 4.0;
    const SAMPLES: usize = 96;
    let mut best = (phi4, captured(q, phi4).0);
    for s in 0..SAMPLES {
        let phi = phi4 + PI * s as f64 / SAMPLES as f64;
        let f = captured(q, phi).0;
        if f > best.1 * (1.0 + 1e-15) {
            best = (phi, f);
        }
    }
    let mut phi = best.0;
    for _ in 0..50 {
        let (_, df, d2f) = captured(q, phi);
        if d2f >= 0.0 {
            break;
        }
        let step = -df / d2f;
        let step = step.clamp(-PI / SAMPLES as f64, PI / SAMPLES as f64);
        phi += step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    let [q0, q1, q2, q3, q4] = q.0;
    let (s2, c2) = (2.0 * phi).sin_cos();
    let (s4, c4) = (4.0 * phi).sin_cos();
    let (a, b) = (Q0_PER_SUM, Q34_PER_SUM);
    let sum = (a * q0 + b * (q3 * c4 + q4 * s4)) / (a * a + b * b);
    let diff = (q1 * c2 + q2 * s2) / Q12_PER_DIFF;
    if sum <= 0.0 {
        return Err(OdecoError::Degenerate);
    }
    let lambda = 0.5 * (sum + diff);
    let mu = 0.5 * (sum - diff);
    Ok(Projection { q: q_from_parts(phi, lambda, mu), phi, lambda, mu })
}

/// Frame of a (near-)odeco tensor: direction from the projection, sizes by
/// contracting the original tensor four times along `û` and `v̂`.
pub fn extract_frame(q: &OdecoQ) -> Result<Frame2, OdecoError> {
    let proj = project_odeco(q)?;
    let lambda = eval_poly(q, proj.phi);
    let mu = eval_poly(q, proj.phi + FRAC_PI_2);
    if !(lambda > 0.0 && mu > 0.0) {
        return Err(OdecoError::NonPositiveSize { phi: proj.phi, lambda, mu });
    }
    Ok(Frame2::canonical(proj.phi, lambda, mu))
}

/// First-order change of `w = λŵ` under a perturbation `dt` of an odeco
/// tensor `t` with unit eigenvector `w_hat`: `δw = (δT) ŵ³`.
pub fn sensitivity_delta_w(t: &SymTensor4, dt: &SymTensor4, w_hat: [f64; 2]) -> [f64; 2] {
    debug_assert!({
        let tw = t.contract3(w_hat);
        let lam = tw[0] * w_hat[0] + tw[1] * w_hat[1];
        let scale = t.to_array().iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        (tw[0] - lam * w_hat[0]).hypot(tw[1] - lam * w_hat[1]) < 1e-8 * scale
    });
    dt.contract3(w_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_frame_coefficients() {
        let q = q_from_frame(&Frame2::new(0.0, 1.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(q[0], 0.75 * SQRT_2PI, epsilon = 1e-15);
        assert_abs_diff_eq!(q[3], 0.25 * SQRT_PI, epsilon = 1e-15);
        assert_eq!((q[1], q[2], q[4]), (0.0, 0.0, 0.0));
        let t = tensor_from_q(&q);
        assert_abs_diff_eq!(t.t1111, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.t2222, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.t1122, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(area(&q), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eval_poly_examples() {
        let q = q_from_frame(&Frame2::new(0.0, 3.0, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(eval_poly(&q, 0.0), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eval_poly(&q, FRAC_PI_2), 1.0, epsilon = 1e-14);
        let c = OdecoQ::new(SQRT_2PI, 0.0, 0.0, 0.0, 0.0);
        assert_abs_diff_eq!(eval_poly(&c, 0.37), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn residual_examples() {
        assert_eq!(odeco_residuals(&OdecoQ::new(1.0, 0.0, 0.0, 0.0, 0.0)), [1.0, 0.0, 0.0]);
        assert_eq!(odeco_residuals(&OdecoQ::new(0.0, 1.0, 0.0, 0.0, 0.0)), [0.0, 0.0, 0.0]);
        assert_eq!(area(&OdecoQ::ZERO), 0.0);
    }

    #[test]
    fn frame_canonicalization() {
        let a = Frame2::new(0.3 + FRAC_PI_2, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(a.phi, 0.3, epsilon = 1e-15);
        assert_eq!((a.lambda, a.mu), (1.0, 2.0));
        let b = Frame2::new(-0.2, 2.0, 1.0).unwrap();
        assert!(b.phi >= 0.0 && b.phi < FRAC_PI_2);
        assert!(Frame2::new(0.0, 0.0, 1.0).is_err());
        assert!(Frame2::new(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn rotated_representatives_share_q() {
        let f = Frame2::new(0.4, 2.0, 0.5).unwrap();
        let g = Frame2::new(0.4 + FRAC_PI_2, 0.5, 2.0).unwrap();
        let (qf, qg) = (q_from_frame(&f).unwrap(), q_from_frame(&g).unwrap());
        for i in 0..5 {
            assert_abs_diff_eq!(qf[i], qg[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn branch_vectors_follow_quarter_rotations() {
        let f = Frame2::new(0.2, 2.0, 0.5).unwrap();
        let (u0, v0) = f.vectors(0);
        let (u1, v1) = f.vectors(1);
        // (u, v) -> (v, -u)
        assert_abs_diff_eq!(u1[0], v0[0], epsilon = 1e-15);
        assert_abs_diff_eq!(u1[1], v0[1], epsilon = 1e-15);
        assert_abs_diff_eq!(v1[0], -u0[0], epsilon = 1e-15);
        assert_abs_diff_eq!(v1[1], -u0[1], epsilon = 1e-15);
    }

    #[test]
    fn projection_rejects_degenerate() {
        assert_eq!(project_odeco(&OdecoQ::new(1.0, 0.0, 0.0, 0.0, 0.0)), Err(OdecoError::Degenerate));
        assert!(project_odeco(&OdecoQ::ZERO).is_err());
        assert!(matches!(
            project_odeco(&OdecoQ::new(0.1, 3.0, 0.0, 0.2, 0.0)),
            Err(OdecoError::NonPositiveArea { .. })
        ));
    }

    #[test]
    fn isotropic_projection_keeps_phase() {
        // isotropic, off the variety (c1 != 0)
        let q = OdecoQ::new(2.0, 0.0, 0.0, 0.3, -0.2);
        assert!(odeco_residuals(&q)[0].abs() > 0.1);
        let p = project_odeco(&q).unwrap();
        assert_abs_diff_eq!(odeco_residuals(&p.q)[0], 0.0, epsilon = 1e-12);
        assert_eq!((p.q[1].abs() < 1e-15, p.q[2].abs() < 1e-15), (true, true));
        let before = q[4].atan2(q[3]);
        let after = p.q[4].atan2(p.q[3]);
        assert_abs_diff_eq!(before, after, epsilon = 1e-12);
    }

    #[test]
    fn extract_scaled_frame() {
        let q = q_from_frame(&Frame2::new(PI / 6.0, 2.0, 1.0).unwrap()).unwrap();
        let f = extract_frame(&(3.0 * q)).unwrap();
        assert_abs_diff_eq!(f.phi, PI / 6.0, epsilon = 1e-10);
        assert_abs_diff_eq!(f.lambda, 6.0, epsilon = 1e-10);
        assert_abs_diff_eq!(f.mu, 3.0, epsilon = 1e-10);
    }

    #[test]
    fn sensitivity_of_rank_one_perturbation() {
        let f = Frame2::new(0.3, 2.0, 1.0).unwrap();
        let t = tensor_from_q(&q_from_frame(&f).unwrap());
        let w = f.u_hat();
        assert_eq!(sensitivity_delta_w(&t, &SymTensor4::default(), w), [0.0, 0.0]);
        let dw = sensitivity_delta_w(&t, &SymTensor4::rank_one(w).scaled(0.7), w);
        assert_abs_diff_eq!(dw[0], 0.7 * w[0], epsilon = 1e-15);
        assert_abs_diff_eq!(dw[1], 0.7 * w[1], epsilon = 1e-15);
    }
}
