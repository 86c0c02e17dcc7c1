//! Lie bracket of a frame field written directly in circular-harmonics
//! coefficients.
//!
//! With `v̂_i = ε_ij û_j` the bracket of the frame `(λû, μv̂)` reads
//! `Lie_i = ε_{j2k2} ε_{j3k3} ε_{j4k4} T_{α k2 k3 k4} ∂_α T_{i j2 j3 j4}`,
//! which is bilinear in `(T, ∂T)` and therefore becomes
//! `Lie_i = C_{ijkα} q_k ∂_α q_j` after the change of basis. `v̂` is `û`
//! turned by +90°, so `ε_12 = -1`.

use std::sync::OnceLock;

use crate::odeco::{tensor_from_q, Frame2, OdecoQ};

/// Spatial gradient of the five coefficients: `grad[j][α] = ∂q_j/∂x_α`.
pub type QGradient = [[f64; 2]; 5];

/// Coefficients `c[i][j][k][α]` of the bilinear form.
#[derive(Clone, Debug, PartialEq)]
pub struct LieCoeffs {
    pub c: [[[[f64; 2]; 5]; 5]; 2],
    nonzero: Vec<(usize, usize, usize, usize, f64)>,
}

fn levi_civita(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 1) => -1.0,
        (1, 0) => 1.0,
        _ => 0.0,
    }
}

/// Evaluates the tensor-space contraction `B(T, dT)_i` for one direction `α`.
fn tensor_bracket(t: &[[[[f64; 2]; 2]; 2]; 2], dt: &[[[[f64; 2]; 2]; 2]; 2], alpha: usize, i: usize) -> f64 {
    let mut acc = 0.0;
    for j2 in 0..2 {
        for j3 in 0..2 {
            for j4 in 0..2 {
                let (k2, k3, k4) = (1 - j2, 1 - j3, 1 - j4);
                let sign = levi_civita(j2, k2) * levi_civita(j3, k3) * levi_civita(j4, k4);
                acc += sign * t[alpha][k2][k3][k4] * dt[i][j2][j3][j4];
            }
        }
    }
    acc
}

pub fn build_lie_coeffs() -> LieCoeffs {
    let basis: Vec<_> = (0..5)
        .map(|k| {
            let mut e = OdecoQ::ZERO;
            e[k] = 1.0;
            tensor_from_q(&e).full()
        })
        .collect();
    let mut c = [[[[0.0; 2]; 5]; 5]; 2];
    let mut nonzero = Vec::new();
    for i in 0..2 {
        for j in 0..5 {
            for k in 0..5 {
                for alpha in 0..2 {
                    let v = tensor_bracket(&basis[k], &basis[j], alpha, i);
                    let v = if v.abs() < 1e-15 { 0.0 } else { v };
                    c[i][j][k][alpha] = v;
                    if v != 0.0 {
                        nonzero.push((i, j, k, alpha, v));
                    }
                }
            }
        }
    }
    LieCoeffs { c, nonzero }
}

impl LieCoeffs {
    /// Process-wide cached instance.
    pub fn shared() -> &'static LieCoeffs {
        static COEFFS: OnceLock<LieCoeffs> = OnceLock::new();
        COEFFS.get_or_init(build_lie_coeffs)
    }

    /// Builds a coefficient set from an explicit table (e.g. a stored snapshot).
    pub fn from_table(c: [[[[f64; 2]; 5]; 5]; 2]) -> Self {
        let mut nonzero = Vec::new();
        for (i, ci) in c.iter().enumerate() {
            for (j, cij) in ci.iter().enumerate() {
                for (k, cijk) in cij.iter().enumerate() {
                    for (alpha, &v) in cijk.iter().enumerate() {
                        if v != 0.0 {
                            nonzero.push((i, j, k, alpha, v));
                        }
                    }
                }
            }
        }
        LieCoeffs { c, nonzero }
    }

    pub fn nonzero_count(&self) -> usize {
        self.nonzero.len()
    }

    pub fn lie_bracket(&self, q: &OdecoQ, grad: &QGradient) -> [f64; 2] {
        let mut out = [0.0; 2];
        for &(i, j, k, alpha, v) in &self.nonzero {
            out[i] += v * q[k] * grad[j][alpha];
        }
        out
    }

    /// Bracket plus its partial derivatives: `d_dq[i][k] = ∂Lie_i/∂q_k`
    /// and `d_dgrad[i][j][α] = ∂Lie_i/∂(∂_α q_j)`.
    pub fn lie_bracket_with_jacobian(&self, q: &OdecoQ, grad: &QGradient) -> ([f64; 2], [[f64; 5]; 2], [QGradient; 2]) {
        let mut out = [0.0; 2];
        let mut d_dq = [[0.0; 5]; 2];
        let mut d_dgrad = [[[0.0; 2]; 5]; 2];
        for &(i, j, k, alpha, v) in &self.nonzero {
            out[i] += v * q[k] * grad[j][alpha];
            d_dq[i][k] += v * grad[j][alpha];
            d_dgrad[i][j][alpha] += v * q[k];
        }
        (out, d_dq, d_dgrad)
    }
}

/// `Lie(q)` with the shared coefficients.
pub fn lie_bracket(coeffs: &LieCoeffs, q: &OdecoQ, grad: &QGradient) -> [f64; 2] {
    coeffs.lie_bracket(q, grad)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("branch jump of {jump} rad exceeds the continuation limit")]
    BranchAmbiguity { jump: f64 },
}

/// Frame vectors at `p` on the branch nearest in angle to `reference`.
fn continued_vectors(frame: &Frame2, reference: f64) -> Result<([f64; 2], [f64; 2]), OracleError> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};
    let m = ((reference - frame.phi) / FRAC_PI_2).round();
    let jump = (frame.phi + m * FRAC_PI_2 - reference).abs();
    if jump > FRAC_PI_8 {
        return Err(OracleError::BranchAmbiguity { jump });
    }
    Ok(frame.vectors(m as i32))
}

/// Finite-difference frame-space bracket `[u, v] = ∇_u v − ∇_v u` at `p`.
///
/// Test oracle: central differences with step `h` on the branch continued
/// from the frame at `p`.
pub fn lie_oracle<F>(field: F, p: [f64; 2], h: f64) -> Result<[f64; 2], OracleError>
where
    F: Fn([f64; 2]) -> Frame2,
{
    let center = field(p);
    let (u, v) = center.vectors(0);
    let mut du = [[0.0; 2]; 2]; // du[α][i] = ∂u_i/∂x_α
    let mut dv = [[0.0; 2]; 2];
    for alpha in 0..2 {
        let mut pp = p;
        let mut pm = p;
        pp[alpha] += h;
        pm[alpha] -= h;
        let (up, vp) = continued_vectors(&field(pp), center.phi)?;
        let (um, vm) = continued_vectors(&field(pm), center.phi)?;
        for i in 0..2 {
            du[alpha][i] = (up[i] - um[i]) / (2.0 * h);
            dv[alpha][i] = (vp[i] - vm[i]) / (2.0 * h);
        }
    }
    let mut out = [0.0; 2];
    for (i, o) in out.iter_mut().enumerate() {
        for alpha in 0..2 {
            *o += u[alpha] * dv[alpha][i] - v[alpha] * du[alpha][i];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_gives_zero_bracket() {
        let c = LieCoeffs::shared();
        let q = OdecoQ::new(1.88, 0.1, -0.2, 0.44, 0.05);
        assert_eq!(c.lie_bracket(&q, &[[0.0; 2]; 5]), [0.0, 0.0]);
        assert_eq!(c.lie_bracket(&OdecoQ::ZERO, &[[0.3; 2]; 5]), [0.0, 0.0]);
    }

    #[test]
    fn oracle_on_constant_and_rotated_fields() {
        let f = Frame2::new(0.3, 2.0, 1.0).unwrap();
        let r = lie_oracle(|_| f, [0.2, 0.1], 1e-4).unwrap();
        assert_eq!(r, [0.0, 0.0]);
    }

    #[test]
    fn oracle_matches_hand_derived_bracket() {
        // u = (1+x) e1, v = (1+x) e2  =>  [u, v] = (0, 1+x)
        let field = |p: [f64; 2]| Frame2::new(0.0, 1.0 + p[0], 1.0 + p[0]).unwrap();
        let p = [0.25, -0.4];
        let r = lie_oracle(field, p, 1e-5).unwrap();
        assert!((r[0]).abs() < 1e-9);
        assert!((r[1] - 1.25).abs() < 1e-9);
    }

    #[test]
    fn oracle_refuses_branch_jumps() {
        let field = |p: [f64; 2]| Frame2::new(if p[0] > 0.0 { 0.7 } else { 0.0 }, 1.0, 1.0).unwrap();
        assert!(lie_oracle(field, [0.0, 0.0], 1e-3).is_err());
    }
}
