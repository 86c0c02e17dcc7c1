//! Closed-form fields and quadrature oracles used to validate the algebra,
//! the Lie operator and the energy discretization.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{e_dirichlet, e_lie, e_odeco, e_total, lie_integrand, Energy, EnergyParams, FieldState};
use crate::lie::{lie_oracle, LieCoeffs, QGradient};
use crate::mesh::{TriMesh, QUADRATURE};
use crate::odeco::{
    basis_values, eval_poly, q_from_parts, q_from_parts_jacobian, q_from_tensor, OdecoQ, SymTensor4, Frame2,
    Q_TO_TENSOR, TENSOR_TO_Q,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("the polar field is undefined at the origin")]
    Origin,
}

/// Analytic frame fields with known bracket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticField {
    Constant { phi: f64, lambda: f64, mu: f64 },
    /// Constant isotropic field rotated by `angle`.
    RigidRotation { angle: f64, size: f64 },
    /// `φ = iθ`, `λ = μ = r^i`.
    PolarSingular { index: f64 },
    /// Smooth sinusoidal angle and sizes.
    RandomSmooth { seed: u64 },
}

/// Angle and sizes with their spatial gradients.
type Parts = ([f64; 3], [[f64; 2]; 3]);

fn splitmix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

fn random_parts(seed: u64, p: [f64; 2]) -> Parts {
    let mut s = seed;
    let mut vals = [0.0; 3];
    let mut grads = [[0.0; 2]; 3];
    for c in 0..3 {
        let amp = 0.3 * (2.0 * splitmix(&mut s) - 1.0);
        let kx = 0.5 + 1.5 * splitmix(&mut s);
        let ky = 0.5 + 1.5 * splitmix(&mut s);
        let ph = TAU * splitmix(&mut s);
        let base = if c == 0 { 1.5 * splitmix(&mut s) } else { 1.0 + splitmix(&mut s) };
        let arg = kx * p[0] + ky * p[1] + ph;
        vals[c] = base + amp * arg.sin();
        grads[c] = [amp * kx * arg.cos(), amp * ky * arg.cos()];
    }
    (vals, grads)
}

impl AnalyticField {
    fn parts(&self, p: [f64; 2]) -> Result<Parts, VerifyError> {
        Ok(match *self {
            AnalyticField::Constant { phi, lambda, mu } => ([phi, lambda, mu], [[0.0; 2]; 3]),
            AnalyticField::RigidRotation { angle, size } => ([angle, size, size], [[0.0; 2]; 3]),
            AnalyticField::PolarSingular { index } => {
                let r2 = p[0] * p[0] + p[1] * p[1];
                if r2 == 0.0 {
                    return Err(VerifyError::Origin);
                }
                let r = r2.sqrt();
                let s = r.powf(index);
                let ds = index * s / r2;
                let dphi = [-index * p[1] / r2, index * p[0] / r2];
                ([index * p[1].atan2(p[0]), s, s], [dphi, [ds * p[0], ds * p[1]], [ds * p[0], ds * p[1]]])
            }
            AnalyticField::RandomSmooth { seed } => random_parts(seed, p),
        })
    }

    pub fn frame(&self, p: [f64; 2]) -> Result<Frame2, VerifyError> {
        let ([phi, l, m], _) = self.parts(p)?;
        Ok(Frame2::new(phi, l, m).expect("analytic sizes are positive"))
    }

    /// Coefficients and their exact spatial gradient.
    pub fn q_and_grad(&self, p: [f64; 2]) -> Result<(OdecoQ, QGradient), VerifyError> {
        let (v, g) = self.parts(p)?;
        let jac = q_from_parts_jacobian(v[0], v[1], v[2]);
        let mut grad = [[0.0; 2]; 5];
        for (j, row) in grad.iter_mut().enumerate() {
            for (a, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|c| jac[j][c] * g[c][a]).sum();
            }
        }
        Ok((q_from_parts(v[0], v[1], v[2]), grad))
    }
}

/// Frame of the closed-form field around a singularity of index `i`.
pub fn polar_singular_field(i: f64, p: [f64; 2]) -> Result<Frame2, VerifyError> {
    AnalyticField::PolarSingular { index: i }.frame(p)
}

/// Nodal samples of an analytic field.
pub fn sample_field(mesh: &TriMesh, field: &AnalyticField) -> Result<FieldState, VerifyError> {
    let mut s = FieldState::zeros(mesh.num_nodes(), false);
    for n in 0..mesh.num_nodes() {
        let (q, _) = field.q_and_grad(mesh.node(n))?;
        s.set_node(n, &q);
    }
    Ok(s)
}

/// Largest Lie integrand `‖Lie(q)‖² / a(q)²` over all quadrature points.
pub fn max_lie_integrand(mesh: &TriMesh, state: &FieldState) -> f64 {
    let coeffs = LieCoeffs::shared();
    let mut best: f64 = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let el = mesh.element(t);
        let qs = tri.map(|v| state.node(v));
        let mut grad = [[0.0; 2]; 5];
        for (j, g) in grad.iter_mut().enumerate() {
            *g = el.gradient([qs[0][j], qs[1][j], qs[2][j]]);
        }
        for b in QUADRATURE.points {
            let q = (b[0] * qs[0] + b[1] * qs[1]) + b[2] * qs[2];
            best = best.max(lie_integrand(coeffs, &q, &grad));
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub e_lie: f64,
    pub max_h: f64,
}

/// `E_Lie` and the largest integrand of the polar field of index `i`
/// sampled on each mesh.
pub fn convergence_experiment(i: f64, meshes: &[TriMesh]) -> Result<Vec<ConvergenceRow>, VerifyError> {
    let field = AnalyticField::PolarSingular { index: i };
    meshes
        .iter()
        .map(|m| {
            let s = sample_field(m, &field)?;
            Ok(ConvergenceRow { h: m.max_edge_length(), e_lie: e_lie(m, &s, 0.0).value, max_h: max_lie_integrand(m, &s) })
        })
        .collect()
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("h,e_lie,max_h\n");
    for r in rows {
        out.push_str(&format!("{:.12e},{:.12e},{:.12e}\n", r.h, r.e_lie, r.max_h));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    /// Largest deviation of the tensor-to-coefficient matrix from quadrature.
    pub matrix_error: f64,
    /// Largest deviation of the basis Gram matrix from the identity.
    pub gram_error: f64,
    /// Largest deviation of the two matrices' product from the identity.
    pub round_trip_error: f64,
}

impl BasisReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.matrix_error < tol && self.gram_error < tol && self.round_trip_error < tol
    }
}

pub const BASIS_QUADRATURE_POINTS: usize = 1024;

/// Projects the five tensor monomials onto the circular harmonics with a
/// uniform rule (exact for trigonometric polynomials of this degree).
pub fn basis_change_oracle() -> BasisReport {
    let n = BASIS_QUADRATURE_POINTS;
    let w = TAU / n as f64;
    let mut proj = [[0.0; 5]; 5];
    let mut gram = [[0.0; 5]; 5];
    for s in 0..n {
        let th = s as f64 * w;
        let (sn, cs) = th.sin_cos();
        let mono = [cs.powi(4), 4.0 * cs.powi(3) * sn, 6.0 * cs * cs * sn * sn, 4.0 * cs * sn.powi(3), sn.powi(4)];
        let b = basis_values(th);
        for j in 0..5 {
            for k in 0..5 {
                proj[j][k] += w * b[j] * mono[k];
                gram[j][k] += w * b[j] * b[k];
            }
        }
    }
    let mut r = BasisReport { matrix_error: 0.0, gram_error: 0.0, round_trip_error: 0.0 };
    for j in 0..5 {
        for k in 0..5 {
            let id = if j == k { 1.0 } else { 0.0 };
            r.matrix_error = r.matrix_error.max((proj[j][k] - TENSOR_TO_Q[j][k]).abs());
            r.gram_error = r.gram_error.max((gram[j][k] - id).abs());
            let rt: f64 = (0..5).map(|m| Q_TO_TENSOR[j][m] * TENSOR_TO_Q[m][k]).sum();
            r.round_trip_error = r.round_trip_error.max((rt - id).abs());
        }
    }
    r
}

/// Stationary point of `p_T` nearest to `theta0` and its value: the
/// eigenpair `(λ, ŵ)` of `T` tracked by sampling and Newton refinement.
pub fn tracked_eigenpair(t: &SymTensor4, theta0: f64) -> (f64, [f64; 2]) {
    let q = q_from_tensor(t);
    // p' and p'' from the harmonic expansion
    let derivs = |th: f64| {
        let (s2, c2) = (2.0 * th).sin_cos();
        let (s4, c4) = (4.0 * th).sin_cos();
        let k = 1.0 / PI.sqrt();
        let dp = k * (-2.0 * q[1] * s2 + 2.0 * q[2] * c2 - 4.0 * q[3] * s4 + 4.0 * q[4] * c4);
        let ddp = k * (-4.0 * q[1] * c2 - 4.0 * q[2] * s2 - 16.0 * q[3] * c4 - 16.0 * q[4] * s4);
        (dp, ddp)
    };
    let samples = 256;
    let mut best = theta0;
    let mut best_dist = f64::INFINITY;
    for s in 0..samples {
        let a = theta0 - FRAC_PI_2 / 2.0 + FRAC_PI_2 * s as f64 / samples as f64;
        let b = a + FRAC_PI_2 / samples as f64;
        if derivs(a).0.signum() != derivs(b).0.signum() {
            let mut th = 0.5 * (a + b);
            for _ in 0..50 {
                let (dp, ddp) = derivs(th);
                if ddp == 0.0 {
                    break;
                }
                let step = dp / ddp;
                th -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            if (th - theta0).abs() < best_dist {
                best_dist = (th - theta0).abs();
                best = th;
            }
        }
    }
    (eval_poly(&q, best), [best.cos(), best.sin()])
}

/// Sensitivity oracle: error of the first-order prediction
/// `w + h (δT)ŵ³` against the tracked eigenpair of `T + h δT`, for each step.
pub fn sensitivity_errors(t: &SymTensor4, dt: &SymTensor4, w_hat: [f64; 2], steps: &[f64]) -> Vec<f64> {
    let theta0 = w_hat[1].atan2(w_hat[0]);
    let lam = t.contract4(w_hat);
    let dw = crate::odeco::sensitivity_delta_w(t, dt, w_hat);
    steps
        .iter()
        .map(|&h| {
            let (l, w) = tracked_eigenpair(&t.plus(&dt.scaled(h)), theta0);
            let pred = [lam * w_hat[0] + h * dw[0], lam * w_hat[1] + h * dw[1]];
            (l * w[0] - pred[0]).hypot(l * w[1] - pred[1])
        })
        .collect()
}

/// Least-squares slope of `log e` against `log h`.
pub fn observed_order(steps: &[f64], errors: &[f64]) -> f64 {
    let n = steps.len() as f64;
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Worst relative bracket error over a set of random smooth fields, with
/// where it happened.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieSweep {
    pub fields: u64,
    pub worst: f64,
    pub seed: u64,
    pub location: [f64; 2],
}

impl LieSweep {
    pub const TOL: f64 = 1e-6;

    pub fn passed(&self) -> bool {
        self.worst < Self::TOL
    }
}

/// Compares `coeffs` against the finite-difference bracket at one random
/// point of each of `fields` random smooth fields.
pub fn lie_oracle_sweep(coeffs: &LieCoeffs, fields: u64, h: f64) -> LieSweep {
    let mut out = LieSweep { fields, worst: 0.0, seed: 0, location: [0.0; 2] };
    for seed in 0..fields {
        let field = AnalyticField::RandomSmooth { seed };
        let mut st = seed ^ 0x5eed;
        let p = [2.0 * splitmix(&mut st) - 1.0, 2.0 * splitmix(&mut st) - 1.0];
        let (q, g) = field.q_and_grad(p).expect("smooth field");
        let lie = coeffs.lie_bracket(&q, &g);
        let err = match lie_oracle(|x| field.frame(x).expect("smooth field"), p, h) {
            Ok(o) => (lie[0] - o[0]).hypot(lie[1] - o[1]) / o[0].hypot(o[1]).max(1e-12),
            Err(_) => f64::INFINITY,
        };
        if !(err <= out.worst) {
            out = LieSweep { fields, worst: err, seed, location: p };
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    Lie,
    Odeco,
    Dirichlet,
    Total,
}

impl EnergyKind {
    pub const ALL: [EnergyKind; 4] = [EnergyKind::Lie, EnergyKind::Odeco, EnergyKind::Dirichlet, EnergyKind::Total];

    pub fn eval(&self, mesh: &TriMesh, state: &FieldState, params: &EnergyParams) -> Energy {
        match self {
            EnergyKind::Lie => e_lie(mesh, state, params.a_min),
            EnergyKind::Odeco => e_odeco(mesh, state),
            EnergyKind::Dirichlet => e_dirichlet(mesh, state),
            EnergyKind::Total => e_total(mesh, state, params),
        }
    }
}

/// Smooth anisotropic state slightly off the odeco variety, with positive
/// area everywhere on the unit square.
pub fn gradient_check_state(mesh: &TriMesh, seed: u64) -> FieldState {
    let mut st = seed;
    let k: [f64; 4] = std::array::from_fn(|_| 3.0 * splitmix(&mut st) - 1.5);
    let mut s = FieldState::zeros(mesh.num_nodes(), false);
    for n in 0..mesh.num_nodes() {
        let [x, y] = mesh.node(n);
        let q = q_from_parts(k[0] * x + k[1] * y * y, 1.2 + 0.4 * (k[2] * x).sin(), 1.0 + 0.3 * (k[3] * y + x).cos())
            + OdecoQ::new(0.05 * x.sin(), 0.04 * y, -0.03 * x * y, 0.05 * y.cos(), 0.02 * x);
        s.set_node(n, &q);
    }
    s
}

/// Relative error between the analytic directional derivative and central
/// differences along one random direction, for each step (relative to the
/// largest coefficient). Truncation dominates at large steps and rounding
/// at small ones.
pub fn directional_errors(
    mesh: &TriMesh,
    state: &FieldState,
    kind: EnergyKind,
    params: &EnergyParams,
    seed: u64,
    steps: &[f64],
) -> Vec<f64> {
    let mut st = seed;
    let dir: Vec<f64> = (0..state.q.len()).map(|_| 2.0 * splitmix(&mut st) - 1.0).collect();
    let base = kind.eval(mesh, state, params);
    let an: f64 = base.gradient.iter().zip(&dir).map(|(g, d)| g * d).sum();
    let scale = state.q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    steps
        .iter()
        .map(|&step| {
            let h = step * scale;
            let (mut plus, mut minus) = (state.clone(), state.clone());
            for (i, d) in dir.iter().enumerate() {
                plus.q[i] += h * d;
                minus.q[i] -= h * d;
            }
            let fd = (kind.eval(mesh, &plus, params).value - kind.eval(mesh, &minus, params).value) / (2.0 * h);
            (fd - an).abs() / an.abs().max(fd.abs()).max(1e-300)
        })
        .collect()
}
