//! Integrability, odeco and Dirichlet energies of a P1 tensor field, with
//! analytic gradients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lie::LieCoeffs;
use crate::mesh::{TriMesh, QUADRATURE};
use crate::odeco::{area, area_gradient, odeco_residuals, odeco_residuals_gradient, OdecoQ};

/// Per-node coefficients (`q[5n + j]`) with the strongly imposed entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub q: Vec<f64>,
    pub fixed: Vec<bool>,
    /// Isotropic frames only: `q1 = q2 = 0` at every node and these two
    /// channels are not unknowns.
    pub iso_mode: bool,
}

impl FieldState {
    pub fn zeros(num_nodes: usize, iso_mode: bool) -> Self {
        FieldState { q: vec![0.0; 5 * num_nodes], fixed: vec![false; 5 * num_nodes], iso_mode }
    }

    pub fn num_nodes(&self) -> usize {
        self.q.len() / 5
    }

    pub fn node(&self, n: usize) -> OdecoQ {
        OdecoQ::from_slice(&self.q[5 * n..5 * n + 5])
    }

    pub fn set_node(&mut self, n: usize, q: &OdecoQ) {
        self.q[5 * n..5 * n + 5].copy_from_slice(&q.0);
        if self.iso_mode {
            self.q[5 * n + 1] = 0.0;
            self.q[5 * n + 2] = 0.0;
        }
    }

    pub fn fix_node(&mut self, n: usize, q: &OdecoQ) {
        self.set_node(n, q);
        self.fixed[5 * n..5 * n + 5].iter_mut().for_each(|f| *f = true);
    }

    pub fn is_node_fixed(&self, n: usize) -> bool {
        self.fixed[5 * n]
    }

    /// Whether entry `i` is an optimization unknown.
    pub fn is_free(&self, i: usize) -> bool {
        !self.fixed[i] && !(self.iso_mode && matches!(i % 5, 1 | 2))
    }

    /// Indices of the unknowns, increasing.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.q.len()).filter(|&i| self.is_free(i)).collect()
    }

    pub fn gather(&self, free: &[usize]) -> Vec<f64> {
        free.iter().map(|&i| self.q[i]).collect()
    }

    pub fn scatter(&mut self, free: &[usize], x: &[f64]) {
        for (&i, &v) in free.iter().zip(x) {
            self.q[i] = v;
        }
    }

    /// Multiplies every coefficient by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        FieldState { q: self.q.iter().map(|v| alpha * v).collect(), ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub kappa: f64,
    /// Odeco penalty length; `f64::INFINITY` disables the penalty.
    pub epsilon: f64,
    /// Area floor of the barrier.
    pub a_min: f64,
}

impl EnergyParams {
    pub fn new(kappa: f64, epsilon: f64, a_min: f64) -> Self {
        assert!((0.0..=1.0).contains(&kappa), "kappa must lie in [0, 1]");
        assert!(epsilon > 0.0, "epsilon must be positive");
        assert!(a_min > 0.0, "a_min must be positive");
        EnergyParams { kappa, epsilon, a_min }
    }

    fn weights(&self) -> Weights {
        Weights { lie: 1.0 - self.kappa, dirichlet: self.kappa, odeco: 1.0 / (self.epsilon * self.epsilon) }
    }
}

/// Value and gradient with respect to all `5N` coefficients. A barrier
/// violation is reported as `value = +∞` with an all-zero gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Energy {
    pub value: f64,
    pub gradient: Vec<f64>,
}

impl Energy {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    fn infinite(n: usize) -> Self {
        Energy { value: f64::INFINITY, gradient: vec![0.0; n] }
    }
}

#[derive(Clone, Copy, Debug)]
struct Weights {
    lie: f64,
    dirichlet: f64,
    odeco: f64,
}

type TriGrad = [[f64; 5]; 3];

/// `(E_Lie, E_D, E_odeco)` contributions of one triangle, or `None` on a
/// barrier violation.
struct TriTerms {
    values: [f64; 3],
    grad: TriGrad,
}

fn triangle_terms(
    mesh: &TriMesh,
    q: &[f64],
    t: usize,
    w: Weights,
    iso: bool,
    a_min: f64,
    coeffs: &LieCoeffs,
) -> Option<TriTerms> {
    let tri = mesh.triangles()[t];
    let el = mesh.element(t);
    let nq: [OdecoQ; 3] = tri.map(|n| OdecoQ::from_slice(&q[5 * n..5 * n + 5]));
    let mut grad = [[0.0; 5]; 3];
    let mut values = [0.0; 3];

    let mut gq = [[0.0; 2]; 5];
    for j in 0..5 {
        for a in 0..3 {
            gq[j][0] += nq[a][j] * el.grads[a][0];
            gq[j][1] += nq[a][j] * el.grads[a][1];
        }
    }

    if w.dirichlet != 0.0 {
        let k = el.stiffness();
        for j in 0..5 {
            for a in 0..3 {
                let kq: f64 = (0..3).map(|b| k[a][b] * nq[b][j]).sum();
                values[1] += 0.5 * nq[a][j] * kq;
                grad[a][j] += w.dirichlet * kq;
            }
        }
    }

    for (qp, b) in QUADRATURE.points.iter().enumerate() {
        let wq = el.area * QUADRATURE.weights[qp];
        let mut x = OdecoQ::ZERO;
        for a in 0..3 {
            for j in 0..5 {
                x[j] += b[a] * nq[a][j];
            }
        }
        let mut d_dx = [0.0; 5];
        let mut d_dg = [[0.0; 2]; 5];

        if w.lie != 0.0 {
            let ar = area(&x);
            if !(ar > a_min) {
                return None;
            }
            let (lie, dl_dq, dl_dg) = coeffs.lie_bracket_with_jacobian(&x, &gq);
            let l2 = lie[0] * lie[0] + lie[1] * lie[1];
            let inv_a2 = 1.0 / (ar * ar);
            values[0] += wq * l2 * inv_a2;
            let da = area_gradient(&x);
            for k in 0..5 {
                d_dx[k] += w.lie * (2.0 * (lie[0] * dl_dq[0][k] + lie[1] * dl_dq[1][k]) * inv_a2
                    - 2.0 * l2 * inv_a2 / ar * da[k]);
                for al in 0..2 {
                    d_dg[k][al] += w.lie * 2.0 * (lie[0] * dl_dg[0][k][al] + lie[1] * dl_dg[1][k][al]) * inv_a2;
                }
            }
        }

        if w.odeco != 0.0 {
            let c = odeco_residuals(&x);
            let dc = odeco_residuals_gradient(&x);
            let used = if iso { 1 } else { 3 };
            for i in 0..used {
                values[2] += wq * c[i] * c[i];
                for k in 0..5 {
                    d_dx[k] += w.odeco * 2.0 * c[i] * dc[i][k];
                }
            }
        }

        for a in 0..3 {
            for k in 0..5 {
                grad[a][k] += wq * (d_dx[k] * b[a] + d_dg[k][0] * el.grads[a][0] + d_dg[k][1] * el.grads[a][1]);
            }
        }
    }
    Some(TriTerms { values, grad })
}

/// Term values `[E_Lie, E_D, E_odeco]` and the weighted gradient. The
/// barrier is only active when the Lie weight is nonzero.
fn assemble(mesh: &TriMesh, state: &FieldState, w: Weights, a_min: f64) -> Option<([f64; 3], Vec<f64>)> {
    let coeffs = LieCoeffs::shared();
    let q = &state.q;
    let per_tri: Vec<Option<TriTerms>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| triangle_terms(mesh, q, t, w, state.iso_mode, a_min, coeffs))
        .collect();
    let mut grad = vec![0.0; q.len()];
    let mut values = [0.0; 3];
    for (t, terms) in per_tri.into_iter().enumerate() {
        let terms = terms?;
        for i in 0..3 {
            values[i] += terms.values[i];
        }
        for (a, &n) in mesh.triangles()[t].iter().enumerate() {
            for k in 0..5 {
                grad[5 * n + k] += terms.grad[a][k];
            }
        }
    }
    Some((values, grad))
}

fn single(mesh: &TriMesh, state: &FieldState, w: Weights, a_min: f64, term: usize) -> Energy {
    match assemble(mesh, state, w, a_min) {
        Some((values, gradient)) => Energy { value: values[term], gradient },
        None => Energy::infinite(state.q.len()),
    }
}

/// `∫ ‖Lie(q)‖² / a(q)²`; `+∞` when some quadrature point has `a ≤ a_min`.
pub fn e_lie(mesh: &TriMesh, state: &FieldState, a_min: f64) -> Energy {
    single(mesh, state, Weights { lie: 1.0, dirichlet: 0.0, odeco: 0.0 }, a_min, 0)
}

/// `Σ_i ∫ c_i(q)²` (only `c1` in isotropic mode).
pub fn e_odeco(mesh: &TriMesh, state: &FieldState) -> Energy {
    single(mesh, state, Weights { lie: 0.0, dirichlet: 0.0, odeco: 1.0 }, 0.0, 2)
}

/// `½ Σ_j ∫ ‖∇q_j‖²`.
pub fn e_dirichlet(mesh: &TriMesh, state: &FieldState) -> Energy {
    single(mesh, state, Weights { lie: 0.0, dirichlet: 1.0, odeco: 0.0 }, 0.0, 1)
}

/// `(1 − κ) E_Lie + κ E_D + E_odeco / ε²`, gradient zeroed on entries that
/// are not unknowns.
pub fn e_total(mesh: &TriMesh, state: &FieldState, params: &EnergyParams) -> Energy {
    let w = params.weights();
    match assemble(mesh, state, w, params.a_min) {
        Some((v, mut gradient)) => {
            let mut value = w.dirichlet * v[1] + w.odeco * v[2];
            if w.lie != 0.0 {
                value += w.lie * v[0];
            }
            for (i, g) in gradient.iter_mut().enumerate() {
                if !state.is_free(i) {
                    *g = 0.0;
                }
            }
            Energy { value, gradient }
        }
        None => Energy::infinite(state.q.len()),
    }
}

/// Unweighted term values for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerms {
    /// `+∞` (serialized as `null`) if some quadrature point has non-positive area.
    #[serde(with = "finite_or_null")]
    pub e_lie: f64,
    pub e_dirichlet: f64,
    pub e_odeco: f64,
}

pub fn energy_terms(mesh: &TriMesh, state: &FieldState) -> EnergyTerms {
    let w = Weights { lie: 1.0, dirichlet: 1.0, odeco: 1.0 };
    match assemble(mesh, state, w, 0.0) {
        Some((v, _)) => EnergyTerms { e_lie: v[0], e_dirichlet: v[1], e_odeco: v[2] },
        None => {
            let rest = assemble(mesh, state, Weights { lie: 0.0, ..w }, 0.0).expect("no barrier without Lie term").0;
            EnergyTerms { e_lie: f64::INFINITY, e_dirichlet: rest[1], e_odeco: rest[2] }
        }
    }
}

/// `H(q) = ‖Lie(q)‖² / a(q)²` at one point.
pub fn lie_integrand(coeffs: &LieCoeffs, q: &OdecoQ, grad: &crate::lie::QGradient) -> f64 {
    let l = coeffs.lie_bracket(q, grad);
    let a = area(q);
    (l[0] * l[0] + l[1] * l[1]) / (a * a)
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{rectangle, unit_square};
    use crate::odeco::q_from_parts;

    fn constant_state(mesh: &TriMesh, q: OdecoQ) -> FieldState {
        let mut s = FieldState::zeros(mesh.num_nodes(), false);
        for n in 0..mesh.num_nodes() {
            s.set_node(n, &q);
        }
        s
    }

    #[test]
    fn constant_odeco_field_has_zero_energies() {
        let m = unit_square(4);
        let s = constant_state(&m, q_from_parts(0.3, 2.0, 1.0));
        let e = e_lie(&m, &s, 1e-8);
        assert_eq!(e.value, 0.0);
        assert!(e.gradient.iter().all(|g| g.abs() < 1e-12));
        assert!(e_odeco(&m, &s).value < 1e-20);
        assert!(e_dirichlet(&m, &s).value.abs() < 1e-20);
    }

    #[test]
    fn odeco_penalty_of_unit_q0() {
        let m = rectangle(0.0, 2.0, 0.0, 1.5, 3, 2);
        let s = constant_state(&m, OdecoQ::new(1.0, 0.0, 0.0, 0.0, 0.0));
        assert!((e_odeco(&m, &s).value - 3.0).abs() < 1e-13);
    }

    #[test]
    fn dirichlet_of_linear_channel() {
        let m = unit_square(3);
        let mut s = FieldState::zeros(m.num_nodes(), false);
        for n in 0..m.num_nodes() {
            s.q[5 * n] = m.node(n)[0];
        }
        assert!((e_dirichlet(&m, &s).value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn barrier_returns_infinity_not_nan() {
        let m = unit_square(2);
        let s = FieldState::zeros(m.num_nodes(), false);
        let e = e_lie(&m, &s, 1e-8);
        assert_eq!(e.value, f64::INFINITY);
        assert!(e.gradient.iter().all(|g| *g == 0.0));
        let terms = energy_terms(&m, &s);
        assert_eq!(terms.e_lie, f64::INFINITY);
        assert_eq!(serde_json::to_value(terms).unwrap()["e_lie"], serde_json::Value::Null);
    }

    #[test]
    fn kappa_one_infinite_epsilon_is_dirichlet() {
        let m = unit_square(3);
        let mut s = FieldState::zeros(m.num_nodes(), false);
        for n in 0..m.num_nodes() {
            let p = m.node(n);
            s.set_node(n, &OdecoQ::new(p[0], p[1] * p[0], 0.2, -p[1], 0.0));
        }
        let t = e_total(&m, &s, &EnergyParams::new(1.0, f64::INFINITY, 1e-8));
        let d = e_dirichlet(&m, &s);
        assert_eq!(t.value, d.value);
        assert_eq!(t.gradient, d.gradient);
    }
}
