use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::cut::{BranchAssignment, CutGraph, Singularity};
use crate::error::ParamError;
use crate::linalg::{nullspace_dim, SpdSolver};
use crate::mesh::{sub, TriMesh, QUADRATURE};
use crate::odeco::Frame2;

/// Largest reduced system for which a failed factorization is followed by
/// a dense nullspace count.
const DENSE_DIAGNOSTIC_LIMIT: usize = 3000;

/// Rotation by `d` quarter turns acting on `(u, v)` potentials:
/// `R(U, V) = (V, -U)`.
pub fn rotate_potentials(d: i32, p: [f64; 2]) -> [f64; 2] {
    match d.rem_euclid(4) {
        0 => p,
        1 => [p[1], -p[0]],
        2 => [-p[0], -p[1]],
        _ => [-p[1], p[0]],
    }
}

/// Matrix form of [`rotate_potentials`].
fn rotation_matrix(d: i32) -> [[f64; 2]; 2] {
    let c0 = rotate_potentials(d, [1.0, 0.0]);
    let c1 = rotate_potentials(d, [0.0, 1.0]);
    [[c0[0], c1[0]], [c0[1], c1[1]]]
}

/// A cut edge and the transition between its two sides:
/// `P_right = R^rotation P_left + translation`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutEdgeInfo {
    pub edge: usize,
    pub nodes: [usize; 2],
    pub left: [usize; 2],
    pub right: [usize; 2],
    pub rotation: i32,
    pub translation: [f64; 2],
}

/// Boundary run along which one potential is held constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub tag: String,
    /// 0 for `u`, 1 for `v`.
    pub potential: usize,
    /// Cut-open nodes.
    pub nodes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeamlessParam {
    /// `(u, v)` potentials per cut-open node.
    pub uv: Vec<[f64; 2]>,
    pub node_vertex: Vec<usize>,
    pub branch: Vec<i32>,
    pub corner_node: Vec<[usize; 3]>,
    pub singularities: Vec<Singularity>,
    pub cut_edges: Vec<CutEdgeInfo>,
    pub boundary_segments: Vec<BoundarySegment>,
    pub integration_error: f64,
}

impl SeamlessParam {
    pub fn is_active(&self, t: usize) -> bool {
        self.corner_node[t][0] != usize::MAX
    }
}

/// `1/|w|² · w`: the gradient a potential should have when the frame
/// vector is `w`.
fn target(w: [f64; 2]) -> [f64; 2] {
    let n2 = w[0] * w[0] + w[1] * w[1];
    [w[0] / n2, w[1] / n2]
}

fn interpolate(b: [f64; 3], w: [[f64; 2]; 3]) -> [f64; 2] {
    [
        b[0] * w[0][0] + b[1] * w[1][0] + b[2] * w[2][0],
        b[0] * w[0][1] + b[1] * w[1][1] + b[2] * w[2][1],
    ]
}

/// Quadrature value of `Σ_t ∫ |∇U - u/|u|²|² + |∇V - v/|v|²|²` over the
/// non-singular triangles.
pub fn integration_error(
    mesh: &TriMesh,
    corner_node: &[[usize; 3]],
    vectors: &[([f64; 2], [f64; 2])],
    uv: &[[f64; 2]],
) -> f64 {
    let mut total = 0.0;
    for (t, nodes) in corner_node.iter().enumerate() {
        if nodes[0] == usize::MAX {
            continue;
        }
        let el = mesh.element(t);
        for p in 0..2 {
            let grad = el.gradient(std::array::from_fn(|k| uv[nodes[k]][p]));
            let w: [[f64; 2]; 3] = std::array::from_fn(|k| if p == 0 { vectors[nodes[k]].0 } else { vectors[nodes[k]].1 });
            for (b, wt) in QUADRATURE.points.iter().zip(QUADRATURE.weights) {
                let g = target(interpolate(*b, w));
                total += el.area * wt * ((grad[0] - g[0]).powi(2) + (grad[1] - g[1]).powi(2));
            }
        }
    }
    total
}

type LinComb = Vec<(usize, f64)>;

/// Homogeneous linear constraints eliminated by substitution: every
/// eliminated variable is kept as a combination of free ones.
struct Eliminator {
    expr: Vec<Option<LinComb>>,
    users: Vec<Vec<usize>>,
}

impl Eliminator {
    fn new(n: usize) -> Self {
        Eliminator { expr: vec![None; n], users: vec![Vec::new(); n] }
    }

    fn resolve(&self, terms: &[(usize, f64)]) -> LinComb {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(v, c) in terms {
            match &self.expr[v] {
                Some(e) => {
                    for &(w, d) in e {
                        *acc.entry(w).or_default() += c * d;
                    }
                }
                None => *acc.entry(v).or_default() += c,
            }
        }
        acc.into_iter().filter(|(_, c)| c.abs() > 1e-12).collect()
    }

    /// Returns false when the constraint is already implied.
    fn add(&mut self, terms: &[(usize, f64)]) -> bool {
        let comb = self.resolve(terms);
        let Some(&(pivot, cp)) =
            comb.iter().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(a.0.cmp(&b.0)))
        else {
            return false;
        };
        let e: LinComb = comb.iter().filter(|(v, _)| *v != pivot).map(|&(v, c)| (v, -c / cp)).collect();
        let users = std::mem::take(&mut self.users[pivot]);
        for u in users {
            let Some(old) = self.expr[u].take() else { continue };
            let resolved = {
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for (w, d) in old {
                    if w == pivot {
                        for &(x, c) in &e {
                            *acc.entry(x).or_default() += d * c;
                        }
                    } else {
                        *acc.entry(w).or_default() += d;
                    }
                }
                acc.into_iter().filter(|(_, c)| c.abs() > 1e-12).collect::<LinComb>()
            };
            for &(w, _) in &resolved {
                self.users[w].push(u);
            }
            self.expr[u] = Some(resolved);
        }
        for &(w, _) in &e {
            self.users[w].push(pivot);
        }
        self.expr[pivot] = Some(e);
        true
    }
}

/// Which potential a boundary edge holds constant: the one whose frame
/// vector is closer to the edge normal.
fn boundary_potential(edge: [f64; 2], u: [f64; 2], v: [f64; 2]) -> usize {
    let l = edge[0].hypot(edge[1]);
    let n = [-edge[1] / l, edge[0] / l];
    let cu = (u[0] * n[0] + u[1] * n[1]).abs() / u[0].hypot(u[1]);
    let cv = (v[0] * n[0] + v[1] * n[1]).abs() / v[0].hypot(v[1]);
    if cu >= cv {
        0
    } else {
        1
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Least-squares potentials subject to the seam and boundary constraints.
pub fn integrate(
    mesh: &TriMesh,
    frames: &[Frame2],
    singularities: &[Singularity],
    cut: &CutGraph,
    assignment: &BranchAssignment,
) -> Result<SeamlessParam, ParamError> {
    let nn = cut.num_nodes();
    let vectors = assignment.vectors(cut, frames);
    let nv = 2 * nn;
    let mut elim = Eliminator::new(nv);

    // seams
    let mut cut_info = Vec::new();
    for &e in &cut.cut_edges {
        let [a, b] = mesh.edges()[e];
        let [Some(tl), Some(tr)] = mesh.edge_triangles(e) else { unreachable!("cut edges are interior") };
        let left = [cut.node_at(mesh, tl, a), cut.node_at(mesh, tl, b)];
        let right = [cut.node_at(mesh, tr, a), cut.node_at(mesh, tr, b)];
        let d = (assignment.branch[right[0]] - assignment.branch[left[0]]).rem_euclid(4) as i32;
        let r = rotation_matrix(d);
        for row in 0..2 {
            let mut terms = vec![(2 * right[1] + row, 1.0), (2 * right[0] + row, -1.0)];
            for col in 0..2 {
                if r[row][col] != 0.0 {
                    terms.push((2 * left[1] + col, -r[row][col]));
                    terms.push((2 * left[0] + col, r[row][col]));
                }
            }
            elim.add(&terms);
        }
        cut_info.push(CutEdgeInfo { edge: e, nodes: [a, b], left, right, rotation: d, translation: [0.0; 2] });
    }

    // boundary: one potential constant along each run of edges
    let mut bedges = Vec::new();
    for be in mesh.boundary_edges() {
        let [a, b] = be.nodes;
        let e = mesh.edge_id(a, b).expect("boundary edge");
        let t = mesh.edge_triangles(e)[0].expect("boundary edge has a triangle");
        if cut.singular[t] {
            continue;
        }
        let (na, nb) = (cut.node_at(mesh, t, a), cut.node_at(mesh, t, b));
        let u = [vectors[na].0[0] + vectors[nb].0[0], vectors[na].0[1] + vectors[nb].0[1]];
        let v = [vectors[na].1[0] + vectors[nb].1[0], vectors[na].1[1] + vectors[nb].1[1]];
        let p = boundary_potential(sub(mesh.node(b), mesh.node(a)), u, v);
        elim.add(&[(2 * na + p, 1.0), (2 * nb + p, -1.0)]);
        bedges.push((a, b, na, nb, p, be.tag.clone()));
    }
    let start_at: HashMap<usize, usize> = bedges.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
    let mut parent: Vec<usize> = (0..bedges.len()).collect();
    for i in 0..bedges.len() {
        if let Some(&j) = start_at.get(&bedges[i].1) {
            if bedges[j].2 == bedges[i].3 && bedges[j].4 == bedges[i].4 && bedges[j].5 == bedges[i].5 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, BoundarySegment> = BTreeMap::new();
    for i in 0..bedges.len() {
        let r = find(&mut parent, i);
        let (_, _, na, nb, p, tag) = &bedges[i];
        let seg = groups.entry(r).or_insert_with(|| BoundarySegment { tag: tag.clone(), potential: *p, nodes: Vec::new() });
        seg.nodes.extend([*na, *nb]);
    }
    let boundary_segments: Vec<BoundarySegment> = groups
        .into_values()
        .map(|mut s| {
            s.nodes.sort_unstable();
            s.nodes.dedup();
            s
        })
        .collect();

    // fix the translation
    let anchor = cut.corner_node[cut.root][0];
    elim.add(&[(2 * anchor, 1.0)]);
    elim.add(&[(2 * anchor + 1, 1.0)]);

    let mut reduced = vec![usize::MAX; nv];
    let mut m = 0;
    for v in 0..nv {
        if elim.expr[v].is_none() {
            reduced[v] = m;
            m += 1;
        }
    }
    let expand = |v: usize| -> LinComb {
        match &elim.expr[v] {
            Some(e) => e.iter().map(|&(w, c)| (reduced[w], c)).collect(),
            None => vec![(reduced[v], 1.0)],
        }
    };

    let mut trip = Vec::new();
    let mut rhs = vec![0.0; m];
    for (t, nodes) in cut.corner_node.iter().enumerate() {
        if cut.singular[t] {
            continue;
        }
        let el = mesh.element(t);
        let s = el.stiffness();
        for p in 0..2 {
            let w: [[f64; 2]; 3] = std::array::from_fn(|k| if p == 0 { vectors[nodes[k]].0 } else { vectors[nodes[k]].1 });
            let mut gbar = [0.0; 2];
            for (b, wt) in QUADRATURE.points.iter().zip(QUADRATURE.weights) {
                let g = target(interpolate(*b, w));
                gbar[0] += el.area * wt * g[0];
                gbar[1] += el.area * wt * g[1];
            }
            let ex: [LinComb; 3] = std::array::from_fn(|k| expand(2 * nodes[k] + p));
            for i in 0..3 {
                let bi = gbar[0] * el.grads[i][0] + gbar[1] * el.grads[i][1];
                for &(a, ca) in &ex[i] {
                    rhs[a] += ca * bi;
                }
                for j in 0..3 {
                    for &(a, ca) in &ex[i] {
                        for &(b, cb) in &ex[j] {
                            trip.push((a, b, s[i][j] * ca * cb));
                        }
                    }
                }
            }
        }
    }

    let y = if m == 0 {
        Vec::new()
    } else {
        match SpdSolver::new(m, &trip) {
            Ok(solver) => solver.solve(&rhs),
            Err(msg) => {
                if m <= DENSE_DIAGNOSTIC_LIMIT {
                    return Err(ParamError::RankDeficient { nullspace_dim: nullspace_dim(m, &trip, 1e-12) });
                }
                return Err(ParamError::Solver(msg));
            }
        }
    };
    let uv: Vec<[f64; 2]> = (0..nn)
        .map(|c| std::array::from_fn(|p| expand(2 * c + p).iter().map(|&(w, cw)| cw * y[w]).sum()))
        .collect();
    if uv.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(ParamError::Solver("non-finite potentials".into()));
    }

    for info in &mut cut_info {
        let l = rotate_potentials(info.rotation, uv[info.left[0]]);
        let r = uv[info.right[0]];
        info.translation = [r[0] - l[0], r[1] - l[1]];
    }
    let integration_error = integration_error(mesh, &cut.corner_node, &vectors, &uv);
    Ok(SeamlessParam {
        uv,
        node_vertex: cut.node_vertex.clone(),
        branch: assignment.branch.clone(),
        corner_node: cut.corner_node.clone(),
        singularities: singularities.to_vec(),
        cut_edges: cut_info,
        boundary_segments,
        integration_error,
    })
}
