use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::mesh::TriMesh;
use crate::odeco::Frame2;

/// Period jumps on edges: `k` relates the branch at `edges[e][0]` to the
/// one at `edges[e][1]` (`m₁ = m₀ + k`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub k: Vec<i32>,
}

impl Matching {
    /// Jump from node `a` to node `b` along an existing edge.
    pub fn get(&self, mesh: &TriMesh, a: usize, b: usize) -> i32 {
        if a == b {
            return 0;
        }
        let e = mesh.edge_id(a, b).expect("nodes share an edge");
        if mesh.edges()[e][0] == a {
            self.k[e]
        } else {
            -self.k[e]
        }
    }
}

/// Jump that best aligns the frame at `a` with the frame at `b`; exact ties
/// go to zero.
pub fn matching_between(a: &Frame2, b: &Frame2) -> i32 {
    let x = (a.phi - b.phi) / FRAC_PI_2;
    if (x.abs() - 0.5).abs() < 1e-14 {
        0
    } else {
        x.round() as i32
    }
}

pub fn compute_matchings(mesh: &TriMesh, frames: &[Frame2]) -> Matching {
    Matching { k: mesh.edges().iter().map(|&[a, b]| matching_between(&frames[a], &frames[b])).collect() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub triangle: usize,
    /// Net rotation of the frames around the triangle in quarter turns.
    pub quarter_turns: i32,
}

impl Singularity {
    pub fn index(&self) -> f64 {
        self.quarter_turns as f64 / 4.0
    }
}

/// Quarter-turn index of one triangle.
pub fn triangle_index(mesh: &TriMesh, matching: &Matching, t: usize) -> i32 {
    let tri = mesh.triangles()[t];
    (0..3).map(|i| matching.get(mesh, tri[i], tri[(i + 1) % 3])).sum()
}

/// Triangles with nonzero index, in increasing order.
pub fn detect_singularities(mesh: &TriMesh, matching: &Matching) -> Vec<Singularity> {
    (0..mesh.num_triangles())
        .filter_map(|t| {
            let q = triangle_index(mesh, matching, t);
            if q != 0 {
                if q.abs() > 1 {
                    log::warn!("triangle {t} has index {}/4", q);
                }
                Some(Singularity { triangle: t, quarter_turns: q })
            } else {
                None
            }
        })
        .collect()
}

/// Cut edges, the singular triangles they isolate, and the cut-open mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutGraph {
    /// Edge ids, increasing.
    pub cut_edges: Vec<usize>,
    pub singular: Vec<bool>,
    /// Cut-open node of each triangle corner (`usize::MAX` on singular triangles).
    pub corner_node: Vec<[usize; 3]>,
    /// Mesh node of each cut-open node.
    pub node_vertex: Vec<usize>,
    /// Active triangle used as the root of the dual tree.
    pub root: usize,
}

impl CutGraph {
    pub fn num_nodes(&self) -> usize {
        self.node_vertex.len()
    }

    pub fn is_cut(&self, e: usize) -> bool {
        self.cut_edges.binary_search(&e).is_ok()
    }

    /// Cut-open node at mesh node `v` as seen from triangle `t`.
    pub fn node_at(&self, mesh: &TriMesh, t: usize, v: usize) -> usize {
        let k = mesh.triangles()[t].iter().position(|&x| x == v).expect("vertex of triangle");
        self.corner_node[t][k]
    }
}

/// Whether an edge joins two non-singular triangles.
fn active_interior(mesh: &TriMesh, singular: &[bool], e: usize) -> Option<(usize, usize)> {
    match mesh.edge_triangles(e) {
        [Some(a), Some(b)] if !singular[a] && !singular[b] => Some((a, b)),
        _ => None,
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Dual spanning tree over the non-singular triangles; the cut is every
/// interior edge the tree does not cross, with dangling branches removed
/// unless they end on the boundary or at a singular triangle.
pub fn build_cut_graph(mesh: &TriMesh, singularities: &[Singularity]) -> Result<CutGraph, ParamError> {
    let nt = mesh.num_triangles();
    let mut singular = vec![false; nt];
    for s in singularities {
        singular[s.triangle] = true;
    }
    let root = (0..nt).find(|&t| !singular[t]).ok_or(ParamError::Disconnected { components: 0 })?;

    let mut in_tree = vec![false; mesh.edges().len()];
    let mut seen = vec![false; nt];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(t) = queue.pop_front() {
        for &e in &mesh.triangle_edges(t) {
            if let Some((a, b)) = active_interior(mesh, &singular, e) {
                let other = if a == t { b } else { a };
                if !seen[other] {
                    seen[other] = true;
                    in_tree[e] = true;
                    queue.push_back(other);
                }
            }
        }
    }
    let unreached = (0..nt).filter(|&t| !singular[t] && !seen[t]).count();
    if unreached > 0 {
        return Err(ParamError::Disconnected { components: 2 });
    }

    let mut cut: Vec<bool> = (0..mesh.edges().len())
        .map(|e| active_interior(mesh, &singular, e).is_some() && !in_tree[e])
        .collect();

    let mut anchored = vec![false; mesh.num_nodes()];
    for n in 0..mesh.num_nodes() {
        anchored[n] = mesh.is_boundary_node(n);
    }
    for (t, &s) in singular.iter().enumerate() {
        if s {
            for &v in &mesh.triangles()[t] {
                anchored[v] = true;
            }
        }
    }
    let mut degree = vec![0usize; mesh.num_nodes()];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_nodes()];
    for (e, &c) in cut.iter().enumerate() {
        if c {
            for &v in &mesh.edges()[e] {
                degree[v] += 1;
                incident[v].push(e);
            }
        }
    }
    let mut stack: Vec<usize> = (0..mesh.num_nodes()).filter(|&v| degree[v] == 1 && !anchored[v]).collect();
    while let Some(v) = stack.pop() {
        if degree[v] != 1 || anchored[v] {
            continue;
        }
        let e = *incident[v].iter().find(|&&e| cut[e]).expect("degree one");
        cut[e] = false;
        for &w in &mesh.edges()[e] {
            degree[w] -= 1;
            if degree[w] == 1 && !anchored[w] {
                stack.push(w);
            }
        }
    }

    // glue corners across every non-cut edge between active triangles
    let mut parent: Vec<usize> = (0..3 * nt).collect();
    for e in 0..mesh.edges().len() {
        if cut[e] {
            continue;
        }
        if let Some((a, b)) = active_interior(mesh, &singular, e) {
            for &v in &mesh.edges()[e] {
                let ka = mesh.triangles()[a].iter().position(|&x| x == v).unwrap();
                let kb = mesh.triangles()[b].iter().position(|&x| x == v).unwrap();
                let (ra, rb) = (find(&mut parent, 3 * a + ka), find(&mut parent, 3 * b + kb));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut id_of_root = vec![usize::MAX; 3 * nt];
    let mut corner_node = vec![[usize::MAX; 3]; nt];
    let mut node_vertex = Vec::new();
    for t in 0..nt {
        if singular[t] {
            continue;
        }
        for k in 0..3 {
            let r = find(&mut parent, 3 * t + k);
            if id_of_root[r] == usize::MAX {
                id_of_root[r] = node_vertex.len();
                node_vertex.push(mesh.triangles()[t][k]);
            }
            corner_node[t][k] = id_of_root[r];
        }
    }
    Ok(CutGraph {
        cut_edges: (0..cut.len()).filter(|&e| cut[e]).collect(),
        singular,
        corner_node,
        node_vertex,
        root,
    })
}

/// Branch of every cut-open node, chosen so that frame vectors vary
/// continuously across all non-cut edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchAssignment {
    pub branch: Vec<i32>,
}

impl BranchAssignment {
    /// `(u, v)` at every cut-open node.
    pub fn vectors(&self, cut: &CutGraph, frames: &[Frame2]) -> Vec<([f64; 2], [f64; 2])> {
        self.branch.iter().zip(&cut.node_vertex).map(|(&m, &v)| frames[v].vectors(m)).collect()
    }
}

pub fn assign_vectors(mesh: &TriMesh, matching: &Matching, cut: &CutGraph) -> Result<BranchAssignment, ParamError> {
    let mut branch: Vec<Option<i32>> = vec![None; cut.num_nodes()];
    let nt = mesh.num_triangles();
    let mut seen = vec![false; nt];
    let root = cut.root;
    branch[cut.corner_node[root][0]] = Some(0);
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(t) = queue.pop_front() {
        let tri = mesh.triangles()[t];
        let known = (0..3).find(|&k| branch[cut.corner_node[t][k]].is_some()).expect("entered through a shared edge");
        let base = branch[cut.corner_node[t][known]].unwrap();
        for k in 0..3 {
            let node = cut.corner_node[t][k];
            let m = (base + matching.get(mesh, tri[known], tri[k])).rem_euclid(4);
            match branch[node] {
                None => branch[node] = Some(m),
                Some(prev) if prev != m => return Err(ParamError::InconsistentBranch { node: tri[k] }),
                _ => {}
            }
        }
        for (k, &e) in mesh.triangle_edges(t).iter().enumerate() {
            if cut.is_cut(e) {
                continue;
            }
            if let Some(n) = mesh.neighbor(t, k) {
                if !cut.singular[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    Ok(BranchAssignment { branch: branch.into_iter().map(|m| m.unwrap_or(0)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_break_and_antisymmetry() {
        let a = Frame2::new(0.0, 1.0, 1.0).unwrap();
        let b = Frame2::new(std::f64::consts::FRAC_PI_4, 1.0, 1.0).unwrap();
        assert_eq!(matching_between(&a, &b), 0);
        assert_eq!(matching_between(&b, &a), 0);
        let c = Frame2::new(1.5, 1.0, 1.0).unwrap();
        assert_eq!(matching_between(&a, &c), -1);
        assert_eq!(matching_between(&c, &a), 1);
    }
}
