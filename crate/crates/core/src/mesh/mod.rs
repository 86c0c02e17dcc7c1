//! Triangle meshes of planar domains: topology, tagged boundary curves,
//! P1 elements and quadrature.

mod fem;
pub mod generate;
mod io;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::MeshError;

pub use fem::{integrate_domain, P1Element, QuadratureRule, StiffnessMatrix, QUADRATURE};
pub use io::{load_mesh, parse_json_mesh, parse_msh, write_msh, JsonBoundaryEdge, JsonMesh, MeshFormat};

pub type Point = [f64; 2];

/// Default turning angle above which a boundary node becomes a corner.
pub const DEFAULT_CORNER_ANGLE_DEG: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    /// Oriented so the domain lies to the left.
    pub nodes: [usize; 2],
    pub tag: String,
}

/// Maximal run of boundary nodes between two corners (or a full loop).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCurve {
    pub tag: String,
    /// Nodes in boundary order; a closed curve does not repeat its first node.
    pub nodes: Vec<usize>,
    pub closed: bool,
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    corners: Vec<usize>,
    curves: Vec<BoundaryCurve>,
    loops: Vec<Vec<usize>>,
    edges: Vec<[usize; 2]>,
    edge_tris: Vec<[Option<usize>; 2]>,
    tri_edges: Vec<[usize; 3]>,
    node_tris: Vec<Vec<usize>>,
    elements: Vec<P1Element>,
    edge_index: HashMap<(usize, usize), usize>,
    boundary_next: Vec<Option<usize>>,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    /// Builds a mesh from raw arrays; `tags` labels boundary edges (either
    /// orientation). Untagged boundary edges get the tag `"boundary"`.
    pub fn new(nodes: Vec<Point>, triangles: Vec<[usize; 3]>, tags: &[([usize; 2], String)]) -> Result<Self, MeshError> {
        Self::with_corner_angle(nodes, triangles, tags, DEFAULT_CORNER_ANGLE_DEG)
    }

    pub fn with_corner_angle(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        tags: &[([usize; 2], String)],
        corner_angle_deg: f64,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let mut elements = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &n in tri {
                if n >= nodes.len() {
                    return Err(MeshError::MissingNode { tri: t, node: n });
                }
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            let scale = (0..3)
                .map(|i| {
                    let (a, b) = (nodes[tri[i]], nodes[tri[(i + 1) % 3]]);
                    (a[0] - b[0]).hypot(a[1] - b[1])
                })
                .fold(0.0f64, f64::max);
            if !(area > 1e-14 * scale * scale) {
                return Err(MeshError::InvertedTriangle { tri: t, area });
            }
            elements.push(P1Element::new([nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]]));
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_tris: Vec<Vec<usize>> = Vec::new();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                if let Some(prev) = directed.insert((a, b), t) {
                    return Err(MeshError::NonManifoldEdge { a, b, tris: vec![prev, t] });
                }
                let id = *edge_index.entry(key(a, b)).or_insert_with(|| {
                    edges.push([a.min(b), a.max(b)]);
                    edge_tris.push(Vec::new());
                    edges.len() - 1
                });
                edge_tris[id].push(t);
                te[e] = id;
            }
            tri_edges.push(te);
        }
        let mut edge_tris_fixed = Vec::with_capacity(edges.len());
        for (id, ts) in edge_tris.iter().enumerate() {
            if ts.len() > 2 {
                let [a, b] = edges[id];
                return Err(MeshError::NonManifoldEdge { a, b, tris: ts.clone() });
            }
            edge_tris_fixed.push([Some(ts[0]), ts.get(1).copied()]);
        }

        let mut node_tris = vec![Vec::new(); nodes.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for &n in tri {
                node_tris[n].push(t);
            }
        }

        let tag_map: HashMap<(usize, usize), &String> = tags.iter().map(|(e, tag)| (key(e[0], e[1]), tag)).collect();
        let mut boundary_edges = Vec::new();
        let mut boundary_next: Vec<Option<usize>> = vec![None; nodes.len()];
        for (id, ts) in edge_tris.iter().enumerate() {
            if ts.len() != 1 {
                continue;
            }
            let tri = triangles[ts[0]];
            let e = tri_edges[ts[0]].iter().position(|&x| x == id).unwrap();
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            if boundary_next[a].is_some() {
                return Err(MeshError::NonManifoldVertex { node: a });
            }
            boundary_next[a] = Some(b);
            let tag = tag_map.get(&key(a, b)).map(|s| s.to_string()).unwrap_or_else(|| "boundary".to_string());
            boundary_edges.push(BoundaryEdge { nodes: [a, b], tag });
        }
        for (e, _) in tags {
            let id = edge_index.get(&key(e[0], e[1]));
            if id.map(|&i| edge_tris[i].len() != 1).unwrap_or(true) {
                return Err(MeshError::TagOnInteriorEdge { a: e[0], b: e[1] });
            }
        }

        let components = count_components(&triangles, &tri_edges, &edge_tris_fixed);
        if components != 1 {
            return Err(MeshError::Disconnected { components });
        }

        let mut mesh = TriMesh {
            nodes,
            triangles,
            boundary_edges,
            corners: Vec::new(),
            curves: Vec::new(),
            loops: Vec::new(),
            edges,
            edge_tris: edge_tris_fixed,
            tri_edges,
            node_tris,
            elements,
            edge_index,
            boundary_next,
        };
        mesh.build_curves(corner_angle_deg)?;
        Ok(mesh)
    }

    fn build_curves(&mut self, corner_angle_deg: f64) -> Result<(), MeshError> {
        let tag_of: HashMap<usize, &str> =
            self.boundary_edges.iter().map(|e| (e.nodes[0], e.tag.as_str())).collect();
        let mut prev: HashMap<usize, usize> = HashMap::new();
        for e in &self.boundary_edges {
            prev.insert(e.nodes[1], e.nodes[0]);
        }
        let threshold = corner_angle_deg.to_radians();
        let mut visited = vec![false; self.nodes.len()];
        let mut starts: Vec<usize> = self.boundary_edges.iter().map(|e| e.nodes[0]).collect();
        starts.sort_unstable();
        for &start in &starts {
            if visited[start] {
                continue;
            }
            let mut lp = vec![start];
            visited[start] = true;
            let mut cur = start;
            loop {
                let next = self.boundary_next[cur].ok_or(MeshError::NonManifoldVertex { node: cur })?;
                if next == start {
                    break;
                }
                if visited[next] {
                    return Err(MeshError::NonManifoldVertex { node: next });
                }
                visited[next] = true;
                lp.push(next);
                cur = next;
            }
            self.loops.push(lp);
        }
        for lp in &self.loops {
            let n = lp.len();
            let mut is_corner = vec![false; n];
            for (i, &v) in lp.iter().enumerate() {
                let p = prev[&v];
                let nx = self.boundary_next[v].unwrap();
                let (a, b, c) = (self.nodes[p], self.nodes[v], self.nodes[nx]);
                let d1 = [b[0] - a[0], b[1] - a[1]];
                let d2 = [c[0] - b[0], c[1] - b[1]];
                let turn = (d1[0] * d2[1] - d1[1] * d2[0]).atan2(d1[0] * d2[0] + d1[1] * d2[1]);
                is_corner[i] = turn.abs() > threshold || tag_of[&p] != tag_of[&v];
            }
            let corner_pos: Vec<usize> = (0..n).filter(|&i| is_corner[i]).collect();
            self.corners.extend(corner_pos.iter().map(|&i| lp[i]));
            if corner_pos.is_empty() {
                self.curves.push(BoundaryCurve { tag: tag_of[&lp[0]].to_string(), nodes: lp.clone(), closed: true });
                continue;
            }
            for (ci, &s) in corner_pos.iter().enumerate() {
                let e = corner_pos[(ci + 1) % corner_pos.len()];
                let mut nodes = vec![lp[s]];
                let mut i = s;
                loop {
                    i = (i + 1) % n;
                    nodes.push(lp[i]);
                    if i == e {
                        break;
                    }
                }
                self.curves.push(BoundaryCurve { tag: tag_of[&lp[s]].to_string(), nodes, closed: false });
            }
        }
        self.corners.sort_unstable();
        Ok(())
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn corners(&self) -> &[usize] {
        &self.corners
    }

    pub fn curves(&self) -> &[BoundaryCurve] {
        &self.curves
    }

    /// Boundary loops as node cycles, domain on the left.
    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.loops
    }

    /// Unique edges, each stored with `nodes[0] < nodes[1]`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_triangles(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_tris[e]
    }

    /// Edge ids of a triangle; local edge `k` joins local vertices `k` and `k+1`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&key(a, b)).copied()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e][1].is_none()
    }

    pub fn is_boundary_node(&self, n: usize) -> bool {
        self.boundary_next[n].is_some()
    }

    /// Boundary successor of a boundary node.
    pub fn boundary_next(&self, n: usize) -> Option<usize> {
        self.boundary_next[n]
    }

    pub fn node_triangles(&self, n: usize) -> &[usize] {
        &self.node_tris[n]
    }

    /// Triangle across local edge `k` of `t`.
    pub fn neighbor(&self, t: usize, k: usize) -> Option<usize> {
        let [a, b] = self.edge_tris[self.tri_edges[t][k]];
        match (a, b) {
            (Some(a), Some(b)) if a == t => Some(b),
            (Some(a), Some(_)) => Some(a),
            _ => None,
        }
    }

    pub fn element(&self, t: usize) -> &P1Element {
        &self.elements[t]
    }

    pub fn elements(&self) -> &[P1Element] {
        &self.elements
    }

    /// Exact P1 gradient of nodal values on triangle `t`.
    pub fn elem_gradient(&self, t: usize, values: [f64; 3]) -> [f64; 2] {
        self.elements[t].gradient(values)
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        let (p, q) = (self.nodes[a], self.nodes[b]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    pub fn max_edge_length(&self) -> f64 {
        (0..self.edges.len()).map(|e| self.edge_length(e)).fold(0.0, f64::max)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.nodes.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Distinct boundary tags, sorted.
    pub fn tags(&self) -> Vec<String> {
        let set: std::collections::BTreeSet<&str> = self.boundary_edges.iter().map(|e| e.tag.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Enclosed area computed from the boundary loops (shoelace).
    pub fn boundary_polygon_area(&self) -> f64 {
        self.loops
            .iter()
            .map(|lp| {
                (0..lp.len())
                    .map(|i| {
                        let (a, b) = (self.nodes[lp[i]], self.nodes[lp[(i + 1) % lp.len()]]);
                        0.5 * (a[0] * b[1] - b[0] * a[1])
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// Unit tangent at a boundary node in boundary order (average of the
    /// incident boundary edge directions).
    pub fn boundary_tangent(&self, n: usize) -> Option<[f64; 2]> {
        let next = self.boundary_next[n]?;
        let prev = self.boundary_edges.iter().find(|e| e.nodes[1] == n)?.nodes[0];
        let d1 = unit(sub(self.nodes[n], self.nodes[prev]));
        let d2 = unit(sub(self.nodes[next], self.nodes[n]));
        let s = [d1[0] + d2[0], d1[1] + d2[1]];
        if s[0].hypot(s[1]) < 1e-12 {
            Some(d2)
        } else {
            Some(unit(s))
        }
    }

    /// Per-tag list of boundary edges.
    pub fn edges_by_tag(&self) -> BTreeMap<String, Vec<[usize; 2]>> {
        let mut m: BTreeMap<String, Vec<[usize; 2]>> = BTreeMap::new();
        for e in &self.boundary_edges {
            m.entry(e.tag.clone()).or_default().push(e.nodes);
        }
        m
    }

    /// Tagged boundary edges, in the shape accepted by [`TriMesh::new`].
    pub fn tag_list(&self) -> Vec<([usize; 2], String)> {
        self.boundary_edges.iter().map(|e| (e.nodes, e.tag.clone())).collect()
    }
}

pub(crate) fn sub(a: Point, b: Point) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn count_components(triangles: &[[usize; 3]], tri_edges: &[[usize; 3]], edge_tris: &[[Option<usize>; 2]]) -> usize {
    let mut seen = vec![false; triangles.len()];
    let mut components = 0;
    for s in 0..triangles.len() {
        if seen[s] {
            continue;
        }
        components += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(t) = stack.pop() {
            for &e in &tri_edges[t] {
                for n in edge_tris[e].iter().flatten() {
                    if !seen[*n] {
                        seen[*n] = true;
                        stack.push(*n);
                    }
                }
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangle_square() -> TriMesh {
        TriMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            &[([0, 1], "bottom".into()), ([1, 2], "right".into()), ([2, 3], "top".into()), ([3, 0], "left".into())],
        )
        .unwrap()
    }

    #[test]
    fn single_triangle() {
        let m = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], &[]).unwrap();
        assert_eq!(m.num_triangles(), 1);
        assert_eq!(m.boundary_edges().len(), 3);
        assert_eq!(m.corners().len(), 3);
    }

    #[test]
    fn square_topology() {
        let m = two_triangle_square();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.corners(), &[0, 1, 2, 3]);
        assert_eq!(m.curves().len(), 4);
        assert!((m.total_area() - m.boundary_polygon_area()).abs() < 1e-14);
        let diag = m.edge_id(0, 2).unwrap();
        assert!(!m.is_boundary_edge(diag));
        assert_eq!(m.neighbor(0, 2), Some(1));
        assert_eq!(m.neighbor(m.neighbor(0, 2).unwrap(), 0), Some(0));
    }

    #[test]
    fn rejects_bad_input() {
        let dup = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 1, 2]], &[]);
        assert!(matches!(dup, Err(MeshError::NonManifoldEdge { .. })));
        let inv = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 2, 1]], &[]);
        assert!(matches!(inv, Err(MeshError::InvertedTriangle { tri: 0, .. })));
        let missing = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0]], vec![[0, 1, 2]], &[]);
        assert!(matches!(missing, Err(MeshError::MissingNode { .. })));
    }

    #[test]
    fn elem_gradient_reproduces_linear_functions() {
        let m = two_triangle_square();
        for t in 0..2 {
            let tri = m.triangles()[t];
            let xs = tri.map(|n| m.node(n)[0]);
            let lin = tri.map(|n| 2.0 * m.node(n)[0] + 3.0 * m.node(n)[1]);
            let gx = m.elem_gradient(t, xs);
            let gl = m.elem_gradient(t, lin);
            assert!((gx[0] - 1.0).abs() < 1e-14 && gx[1].abs() < 1e-14);
            assert!((gl[0] - 2.0).abs() < 1e-14 && (gl[1] - 3.0).abs() < 1e-14);
            assert_eq!(m.elem_gradient(t, [4.0; 3]), [0.0, 0.0]);
        }
    }
}
