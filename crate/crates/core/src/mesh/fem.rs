use rayon::prelude::*;

use super::{Point, TriMesh};

/// Linear triangle: constant gradients of the three hat functions and area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P1Element {
    /// `grads[i]` is the gradient of the hat function of local vertex `i`.
    pub grads: [[f64; 2]; 3],
    pub area: f64,
    pub vertices: [Point; 3],
}

impl P1Element {
    pub fn new(v: [Point; 3]) -> Self {
        let [a, b, c] = v;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let area = 0.5 * det;
        let grads = [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ];
        P1Element { grads, area, vertices: v }
    }

    pub fn gradient(&self, values: [f64; 3]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for i in 0..3 {
            g[0] += values[i] * self.grads[i][0];
            g[1] += values[i] * self.grads[i][1];
        }
        g
    }

    /// Cartesian point of barycentric coordinates `b`.
    pub fn point(&self, b: [f64; 3]) -> Point {
        let mut p = [0.0; 2];
        for i in 0..3 {
            p[0] += b[i] * self.vertices[i][0];
            p[1] += b[i] * self.vertices[i][1];
        }
        p
    }

    /// `∫ ∇N_i · ∇N_j` over the triangle.
    pub fn stiffness(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                self.area * (self.grads[i][0] * self.grads[j][0] + self.grads[i][1] * self.grads[j][1])
            })
        })
    }
}

/// Barycentric points and weights (weights sum to one, scaled by area on use).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: [[f64; 3]; 3],
    pub weights: [f64; 3],
}

/// Symmetric 3-point rule, exact for quadratics.
pub const QUADRATURE: QuadratureRule = QuadratureRule {
    points: [
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ],
    weights: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

/// `Σ_t area_t Σ_k w_k f(p_k, t)`; per-triangle terms are evaluated in
/// parallel and summed in triangle order.
pub fn integrate_domain<F>(mesh: &TriMesh, integrand: F) -> f64
where
    F: Fn(Point, usize) -> f64 + Sync,
{
    let per_tri: Vec<f64> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let el = mesh.element(t);
            let s: f64 = (0..3).map(|k| QUADRATURE.weights[k] * integrand(el.point(QUADRATURE.points[k]), t)).sum();
            el.area * s
        })
        .collect();
    per_tri.iter().sum()
}

/// Assembled scalar P1 stiffness matrix in compressed rows.
#[derive(Clone, Debug)]
pub struct StiffnessMatrix {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl StiffnessMatrix {
    pub fn assemble(mesh: &TriMesh) -> Self {
        let n = mesh.num_nodes();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let k = mesh.element(t).stiffness();
            for i in 0..3 {
                for j in 0..3 {
                    rows[tri[i]].push((tri[j], k[i][j]));
                }
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in r {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        StiffnessMatrix { row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// `y = K x` for values read through `x(i)`.
    pub fn apply(&self, x: impl Fn(usize) -> f64) -> Vec<f64> {
        (0..self.dim())
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k] * x(self.cols[k])).sum())
            .collect()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_weights_and_exactness() {
        assert!((QUADRATURE.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // reference triangle (0,0),(1,0),(0,1): ∫x² = 1/12, ∫xy = 1/24, area 1/2
        let el = P1Element::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let quad = |f: &dyn Fn(Point) -> f64| {
            el.area * (0..3).map(|k| QUADRATURE.weights[k] * f(el.point(QUADRATURE.points[k]))).sum::<f64>()
        };
        assert!((quad(&|p| p[0] * p[0]) - 1.0 / 12.0).abs() < 1e-15);
        assert!((quad(&|p| p[0] * p[1]) - 1.0 / 24.0).abs() < 1e-15);
        assert!((quad(&|p| p[1]) - 1.0 / 6.0).abs() < 1e-15);
        assert!((quad(&|_| 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn stiffness_rows_sum_to_zero() {
        let el = P1Element::new([[0.0, 0.0], [2.0, 0.1], [0.3, 1.0]]);
        for row in el.stiffness() {
            assert!(row.iter().sum::<f64>().abs() < 1e-14);
        }
    }
}
