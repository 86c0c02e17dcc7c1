//! Structured meshes used by tests, examples and the CLI.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{Point, TriMesh};

/// `[x0, x1] × [y0, y1]` split into `nx × ny` cells, diagonals alternating
/// in a checkerboard. Sides are tagged `bottom`, `right`, `top`, `left`.
pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> TriMesh {
    assert!(nx > 0 && ny > 0 && x1 > x0 && y1 > y0);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([
                x0 + (x1 - x0) * i as f64 / nx as f64,
                y0 + (y1 - y0) * j as f64 / ny as f64,
            ]);
        }
    }
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
        }
    }
    let mut tags = Vec::new();
    for i in 0..nx {
        tags.push(([id(i, 0), id(i + 1, 0)], "bottom".to_string()));
        tags.push(([id(i, ny), id(i + 1, ny)], "top".to_string()));
    }
    for j in 0..ny {
        tags.push(([id(nx, j), id(nx, j + 1)], "right".to_string()));
        tags.push(([id(0, j), id(0, j + 1)], "left".to_string()));
    }
    TriMesh::new(nodes, tris, &tags).expect("structured rectangle is valid")
}

/// Unit square with `n × n` cells.
pub fn unit_square(n: usize) -> TriMesh {
    rectangle(0.0, 1.0, 0.0, 1.0, n, n)
}

fn ccw(nodes: &[Point], t: [usize; 3]) -> [usize; 3] {
    let [a, b, c] = t.map(|i| nodes[i]);
    if (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]) < 0.0 {
        [t[0], t[2], t[1]]
    } else {
        t
    }
}

/// Coarse disk of radius `r` centred at the origin: a central equilateral
/// triangle (centroid at the origin) surrounded by a hexagonal ring.
fn coarse_disk(r: f64) -> (Vec<Point>, Vec<[usize; 3]>) {
    let polar = |rad: f64, deg: f64| [rad * deg.to_radians().cos(), rad * deg.to_radians().sin()];
    let mut nodes = Vec::new();
    for k in 0..3 {
        nodes.push(polar(0.45 * r, 90.0 + 120.0 * k as f64));
    }
    for k in 0..6 {
        nodes.push(polar(r, 90.0 + 60.0 * k as f64));
    }
    let inner = |k: usize| k % 3;
    let outer = |k: usize| 3 + k % 6;
    let mut tris = vec![[0, 1, 2]];
    for k in 0..3 {
        let (o0, o1, o2) = (outer(2 * k), outer(2 * k + 1), outer(2 * k + 2));
        tris.push([inner(k), o0, o1]);
        tris.push([inner(k), o1, inner(k + 1)]);
        tris.push([inner(k + 1), o1, o2]);
    }
    let tris = tris.into_iter().map(|t| ccw(&nodes, t)).collect();
    (nodes, tris)
}

/// Splits every triangle into four; midpoints of boundary edges are mapped
/// through `snap`.
fn refine(
    nodes: &mut Vec<Point>,
    tris: &[[usize; 3]],
    snap: &dyn Fn(Point) -> Point,
) -> Vec<[usize; 3]> {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out = Vec::with_capacity(4 * tris.len());
    for t in tris {
        let mut m = [0; 3];
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            m[k] = *mid.entry(key).or_insert_with(|| {
                let (p, q) = (nodes[a], nodes[b]);
                let mut x = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                if count[&key] == 1 {
                    x = snap(x);
                }
                nodes.push(x);
                nodes.len() - 1
            });
        }
        out.push([t[0], m[0], m[2]]);
        out.push([m[0], t[1], m[1]]);
        out.push([m[2], m[1], t[2]]);
        out.push([m[0], m[1], m[2]]);
    }
    out
}

/// Disk of radius `r` centred at the origin after `levels` uniform 4-splits.
/// The origin stays at the centroid of a triangle at every level. The whole
/// boundary is tagged `boundary`.
pub fn disk(r: f64, levels: usize) -> TriMesh {
    let (mut nodes, mut tris) = coarse_disk(r);
    let snap = move |p: Point| {
        let n = p[0].hypot(p[1]);
        [p[0] * r / n, p[1] * r / n]
    };
    for _ in 0..levels {
        tris = refine(&mut nodes, &tris, &snap);
    }
    TriMesh::new(nodes, tris, &[]).expect("refined disk is valid")
}

/// Annulus `r_in ≤ |x| ≤ r_out` with `n_theta` angular and `n_r` radial
/// cells; loops tagged `inner` and `outer`.
pub fn annulus(r_in: f64, r_out: f64, n_theta: usize, n_r: usize) -> TriMesh {
    assert!(n_theta >= 3 && n_r >= 1 && 0.0 < r_in && r_in < r_out);
    let id = |i: usize, j: usize| j * n_theta + i % n_theta;
    let mut nodes = Vec::with_capacity(n_theta * (n_r + 1));
    for j in 0..=n_r {
        let rad = r_in + (r_out - r_in) * j as f64 / n_r as f64;
        for i in 0..n_theta {
            // stagger alternate rings by half a cell for better angles
            let th = 2.0 * PI * (i as f64 + 0.5 * (j % 2) as f64) / n_theta as f64;
            nodes.push([rad * th.cos(), rad * th.sin()]);
        }
    }
    let mut tris = Vec::with_capacity(2 * n_theta * n_r);
    for j in 0..n_r {
        for i in 0..n_theta {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if j % 2 == 0 {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            } else {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
        }
    }
    let tris: Vec<_> = tris.into_iter().map(|t| ccw(&nodes, t)).collect();
    let mut tags = Vec::new();
    for i in 0..n_theta {
        tags.push(([id(i, 0), id(i + 1, 0)], "inner".to_string()));
        tags.push(([id(i, n_r), id(i + 1, n_r)], "outer".to_string()));
    }
    TriMesh::new(nodes, tris, &tags).expect("structured annulus is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_counts() {
        let m = rectangle(0.0, 2.0, 0.0, 1.0, 4, 3);
        assert_eq!(m.num_nodes(), 20);
        assert_eq!(m.num_triangles(), 24);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.corners().len(), 4);
        assert_eq!(m.curves().len(), 4);
        assert!((m.total_area() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn disk_levels() {
        for levels in 0..4 {
            let m = disk(1.0, levels);
            assert_eq!(m.num_triangles(), 10 * 4usize.pow(levels as u32));
            assert_eq!(m.euler_characteristic(), 1);
            if levels >= 2 {
                assert!(m.corners().is_empty(), "level {levels}: {:?}", m.corners());
            }
            for lp in m.boundary_loops() {
                for &n in lp {
                    assert!((m.node(n)[0].hypot(m.node(n)[1]) - 1.0).abs() < 1e-13);
                }
            }
            // the origin lies strictly inside some triangle
            let inside = (0..m.num_triangles()).filter(|&t| {
                let [a, b, c] = m.triangles()[t].map(|i| m.node(i));
                let s = |p: Point, q: Point| p[0] * q[1] - p[1] * q[0];
                s(a, b) > 1e-12 && s(b, c) > 1e-12 && s(c, a) > 1e-12
            });
            assert_eq!(inside.count(), 1);
        }
        let fine = disk(1.0, 5);
        assert!((fine.total_area() - PI).abs() < 2e-3);
    }

    #[test]
    fn annulus_topology() {
        let m = annulus(0.5, 1.0, 24, 4);
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.boundary_loops().len(), 2);
        assert_eq!(m.tags(), vec!["inner".to_string(), "outer".to_string()]);
        assert!(m.corners().is_empty());
    }
}
