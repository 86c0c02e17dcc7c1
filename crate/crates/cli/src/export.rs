//! SVG and legacy VTK writers. Numbers use fixed precision so output is
//! reproducible byte for byte.

use std::f64::consts::TAU;
use std::fmt::Write;

use odeco_frames::odeco::eval_poly;
use odeco_frames::param::SeamlessParam;
use odeco_frames::solver::RecoveredFrame;
use odeco_frames::{OdecoQ, TriMesh};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;
const GLYPH_SAMPLES: usize = 64;

/// Maps mesh coordinates to SVG pixels with y pointing up.
struct View {
    x0: f64,
    y1: f64,
    scale: f64,
    height: f64,
}

impl View {
    fn new(mesh: &TriMesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in mesh.nodes() {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let w = (hi[0] - lo[0]).max(1e-12);
        let scale = (WIDTH - 2.0 * MARGIN) / w;
        View { x0: lo[0], y1: hi[1], scale, height: (hi[1] - lo[1]) * scale + 2.0 * MARGIN }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (MARGIN + (p[0] - self.x0) * self.scale, MARGIN + (self.y1 - p[1]) * self.scale)
    }

    fn header(&self, out: &mut String) {
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}">"#,
            WIDTH, self.height, WIDTH, self.height
        )
        .unwrap();
        writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    }
}

fn mesh_layer(view: &View, mesh: &TriMesh, out: &mut String) {
    out.push_str(r##"<g stroke="#cccccc" stroke-width="0.5" fill="none">"##);
    out.push('\n');
    for &[a, b] in mesh.edges() {
        let (x1, y1) = view.map(mesh.node(a));
        let (x2, y2) = view.map(mesh.node(b));
        writeln!(out, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#).unwrap();
    }
    out.push_str("</g>\n");
}

fn mean_edge_length(mesh: &TriMesh) -> f64 {
    let n = mesh.edges().len().max(1);
    (0..mesh.edges().len()).map(|e| mesh.edge_length(e)).sum::<f64>() / n as f64
}

fn polyline(view: &View, pts: &[[f64; 2]], color: &str, out: &mut String) {
    if pts.len() < 2 {
        return;
    }
    let mut d = String::new();
    for p in pts {
        let (x, y) = view.map(*p);
        write!(d, "{x:.3},{y:.3} ").unwrap();
    }
    writeln!(out, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="0.8"/>"#, d.trim_end()).unwrap();
}

/// Frame segments at every node and, optionally, the polar curve
/// `r = |p(θ)|` of each node's polynomial, green where `p > 0` and magenta
/// where `p < 0`.
pub fn frames_svg(mesh: &TriMesh, q: &[OdecoQ], frames: &[RecoveredFrame], glyphs: bool) -> String {
    let view = View::new(mesh);
    let radius = 0.4 * mean_edge_length(mesh);
    let mut out = String::new();
    view.header(&mut out);
    mesh_layer(&view, mesh, &mut out);
    if glyphs {
        out.push_str("<g id=\"glyphs\">\n");
        for (n, qn) in q.iter().enumerate() {
            let c = mesh.node(n);
            let vals: Vec<f64> = (0..=GLYPH_SAMPLES).map(|k| eval_poly(qn, TAU * k as f64 / GLYPH_SAMPLES as f64)).collect();
            let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak <= 0.0 {
                continue;
            }
            let mut run: Vec<[f64; 2]> = Vec::new();
            let mut sign = vals[0] >= 0.0;
            for (k, v) in vals.iter().enumerate() {
                let th = TAU * k as f64 / GLYPH_SAMPLES as f64;
                let r = radius * v.abs() / peak;
                let p = [c[0] + r * th.cos(), c[1] + r * th.sin()];
                if (*v >= 0.0) != sign {
                    run.push(p);
                    polyline(&view, &run, if sign { "#1a9850" } else { "#c51b7d" }, &mut out);
                    run.clear();
                    sign = *v >= 0.0;
                }
                run.push(p);
            }
            polyline(&view, &run, if sign { "#1a9850" } else { "#c51b7d" }, &mut out);
        }
        out.push_str("</g>\n");
    }
    out.push_str("<g id=\"frames\" stroke-width=\"1\">\n");
    for (n, f) in frames.iter().enumerate() {
        let c = mesh.node(n);
        let f = f.frame;
        let big = f.lambda.max(f.mu);
        for (dir, size, color) in [(f.u_hat(), f.lambda, "#d73027"), (f.v_hat(), f.mu, "#4575b4")] {
            let l = radius * size / big;
            let (x1, y1) = view.map([c[0] - l * dir[0], c[1] - l * dir[1]]);
            let (x2, y2) = view.map([c[0] + l * dir[0], c[1] + l * dir[1]]);
            writeln!(out, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{color}"/>"#).unwrap();
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Points where a linear function with corner `values` on triangle `pts`
/// crosses `level`.
fn level_crossing(pts: [[f64; 2]; 3], values: [f64; 3], level: f64) -> Option<[[f64; 2]; 2]> {
    let mut hits = Vec::with_capacity(2);
    for k in 0..3 {
        let (a, b) = (k, (k + 1) % 3);
        let (va, vb) = (values[a] - level, values[b] - level);
        if (va < 0.0) != (vb < 0.0) {
            let t = va / (va - vb);
            hits.push([pts[a][0] + t * (pts[b][0] - pts[a][0]), pts[a][1] + t * (pts[b][1] - pts[a][1])]);
        }
    }
    (hits.len() == 2).then(|| [hits[0], hits[1]])
}

/// Isolines of both potentials at multiples of `spacing`, traced per
/// triangle; singular triangles are filled.
pub fn isolines_svg(mesh: &TriMesh, param: &SeamlessParam, spacing: f64) -> String {
    let view = View::new(mesh);
    let mut out = String::new();
    view.header(&mut out);
    mesh_layer(&view, mesh, &mut out);
    for (channel, color) in [(0usize, "#d73027"), (1, "#4575b4")] {
        writeln!(out, r#"<g id="iso-{}" stroke="{color}" stroke-width="1">"#, if channel == 0 { "u" } else { "v" }).unwrap();
        for t in 0..mesh.num_triangles() {
            if !param.is_active(t) {
                continue;
            }
            let tri = mesh.triangles()[t];
            let pts = tri.map(|v| mesh.node(v));
            let vals: [f64; 3] = std::array::from_fn(|k| param.uv[param.corner_node[t][k]][channel] / spacing);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min).ceil() as i64;
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max).floor() as i64;
            for level in lo..=hi {
                if let Some([a, b]) = level_crossing(pts, vals, level as f64) {
                    let (x1, y1) = view.map(a);
                    let (x2, y2) = view.map(b);
                    writeln!(out, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#).unwrap();
                }
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("<g id=\"singularities\">\n");
    for s in &param.singularities {
        let tri = mesh.triangles()[s.triangle];
        let mut d = String::new();
        for v in tri {
            let (x, y) = view.map(mesh.node(v));
            write!(d, "{x:.3},{y:.3} ").unwrap();
        }
        let color = if s.quarter_turns > 0 { "#1a9850" } else { "#c51b7d" };
        writeln!(out, r#"<polygon points="{}" fill="{color}"/>"#, d.trim_end()).unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Legacy ASCII unstructured grid with the coefficients, recovered frames
/// and, when given, per-node potentials (from the first corner seen).
pub fn vtk(mesh: &TriMesh, q: &[OdecoQ], frames: &[RecoveredFrame], param: Option<&SeamlessParam>) -> String {
    let n = mesh.num_nodes();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nframe field\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {n} double").unwrap();
    for p in mesh.nodes() {
        writeln!(out, "{:.9e} {:.9e} 0", p[0], p[1]).unwrap();
    }
    let nt = mesh.num_triangles();
    writeln!(out, "CELLS {nt} {}", 4 * nt).unwrap();
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(out, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        out.push_str("5\n");
    }
    writeln!(out, "POINT_DATA {n}").unwrap();
    for j in 0..5 {
        writeln!(out, "SCALARS q{j} double 1\nLOOKUP_TABLE default").unwrap();
        for qn in q {
            writeln!(out, "{:.9e}", qn[j]).unwrap();
        }
    }
    let scalar = |out: &mut String, name: &str, f: &dyn Fn(&RecoveredFrame) -> f64| {
        writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for r in frames {
            writeln!(out, "{:.9e}", f(r)).unwrap();
        }
    };
    scalar(&mut out, "phi", &|r| r.frame.phi);
    scalar(&mut out, "lambda", &|r| r.frame.lambda);
    scalar(&mut out, "mu", &|r| r.frame.mu);
    for (name, pick) in [("u", 0usize), ("v", 1)] {
        writeln!(out, "VECTORS {name} double").unwrap();
        for r in frames {
            let (a, b) = r.frame.vectors(0);
            let w = if pick == 0 { a } else { b };
            writeln!(out, "{:.9e} {:.9e} 0", w[0], w[1]).unwrap();
        }
    }
    if let Some(p) = param {
        let mut uv = vec![[f64::NAN; 2]; n];
        for (c, &v) in p.node_vertex.iter().enumerate() {
            if uv[v][0].is_nan() {
                uv[v] = p.uv[c];
            }
        }
        writeln!(out, "VECTORS uv double").unwrap();
        for w in uv {
            let w = if w[0].is_nan() { [0.0, 0.0] } else { w };
            writeln!(out, "{:.9e} {:.9e} 0", w[0], w[1]).unwrap();
        }
    }
    out
}
