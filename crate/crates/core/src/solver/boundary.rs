use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::energy::FieldState;
use crate::error::SolverError;
use crate::mesh::{sub, unit, BoundaryCurve, TriMesh};
use crate::odeco::q_from_parts;

/// Size prescribed along a tagged boundary curve.
///
/// JSON forms: `1.5`, `{"start": 1, "end": 2}` (linear in arclength along
/// the curve, domain on the left), or `"blend"` (linear between the sizes
/// of the neighbouring curves at the shared corners).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SizeSpecRepr", into = "SizeSpecRepr")]
pub enum SizeSpec {
    Constant(f64),
    Linear { start: f64, end: f64 },
    Blend,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SizeSpecRepr {
    Constant(f64),
    Linear { start: f64, end: f64 },
    Keyword(Keyword),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Keyword {
    Blend,
}

impl From<SizeSpecRepr> for SizeSpec {
    fn from(r: SizeSpecRepr) -> Self {
        match r {
            SizeSpecRepr::Constant(v) => SizeSpec::Constant(v),
            SizeSpecRepr::Linear { start, end } => SizeSpec::Linear { start, end },
            SizeSpecRepr::Keyword(Keyword::Blend) => SizeSpec::Blend,
        }
    }
}

impl From<SizeSpec> for SizeSpecRepr {
    fn from(s: SizeSpec) -> Self {
        match s {
            SizeSpec::Constant(v) => SizeSpecRepr::Constant(v),
            SizeSpec::Linear { start, end } => SizeSpecRepr::Linear { start, end },
            SizeSpec::Blend => SizeSpecRepr::Keyword(Keyword::Blend),
        }
    }
}

impl SizeSpec {
    fn endpoints(&self) -> Option<(f64, f64)> {
        match *self {
            SizeSpec::Constant(v) => Some((v, v)),
            SizeSpec::Linear { start, end } => Some((start, end)),
            SizeSpec::Blend => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeOverride {
    pub node: usize,
    pub size: f64,
}

/// Per-tag sizes; frames are always aligned with the boundary tangent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConstraints {
    pub sizes: BTreeMap<String, SizeSpec>,
    #[serde(default)]
    pub overrides: Vec<NodeOverride>,
}

impl BoundaryConstraints {
    pub fn uniform(mesh: &TriMesh, size: f64) -> Self {
        BoundaryConstraints {
            sizes: mesh.tags().into_iter().map(|t| (t, SizeSpec::Constant(size))).collect(),
            overrides: Vec::new(),
        }
    }

    pub fn with(mut self, tag: &str, spec: SizeSpec) -> Self {
        self.sizes.insert(tag.to_string(), spec);
        self
    }

    pub fn validate(&self, mesh: &TriMesh) -> Result<(), SolverError> {
        let tags = mesh.tags();
        for tag in self.sizes.keys() {
            if !tags.contains(tag) {
                return Err(SolverError::UnknownTag(tag.clone()));
            }
        }
        for tag in &tags {
            match self.sizes.get(tag) {
                None => return Err(SolverError::UnconstrainedCurve(tag.clone())),
                Some(spec) => {
                    if let Some((a, b)) = spec.endpoints() {
                        for v in [a, b] {
                            if !(v > 0.0 && v.is_finite()) {
                                return Err(SolverError::InvalidSize { tag: tag.clone(), size: v });
                            }
                        }
                    }
                }
            }
        }
        for o in &self.overrides {
            if o.node >= mesh.num_nodes() || !mesh.is_boundary_node(o.node) {
                return Err(SolverError::OverrideNotOnBoundary(o.node));
            }
            if !(o.size > 0.0 && o.size.is_finite()) {
                return Err(SolverError::InvalidSize { tag: format!("node {}", o.node), size: o.size });
            }
        }
        Ok(())
    }
}

/// Frame prescribed at one boundary node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFrame {
    pub node: usize,
    /// Tangent angle.
    pub phi: f64,
    pub size: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedBoundary {
    /// Sorted by node.
    pub frames: Vec<BoundaryFrame>,
    pub warnings: Vec<String>,
}

impl ResolvedBoundary {
    pub fn min_size(&self) -> f64 {
        self.frames.iter().map(|f| f.size).fold(f64::INFINITY, f64::min)
    }

    /// Mean of `size²` over the boundary nodes.
    pub fn mean_area(&self) -> f64 {
        self.frames.iter().map(|f| f.size * f.size).sum::<f64>() / self.frames.len().max(1) as f64
    }
}

fn curve_lengths(mesh: &TriMesh, c: &BoundaryCurve) -> Vec<f64> {
    let mut acc = vec![0.0];
    for w in c.nodes.windows(2) {
        let d = sub(mesh.node(w[1]), mesh.node(w[0]));
        acc.push(acc.last().unwrap() + d[0].hypot(d[1]));
    }
    acc
}

/// Tangent angle and size at every boundary node. A corner takes the
/// values of the curve leaving it.
pub fn resolve_boundary(mesh: &TriMesh, constraints: &BoundaryConstraints) -> Result<ResolvedBoundary, SolverError> {
    constraints.validate(mesh)?;
    let curves = mesh.curves();
    let mut size = vec![None; mesh.num_nodes()];
    let mut warnings = Vec::new();
    for c in curves {
        let spec = constraints.sizes[&c.tag];
        let (start, end) = match spec.endpoints() {
            Some(e) => e,
            None => {
                if c.closed {
                    return Err(SolverError::BlendNeighbor(c.tag.clone()));
                }
                let prev = curves.iter().find(|o| !o.closed && o.nodes.last() == c.nodes.first());
                let next = curves.iter().find(|o| !o.closed && o.nodes.first() == c.nodes.last());
                let at = |o: Option<&BoundaryCurve>, first: bool| {
                    o.and_then(|o| constraints.sizes[&o.tag].endpoints())
                        .map(|(a, b)| if first { a } else { b })
                };
                match (at(prev, false), at(next, true)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(SolverError::BlendNeighbor(c.tag.clone())),
                }
            }
        };
        let s = curve_lengths(mesh, c);
        let total = *s.last().unwrap();
        let count = if c.closed { c.nodes.len() } else { c.nodes.len() - 1 };
        for k in 0..count {
            let t = if total > 0.0 { s[k] / total } else { 0.0 };
            size[c.nodes[k]] = Some(start + (end - start) * t);
        }
    }
    for o in &constraints.overrides {
        size[o.node] = Some(o.size);
    }
    let corners = mesh.corners();
    let mut frames = Vec::new();
    for (n, s) in size.iter().enumerate() {
        let Some(s) = *s else { continue };
        let tangent = if corners.binary_search(&n).is_ok() {
            let next = mesh.boundary_next(n).expect("boundary node");
            let out = unit(sub(mesh.node(next), mesh.node(n)));
            let prev = mesh.boundary_edges().iter().find(|e| e.nodes[1] == n).expect("boundary node").nodes[0];
            let inc = unit(sub(mesh.node(n), mesh.node(prev)));
            let turn = (inc[0] * out[1] - inc[1] * out[0]).atan2(inc[0] * out[0] + inc[1] * out[1]);
            let off = turn - (turn / FRAC_PI_2).round() * FRAC_PI_2;
            if off.abs() > 1e-6 {
                warnings.push(format!(
                    "corner at node {n} turns by {:.2} deg, not a multiple of 90; using the outgoing tangent",
                    turn.to_degrees()
                ));
            }
            out
        } else {
            mesh.boundary_tangent(n).expect("boundary node")
        };
        frames.push(BoundaryFrame { node: n, phi: tangent[1].atan2(tangent[0]), size: s });
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(ResolvedBoundary { frames, warnings })
}

/// Boundary nodes fixed to their prescribed frames, interior nodes zero.
pub fn init_state(mesh: &TriMesh, boundary: &ResolvedBoundary, iso_mode: bool) -> FieldState {
    let mut state = FieldState::zeros(mesh.num_nodes(), iso_mode);
    for f in &boundary.frames {
        state.fix_node(f.node, &q_from_parts(f.phi, f.size, f.size));
    }
    state
}
