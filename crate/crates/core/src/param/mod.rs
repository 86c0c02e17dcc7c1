//! Seamless parametrization of a frame field: period jumps, singularities,
//! cut graph and constrained least-squares integration.

mod cut;
mod integrate;

pub use cut::{
    assign_vectors, build_cut_graph, compute_matchings, detect_singularities, matching_between, triangle_index,
    BranchAssignment, CutGraph, Matching, Singularity,
};
pub use integrate::{
    integrate, integration_error, rotate_potentials, BoundarySegment, CutEdgeInfo, SeamlessParam,
};

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::mesh::{sub, TriMesh};
use crate::odeco::Frame2;

/// Full pipeline from per-node frames to potentials.
pub fn parametrize(mesh: &TriMesh, frames: &[Frame2]) -> Result<SeamlessParam, ParamError> {
    if frames.len() != mesh.num_nodes() {
        return Err(ParamError::FrameCount { frames: frames.len(), nodes: mesh.num_nodes() });
    }
    let matching = compute_matchings(mesh, frames);
    let singularities = detect_singularities(mesh, &matching);
    let cut = build_cut_graph(mesh, &singularities)?;
    let assignment = assign_vectors(mesh, &matching, &cut)?;
    integrate(mesh, frames, &singularities, &cut, &assignment)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeamlessChecks {
    /// Largest `|ΔP_right - R^k ΔP_left| / edge length` over cut edges.
    pub seam_residual: f64,
    /// Largest variance of the held potential over a boundary segment.
    pub boundary_variance: f64,
}

impl SeamlessChecks {
    pub const SEAM_TOL: f64 = 1e-8;
    pub const BOUNDARY_TOL: f64 = 1e-12;

    pub fn passed(&self) -> bool {
        self.seam_residual < Self::SEAM_TOL && self.boundary_variance < Self::BOUNDARY_TOL
    }
}

pub fn check_seamless(mesh: &TriMesh, param: &SeamlessParam) -> SeamlessChecks {
    let uv = &param.uv;
    let mut seam: f64 = 0.0;
    for c in &param.cut_edges {
        let dl = [uv[c.left[1]][0] - uv[c.left[0]][0], uv[c.left[1]][1] - uv[c.left[0]][1]];
        let dr = [uv[c.right[1]][0] - uv[c.right[0]][0], uv[c.right[1]][1] - uv[c.right[0]][1]];
        let rl = rotate_potentials(c.rotation, dl);
        let len = mesh.edge_length(c.edge);
        seam = seam.max((dr[0] - rl[0]).hypot(dr[1] - rl[1]) / len);
    }
    let mut var: f64 = 0.0;
    for s in &param.boundary_segments {
        let vals: Vec<f64> = s.nodes.iter().map(|&n| uv[n][s.potential]).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        var = var.max(vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64);
    }
    SeamlessChecks { seam_residual: seam, boundary_variance: var }
}

/// Index bookkeeping: for a boundary-aligned field the interior indices
/// plus the corner turning (in full turns) add up to the Euler
/// characteristic of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexBudget {
    pub interior: f64,
    pub corners: f64,
    pub euler: i64,
}

impl IndexBudget {
    pub fn balanced(&self) -> bool {
        (self.interior + self.corners - self.euler as f64).abs() < 1e-9
    }
}

pub fn index_budget(mesh: &TriMesh, singularities: &[Singularity]) -> IndexBudget {
    let interior = singularities.iter().map(|s| s.index()).sum();
    let mut turning = 0.0;
    for &n in mesh.corners() {
        let next = mesh.boundary_next(n).expect("corner on boundary");
        let prev = mesh.boundary_edges().iter().find(|e| e.nodes[1] == n).expect("corner on boundary").nodes[0];
        let a = sub(mesh.node(n), mesh.node(prev));
        let b = sub(mesh.node(next), mesh.node(n));
        let turn = (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        // only the part absorbed by a period jump
        turning += (turn / FRAC_PI_2).round() * FRAC_PI_2;
    }
    IndexBudget { interior, corners: turning / TAU, euler: mesh.euler_characteristic() }
}
