//! Boundary setup, initialization, the κ schedule and the quasi-Newton
//! minimizer.

mod boundary;
mod lbfgs;
mod schedule;

pub use boundary::{
    init_state, resolve_boundary, BoundaryConstraints, BoundaryFrame, NodeOverride, ResolvedBoundary, SizeSpec,
};
pub use lbfgs::{lbfgs_minimize, LbfgsOptions, LbfgsReport, LbfgsStatus};
pub use schedule::{
    minimize_stage, recover_frames, repair_state, run_schedule, FrameStatus, RecoveredFrame, RepairOptions,
    ScheduleConfig, ScheduleResult, StageReport,
};

use crate::energy::FieldState;
use crate::error::SolverError;
use crate::linalg::SpdSolver;
use crate::mesh::{StiffnessMatrix, TriMesh};

/// Harmonic extension of the fixed nodes: minimizes the Dirichlet energy
/// channel by channel with the fixed values as Dirichlet data.
pub fn smooth_init(mesh: &TriMesh, state: &FieldState) -> Result<FieldState, SolverError> {
    let n = mesh.num_nodes();
    let mut local = vec![usize::MAX; n];
    let mut free = Vec::new();
    for v in 0..n {
        if !state.is_node_fixed(v) {
            local[v] = free.len();
            free.push(v);
        }
    }
    let mut out = state.clone();
    if free.is_empty() {
        return Ok(out);
    }
    let k = StiffnessMatrix::assemble(mesh);
    let mut trip = Vec::new();
    for (i, &v) in free.iter().enumerate() {
        for (c, val) in k.row(v) {
            if local[c] != usize::MAX {
                trip.push((i, local[c], val));
            }
        }
    }
    let solver = SpdSolver::new(free.len(), &trip).map_err(|msg| SolverError::LinearSolve { channel: 0, msg })?;
    for ch in 0..5 {
        if state.iso_mode && matches!(ch, 1 | 2) {
            continue;
        }
        let rhs: Vec<f64> = free
            .iter()
            .map(|&v| -k.row(v).filter(|(c, _)| local[*c] == usize::MAX).map(|(c, val)| val * state.q[5 * c + ch]).sum::<f64>())
            .collect();
        let x = solver.solve(&rhs);
        for (i, &v) in free.iter().enumerate() {
            out.q[5 * v + ch] = x[i];
        }
    }
    Ok(out)
}
