//! Solve and parametrize in one call, and the smooth-versus-integrable
//! comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::FieldState;
use crate::error::{ParamError, SolverError};
use crate::mesh::TriMesh;
use crate::odeco::Frame2;
use crate::param::{check_seamless, parametrize, SeamlessChecks, SeamlessParam};
use crate::solver::{recover_frames, run_schedule, BoundaryConstraints, ScheduleConfig, ScheduleResult};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("solve: {0}")]
    Solve(#[from] SolverError),
    #[error("solve: stage {stage} failed: {msg}")]
    Stage { stage: usize, msg: String },
    #[error("parametrize ({field} field): {source}")]
    Param {
        field: &'static str,
        #[source]
        source: ParamError,
    },
}

/// Errors below this are treated as zero when forming ratios.
pub const NEGLIGIBLE_ERROR: f64 = 1e-12;

pub fn frames_of(state: &FieldState) -> Vec<Frame2> {
    recover_frames(state).into_iter().map(|r| r.frame).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub integration_error: f64,
    pub singularities: usize,
    pub cut_edges: usize,
    pub checks: SeamlessChecks,
}

impl ParamSummary {
    pub fn of(mesh: &TriMesh, p: &SeamlessParam) -> Self {
        ParamSummary {
            integration_error: p.integration_error,
            singularities: p.singularities.len(),
            cut_edges: p.cut_edges.len(),
            checks: check_seamless(mesh, p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub smooth: ParamSummary,
    pub integrable: ParamSummary,
    /// `smooth / integrable`, or 1 when both errors are negligible.
    pub ratio: f64,
    pub both_negligible: bool,
}

impl Comparison {
    pub fn new(smooth: ParamSummary, integrable: ParamSummary) -> Self {
        let (a, b) = (smooth.integration_error, integrable.integration_error);
        let both_negligible = a < NEGLIGIBLE_ERROR && b < NEGLIGIBLE_ERROR;
        let ratio = if both_negligible { 1.0 } else { a / b.max(NEGLIGIBLE_ERROR) };
        Comparison { smooth, integrable, ratio, both_negligible }
    }
}

/// Everything produced by one comparison run.
#[derive(Clone, Debug)]
pub struct CompareRun {
    pub schedule: ScheduleResult,
    pub smooth_param: SeamlessParam,
    pub integrable_param: SeamlessParam,
    pub comparison: Comparison,
}

/// Runs the schedule and fails if any stage did.
pub fn solve(
    mesh: &TriMesh,
    constraints: &BoundaryConstraints,
    iso_mode: bool,
    config: &ScheduleConfig,
) -> Result<ScheduleResult, PipelineError> {
    let r = run_schedule(mesh, constraints, iso_mode, config)?;
    if let Some((stage, msg)) = &r.failure {
        return Err(PipelineError::Stage { stage: *stage, msg: msg.clone() });
    }
    Ok(r)
}

/// Parametrizes the κ = 1 field and the final field of one schedule run.
pub fn compare(
    mesh: &TriMesh,
    constraints: &BoundaryConstraints,
    iso_mode: bool,
    config: &ScheduleConfig,
) -> Result<CompareRun, PipelineError> {
    let schedule = solve(mesh, constraints, iso_mode, config)?;
    let smooth_state = schedule.smooth.as_ref().expect("first stage ran");
    let final_state = schedule.state.as_ref().expect("schedule ran");
    let smooth_param = parametrize(mesh, &frames_of(smooth_state))
        .map_err(|source| PipelineError::Param { field: "smooth", source })?;
    let integrable_param = parametrize(mesh, &frames_of(final_state))
        .map_err(|source| PipelineError::Param { field: "integrable", source })?;
    let comparison =
        Comparison::new(ParamSummary::of(mesh, &smooth_param), ParamSummary::of(mesh, &integrable_param));
    Ok(CompareRun { schedule, smooth_param, integrable_param, comparison })
}

/// Geometric mean of comparison ratios.
pub fn geometric_mean(ratios: &[f64]) -> f64 {
    if ratios.is_empty() {
        return f64::NAN;
    }
    (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
}
