use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::boundary::{init_state, resolve_boundary, BoundaryConstraints, ResolvedBoundary};
use super::lbfgs::{lbfgs_minimize, LbfgsOptions, LbfgsStatus};
use super::smooth_init;
use crate::energy::{e_total, energy_terms, EnergyParams, EnergyTerms, FieldState};
use crate::error::{OdecoError, SolverError};
use crate::mesh::TriMesh;
use crate::odeco::{area, extract_frame, project_odeco, Frame2, OdecoQ, SQRT_2PI};

/// How the κ = 1 field is made barrier-feasible before the first κ < 1 stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairOptions {
    /// Replace every free node by its odeco projection when one exists.
    pub project: bool,
    /// Nodes whose area is below `min_area_ratio · a_ref` (and, with
    /// `project`, nodes without a projection) become isotropic balls of
    /// radius `ball_scale · s`, where `s` is the nearest prescribed size.
    pub ball_scale: f64,
    pub min_area_ratio: f64,
}

impl Default for RepairOptions {
    fn default() -> Self {
        RepairOptions { project: false, ball_scale: 0.5, min_area_ratio: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    pub kappa_sequence: Vec<f64>,
    /// `None` selects the maximum edge length.
    pub epsilon: Option<f64>,
    /// `None` selects `1e-8 ·` the mean prescribed boundary area.
    pub a_min: Option<f64>,
    /// The stages optimize `q / size_scale`. This sets the balance between
    /// the scale-free integrability term and the penalty and smoothness
    /// terms, which scale with the coefficients. `None` selects
    /// `DEFAULT_SIZE_SCALE_FACTOR ·` the smallest prescribed size.
    pub size_scale: Option<f64>,
    /// The first κ < 1 stage runs on coefficients shrunk by this factor,
    /// which softens the odeco penalty enough for singularity pairs to
    /// form; later stages run at the nominal scale. 1 disables it.
    pub nucleation_softening: f64,
    pub lbfgs: LbfgsOptions,
    pub repair: RepairOptions,
}

pub const DEFAULT_SIZE_SCALE_FACTOR: f64 = 10.0;
pub const DEFAULT_NUCLEATION_SOFTENING: f64 = 0.5;

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            kappa_sequence: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 0.0],
            epsilon: None,
            a_min: None,
            size_scale: None,
            nucleation_softening: DEFAULT_NUCLEATION_SOFTENING,
            lbfgs: LbfgsOptions::default(),
            repair: RepairOptions::default(),
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let k = &self.kappa_sequence;
        if k.first() != Some(&1.0) || k.last() != Some(&0.0) {
            return Err(SolverError::InvalidSchedule("kappa sequence must start at 1 and end at 0".into()));
        }
        if k.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(SolverError::InvalidSchedule("kappa sequence must be strictly decreasing".into()));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0) {
                return Err(SolverError::InvalidSchedule(format!("epsilon must be positive, got {e}")));
            }
        }
        if let Some(a) = self.a_min {
            if !(a > 0.0) {
                return Err(SolverError::InvalidSchedule(format!("a_min must be positive, got {a}")));
            }
        }
        if let Some(s) = self.size_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(SolverError::InvalidSchedule(format!("size_scale must be positive, got {s}")));
            }
        }
        let n = self.nucleation_softening;
        if !(n > 0.0 && n <= 1.0) {
            return Err(SolverError::InvalidSchedule(format!("nucleation_softening must lie in (0, 1], got {n}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub kappa: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: LbfgsStatus,
    #[serde(flatten)]
    pub energies: EnergyTerms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub epsilon: f64,
    pub a_min: f64,
    pub size_scale: f64,
    pub stages: Vec<StageReport>,
    /// Free nodes replaced by balls during the repair step.
    pub repaired_nodes: Vec<usize>,
    pub warnings: Vec<String>,
    /// First stage that could not run, with the reason.
    pub failure: Option<(usize, String)>,
    /// Harmonic extension of the boundary frames.
    #[serde(skip)]
    pub initial: Option<FieldState>,
    /// Result of the κ = 1 stage.
    #[serde(skip)]
    pub smooth: Option<FieldState>,
    /// Result of the last completed stage.
    #[serde(skip)]
    pub state: Option<FieldState>,
    /// Wall-clock seconds per stage; kept out of the serialized report so
    /// that reports are reproducible byte for byte.
    #[serde(skip)]
    pub stage_seconds: Vec<f64>,
}

/// Minimizes `E_κ` over the free entries of `state`.
pub fn minimize_stage(
    mesh: &TriMesh,
    state: &FieldState,
    params: &EnergyParams,
    opts: &LbfgsOptions,
) -> (FieldState, super::LbfgsReport) {
    let free = state.free_indices();
    let x0 = state.gather(&free);
    let mut work = state.clone();
    let (x, report) = lbfgs_minimize(
        |x| {
            work.scatter(&free, x);
            let e = e_total(mesh, &work, params);
            (e.value, free.iter().map(|&i| e.gradient[i]).collect())
        },
        x0,
        opts,
    );
    let mut out = state.clone();
    out.scatter(&free, &x);
    (out, report)
}

fn nearest_boundary_size(mesh: &TriMesh, boundary: &ResolvedBoundary, n: usize) -> f64 {
    let p = mesh.node(n);
    boundary
        .frames
        .iter()
        .map(|f| {
            let b = mesh.node(f.node);
            ((p[0] - b[0]).hypot(p[1] - b[1]), f.size)
        })
        .fold((f64::INFINITY, 1.0), |best, c| if c.0 < best.0 { c } else { best })
        .1
}

/// Makes every free node a positive-area tensor; returns the nodes replaced
/// by isotropic balls.
pub fn repair_state(
    mesh: &TriMesh,
    state: &mut FieldState,
    boundary: &ResolvedBoundary,
    opts: &RepairOptions,
) -> Vec<usize> {
    let a_ref = boundary.mean_area();
    let mut replaced = Vec::new();
    for n in 0..state.num_nodes() {
        if state.is_node_fixed(n) {
            continue;
        }
        let q = state.node(n);
        let mut ok = area(&q) > opts.min_area_ratio * a_ref && q[0] > 0.0;
        if opts.project {
            match project_odeco(&q) {
                Ok(p) if p.lambda > 0.0 && p.mu > 0.0 && area(&p.q) > opts.min_area_ratio * a_ref => {
                    state.set_node(n, &p.q);
                    ok = true;
                }
                _ => ok = false,
            }
        }
        if !ok {
            let r = opts.ball_scale * nearest_boundary_size(mesh, boundary, n);
            state.set_node(n, &OdecoQ::new(r * SQRT_2PI, 0.0, 0.0, 0.0, 0.0));
            replaced.push(n);
        }
    }
    replaced
}

/// Boundary setup, harmonic initialization, then one L-BFGS solve per κ.
pub fn run_schedule(
    mesh: &TriMesh,
    constraints: &BoundaryConstraints,
    iso_mode: bool,
    config: &ScheduleConfig,
) -> Result<ScheduleResult, SolverError> {
    config.validate()?;
    let boundary = resolve_boundary(mesh, constraints)?;
    let epsilon = config.epsilon.unwrap_or_else(|| mesh.max_edge_length());
    let a_min = config.a_min.unwrap_or_else(|| 1e-8 * boundary.mean_area());
    let size_scale = config.size_scale.unwrap_or_else(|| DEFAULT_SIZE_SCALE_FACTOR * boundary.min_size());
    let initial = smooth_init(mesh, &init_state(mesh, &boundary, iso_mode))?;
    let mut result = ScheduleResult {
        epsilon,
        a_min,
        size_scale,
        stages: Vec::new(),
        repaired_nodes: Vec::new(),
        warnings: boundary.warnings.clone(),
        failure: None,
        initial: Some(initial.clone()),
        smooth: None,
        state: None,
        stage_seconds: Vec::new(),
    };
    let mut state = initial;
    let mut repaired = false;
    for (stage, &kappa) in config.kappa_sequence.iter().enumerate() {
        let start = Instant::now();
        let mut scale = size_scale;
        if kappa < 1.0 && !repaired {
            result.repaired_nodes = repair_state(mesh, &mut state, &boundary, &config.repair);
            repaired = true;
            scale /= config.nucleation_softening;
        }
        let params = EnergyParams::new(kappa, epsilon, a_min / (scale * scale));
        let work = state.scaled(1.0 / scale);
        if !e_total(mesh, &work, &params).is_finite() {
            let err = SolverError::InfeasibleStart { stage, kappa };
            log::error!("{err}");
            result.failure = Some((stage, err.to_string()));
            break;
        }
        let (next, report) = minimize_stage(mesh, &work, &params, &config.lbfgs);
        state = next.scaled(scale);
        let energies = energy_terms(mesh, &state);
        log::info!(
            "stage {stage} kappa={kappa:e}: {} iterations ({:?}), E_Lie={:.6e} E_D={:.6e} E_odeco={:.6e}",
            report.iterations,
            report.status,
            energies.e_lie,
            energies.e_dirichlet,
            energies.e_odeco
        );
        result.stages.push(StageReport {
            stage,
            kappa,
            iterations: report.iterations,
            evaluations: report.evaluations,
            status: report.status,
            energies,
        });
        result.stage_seconds.push(start.elapsed().as_secs_f64());
        if stage == 0 {
            result.smooth = Some(state.clone());
        }
    }
    result.state = Some(state);
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameStatus {
    Ok,
    /// No preferred direction (isotropic ball); direction taken from the
    /// quartic phase, sizes from the mean value.
    Degenerate,
    /// The contraction gave a non-positive size; sizes replaced by the mean value.
    NonPositiveSize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveredFrame {
    pub frame: Frame2,
    pub status: FrameStatus,
}

/// Per-node frames; problematic nodes get a usable stand-in and a flag.
pub fn recover_frames(state: &FieldState) -> Vec<RecoveredFrame> {
    (0..state.num_nodes())
        .map(|n| {
            let q = state.node(n);
            let mean = (q[0] / SQRT_2PI).max(1e-12);
            match extract_frame(&q) {
                Ok(frame) => RecoveredFrame { frame, status: FrameStatus::Ok },
                Err(OdecoError::NonPositiveSize { phi, .. }) => RecoveredFrame {
                    frame: Frame2::new(phi, mean, mean).expect("positive"),
                    status: FrameStatus::NonPositiveSize,
                },
                Err(_) => RecoveredFrame {
                    frame: Frame2::new(q[4].atan2(q[3]) / 4.0, mean, mean).expect("positive"),
                    status: FrameStatus::Degenerate,
                },
            }
        })
        .collect()
}
