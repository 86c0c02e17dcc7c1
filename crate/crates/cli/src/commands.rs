use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use odeco_frames::energy::EnergyParams;
use odeco_frames::mesh::generate::{disk, unit_square};
use odeco_frames::mesh::JsonMesh;
use odeco_frames::odeco::{q_from_parts, tensor_from_q, Frame2, SymTensor4};
use odeco_frames::param::{check_seamless, parametrize as integrate_field, SeamlessChecks, SeamlessParam};
use odeco_frames::pipeline::{self, geometric_mean, Comparison, PipelineError};
use odeco_frames::solver::{recover_frames, run_schedule, RecoveredFrame, ScheduleResult};
use odeco_frames::verification::{
    basis_change_oracle, convergence_csv, convergence_experiment, directional_errors, gradient_check_state,
    lie_oracle_sweep, observed_order, sensitivity_errors, EnergyKind, LieSweep,
};
use odeco_frames::{LieCoeffs, OdecoQ, TriMesh};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::config::{ExportOptions, JobConfig, MeshSource};
use crate::export;
use crate::Common;

/// Solved field with its mesh, enough to parametrize or export later.
#[derive(Serialize, Deserialize)]
pub struct FieldArtifact {
    pub mesh: JsonMesh,
    pub iso_mode: bool,
    pub q: Vec<[f64; 5]>,
    pub frames: Vec<RecoveredFrame>,
}

impl FieldArtifact {
    fn new(mesh: &TriMesh, state: &odeco_frames::energy::FieldState) -> Self {
        FieldArtifact {
            mesh: JsonMesh::from_mesh(mesh),
            iso_mode: state.iso_mode,
            q: (0..state.num_nodes()).map(|n| state.node(n).0).collect(),
            frames: recover_frames(state),
        }
    }

    fn coefficients(&self) -> Vec<OdecoQ> {
        self.q.iter().map(|q| OdecoQ(*q)).collect()
    }

    fn plain_frames(&self) -> Vec<Frame2> {
        self.frames.iter().map(|f| f.frame).collect()
    }
}

#[derive(Serialize, Deserialize)]
pub struct SingularityOut {
    pub triangle: usize,
    pub quarter_turns: i32,
    pub index: f64,
    pub position: [f64; 2],
}

#[derive(Serialize, Deserialize)]
pub struct ParamReport {
    pub integration_error: f64,
    pub checks: SeamlessChecks,
    pub singularities: Vec<SingularityOut>,
    pub cut_edges: Vec<[usize; 2]>,
    pub param: SeamlessParam,
}

impl ParamReport {
    fn new(mesh: &TriMesh, param: SeamlessParam) -> Self {
        let singularities = param
            .singularities
            .iter()
            .map(|s| {
                let tri = mesh.triangles()[s.triangle];
                let c = tri.iter().fold([0.0; 2], |a, &v| [a[0] + mesh.node(v)[0] / 3.0, a[1] + mesh.node(v)[1] / 3.0]);
                SingularityOut { triangle: s.triangle, quarter_turns: s.quarter_turns, index: s.index(), position: c }
            })
            .collect();
        ParamReport {
            integration_error: param.integration_error,
            checks: check_seamless(mesh, &param),
            singularities,
            cut_edges: param.cut_edges.iter().map(|c| c.nodes).collect(),
            param,
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct CompareCase {
    pub config: String,
    pub nodes: usize,
    pub comparison: Comparison,
}

#[derive(Serialize, Deserialize)]
pub struct CompareReport {
    pub cases: Vec<CompareCase>,
    pub geometric_mean_ratio: f64,
}

#[derive(Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckRow>,
    pub gradient_steps: Vec<f64>,
    pub gradient_errors: Vec<(EnergyKind, Vec<f64>)>,
    pub lie: LieSweep,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing report")?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Config with the command-line overrides applied.
fn job(common: &Common, path: Option<&PathBuf>) -> Result<JobConfig> {
    let mut cfg = match path {
        Some(p) => JobConfig::load(p)?,
        None => serde_json::from_str("{}").expect("empty config"),
    };
    if let Some(m) = &common.mesh {
        cfg.mesh = Some(MeshSource::File { path: m.clone(), format: None });
    }
    if let Some(o) = &common.out {
        cfg.output = Some(o.clone());
    }
    if let Some(m) = common.mode {
        cfg.mode = m;
    }
    if let Some(e) = common.epsilon {
        cfg.epsilon = Some(e);
    }
    Ok(cfg)
}

fn single_job(common: &Common) -> Result<JobConfig> {
    if common.config.len() > 1 {
        bail!("only `compare` accepts more than one --config");
    }
    job(common, common.config.first())
}

fn out_dir(cfg: &JobConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn export_field(dir: &Path, mesh: &TriMesh, field: &FieldArtifact, param: Option<&SeamlessParam>, opts: &ExportOptions) -> Result<()> {
    let q = field.coefficients();
    if opts.frames_svg {
        write_text(&dir.join("frames.svg"), &export::frames_svg(mesh, &q, &field.frames, opts.glyphs))?;
    }
    if opts.vtk {
        write_text(&dir.join("field.vtk"), &export::vtk(mesh, &q, &field.frames, param))?;
    }
    if let (Some(p), true) = (param, opts.isolines_svg) {
        write_text(&dir.join("isolines.svg"), &export::isolines_svg(mesh, p, opts.isoline_spacing))?;
    }
    Ok(())
}

pub fn solve(common: &Common) -> Result<()> {
    let cfg = single_job(common)?;
    let mesh = cfg.mesh()?;
    cfg.validate(&mesh)?;
    let dir = out_dir(&cfg)?;
    let result: ScheduleResult = run_schedule(&mesh, &cfg.constraints, cfg.mode.is_iso(), &cfg.schedule())
        .map_err(PipelineError::from)?;
    if cfg.export.json {
        write_json(&dir.join("solve_report.json"), &result)?;
    }
    if let Some((stage, msg)) = &result.failure {
        bail!(PipelineError::Stage { stage: *stage, msg: msg.clone() });
    }
    let state = result.state.as_ref().expect("schedule ran");
    let field = FieldArtifact::new(&mesh, state);
    write_json(&dir.join("field.json"), &field)?;
    export_field(&dir, &mesh, &field, None, &cfg.export)?;
    for s in &result.stages {
        println!(
            "stage {} kappa={:e}: {} iterations ({:?}), E_Lie={:.6e}",
            s.stage, s.kappa, s.iterations, s.status, s.energies.e_lie
        );
    }
    println!("wrote {}", dir.join("field.json").display());
    Ok(())
}

fn load_field(path: &Path) -> Result<(TriMesh, FieldArtifact)> {
    let field: FieldArtifact = read_json(path)?;
    let mesh = field.mesh.clone().into_mesh().with_context(|| format!("mesh in {}", path.display()))?;
    if field.q.len() != mesh.num_nodes() || field.frames.len() != mesh.num_nodes() {
        bail!("{}: field has {} nodes but the mesh has {}", path.display(), field.q.len(), mesh.num_nodes());
    }
    Ok((mesh, field))
}

pub fn parametrize(common: &Common, field: Option<PathBuf>) -> Result<()> {
    let cfg = single_job(common)?;
    let dir = out_dir(&cfg)?;
    let path = field.unwrap_or_else(|| dir.join("field.json"));
    let (mesh, field) = load_field(&path)?;
    let param = integrate_field(&mesh, &field.plain_frames())
        .map_err(|source| PipelineError::Param { field: "solved", source })?;
    let report = ParamReport::new(&mesh, param);
    write_json(&dir.join("param.json"), &report)?;
    export_field(&dir, &mesh, &field, Some(&report.param), &cfg.export)?;
    println!(
        "singularities: {}, cut edges: {}, integration error: {:.6e}",
        report.singularities.len(),
        report.cut_edges.len(),
        report.integration_error
    );
    Ok(())
}

pub fn compare(common: &Common) -> Result<()> {
    let paths: Vec<Option<&PathBuf>> =
        if common.config.is_empty() { vec![None] } else { common.config.iter().map(Some).collect() };
    let mut cases = Vec::new();
    let mut dir = None;
    for path in paths {
        let cfg = job(common, path)?;
        let mesh = cfg.mesh()?;
        cfg.validate(&mesh)?;
        let name = path.map(|p| p.display().to_string()).unwrap_or_default();
        let run = pipeline::compare(&mesh, &cfg.constraints, cfg.mode.is_iso(), &cfg.schedule())
            .with_context(|| format!("compare {name}"))?;
        let c = &run.comparison;
        println!(
            "{name}: smooth {:.6e}, integrable {:.6e}, ratio {:.3}{}",
            c.smooth.integration_error,
            c.integrable.integration_error,
            c.ratio,
            if c.both_negligible { " (both negligible)" } else { "" }
        );
        dir.get_or_insert(out_dir(&cfg)?);
        cases.push(CompareCase { config: name, nodes: mesh.num_nodes(), comparison: run.comparison });
    }
    let ratios: Vec<f64> = cases.iter().map(|c| c.comparison.ratio).collect();
    let report = CompareReport { geometric_mean_ratio: geometric_mean(&ratios), cases };
    if report.cases.len() > 1 {
        println!("geometric mean ratio: {:.3}", report.geometric_mean_ratio);
    }
    write_json(&dir.expect("at least one case").join("compare.json"), &report)?;
    Ok(())
}

fn row(name: &str, passed: bool, detail: String) -> CheckRow {
    CheckRow { name: name.to_string(), passed, detail }
}

pub fn verify(common: &Common) -> Result<()> {
    let mut checks = Vec::new();

    let basis = basis_change_oracle();
    checks.push(row(
        "basis change",
        basis.passed(1e-12),
        format!("max error {:.1e}", basis.matrix_error.max(basis.gram_error).max(basis.round_trip_error)),
    ));

    let mesh = unit_square(13);
    let state = gradient_check_state(&mesh, 1);
    let params = EnergyParams::new(0.01, mesh.max_edge_length(), 1e-8);
    let steps = vec![1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
    let mut gradient_errors = Vec::new();
    for kind in EnergyKind::ALL {
        let errs = directional_errors(&mesh, &state, kind, &params, 7, &steps);
        let best = errs.iter().cloned().fold(f64::INFINITY, f64::min);
        let sweep: Vec<String> = errs.iter().map(|e| format!("{e:.1e}")).collect();
        checks.push(row(&format!("gradient {kind:?}").to_lowercase(), best < 1e-5, format!("errors by step {}", sweep.join(" "))));
        gradient_errors.push((kind, errs));
    }

    let lie = lie_oracle_sweep(LieCoeffs::shared(), 100, 1e-5);
    checks.push(row(
        "lie oracle",
        lie.passed(),
        format!("worst relative error {:.1e} (field {}, at {:.3?})", lie.worst, lie.seed, lie.location),
    ));

    let steps_s = [4e-3, 2e-3, 1e-3, 5e-4];
    let f = Frame2::new(0.3, 2.0, 1.0).expect("valid frame");
    let t = tensor_from_q(&q_from_parts(f.phi, f.lambda, f.mu));
    let order = observed_order(&steps_s, &sensitivity_errors(&t, &SymTensor4::rank_one([0.6, 0.8]), f.u_hat(), &steps_s));
    checks.push(row("sensitivity", order >= 1.9, format!("observed order {order:.3}")));

    let meshes: Vec<_> = (2..=4).map(|l| disk(1.0, l)).collect();
    let three = convergence_experiment(0.25, &meshes)?;
    let five = convergence_experiment(-0.25, &meshes)?;
    let change = |r: &[odeco_frames::verification::ConvergenceRow]| (r[2].e_lie - r[1].e_lie).abs() / r[1].e_lie;
    let ok = change(&three) < 0.1
        && change(&five) < 0.1
        && three.iter().zip(&five).all(|(a, b)| b.e_lie > a.e_lie)
        && [&three, &five].iter().all(|r| r.windows(2).all(|w| w[1].max_h > w[0].max_h));
    checks.push(row(
        "convergence",
        ok,
        format!("E_Lie index +1/4 {:.4}, index -1/4 {:.4} on the finest disk", three[2].e_lie, five[2].e_lie),
    ));

    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        println!("{:<width$}  {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    if common.out.is_some() || !common.config.is_empty() {
        let cfg = single_job(common)?;
        let dir = out_dir(&cfg)?;
        write_text(&dir.join("convergence.csv"), &convergence_table(&three, &five))?;
        let report = VerifyReport { checks, gradient_steps: steps, gradient_errors, lie };
        write_json(&dir.join("verify.json"), &report)?;
        if report.checks.iter().any(|c| !c.passed) {
            bail!("verify: some checks failed");
        }
        return Ok(());
    }
    if checks.iter().any(|c| !c.passed) {
        bail!("verify: some checks failed");
    }
    Ok(())
}

fn convergence_table(
    three: &[odeco_frames::verification::ConvergenceRow],
    five: &[odeco_frames::verification::ConvergenceRow],
) -> String {
    let mut out = String::from("index,");
    let mut lines = convergence_csv(three).lines().map(String::from).collect::<Vec<_>>();
    out.push_str(&lines.remove(0));
    out.push('\n');
    for l in lines {
        out.push_str("0.25,");
        out.push_str(&l);
        out.push('\n');
    }
    for l in convergence_csv(five).lines().skip(1) {
        out.push_str("-0.25,");
        out.push_str(l);
        out.push('\n');
    }
    out
}

pub fn export(common: &Common, field: Option<PathBuf>, param: Option<PathBuf>) -> Result<()> {
    let cfg = single_job(common)?;
    let dir = out_dir(&cfg)?;
    let (mesh, field) = load_field(&field.unwrap_or_else(|| dir.join("field.json")))?;
    let param_path = param.or_else(|| Some(dir.join("param.json")).filter(|p| p.exists()));
    let report: Option<ParamReport> = param_path.as_deref().map(read_json).transpose()?;
    export_field(&dir, &mesh, &field, report.as_ref().map(|r| &r.param), &cfg.export)?;
    println!("exported to {}", dir.display());
    Ok(())
}
