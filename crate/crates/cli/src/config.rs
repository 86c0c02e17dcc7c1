use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use odeco_frames::mesh::generate::{annulus, disk, rectangle, unit_square};
use odeco_frames::mesh::{load_mesh, MeshFormat};
use odeco_frames::solver::{BoundaryConstraints, LbfgsOptions, RepairOptions, ScheduleConfig};
use odeco_frames::TriMesh;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    UnitSquare { n: usize },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize },
    Disk { radius: f64, levels: usize },
    Annulus { r_in: f64, r_out: f64, n_theta: usize, n_r: usize },
}

impl Generator {
    fn build(&self) -> Result<TriMesh> {
        Ok(match *self {
            Generator::UnitSquare { n } if n > 0 => unit_square(n),
            Generator::Rectangle { x0, x1, y0, y1, nx, ny } if x1 > x0 && y1 > y0 && nx > 0 && ny > 0 => {
                rectangle(x0, x1, y0, y1, nx, ny)
            }
            Generator::Disk { radius, levels } if radius > 0.0 => disk(radius, levels),
            Generator::Annulus { r_in, r_out, n_theta, n_r } if 0.0 < r_in && r_in < r_out && n_theta >= 3 && n_r > 0 => {
                annulus(r_in, r_out, n_theta, n_r)
            }
            ref g => bail!("invalid mesh generator parameters: {g:?}"),
        })
    }
}

/// Either a file or one of the built-in generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSource {
    File {
        path: PathBuf,
        #[serde(default)]
        format: Option<MeshFormat>,
    },
    Generated {
        generate: Generator,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[serde(alias = "iso")]
    #[value(alias = "isotropic")]
    Iso,
    #[serde(alias = "aniso", alias = "anisotropic")]
    #[value(alias = "anisotropic")]
    Aniso,
}

impl Mode {
    pub fn is_iso(self) -> bool {
        self == Mode::Iso
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilon {
    Value(f64),
    Auto(Auto),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

impl std::str::FromStr for Epsilon {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Epsilon::Auto(Auto::Auto));
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 => Ok(Epsilon::Value(v)),
            _ => Err(format!("expected a positive number or \"auto\", got {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExportOptions {
    /// Frame segments per node.
    pub frames_svg: bool,
    /// Adds the polar curve of each node's polynomial to the frames SVG.
    pub glyphs: bool,
    pub isolines_svg: bool,
    pub vtk: bool,
    pub json: bool,
    /// Distance between drawn isolines, in parameter units.
    pub isoline_spacing: f64,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions { frames_svg: true, glyphs: true, isolines_svg: true, vtk: true, json: true, isoline_spacing: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub mesh: Option<MeshSource>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub constraints: BoundaryConstraints,
    #[serde(default)]
    pub epsilon: Option<Epsilon>,
    #[serde(default)]
    pub kappa: Option<Vec<f64>>,
    #[serde(default)]
    pub size_scale: Option<f64>,
    #[serde(default)]
    pub nucleation_softening: Option<f64>,
    #[serde(default)]
    pub optimizer: Option<LbfgsOptions>,
    #[serde(default)]
    pub repair: Option<RepairOptions>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub export: ExportOptions,
}

fn default_mode() -> Mode {
    Mode::Iso
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: JobConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // relative mesh paths are taken from the config's directory
        if let Some(MeshSource::File { path: p, .. }) = &mut cfg.mesh {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn mesh(&self) -> Result<TriMesh> {
        let mesh = match &self.mesh {
            None => bail!("config: no mesh given (set \"mesh\" or pass --mesh)"),
            Some(MeshSource::File { path, format }) => {
                load_mesh(path, *format).with_context(|| format!("config: loading mesh {}", path.display()))
            }
            Some(MeshSource::Generated { generate }) => generate.build().context("config"),
        }?;
        log::info!("mesh: {} nodes, {} triangles, tags {:?}", mesh.num_nodes(), mesh.num_triangles(), mesh.tags());
        Ok(mesh)
    }

    pub fn schedule(&self) -> ScheduleConfig {
        let mut s = ScheduleConfig::default();
        if let Some(k) = &self.kappa {
            s.kappa_sequence = k.clone();
        }
        s.epsilon = match self.epsilon {
            Some(Epsilon::Value(v)) => Some(v),
            _ => None,
        };
        s.size_scale = self.size_scale;
        if let Some(n) = self.nucleation_softening {
            s.nucleation_softening = n;
        }
        if let Some(o) = self.optimizer {
            s.lbfgs = o;
        }
        if let Some(r) = self.repair {
            s.repair = r;
        }
        s
    }

    /// Checks everything that can be checked before solving.
    pub fn validate(&self, mesh: &TriMesh) -> Result<()> {
        self.constraints.validate(mesh).context("config")?;
        self.schedule().validate().context("config")?;
        if !(self.export.isoline_spacing > 0.0) {
            bail!("config: isoline_spacing must be positive");
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
