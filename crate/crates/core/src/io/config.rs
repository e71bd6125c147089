//! Run configuration.
//!
//! TOML with the sections `geometry`, `material`, `crack`, `mesh`,
//! `analysis`, `solver` and `output`, plus the top-level keys `technique`,
//! `bc` and `preset`. A preset fills in every field the file leaves out.
//!
//! ```toml
//! preset = "table1"
//! technique = "spring_set"
//!
//! [crack]
//! a_over_h = 0.7
//!
//! [analysis]
//! kind = "buckle"
//! n_range = [1, 15]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::AnalysisOptions;
use crate::assembly::BoundaryCondition;
use crate::crack_spring::{FractureCondition, LineSpringModel, ShapeFactorForm};
use crate::eigen::DEFAULT_RESIDUAL_TOL;
use crate::enrichment::{ConversionMethod, DEFAULT_PENALTY_ALPHA};
use crate::error::{Error, Result};
use crate::model::{
    build_mesh_from_lengths, CrackSpec, Material, Mesh, ShellGeometry, ShellModel, Technique,
};
use crate::presets;
use crate::quadrature::GaussRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    Buckle,
    Vibrate,
    Sweep,
    Converge,
    Modeshape,
}

impl AnalysisKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::Buckle => "buckle",
            AnalysisKind::Vibrate => "vibrate",
            AnalysisKind::Sweep => "sweep",
            AnalysisKind::Converge => "converge",
            AnalysisKind::Modeshape => "modeshape",
        }
    }
}

/// Parameter varied by a `sweep` run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Crack depth ratio `a/h`.
    Depth,
    /// Relative crack position `x_c/L`.
    Position,
    /// Cylinder length `L` \[m\].
    Length,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_elements: Option<usize>,
    /// Explicit shell element lengths \[m\]; overrides `n_elements`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    pub kind: AnalysisKind,
    /// Inclusive circumferential mode range.
    pub n_range: [u32; 2],
    /// Frequencies per mode number (`vibrate`).
    pub modes_per_n: usize,
    /// Element counts (`converge`).
    pub counts: Vec<usize>,
    pub sweep: SweepParameter,
    /// Values of the swept parameter (`sweep`).
    pub grid: Vec<f64>,
    /// Mode number exported by `modeshape`; the critical one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<u32>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec {
            kind: AnalysisKind::Buckle,
            n_range: [1, 15],
            modes_per_n: 4,
            counts: vec![5, 11, 21, 41],
            sweep: SweepParameter::Depth,
            grid: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            mode: None,
        }
    }
}

impl AnalysisSpec {
    pub fn modes(&self) -> std::ops::RangeInclusive<u32> {
        self.n_range[0]..=self.n_range[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub residual_tol: f64,
    pub quadrature_tol: f64,
    pub penalty_alpha: f64,
    pub gauss_points: usize,
    pub shape_factor: ShapeFactorForm,
    pub fracture: FractureCondition,
    pub conversion: ConversionMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let ls = LineSpringModel::default();
        SolverSpec {
            residual_tol: DEFAULT_RESIDUAL_TOL,
            quadrature_tol: ls.rel_tol,
            penalty_alpha: DEFAULT_PENALTY_ALPHA,
            gauss_points: GaussRule::default().order(),
            shape_factor: ls.shape_factor,
            fracture: ls.condition,
            conversion: ConversionMethod::default(),
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Total axial sample points of a mode-shape export.
    pub grid_nx: usize,
    pub grid_ntheta: usize,
    /// Displacement magnification of a mode-shape export.
    pub scale: f64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            grid_nx: 0,
            grid_ntheta: 72,
            scale: 10.0,
        }
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub technique: Technique,
    pub bc: BoundaryCondition,
    pub geometry: ShellGeometry,
    pub material: Material,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crack: Option<CrackSpec>,
    pub mesh: MeshSpec,
    pub analysis: AnalysisSpec,
    pub solver: SolverSpec,
    pub output: OutputSpec,
}

// Input schema: everything optional, unknown keys rejected.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    preset: Option<String>,
    technique: Option<Technique>,
    bc: Option<BoundaryCondition>,
    geometry: Option<PartialGeometry>,
    material: Option<PartialMaterial>,
    crack: Option<PartialCrack>,
    mesh: Option<MeshSpec>,
    analysis: Option<PartialAnalysis>,
    solver: Option<PartialSolver>,
    output: Option<PartialOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialGeometry {
    #[serde(rename = "R")]
    radius: Option<f64>,
    h: Option<f64>,
    #[serde(rename = "L")]
    length: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialMaterial {
    #[serde(rename = "E")]
    youngs_modulus: Option<f64>,
    nu: Option<f64>,
    rho: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialCrack {
    a: Option<f64>,
    x_c: Option<f64>,
    a_over_h: Option<f64>,
    #[serde(rename = "x_c_over_L")]
    x_c_over_l: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialAnalysis {
    kind: Option<AnalysisKind>,
    n_range: Option<[u32; 2]>,
    modes_per_n: Option<usize>,
    counts: Option<Vec<usize>>,
    sweep: Option<SweepParameter>,
    grid: Option<Vec<f64>>,
    mode: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialSolver {
    residual_tol: Option<f64>,
    quadrature_tol: Option<f64>,
    penalty_alpha: Option<f64>,
    gauss_points: Option<usize>,
    shape_factor: Option<ShapeFactorForm>,
    fracture: Option<FractureCondition>,
    conversion: Option<ConversionMethod>,
    jobs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialOutput {
    dir: Option<PathBuf>,
    grid_nx: Option<usize>,
    grid_ntheta: Option<usize>,
    scale: Option<f64>,
}

fn required(value: Option<f64>, field: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Config(format!("missing `{field}` (no preset supplies it)")))
}

impl RunConfig {
    /// Defaults of a named preset.
    pub fn from_preset(name: &str) -> Result<RunConfig> {
        let case = presets::by_name(name)?;
        let r = case.n_range;
        let kind = if name == "table5" {
            AnalysisKind::Vibrate
        } else {
            AnalysisKind::Buckle
        };
        Ok(RunConfig {
            technique: Technique::Conversion,
            bc: BoundaryCondition::SimplySupported,
            geometry: case.model.geometry,
            material: case.model.material,
            crack: case.model.crack,
            mesh: MeshSpec {
                n_elements: Some(case.n_elements),
                lengths: None,
            },
            analysis: AnalysisSpec {
                kind,
                n_range: [*r.start(), *r.end()],
                ..AnalysisSpec::default()
            },
            solver: SolverSpec::default(),
            output: OutputSpec::default(),
        })
    }

    /// Parses TOML text. `preset` overrides the file's `preset` key.
    pub fn from_toml_str(text: &str, preset: Option<&str>) -> Result<RunConfig> {
        let partial: PartialConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::resolve(partial, preset)
    }

    /// Configuration from a preset alone.
    pub fn preset_only(name: &str) -> Result<RunConfig> {
        Self::resolve(PartialConfig::default(), Some(name))
    }

    fn resolve(p: PartialConfig, preset_override: Option<&str>) -> Result<RunConfig> {
        let preset = preset_override.map(str::to_owned).or(p.preset);
        let base = match &preset {
            Some(name) => Some(RunConfig::from_preset(name)?),
            None => None,
        };

        let g = p.geometry.unwrap_or_default();
        let bg = base.as_ref().map(|b| b.geometry);
        let geometry = ShellGeometry {
            radius: required(g.radius.or(bg.map(|b| b.radius)), "geometry.R")?,
            thickness: required(g.h.or(bg.map(|b| b.thickness)), "geometry.h")?,
            length: required(g.length.or(bg.map(|b| b.length)), "geometry.L")?,
        };
        geometry.validate()?;

        let m = p.material.unwrap_or_default();
        let bm = base.as_ref().map_or_else(Material::steel, |b| b.material);
        let material = Material {
            youngs_modulus: m.youngs_modulus.unwrap_or(bm.youngs_modulus),
            poisson_ratio: m.nu.unwrap_or(bm.poisson_ratio),
            density: m.rho.unwrap_or(bm.density),
        };
        material.validate()?;

        let base_crack = base.as_ref().and_then(|b| b.crack);
        let crack = match p.crack {
            None => base_crack.map(|c| {
                // keep the preset's ratios when the geometry was overridden
                let bg = bg.expect("preset crack implies preset geometry");
                CrackSpec {
                    a: c.a / bg.thickness * geometry.thickness,
                    x_c: c.x_c / bg.length * geometry.length,
                }
            }),
            Some(c) => {
                if c.a.is_some() && c.a_over_h.is_some() {
                    return Err(Error::Config(
                        "give either crack.a or crack.a_over_h, not both".into(),
                    ));
                }
                if c.x_c.is_some() && c.x_c_over_l.is_some() {
                    return Err(Error::Config(
                        "give either crack.x_c or crack.x_c_over_L, not both".into(),
                    ));
                }
                let a = c
                    .a
                    .or(c.a_over_h.map(|r| r * geometry.thickness))
                    .or(base_crack.map(|b| b.a))
                    .ok_or_else(|| Error::Config("crack block needs `a` or `a_over_h`".into()))?;
                let x_c = c
                    .x_c
                    .or(c.x_c_over_l.map(|r| r * geometry.length))
                    .or(base_crack
                        .map(|b| b.x_c / bg.expect("preset geometry").length * geometry.length))
                    .unwrap_or(0.5 * geometry.length);
                Some(CrackSpec { a, x_c })
            }
        };
        if let Some(c) = &crack {
            c.validate(&geometry)?;
        }

        let mesh = p
            .mesh
            .or(base.as_ref().map(|b| b.mesh.clone()))
            .unwrap_or(MeshSpec {
                n_elements: Some(21),
                lengths: None,
            });

        let ba = base
            .as_ref()
            .map(|b| b.analysis.clone())
            .unwrap_or_default();
        let a = p.analysis.unwrap_or_default();
        let analysis = AnalysisSpec {
            kind: a.kind.unwrap_or(ba.kind),
            n_range: a.n_range.unwrap_or(ba.n_range),
            modes_per_n: a.modes_per_n.unwrap_or(ba.modes_per_n),
            counts: a.counts.unwrap_or(ba.counts),
            sweep: a.sweep.unwrap_or(ba.sweep),
            grid: a.grid.unwrap_or(ba.grid),
            mode: a.mode.or(ba.mode),
        };

        let bs = base.as_ref().map(|b| b.solver).unwrap_or_default();
        let s = p.solver.unwrap_or_default();
        let solver = SolverSpec {
            residual_tol: s.residual_tol.unwrap_or(bs.residual_tol),
            quadrature_tol: s.quadrature_tol.unwrap_or(bs.quadrature_tol),
            penalty_alpha: s.penalty_alpha.unwrap_or(bs.penalty_alpha),
            gauss_points: s.gauss_points.unwrap_or(bs.gauss_points),
            shape_factor: s.shape_factor.unwrap_or(bs.shape_factor),
            fracture: s.fracture.unwrap_or(bs.fracture),
            conversion: s.conversion.unwrap_or(bs.conversion),
            jobs: s.jobs.or(bs.jobs),
        };

        let bo = base.as_ref().map(|b| b.output.clone()).unwrap_or_default();
        let o = p.output.unwrap_or_default();
        let output = OutputSpec {
            dir: o.dir.unwrap_or(bo.dir),
            grid_nx: o.grid_nx.unwrap_or(bo.grid_nx),
            grid_ntheta: o.grid_ntheta.unwrap_or(bo.grid_ntheta),
            scale: o.scale.unwrap_or(bo.scale),
        };

        let cfg = RunConfig {
            technique: p
                .technique
                .or(base.as_ref().map(|b| b.technique))
                .unwrap_or(Technique::Conversion),
            bc: p.bc.unwrap_or(BoundaryCondition::SimplySupported),
            geometry,
            material,
            crack,
            mesh,
            analysis,
            solver,
            output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field; physical invariants come from the model types.
    pub fn validate(&self) -> Result<()> {
        self.model()?;
        match (&self.mesh.n_elements, &self.mesh.lengths) {
            (_, Some(l)) if l.is_empty() => {
                return Err(Error::Config("mesh.lengths is empty".into()))
            }
            (None, None) => {
                return Err(Error::Config("mesh needs `n_elements` or `lengths`".into()))
            }
            (Some(0), None) => return Err(Error::invalid("mesh.n_elements", "must be positive")),
            _ => {}
        }
        let [lo, hi] = self.analysis.n_range;
        if lo > hi {
            return Err(Error::invalid(
                "analysis.n_range",
                format!("empty range {lo}..{hi}"),
            ));
        }
        if self.analysis.modes_per_n == 0 {
            return Err(Error::invalid("analysis.modes_per_n", "must be positive"));
        }
        if self.analysis.kind == AnalysisKind::Converge
            && (self.analysis.counts.is_empty()
                || self.analysis.counts.windows(2).any(|w| w[0] >= w[1]))
        {
            return Err(Error::invalid(
                "analysis.counts",
                "need strictly ascending element counts",
            ));
        }
        if self.analysis.kind == AnalysisKind::Sweep && self.analysis.grid.is_empty() {
            return Err(Error::invalid("analysis.grid", "sweep grid is empty"));
        }
        GaussRule::from_order(self.solver.gauss_points)?;
        self.options().validate()?;
        if !(self.output.scale >= 0.0 && self.output.scale.is_finite()) {
            return Err(Error::invalid(
                "output.scale",
                "must be finite and non-negative",
            ));
        }
        if self.output.grid_ntheta < 2 {
            return Err(Error::invalid(
                "output.grid_ntheta",
                "need at least 2 angles",
            ));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ShellModel> {
        ShellModel::new(self.geometry, self.material, self.crack)
    }

    pub fn options(&self) -> AnalysisOptions {
        AnalysisOptions {
            bc: self.bc,
            line_spring: LineSpringModel {
                shape_factor: self.solver.shape_factor,
                condition: self.solver.fracture,
                rel_tol: self.solver.quadrature_tol,
            },
            gauss: GaussRule::from_order(self.solver.gauss_points).unwrap_or_default(),
            penalty_alpha: self.solver.penalty_alpha,
            conversion: self.solver.conversion,
            residual_tol: self.solver.residual_tol,
            jobs: self.solver.jobs,
        }
    }

    pub fn n_elements(&self) -> usize {
        match &self.mesh.lengths {
            Some(l) => l.len(),
            None => self.mesh.n_elements.unwrap_or(21),
        }
    }

    /// Mesh for `model` per the mesh block.
    pub fn mesh_for(&self, model: &ShellModel) -> Result<Mesh> {
        match &self.mesh.lengths {
            Some(lengths) => build_mesh_from_lengths(
                &model.geometry,
                model.crack.as_ref(),
                lengths,
                self.technique,
            ),
            None => crate::analysis::mesh_for(model, self.n_elements(), self.technique),
        }
    }

    /// Canonical TOML of the resolved configuration.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML, hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path, preset: Option<&str>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_toml_str(&text, preset).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
