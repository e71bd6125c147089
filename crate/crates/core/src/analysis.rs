//! Drivers: buckling sweeps over the circumferential mode number, crack depth,
//! crack position and length; natural frequencies; mesh convergence.
//!
//! Loads are normalized as `N_cr / (D m)` with `N_cr = lambda |N_x0|` for the
//! unit reference prestress `N_x0 = -1 N/m`, so an intact long shell gives 2.

use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{
    apply_boundary_conditions, assemble, AssemblyOptions, BoundaryCondition, ReducedSystem,
};
use crate::crack_spring::{rotational_stiffness, LineSpringModel, SpringStiffness};
use crate::eigen::{
    min_buckling_factor_with, min_vibration_frequencies_with, EigenOptions, DEFAULT_RESIDUAL_TOL,
};
use crate::element::Prestress;
use crate::enrichment::{ConversionMethod, DEFAULT_PENALTY_ALPHA};
use crate::error::{Error, Result};
use crate::model::{build_mesh, CrackSpec, Mesh, ShellModel, Technique};
use crate::quadrature::GaussRule;

/// Reference axial membrane resultant \[N/m\].
pub const REFERENCE_PRESTRESS: f64 = -1.0;

/// Relative load change between successive lengths treated as converged.
pub const ASYMPTOTE_TOL: f64 = 5e-3;

/// Kinetic-energy fraction above which a vibration mode counts as flexural.
pub const FLEXURAL_W_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub bc: BoundaryCondition,
    pub line_spring: LineSpringModel,
    pub gauss: GaussRule,
    pub penalty_alpha: f64,
    pub conversion: ConversionMethod,
    pub residual_tol: f64,
    /// Worker threads for per-mode jobs; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            bc: BoundaryCondition::SimplySupported,
            line_spring: LineSpringModel::default(),
            gauss: GaussRule::default(),
            penalty_alpha: DEFAULT_PENALTY_ALPHA,
            conversion: ConversionMethod::default(),
            residual_tol: DEFAULT_RESIDUAL_TOL,
            jobs: None,
        }
    }
}

impl AnalysisOptions {
    pub fn assembly(&self) -> AssemblyOptions {
        AssemblyOptions {
            gauss: self.gauss,
            penalty_alpha: self.penalty_alpha,
            conversion: self.conversion,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.penalty_alpha > 0.0 && self.penalty_alpha.is_finite()) {
            return Err(Error::invalid(
                "solver.penalty_alpha",
                "must be positive and finite",
            ));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::invalid("solver.residual_tol", "must be positive"));
        }
        if !(self.line_spring.rel_tol > 0.0 && self.line_spring.rel_tol < 1.0) {
            return Err(Error::invalid(
                "solver.quadrature_tol",
                "must lie in (0, 1)",
            ));
        }
        if self.jobs == Some(0) {
            return Err(Error::invalid("jobs", "must be at least 1"));
        }
        Ok(())
    }
}

/// Runs `f` over `items` on the configured pool, keeping input order.
fn par_map<T: Sync, R: Send>(
    items: &[T],
    jobs: Option<usize>,
    f: impl Fn(&T) -> R + Sync + Send,
) -> Vec<R> {
    match jobs {
        Some(1) => items.iter().map(f).collect(),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(e) => {
                log::warn!("could not build a {k}-thread pool ({e}); running serially");
                items.iter().map(f).collect()
            }
        },
        None => items.par_iter().map(f).collect(),
    }
}

/// Rotational stiffness of the model's crack (`Intact` when uncracked).
pub fn crack_stiffness(model: &ShellModel, opts: &AnalysisOptions) -> Result<SpringStiffness> {
    match &model.crack {
        Some(c) if !c.is_intact() => {
            rotational_stiffness(c, &model.geometry, &model.material, &opts.line_spring)
        }
        _ => Ok(SpringStiffness::Intact),
    }
}

/// Uniform mesh with the crack (if any) embedded per `technique`.
pub fn mesh_for(model: &ShellModel, n_elements: usize, technique: Technique) -> Result<Mesh> {
    match &model.crack {
        Some(c) => build_mesh(&model.geometry, c, n_elements, technique),
        None => {
            if n_elements < 1 {
                return Err(Error::MeshTooCoarse {
                    n_elements,
                    reason: "need at least one element".into(),
                });
            }
            let mut mesh = Mesh::uniform(model.geometry.length, n_elements)?;
            mesh.technique = technique;
            Ok(mesh)
        }
    }
}

fn normalization(model: &ShellModel) -> f64 {
    let d = model.derived();
    d.flexural_rigidity * d.shell_parameter
}

fn reduced_system(
    model: &ShellModel,
    mesh: &Mesh,
    n: u32,
    prestress: &Prestress,
    spring: &SpringStiffness,
    opts: &AnalysisOptions,
) -> Result<ReducedSystem> {
    let system = assemble(model, mesh, n, prestress, spring, &opts.assembly())?;
    Ok(apply_boundary_conditions(&system, opts.bc))
}

/// Buckling result of one circumferential mode.
#[derive(Debug, Clone, PartialEq)]
pub struct BucklingRow {
    pub n: u32,
    /// Load factor on the reference prestress.
    pub lambda: f64,
    /// Critical axial resultant `lambda |N_x0|` \[N/m\].
    pub critical_resultant: f64,
    /// `N_cr / (D m)`.
    pub normalized_load: f64,
    /// `x^T K x / 2` of the mode scaled to unit max `|w|` \[J\].
    pub strain_energy: f64,
    pub residual: f64,
    /// Mode over all global DOFs (zeros on constrained DOFs).
    pub mode: DVector<f64>,
}

#[derive(Debug)]
pub struct ModeFailure {
    pub n: u32,
    pub error: Error,
}

#[derive(Debug)]
pub struct BucklingSweepResult {
    pub technique: Technique,
    /// Successful modes in input order.
    pub rows: Vec<BucklingRow>,
    pub failures: Vec<ModeFailure>,
}

impl BucklingSweepResult {
    /// Row with the lowest normalized load; the lowest `n` wins ties.
    pub fn minimum(&self) -> Option<&BucklingRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&BucklingRow>, r| match best {
                Some(b) if b.normalized_load <= r.normalized_load => Some(b),
                _ => Some(r),
            })
    }

    pub fn for_mode(&self, n: u32) -> Option<&BucklingRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// Load for a selection, failing when the selected mode is missing.
    pub fn select(&self, selection: ModeSelection) -> Result<&BucklingRow> {
        match selection {
            ModeSelection::Minimum => self.minimum().ok_or(Error::NoPositiveEigenvalue),
            ModeSelection::Mode(n) => self
                .for_mode(n)
                .ok_or_else(|| Error::invalid("n_range", format!("mode n = {n} was not solved"))),
        }
    }
}

/// Which per-mode value a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSelection {
    /// Minimum over the mode range.
    Minimum,
    Mode(u32),
}

/// Buckling of one mode on a prebuilt mesh.
pub fn buckling_mode(
    model: &ShellModel,
    mesh: &Mesh,
    spring: &SpringStiffness,
    n: u32,
    opts: &AnalysisOptions,
) -> Result<BucklingRow> {
    // Free ends leave the n = 1 lateral translation unrestrained; round-off
    // can still let the Cholesky factorization through.
    if opts.bc == BoundaryCondition::Free && n == 1 {
        return Err(Error::NotPositiveDefinite(
            "stiffness (free ends, n = 1 rigid-body mode)",
        ));
    }
    let reduced = reduced_system(
        model,
        mesh,
        n,
        &Prestress::axial(REFERENCE_PRESTRESS),
        spring,
        opts,
    )?;
    let w = reduced.w_dofs();
    let eig = min_buckling_factor_with(
        &reduced.k,
        &reduced.k_g,
        &EigenOptions {
            residual_tol: opts.residual_tol,
            w_dofs: Some(&w),
        },
    )?;
    let strain_energy = 0.5 * (eig.vector.transpose() * &reduced.k * &eig.vector)[0];
    let critical_resultant = eig.value * REFERENCE_PRESTRESS.abs();
    Ok(BucklingRow {
        n,
        lambda: eig.value,
        critical_resultant,
        normalized_load: critical_resultant / normalization(model),
        strain_energy,
        residual: eig.residual,
        mode: reduced.expand(&eig.vector),
    })
}

/// Buckling sweep over `n_range` on a prebuilt mesh.
///
/// Per-mode failures are recorded; the call fails only when every mode fails.
pub fn critical_load_on_mesh(
    model: &ShellModel,
    mesh: &Mesh,
    n_range: impl IntoIterator<Item = u32>,
    opts: &AnalysisOptions,
) -> Result<BucklingSweepResult> {
    opts.validate()?;
    let modes: Vec<u32> = n_range.into_iter().collect();
    if modes.is_empty() {
        return Err(Error::invalid("n_range", "empty mode range"));
    }
    let spring = crack_stiffness(model, opts)?;
    let results = par_map(&modes, opts.jobs, |&n| {
        buckling_mode(model, mesh, &spring, n, opts)
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&n, r) in modes.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(error) => {
                log::warn!("mode n = {n} failed: {error}");
                failures.push(ModeFailure { n, error });
            }
        }
    }
    if rows.is_empty() {
        return Err(failures.remove(0).error);
    }
    Ok(BucklingSweepResult {
        technique: mesh.technique,
        rows,
        failures,
    })
}

/// Buckling sweep on a uniform mesh of `n_elements` shell elements.
pub fn critical_load(
    model: &ShellModel,
    n_elements: usize,
    technique: Technique,
    n_range: impl IntoIterator<Item = u32>,
    opts: &AnalysisOptions,
) -> Result<BucklingSweepResult> {
    let mesh = mesh_for(model, n_elements, technique)?;
    critical_load_on_mesh(model, &mesh, n_range, opts)
}

/// Shared settings of the parametric buckling sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub n_elements: usize,
    pub technique: Technique,
    pub n_range: Vec<u32>,
    pub options: AnalysisOptions,
}

impl SweepSettings {
    pub fn new(
        n_elements: usize,
        technique: Technique,
        n_range: impl IntoIterator<Item = u32>,
    ) -> Self {
        SweepSettings {
            n_elements,
            technique,
            n_range: n_range.into_iter().collect(),
            options: AnalysisOptions::default(),
        }
    }

    fn run(&self, model: &ShellModel) -> Result<BucklingSweepResult> {
        critical_load(
            model,
            self.n_elements,
            self.technique,
            self.n_range.iter().copied(),
            &self.options,
        )
    }
}

#[derive(Debug)]
pub struct ParameterRow {
    /// `a/h`, `x_c/L` or `L` \[m\] depending on the sweep.
    pub parameter: f64,
    pub sweep: BucklingSweepResult,
}

/// Sweep over crack depth ratios at the model's crack position (mid-length
/// when the model is intact).
pub fn depth_sweep(
    model: &ShellModel,
    depth_ratios: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<ParameterRow>> {
    let x_c = model.crack.map_or(0.5 * model.geometry.length, |c| c.x_c);
    depth_ratios
        .iter()
        .map(|&mu| {
            let crack = CrackSpec::new(mu * model.geometry.thickness, x_c, &model.geometry)?;
            let m = model.with_crack(Some(crack))?;
            Ok(ParameterRow {
                parameter: mu,
                sweep: settings.run(&m)?,
            })
        })
        .collect()
}

/// Sweep over relative crack positions `x_c/L` at the model's crack depth.
pub fn crack_position_sweep(
    model: &ShellModel,
    positions: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<ParameterRow>> {
    let a = model
        .crack
        .ok_or_else(|| Error::invalid("crack", "position sweep needs a crack depth"))?
        .a;
    positions
        .iter()
        .map(|&p| {
            let crack = CrackSpec::new(a, p * model.geometry.length, &model.geometry)?;
            let m = model.with_crack(Some(crack))?;
            Ok(ParameterRow {
                parameter: p,
                sweep: settings.run(&m)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadRatio {
    pub intact_load: f64,
    pub cracked_load: f64,
    pub n_intact: u32,
    pub n_cracked: u32,
    /// `P_cracked / P_intact` of the minima over n.
    pub ratio: f64,
}

pub fn depth_ratio_curve(
    model_intact: &ShellModel,
    model_cracked: &ShellModel,
    settings: &SweepSettings,
) -> Result<LoadRatio> {
    let i = settings.run(model_intact)?;
    let c = settings.run(model_cracked)?;
    let (i, c) = (
        i.select(ModeSelection::Minimum)?,
        c.select(ModeSelection::Minimum)?,
    );
    Ok(LoadRatio {
        intact_load: i.normalized_load,
        cracked_load: c.normalized_load,
        n_intact: i.n,
        n_cracked: c.n,
        ratio: c.normalized_load / i.normalized_load,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthRow {
    pub length: f64,
    pub normalized_load: f64,
    pub critical_n: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthSweep {
    pub rows: Vec<LengthRow>,
    /// First length after which every step changes the load by less than
    /// [`ASYMPTOTE_TOL`].
    pub asymptote_length: Option<f64>,
}

/// Minimum load over n for each cylinder length; the crack keeps its
/// relative position.
pub fn length_sweep(
    model: &ShellModel,
    lengths: &[f64],
    settings: &SweepSettings,
) -> Result<LengthSweep> {
    if lengths.is_empty() {
        return Err(Error::invalid("lengths", "empty length list"));
    }
    let mut rows = Vec::with_capacity(lengths.len());
    for &length in lengths {
        if !(length > 0.0) {
            return Err(Error::invalid(
                "lengths",
                format!("length {length} must be positive"),
            ));
        }
        let m = model.with_length(length)?;
        let sweep = settings.run(&m)?;
        let min = sweep.select(ModeSelection::Minimum)?;
        rows.push(LengthRow {
            length,
            normalized_load: min.normalized_load,
            critical_n: min.n,
        });
    }
    let asymptote_length = asymptote(&rows);
    Ok(LengthSweep {
        rows,
        asymptote_length,
    })
}

fn asymptote(rows: &[LengthRow]) -> Option<f64> {
    let small = |i: usize| {
        let (a, b) = (rows[i - 1].normalized_load, rows[i].normalized_load);
        ((b - a) / a).abs() < ASYMPTOTE_TOL
    };
    (1..rows.len())
        .find(|&start| (start..rows.len()).all(small))
        .map(|start| rows[start - 1].length)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub n: u32,
    /// Zero-based index in ascending order within this `n`.
    pub mode_index: usize,
    /// Angular frequency \[rad/s\].
    pub omega: f64,
    /// `omega R sqrt(rho (1 - nu^2) / E)`.
    pub frequency_parameter: f64,
    /// Share of the kinetic energy carried by `w` and `phi`.
    pub w_fraction: f64,
    pub mode: DVector<f64>,
}

#[derive(Debug)]
pub struct FrequencyResult {
    pub rows: Vec<FrequencyRow>,
    pub failures: Vec<ModeFailure>,
}

impl FrequencyResult {
    pub fn for_mode(&self, n: u32) -> impl Iterator<Item = &FrequencyRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }

    /// Lowest mode of `n` dominated by transverse motion.
    pub fn lowest_flexural(&self, n: u32) -> Option<&FrequencyRow> {
        self.for_mode(n)
            .find(|r| r.w_fraction > FLEXURAL_W_FRACTION)
    }
}

fn vibration_modes(
    model: &ShellModel,
    mesh: &Mesh,
    spring: &SpringStiffness,
    n: u32,
    count: usize,
    opts: &AnalysisOptions,
) -> Result<Vec<FrequencyRow>> {
    let reduced = reduced_system(model, mesh, n, &Prestress::default(), spring, opts)?;
    let w = reduced.w_dofs();
    let count = count.min(reduced.k.nrows());
    let sols = min_vibration_frequencies_with(
        &reduced.k,
        &reduced.m,
        count,
        &EigenOptions {
            residual_tol: opts.residual_tol,
            w_dofs: Some(&w),
        },
    )?;
    let bending = reduced.bending_dofs();
    let g = &model.geometry;
    let mat = &model.material;
    let scale =
        g.radius * (mat.density * (1.0 - mat.poisson_ratio.powi(2)) / mat.youngs_modulus).sqrt();
    Ok(sols
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let total = (s.vector.transpose() * &reduced.m * &s.vector)[0];
            let xb = DVector::from_fn(bending.len(), |r, _| s.vector[bending[r]]);
            let mb = reduced.m.select_rows(&bending).select_columns(&bending);
            let wpart = (xb.transpose() * mb * &xb)[0];
            let omega = s.value.sqrt();
            FrequencyRow {
                n,
                mode_index: i,
                omega,
                frequency_parameter: omega * scale,
                w_fraction: if total > 0.0 { wpart / total } else { 0.0 },
                mode: reduced.expand(&s.vector),
            }
        })
        .collect())
}

/// The `count` lowest natural frequencies for each `n` in `n_list`.
///
/// The crack enters through the stiffness only; the mass matrix is that of
/// the intact shell.
pub fn natural_frequencies(
    model: &ShellModel,
    mesh: &Mesh,
    n_list: &[u32],
    count: usize,
    opts: &AnalysisOptions,
) -> Result<FrequencyResult> {
    opts.validate()?;
    if n_list.is_empty() {
        return Err(Error::invalid("n_range", "empty mode list"));
    }
    if count == 0 {
        return Err(Error::invalid(
            "count",
            "need at least one frequency per mode",
        ));
    }
    let spring = crack_stiffness(model, opts)?;
    let results = par_map(n_list, opts.jobs, |&n| {
        vibration_modes(model, mesh, &spring, n, count, opts)
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&n, r) in n_list.iter().zip(results) {
        match r {
            Ok(mut v) => rows.append(&mut v),
            Err(error) => failures.push(ModeFailure { n, error }),
        }
    }
    if rows.is_empty() {
        return Err(failures.remove(0).error);
    }
    Ok(FrequencyResult { rows, failures })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_elements: usize,
    /// Largest shell element length \[m\].
    pub element_size: f64,
    pub critical_n: u32,
    pub lambda: f64,
    pub normalized_load: f64,
    pub strain_energy: f64,
    /// Wall time of the whole mode sweep \[s\].
    pub wall_time: f64,
}

/// Critical load (minimum over `n_range`) for ascending element counts.
pub fn convergence_study(
    model: &ShellModel,
    element_counts: &[usize],
    technique: Technique,
    n_range: impl IntoIterator<Item = u32>,
    opts: &AnalysisOptions,
) -> Result<Vec<ConvergenceRow>> {
    if element_counts.is_empty() {
        return Err(Error::invalid("counts", "empty element count list"));
    }
    if element_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "counts",
            "element counts must be strictly ascending",
        ));
    }
    let modes: Vec<u32> = n_range.into_iter().collect();
    element_counts
        .iter()
        .map(|&count| {
            let start = Instant::now();
            let mesh = mesh_for(model, count, technique)?;
            let sweep = critical_load_on_mesh(model, &mesh, modes.iter().copied(), opts)?;
            let wall_time = start.elapsed().as_secs_f64();
            let min = sweep.select(ModeSelection::Minimum)?;
            let element_size = mesh.elements.iter().map(|e| e.length).fold(0.0, f64::max);
            Ok(ConvergenceRow {
                n_elements: count,
                element_size,
                critical_n: min.n,
                lambda: min.lambda,
                normalized_load: min.normalized_load,
                strain_energy: min.strain_energy,
                wall_time,
            })
        })
        .collect()
}

/// Classical axisymmetric buckling resultant `E h^2 / (R sqrt(3 (1 - nu^2)))`.
pub fn classical_buckling_resultant(model: &ShellModel) -> f64 {
    let g = &model.geometry;
    let m = &model.material;
    m.youngs_modulus * g.thickness.powi(2)
        / (g.radius * (3.0 * (1.0 - m.poisson_ratio.powi(2))).sqrt())
}

/// Classical resultant normalized like the solver output.
pub fn classical_normalized_load(model: &ShellModel) -> f64 {
    classical_buckling_resultant(model) / normalization(model)
}
