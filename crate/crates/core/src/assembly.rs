//! Global matrices for one circumferential mode and boundary conditions.
//!
//! Global DOF `4 i + j` is local DOF `j` (u, v, w, phi) of node `i`. Storage
//! is dense; the half-bandwidth never exceeds 7 since every element couples
//! two consecutive nodes only.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::crack_spring::SpringStiffness;
use crate::element::{element_matrices, ElementContext, ElementMatrices, Mat8, Prestress};
use crate::enrichment::{
    conversion_pair, cracked_geometric_stiffness, cracked_stiffness, spring_set_stiffness,
    ConversionMethod, ConversionPair, SpringSetParams, DEFAULT_PENALTY_ALPHA,
};
use crate::error::{Error, Result};
use crate::model::{ElementKind, Mesh, ShellModel, Technique};
use crate::quadrature::GaussRule;

pub const DOFS_PER_NODE: usize = 4;

/// Local DOF offsets within a node.
pub const U: usize = 0;
pub const V: usize = 1;
pub const W: usize = 2;
pub const PHI: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// `v = w = 0` at both ends; `M_x = N_x = 0` hold naturally.
    #[default]
    SimplySupported,
    /// All four DOFs fixed at both ends.
    Clamped,
    Free,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simply_supported" | "simply-supported" | "ss" => {
                Ok(BoundaryCondition::SimplySupported)
            }
            "clamped" => Ok(BoundaryCondition::Clamped),
            "free" => Ok(BoundaryCondition::Free),
            other => Err(Error::invalid(
                "bc",
                format!("expected simply_supported, clamped or free, got `{other}`"),
            )),
        }
    }
}

/// Global numbering and constraint flags.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub n_nodes: usize,
    /// `constrained[4 i + j]` is true when DOF `j` of node `i` is eliminated.
    pub constrained: Vec<bool>,
}

impl DofMap {
    pub fn new(n_nodes: usize) -> Self {
        DofMap {
            n_nodes,
            constrained: vec![false; DOFS_PER_NODE * n_nodes],
        }
    }

    pub fn index(node: usize, local: usize) -> usize {
        DOFS_PER_NODE * node + local
    }

    pub fn n_dofs(&self) -> usize {
        DOFS_PER_NODE * self.n_nodes
    }

    pub fn constrain(&mut self, node: usize, local: usize) {
        self.constrained[Self::index(node, local)] = true;
    }

    /// Global indices of the free DOFs in ascending order.
    pub fn active(&self) -> Vec<usize> {
        (0..self.n_dofs())
            .filter(|&i| !self.constrained[i])
            .collect()
    }

    /// Builds the constraint set for a boundary condition and mode number.
    ///
    /// At `n = 0` the ansatz has no circumferential displacement, so every `v`
    /// is eliminated, and the axial rigid-body mode is removed by fixing `u`
    /// at the first node.
    pub fn with_boundary_conditions(n_nodes: usize, bc: BoundaryCondition, n: u32) -> Self {
        let mut map = DofMap::new(n_nodes);
        let ends = [0, n_nodes - 1];
        for &e in &ends {
            match bc {
                BoundaryCondition::SimplySupported => {
                    map.constrain(e, V);
                    map.constrain(e, W);
                }
                BoundaryCondition::Clamped => {
                    for j in 0..DOFS_PER_NODE {
                        map.constrain(e, j);
                    }
                }
                BoundaryCondition::Free => {}
            }
        }
        if n == 0 {
            for i in 0..n_nodes {
                map.constrain(i, V);
            }
            map.constrain(0, U);
        }
        map
    }
}

/// Settings that affect the assembled matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub gauss: GaussRule,
    pub penalty_alpha: f64,
    pub conversion: ConversionMethod,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            gauss: GaussRule::default(),
            penalty_alpha: DEFAULT_PENALTY_ALPHA,
            conversion: ConversionMethod::default(),
        }
    }
}

/// Full (unconstrained) global matrices of one mode.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub n: u32,
    pub k: DMatrix<f64>,
    pub k_g: DMatrix<f64>,
    pub m: DMatrix<f64>,
    /// Per-element contributions, element `e` acting on nodes `e` and `e + 1`.
    pub blocks: Vec<ElementMatrices>,
    /// Conversion matrices of the cracked element, when present.
    pub conversion: Option<(usize, ConversionPair)>,
}

impl GlobalSystem {
    pub fn n_dofs(&self) -> usize {
        self.k.nrows()
    }

    /// Element DOF vector of element `e` gathered from a full global vector.
    pub fn gather(&self, e: usize, full: &DVector<f64>) -> crate::element::Vec8 {
        crate::element::Vec8::from_fn(|i, _| full[DOFS_PER_NODE * e + i])
    }
}

fn element_context(model: &ShellModel, length: f64, n: u32) -> ElementContext {
    ElementContext {
        length,
        radius: model.geometry.radius,
        thickness: model.geometry.thickness,
        n,
        material: model.material,
    }
}

fn scatter(target: &mut DMatrix<f64>, e: usize, block: &Mat8) {
    let o = DOFS_PER_NODE * e;
    for i in 0..8 {
        for j in 0..8 {
            target[(o + i, o + j)] += block[(i, j)];
        }
    }
}

/// Assembles stiffness, geometric stiffness and mass for mode `n`.
///
/// `spring` is the crack stiffness; it is ignored when the mesh is flagged
/// intact, in which case the crack element is treated as a standard element
/// (conversion) or a rigid joint (spring set).
pub fn assemble(
    model: &ShellModel,
    mesh: &Mesh,
    n: u32,
    prestress: &Prestress,
    spring: &SpringStiffness,
    options: &AssemblyOptions,
) -> Result<GlobalSystem> {
    mesh.validate(model.geometry.length)?;
    let n_nodes = mesh.n_nodes();
    let size = DOFS_PER_NODE * n_nodes;
    let mut k = DMatrix::zeros(size, size);
    let mut k_g = DMatrix::zeros(size, size);
    let mut m = DMatrix::zeros(size, size);
    let mut blocks = Vec::with_capacity(mesh.elements.len());
    let mut conversion = None;
    let effective_spring = if mesh.intact {
        SpringStiffness::Intact
    } else {
        *spring
    };

    for (e, el) in mesh.elements.iter().enumerate() {
        let block = match el.kind {
            ElementKind::Standard => element_matrices(
                &element_context(model, el.length, n),
                prestress,
                options.gauss,
            ),
            ElementKind::Cracked { x0 } => {
                if mesh.technique != Technique::Conversion {
                    return Err(Error::InconsistentMesh(
                        "cracked element in a spring-set mesh".into(),
                    ));
                }
                let ctx = element_context(model, el.length, n);
                let standard = element_matrices(&ctx, prestress, options.gauss);
                if mesh.intact {
                    standard
                } else {
                    let pair = conversion_pair(x0, &ctx, &effective_spring, options.conversion)?;
                    let kc = cracked_stiffness(x0, &ctx, &effective_spring, &pair, options.gauss)?;
                    let gc =
                        cracked_geometric_stiffness(x0, &ctx, &pair, prestress, options.gauss)?;
                    conversion = Some((e, pair));
                    ElementMatrices {
                        k: kc,
                        m: standard.m,
                        k_g: gc,
                    }
                }
            }
            ElementKind::CrackSpring => {
                if mesh.technique != Technique::SpringSet {
                    return Err(Error::InconsistentMesh(
                        "spring element in a conversion mesh".into(),
                    ));
                }
                let left = element_context(model, mesh.elements[e - 1].length, n);
                let right = element_context(model, mesh.elements[e + 1].length, n);
                let diag = |c: &ElementContext| {
                    crate::element::stiffness_with(c, options.gauss)
                        .diagonal()
                        .iter()
                        .fold(0.0f64, |a, &b| a.max(b))
                };
                let max_diag = diag(&left).max(diag(&right));
                let params = SpringSetParams::for_crack(
                    &effective_spring,
                    &left,
                    max_diag,
                    options.penalty_alpha,
                )?;
                ElementMatrices {
                    k: spring_set_stiffness(&params),
                    m: Mat8::zeros(),
                    k_g: Mat8::zeros(),
                }
            }
        };
        scatter(&mut k, e, &block.k);
        scatter(&mut k_g, e, &block.k_g);
        scatter(&mut m, e, &block.m);
        blocks.push(block);
    }
    Ok(GlobalSystem {
        n,
        k,
        k_g,
        m,
        blocks,
        conversion,
    })
}

/// Matrices restricted to the free DOFs.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub k: DMatrix<f64>,
    pub k_g: DMatrix<f64>,
    pub m: DMatrix<f64>,
    /// Global index of each reduced DOF.
    pub active: Vec<usize>,
    pub n_full: usize,
}

impl ReducedSystem {
    /// Scatters a reduced vector back to full size, zeros on constrained DOFs.
    pub fn expand(&self, reduced: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.n_full);
        for (r, &g) in self.active.iter().enumerate() {
            full[g] = reduced[r];
        }
        full
    }

    /// Reduced indices of the `w` DOFs.
    pub fn w_dofs(&self) -> Vec<usize> {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, &g)| g % DOFS_PER_NODE == W)
            .map(|(r, _)| r)
            .collect()
    }

    /// Reduced indices of the transverse (`w` and `phi`) DOFs.
    pub fn bending_dofs(&self) -> Vec<usize> {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, &g)| g % DOFS_PER_NODE >= W)
            .map(|(r, _)| r)
            .collect()
    }
}

/// Eliminates constrained rows and columns.
pub fn apply_boundary_conditions(system: &GlobalSystem, bc: BoundaryCondition) -> ReducedSystem {
    let n_nodes = system.n_dofs() / DOFS_PER_NODE;
    let map = DofMap::with_boundary_conditions(n_nodes, bc, system.n);
    reduce(system, &map)
}

pub fn reduce(system: &GlobalSystem, map: &DofMap) -> ReducedSystem {
    let active = map.active();
    let pick = |a: &DMatrix<f64>| {
        DMatrix::from_fn(active.len(), active.len(), |i, j| a[(active[i], active[j])])
    };
    ReducedSystem {
        k: pick(&system.k),
        k_g: pick(&system.k_g),
        m: pick(&system.m),
        active,
        n_full: system.n_dofs(),
    }
}

/// Largest `|i - j|` over the nonzero entries.
pub fn half_bandwidth(a: &DMatrix<f64>) -> usize {
    let mut bw = 0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if a[(i, j)] != 0.0 {
                bw = bw.max(i.abs_diff(j));
            }
        }
    }
    bw
}

/// Writes the nonzero entries as `row col value` lines (zero-based).
pub fn write_coordinates<Wr: Write>(mut out: Wr, a: &DMatrix<f64>) -> Result<()> {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = a[(i, j)];
            if v != 0.0 {
                writeln!(out, "{i} {j} {v:.17e}")?;
            }
        }
    }
    Ok(())
}
