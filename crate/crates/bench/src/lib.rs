//! Shared fixtures for the solver benchmarks.

use shellcrack::analysis::{crack_stiffness, mesh_for, REFERENCE_PRESTRESS};
use shellcrack::assembly::{apply_boundary_conditions, assemble, AssemblyOptions};
use shellcrack::{
    presets, AnalysisOptions, Mesh, Prestress, ReducedSystem, ShellModel, SpringStiffness,
    Technique,
};

/// Depth-study model at crack depth ratio `mu`.
pub fn depth_model(mu: f64) -> ShellModel {
    presets::table1(mu).expect("valid preset").model
}

/// Mesh, crack spring and options for one benchmark case.
pub struct Fixture {
    pub model: ShellModel,
    pub mesh: Mesh,
    pub spring: SpringStiffness,
    pub options: AnalysisOptions,
}

impl Fixture {
    pub fn new(mu: f64, n_elements: usize, technique: Technique) -> Self {
        let model = depth_model(mu);
        let options = AnalysisOptions::default();
        Fixture {
            mesh: mesh_for(&model, n_elements, technique).expect("valid mesh"),
            spring: crack_stiffness(&model, &options).expect("valid crack"),
            model,
            options,
        }
    }

    /// Reduced buckling system of mode `n`.
    pub fn reduced(&self, n: u32) -> ReducedSystem {
        let system = assemble(
            &self.model,
            &self.mesh,
            n,
            &Prestress::axial(REFERENCE_PRESTRESS),
            &self.spring,
            &AssemblyOptions::default(),
        )
        .expect("assembly succeeds");
        apply_boundary_conditions(&system, self.options.bc)
    }
}
