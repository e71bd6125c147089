//! Semi-analytical finite elements for thin cylindrical shells with a
//! circumferential part-through crack.
//!
//! The shell is discretized axially with two-node ring elements, one
//! circumferential harmonic at a time. The crack enters as a rotational line
//! spring, embedded either by eliminating the middle nodes of a split element
//! ([`Technique::Conversion`]) or through a zero-length spring element between
//! duplicated nodes ([`Technique::SpringSet`]).
//!
//! ```no_run
//! use shellcrack::{presets, critical_load, AnalysisOptions, Technique};
//!
//! let case = presets::table1(0.5).unwrap();
//! let sweep = critical_load(&case.model, 21, Technique::Conversion, 1..=15, &AnalysisOptions::default()).unwrap();
//! println!("{:.3}", sweep.minimum().unwrap().normalized_load);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod crack_spring;
pub mod eigen;
pub mod element;
pub mod enrichment;
pub mod error;
pub mod io;
pub mod model;
pub mod presets;
pub mod quadrature;
pub mod reference;
pub mod verification;

pub use analysis::{
    classical_normalized_load, convergence_study, crack_position_sweep, critical_load,
    critical_load_on_mesh, depth_ratio_curve, depth_sweep, length_sweep, mesh_for,
    natural_frequencies, AnalysisOptions, BucklingRow, BucklingSweepResult, ConvergenceRow,
    FrequencyResult, FrequencyRow, ModeSelection, SweepSettings,
};
pub use assembly::{BoundaryCondition, GlobalSystem, ReducedSystem};
pub use crack_spring::{
    rotational_stiffness, shape_factor, sif_per_moment, FractureCondition, LineSpringModel,
    ShapeFactorForm, SpringStiffness,
};
pub use eigen::EigenSolution;
pub use element::{ElementContext, ElementMatrices, Mat8, Prestress, Vec8};
pub use enrichment::{
    continuity_oracle, conversion_matrices, ConversionMethod, ConversionPair, SpringSetParams,
};
pub use error::{Error, Result};
pub use model::{
    build_mesh, build_mesh_from_lengths, derived_params, CrackSpec, DerivedParams, ElementKind,
    Material, Mesh, ShellGeometry, ShellModel, Technique,
};
pub use quadrature::GaussRule;
