//! Configuration files, result tables and mode-shape export.

pub mod config;
pub mod modeshape;
pub mod table;

pub use config::{parse_config, AnalysisKind, RunConfig, SweepParameter};
pub use modeshape::{sample_modeshape, write_modeshape, ModeShapeGrid, ModeShapeSurface};
pub use table::{format_sig, render_table, write_table, Cell, Provenance, Table};
