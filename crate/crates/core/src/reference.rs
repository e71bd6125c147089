//! Reference benchmark values used by the verification suite and the CLI
//! `verify` command.

/// Crack depth ratios of the depth study.
pub const DEPTH_RATIOS: [f64; 10] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Normalized critical load, conversion technique, per [`DEPTH_RATIOS`].
pub const DEPTH_LOADS_CONVERSION: [f64; 10] =
    [2.00, 2.00, 1.99, 1.97, 1.94, 1.87, 1.74, 1.50, 1.27, 1.08];

/// Normalized critical load, spring-set technique, per [`DEPTH_RATIOS`].
pub const DEPTH_LOADS_SPRING_SET: [f64; 10] =
    [2.00, 2.00, 1.99, 1.97, 1.94, 1.87, 1.73, 1.49, 1.25, 1.07];

/// Beam-column on elastic foundation solution, per [`DEPTH_RATIOS`].
pub const DEPTH_LOADS_BEAM_COLUMN: [f64; 10] =
    [2.00, 2.00, 1.99, 1.98, 1.95, 1.88, 1.73, 1.50, 1.26, 1.07];

pub const DEPTH_TOL: f64 = 0.02;

/// Crack positions `x_c/L` of the position study (`a/h = 0.5`, `L = 5 pi`).
pub const POSITIONS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
pub const POSITION_LOADS: [f64; 5] = [1.80, 2.00, 1.86, 1.95, 1.87];
pub const POSITION_TOL: f64 = 0.03;

/// Load ratio `P_cracked / P_intact` on the test-cylinder geometry.
pub const RATIO_DEPTHS: [f64; 2] = [0.4, 0.7];
pub const LOAD_RATIOS: [f64; 2] = [0.98, 0.77];
pub const RATIO_TOL: f64 = 0.02;

/// Mesh study on the intact test cylinder: element size \[mm\] and `P / P_conv`.
pub const MESH_SIZES_MM: [f64; 4] = [20.0, 9.0, 5.0, 2.5];
pub const MESH_LOAD_RATIOS: [f64; 4] = [1.09, 1.01, 1.001, 1.0];

/// Frequency study: mode numbers, crack depths and `Omega` values.
pub const FREQ_MODES: [u32; 4] = [1, 3, 7, 11];
pub const FREQ_DEPTHS: [f64; 4] = [0.1, 0.3, 0.5, 0.8];
pub const FREQ_PARAMETERS: [[f64; 4]; 4] = [
    [0.8557, 0.8557, 0.8557, 0.8557],
    [0.5172, 0.5172, 0.5172, 0.5169],
    [0.2899, 0.2896, 0.2890, 0.2867],
    [0.4681, 0.4672, 0.4662, 0.4620],
];
/// Largest relative shift of `Omega` across depths for any listed mode.
pub const FREQ_SHIFT_TOL: f64 = 0.015;
pub const FREQ_SHIFT_TOL_MODE1: f64 = 5e-4;
pub const FREQ_ABS_TOL: f64 = 0.02;
