//! Named benchmark cases.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::model::{radius_for_shell_parameter, CrackSpec, Material, ShellGeometry, ShellModel};

pub const NAMES: [&str; 4] = ["table1", "table4", "table5", "table2-experimental"];

/// A model plus the discretization the benchmark uses.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub name: &'static str,
    pub model: ShellModel,
    pub n_elements: usize,
    pub n_range: RangeInclusive<u32>,
}

/// `h = 0.2 m`, shell parameter `m = 1`, `L = 5 pi`, steel.
pub fn long_shell_geometry() -> ShellGeometry {
    ShellGeometry {
        radius: radius_for_shell_parameter(1.0, 0.2, 0.3),
        thickness: 0.2,
        length: 5.0 * PI,
    }
}

/// Test cylinder: `L = 100 mm`, `R = 115 mm`, `h = 1 mm`.
pub fn test_cylinder_geometry() -> ShellGeometry {
    ShellGeometry {
        radius: 0.115,
        thickness: 0.001,
        length: 0.1,
    }
}

fn case(
    name: &'static str,
    geometry: ShellGeometry,
    depth_ratio: f64,
    position_ratio: f64,
    n_range: RangeInclusive<u32>,
) -> Result<Case> {
    let crack = CrackSpec::from_ratios(depth_ratio, position_ratio, &geometry)?;
    Ok(Case {
        name,
        model: ShellModel::new(geometry, Material::steel(), Some(crack))?,
        n_elements: 21,
        n_range,
    })
}

/// Depth study: mid-length crack of depth ratio `depth_ratio`.
pub fn table1(depth_ratio: f64) -> Result<Case> {
    case("table1", long_shell_geometry(), depth_ratio, 0.5, 1..=15)
}

/// Position study: `a/h = 0.5` at `x_c / L = position_ratio`.
pub fn table4(position_ratio: f64) -> Result<Case> {
    case("table4", long_shell_geometry(), 0.5, position_ratio, 1..=15)
}

/// Frequency study on the depth-study geometry.
pub fn table5(depth_ratio: f64) -> Result<Case> {
    case("table5", long_shell_geometry(), depth_ratio, 0.5, 1..=11)
}

/// Test cylinder with a mid-length crack. Its critical mode lies far above
/// `n = 15`, hence the wider range.
pub fn table2_experimental(depth_ratio: f64) -> Result<Case> {
    case(
        "table2-experimental",
        test_cylinder_geometry(),
        depth_ratio,
        0.5,
        1..=40,
    )
}

/// Preset by name with its default crack.
pub fn by_name(name: &str) -> Result<Case> {
    match name {
        "table1" => table1(0.5),
        "table4" => table4(0.5),
        "table5" => table5(0.1),
        "table2-experimental" | "table2" => table2_experimental(0.4),
        other => Err(Error::Config(format!(
            "unknown preset `{other}` (expected one of {})",
            NAMES.join(", ")
        ))),
    }
}
