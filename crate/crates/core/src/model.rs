//! Physical description of the cracked cylinder and the axial mesh.
//!
//! The shell is discretized along its axis only; the circumferential
//! direction is handled analytically by the ring harmonic. A crack is placed
//! either strictly inside one element (conversion technique) or between a
//! duplicated node pair joined by a zero-length spring element (spring set).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking that element lengths add up to L.
const LENGTH_SUM_TOL: f64 = 1e-12;

/// Crack positions closer than this fraction of an element length to a node
/// are treated as lying on the node.
const NODE_SNAP_TOL: f64 = 1e-9;

/// Mid-surface geometry of the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellGeometry {
    /// Mid-surface radius \[m\].
    #[serde(rename = "R")]
    pub radius: f64,
    /// Wall thickness \[m\].
    #[serde(rename = "h")]
    pub thickness: f64,
    /// Cylinder length \[m\].
    #[serde(rename = "L")]
    pub length: f64,
}

impl ShellGeometry {
    pub fn new(radius: f64, thickness: f64, length: f64) -> Result<Self> {
        let g = ShellGeometry {
            radius,
            thickness,
            length,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        positive("geometry.R", self.radius)?;
        positive("geometry.h", self.thickness)?;
        positive("geometry.L", self.length)?;
        if self.thickness >= self.radius {
            return Err(Error::invalid(
                "geometry.h",
                format!(
                    "thin-shell model needs h < R (h = {}, R = {})",
                    self.thickness, self.radius
                ),
            ));
        }
        if self.thickness / self.radius > 0.05 {
            log::warn!(
                "h/R = {:.4} exceeds 0.05; thin-shell kinematics may be inaccurate",
                self.thickness / self.radius
            );
        }
        Ok(())
    }

    /// Circumference `b = 2 pi R`.
    pub fn circumference(&self) -> f64 {
        2.0 * PI * self.radius
    }
}

/// Isotropic linear-elastic material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Young's modulus \[Pa\].
    #[serde(rename = "E")]
    pub youngs_modulus: f64,
    /// Poisson ratio.
    #[serde(rename = "nu")]
    pub poisson_ratio: f64,
    /// Density \[kg/m^3\].
    #[serde(rename = "rho")]
    pub density: f64,
}

impl Material {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64, density: f64) -> Result<Self> {
        let m = Material {
            youngs_modulus,
            poisson_ratio,
            density,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        positive("material.E", self.youngs_modulus)?;
        positive("material.rho", self.density)?;
        let nu = self.poisson_ratio;
        if !(0.0..0.5).contains(&nu) {
            return Err(Error::invalid(
                "material.nu",
                format!("need 0 <= nu < 0.5, got {nu}"),
            ));
        }
        Ok(())
    }

    /// Steel as used throughout the reference cases: E = 200 GPa, nu = 0.3, rho = 7850.
    pub fn steel() -> Self {
        Material {
            youngs_modulus: 200e9,
            poisson_ratio: 0.3,
            density: 7850.0,
        }
    }
}

/// Circumferential part-through crack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrackSpec {
    /// Crack depth \[m\].
    pub a: f64,
    /// Axial position of the crack plane \[m\].
    pub x_c: f64,
}

impl CrackSpec {
    pub fn new(a: f64, x_c: f64, geometry: &ShellGeometry) -> Result<Self> {
        let c = CrackSpec { a, x_c };
        c.validate(geometry)?;
        Ok(c)
    }

    /// Crack of depth ratio `mu = a/h` at relative position `x_c/L`.
    pub fn from_ratios(
        depth_ratio: f64,
        position_ratio: f64,
        geometry: &ShellGeometry,
    ) -> Result<Self> {
        CrackSpec::new(
            depth_ratio * geometry.thickness,
            position_ratio * geometry.length,
            geometry,
        )
    }

    pub fn validate(&self, geometry: &ShellGeometry) -> Result<()> {
        if !self.a.is_finite() || self.a < 0.0 || self.a >= geometry.thickness {
            return Err(Error::CrackTooDeep {
                a: self.a,
                h: geometry.thickness,
            });
        }
        if !self.x_c.is_finite() || self.x_c <= 0.0 || self.x_c >= geometry.length {
            return Err(Error::CrackOutOfRange {
                x_c: self.x_c,
                length: geometry.length,
            });
        }
        Ok(())
    }

    /// Depth ratio `mu = a/h`.
    pub fn depth_ratio(&self, geometry: &ShellGeometry) -> f64 {
        self.a / geometry.thickness
    }

    pub fn is_intact(&self) -> bool {
        self.a == 0.0
    }
}

/// Constants derived from geometry and material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Flexural rigidity `D = E h^3 / 12(1 - nu^2)` \[N m\].
    pub flexural_rigidity: f64,
    /// Circumference `b = 2 pi R` \[m\].
    pub circumference: f64,
    /// Shell parameter `m = 12(1 - nu^2) / (R^2 h^2)`.
    pub shell_parameter: f64,
}

pub fn derived_params(geometry: &ShellGeometry, material: &Material) -> DerivedParams {
    let nu2 = 1.0 - material.poisson_ratio * material.poisson_ratio;
    let h = geometry.thickness;
    let r = geometry.radius;
    DerivedParams {
        flexural_rigidity: material.youngs_modulus * h * h * h / (12.0 * nu2),
        circumference: geometry.circumference(),
        shell_parameter: 12.0 * nu2 / (r * r * h * h),
    }
}

/// Radius giving a prescribed shell parameter `m` for thickness `h`.
pub fn radius_for_shell_parameter(shell_parameter: f64, thickness: f64, poisson_ratio: f64) -> f64 {
    (12.0 * (1.0 - poisson_ratio * poisson_ratio) / shell_parameter).sqrt() / thickness
}

/// Everything physical about one analysis case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellModel {
    pub geometry: ShellGeometry,
    pub material: Material,
    pub crack: Option<CrackSpec>,
}

impl ShellModel {
    pub fn new(
        geometry: ShellGeometry,
        material: Material,
        crack: Option<CrackSpec>,
    ) -> Result<Self> {
        geometry.validate()?;
        material.validate()?;
        if let Some(c) = &crack {
            c.validate(&geometry)?;
        }
        Ok(ShellModel {
            geometry,
            material,
            crack,
        })
    }

    pub fn derived(&self) -> DerivedParams {
        derived_params(&self.geometry, &self.material)
    }

    pub fn intact(&self) -> ShellModel {
        ShellModel {
            crack: None,
            ..*self
        }
    }

    pub fn with_crack(&self, crack: Option<CrackSpec>) -> Result<ShellModel> {
        ShellModel::new(self.geometry, self.material, crack)
    }

    pub fn with_length(&self, length: f64) -> Result<ShellModel> {
        let geometry = ShellGeometry {
            length,
            ..self.geometry
        };
        let crack = match self.crack {
            Some(c) => Some(CrackSpec::new(
                c.a,
                c.x_c / self.geometry.length * length,
                &geometry,
            )?),
            None => None,
        };
        ShellModel::new(geometry, self.material, crack)
    }
}

/// How the crack is embedded into the stiffness description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    /// Middle-node elimination inside an enriched cracked element.
    Conversion,
    /// Zero-length spring element between a duplicated node pair.
    SpringSet,
}

impl Technique {
    pub fn name(self) -> &'static str {
        match self {
            Technique::Conversion => "conversion",
            Technique::SpringSet => "spring_set",
        }
    }
}

impl std::str::FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conversion" => Ok(Technique::Conversion),
            "spring_set" | "spring-set" => Ok(Technique::SpringSet),
            other => Err(Error::invalid(
                "technique",
                format!("expected `conversion` or `spring_set`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    Standard,
    /// Shell element containing the crack plane at local offset `x0`.
    Cracked {
        x0: f64,
    },
    /// Zero-length spring element joining two coincident nodes.
    CrackSpring,
}

/// One axial element; element `e` connects nodes `e` and `e + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshElement {
    pub kind: ElementKind,
    pub length: f64,
    pub x_start: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub technique: Technique,
    pub elements: Vec<MeshElement>,
    /// Axial coordinate of every node. Spring-set meshes repeat `x_c`.
    pub node_x: Vec<f64>,
    /// Index of the element carrying the crack, if any.
    pub crack_element: Option<usize>,
    /// True when the crack has zero depth; downstream treats the crack
    /// element as a standard element (or a rigid joint).
    pub intact: bool,
}

impl Mesh {
    /// Uniform mesh without a crack.
    pub fn uniform(length: f64, n_elements: usize) -> Result<Mesh> {
        if n_elements == 0 {
            return Err(Error::invalid(
                "mesh.n_elements",
                "need at least one element",
            ));
        }
        positive("geometry.L", length)?;
        let l = length / n_elements as f64;
        Ok(Mesh::from_segments(
            Technique::Conversion,
            vec![l; n_elements],
            None,
            true,
        ))
    }

    pub fn n_nodes(&self) -> usize {
        self.node_x.len()
    }

    /// Number of shell (non-spring) elements.
    pub fn n_shell_elements(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| !matches!(e.kind, ElementKind::CrackSpring))
            .count()
    }

    pub fn total_length(&self) -> f64 {
        self.elements.iter().map(|e| e.length).sum()
    }

    /// Node index pair joined by the spring element (spring-set meshes).
    pub fn crack_interface(&self) -> Option<(usize, usize)> {
        match self.crack_element {
            Some(e) if self.elements[e].kind == ElementKind::CrackSpring => Some((e, e + 1)),
            _ => None,
        }
    }

    /// Checks the layout invariants against a cylinder length.
    pub fn validate(&self, length: f64) -> Result<()> {
        let sum = self.total_length();
        if (sum - length).abs() > LENGTH_SUM_TOL * length * self.elements.len().max(1) as f64 {
            return Err(Error::InconsistentMesh(format!(
                "element lengths sum to {sum}, expected {length}"
            )));
        }
        if self.node_x.len() != self.elements.len() + 1 {
            return Err(Error::InconsistentMesh(
                "node count must be element count + 1".into(),
            ));
        }
        let springs = self
            .elements
            .iter()
            .filter(|e| e.kind == ElementKind::CrackSpring)
            .count();
        let cracked = self
            .elements
            .iter()
            .filter(|e| matches!(e.kind, ElementKind::Cracked { .. }))
            .count();
        for (i, e) in self.elements.iter().enumerate() {
            match e.kind {
                ElementKind::CrackSpring => {
                    if e.length != 0.0 {
                        return Err(Error::InconsistentMesh(
                            "spring element must have zero length".into(),
                        ));
                    }
                    if i == 0 || i + 1 == self.elements.len() {
                        return Err(Error::InconsistentMesh(
                            "spring element cannot sit at a shell end".into(),
                        ));
                    }
                }
                ElementKind::Cracked { x0 } => {
                    if !(x0 > 0.0 && x0 < e.length) {
                        return Err(Error::InconsistentMesh(format!(
                            "crack offset {x0} not strictly inside element of length {}",
                            e.length
                        )));
                    }
                }
                ElementKind::Standard => {
                    if e.length <= 0.0 {
                        return Err(Error::InconsistentMesh(
                            "element with non-positive length".into(),
                        ));
                    }
                }
            }
        }
        match self.technique {
            Technique::Conversion if springs > 0 => Err(Error::InconsistentMesh(
                "conversion mesh contains a spring element".into(),
            )),
            Technique::SpringSet if cracked > 0 => Err(Error::InconsistentMesh(
                "spring-set mesh contains an enriched cracked element".into(),
            )),
            _ if springs + cracked > 1 => Err(Error::InconsistentMesh(
                "more than one crack element".into(),
            )),
            _ => Ok(()),
        }
    }

    fn from_segments(
        technique: Technique,
        lengths: Vec<f64>,
        crack: Option<(usize, ElementKind)>,
        intact: bool,
    ) -> Mesh {
        let mut elements = Vec::with_capacity(lengths.len());
        let mut node_x = Vec::with_capacity(lengths.len() + 1);
        let mut x = 0.0;
        node_x.push(0.0);
        for (i, &l) in lengths.iter().enumerate() {
            let kind = match crack {
                Some((idx, k)) if idx == i => k,
                _ => ElementKind::Standard,
            };
            elements.push(MeshElement {
                kind,
                length: l,
                x_start: x,
            });
            x += l;
            node_x.push(x);
        }
        Mesh {
            technique,
            elements,
            node_x,
            crack_element: crack.map(|(i, _)| i),
            intact,
        }
    }
}

/// Builds a uniform axial mesh with the crack embedded per `technique`.
///
/// Conversion: the crack lies strictly inside one element. If `x_c` falls on
/// a node, that node is shifted by half the following element length.
/// Spring set: the shell elements are split into two uniform groups meeting
/// at `x_c`, where a zero-length spring element joins a duplicated node pair.
pub fn build_mesh(
    geometry: &ShellGeometry,
    crack: &CrackSpec,
    n_elements: usize,
    technique: Technique,
) -> Result<Mesh> {
    crack.validate(geometry)?;
    if n_elements < 3 {
        return Err(Error::MeshTooCoarse {
            n_elements,
            reason: "at least 3 elements are required".into(),
        });
    }
    let length = geometry.length;
    let mesh = match technique {
        Technique::Conversion => {
            let l = length / n_elements as f64;
            place_in_element(vec![l; n_elements], crack)?
        }
        Technique::SpringSet => {
            let frac = crack.x_c / length;
            let left = ((n_elements as f64 * frac).round() as usize).clamp(1, n_elements - 1);
            let right = n_elements - left;
            let mut lengths = vec![crack.x_c / left as f64; left];
            lengths.extend(std::iter::repeat_n(
                (length - crack.x_c) / right as f64,
                right,
            ));
            spring_set_from_lengths(lengths, left, crack)
        }
    };
    mesh.validate(length)?;
    Ok(mesh)
}

/// Builds a mesh from explicit shell element lengths.
///
/// For the spring set the node nearest to `x_c` is moved onto the crack plane.
pub fn build_mesh_from_lengths(
    geometry: &ShellGeometry,
    crack: Option<&CrackSpec>,
    lengths: &[f64],
    technique: Technique,
) -> Result<Mesh> {
    if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::invalid(
            "mesh.lengths",
            "all element lengths must be positive",
        ));
    }
    let sum: f64 = lengths.iter().sum();
    if (sum - geometry.length).abs() > LENGTH_SUM_TOL * geometry.length * lengths.len() as f64 {
        return Err(Error::invalid(
            "mesh.lengths",
            format!(
                "lengths sum to {sum}, cylinder length is {}",
                geometry.length
            ),
        ));
    }
    let Some(crack) = crack else {
        return Ok(Mesh::from_segments(
            Technique::Conversion,
            lengths.to_vec(),
            None,
            true,
        ));
    };
    crack.validate(geometry)?;
    if lengths.len() < 3 {
        return Err(Error::MeshTooCoarse {
            n_elements: lengths.len(),
            reason: "at least 3 elements are required".into(),
        });
    }
    let mesh = match technique {
        Technique::Conversion => place_in_element(lengths.to_vec(), crack)?,
        Technique::SpringSet => {
            let mut nodes = vec![0.0];
            let mut x = 0.0;
            for &l in lengths {
                x += l;
                nodes.push(x);
            }
            let n = lengths.len();
            let k = (1..n)
                .min_by(|&i, &j| {
                    (nodes[i] - crack.x_c)
                        .abs()
                        .total_cmp(&(nodes[j] - crack.x_c).abs())
                })
                .expect("at least one interior node");
            nodes[k] = crack.x_c;
            if nodes[k] <= nodes[k - 1] || nodes[k] >= nodes[k + 1] {
                return Err(Error::MeshTooCoarse {
                    n_elements: n,
                    reason: "moving the nearest node onto the crack inverts an element".into(),
                });
            }
            let new_lengths: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
            spring_set_from_lengths(new_lengths, k, crack)
        }
    };
    mesh.validate(geometry.length)?;
    Ok(mesh)
}

fn place_in_element(mut lengths: Vec<f64>, crack: &CrackSpec) -> Result<Mesh> {
    let n = lengths.len();
    let mut x = 0.0;
    let mut found = None;
    for (i, &l) in lengths.iter().enumerate() {
        let x0 = crack.x_c - x;
        if x0 <= NODE_SNAP_TOL * l && i > 0 {
            // Crack sits on the node at the start of element i.
            let shift = 0.5 * l;
            lengths[i - 1] += shift;
            lengths[i] -= shift;
            found = Some((i - 1, lengths[i - 1] - shift));
            break;
        }
        if x0 < l * (1.0 - NODE_SNAP_TOL) {
            found = Some((i, x0));
            break;
        }
        x += l;
    }
    let (idx, x0) = found.ok_or_else(|| Error::MeshTooCoarse {
        n_elements: n,
        reason: "crack position not located in any element".into(),
    })?;
    Ok(Mesh::from_segments(
        Technique::Conversion,
        lengths,
        Some((idx, ElementKind::Cracked { x0 })),
        crack.is_intact(),
    ))
}

fn spring_set_from_lengths(shell_lengths: Vec<f64>, left: usize, crack: &CrackSpec) -> Mesh {
    let mut lengths = shell_lengths;
    lengths.insert(left, 0.0);
    Mesh::from_segments(
        Technique::SpringSet,
        lengths,
        Some((left, ElementKind::CrackSpring)),
        crack.is_intact(),
    )
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be positive and finite, got {value}"),
        ))
    }
}
