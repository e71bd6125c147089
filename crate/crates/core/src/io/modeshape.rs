//! Mode-shape surfaces sampled through the harmonic expansion.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DVector;

use crate::analysis::{crack_stiffness, AnalysisOptions};
use crate::assembly::DOFS_PER_NODE;
use crate::element::{sample_field, ElementContext, Vec8};
use crate::enrichment::conversion_pair;
use crate::error::{Error, Result};
use crate::io::table::{format_sig, Provenance};
use crate::model::{ElementKind, Mesh, ShellModel};

pub const DEFAULT_SCALE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeShapeGrid {
    /// Axial sample points over the whole shell.
    pub nx: usize,
    /// Angles per circumference, `theta = 2 pi j / ntheta`.
    pub ntheta: usize,
    pub scale: f64,
}

impl ModeShapeGrid {
    /// Four points per shell element, 5 degree angular steps.
    pub fn for_mesh(mesh: &Mesh) -> Self {
        ModeShapeGrid {
            nx: 4 * mesh.n_shell_elements(),
            ntheta: 72,
            scale: DEFAULT_SCALE,
        }
    }
}

/// One sample of the scaled displacement field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub element: usize,
    pub x: f64,
    pub theta: f64,
    pub u: f64,
    pub v: f64,
    /// Inward deflection.
    pub w: f64,
    /// `dw/dx`.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeShapeSurface {
    pub n: u32,
    pub scale: f64,
    pub radius: f64,
    pub points: Vec<SurfacePoint>,
}

impl ModeShapeSurface {
    /// Deformed Cartesian position of a point (`X` along the axis).
    pub fn deformed(&self, p: &SurfacePoint) -> [f64; 3] {
        let r = self.radius - p.w;
        let t = p.theta + p.v / self.radius;
        [p.x + p.u, r * t.cos(), r * t.sin()]
    }
}

/// A sub-interval of an element with its own nodal vector.
struct Segment {
    element: usize,
    x_start: f64,
    ctx: ElementContext,
    nodal: Vec8,
}

fn segments(
    model: &ShellModel,
    mesh: &Mesh,
    n: u32,
    full: &DVector<f64>,
    opts: &AnalysisOptions,
) -> Result<Vec<Segment>> {
    let spring = crack_stiffness(model, opts)?;
    let mut out = Vec::new();
    for (e, el) in mesh.elements.iter().enumerate() {
        let o = DOFS_PER_NODE * e;
        let nodal = Vec8::from_fn(|i, _| full[o + i]);
        let ctx = ElementContext {
            length: el.length,
            radius: model.geometry.radius,
            thickness: model.geometry.thickness,
            n,
            material: model.material,
        };
        match el.kind {
            ElementKind::Standard => out.push(Segment {
                element: e,
                x_start: el.x_start,
                ctx,
                nodal,
            }),
            ElementKind::Cracked { x0 } if !mesh.intact => {
                let pair = conversion_pair(x0, &ctx, &spring, opts.conversion)?;
                out.push(Segment {
                    element: e,
                    x_start: el.x_start,
                    ctx: ctx.with_length(x0),
                    nodal: pair.c_t * nodal,
                });
                out.push(Segment {
                    element: e,
                    x_start: el.x_start + x0,
                    ctx: ctx.with_length(el.length - x0),
                    nodal: pair.c_b * nodal,
                });
            }
            ElementKind::Cracked { .. } => out.push(Segment {
                element: e,
                x_start: el.x_start,
                ctx,
                nodal,
            }),
            ElementKind::CrackSpring => {}
        }
    }
    Ok(out)
}

/// Samples mode `full` (all global DOFs) of harmonic `n` on the grid.
///
/// Every shell element gets `nx / n_shell_elements` points including both
/// ends; the cracked conversion element is sampled on its two sub-elements,
/// so both faces of the crack plane appear.
pub fn sample_modeshape(
    model: &ShellModel,
    mesh: &Mesh,
    n: u32,
    full: &DVector<f64>,
    grid: &ModeShapeGrid,
    opts: &AnalysisOptions,
) -> Result<ModeShapeSurface> {
    if full.len() != DOFS_PER_NODE * mesh.n_nodes() {
        return Err(Error::invalid(
            "mode",
            format!(
                "expected {} DOFs, got {}",
                DOFS_PER_NODE * mesh.n_nodes(),
                full.len()
            ),
        ));
    }
    let n_shell = mesh.n_shell_elements();
    let per_element = grid.nx / n_shell.max(1);
    if per_element < 2 {
        return Err(Error::MeshTooCoarse {
            n_elements: n_shell,
            reason: format!(
                "grid_nx = {} gives fewer than 2 points per axial element",
                grid.nx
            ),
        });
    }
    if grid.ntheta < 2 {
        return Err(Error::invalid("grid_ntheta", "need at least 2 angles"));
    }
    if !(grid.scale >= 0.0 && grid.scale.is_finite()) {
        return Err(Error::invalid("scale", "must be finite and non-negative"));
    }
    let mut points = Vec::new();
    for seg in segments(model, mesh, n, full, opts)? {
        let l = seg.ctx.length;
        for i in 0..per_element {
            let xl = l * i as f64 / (per_element - 1) as f64;
            for j in 0..grid.ntheta {
                let theta = 2.0 * PI * j as f64 / grid.ntheta as f64;
                let d = sample_field(&seg.nodal, &seg.ctx, xl, theta)?;
                points.push(SurfacePoint {
                    element: seg.element,
                    x: seg.x_start + xl,
                    theta,
                    u: grid.scale * d.u,
                    v: grid.scale * d.v,
                    w: grid.scale * d.w,
                    slope: grid.scale * d.phi,
                });
            }
        }
    }
    Ok(ModeShapeSurface {
        n,
        scale: grid.scale,
        radius: model.geometry.radius,
        points,
    })
}

/// Long-format CSV: one line per sample.
pub fn write_modeshape(
    surface: &ModeShapeSurface,
    provenance: &Provenance,
    path: &Path,
) -> Result<()> {
    if surface.points.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut out = String::new();
    for (k, v) in &provenance.entries {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&format!(
        "# mode_n: {}\n# scale: {}\n",
        surface.n, surface.scale
    ));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "element", "x", "theta", "u", "v", "w", "dw_dx", "X", "Y", "Z",
    ])?;
    for p in &surface.points {
        let [x, y, z] = surface.deformed(p);
        let mut rec = vec![p.element.to_string()];
        rec.extend(
            [p.x, p.theta, p.u, p.v, p.w, p.slope, x, y, z]
                .iter()
                .map(|v| format_sig(*v)),
        );
        w.write_record(&rec)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(&String::from_utf8(body).expect("CSV output is UTF-8"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{buckling_mode, mesh_for};
    use crate::crack_spring::SpringStiffness;
    use crate::element::resultants;
    use crate::model::Technique;
    use crate::presets;

    fn solve(model: &ShellModel, n: u32) -> (Mesh, DVector<f64>) {
        let opts = AnalysisOptions::default();
        let mesh = mesh_for(model, 21, Technique::Conversion).unwrap();
        let spring = crack_stiffness(model, &opts).unwrap();
        let row = buckling_mode(model, &mesh, &spring, n, &opts).unwrap();
        (mesh, row.mode)
    }

    #[test]
    fn n2_has_four_sign_changes_around_the_circumference() {
        let model = presets::table1(0.5).unwrap().model.intact();
        let (mesh, mode) = solve(&model, 2);
        let grid = ModeShapeGrid {
            nx: 42,
            ntheta: 73,
            scale: 1.0,
        };
        let s =
            sample_modeshape(&model, &mesh, 2, &mode, &grid, &AnalysisOptions::default()).unwrap();
        // ring with the largest deflection
        let peak = s
            .points
            .iter()
            .max_by(|a, b| a.w.abs().total_cmp(&b.w.abs()))
            .unwrap();
        let ring: Vec<f64> = s
            .points
            .iter()
            .filter(|p| p.x == peak.x && p.element == peak.element)
            .map(|p| p.w)
            .collect();
        assert_eq!(ring.len(), 73);
        let changes = ring.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        assert_eq!(changes, 4);
    }

    #[test]
    fn zero_scale_gives_undeformed_cylinder() {
        let model = presets::table1(0.5).unwrap().model;
        let (mesh, mode) = solve(&model, 1);
        let grid = ModeShapeGrid {
            nx: 42,
            ntheta: 8,
            scale: 0.0,
        };
        let s =
            sample_modeshape(&model, &mesh, 1, &mode, &grid, &AnalysisOptions::default()).unwrap();
        for p in &s.points {
            assert_eq!((p.u, p.v, p.w), (0.0, 0.0, 0.0));
            let [_, y, z] = s.deformed(p);
            assert!(((y * y + z * z).sqrt() - model.geometry.radius).abs() < 1e-9);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let model = presets::table1(0.5).unwrap().model;
        let (mesh, mode) = solve(&model, 1);
        let grid = ModeShapeGrid {
            nx: 21,
            ntheta: 8,
            scale: 1.0,
        };
        let e = sample_modeshape(&model, &mesh, 1, &mode, &grid, &AnalysisOptions::default())
            .unwrap_err();
        assert!(matches!(e, Error::MeshTooCoarse { .. }));
    }

    #[test]
    fn crack_plane_keeps_deflection_and_opens_slope() {
        let model = presets::table1(0.5).unwrap().model;
        let opts = AnalysisOptions::default();
        let (mesh, mode) = solve(&model, 1);
        let grid = ModeShapeGrid {
            nx: 42,
            ntheta: 4,
            scale: 1.0,
        };
        let s = sample_modeshape(&model, &mesh, 1, &mode, &grid, &opts).unwrap();
        let x_c = model.crack.unwrap().x_c;
        let at: Vec<&SurfacePoint> = s
            .points
            .iter()
            .filter(|p| (p.x - x_c).abs() < 1e-9 && p.theta == 0.0)
            .collect();
        assert_eq!(at.len(), 2, "both faces of the crack plane");
        let (top, bottom) = (at[0], at[1]);
        assert!((top.w - bottom.w).abs() < 1e-10 * top.w.abs().max(1e-3));

        // slope jump = -M_x / kappa with kappa per unit circumference
        let e = mesh.crack_element.unwrap();
        let ElementKind::Cracked { x0 } = mesh.elements[e].kind else {
            panic!("conversion mesh")
        };
        let ctx = ElementContext {
            length: mesh.elements[e].length,
            radius: model.geometry.radius,
            thickness: model.geometry.thickness,
            n: 1,
            material: model.material,
        };
        let spring = crack_stiffness(&model, &opts).unwrap();
        let pair = conversion_pair(x0, &ctx, &spring, opts.conversion).unwrap();
        let nodal = Vec8::from_fn(|i, _| mode[4 * e + i]);
        let m_x = resultants(&(pair.c_t * nodal), 1.0, 0.0, &ctx.with_length(x0)).m_x;
        let SpringStiffness::Finite(ks) = spring else {
            panic!("cracked")
        };
        let kappa = ks / model.geometry.circumference();
        let jump = bottom.slope - top.slope;
        assert!(
            (jump + m_x / kappa).abs() < 1e-6 * jump.abs(),
            "{jump} vs {}",
            -m_x / kappa
        );
        assert!(jump.abs() > 1e-6);
    }

    #[test]
    fn writes_long_format_csv() {
        let model = presets::table1(0.5).unwrap().model;
        let (mesh, mode) = solve(&model, 1);
        let grid = ModeShapeGrid {
            nx: 42,
            ntheta: 4,
            scale: DEFAULT_SCALE,
        };
        let s =
            sample_modeshape(&model, &mesh, 1, &mode, &grid, &AnalysisOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("mode.csv");
        write_modeshape(&s, &Provenance::default(), &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("# scale: 10\n"));
        let data = text.lines().filter(|l| !l.starts_with('#')).count();
        // header + 22 segments x 2 points x 4 angles
        assert_eq!(data, 1 + 22 * 2 * 4);
    }
}
