//! Two-node ring-harmonic shell element with eight DOFs
//! `(u1, v1, w1, phi1, u2, v2, w2, phi2)`.
//!
//! Displacements follow `u = u_e cos(n theta)`, `v = v_e sin(n theta)`,
//! `w = w_e cos(n theta)` with `phi = dw/dx`; `w` is positive inward. Axial
//! and circumferential displacements are interpolated linearly, `w` by cubic
//! Hermite polynomials. The circumferential integral is carried out
//! analytically and appears as [`theta_factor`].

use std::f64::consts::PI;

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::model::Material;
use crate::quadrature::GaussRule;

pub type Mat8 = SMatrix<f64, 8, 8>;
pub type Vec8 = SVector<f64, 8>;
pub type Mat6x8 = SMatrix<f64, 6, 8>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Row8 = SMatrix<f64, 1, 8>;

/// Local indices of the DOFs carried by the linear (u, v) and cubic (w, phi)
/// interpolants.
pub const U_DOFS: [usize; 2] = [0, 4];
pub const V_DOFS: [usize; 2] = [1, 5];
pub const W_DOFS: [usize; 4] = [2, 3, 6, 7];

/// Everything an element needs to build its matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementContext {
    pub length: f64,
    pub radius: f64,
    pub thickness: f64,
    /// Circumferential mode number.
    pub n: u32,
    pub material: Material,
}

impl ElementContext {
    pub fn new(
        length: f64,
        radius: f64,
        thickness: f64,
        n: u32,
        material: Material,
    ) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(
                "element.length",
                format!("must be positive, got {length}"),
            ));
        }
        Ok(ElementContext {
            length,
            radius,
            thickness,
            n,
            material,
        })
    }

    /// Same section and mode, different length.
    pub fn with_length(&self, length: f64) -> ElementContext {
        ElementContext { length, ..*self }
    }

    pub fn flexural_rigidity(&self) -> f64 {
        let nu = self.material.poisson_ratio;
        self.material.youngs_modulus * self.thickness.powi(3) / (12.0 * (1.0 - nu * nu))
    }

    /// Membrane rigidity `E h / (1 - nu^2)`.
    pub fn membrane_rigidity(&self) -> f64 {
        let nu = self.material.poisson_ratio;
        self.material.youngs_modulus * self.thickness / (1.0 - nu * nu)
    }
}

/// `integral_0^{2 pi} cos^2(n theta) d theta`: `pi` for `n >= 1`, `2 pi` for `n = 0`.
pub fn theta_factor(n: u32) -> f64 {
    if n == 0 {
        2.0 * PI
    } else {
        PI
    }
}

/// Shape functions and their x-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeValues {
    pub n: [f64; 2],
    pub dn: [f64; 2],
    pub h: [f64; 4],
    pub dh: [f64; 4],
    pub ddh: [f64; 4],
    pub dddh: [f64; 4],
}

/// Shape functions at local coordinate `xi` in [-1, 1], `x = l/2 (1 + xi)`.
pub fn shape_values(xi: f64, l: f64) -> ShapeValues {
    debug_assert!((-1.0..=1.0).contains(&xi));
    shape_at(0.5 * l * (1.0 + xi), l)
}

/// Shape functions at axial position `x` in [0, l].
pub fn shape_at(x: f64, l: f64) -> ShapeValues {
    let l2 = l * l;
    let l3 = l2 * l;
    let x2 = x * x;
    let x3 = x2 * x;
    ShapeValues {
        n: [1.0 - x / l, x / l],
        dn: [-1.0 / l, 1.0 / l],
        h: [
            (2.0 * x3 - 3.0 * x2 * l + l3) / l3,
            (x3 - 2.0 * x2 * l + x * l2) / l2,
            (-2.0 * x3 + 3.0 * x2 * l) / l3,
            (x3 - x2 * l) / l2,
        ],
        dh: [
            (6.0 * x2 - 6.0 * x * l) / l3,
            (3.0 * x2 - 4.0 * x * l + l2) / l2,
            (-6.0 * x2 + 6.0 * x * l) / l3,
            (3.0 * x2 - 2.0 * x * l) / l2,
        ],
        ddh: [
            (12.0 * x - 6.0 * l) / l3,
            (6.0 * x - 4.0 * l) / l2,
            (-12.0 * x + 6.0 * l) / l3,
            (6.0 * x - 2.0 * l) / l2,
        ],
        dddh: [12.0 / l3, 6.0 / l2, -12.0 / l3, 6.0 / l2],
    }
}

/// Row vectors extracting interpolated field amplitudes (without the
/// harmonic factor) from the element DOF vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FieldRows {
    pub u: Row8,
    pub v: Row8,
    pub w: Row8,
    pub du: Row8,
    pub dv: Row8,
    pub dw: Row8,
    pub ddw: Row8,
    pub dddw: Row8,
}

pub(crate) fn field_rows(x: f64, l: f64) -> FieldRows {
    let s = shape_at(x, l);
    let lin = |vals: [f64; 2], dofs: [usize; 2]| {
        let mut r = Row8::zeros();
        r[dofs[0]] = vals[0];
        r[dofs[1]] = vals[1];
        r
    };
    let cub = |vals: [f64; 4]| {
        let mut r = Row8::zeros();
        for (k, &d) in W_DOFS.iter().enumerate() {
            r[d] = vals[k];
        }
        r
    };
    FieldRows {
        u: lin(s.n, U_DOFS),
        v: lin(s.n, V_DOFS),
        w: cub(s.h),
        du: lin(s.dn, U_DOFS),
        dv: lin(s.dn, V_DOFS),
        dw: cub(s.dh),
        ddw: cub(s.ddh),
        dddw: cub(s.dddh),
    }
}

/// Rows giving the harmonic amplitudes of the interface resultants used by
/// the crack continuity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ResultantRows {
    pub n_x: Row8,
    pub n_xtheta: Row8,
    pub m_x: Row8,
    pub q_x: Row8,
}

pub(crate) fn resultant_rows(x: f64, ctx: &ElementContext) -> ResultantRows {
    let f = field_rows(x, ctx.length);
    let r = ctx.radius;
    let n = ctx.n as f64;
    let nu = ctx.material.poisson_ratio;
    let c = ctx.membrane_rigidity();
    let d = ctx.flexural_rigidity();
    ResultantRows {
        n_x: (f.du + (f.v * n - f.w) * (nu / r)) * c,
        n_xtheta: (f.dv - f.u * (n / r)) * (c * (1.0 - nu) / 2.0),
        m_x: (f.ddw + (f.v * n - f.w * (n * n)) * (nu / (r * r))) * (-d),
        q_x: (f.dddw + (f.dv * n - f.dw * (n * n)) * (nu / (r * r))) * (-d),
    }
}

/// Strain-displacement matrix with rows
/// `(eps_x, eps_theta, gamma_xtheta, kappa_x, kappa_theta, kappa_xtheta)`.
///
/// Harmonic factors are not included. For `n = 0` the shear and twist rows
/// vanish since they multiply `sin(0)`.
pub fn strain_displacement(xi: f64, ctx: &ElementContext) -> Mat6x8 {
    strain_displacement_at(0.5 * ctx.length * (1.0 + xi), ctx)
}

pub(crate) fn strain_displacement_at(x: f64, ctx: &ElementContext) -> Mat6x8 {
    let s = shape_at(x, ctx.length);
    let r = ctx.radius;
    let n = ctx.n as f64;
    let mut b = Mat6x8::zeros();
    for k in 0..2 {
        let (iu, iv) = (U_DOFS[k], V_DOFS[k]);
        b[(0, iu)] = s.dn[k];
        b[(1, iv)] = n / r * s.n[k];
        b[(2, iu)] = -n / r * s.n[k];
        b[(2, iv)] = s.dn[k];
        b[(4, iv)] = n / (r * r) * s.n[k];
        b[(5, iv)] = s.dn[k] / r;
    }
    for (k, &iw) in W_DOFS.iter().enumerate() {
        b[(1, iw)] = -s.h[k] / r;
        b[(3, iw)] = s.ddh[k];
        b[(4, iw)] = -n * n / (r * r) * s.h[k];
        b[(5, iw)] = -n / r * s.dh[k];
    }
    if ctx.n == 0 {
        b.row_mut(2).fill(0.0);
        b.row_mut(5).fill(0.0);
    }
    b
}

/// Constitutive matrix in strain-displacement row order.
pub fn constitutive(ctx: &ElementContext) -> Mat6 {
    let nu = ctx.material.poisson_ratio;
    let c = ctx.membrane_rigidity();
    let d = ctx.flexural_rigidity();
    let mut m = Mat6::zeros();
    m[(0, 0)] = c;
    m[(1, 1)] = c;
    m[(0, 1)] = nu * c;
    m[(1, 0)] = nu * c;
    m[(2, 2)] = c * (1.0 - nu) / 2.0;
    m[(3, 3)] = d;
    m[(4, 4)] = d;
    m[(3, 4)] = nu * d;
    m[(4, 3)] = nu * d;
    m[(5, 5)] = 2.0 * d * (1.0 - nu);
    m
}

/// Membrane prestress resultants of the pre-buckled state \[N/m\].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prestress {
    pub n_x0: f64,
    pub n_theta0: f64,
    /// Drops out after circumferential integration of a single harmonic.
    pub n_xtheta0: f64,
}

impl Prestress {
    /// Uniform axial resultant; negative in compression.
    pub fn axial(n_x0: f64) -> Self {
        Prestress {
            n_x0,
            ..Default::default()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.n_x0 == 0.0 && self.n_theta0 == 0.0 && self.n_xtheta0 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMatrices {
    pub k: Mat8,
    pub m: Mat8,
    pub k_g: Mat8,
}

pub fn stiffness(ctx: &ElementContext) -> Mat8 {
    stiffness_with(ctx, GaussRule::default())
}

pub fn stiffness_with(ctx: &ElementContext, rule: GaussRule) -> Mat8 {
    let dm = constitutive(ctx);
    let scale = theta_factor(ctx.n) * ctx.radius * 0.5 * ctx.length;
    let (xs, ws) = rule.points();
    let mut k = Mat8::zeros();
    for (&xi, &w) in xs.iter().zip(ws) {
        let b = strain_displacement(xi, ctx);
        k += b.transpose() * dm * b * (w * scale);
    }
    symmetrize(k)
}

/// Rows of the displacement interpolation `(u, v, w)`; the `v` row is zero
/// for `n = 0`.
fn displacement_interpolation(xi: f64, ctx: &ElementContext) -> SMatrix<f64, 3, 8> {
    let f = field_rows(0.5 * ctx.length * (1.0 + xi), ctx.length);
    let mut nm = SMatrix::<f64, 3, 8>::zeros();
    nm.set_row(0, &f.u);
    if ctx.n != 0 {
        nm.set_row(1, &f.v);
    }
    nm.set_row(2, &f.w);
    nm
}

/// Consistent mass matrix.
pub fn mass(ctx: &ElementContext) -> Mat8 {
    mass_with(ctx, GaussRule::default())
}

pub fn mass_with(ctx: &ElementContext, rule: GaussRule) -> Mat8 {
    let scale =
        ctx.material.density * ctx.thickness * theta_factor(ctx.n) * ctx.radius * 0.5 * ctx.length;
    let (xs, ws) = rule.points();
    let mut m = Mat8::zeros();
    for (&xi, &w) in xs.iter().zip(ws) {
        let nm = displacement_interpolation(xi, ctx);
        m += nm.transpose() * nm * (w * scale);
    }
    symmetrize(m)
}

pub fn geometric_stiffness(ctx: &ElementContext, prestress: &Prestress) -> Mat8 {
    geometric_stiffness_with(ctx, prestress, GaussRule::default())
}

pub fn geometric_stiffness_with(
    ctx: &ElementContext,
    prestress: &Prestress,
    rule: GaussRule,
) -> Mat8 {
    if prestress.is_zero() {
        return Mat8::zeros();
    }
    let scale = theta_factor(ctx.n) * ctx.radius * 0.5 * ctx.length;
    let hoop = (ctx.n as f64 / ctx.radius).powi(2);
    let (xs, ws) = rule.points();
    let mut kg = Mat8::zeros();
    for (&xi, &w) in xs.iter().zip(ws) {
        let f = field_rows(0.5 * ctx.length * (1.0 + xi), ctx.length);
        let axial = f.dw.transpose() * f.dw * prestress.n_x0;
        let circ = f.w.transpose() * f.w * (prestress.n_theta0 * hoop);
        kg += (axial + circ) * (w * scale);
    }
    symmetrize(kg)
}

pub fn element_matrices(
    ctx: &ElementContext,
    prestress: &Prestress,
    rule: GaussRule,
) -> ElementMatrices {
    ElementMatrices {
        k: stiffness_with(ctx, rule),
        m: mass_with(ctx, rule),
        k_g: geometric_stiffness_with(ctx, prestress, rule),
    }
}

/// Stress resultants at a point of the element.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Resultants {
    pub n_x: f64,
    pub n_theta: f64,
    pub n_xtheta: f64,
    pub m_x: f64,
    pub m_theta: f64,
    pub m_xtheta: f64,
    /// `dM_x/dx`, neglecting the twisting moment.
    pub q_x: f64,
}

pub fn resultants(nodal: &Vec8, xi: f64, theta: f64, ctx: &ElementContext) -> Resultants {
    let x = 0.5 * ctx.length * (1.0 + xi);
    let f = field_rows(x, ctx.length);
    let ev = |r: &Row8| (r * nodal)[0];
    let (u, v, w) = (ev(&f.u), ev(&f.v), ev(&f.w));
    let (du, dv, dw, ddw, dddw) = (ev(&f.du), ev(&f.dv), ev(&f.dw), ev(&f.ddw), ev(&f.dddw));
    let r = ctx.radius;
    let n = ctx.n as f64;
    let nu = ctx.material.poisson_ratio;
    let c = ctx.membrane_rigidity();
    let d = ctx.flexural_rigidity();
    let cs = (n * theta).cos();
    let sn = (n * theta).sin();
    // circumferential terms: dv/dtheta -> n v, d2w/dtheta2 -> -n^2 w
    let eps_theta = (n * v - w) / r;
    let k_theta = (n * v - n * n * w) / (r * r);
    Resultants {
        n_x: c * (du + nu * eps_theta) * cs,
        n_theta: c * (eps_theta + nu * du) * cs,
        n_xtheta: c * (1.0 - nu) / 2.0 * (dv - n * u / r) * sn,
        m_x: -d * (ddw + nu * k_theta) * cs,
        m_theta: -d * (k_theta + nu * ddw) * cs,
        m_xtheta: -d * (1.0 - nu) / r * (dv - n * dw) * sn,
        q_x: -d * (dddw + nu * (n * dv - n * n * dw) / (r * r)) * cs,
    }
}

/// Displacements `(u, v, w, phi)` at axial position `x` and angle `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Displacements {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub phi: f64,
}

pub fn sample_field(
    nodal: &Vec8,
    ctx: &ElementContext,
    x: f64,
    theta: f64,
) -> Result<Displacements> {
    let l = ctx.length;
    let slack = 1e-12 * l;
    if !(x >= -slack && x <= l + slack) {
        return Err(Error::invalid(
            "x",
            format!("{x} lies outside the element [0, {l}]"),
        ));
    }
    let f = field_rows(x.clamp(0.0, l), l);
    let n = ctx.n as f64;
    let cs = (n * theta).cos();
    let sn = (n * theta).sin();
    Ok(Displacements {
        u: (f.u * nodal)[0] * cs,
        v: (f.v * nodal)[0] * sn,
        w: (f.w * nodal)[0] * cs,
        phi: (f.dw * nodal)[0] * cs,
    })
}

fn symmetrize(m: Mat8) -> Mat8 {
    (m + m.transpose()) * 0.5
}
