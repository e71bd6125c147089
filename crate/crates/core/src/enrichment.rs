//! Crack embedding.
//!
//! *Conversion*: the cracked element is split at `x0` into a top sub-element
//! (nodes 1, 2) and a bottom one (nodes 3, 4). The middle-node DOFs are
//! eliminated through the interface continuity conditions, giving
//! `u_T = C_T u` and `u_B = C_B u` in terms of the main-node vector
//! `u = [u1, v1, w1, phi1, u4, v4, w4, phi4]`.
//!
//! *Spring set*: the crack is a zero-length element between two coincident
//! nodes with penalty translational springs and the rotational crack spring.

use nalgebra::SMatrix;

use crate::crack_spring::SpringStiffness;
use crate::element::{
    geometric_stiffness_with, resultant_rows, stiffness_with, theta_factor, ElementContext, Mat8,
    Prestress, Row8,
};
use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

/// Default multiplier of the spring-set penalty springs.
pub const DEFAULT_PENALTY_ALPHA: f64 = 1e6;

/// The two conversion matrices of a cracked element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionPair {
    pub c_t: Mat8,
    pub c_b: Mat8,
}

impl ConversionPair {
    /// Row of `C_B` minus row of `C_T` giving the rotation jump `phi3 - phi2`.
    pub fn rotation_jump(&self) -> Row8 {
        self.c_b.row(3) - self.c_t.row(7)
    }
}

/// Source of the conversion matrices used by the solver.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum ConversionMethod {
    /// Closed-form polynomial expressions.
    #[default]
    ClosedForm,
    /// Numerical solve of the continuity conditions.
    Oracle,
}

fn check_offset(x0: f64, l: f64) -> Result<()> {
    if x0 > 0.0 && x0 < l {
        Ok(())
    } else {
        Err(Error::invalid(
            "x0",
            format!("crack offset {x0} must lie strictly inside (0, {l})"),
        ))
    }
}

/// Crack spring per unit circumferential length, `None` when intact.
fn kappa(spring: &SpringStiffness, ctx: &ElementContext) -> Result<Option<f64>> {
    match spring.per_unit_length(2.0 * std::f64::consts::PI * ctx.radius) {
        Some(k) if !(k > 0.0 && k.is_finite()) => Err(Error::invalid(
            "k_s",
            format!("spring stiffness must be positive, got {k}"),
        )),
        other => Ok(other),
    }
}

/// Closed-form conversion matrices; `ctx.length` is the cracked element length.
///
/// Every middle-node entry is a ratio of polynomials that are homogeneous of
/// degree one in `(D, kappa)`. The intact limit keeps only the `kappa`
/// coefficients.
pub fn conversion_matrices(
    x0: f64,
    ctx: &ElementContext,
    spring: &SpringStiffness,
) -> Result<ConversionPair> {
    let l = ctx.length;
    check_offset(x0, l)?;
    let (d, ks) = match kappa(spring, ctx)? {
        Some(k) => (ctx.flexural_rigidity(), k),
        None => (0.0, 1.0),
    };
    let r = ctx.radius;
    let n = ctx.n as f64;
    let v = ctx.material.poisson_ratio;
    let x = x0;
    let (l2, l3, l4) = (l * l, l * l * l, l * l * l * l);
    let (x2, x3) = (x * x, x * x * x);
    let (x4, x5, x6, x7) = (x3 * x, x3 * x2, x3 * x3, x3 * x3 * x);
    let (n2, n3, n4) = (n * n, n * n * n, n * n * n * n);
    let v2 = v * v;
    let (r2, r4) = (r * r, r * r * r * r);

    let chi = l
        * (d * l3 * n4 * v2 * x3 - 3.0 * d * l2 * n4 * v2 * x4 + 3.0 * d * l * n4 * v2 * x5
            - d * n4 * v2 * x6
            + 3.0 * l3 * r4 * ks
            + 12.0 * d * l2 * r4
            - 36.0 * d * l * r4 * x
            + 36.0 * d * r4 * x2);
    if chi == 0.0 || !chi.is_finite() {
        return Err(Error::SingularConversion(format!(
            "chi = {chi} at x0 = {x0}, l = {l}"
        )));
    }

    let w_v1 = d * l4 * n3 * v2 * x3 - 4.0 * d * l3 * n3 * v2 * x4 + 6.0 * d * l2 * n3 * v2 * x5
        - 4.0 * d * l * n3 * v2 * x6
        + d * n3 * v2 * x7
        - 6.0 * d * l3 * r2 * n * v * x2
        + 18.0 * d * l2 * r2 * n * v * x3
        - 18.0 * d * l * r2 * n * v * x4
        + 6.0 * d * r2 * n * v * x5;
    let w_v4 = d * l3 * n3 * v2 * x4 - 3.0 * d * l2 * n3 * v2 * x5 + 3.0 * d * l * n3 * v2 * x6
        - d * n3 * v2 * x7
        - 6.0 * d * l2 * r2 * n * v * x3
        + 12.0 * d * l * r2 * n * v * x4
        - 6.0 * d * r2 * n * v * x5;
    let w_w1 = 6.0 * d * l3 * r2 * n2 * v * x2 - 18.0 * d * l2 * r2 * n2 * v * x3
        + 18.0 * d * l * r2 * n2 * v * x4
        - 6.0 * d * r2 * n2 * v * x5
        + 3.0 * l4 * r4 * ks
        - 9.0 * l2 * r4 * ks * x2
        + 6.0 * l * r4 * ks * x3
        + 12.0 * d * l3 * r4
        - 36.0 * d * l2 * r4 * x
        + 36.0 * d * l * r4 * x2
        - 12.0 * d * r4 * x3;
    let w_w4 = 6.0 * d * l2 * r2 * n2 * v * x3 - 12.0 * d * l * r2 * n2 * v * x4
        + 6.0 * d * r2 * n2 * v * x5
        + 9.0 * l2 * r4 * ks * x2
        - 6.0 * l * r4 * ks * x3
        + 12.0 * d * r4 * x3;
    let w_f1 = 2.0 * d * l3 * r2 * n2 * v * x3 - 6.0 * d * l2 * r2 * n2 * v * x4
        + 6.0 * d * l * r2 * n2 * v * x5
        - 2.0 * d * r2 * n2 * v * x6
        + 3.0 * l4 * r4 * ks * x
        - 6.0 * l3 * r4 * ks * x2
        + 3.0 * l2 * r4 * ks * x3
        + 12.0 * d * l3 * r4 * x
        - 36.0 * d * l2 * r4 * x2
        + 36.0 * d * l * r4 * x3
        - 12.0 * d * r4 * x4;
    let w_f4 = -2.0 * d * l3 * r2 * n2 * v * x3 + 6.0 * d * l2 * r2 * n2 * v * x4
        - 6.0 * d * l * r2 * n2 * v * x5
        + 2.0 * d * r2 * n2 * v * x6
        - 3.0 * l3 * r4 * ks * x2
        + 3.0 * l2 * r4 * ks * x3
        - 12.0 * d * l * r4 * x3
        + 12.0 * d * r4 * x4;

    let f2_v1 = -3.0 * d * l4 * n3 * v2 * x2 + 15.0 * d * l3 * n3 * v2 * x3
        - 27.0 * d * l2 * n3 * v2 * x4
        + 21.0 * d * l * n3 * v2 * x5
        - 6.0 * d * n3 * v2 * x6
        + 24.0 * d * l3 * r2 * n * v * x
        - 78.0 * d * l2 * r2 * n * v * x2
        + 90.0 * d * l * r2 * n * v * x3
        - 36.0 * d * r2 * n * v * x4;
    let f2_v4 = -3.0 * d * l3 * n3 * v2 * x3 + 12.0 * d * l2 * n3 * v2 * x4
        - 15.0 * d * l * n3 * v2 * x5
        + 6.0 * d * n3 * v2 * x6
        + 24.0 * d * l2 * r2 * n * v * x2
        - 54.0 * d * l * r2 * n * v * x3
        + 36.0 * d * r2 * n * v * x4;
    let f2_w1 = 3.0 * d * l4 * n4 * v2 * x2 - 12.0 * d * l3 * n4 * v2 * x3
        + 18.0 * d * l2 * n4 * v2 * x4
        - 12.0 * d * l * n4 * v2 * x5
        + 3.0 * d * n4 * v2 * x6
        - 24.0 * d * l3 * r2 * n2 * v * x
        + 72.0 * d * l2 * r2 * n2 * v * x2
        - 72.0 * d * l * r2 * n2 * v * x3
        + 24.0 * d * r2 * n2 * v * x4
        + 36.0 * l2 * r4 * ks * x
        - 36.0 * l * r4 * ks * x2
        + 36.0 * d * r4 * x2;
    let f2_w4 = -3.0 * d * l2 * n4 * v2 * x4 + 6.0 * d * l * n4 * v2 * x5
        - 3.0 * d * n4 * v2 * x6
        - 18.0 * d * l2 * r2 * n2 * v * x2
        + 36.0 * d * l * r2 * n2 * v * x3
        - 24.0 * d * r2 * n2 * v * x4
        - 36.0 * l2 * r4 * ks * x
        + 36.0 * l * r4 * ks * x2
        - 36.0 * d * r4 * x2;
    let f2_f1 = d * l4 * n4 * v2 * x3 - 4.0 * d * l3 * n4 * v2 * x4 + 6.0 * d * l2 * n4 * v2 * x5
        - 4.0 * d * l * n4 * v2 * x6
        + d * n4 * v2 * x7
        - 12.0 * d * l3 * r2 * n2 * v * x2
        + 36.0 * d * l2 * r2 * n2 * v * x3
        - 36.0 * d * l * r2 * n2 * v * x4
        + 12.0 * d * r2 * n2 * v * x5
        - 6.0 * l4 * r4 * ks
        + 24.0 * l3 * r4 * ks * x
        - 18.0 * l2 * r4 * ks * x2
        - 24.0 * d * l3 * r4
        + 72.0 * d * l2 * r4 * x
        - 72.0 * d * l * r4 * x2
        + 36.0 * d * r4 * x3;
    let f2_f4 = d * l3 * n4 * v2 * x4 - 3.0 * d * l2 * n4 * v2 * x5 + 3.0 * d * l * n4 * v2 * x6
        - d * n4 * v2 * x7
        + 6.0 * d * l3 * r2 * n2 * v * x2
        - 18.0 * d * l2 * r2 * n2 * v * x3
        + 24.0 * d * l * r2 * n2 * v * x4
        - 12.0 * d * r2 * n2 * v * x5
        + 12.0 * l3 * r4 * ks * x
        - 18.0 * l2 * r4 * ks * x2
        + 36.0 * d * l * r4 * x2
        - 36.0 * d * r4 * x3;

    let f3_v1 = -3.0 * d * l4 * n3 * v2 * x2 + 15.0 * d * l3 * n3 * v2 * x3
        - 27.0 * d * l2 * n3 * v2 * x4
        + 21.0 * d * l * n3 * v2 * x5
        - 6.0 * d * n3 * v2 * x6
        - 6.0 * d * l4 * r2 * n * v
        + 30.0 * d * l3 * r2 * n * v * x
        - 78.0 * d * l2 * r2 * n * v * x2
        + 90.0 * d * l * r2 * n * v * x3
        - 36.0 * d * r2 * n * v * x4;
    let f3_v4 = -3.0 * d * l3 * n3 * v2 * x3 + 12.0 * d * l2 * n3 * v2 * x4
        - 15.0 * d * l * n3 * v2 * x5
        + 6.0 * d * n3 * v2 * x6
        - 6.0 * d * l3 * r2 * n * v * x
        + 24.0 * d * l2 * r2 * n * v * x2
        - 54.0 * d * l * r2 * n * v * x3
        + 36.0 * d * r2 * n * v * x4;
    let f3_w1 = 3.0 * d * l4 * n4 * v2 * x2 - 12.0 * d * l3 * n4 * v2 * x3
        + 18.0 * d * l2 * n4 * v2 * x4
        - 12.0 * d * l * n4 * v2 * x5
        + 3.0 * d * n4 * v2 * x6
        + 6.0 * d * l4 * r2 * n2 * v
        - 24.0 * d * l3 * r2 * n2 * v * x
        + 54.0 * d * l2 * r2 * n2 * v * x2
        - 60.0 * d * l * r2 * n2 * v * x3
        + 24.0 * d * r2 * n2 * v * x4
        + 36.0 * l2 * r4 * ks * x
        - 36.0 * l * r4 * ks * x2
        + 36.0 * d * l2 * r4
        - 72.0 * d * l * r4 * x
        + 36.0 * d * r4 * x2;
    let f3_w4 = -3.0 * d * l2 * n4 * v2 * x4 + 6.0 * d * l * n4 * v2 * x5 - 3.0 * d * n4 * v2 * x6
        + 24.0 * d * l * r2 * n2 * v * x3
        - 24.0 * d * r2 * n2 * v * x4
        - 36.0 * l2 * r4 * ks * x
        + 36.0 * l * r4 * ks * x2
        - 36.0 * d * l2 * r4
        + 72.0 * d * l * r4 * x
        - 36.0 * d * r4 * x2;
    let f3_f1 = d * l4 * n4 * v2 * x3 - 4.0 * d * l3 * n4 * v2 * x4 + 6.0 * d * l2 * n4 * v2 * x5
        - 4.0 * d * l * n4 * v2 * x6
        + d * n4 * v2 * x7
        + 6.0 * d * l4 * r2 * n2 * v * x
        - 24.0 * d * l3 * r2 * n2 * v * x2
        + 42.0 * d * l2 * r2 * n2 * v * x3
        - 36.0 * d * l * r2 * n2 * v * x4
        + 12.0 * d * r2 * n2 * v * x5
        - 6.0 * l4 * r4 * ks
        + 24.0 * l3 * r4 * ks * x
        - 18.0 * l2 * r4 * ks * x2
        + 36.0 * d * l2 * r4 * x
        - 72.0 * d * l * r4 * x2
        + 36.0 * d * r4 * x3;
    let f3_f4 = d * l3 * n4 * v2 * x4 - 3.0 * d * l2 * n4 * v2 * x5 + 3.0 * d * l * n4 * v2 * x6
        - d * n4 * v2 * x7
        - 12.0 * d * l2 * r2 * n2 * v * x3
        + 24.0 * d * l * r2 * n2 * v * x4
        - 12.0 * d * r2 * n2 * v * x5
        + 12.0 * l3 * r4 * ks * x
        - 18.0 * l2 * r4 * ks * x2
        + 12.0 * d * l3 * r4
        - 36.0 * d * l2 * r4 * x
        + 36.0 * d * l * r4 * x2
        - 36.0 * d * r4 * x3;

    let wf = 1.0 / chi;
    let ff = -1.0 / (2.0 * chi);
    let s = x0 / l;
    let mut c_t = Mat8::identity();
    for i in 4..8 {
        c_t[(i, i)] = 0.0;
    }
    c_t[(4, 0)] = 1.0 - s;
    c_t[(4, 4)] = s;
    c_t[(5, 1)] = 1.0 - s;
    c_t[(5, 5)] = s;
    let w_row = [0.0, w_v1, w_w1, w_f1, 0.0, w_v4, w_w4, w_f4].map(|e| e * wf);
    let f2_row = [0.0, f2_v1, f2_w1, f2_f1, 0.0, f2_v4, f2_w4, f2_f4].map(|e| e * ff);
    let f3_row = [0.0, f3_v1, f3_w1, f3_f1, 0.0, f3_v4, f3_w4, f3_f4].map(|e| e * ff);
    for j in 0..8 {
        c_t[(6, j)] = w_row[j];
        c_t[(7, j)] = f2_row[j];
    }
    let mut c_b = Mat8::zeros();
    for i in 4..8 {
        c_b[(i, i)] = 1.0;
    }
    for j in 0..8 {
        c_b[(0, j)] = c_t[(4, j)];
        c_b[(1, j)] = c_t[(5, j)];
        c_b[(2, j)] = c_t[(6, j)];
        c_b[(3, j)] = f3_row[j];
    }
    Ok(ConversionPair { c_t, c_b })
}

/// Conversion matrices obtained by solving the eight interface conditions
/// numerically for each unit main-node vector.
///
/// Unknowns are `z = [u2, v2, w2, phi2, u3, v3, w3, phi3]`. Conditions:
/// equal `u`, `v`, `w`; continuous `N_x`, `N_xtheta`, `M_x`, `Q_x`; and the
/// hinge `phi3 - phi2 = -M_x / kappa` (`phi3 = phi2` when intact).
pub fn continuity_oracle(
    x0: f64,
    ctx: &ElementContext,
    spring: &SpringStiffness,
) -> Result<ConversionPair> {
    let l = ctx.length;
    check_offset(x0, l)?;
    let kap = kappa(spring, ctx)?;
    let top = ctx.with_length(x0);
    let bottom = ctx.with_length(l - x0);
    let rt = resultant_rows(x0, &top);
    let rb = resultant_rows(0.0, &bottom);

    // Top sub-element DOFs: [main 0..4, z 0..4]; bottom: [z 4..8, main 4..8].
    let split_t = |row: &Row8| {
        let mut p = Row8::zeros();
        let mut q = Row8::zeros();
        for i in 0..4 {
            p[i] = row[i];
            q[i] = row[4 + i];
        }
        (p, q)
    };
    let split_b = |row: &Row8| {
        let mut p = Row8::zeros();
        let mut q = Row8::zeros();
        for i in 0..4 {
            q[4 + i] = row[i];
            p[4 + i] = row[4 + i];
        }
        (p, q)
    };

    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut rhs = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..3 {
        a[(i, i)] = 1.0;
        a[(i, 4 + i)] = -1.0;
    }
    let pairs = [
        (rt.n_x, rb.n_x),
        (rt.n_xtheta, rb.n_xtheta),
        (rt.m_x, rb.m_x),
        (rt.q_x, rb.q_x),
    ];
    for (k, (t, b)) in pairs.iter().enumerate() {
        let (pt, qt) = split_t(t);
        let (pb, qb) = split_b(b);
        a.set_row(3 + k, &(qt - qb));
        rhs.set_row(3 + k, &(pb - pt));
    }
    let mut hinge_a = Row8::zeros();
    hinge_a[3] = 1.0;
    hinge_a[7] = -1.0;
    let mut hinge_rhs = Row8::zeros();
    if let Some(k) = kap {
        let (pt, qt) = split_t(&rt.m_x);
        hinge_a -= qt / k;
        hinge_rhs = pt / k;
    }
    a.set_row(7, &hinge_a);
    rhs.set_row(7, &hinge_rhs);

    // Equilibrate rows; the conditions mix very different units.
    for i in 0..8 {
        let s = a.row(i).amax();
        if s == 0.0 {
            return Err(Error::SingularConversion(format!(
                "empty continuity row {i}"
            )));
        }
        a.row_mut(i).scale_mut(1.0 / s);
        rhs.row_mut(i).scale_mut(1.0 / s);
    }
    let lu = a.lu();
    let z = lu.solve(&rhs).ok_or_else(|| {
        Error::SingularConversion(format!("continuity system at x0 = {x0}, l = {l}"))
    })?;
    if !z.iter().all(|v| v.is_finite()) {
        return Err(Error::SingularConversion(
            "non-finite continuity solution".into(),
        ));
    }
    let mut c_t = Mat8::zeros();
    let mut c_b = Mat8::zeros();
    for i in 0..4 {
        c_t[(i, i)] = 1.0;
        c_b[(4 + i, 4 + i)] = 1.0;
        c_t.set_row(4 + i, &z.row(i));
        c_b.set_row(i, &z.row(4 + i));
    }
    Ok(ConversionPair { c_t, c_b })
}

pub fn conversion_pair(
    x0: f64,
    ctx: &ElementContext,
    spring: &SpringStiffness,
    method: ConversionMethod,
) -> Result<ConversionPair> {
    match method {
        ConversionMethod::ClosedForm => conversion_matrices(x0, ctx, spring),
        ConversionMethod::Oracle => continuity_oracle(x0, ctx, spring),
    }
}

/// Enriched stiffness of the cracked element,
/// `C_T^T k_T C_T + C_B^T k_B C_B + theta_factor R kappa d d^T`.
pub fn cracked_stiffness(
    x0: f64,
    ctx: &ElementContext,
    spring: &SpringStiffness,
    pair: &ConversionPair,
    rule: GaussRule,
) -> Result<Mat8> {
    check_offset(x0, ctx.length)?;
    let kt = stiffness_with(&ctx.with_length(x0), rule);
    let kb = stiffness_with(&ctx.with_length(ctx.length - x0), rule);
    let mut k = pair.c_t.transpose() * kt * pair.c_t + pair.c_b.transpose() * kb * pair.c_b;
    if let Some(kap) = kappa(spring, ctx)? {
        let d = pair.rotation_jump();
        k += d.transpose() * d * (theta_factor(ctx.n) * ctx.radius * kap);
    }
    Ok((k + k.transpose()) * 0.5)
}

/// Enriched geometric stiffness, `C_T^T kG_T C_T + C_B^T kG_B C_B`.
pub fn cracked_geometric_stiffness(
    x0: f64,
    ctx: &ElementContext,
    pair: &ConversionPair,
    prestress: &Prestress,
    rule: GaussRule,
) -> Result<Mat8> {
    check_offset(x0, ctx.length)?;
    if prestress.is_zero() {
        return Ok(Mat8::zeros());
    }
    let gt = geometric_stiffness_with(&ctx.with_length(x0), prestress, rule);
    let gb = geometric_stiffness_with(&ctx.with_length(ctx.length - x0), prestress, rule);
    let g = pair.c_t.transpose() * gt * pair.c_t + pair.c_b.transpose() * gb * pair.c_b;
    Ok((g + g.transpose()) * 0.5)
}

/// Diagonal spring constants of the zero-length crack element, in element
/// matrix units (circumferential integral included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringSetParams {
    pub k_u: f64,
    pub k_v: f64,
    pub k_w: f64,
    pub k_phi: f64,
}

impl SpringSetParams {
    /// Penalties `alpha * max_diag` on the translations; the rotational entry
    /// is the crack spring or, for an intact section, another penalty.
    pub fn for_crack(
        spring: &SpringStiffness,
        ctx: &ElementContext,
        adjacent_max_diagonal: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && adjacent_max_diagonal > 0.0) {
            return Err(Error::invalid(
                "solver.penalty_alpha",
                "penalty must be positive",
            ));
        }
        let penalty = alpha * adjacent_max_diagonal;
        let k_phi = match kappa(spring, ctx)? {
            Some(k) => theta_factor(ctx.n) * ctx.radius * k,
            None => penalty,
        };
        Ok(SpringSetParams {
            k_u: penalty,
            k_v: penalty,
            k_w: penalty,
            k_phi,
        })
    }
}

/// `[[K, -K], [-K, K]]` with `K = diag(k_u, k_v, k_w, k_phi)`.
pub fn spring_set_stiffness(params: &SpringSetParams) -> Mat8 {
    let diag = [params.k_u, params.k_v, params.k_w, params.k_phi];
    let mut k = Mat8::zeros();
    for (i, &s) in diag.iter().enumerate() {
        k[(i, i)] = s;
        k[(i + 4, i + 4)] = s;
        k[(i, i + 4)] = -s;
        k[(i + 4, i)] = -s;
    }
    k
}

/// Row-relative magnitude below which an entry counts as zero.
pub const ZERO_FLOOR: f64 = 1e-9;

/// One entry of the closed-form vs oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryDiscrepancy {
    /// `'T'` or `'B'`.
    pub matrix: char,
    pub row: usize,
    pub col: usize,
    pub closed_form: f64,
    pub oracle: f64,
    pub rel_error: f64,
}

/// Comparison of the two conversion constructions at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionComparison {
    pub x0_over_l: f64,
    pub n: u32,
    /// Total spring stiffness, `None` for intact.
    pub k_s: Option<f64>,
    pub entries: Vec<EntryDiscrepancy>,
}

impl ConversionComparison {
    pub fn max_rel_error(&self) -> f64 {
        self.entries.iter().map(|e| e.rel_error).fold(0.0, f64::max)
    }
}

/// Entrywise relative error. The denominator is floored at `1e-9` times the
/// largest entry of the row, so round-off in exact zeros is not amplified.
pub fn compare_conversion(
    x0: f64,
    ctx: &ElementContext,
    spring: &SpringStiffness,
) -> Result<ConversionComparison> {
    let closed = conversion_matrices(x0, ctx, spring)?;
    let oracle = continuity_oracle(x0, ctx, spring)?;
    let mut entries = Vec::with_capacity(128);
    for (name, c, o) in [
        ('T', &closed.c_t, &oracle.c_t),
        ('B', &closed.c_b, &oracle.c_b),
    ] {
        for i in 0..8 {
            let scale = o.row(i).amax().max(c.row(i).amax());
            for j in 0..8 {
                let (cv, ov) = (c[(i, j)], o[(i, j)]);
                let denom = ov.abs().max(ZERO_FLOOR * scale).max(f64::MIN_POSITIVE);
                entries.push(EntryDiscrepancy {
                    matrix: name,
                    row: i,
                    col: j,
                    closed_form: cv,
                    oracle: ov,
                    rel_error: (cv - ov).abs() / denom,
                });
            }
        }
    }
    Ok(ConversionComparison {
        x0_over_l: x0 / ctx.length,
        n: ctx.n,
        k_s: spring.value(),
        entries,
    })
}

/// Finite spring values of the standard comparison grid, as multiples of the
/// element bending scale `12 D / l` per unit circumference.
pub const COMPARISON_SPRING_FACTORS: [f64; 3] = [0.1, 1.0, 10.0];

/// Runs the comparison over `x0/l` x `n` x spring values (finite and intact)
/// for the given section. Finite springs are chosen relative to the element
/// bending stiffness so every grid point exercises the coupling terms.
pub fn comparison_grid(
    base: &ElementContext,
    x0_ratios: &[f64],
    modes: &[u32],
    spring_factors: &[f64],
) -> Result<Vec<ConversionComparison>> {
    let b = 2.0 * std::f64::consts::PI * base.radius;
    let mut out = Vec::new();
    for &s in x0_ratios {
        for &n in modes {
            let ctx = ElementContext { n, ..*base };
            let reference = 12.0 * ctx.flexural_rigidity() / ctx.length * b;
            let mut springs: Vec<SpringStiffness> = spring_factors
                .iter()
                .map(|f| SpringStiffness::Finite(f * reference))
                .collect();
            springs.push(SpringStiffness::Intact);
            for sp in springs {
                out.push(compare_conversion(s * ctx.length, &ctx, &sp)?);
            }
        }
    }
    Ok(out)
}

/// Writes a comparison as CSV rows
/// `x0_over_l,n,k_s,matrix,row,col,closed_form,oracle,rel_error`.
pub fn write_comparison_csv<W: std::io::Write>(
    out: W,
    comparisons: &[ConversionComparison],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "x0_over_l",
        "n",
        "k_s",
        "matrix",
        "row",
        "col",
        "closed_form",
        "oracle",
        "rel_error",
    ])?;
    for c in comparisons {
        let ks = c
            .k_s
            .map_or_else(|| "intact".to_string(), |k| format!("{k:.9e}"));
        for e in &c.entries {
            w.write_record([
                format!("{}", c.x0_over_l),
                c.n.to_string(),
                ks.clone(),
                e.matrix.to_string(),
                (e.row + 1).to_string(),
                (e.col + 1).to_string(),
                format!("{:.15e}", e.closed_form),
                format!("{:.15e}", e.oracle),
                format!("{:.3e}", e.rel_error),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{shape_at, stiffness, Vec8, W_DOFS};
    use crate::model::Material;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const R: f64 = 16.522711641858304;

    fn ctx(n: u32, l: f64) -> ElementContext {
        ElementContext::new(l, R, 0.2, n, Material::steel()).unwrap()
    }

    fn finite(ctx: &ElementContext, factor: f64) -> SpringStiffness {
        SpringStiffness::Finite(
            factor * 12.0 * ctx.flexural_rigidity() / ctx.length
                * 2.0
                * std::f64::consts::PI
                * ctx.radius,
        )
    }

    #[test]
    fn identity_blocks_and_shared_rows() {
        let c = ctx(3, 0.75);
        let p = conversion_matrices(0.3, &c, &finite(&c, 1.0)).unwrap();
        for i in 0..4 {
            for j in 0..8 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_eq!(p.c_t[(i, j)], e);
                assert_eq!(p.c_b[(4 + i, j)], if 4 + i == j { 1.0 } else { 0.0 });
            }
        }
        assert_relative_eq!(p.c_t[(4, 0)], 1.0 - 0.3 / 0.75);
        assert_relative_eq!(p.c_t[(4, 4)], 0.3 / 0.75);
        for j in 0..8 {
            assert_eq!(p.c_t[(6, j)], p.c_b[(2, j)]);
            assert_eq!(p.c_t[(4, j)], p.c_b[(0, j)]);
            assert_eq!(p.c_t[(5, j)], p.c_b[(1, j)]);
        }
    }

    #[test]
    fn intact_limit_has_no_rotation_jump() {
        for n in [0, 1, 6] {
            let c = ctx(n, 0.75);
            let p = conversion_matrices(0.4, &c, &SpringStiffness::Intact).unwrap();
            let jump = p.rotation_jump();
            assert!(
                jump.amax() < 1e-12 * p.c_t.row(7).amax().max(1.0),
                "n = {n}"
            );
            let o = continuity_oracle(0.4, &c, &SpringStiffness::Intact).unwrap();
            assert!((p.c_t - o.c_t).amax() < 1e-10);
            assert!((p.c_b - o.c_b).amax() < 1e-10);
        }
    }

    #[test]
    fn intact_limit_is_continuous_in_spring() {
        let c = ctx(2, 0.75);
        let stiff = conversion_matrices(0.3, &c, &finite(&c, 1e9)).unwrap();
        let intact = conversion_matrices(0.3, &c, &SpringStiffness::Intact).unwrap();
        assert!((stiff.c_t - intact.c_t).amax() < 1e-7);
    }

    #[test]
    fn intact_midpoint_membrane_rows() {
        let c = ctx(1, 0.8);
        let o = continuity_oracle(0.4, &c, &SpringStiffness::Intact).unwrap();
        let expected = [0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0];
        for (j, e) in expected.iter().enumerate() {
            assert!((o.c_t[(4, j)] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn intact_rows_reproduce_single_cubic() {
        // With no crack the middle node sits on the parent cubic.
        let c = ctx(0, 0.9);
        let x0 = 0.35;
        let p = conversion_matrices(x0, &c, &SpringStiffness::Intact).unwrap();
        let s = shape_at(x0, c.length);
        for (k, &j) in W_DOFS.iter().enumerate() {
            assert_relative_eq!(p.c_t[(6, j)], s.h[k], epsilon = 1e-12);
            assert_relative_eq!(p.c_t[(7, j)], s.dh[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn intact_cracked_stiffness_equals_standard() {
        for n in [0, 1, 4] {
            let c = ctx(n, 0.9);
            let p = conversion_matrices(0.35, &c, &SpringStiffness::Intact).unwrap();
            let k =
                cracked_stiffness(0.35, &c, &SpringStiffness::Intact, &p, GaussRule::Four).unwrap();
            let k0 = stiffness(&c);
            assert!(
                (k - k0).norm() < 1e-9 * k0.norm(),
                "n = {n}: {}",
                (k - k0).norm() / k0.norm()
            );
        }
    }

    #[test]
    fn zero_mode_drops_coupling_terms() {
        let c = ctx(0, 0.9);
        let p = conversion_matrices(0.2, &c, &finite(&c, 0.5)).unwrap();
        for row in [6, 7] {
            assert_eq!(p.c_t[(row, 1)], 0.0);
            assert_eq!(p.c_t[(row, 5)], 0.0);
        }
    }

    #[test]
    fn closed_form_matches_oracle_on_grid() {
        let base = ctx(1, 16.0 * std::f64::consts::PI / 21.0);
        let grid = comparison_grid(
            &base,
            &[0.2, 0.5, 0.8],
            &[0, 1, 5, 10],
            &COMPARISON_SPRING_FACTORS,
        )
        .unwrap();
        assert_eq!(grid.len(), 3 * 4 * 4);
        for c in &grid {
            assert!(
                c.max_rel_error() < 1e-8,
                "x0/l={} n={} ks={:?}: {}",
                c.x0_over_l,
                c.n,
                c.k_s,
                c.max_rel_error()
            );
        }
    }

    #[test]
    fn spring_set_structure() {
        let p = SpringSetParams {
            k_u: 10.0,
            k_v: 20.0,
            k_w: 30.0,
            k_phi: 4.0,
        };
        let k = spring_set_stiffness(&p);
        assert_eq!(k, k.transpose());
        let t = Vec8::from_column_slice(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(k * t, Vec8::zeros());
        let eig = k.symmetric_eigen();
        let zeros = eig.eigenvalues.iter().filter(|v| v.abs() < 1e-12).count();
        assert_eq!(zeros, 4);
        assert!(eig.eigenvalues.iter().all(|&v| v > -1e-12));
    }

    #[test]
    fn cracked_geometric_stiffness_zero_and_symmetric() {
        let c = ctx(3, 0.7);
        let sp = finite(&c, 0.3);
        let p = conversion_matrices(0.2, &c, &sp).unwrap();
        let z = cracked_geometric_stiffness(0.2, &c, &p, &Prestress::default(), GaussRule::Four)
            .unwrap();
        assert_eq!(z, Mat8::zeros());
        let g = cracked_geometric_stiffness(0.2, &c, &p, &Prestress::axial(-1.0), GaussRule::Four)
            .unwrap();
        assert!((g - g.transpose()).norm() <= 1e-12 * g.norm());
        let k = cracked_stiffness(0.2, &c, &sp, &p, GaussRule::Four).unwrap();
        assert!((k - k.transpose()).norm() <= 1e-12 * k.norm());
    }

    #[test]
    fn rejects_offset_on_boundary() {
        let c = ctx(1, 0.7);
        assert!(conversion_matrices(0.0, &c, &SpringStiffness::Intact).is_err());
        assert!(continuity_oracle(0.7, &c, &SpringStiffness::Intact).is_err());
    }

    proptest! {
        #[test]
        fn closed_form_matches_oracle_random(s in 0.05f64..0.95, n in 0u32..16, lf in -2.0f64..3.0) {
            let c = ctx(n, 0.75);
            let sp = finite(&c, 10f64.powf(lf));
            let cmp = compare_conversion(s * c.length, &c, &sp).unwrap();
            prop_assert!(cmp.max_rel_error() < 1e-8, "{}", cmp.max_rel_error());
        }

        #[test]
        fn softening_dominates(s in 0.1f64..0.9, n in 0u32..10, lf in -1.0f64..2.0) {
            // The conversion kinematics come from resultant continuity rather
            // than energy minimization, so the Loewner order holds only up to
            // a small indefinite part.
            let c = ctx(n, 0.75);
            let x0 = s * c.length;
            let k_of = |sp: SpringStiffness| {
                let p = conversion_matrices(x0, &c, &sp).unwrap();
                cracked_stiffness(x0, &c, &sp, &p, GaussRule::Four).unwrap()
            };
            let hi = finite(&c, 10f64.powf(lf));
            let lo = hi.scaled(0.3);
            let ki = k_of(SpringStiffness::Intact);
            let kh = k_of(hi);
            let kl = k_of(lo);
            for d in [ki - kh, kh - kl] {
                let e = d.symmetric_eigen().eigenvalues;
                prop_assert!(e.max() > 0.0);
                prop_assert!(-e.min() < 0.05 * e.max());
                let idx = W_DOFS;
                let dw = nalgebra::SMatrix::<f64, 4, 4>::from_fn(|i, j| d[(idx[i], idx[j])]);
                let ew = dw.symmetric_eigen().eigenvalues;
                prop_assert!(-ew.min() < 1e-3 * ew.max());
            }
        }
    }
}
