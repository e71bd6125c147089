//! Symmetric-definite generalized eigenproblems for buckling and vibration.
//!
//! Buckling `(K + lambda K_G) x = 0` is solved as the pencil `(-K_G, K)`:
//! with `K = L L^T`, the largest eigenvalue `mu` of `L^-1 (-K_G) L^-T` gives
//! `lambda = 1 / mu`. Vibration `(K - omega^2 M) x = 0` uses `M = L L^T`.
//!
//! Residuals are relative to `||K x||`. Penalty springs make some terms of
//! `K x` cancel to many digits, so the check accepts the larger of the
//! requested tolerance and a margin over the rounding floor
//! `eps || |K| |x| + |lambda| |K_G| |x| || / ||K x||`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// One eigenpair with its relative residual.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    /// Load factor `lambda` (buckling) or `omega^2` \[rad^2/s^2\] (vibration).
    pub value: f64,
    /// Mode over the active DOFs, scaled to unit maximum `|w|` with that
    /// entry positive.
    pub vector: DVector<f64>,
    pub residual: f64,
    /// Rounding floor of `residual` for this vector in double precision.
    pub attainable: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions<'a> {
    pub residual_tol: f64,
    /// Indices used for normalization; all entries when `None`.
    pub w_dofs: Option<&'a [usize]>,
}

impl Default for EigenOptions<'_> {
    fn default() -> Self {
        EigenOptions {
            residual_tol: DEFAULT_RESIDUAL_TOL,
            w_dofs: None,
        }
    }
}

fn cholesky(a: &DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    a.clone().cholesky().ok_or(Error::NotPositiveDefinite(what))
}

/// Scales to unit max `|x_i|` over `dofs`, making that entry positive. Ties
/// go to the lowest index.
pub fn normalize_mode(x: &mut DVector<f64>, dofs: Option<&[usize]>) {
    let pick = |i: usize| x[i];
    let mut best = (0usize, 0.0f64);
    let mut visit = |i: usize| {
        let v = pick(i);
        if v.abs() > best.1.abs() * (1.0 + 1e-12) {
            best = (i, v);
        }
    };
    match dofs {
        Some(d) if !d.is_empty() => d.iter().copied().for_each(&mut visit),
        _ => (0..x.len()).for_each(&mut visit),
    }
    let mut scale = best.1;
    if scale == 0.0 {
        // No transverse motion: fall back to the whole vector.
        scale = x
            .iter()
            .copied()
            .fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
    }
    if scale != 0.0 {
        *x /= scale;
    }
}

/// Sorted (ascending) eigenpairs of `L^-1 A L^-T` mapped back by `L^-T`.
fn transformed_eigen(l: &Cholesky<f64, Dyn>, a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let lower = l.l();
    let tmp = lower
        .solve_lower_triangular(a)
        .expect("Cholesky factor has a positive diagonal");
    let c = lower
        .solve_lower_triangular(&tmp.transpose())
        .expect("Cholesky factor has a positive diagonal");
    let c = (&c + c.transpose()) * 0.5;
    let dim = c.nrows();
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(dim, order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    let x = lower
        .transpose()
        .solve_upper_triangular(&y)
        .expect("Cholesky factor has a positive diagonal");
    (values, x)
}

/// Smallest positive `lambda` with `det(K + lambda K_G) = 0`.
pub fn min_buckling_factor(k: &DMatrix<f64>, k_g: &DMatrix<f64>) -> Result<EigenSolution> {
    min_buckling_factor_with(k, k_g, &EigenOptions::default())
}

pub fn min_buckling_factor_with(
    k: &DMatrix<f64>,
    k_g: &DMatrix<f64>,
    opts: &EigenOptions,
) -> Result<EigenSolution> {
    check_square(k, k_g)?;
    let l = cholesky(k, "stiffness")?;
    let (values, vectors) = transformed_eigen(&l, &(-k_g));
    let (idx, &mu) = values
        .iter()
        .enumerate()
        .next_back()
        .ok_or(Error::NoPositiveEigenvalue)?;
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(mu > 1e-12 * scale) || mu <= 0.0 {
        return Err(Error::NoPositiveEigenvalue);
    }
    let mut lambda = 1.0 / mu;
    let mut x = vectors.column(idx).into_owned();
    let mut residual = buckling_residual(k, k_g, &x, lambda);
    // Penalty-stiffened systems lose a few digits in the transformed problem;
    // inverse iteration with the existing factor recovers them.
    for _ in 0..POLISH_STEPS {
        if residual <= 1e-3 * opts.residual_tol {
            break;
        }
        let mut y = l.solve(&(-(k_g * &x)));
        y /= y.norm();
        let rq = (y.transpose() * k * &y)[0] / -(y.transpose() * k_g * &y)[0];
        let r = buckling_residual(k, k_g, &y, rq);
        if !(r < residual) {
            break;
        }
        (x, lambda, residual) = (y, rq, r);
    }
    normalize_mode(&mut x, opts.w_dofs);
    let kx = k * &x;
    let attainable =
        f64::EPSILON * (k.abs() * x.abs() + k_g.abs() * x.abs() * lambda).norm() / kx.norm();
    check_residual(residual, attainable, opts)?;
    Ok(EigenSolution {
        value: lambda,
        vector: x,
        residual,
        attainable,
    })
}

const POLISH_STEPS: usize = 3;

/// Margin over the rounding floor accepted by the residual check.
pub const ROUNDING_MARGIN: f64 = 10.0;

/// Accepts `residual` below the tolerance or within [`ROUNDING_MARGIN`] of
/// the rounding floor, whichever is larger.
fn check_residual(residual: f64, attainable: f64, opts: &EigenOptions) -> Result<()> {
    let tolerance = opts.residual_tol.max(ROUNDING_MARGIN * attainable);
    if residual <= tolerance {
        Ok(())
    } else {
        Err(Error::ResidualTooLarge {
            residual,
            tolerance,
        })
    }
}

fn buckling_residual(k: &DMatrix<f64>, k_g: &DMatrix<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    let kx = k * x;
    (&kx + k_g * x * lambda).norm() / kx.norm()
}

/// The `count` smallest `omega^2` in ascending order.
pub fn min_vibration_frequencies(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
    count: usize,
) -> Result<Vec<EigenSolution>> {
    min_vibration_frequencies_with(k, m, count, &EigenOptions::default())
}

pub fn min_vibration_frequencies_with(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
    count: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenSolution>> {
    check_square(k, m)?;
    if count == 0 {
        return Err(Error::invalid("count", "need at least one frequency"));
    }
    let l = cholesky(m, "mass")?;
    let (values, vectors) = transformed_eigen(&l, k);
    let mut out = Vec::with_capacity(count);
    for (i, &w2) in values.iter().enumerate().take(count) {
        let mut x = vectors.column(i).into_owned();
        let mut w2 = w2;
        let mut residual = vibration_residual(k, m, &x, w2);
        // Shifted inverse iteration, as for buckling.
        for _ in 0..POLISH_STEPS {
            if residual <= 1e-3 * opts.residual_tol {
                break;
            }
            let Some(mut y) = (k - m * w2).lu().solve(&(m * &x)) else {
                break;
            };
            y /= y.norm();
            let rq = (y.transpose() * k * &y)[0] / (y.transpose() * m * &y)[0];
            let r = vibration_residual(k, m, &y, rq);
            if !(r < residual) {
                break;
            }
            (x, w2, residual) = (y, rq, r);
        }
        normalize_mode(&mut x, opts.w_dofs);
        let kx = k * &x;
        let mx = m * &x;
        let denom = (kx.norm() + w2.abs() * mx.norm()).max(f64::MIN_POSITIVE);
        let attainable =
            f64::EPSILON * (k.abs() * x.abs() + m.abs() * x.abs() * w2.abs()).norm() / denom;
        check_residual(residual, attainable, opts)?;
        out.push(EigenSolution {
            value: w2.max(0.0),
            vector: x,
            residual,
            attainable,
        });
    }
    Ok(out)
}

fn vibration_residual(k: &DMatrix<f64>, m: &DMatrix<f64>, x: &DVector<f64>, w2: f64) -> f64 {
    let (kx, mx) = (k * x, m * x);
    let denom = (kx.norm() + w2.abs() * mx.norm()).max(f64::MIN_POSITIVE);
    (&kx - &mx * w2).norm() / denom
}

fn check_square(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.nrows() == 0 || !a.is_square() || a.shape() != b.shape() {
        return Err(Error::invalid(
            "matrices",
            format!(
                "need equal non-empty square matrices, got {:?} and {:?}",
                a.shape(),
                b.shape()
            ),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn det(a: &DMatrix<f64>) -> f64 {
        a.clone().lu().determinant()
    }

    /// All roots of `det(K - s I)` by sign-change scanning plus bisection.
    fn char_roots(k: &DMatrix<f64>, hi: f64) -> Vec<f64> {
        let n = k.nrows();
        let f = |s: f64| det(&(k - DMatrix::identity(n, n) * s));
        let steps = 20000;
        let mut roots = Vec::new();
        let mut a = 0.0;
        let mut fa = f(a);
        for i in 1..=steps {
            let b = hi * i as f64 / steps as f64;
            let fb = f(b);
            if fa == 0.0 {
                roots.push(a);
            } else if fa * fb < 0.0 {
                let (mut lo, mut up, mut flo) = (a, b, fa);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + up);
                    let fm = f(mid);
                    if fm * flo <= 0.0 {
                        up = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push(0.5 * (lo + up));
            }
            a = b;
            fa = fb;
        }
        roots
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn scalar_buckling() {
        let k = DMatrix::from_element(1, 1, 2.0);
        let g = DMatrix::from_element(1, 1, -1.0);
        assert_relative_eq!(
            min_buckling_factor(&k, &g).unwrap().value,
            2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn diagonal_buckling() {
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 6.0]));
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]));
        assert_relative_eq!(
            min_buckling_factor(&k, &g).unwrap().value,
            2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn random_spd_matches_determinant_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=5 {
            let k = random_spd(&mut rng, n);
            let g = -DMatrix::identity(n, n);
            let lambda = min_buckling_factor(&k, &g).unwrap().value;
            let hi = k.norm() * 1.01;
            let roots = char_roots(&k, hi);
            assert_eq!(roots.len(), n, "root scan missed eigenvalues");
            assert!(
                (lambda - roots[0]).abs() < 1e-10 * roots[0].max(1.0),
                "{lambda} vs {}",
                roots[0]
            );
            let freqs = min_vibration_frequencies(&k, &DMatrix::identity(n, n), n).unwrap();
            for (f, r) in freqs.iter().zip(&roots) {
                assert!((f.value - r).abs() < 1e-10 * r.max(1.0));
            }
        }
    }

    #[test]
    fn vibration_small_cases() {
        let k = DMatrix::from_element(1, 1, 4.0);
        let m = DMatrix::from_element(1, 1, 1.0);
        assert_relative_eq!(
            min_vibration_frequencies(&k, &m, 1).unwrap()[0]
                .value
                .sqrt(),
            2.0
        );
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 1.0]));
        let m = DMatrix::identity(2, 2);
        let f = min_vibration_frequencies(&k, &m, 2).unwrap();
        assert_relative_eq!(f[0].value.sqrt(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(f[1].value.sqrt(), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn quadrupled_mass_halves_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_spd(&mut rng, 5);
        let m = random_spd(&mut rng, 5);
        let a = min_vibration_frequencies(&k, &m, 5).unwrap();
        let b = min_vibration_frequencies(&k, &(&m * 4.0), 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(y.value.sqrt(), 0.5 * x.value.sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn errors() {
        let k = DMatrix::from_element(1, 1, -1.0);
        let g = DMatrix::from_element(1, 1, -1.0);
        assert!(matches!(
            min_buckling_factor(&k, &g),
            Err(Error::NotPositiveDefinite(_))
        ));
        let k = DMatrix::from_element(1, 1, 1.0);
        let g = DMatrix::from_element(1, 1, 1.0);
        assert!(matches!(
            min_buckling_factor(&k, &g),
            Err(Error::NoPositiveEigenvalue)
        ));
        let m = DMatrix::from_element(1, 1, 0.0);
        assert!(matches!(
            min_vibration_frequencies(&k, &m, 1),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn penalty_coupled_pair_passes_at_rounding_floor() {
        // Two soft DOFs joined by a stiff penalty.
        let p = 1e14;
        let k = DMatrix::from_row_slice(2, 2, &[1.0 + p, -p, -p, 2.0 + p]);
        let g = -DMatrix::identity(2, 2);
        let s = min_buckling_factor(&k, &g).unwrap();
        assert!((s.value - 1.5).abs() < 1e-3);
        assert!(s.residual <= ROUNDING_MARGIN * s.attainable);
        assert!(s.attainable > 1e-8);
    }

    #[test]
    fn penalty_stiffened_vibration_is_polished() {
        // Soft chain of four DOFs with one penalty link; M = I.
        let p = 1e8;
        let mut k = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, -1.0, 0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0, -1.0,
                2.0,
            ],
        );
        k[(1, 1)] += p;
        k[(2, 2)] += p;
        k[(1, 2)] -= p;
        k[(2, 1)] -= p;
        let m = DMatrix::identity(4, 4);
        let s = min_vibration_frequencies(&k, &m, 2).unwrap();
        // Rigid link: DOFs 1 and 2 merge into one with mass 2.
        let kr = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let mr = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 1.0]));
        let exact = min_vibration_frequencies(&kr, &mr, 2).unwrap();
        for (a, b) in s.iter().zip(&exact) {
            assert!(
                (a.value - b.value).abs() < 1e-6,
                "{} vs {}",
                a.value,
                b.value
            );
            assert!(a.residual <= DEFAULT_RESIDUAL_TOL.max(ROUNDING_MARGIN * a.attainable));
        }
    }

    #[test]
    fn residual_check_uses_the_larger_bound() {
        let opts = EigenOptions::default();
        assert!(check_residual(5e-9, 1e-20, &opts).is_ok());
        assert!(check_residual(5e-8, 1e-20, &opts).is_err());
        assert!(check_residual(5e-8, 1e-8, &opts).is_ok());
    }

    #[test]
    fn normalization_sign_and_scale() {
        let mut x = DVector::from_vec(vec![0.1, -4.0, 2.0]);
        normalize_mode(&mut x, None);
        assert_eq!(x[1], 1.0);
        let mut y = DVector::from_vec(vec![0.1, -4.0, 2.0]);
        normalize_mode(&mut y, Some(&[0, 2]));
        assert_eq!(y[2], 1.0);
    }

    proptest! {
        #[test]
        fn permutation_invariance(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 5;
            let k = random_spd(&mut rng, n);
            let g = -random_spd(&mut rng, n);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let p = |a: &DMatrix<f64>| DMatrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]);
            let a = min_buckling_factor(&k, &g).unwrap().value;
            let b = min_buckling_factor(&p(&k), &p(&g)).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-10 * a);
        }

        #[test]
        fn load_product_is_invariant(seed in 0u64..1000, s in 0.1f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_spd(&mut rng, 4);
            let g = -random_spd(&mut rng, 4);
            let a = min_buckling_factor(&k, &g).unwrap().value;
            let b = min_buckling_factor(&k, &(&g * s)).unwrap().value;
            prop_assert!((a - b * s).abs() <= 1e-10 * a);
        }
    }
}
