//! Numerical integration: fixed Gauss–Legendre rules for element matrices and
//! an adaptive Gauss–Kronrod scheme for the crack compliance integral.

use crate::error::{Error, Result};

/// Fixed Gauss–Legendre rule on [-1, 1] used for element integrals.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize,
)]
pub enum GaussRule {
    Three,
    /// Exact for every element integrand (polynomials of degree <= 6).
    #[default]
    Four,
    Five,
}

const G3_X: [f64; 3] = [-0.7745966692414834, 0.0, 0.7745966692414834];
const G3_W: [f64; 3] = [0.5555555555555556, 0.8888888888888888, 0.5555555555555556];

const G4_X: [f64; 4] = [
    -0.8611363115940526,
    -0.3399810435848563,
    0.3399810435848563,
    0.8611363115940526,
];
const G4_W: [f64; 4] = [
    0.3478548451374538,
    0.6521451548625461,
    0.6521451548625461,
    0.3478548451374538,
];

const G5_X: [f64; 5] = [
    -0.906179845938664,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.906179845938664,
];
const G5_W: [f64; 5] = [
    0.2369268850561891,
    0.4786286704993665,
    0.5688888888888889,
    0.4786286704993665,
    0.2369268850561891,
];

impl GaussRule {
    /// Abscissae and weights on [-1, 1].
    pub fn points(self) -> (&'static [f64], &'static [f64]) {
        match self {
            GaussRule::Three => (&G3_X, &G3_W),
            GaussRule::Four => (&G4_X, &G4_W),
            GaussRule::Five => (&G5_X, &G5_W),
        }
    }

    pub fn order(self) -> usize {
        match self {
            GaussRule::Three => 3,
            GaussRule::Four => 4,
            GaussRule::Five => 5,
        }
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(self) -> usize {
        2 * self.order() - 1
    }

    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            3 => Ok(GaussRule::Three),
            4 => Ok(GaussRule::Four),
            5 => Ok(GaussRule::Five),
            _ => Err(Error::invalid(
                "solver.gauss_points",
                format!("expected 3, 4 or 5, got {order}"),
            )),
        }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate(self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (xs, ws) = self.points();
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        xs.iter()
            .zip(ws)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

// Kronrod 15-point nodes (non-negative half) and weights; Gauss 7-point
// weights sit on the odd-indexed Kronrod nodes.
const XGK: [f64; 8] = [
    0.9914553711208126,
    0.9491079123427585,
    0.8648644233597691,
    0.7415311855993945,
    0.5860872354676911,
    0.4058451513773972,
    0.20778495500789848,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224,
    0.06309209262997856,
    0.10479001032225019,
    0.14065325971552592,
    0.1690047266392679,
    0.19035057806478542,
    0.20443294007529889,
    0.20948214108472782,
];
const WG: [f64; 4] = [
    0.1294849661688697,
    0.27970539148927664,
    0.3818300505051189,
    0.4179591836734694,
];

/// Upper bound on the number of panels kept by the adaptive scheme.
const MAX_PANELS: usize = 4000;

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over [a, b]:
/// the panel with the largest error estimate is bisected until the summed
/// estimate drops below `rel_tol` times the integral. The integrand is never
/// evaluated at the end points.
pub fn integrate_adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(Panel {
        lo: a,
        hi: b,
        value,
        error,
    });
    let mut total = value;
    let mut total_err = error;
    while total_err > rel_tol * total.abs() && total_err > 1e2 * f64::EPSILON * total.abs() {
        if heap.len() >= MAX_PANELS {
            return Err(Error::QuadratureFailed(rel_tol));
        }
        let p = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (p.lo + p.hi);
        let (lv, le) = gk15(&mut f, p.lo, mid);
        let (rv, re) = gk15(&mut f, mid, p.hi);
        total += lv + rv - p.value;
        total_err += le + re - p.error;
        heap.push(Panel {
            lo: p.lo,
            hi: mid,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            lo: mid,
            hi: p.hi,
            value: rv,
            error: re,
        });
    }
    // re-sum to shed accumulated cancellation in the running total
    Ok(heap.iter().map(|p| p.value).sum())
}
