//! Quadrature rules: Gauss–Legendre on intervals and a product rule for the
//! normalised Haar measure on SU(2).

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::su2::EulerAngles;

/// `(node, weight)` pairs of the `n`-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("n ≥ 1"));
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Product rule for `∫_{SU(2)} · dq` with total mass 1, in Euler angles
/// `α ∈ [0, π)`, `β ∈ [0, π/2]` (density `sin 2β`), `γ ∈ [0, 2π)`:
/// trapezoid in `α`, `γ` and Gauss–Legendre in `cos 2β`.
#[derive(Debug, Clone)]
pub struct HaarGrid {
    pub points: Vec<(EulerAngles, f64)>,
}

impl HaarGrid {
    pub fn new(n_alpha: usize, n_beta: usize, n_gamma: usize) -> Self {
        let mut points = Vec::with_capacity(n_alpha * n_beta * n_gamma);
        for (x, wx) in gauss_legendre(n_beta, -1.0, 1.0) {
            let beta = 0.5 * x.acos();
            for a in 0..n_alpha {
                let alpha = PI * a as f64 / n_alpha as f64;
                for g in 0..n_gamma {
                    let gamma = 2.0 * PI * g as f64 / n_gamma as f64;
                    let w = 0.5 * wx / (n_alpha * n_gamma) as f64;
                    points.push((EulerAngles::new(alpha, beta, gamma), w));
                }
            }
        }
        HaarGrid { points }
    }

    /// A grid integrating products of two matrix coefficients of spin
    /// `≤ two_j_max / 2` exactly.
    pub fn for_spin(two_j_max: u32) -> Self {
        let n = two_j_max as usize;
        HaarGrid::new(2 * n + 2, n + 2, 2 * n + 2)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(&EulerAngles) -> f64) -> f64 {
        self.points.iter().map(|(q, w)| w * f(q)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{dim, Rep};

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let rule = gauss_legendre(5, 0.0, 2.0);
        let int: f64 = rule.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((int - 2f64.powi(10) / 10.0).abs() < 1e-12);
    }

    #[test]
    fn haar_grid_has_unit_mass() {
        let g = HaarGrid::for_spin(3);
        assert!((g.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schur_orthogonality() {
        for two_j in 0..5u32 {
            let rep = Rep::spin(two_j);
            let n = dim(two_j);
            let grid = HaarGrid::for_spin(two_j);
            let mats: Vec<_> = grid.points.iter().map(|(q, w)| (rep.element(q), *w)).collect();
            for (a, b) in [(0, 0), (0, n - 1), (n / 2, n / 2)] {
                for (c, d) in [(0, 0), (n - 1, 0), (n / 2, n / 2)] {
                    let v: f64 = mats
                        .iter()
                        .map(|(u, w)| w * (u[(a, b)] * u[(c, d)].conj()).re)
                        .sum();
                    let expected = if (a, b) == (c, d) { 1.0 / n as f64 } else { 0.0 };
                    assert!((v - expected).abs() < 1e-12, "j={two_j}/2 ({a},{b}) ({c},{d}): {v}");
                }
            }
        }
    }
}
