//! Representations of `su(2)` normalised by the coframe: the left-invariant
//! fields dual to `ηᵢ` satisfy `[X₁, X₂] = −2X₃` (cyclic).
//!
//! On the spin-`j` irrep `V_j` (dimension `2j+1`, basis `|j,m⟩` with `m`
//! running from `j` down to `−j`) the fields act by `ρ(X_k) = 2i J_k`.
//! A matrix coefficient `q ↦ ⟨e_u, π(q) v⟩` is differentiated by `Xₖ` as
//! `v ↦ ρ(Xₖ)v`, so the second slot `v` carries the representation and the
//! row `u` labels one of `2j+1` copies.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::levi_civita;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dimension `2j+1` of the spin-`j` irrep, from `two_j = 2j`.
pub fn dim(two_j: u32) -> usize {
    two_j as usize + 1
}

pub fn spin_label(two_j: u32) -> String {
    if two_j.is_multiple_of(2) {
        format!("{}", two_j / 2)
    } else {
        format!("{two_j}/2")
    }
}

/// Hermitian spin matrices `(J_x, J_y, J_z)` with `[J_x, J_y] = i J_z`.
pub fn spin_matrices(two_j: u32) -> [CMatrix; 3] {
    let n = dim(two_j);
    let j = two_j as f64 / 2.0;
    let m = |k: usize| j - k as f64;
    let mut jp = CMatrix::zeros(n, n);
    for k in 1..n {
        // J₊|m⟩ = √(j(j+1) − m(m+1)) |m+1⟩, and |m+1⟩ has index k−1
        let mk = m(k);
        jp[(k - 1, k)] = C64::from((j * (j + 1.0) - mk * (mk + 1.0)).sqrt());
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm).map(|z| z * 0.5);
    let jy = (&jp - &jm).map(|z| z / (2.0 * I));
    let jz = CMatrix::from_fn(n, n, |a, b| if a == b { C64::from(m(a)) } else { C64::from(0.0) });
    [jx, jy, jz]
}

/// `ρ(Xₖ) = 2i Jₖ` on `V_j`.
pub fn generators(two_j: u32) -> [CMatrix; 3] {
    spin_matrices(two_j).map(|m| m.map(|z| 2.0 * I * z))
}

/// The adjoint representation on `su(2)` in the basis `Xₐ`:
/// `ad(Xᵢ)_{ba} = −2ε_{iab}`.
pub fn adjoint_generators() -> [CMatrix; 3] {
    std::array::from_fn(|i| {
        CMatrix::from_fn(3, 3, |b, a| C64::from(-2.0 * levi_civita(i, a, b)))
    })
}

/// `max |[ρ_a, ρ_b] + 2ε_{abc} ρ_c|` over all pairs.
pub fn bracket_residual(gens: &[CMatrix; 3]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let comm = &gens[a] * &gens[b] - &gens[b] * &gens[a];
            let mut expected = CMatrix::zeros(comm.nrows(), comm.ncols());
            for c in 0..3 {
                expected += gens[c].map(|z| z * (-2.0 * levi_civita(a, b, c)));
            }
            worst = worst.max((comm - expected).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// Group element `q = exp(αX₃) exp(βX₂) exp(γX₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }
}

/// A finite-dimensional representation with cached exponentials.
#[derive(Debug, Clone)]
pub struct Rep {
    pub gens: [CMatrix; 3],
    // ρ(X_k) = −i V diag(λ) V†
    eig: [(CMatrix, Vec<f64>); 3],
}

impl Rep {
    pub fn new(gens: [CMatrix; 3]) -> Self {
        let eig = std::array::from_fn(|k| {
            let h = gens[k].map(|z| z * I);
            let h = (&h + h.adjoint()).map(|z| z * 0.5);
            let e = SymmetricEigen::new(h);
            (e.eigenvectors, e.eigenvalues.iter().copied().collect())
        });
        Rep { gens, eig }
    }

    pub fn spin(two_j: u32) -> Self {
        Rep::new(generators(two_j))
    }

    pub fn adjoint() -> Self {
        Rep::new(adjoint_generators())
    }

    pub fn dim(&self) -> usize {
        self.gens[0].nrows()
    }

    /// `exp(s ρ(Xₖ))`.
    pub fn exp(&self, k: usize, s: f64) -> CMatrix {
        let (v, lambda) = &self.eig[k];
        let d = CMatrix::from_fn(lambda.len(), lambda.len(), |a, b| {
            if a == b {
                (-I * s * lambda[a]).exp()
            } else {
                C64::from(0.0)
            }
        });
        v * d * v.adjoint()
    }

    /// `π(q)` for `q` in Euler angles.
    pub fn element(&self, q: &EulerAngles) -> CMatrix {
        self.exp(2, q.alpha) * self.exp(1, q.beta) * self.exp(2, q.gamma)
    }
}

/// Unit-norm `U` with `a.gens[k] U = U b.gens[k]` for all `k`, if the
/// intertwiner space is one-dimensional.
pub fn intertwiner(a: &Rep, b: &Rep) -> Option<CMatrix> {
    let (n, m) = (a.dim(), b.dim());
    let mut sys = CMatrix::zeros(3 * n * m, n * m);
    for k in 0..3 {
        // vec(A U − U B) with column-major vec: (I⊗A − Bᵀ⊗I) vec(U)
        for col in 0..m {
            for row in 0..n {
                let unknown = col * n + row;
                for r in 0..n {
                    sys[(k * n * m + col * n + r, unknown)] += a.gens[k][(r, row)];
                }
                for c in 0..m {
                    sys[(k * n * m + c * n + row, unknown)] -= b.gens[k][(col, c)];
                }
            }
        }
    }
    let svd = sys.svd(false, true);
    let v_t = svd.v_t?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| sv[x].total_cmp(&sv[y]));
    let scale = sv.iter().copied().fold(0.0, f64::max).max(1.0);
    if sv[order[0]] > 1e-10 * scale || (order.len() > 1 && sv[order[1]] < 1e-8 * scale) {
        return None;
    }
    let row = v_t.row(order[0]).adjoint();
    let u = CMatrix::from_fn(n, m, |r, c| row[c * n + r]);
    let norm = u.norm();
    Some(u.map(|z| z / norm))
}
