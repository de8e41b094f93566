//! Differential forms on the round `S³ = SU(2)` in truncated Peter–Weyl
//! coordinates.
//!
//! A form of degree `p` is `Σ φ_s θ_s` over the invariant basis
//! (`1`; `ηₛ`; `βₛ = η_{s+1}∧η_{s+2}`; `η₁∧η₂∧η₃`). Each coefficient
//! function is a sum of matrix coefficients `q ↦ ⟨e_u, π_j(q) v⟩`; the form
//! stores, per `(2j, u)`, the vectors `v` for all slots stacked slot-major.
//! Evaluated forms are real parts. With Haar measure of mass 1,
//! `∫ |⟨e_u, π_j(q) v⟩|² dq = |v|²/(2j+1)`.

use std::collections::BTreeMap;

use crate::levi_civita;
use crate::su2::{dim, generators, intertwiner, CMatrix, CVector, EulerAngles, Rep, C64};
use crate::{Error, Orientation, Result};

/// Key: `(2j, copy index u)`.
pub type PwKey = (u32, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct PwForm {
    pub degree: u8,
    pub comps: BTreeMap<PwKey, CVector>,
}

/// Number of invariant basis forms in degree `p`.
pub fn slots(degree: u8) -> usize {
    match degree {
        0 | 3 => 1,
        _ => 3,
    }
}

/// Matrix of `d` from degree `p` to `p+1` on one spin-`j` block.
pub fn d_block(two_j: u32, degree: u8) -> CMatrix {
    let n = dim(two_j);
    let rho = generators(two_j);
    match degree {
        0 => {
            let mut m = CMatrix::zeros(3 * n, n);
            for s in 0..3 {
                m.view_mut((s * n, 0), (n, n)).copy_from(&rho[s]);
            }
            m
        }
        1 => {
            // (d a)_c = Σ ε_{cbi} Xᵦaᵢ + 2a_c
            let mut m = CMatrix::zeros(3 * n, 3 * n);
            for c in 0..3 {
                for b in 0..3 {
                    for i in 0..3 {
                        let e = levi_civita(c, b, i);
                        if e != 0.0 {
                            let mut blk = m.view_mut((c * n, i * n), (n, n));
                            blk += rho[b].map(|z| z * e);
                        }
                    }
                }
                let mut blk = m.view_mut((c * n, c * n), (n, n));
                for d in 0..n {
                    blk[(d, d)] += C64::from(2.0);
                }
            }
            m
        }
        2 => {
            let mut m = CMatrix::zeros(n, 3 * n);
            for s in 0..3 {
                m.view_mut((0, s * n), (n, n)).copy_from(&rho[s]);
            }
            m
        }
        _ => CMatrix::zeros(0, slots(degree) * n),
    }
}

/// Codifferential `d*` from 1-forms to functions: `−Σ Xᵢaᵢ`.
pub fn codifferential_block(two_j: u32) -> CMatrix {
    d_block(two_j, 0).adjoint()
}

impl PwForm {
    pub fn zero(degree: u8) -> Self {
        PwForm {
            degree,
            comps: BTreeMap::new(),
        }
    }

    /// A single matrix-coefficient component.
    pub fn single(degree: u8, two_j: u32, copy: usize, v: CVector) -> Result<Self> {
        if v.len() != slots(degree) * dim(two_j) || copy >= dim(two_j) {
            return Err(Error::Invalid(format!(
                "component of length {} does not fit degree {degree}, spin {two_j}/2",
                v.len()
            )));
        }
        let mut f = PwForm::zero(degree);
        f.comps.insert((two_j, copy), v);
        Ok(f)
    }

    /// An invariant form `Σ cₛ θₛ` (spin 0).
    pub fn invariant(degree: u8, c: &[f64]) -> Self {
        let v = CVector::from_iterator(slots(degree), c.iter().map(|x| C64::from(*x)));
        let mut f = PwForm::zero(degree);
        f.comps.insert((0, 0), v);
        f
    }

    pub fn max_two_j(&self) -> u32 {
        self.comps.keys().map(|k| k.0).max().unwrap_or(0)
    }

    /// Applies a per-block linear map to every component.
    fn map_blocks(&self, degree: u8, f: impl Fn(u32, &CVector) -> CVector) -> PwForm {
        let comps = self
            .comps
            .iter()
            .map(|(&k, v)| (k, f(k.0, v)))
            .collect();
        PwForm { degree, comps }
    }

    pub fn d(&self) -> PwForm {
        if self.degree >= 3 {
            return PwForm::zero(4);
        }
        self.map_blocks(self.degree + 1, |two_j, v| d_block(two_j, self.degree) * v)
    }

    /// Hodge star of the unit round metric; `*θₛ` is `±` the dual basis form.
    pub fn star(&self, orientation: Orientation) -> PwForm {
        let s = orientation.sign();
        self.map_blocks(3 - self.degree, |_, v| v.map(|z| z * s))
    }

    /// `d* = (−1)^{p} * d *` on `p`-forms in dimension 3 (so `d*` on
    /// 2-forms is `*d*`, on 1-forms `−*d*`).
    pub fn codifferential(&self, orientation: Orientation) -> PwForm {
        if self.degree == 0 {
            return PwForm::zero(0);
        }
        let sign = if self.degree.is_multiple_of(2) { 1.0 } else { -1.0 };
        self.star(orientation).d().star(orientation).scale(sign)
    }

    pub fn scale(&self, s: f64) -> PwForm {
        self.scale_complex(C64::from(s))
    }

    pub fn scale_complex(&self, s: C64) -> PwForm {
        self.map_blocks(self.degree, |_, v| v.map(|z| z * s))
    }

    pub fn add(&self, other: &PwForm) -> Result<PwForm> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.comps
                .entry(*k)
                .and_modify(|w| *w += v)
                .or_insert_with(|| v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PwForm) -> Result<PwForm> {
        self.add(&other.scale(-1.0))
    }

    /// Complex `L²` inner product with mass-1 Haar measure and the unit
    /// round metric (the invariant basis is orthonormal).
    pub fn inner(&self, other: &PwForm) -> C64 {
        self.comps
            .iter()
            .filter_map(|(k, v)| other.comps.get(k).map(|w| v.dotc(w) / dim(k.0) as f64))
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).re
    }

    /// Largest coordinate modulus.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .values()
            .flat_map(|v| v.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    /// The real part `(φ + φ̄)/2`, expressed again in coordinates through
    /// the intertwiner between `π_j` and its conjugate.
    pub fn real_part(&self, reps: &mut RepCache) -> PwForm {
        let mut out = PwForm::zero(self.degree);
        let ns = slots(self.degree);
        for (&(two_j, u), v) in &self.comps {
            let n = dim(two_j);
            let c = reps.conjugator(two_j).clone();
            let cinv = c.clone().try_inverse().expect("intertwiner is invertible");
            // conj(π(q)) = C π(q) C⁻¹, so conj⟨e_u, π v⟩ = Σ_w C_{uw} ⟨e_w, π C⁻¹ v̄⟩
            let half = v.map(|z| z * 0.5);
            let mut conj_parts: Vec<CVector> = Vec::with_capacity(n);
            for w in 0..n {
                let mut part = CVector::zeros(ns * n);
                for s in 0..ns {
                    let vs = v.rows(s * n, n).map(|z| z.conj());
                    let t = &cinv * vs * (c[(u, w)] * 0.5);
                    part.rows_mut(s * n, n).copy_from(&t);
                }
                conj_parts.push(part);
            }
            for (w, part) in conj_parts.into_iter().enumerate() {
                let entry = out.comps.entry((two_j, w)).or_insert_with(|| CVector::zeros(ns * n));
                *entry += part;
            }
            let entry = out.comps.entry((two_j, u)).or_insert_with(|| CVector::zeros(ns * n));
            *entry += half;
        }
        out
    }

    /// Values of the (real parts of the) slot coefficients at `q`.
    pub fn evaluate(&self, q: &EulerAngles, reps: &mut RepCache) -> Vec<f64> {
        let ns = slots(self.degree);
        let mut out = vec![0.0; ns];
        for (&(two_j, u), v) in &self.comps {
            let n = dim(two_j);
            let row = reps.element(two_j, q).row(u).clone_owned();
            for (s, o) in out.iter_mut().enumerate() {
                let val: C64 = (0..n).map(|m| row[m] * v[s * n + m]).sum();
                *o += val.re;
            }
        }
        out
    }
}

/// Caches representations, conjugators and the last evaluated group element.
#[derive(Debug, Default)]
pub struct RepCache {
    reps: BTreeMap<u32, Rep>,
    conj: BTreeMap<u32, CMatrix>,
    last: BTreeMap<u32, ([u64; 3], CMatrix)>,
}

impl RepCache {
    pub fn new() -> Self {
        RepCache::default()
    }

    pub fn rep(&mut self, two_j: u32) -> &Rep {
        self.reps.entry(two_j).or_insert_with(|| Rep::spin(two_j))
    }

    pub fn element(&mut self, two_j: u32, q: &EulerAngles) -> &CMatrix {
        let key = [q.alpha.to_bits(), q.beta.to_bits(), q.gamma.to_bits()];
        let fresh = self.last.get(&two_j).is_none_or(|(k, _)| *k != key);
        if fresh {
            let m = self.rep(two_j).element(q);
            self.last.insert(two_j, (key, m));
        }
        &self.last[&two_j].1
    }

    /// `C` with `conj(ρ(X)) C = C ρ(X)`.
    pub fn conjugator(&mut self, two_j: u32) -> &CMatrix {
        if !self.conj.contains_key(&two_j) {
            let rep = self.rep(two_j).clone();
            let conj = Rep::new(rep.gens.clone().map(|g| g.map(|z| z.conj())));
            let c = intertwiner(&conj, &rep).expect("π_j is self-conjugate");
            self.conj.insert(two_j, c);
        }
        &self.conj[&two_j]
    }
}

/// A triple of forms of equal degree.
pub type PwTriple = [PwForm; 3];

pub fn triple_inner(a: &PwTriple, b: &PwTriple) -> C64 {
    (0..3).map(|i| a[i].inner(&b[i])).sum()
}
