//! Exterior algebra on `ℝ_t × SU(2)` in the left-invariant coframe
//! `{dt, η₁, η₂, η₃}` with coefficients depending on `t` only.
//!
//! Basis monomials are bit masks over the generators (bit 0 = `dt`,
//! bits 1..3 = `η₁..η₃`). The canonical order is `dt < η₁ < η₂ < η₃`,
//! lexicographic on index sets within each degree.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::{Error, Orientation, Result};

/// Structure constant `κ` in `dη₁ = κ η₂∧η₃` (cyclic). With `κ = 2` the
/// coframe is orthonormal for the unit round 3-sphere.
pub const STRUCTURE_CONSTANT: f64 = 2.0;

const NAMES: [&str; 4] = ["dt", "η1", "η2", "η3"];

/// A wedge product of distinct coframe generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(u8);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);
    pub const DT: Monomial = Monomial(0b0001);
    pub const E1: Monomial = Monomial(0b0010);
    pub const E2: Monomial = Monomial(0b0100);
    pub const E3: Monomial = Monomial(0b1000);
    pub const TOP: Monomial = Monomial(0b1111);
    pub const SLICE_TOP: Monomial = Monomial(0b1110);

    /// The monomial for `η_{i+1}` (zero-based `i`).
    pub fn eta(i: usize) -> Monomial {
        Monomial(1 << (i + 1))
    }

    /// `η_{i+1} ∧ η_{i+2}` (indices mod 3), i.e. the 2-form dual to `η_i`
    /// on the round sphere. Returns the canonical monomial and the sign of
    /// the cyclic product relative to it.
    pub fn eta_dual(i: usize) -> (Monomial, f64) {
        let a = (i + 1) % 3;
        let b = (i + 2) % 3;
        let sign = if a < b { 1.0 } else { -1.0 };
        (Monomial::eta(a).union(Monomial::eta(b)), sign)
    }

    pub fn from_bits(bits: u8) -> Monomial {
        Monomial(bits & 0b1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn degree(self) -> u8 {
        self.0.count_ones() as u8
    }

    pub fn contains_dt(self) -> bool {
        self.0 & 1 != 0
    }

    pub fn contains(self, generator: usize) -> bool {
        self.0 & (1 << generator) != 0
    }

    fn union(self, other: Monomial) -> Monomial {
        Monomial(self.0 | other.0)
    }

    /// Generator indices in increasing order.
    pub fn generators(self) -> impl Iterator<Item = usize> {
        (0..4).filter(move |g| self.0 & (1 << g) != 0)
    }

    /// Complement within `{dt, η₁, η₂, η₃}`.
    pub fn complement(self) -> Monomial {
        Monomial(!self.0 & 0b1111)
    }

    /// Complement within `{η₁, η₂, η₃}` (requires no `dt`).
    pub fn slice_complement(self) -> Monomial {
        Monomial(!self.0 & 0b1110)
    }

    /// `self ∧ other = sign · (self ∪ other)`; `None` when they share a
    /// generator.
    pub fn wedge(self, other: Monomial) -> Option<(Monomial, f64)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut swaps = 0;
        for a in self.generators() {
            for b in other.generators() {
                if a > b {
                    swaps += 1;
                }
            }
        }
        let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        Some((self.union(other), sign))
    }

    /// All monomials of a given degree in canonical order.
    pub fn of_degree(degree: u8) -> Vec<Monomial> {
        let mut v: Vec<Monomial> = (0u8..16)
            .map(Monomial)
            .filter(|m| m.degree() == degree)
            .collect();
        v.sort_by_key(|m| m.generators().collect::<Vec<_>>());
        v
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        let parts: Vec<&str> = self.generators().map(|g| NAMES[g]).collect();
        write!(f, "{}", parts.join("∧"))
    }
}

/// A pure-degree form with [`Scalar`] coefficients.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedForm {
    degree: u8,
    coeffs: [Scalar; 16],
}

impl MixedForm {
    pub fn zero(degree: u8) -> Self {
        assert!(degree <= 4, "form degree {degree} exceeds 4");
        MixedForm {
            degree,
            coeffs: [Scalar::ZERO; 16],
        }
    }

    /// `c · m`.
    pub fn monomial(m: Monomial, c: impl Into<Scalar>) -> Self {
        let mut out = MixedForm::zero(m.degree());
        out.coeffs[m.0 as usize] = c.into();
        out
    }

    pub fn scalar(c: impl Into<Scalar>) -> Self {
        MixedForm::monomial(Monomial::ONE, c)
    }

    /// Sum of `(coefficient, monomial)` terms, all of the same degree.
    pub fn from_terms<I, C>(degree: u8, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, Monomial)>,
        C: Into<Scalar>,
    {
        let mut out = MixedForm::zero(degree);
        for (c, m) in terms {
            if m.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: m.degree(),
                });
            }
            out.coeffs[m.0 as usize] += c.into();
        }
        Ok(out)
    }

    /// `dt`.
    pub fn dt() -> Self {
        MixedForm::monomial(Monomial::DT, 1.0)
    }

    /// `η_{i+1}` (zero-based).
    pub fn eta(i: usize) -> Self {
        MixedForm::monomial(Monomial::eta(i), 1.0)
    }

    /// `η_{i+1}∧η_{i+2}` with cyclic indices (zero-based `i`).
    pub fn eta_dual(i: usize) -> Self {
        let (m, s) = Monomial::eta_dual(i);
        MixedForm::monomial(m, s)
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn coeff(&self, m: Monomial) -> Scalar {
        self.coeffs[m.0 as usize]
    }

    pub fn set_coeff(&mut self, m: Monomial, c: impl Into<Scalar>) -> Result<()> {
        if m.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: m.degree(),
            });
        }
        self.coeffs[m.0 as usize] = c.into();
        Ok(())
    }

    /// Non-zero terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Scalar)> + '_ {
        Monomial::of_degree(self.degree)
            .into_iter()
            .map(move |m| (m, self.coeffs[m.0 as usize]))
            .filter(|(_, c)| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Whether any term contains `dt`.
    pub fn has_dt(&self) -> bool {
        self.terms().any(|(m, _)| m.contains_dt())
    }

    /// Largest absolute coefficient value (value channel only).
    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.value().abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: impl Into<Scalar>) -> MixedForm {
        let c = c.into();
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out
    }

    pub fn try_add(&self, other: &MixedForm) -> Result<MixedForm> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b;
        }
        Ok(out)
    }

    /// Coefficients with every channel but the value dropped.
    pub fn values_only(&self) -> MixedForm {
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .for_each(|c| *c = Scalar::constant(c.value()));
        out
    }

    /// Restriction to a slice `t = const` (drops every `dt` term).
    pub fn restrict_to_slice(&self) -> MixedForm {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if i & 1 != 0 {
                *c = Scalar::ZERO;
            }
        }
        out
    }
}

impl fmt::Debug for MixedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms()
            .map(|(m, c)| format!("{:+}·{}", c.value(), m))
            .collect();
        if parts.is_empty() {
            write!(f, "0 ({}-form)", self.degree)
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

impl Add for &MixedForm {
    type Output = MixedForm;
    fn add(self, rhs: &MixedForm) -> MixedForm {
        self.try_add(rhs).expect("adding forms of different degree")
    }
}

impl Add for MixedForm {
    type Output = MixedForm;
    fn add(self, rhs: MixedForm) -> MixedForm {
        &self + &rhs
    }
}

impl Sub for &MixedForm {
    type Output = MixedForm;
    fn sub(self, rhs: &MixedForm) -> MixedForm {
        self + &(-rhs)
    }
}

impl Sub for MixedForm {
    type Output = MixedForm;
    fn sub(self, rhs: MixedForm) -> MixedForm {
        &self - &rhs
    }
}

impl Neg for &MixedForm {
    type Output = MixedForm;
    fn neg(self) -> MixedForm {
        self.scale(-1.0)
    }
}

impl Neg for MixedForm {
    type Output = MixedForm;
    fn neg(self) -> MixedForm {
        -&self
    }
}

/// Graded-antisymmetric wedge product.
pub fn wedge(a: &MixedForm, b: &MixedForm) -> Result<MixedForm> {
    let degree = a.degree + b.degree;
    if degree > 4 {
        return Err(Error::DegreeOverflow {
            lhs: a.degree,
            rhs: b.degree,
        });
    }
    let mut out = MixedForm::zero(degree);
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            if let Some((m, s)) = ma.wedge(mb) {
                out.coeffs[m.0 as usize] += (ca * cb).scale(s);
            }
        }
    }
    Ok(out)
}

/// `d` of a single generator: `d(dt) = 0`, `dη₁ = κ η₂∧η₃` (cyclic).
fn d_generator(g: usize, kappa: f64) -> MixedForm {
    if g == 0 {
        return MixedForm::zero(2);
    }
    MixedForm::eta_dual(g - 1).scale(kappa)
}

/// `d` of a bare basis monomial, by the Leibniz rule over its generators.
fn d_monomial(m: Monomial, kappa: f64) -> MixedForm {
    let gens: Vec<usize> = m.generators().collect();
    let mut out = MixedForm::zero(m.degree() + 1);
    for (pos, &g) in gens.iter().enumerate() {
        if g == 0 {
            continue;
        }
        let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
        let mut term = MixedForm::scalar(sign);
        for (p, &h) in gens.iter().enumerate() {
            let factor = if p == pos {
                d_generator(h, kappa)
            } else {
                MixedForm::monomial(Monomial(1 << h), 1.0)
            };
            term = wedge(&term, &factor).expect("degree bounded by monomial");
        }
        out = &out + &term;
    }
    out
}

/// Exterior derivative with the structure constant [`STRUCTURE_CONSTANT`].
pub fn ext_d(a: &MixedForm) -> MixedForm {
    ext_d_with(a, STRUCTURE_CONSTANT)
}

/// Exterior derivative with an arbitrary structure constant `κ` in
/// `dη₁ = κ η₂∧η₃`. Only `κ = 2` is consistent with the unit-sphere metric;
/// other values exist to test that normalisation.
///
/// `d(c·m) = c' dt∧m + c·dm`; the coefficient `c'` loses the top derivative
/// channel of `c` (see [`Scalar::dt`]).
pub fn ext_d_with(a: &MixedForm, kappa: f64) -> MixedForm {
    if a.degree == 4 {
        return MixedForm::zero(4);
    }
    let mut out = MixedForm::zero(a.degree + 1);
    for (m, c) in a.terms() {
        if let Some((mt, s)) = Monomial::DT.wedge(m) {
            out.coeffs[mt.0 as usize] += c.dt().scale(s);
        }
        let dm = d_monomial(m, kappa);
        for (mm, cc) in dm.terms() {
            out.coeffs[mm.0 as usize] += c * cc;
        }
    }
    out
}

/// Frame vector field with components along `{∂_t, X₁, X₂, X₃}`, the frame
/// dual to `{dt, η₁, η₂, η₃}`.
pub type FrameVector = [Scalar; 4];

/// Interior product `ι_v a`.
pub fn contract(v: &FrameVector, a: &MixedForm) -> MixedForm {
    if a.degree == 0 {
        return MixedForm::zero(0);
    }
    let mut out = MixedForm::zero(a.degree - 1);
    for (m, c) in a.terms() {
        for (pos, g) in m.generators().enumerate() {
            if v[g].is_zero() {
                continue;
            }
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let rest = Monomial(m.0 & !(1 << g));
            out.coeffs[rest.0 as usize] += (c * v[g]).scale(sign);
        }
    }
    out
}

/// Diagonal metric `dt² + Σ fᵢ² ηᵢ²` with an orientation flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalMetric {
    pub f: [Scalar; 3],
    pub orientation: Orientation,
}

impl DiagonalMetric {
    pub fn new(f: [Scalar; 3], orientation: Orientation) -> Self {
        DiagonalMetric { f, orientation }
    }

    /// Constant scale factors.
    pub fn constant(f: [f64; 3], orientation: Orientation) -> Self {
        DiagonalMetric {
            f: f.map(Scalar::constant),
            orientation,
        }
    }

    /// Unit round `S³` (times the `t` line).
    pub fn round() -> Self {
        DiagonalMetric::constant([1.0; 3], Orientation::Standard)
    }

    fn check(&self) -> Result<()> {
        for (index, f) in self.f.iter().enumerate() {
            if f.value() == 0.0 || !f.value().is_finite() {
                return Err(Error::SingularMetric { index: index + 1 });
            }
        }
        Ok(())
    }

    /// Length scale of generator `g` (1 for `dt`).
    fn scale_of(&self, g: usize) -> Scalar {
        if g == 0 {
            Scalar::ONE
        } else {
            self.f[g - 1]
        }
    }

    fn scale_product(&self, m: Monomial) -> Scalar {
        m.generators()
            .map(|g| self.scale_of(g))
            .fold(Scalar::ONE, |a, b| a * b)
    }

    /// `f₁f₂f₃` (signed by orientation): the `dt∧η₁₂₃` coefficient of the
    /// volume form.
    pub fn volume_density(&self) -> Scalar {
        self.scale_product(Monomial::SLICE_TOP)
            .scale(self.orientation.sign())
    }

    /// As a 4×4 frame matrix `diag(1, f₁², f₂², f₃²)` (value channel).
    pub fn matrix(&self) -> nalgebra::Matrix4<f64> {
        let f = self.f.map(|x| x.value());
        nalgebra::Matrix4::from_diagonal(&nalgebra::Vector4::new(
            1.0,
            f[0] * f[0],
            f[1] * f[1],
            f[2] * f[2],
        ))
    }
}

/// Hodge star of the 4-manifold metric `dt² + Σ fᵢ²ηᵢ²`, oriented by
/// `± dt∧η₁∧η₂∧η₃` according to the orientation flag.
pub fn hodge_star(a: &MixedForm, metric: &DiagonalMetric) -> Result<MixedForm> {
    metric.check()?;
    let sign = metric.orientation.sign();
    let mut out = MixedForm::zero(4 - a.degree);
    for (m, c) in a.terms() {
        let comp = m.complement();
        let (_, eps) = m.wedge(comp).expect("complement is disjoint");
        let factor = metric.scale_product(comp) / metric.scale_product(m);
        out.coeffs[comp.0 as usize] += (c * factor).scale(eps * sign);
    }
    Ok(out)
}

/// Hodge star on a slice `{t} × S³` with metric `Σ fᵢ²ηᵢ²`, oriented by
/// `± η₁∧η₂∧η₃`. The form must not contain `dt`.
pub fn slice_star(a: &MixedForm, metric: &DiagonalMetric) -> Result<MixedForm> {
    metric.check()?;
    if a.degree > 3 || a.has_dt() {
        return Err(Error::Invalid(
            "slice Hodge star needs a form without dt".into(),
        ));
    }
    let sign = metric.orientation.sign();
    let mut out = MixedForm::zero(3 - a.degree);
    for (m, c) in a.terms() {
        let comp = m.slice_complement();
        let (_, eps) = m.wedge(comp).expect("complement is disjoint");
        let factor = metric.scale_product(comp) / metric.scale_product(m);
        out.coeffs[comp.0 as usize] += (c * factor).scale(eps * sign);
    }
    Ok(out)
}

/// Pointwise inner product, defined by `⟨a,b⟩ vol = a ∧ *b`.
pub fn inner_product(a: &MixedForm, b: &MixedForm, metric: &DiagonalMetric) -> Result<Scalar> {
    if a.degree != b.degree {
        return Err(Error::DegreeMismatch {
            expected: a.degree,
            found: b.degree,
        });
    }
    let top = wedge(a, &hodge_star(b, metric)?)?;
    Ok(top.coeff(Monomial::TOP) / metric.volume_density())
}

/// Inner product of 2-forms on a slice, defined by `⟨a,b⟩ vol_Y = a ∧ *_Y b`.
pub fn slice_inner_product(
    a: &MixedForm,
    b: &MixedForm,
    metric: &DiagonalMetric,
) -> Result<Scalar> {
    if a.degree != b.degree {
        return Err(Error::DegreeMismatch {
            expected: a.degree,
            found: b.degree,
        });
    }
    let top = wedge(a, &slice_star(b, metric)?)?;
    Ok(top.coeff(Monomial::SLICE_TOP) / metric.volume_density())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> MixedForm {
        MixedForm::eta(i)
    }

    fn w(a: &MixedForm, b: &MixedForm) -> MixedForm {
        wedge(a, b).unwrap()
    }

    #[test]
    fn wedge_examples() {
        let e12 = w(&e(0), &e(1));
        assert_eq!(e12.coeff(Monomial::E1.wedge(Monomial::E2).unwrap().0).value(), 1.0);
        assert!(w(&e(0), &e(0)).is_zero());
        let top = w(&w(&MixedForm::dt(), &e(0)), &w(&e(1), &e(2)));
        assert_eq!(top.coeff(Monomial::TOP).value(), 1.0);
        let err = wedge(&top, &e(0));
        assert!(matches!(err, Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn graded_antisymmetry_on_basis() {
        for a in 0u8..16 {
            for b in 0u8..16 {
                let (ma, mb) = (Monomial::from_bits(a), Monomial::from_bits(b));
                if ma.degree() + mb.degree() > 4 {
                    continue;
                }
                let fa = MixedForm::monomial(ma, 1.0);
                let fb = MixedForm::monomial(mb, 1.0);
                let s = if (ma.degree() * mb.degree()) % 2 == 0 { 1.0 } else { -1.0 };
                let lhs = w(&fa, &fb);
                let rhs = w(&fb, &fa).scale(s);
                assert!((&lhs - &rhs).is_zero());
            }
        }
    }

    #[test]
    fn ext_d_examples() {
        let d1 = ext_d(&e(0));
        assert_eq!(d1, MixedForm::eta_dual(0).scale(2.0));
        let tdt = MixedForm::monomial(Monomial::DT, Scalar::variable(0.7));
        assert!(ext_d(&tdt).is_zero());
        assert!(ext_d(&MixedForm::eta_dual(0)).is_zero());
    }

    #[test]
    fn d_squared_vanishes_on_basis() {
        for bits in 0u8..16 {
            let m = MixedForm::monomial(Monomial::from_bits(bits), Scalar::variable(1.3).powi(3));
            assert!(ext_d(&ext_d(&m)).max_abs() == 0.0, "d² ≠ 0 on {m:?}");
        }
    }

    #[test]
    fn stars_on_orthonormal_frame() {
        let round = DiagonalMetric::round();
        let s = hodge_star(&w(&MixedForm::dt(), &e(0)), &round).unwrap();
        assert_eq!(s, MixedForm::eta_dual(0));
        let s3 = slice_star(&MixedForm::eta_dual(0), &round).unwrap();
        assert_eq!(s3, e(0));
    }

    #[test]
    fn slice_star_scales_by_frame_lengths() {
        let (f1, f2, f3) = (1.5, 0.7, 2.2);
        let m = DiagonalMetric::constant([f1, f2, f3], Orientation::Standard);
        let s = slice_star(&MixedForm::eta_dual(0), &m).unwrap();
        let c = s.coeff(Monomial::E1).value();
        assert!((c - f1 / (f2 * f3)).abs() < 1e-15);
        let rev = DiagonalMetric::constant([f1, f2, f3], Orientation::Reversed);
        let s = slice_star(&MixedForm::eta_dual(0), &rev).unwrap();
        assert!((s.coeff(Monomial::E1).value() + f1 / (f2 * f3)).abs() < 1e-15);
    }

    #[test]
    fn zero_scale_factor_is_singular() {
        let m = DiagonalMetric::constant([1.0, 0.0, 1.0], Orientation::Standard);
        assert!(matches!(
            hodge_star(&e(0), &m),
            Err(Error::SingularMetric { index: 2 })
        ));
    }

    #[test]
    fn inner_product_examples() {
        let round = DiagonalMetric::round();
        let a = MixedForm::eta_dual(0);
        let b = MixedForm::eta_dual(1);
        assert_eq!(inner_product(&a, &a, &round).unwrap().value(), 1.0);
        assert_eq!(inner_product(&a, &b, &round).unwrap().value(), 0.0);
        let (f2, f3) = (0.6, 1.7);
        let m = DiagonalMetric::constant([1.1, f2, f3], Orientation::Reversed);
        let n = inner_product(&a, &a, &m).unwrap().value();
        assert!((n - 1.0 / (f2 * f2 * f3 * f3)).abs() < 1e-14);
        assert!(inner_product(&a, &e(0), &m).is_err());
    }

    #[test]
    fn contraction_examples() {
        let x = |k: usize| {
            let mut v = [Scalar::ZERO; 4];
            v[k] = Scalar::ONE;
            v
        };
        assert_eq!(contract(&x(1), &w(&e(0), &e(1))), e(1));
        assert!(contract(&x(0), &MixedForm::eta_dual(0)).is_zero());
        let a = &w(&MixedForm::dt(), &e(0)) + &MixedForm::eta_dual(0);
        assert_eq!(contract(&x(2), &a), e(2));
    }

    #[test]
    fn canonical_order_of_two_forms() {
        let names: Vec<String> = Monomial::of_degree(2).iter().map(|m| m.to_string()).collect();
        assert_eq!(
            names,
            ["dt∧η1", "dt∧η2", "dt∧η3", "η1∧η2", "η1∧η3", "η2∧η3"]
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn poly() -> impl Strategy<Value = Scalar> {
            (prop::array::uniform4(-3i32..=3), 0.2f64..3.0).prop_map(|(c, t)| {
                let t = Scalar::variable(t);
                c.iter()
                    .rev()
                    .fold(Scalar::ZERO, |acc, &k| acc * t + Scalar::constant(k as f64))
            })
        }

        fn form(degree: u8) -> impl Strategy<Value = MixedForm> {
            prop::collection::vec(poly(), 6).prop_map(move |cs| {
                let mut out = MixedForm::zero(degree);
                for (m, c) in Monomial::of_degree(degree).into_iter().zip(cs) {
                    out.set_coeff(m, c).unwrap();
                }
                out
            })
        }

        fn any_form() -> impl Strategy<Value = MixedForm> {
            (0u8..=4).prop_flat_map(form)
        }

        fn metric() -> impl Strategy<Value = DiagonalMetric> {
            (prop::array::uniform3(0.2f64..4.0), any::<bool>()).prop_map(|(f, rev)| {
                let o = if rev { Orientation::Reversed } else { Orientation::Standard };
                DiagonalMetric::constant(f, o)
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]
            #[test]
            fn d_squared_is_exactly_zero(a in any_form()) {
                prop_assert_eq!(ext_d(&ext_d(&a)).max_abs(), 0.0);
            }
        }

        proptest! {
            #[test]
            fn double_star_sign(a in any_form(), m in metric()) {
                let p = a.degree() as i32;
                let s = if (p * (4 - p)) % 2 == 0 { 1.0 } else { -1.0 };
                let back = hodge_star(&hodge_star(&a, &m).unwrap(), &m).unwrap();
                prop_assert!((&back - &a.scale(s)).max_abs() < 1e-12 * (1.0 + a.max_abs()));
            }

            #[test]
            fn slice_double_star_is_identity(a in form(2), m in metric()) {
                let a = a.restrict_to_slice();
                let back = slice_star(&slice_star(&a, &m).unwrap(), &m).unwrap();
                prop_assert!((&back - &a).max_abs() < 1e-12 * (1.0 + a.max_abs()));
            }

            #[test]
            fn leibniz(p in 0u8..=4, q in 0u8..=4, seed in any::<u64>()) {
                prop_assume!(p + q < 4);
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let mut rand_form = |deg: u8| {
                    let mut out = MixedForm::zero(deg);
                    for m in Monomial::of_degree(deg) {
                        let c = Scalar::from_derivatives(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
                        out.set_coeff(m, c).unwrap();
                    }
                    out
                };
                let a = rand_form(p);
                let b = rand_form(q);
                let lhs = ext_d(&wedge(&a, &b).unwrap());
                let s = if p % 2 == 0 { 1.0 } else { -1.0 };
                let rhs = &wedge(&ext_d(&a), &b).unwrap() + &wedge(&a, &ext_d(&b)).unwrap().scale(s);
                prop_assert!((&lhs - &rhs).max_abs() < 1e-12);
            }

            #[test]
            fn inner_product_is_positive(a in any_form(), m in metric()) {
                let a = a.values_only();
                prop_assume!(!a.is_zero());
                prop_assert!(inner_product(&a, &a, &m).unwrap().value() > 0.0);
            }
        }
    }
}
