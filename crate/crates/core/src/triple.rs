//! Triples of 2-forms and the hyperkähler constraint system.
//!
//! A [`TripleField`] stores three 2-forms in the left-invariant coframe. In
//! [`FrameMode::Rotating`] the stored forms `xₐ` are body components of the
//! physical triple `Ω_c = Σₐ Ad(q)_{ca} xₐ`; all derivatives of such triples
//! go through the twisted derivative [`triple_d`].

use nalgebra::{Matrix3, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::exterior::{
    contract, ext_d, ext_d_with, hodge_star, inner_product, wedge, DiagonalMetric, FrameVector,
    MixedForm, Monomial, STRUCTURE_CONSTANT,
};
use crate::scalar::Scalar;
use crate::{levi_civita, Error, FrameMode, Orientation, Result};

/// Default residual tolerance for closedness and algebraic identities.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Relative threshold below which the wedge Gram matrix counts as singular.
const DEGENERACY: f64 = 1e-12;

/// Three same-degree forms indexed by `ℝ³`.
pub type FormTriple = [MixedForm; 3];

/// A triple of 2-forms with slice orientation and frame mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleField {
    pub forms: FormTriple,
    pub orientation: Orientation,
    pub frame: FrameMode,
}

impl TripleField {
    pub fn new(forms: FormTriple, orientation: Orientation, frame: FrameMode) -> Result<Self> {
        for f in &forms {
            if f.degree() != 2 {
                return Err(Error::DegreeMismatch {
                    expected: 2,
                    found: f.degree(),
                });
            }
        }
        Ok(TripleField {
            forms,
            orientation,
            frame,
        })
    }

    /// The cohomogeneity-one ansatz `ωᵢ = fᵢ dt∧ηᵢ + fⱼfₖ ηⱼ∧ηₖ` (cyclic).
    pub fn from_profile(f: [Scalar; 3], orientation: Orientation, frame: FrameMode) -> Self {
        let forms = std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let dt_eta = MixedForm::monomial(Monomial::DT.wedge(Monomial::eta(i)).unwrap().0, f[i]);
            &dt_eta + &MixedForm::eta_dual(i).scale(f[j] * f[k])
        });
        TripleField {
            forms,
            orientation,
            frame,
        }
    }

    /// The flat triple `dt∧ηᵢ + ηⱼ∧ηₖ` (the ansatz at `f = (1,1,1)`).
    pub fn flat_unit() -> Self {
        TripleField::from_profile([Scalar::ONE; 3], Orientation::Standard, FrameMode::Fixed)
    }

    pub fn scale(&self, s: impl Into<Scalar>) -> TripleField {
        let s = s.into();
        TripleField {
            forms: self.forms.clone().map(|f| f.scale(s)),
            ..self.clone()
        }
    }

    /// Constant rotation of the triple index: `(Rω)ᵢ = Σⱼ Rᵢⱼ ωⱼ`.
    pub fn rotate_index(&self, r: &Matrix3<f64>) -> TripleField {
        let forms = std::array::from_fn(|i| {
            (0..3).fold(MixedForm::zero(2), |acc, j| {
                &acc + &self.forms[j].scale(r[(i, j)])
            })
        });
        TripleField {
            forms,
            ..self.clone()
        }
    }

    pub fn try_add(&self, other: &TripleField) -> Result<TripleField> {
        let mut forms = self.forms.clone();
        for (a, b) in forms.iter_mut().zip(&other.forms) {
            *a = a.try_add(b)?;
        }
        Ok(TripleField {
            forms,
            ..self.clone()
        })
    }

    /// Mode-aware exterior derivative of the triple.
    pub fn d(&self) -> FormTriple {
        triple_d(&self.forms, self.frame)
    }

    /// `max |dω|` over coefficients (value channel).
    pub fn closedness_residual(&self) -> f64 {
        self.d().iter().map(MixedForm::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.forms.iter().map(MixedForm::max_abs).fold(0.0, f64::max)
    }

    /// Pointwise antisymmetric frame matrices (value channel).
    pub fn point_matrices(&self) -> [Matrix4<f64>; 3] {
        std::array::from_fn(|i| two_form_matrix(&self.forms[i]))
    }
}

/// Twisted derivative of body components of a rotating `ℝ³`-valued form:
/// `D x_c = d x_c − κ Σ_{a,b} ε_{bac} η_b ∧ x_a`.
pub fn twisted_d(x: &FormTriple, kappa: f64) -> FormTriple {
    std::array::from_fn(|c| {
        let mut out = ext_d_with(&x[c], kappa);
        for a in 0..3 {
            for b in 0..3 {
                let e = levi_civita(b, a, c);
                if e != 0.0 {
                    let t = wedge(&MixedForm::eta(b), &x[a]).expect("degree below 4");
                    out = &out - &t.scale(kappa * e);
                }
            }
        }
        out
    })
}

/// Exterior derivative of a triple in the given frame mode.
pub fn triple_d(x: &FormTriple, frame: FrameMode) -> FormTriple {
    match frame {
        FrameMode::Fixed => std::array::from_fn(|i| ext_d(&x[i])),
        FrameMode::Rotating => twisted_d(x, STRUCTURE_CONSTANT),
    }
}

/// Codifferential `d* = −*d*` of a triple on the 4-manifold.
pub fn triple_codifferential(
    x: &FormTriple,
    frame: FrameMode,
    metric: &DiagonalMetric,
) -> Result<FormTriple> {
    let starred: Vec<MixedForm> = x
        .iter()
        .map(|f| hodge_star(f, metric))
        .collect::<Result<_>>()?;
    let starred: FormTriple = starred.try_into().expect("three forms");
    let d = triple_d(&starred, frame);
    let mut out = Vec::with_capacity(3);
    for f in &d {
        out.push(-hodge_star(f, metric)?);
    }
    Ok(out.try_into().expect("three forms"))
}

/// Self-dual part `(x + *x)/2` of a 2-form.
pub fn self_dual_part(x: &MixedForm, metric: &DiagonalMetric) -> Result<MixedForm> {
    Ok((x + &hodge_star(x, metric)?).scale(0.5))
}

/// Anti-self-dual part `(x − *x)/2` of a 2-form.
pub fn anti_self_dual_part(x: &MixedForm, metric: &DiagonalMetric) -> Result<MixedForm> {
    Ok((x - &hodge_star(x, metric)?).scale(0.5))
}

/// Antisymmetric frame matrix `A_ab = a(e_a, e_b)` of a 2-form (value channel).
pub fn two_form_matrix(a: &MixedForm) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for (mono, c) in a.terms() {
        let g: Vec<usize> = mono.generators().collect();
        if g.len() == 2 {
            m[(g[0], g[1])] = c.value();
            m[(g[1], g[0])] = -c.value();
        }
    }
    m
}

/// Inverse of [`two_form_matrix`] (uses the upper triangle).
pub fn two_form_from_matrix(m: &Matrix4<f64>) -> MixedForm {
    let mut out = MixedForm::zero(2);
    for a in 0..4 {
        for b in a + 1..4 {
            let mono = Monomial::from_bits((1 << a) | (1 << b));
            out.set_coeff(mono, m[(a, b)]).expect("degree 2");
        }
    }
    out
}

/// Coefficient of `e⁰¹²³` in `A ∧ B` for antisymmetric frame matrices.
pub fn wedge_top(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    a[(0, 1)] * b[(2, 3)] - a[(0, 2)] * b[(1, 3)] + a[(0, 3)] * b[(1, 2)]
        + a[(1, 2)] * b[(0, 3)]
        - a[(1, 3)] * b[(0, 2)]
        + a[(2, 3)] * b[(0, 1)]
}

/// Wedge Gram matrix `W_ij = ωᵢ∧ωⱼ / e⁰¹²³`.
pub fn wedge_gram(omega: &[Matrix4<f64>; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| wedge_top(&omega[i], &omega[j]))
}

/// 3×3 real symmetric matrix, stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMatrix3 {
    /// `[m₁₁, m₂₂, m₃₃, m₁₂, m₁₃, m₂₃]`
    entries: [f64; 6],
}

impl SymMatrix3 {
    pub fn zero() -> Self {
        SymMatrix3::default()
    }

    /// Symmetric part of `f(i, j)`.
    pub fn from_fn(f: impl Fn(usize, usize) -> f64) -> Self {
        let s = |i, j| 0.5 * (f(i, j) + f(j, i));
        SymMatrix3 {
            entries: [f(0, 0), f(1, 1), f(2, 2), s(0, 1), s(0, 2), s(1, 2)],
        }
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        SymMatrix3::from_fn(|i, j| m[(i, j)])
    }

    fn slot(i: usize, j: usize) -> usize {
        match (i.min(j), i.max(j)) {
            (a, b) if a == b => a,
            (0, 1) => 3,
            (0, 2) => 4,
            _ => 5,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[SymMatrix3::slot(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.entries[0] + self.entries[1] + self.entries[2]
    }

    /// Trace-free part.
    pub fn traceless(&self) -> SymMatrix3 {
        let t = self.trace() / 3.0;
        let mut out = *self;
        for k in 0..3 {
            out.entries[k] -= t;
        }
        out
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &SymMatrix3) -> SymMatrix3 {
        SymMatrix3 {
            entries: std::array::from_fn(|k| self.entries[k] - other.entries[k]),
        }
    }

    pub fn scale(&self, s: f64) -> SymMatrix3 {
        SymMatrix3 {
            entries: self.entries.map(|x| x * s),
        }
    }
}

/// `μ = (ω₁² + ω₂² + ω₃²)/6`.
pub fn volume_form(omega: &TripleField) -> Result<MixedForm> {
    let mut mu = MixedForm::zero(4);
    for w in &omega.forms {
        mu = &mu + &wedge(w, w)?;
    }
    let mu = mu.scale(1.0 / 6.0);
    let size = omega.max_abs();
    if size == 0.0 || mu.max_abs() <= DEGENERACY * size * size {
        return Err(Error::DegenerateTriple("volume form vanishes"));
    }
    Ok(mu)
}

/// `Q(ω)ᵢⱼ = ωᵢ∧ωⱼ / (⅓ Σ ωₖ²) − δᵢⱼ` (value channel).
pub fn q_matrix(omega: &TripleField) -> Result<SymMatrix3> {
    let m = omega.point_matrices();
    q_matrix_at(&m)
}

/// [`q_matrix`] on pointwise frame matrices.
pub fn q_matrix_at(omega: &[Matrix4<f64>; 3]) -> Result<SymMatrix3> {
    let w = wedge_gram(omega);
    let denom = w.trace() / 3.0;
    if denom.abs() <= DEGENERACY * w.abs().max() || w.abs().max() == 0.0 {
        return Err(Error::DegenerateTriple("Σ ωᵢ² vanishes"));
    }
    Ok(SymMatrix3::from_fn(|i, j| {
        w[(i, j)] / denom - if i == j { 1.0 } else { 0.0 }
    }))
}

/// The metric for which a definite triple is self-dual, with volume form
/// `dV_g = μ = (ω₁²+ω₂²+ω₃²)/6`.
///
/// The triple is first orthonormalised against its wedge Gram matrix; the
/// orthonormal triple `wᵢ` determines `g` up to scale through
/// `w₃ w₁⁻¹ w₂ ∝ g`, and the scale is fixed by `√det g = |μ|`.
pub fn metric_from_definite(omega: &[Matrix4<f64>; 3]) -> Result<Matrix4<f64>> {
    let w = wedge_gram(omega);
    let norm = w.abs().max();
    if norm == 0.0 {
        return Err(Error::DegenerateTriple("zero triple"));
    }
    let sign = if w.trace() >= 0.0 { 1.0 } else { -1.0 };
    let eig = SymmetricEigen::new(w * sign);
    let ev = eig.eigenvalues;
    if ev.min() <= DEGENERACY * norm {
        let mut eigenvalues = [ev[0] * sign, ev[1] * sign, ev[2] * sign];
        eigenvalues.sort_by(f64::total_cmp);
        return Err(Error::IndefiniteTriple { eigenvalues });
    }
    let inv_sqrt = eig.eigenvectors
        * Matrix3::from_diagonal(&ev.map(|x| 1.0 / x.sqrt()))
        * eig.eigenvectors.transpose();
    let ortho: [Matrix4<f64>; 3] = std::array::from_fn(|i| {
        (0..3).fold(Matrix4::zeros(), |acc, j| acc + omega[j] * inv_sqrt[(i, j)])
    });
    let w1_inv = ortho[0]
        .try_inverse()
        .ok_or(Error::DegenerateTriple("non-invertible normalised form"))?;
    let raw = ortho[2] * w1_inv * ortho[1];
    let mut g0 = (raw + raw.transpose()) * 0.5;
    if g0.trace() < 0.0 {
        g0 = -g0;
    }
    let det = g0.determinant();
    if det <= 0.0 || g0.cholesky().is_none() {
        return Err(Error::DegenerateTriple("no compatible positive metric"));
    }
    let mu = w.trace() / 6.0;
    let lambda = (mu.abs() / det.sqrt()).sqrt();
    Ok(g0 * lambda)
}

/// Pointwise complex structures `Jᵢ = −g⁻¹Ωᵢ`, i.e. `g(Jᵢu, v) = ωᵢ(u, v)`.
pub fn complex_structure_matrices(
    omega: &[Matrix4<f64>; 3],
    g: &Matrix4<f64>,
) -> Result<[Matrix4<f64>; 3]> {
    let g_inv = g
        .try_inverse()
        .ok_or(Error::DegenerateTriple("singular metric"))?;
    Ok(std::array::from_fn(|i| -(g_inv * omega[i])))
}

/// `max |Jᵢ² + 1|, |J₁J₂J₃ + 1|` over entries.
pub fn quaternion_residual(j: &[Matrix4<f64>; 3]) -> f64 {
    let id = Matrix4::<f64>::identity();
    let mut r: f64 = 0.0;
    for ji in j {
        r = r.max((ji * ji + id).abs().max());
    }
    r.max((j[0] * j[1] * j[2] + id).abs().max())
}

/// Complex structures of a triple with respect to a diagonal metric, as
/// frame matrices with [`Scalar`] entries (so their `t`-derivatives are
/// available to differential operators).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructureSet {
    j: [[[Scalar; 4]; 4]; 3],
    g: [Scalar; 4],
}

/// Complex structures `Jᵢ = −g⁻¹ωᵢ` determined by `g(Jᵢu, v) = ωᵢ(u, v)`.
pub fn complex_structures(omega: &TripleField, g: &DiagonalMetric) -> ComplexStructureSet {
    let gd = [Scalar::ONE, g.f[0] * g.f[0], g.f[1] * g.f[1], g.f[2] * g.f[2]];
    let mut j = [[[Scalar::ZERO; 4]; 4]; 3];
    for (i, w) in omega.forms.iter().enumerate() {
        for (mono, c) in w.terms() {
            let idx: Vec<usize> = mono.generators().collect();
            let (a, b) = (idx[0], idx[1]);
            j[i][a][b] = -c / gd[a];
            j[i][b][a] = c / gd[b];
        }
    }
    ComplexStructureSet { j, g: gd }
}

impl ComplexStructureSet {
    /// Value-channel frame matrices.
    pub fn matrices(&self) -> [Matrix4<f64>; 3] {
        std::array::from_fn(|i| Matrix4::from_fn(|a, b| self.j[i][a][b].value()))
    }

    pub fn quaternion_residual(&self) -> f64 {
        quaternion_residual(&self.matrices())
    }

    /// `Jᵢ v` on a frame vector.
    pub fn apply_vector(&self, i: usize, v: &FrameVector) -> FrameVector {
        std::array::from_fn(|a| (0..4).map(|b| self.j[i][a][b] * v[b]).sum())
    }

    /// Metric dual of a 1-form.
    pub fn sharp(&self, alpha: &MixedForm) -> FrameVector {
        std::array::from_fn(|a| alpha.coeff(Monomial::from_bits(1 << a)) / self.g[a])
    }

    /// Metric dual of a vector.
    pub fn flat(&self, v: &FrameVector) -> MixedForm {
        let mut out = MixedForm::zero(1);
        for a in 0..4 {
            out.set_coeff(Monomial::from_bits(1 << a), v[a] * self.g[a])
                .expect("degree 1");
        }
        out
    }

    /// `Jᵢα := (Jᵢα♯)♭` on a 1-form.
    pub fn apply_one_form(&self, i: usize, alpha: &MixedForm) -> MixedForm {
        self.flat(&self.apply_vector(i, &self.sharp(alpha)))
    }
}

/// `J·a = J₁a₁ + J₂a₂ + J₃a₃` on a triple of 1-forms.
pub fn j_dot(a: &FormTriple, j: &ComplexStructureSet) -> Result<MixedForm> {
    let mut out = MixedForm::zero(1);
    for (i, ai) in a.iter().enumerate() {
        if ai.degree() != 1 {
            return Err(Error::DegreeMismatch {
                expected: 1,
                found: ai.degree(),
            });
        }
        out = &out + &j.apply_one_form(i, ai);
    }
    Ok(out)
}

/// `Lv = d(ι_v ω)`; requires `dω = 0`.
pub fn big_l(v: &FrameVector, omega: &TripleField) -> Result<TripleField> {
    let residual = omega.closedness_residual();
    if residual > DEFAULT_TOLERANCE * (1.0 + omega.max_abs()) {
        return Err(Error::NotClosed { residual });
    }
    let contracted: FormTriple = std::array::from_fn(|i| contract(v, &omega.forms[i]));
    Ok(TripleField {
        forms: triple_d(&contracted, omega.frame),
        ..omega.clone()
    })
}

/// `L₊v = d₊(ι_v ω)` with `d₊ = (1 + *)d`, i.e. twice the self-dual
/// projection of `Lv`. With this normalisation `L*L = L*L₊`.
pub fn big_l_plus(v: &FrameVector, omega: &TripleField, g: &DiagonalMetric) -> Result<TripleField> {
    let lv = big_l(v, omega)?;
    let mut forms = lv.forms.clone();
    for f in forms.iter_mut() {
        *f = self_dual_part(f, g)?.scale(2.0);
    }
    Ok(TripleField { forms, ..lv })
}

/// `L*θ = (J·d*θ)♯`.
pub fn l_star(
    theta: &TripleField,
    j: &ComplexStructureSet,
    g: &DiagonalMetric,
) -> Result<FrameVector> {
    let co = triple_codifferential(&theta.forms, theta.frame, g)?;
    Ok(j.sharp(&j_dot(&co, j)?))
}

/// `P(θ)ᵢⱼ = ½(θᵢ,ωⱼ) + ½(ωᵢ,θⱼ) − ⅓δᵢⱼ Σ(θₖ,ωₖ)`, the linearisation of
/// [`q_matrix`] at a hyperkähler triple (value channel).
pub fn lin_p(theta: &TripleField, omega: &TripleField, g: &DiagonalMetric) -> Result<SymMatrix3> {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for jj in 0..3 {
            m[i][jj] = inner_product(&theta.forms[i], &omega.forms[jj], g)?.value();
        }
    }
    Ok(SymMatrix3::from_fn(|i, j| m[i][j]).traceless())
}

/// Decomposition of the matrix `Mᵢⱼ = (ωᵢ, dτⱼ)` for `τⱼ = α∘Jⱼ`.
///
/// `α∘Jⱼ = −(Jⱼα♯)♭` is the transpose action on covectors; with it the
/// trace part is `+d*α` (the vector action flips the sign of `M`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationParts {
    /// `tr M / 3`; equals `d*α`.
    pub trace: Scalar,
    /// `½ εₖᵢⱼ Mⱼᵢ`; equals `(ωₖ, dα)`, the components of `d₊α`.
    pub skew: [Scalar; 3],
    /// Trace-free symmetric part; vanishes identically.
    pub s20: SymMatrix3,
}

pub fn vector_field_linearization_parts(
    alpha: &MixedForm,
    omega: &TripleField,
    g: &DiagonalMetric,
) -> Result<LinearizationParts> {
    if alpha.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            found: alpha.degree(),
        });
    }
    let j = complex_structures(omega, g);
    let tau: FormTriple = std::array::from_fn(|i| -j.apply_one_form(i, alpha));
    let dtau = triple_d(&tau, omega.frame);
    let mut m = [[Scalar::ZERO; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            m[i][k] = inner_product(&omega.forms[i], &dtau[k], g)?;
        }
    }
    let trace = (m[0][0] + m[1][1] + m[2][2]).scale(1.0 / 3.0);
    let skew = std::array::from_fn(|k| {
        let mut s = Scalar::ZERO;
        for a in 0..3 {
            for b in 0..3 {
                s += m[b][a].scale(0.5 * levi_civita(k, a, b));
            }
        }
        s
    });
    let s20 = SymMatrix3::from_fn(|a, b| m[a][b].value()).traceless();
    Ok(LinearizationParts { trace, skew, s20 })
}

/// Codifferential of a 1-form, `d*α = −*d*α` (a function).
pub fn codifferential_one_form(alpha: &MixedForm, g: &DiagonalMetric) -> Result<Scalar> {
    let s = hodge_star(&ext_d(&hodge_star(alpha, g)?), g)?;
    Ok(-s.coeff(Monomial::ONE))
}
