//! The operator `D = d* + d₊` on 1-forms in a collar `(t₀, t₁) × S³`, in
//! the split `a = −h dt + b` with `h` a function and `b` a 1-form on the
//! slice.
//!
//! Written along the collar, `D(h, b) = (∂_t + H) h + d*_Y b` and
//! `∂_t b + d_Y h + *_Y d_Y b`, where `H = Σ fᵢ'/fᵢ` is the mean curvature of
//! the slice and the self-dual part of `da` is recorded by its contraction
//! with `∂_t`. Here `∂_t` acts on the coefficients in the invariant coframe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exterior::{
    ext_d, hodge_star, inner_product, slice_star, wedge, DiagonalMetric, MixedForm, Monomial,
};
use crate::quadrature::gauss_legendre;
use crate::scalar::Scalar;
use crate::triple::codifferential_one_form;
use crate::{Orientation, Result};

/// Invariant section `(h, b₁η₁ + b₂η₂ + b₃η₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollarSection {
    pub h: Scalar,
    pub b: [Scalar; 3],
}

impl CollarSection {
    /// The 1-form `−h dt + Σ bᵢηᵢ`.
    pub fn one_form(&self) -> MixedForm {
        let mut a = MixedForm::monomial(Monomial::DT, -self.h);
        for i in 0..3 {
            a = a + MixedForm::monomial(Monomial::eta(i), self.b[i]);
        }
        a
    }

    fn slice_form(&self) -> MixedForm {
        let mut b = MixedForm::zero(1);
        for i in 0..3 {
            b = b + MixedForm::monomial(Monomial::eta(i), self.b[i]);
        }
        b
    }
}

/// Output of `D`: a function and a slice 1-form (coefficients of `ηᵢ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarValue {
    pub function: f64,
    pub one_form: [f64; 3],
}

impl CollarValue {
    pub fn max_abs_diff(&self, other: &CollarValue) -> f64 {
        (0..3)
            .map(|i| (self.one_form[i] - other.one_form[i]).abs())
            .fold((self.function - other.function).abs(), f64::max)
    }
}

/// Mean curvature `Σ fᵢ'/fᵢ` of the slice.
pub fn mean_curvature(metric: &DiagonalMetric) -> f64 {
    metric
        .f
        .iter()
        .map(|f| f.dt_derivative() / f.value())
        .sum()
}

fn slice_d(a: &MixedForm) -> MixedForm {
    ext_d(a).restrict_to_slice()
}

fn one_form_coeffs(a: &MixedForm) -> [f64; 3] {
    std::array::from_fn(|i| a.coeff(Monomial::eta(i)).value())
}

/// `(d*a, ι_{∂t}(1+*)da)` computed in four dimensions.
pub fn direct(section: &CollarSection, metric: &DiagonalMetric) -> Result<CollarValue> {
    let a = section.one_form();
    let function = codifferential_one_form(&a, metric)?.value();
    let da = ext_d(&a);
    let sd = &da + &hodge_star(&da, metric)?;
    let c = crate::exterior::contract(
        &[Scalar::ONE, Scalar::ZERO, Scalar::ZERO, Scalar::ZERO],
        &sd,
    );
    Ok(CollarValue {
        function,
        one_form: one_form_coeffs(&c),
    })
}

/// The same quantity from the collar form of `D`.
pub fn collar_form(section: &CollarSection, metric: &DiagonalMetric) -> Result<CollarValue> {
    let b = section.slice_form();
    let h_term = section.h.dt_derivative() + mean_curvature(metric) * section.h.value();
    // d*_Y b = −*_Y d_Y *_Y b
    let co = -slice_star(&slice_d(&slice_star(&b, metric)?), metric)?.coeff(Monomial::ONE);
    let curl = slice_star(&slice_d(&b), metric)?;
    // h is constant along the slice, so d_Y h = 0
    Ok(CollarValue {
        function: h_term + co.value(),
        one_form: std::array::from_fn(|i| {
            section.b[i].dt_derivative() + curl.coeff(Monomial::eta(i)).value()
        }),
    })
}

/// Largest difference between the direct and collar computations of `D`.
pub fn collar_dirac_check(section: &CollarSection, metric: &DiagonalMetric) -> Result<f64> {
    Ok(direct(section, metric)?.max_abs_diff(&collar_form(section, metric)?))
}

/// Polynomial `Σ cₖ rᵏ` with derivatives as a jet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn jet(&self, r: f64) -> Scalar {
        let mut d = [0.0; 4];
        for (k, c) in self.0.iter().enumerate() {
            let mut coeff = *c;
            for (n, slot) in d.iter_mut().enumerate() {
                if n > k {
                    break;
                }
                *slot += coeff * r.powi((k - n) as i32);
                coeff *= (k - n) as f64;
            }
        }
        Scalar::from_derivatives(&d)
    }
}

/// A random invariant section on the flat ball: `h` a polynomial, each `bᵢ`
/// is `r²` times a polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySection {
    pub h: Poly,
    pub b: [Poly; 3],
}

impl PolySection {
    pub fn random(rng: &mut impl Rng, degree: usize) -> Self {
        let mut poly = |shift: usize| {
            let mut c = vec![0.0; shift];
            c.extend((0..=degree).map(|_| rng.gen_range(-1.0..1.0)));
            Poly(c)
        };
        let h = poly(0);
        PolySection {
            h,
            b: [poly(2), poly(2), poly(2)],
        }
    }

    pub fn at(&self, r: f64) -> CollarSection {
        CollarSection {
            h: self.h.jet(r),
            b: [self.b[0].jet(r), self.b[1].jet(r), self.b[2].jet(r)],
        }
    }
}

/// Volume of `S³` in the coframe `η` (the unit round sphere).
pub const SLICE_VOLUME: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenResidual {
    pub lhs: f64,
    pub boundary: f64,
    pub residual: f64,
}

/// `(Du, v) − (u, D*v)` against `∫_{∂B} ⟨u, v⟩` on the flat ball of radius
/// `radius`. `v = (h, c)` is paired with `D u` through the self-dual form
/// `θ = dt∧c + *_Y c`, and `D* v = dh + d*θ`.
pub fn greens_identity(u: &PolySection, v: &PolySection, radius: f64, nodes: usize) -> Result<GreenResidual> {
    let mut lhs = 0.0;
    for (r, w) in gauss_legendre(nodes, 0.0, radius) {
        let metric = DiagonalMetric::new([Scalar::variable(r); 3], Orientation::Standard);
        let su = u.at(r);
        let sv = v.at(r);
        let a = su.one_form();
        let c = sv.slice_form();
        let dtc = wedge(&MixedForm::dt(), &c)?;
        let theta = &dtc + &hodge_star(&dtc, &metric)?;

        let du_fn = codifferential_one_form(&a, &metric)?;
        let pair_d = inner_product(&ext_d(&a), &theta, &metric)?;
        let du_v = du_fn * sv.h + pair_d;

        let dh = MixedForm::monomial(Monomial::DT, sv.h.dt());
        let co_theta = -hodge_star(&ext_d(&hodge_star(&theta, &metric)?), &metric)?;
        let u_dv = inner_product(&a, &(&dh + &co_theta), &metric)?;

        lhs += w * (du_v.value() - u_dv.value()) * metric.volume_density().value();
    }
    lhs *= SLICE_VOLUME;
    let (su, sv) = (u.at(radius), v.at(radius));
    let pointwise = su.h.value() * sv.h.value()
        + (0..3).map(|i| su.b[i].value() * sv.b[i].value()).sum::<f64>() / (radius * radius);
    let boundary = SLICE_VOLUME * radius.powi(3) * pointwise;
    let scale = lhs.abs().max(boundary.abs()).max(1.0);
    Ok(GreenResidual {
        lhs,
        boundary,
        residual: (lhs - boundary).abs() / scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenReport {
    pub pairs: usize,
    pub max_residual: f64,
    pub residuals: Vec<GreenResidual>,
}

/// Green's identity over `pairs` seeded random section pairs on the unit
/// flat ball.
pub fn greens_identity_check(pairs: usize, seed: u64) -> Result<GreenReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let u = PolySection::random(&mut rng, 3);
        let v = PolySection::random(&mut rng, 3);
        residuals.push(greens_identity(&u, &v, 1.0, 64)?);
    }
    let max_residual = residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(GreenReport {
        pairs,
        max_residual,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(r: f64, orientation: Orientation) -> DiagonalMetric {
        DiagonalMetric::new([Scalar::variable(r); 3], orientation)
    }

    #[test]
    fn constant_function_gives_mean_curvature() {
        let s = CollarSection {
            h: Scalar::constant(1.0),
            b: [Scalar::ZERO; 3],
        };
        for r in [0.5, 1.0, 3.0] {
            let m = flat(r, Orientation::Standard);
            let d = direct(&s, &m).unwrap();
            assert!((d.function - 3.0 / r).abs() < 1e-14);
            assert!(d.one_form.iter().all(|x| x.abs() < 1e-14));
            assert!(collar_dirac_check(&s, &m).unwrap() < 1e-14);
        }
    }

    #[test]
    fn invariant_one_form_on_unit_slice() {
        let s = CollarSection {
            h: Scalar::ZERO,
            b: [Scalar::constant(1.0), Scalar::ZERO, Scalar::ZERO],
        };
        let m = DiagonalMetric::constant([1.0; 3], Orientation::Standard);
        let d = direct(&s, &m).unwrap();
        assert_eq!(d.one_form, [2.0, 0.0, 0.0]);
        assert!(collar_dirac_check(&s, &m).unwrap() < 1e-10);
        let m = DiagonalMetric::constant([1.0; 3], Orientation::Reversed);
        assert_eq!(direct(&s, &m).unwrap().one_form, [-2.0, 0.0, 0.0]);
    }

    #[test]
    fn routes_agree_on_random_sections_and_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eh = crate::profile::catalog(crate::profile::Family::EguchiHanson { c: 1.0 }).unwrap();
        let tn = crate::profile::catalog(crate::profile::Family::TaubNut { m: 1.0 }).unwrap();
        for _ in 0..20 {
            let jet = |rng: &mut ChaCha8Rng| {
                Scalar::from_derivatives(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            };
            let s = CollarSection {
                h: jet(&mut rng),
                b: [jet(&mut rng), jet(&mut rng), jet(&mut rng)],
            };
            let r = rng.gen_range(1.2..4.0);
            for (entry, o) in [(&eh, Orientation::Standard), (&tn, Orientation::Reversed)] {
                let m = DiagonalMetric::new(entry.jets(r).unwrap(), o);
                assert!(collar_dirac_check(&s, &m).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn poly_jets() {
        let p = Poly(vec![1.0, 2.0, 0.0, 3.0]);
        let j = p.jet(2.0);
        assert_eq!(j.value(), 1.0 + 4.0 + 24.0);
        assert_eq!(j.derivative(1), 2.0 + 36.0);
        assert_eq!(j.derivative(2), 36.0);
        assert_eq!(j.derivative(3), 18.0);
    }

    #[test]
    fn greens_identity_holds() {
        let report = greens_identity_check(20, 7).unwrap();
        assert_eq!(report.pairs, 20);
        assert!(report.max_residual < 1e-8, "{}", report.max_residual);
        assert!(report.residuals.iter().any(|r| r.boundary.abs() > 1.0e-2));
    }
}
