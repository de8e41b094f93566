//! Closed anti-self-dual 2-forms on the flat 4-ball from eigenforms of `d∘*`
//! on the boundary sphere.
//!
//! Conventions: the flat ball is `dr² + r²Σηᵢ²` oriented by `−dr∧η₁₂₃`, so
//! that the flat rotating-frame triple `−r dr∧ηᵢ + r²ηⱼ∧ηₖ` is self-dual, and
//! `S³` carries the matching reversed orientation. For `α` with
//! `d*α = −kα` (`k ≥ 2`) and `a = *α`, the form
//! `β = d(rᵏa) = k r^{k−1} dr∧a − k rᵏ α` is closed and anti-self-dual.
//!
//! All forms in this module are written in the left-invariant coframe with
//! the plain exterior derivative.

use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exterior::{hodge_star, inner_product, DiagonalMetric, MixedForm, Monomial};
use crate::pwform::{PwForm, PwTriple, RepCache};
use crate::quadrature::{gauss_legendre, HaarGrid};
use crate::scalar::Scalar;
use crate::spectrum::curl_block;
use crate::su2::{EulerAngles, C64, I};
use crate::triple::{complex_structures, l_star, TripleField};
use crate::{Error, FrameMode, Orientation, Result};

/// Orientation of the boundary sphere.
pub const SPHERE_ORIENTATION: Orientation = Orientation::Reversed;
/// Default seed for generator sampling.
pub const DEFAULT_SEED: u64 = 20160131;
/// Number of sample points for pointwise checks.
pub const SAMPLE_POINTS: usize = 100;

/// Flat metric at radius `r` (the radius carries its derivative).
pub fn flat_metric(r: f64) -> DiagonalMetric {
    DiagonalMetric::new([Scalar::variable(r); 3], SPHERE_ORIENTATION)
}

/// The flat triple `−r dr∧ηᵢ + r²ηⱼ∧ηₖ` (rotating frame).
pub fn flat_triple(r: f64) -> TripleField {
    TripleField::from_profile([-Scalar::variable(r); 3], Orientation::Standard, FrameMode::Rotating)
}

#[derive(Debug, Clone)]
pub struct AsdGenerator {
    pub k: u32,
    pub two_j: u32,
    /// Boundary 2-form with `d*α = −kα`.
    pub alpha: PwForm,
    /// `*α`.
    pub a: PwForm,
    /// Largest coordinate of `d a + kα` and `dα` (exact closedness of `β`).
    pub eigen_residual: f64,
}

/// Builds `β = d(rᵏ *α)`; fails unless `d*α = −kα`.
pub fn asd_from_eigenform(alpha: &PwForm, k: u32) -> Result<AsdGenerator> {
    if alpha.degree != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            found: alpha.degree,
        });
    }
    if k < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "k",
            value: k as f64,
            reason: "radial exponents start at 2",
        });
    }
    let a = alpha.star(SPHERE_ORIENTATION);
    let da = a.d();
    let scale = alpha.max_abs().max(f64::MIN_POSITIVE);
    let residual = da.add(&alpha.scale(k as f64))?.max_abs().max(alpha.d().max_abs()) / scale;
    if residual > 1e-8 {
        let found = alpha.inner(&da).re / alpha.norm_sq().max(f64::MIN_POSITIVE);
        return Err(Error::EigenvalueMismatch {
            expected: -(k as f64),
            found,
        });
    }
    Ok(AsdGenerator {
        k,
        two_j: alpha.max_two_j(),
        alpha: alpha.clone(),
        a,
        eigen_residual: residual,
    })
}

impl AsdGenerator {
    /// Coefficients of `a` along `ηₛ` and of `α` along `ηⱼ∧ηₖ` at `q`.
    pub fn boundary_values(&self, q: &EulerAngles, reps: &mut RepCache) -> ([f64; 3], [f64; 3]) {
        let a = self.a.evaluate(q, reps);
        let al = self.alpha.evaluate(q, reps);
        ([a[0], a[1], a[2]], [al[0], al[1], al[2]])
    }

    /// `β` at `(r, q)`, coefficients carrying their `r`-derivatives.
    pub fn form_at(&self, r: f64, q: &EulerAngles, reps: &mut RepCache) -> MixedForm {
        let (a, al) = self.boundary_values(q, reps);
        let k = self.k as f64;
        let rr = Scalar::variable(r);
        let radial = rr.powi(self.k - 1).scale(k);
        let slice = rr.powi(self.k).scale(-k);
        let mut beta = MixedForm::zero(2);
        for s in 0..3 {
            let dr_eta = Monomial::DT.wedge(Monomial::eta(s)).expect("disjoint").0;
            beta = beta + MixedForm::monomial(dr_eta, radial.scale(a[s]));
            beta = beta + MixedForm::eta_dual(s).scale(slice.scale(al[s]));
        }
        beta
    }

    /// `|β + *β|` at a point, relative to `|β|`.
    pub fn asd_residual_at(&self, r: f64, q: &EulerAngles, reps: &mut RepCache) -> Result<f64> {
        let beta = self.form_at(r, q, reps).values_only();
        let m = flat_metric(r);
        let sum = &beta + &hodge_star(&beta, &m)?;
        Ok(sum.max_abs() / beta.max_abs().max(1e-300))
    }

    /// `‖β‖²` on the unit ball (mass-1 measure on `S³`) by quadrature.
    pub fn ball_norm_sq(&self, grid: &HaarGrid, reps: &mut RepCache) -> Result<f64> {
        let mut total = 0.0;
        for (r, wr) in gauss_legendre(2 * self.k as usize + 2, 0.0, 1.0) {
            let m = flat_metric(r);
            for (q, wq) in &grid.points {
                let beta = self.form_at(r, q, reps).values_only();
                let n = inner_product(&beta, &beta, &m)?.value();
                total += wr * wq * n * r.powi(3);
            }
        }
        Ok(total)
    }
}

/// Real 2-forms spanning `E_k = {α : d*α = −kα}`.
pub fn eigenforms(k: u32, reps: &mut RepCache) -> Result<Vec<PwForm>> {
    if k < 2 {
        return Ok(Vec::new());
    }
    // with the reversed orientation, curl eigenvalue −k lives in spin (k−2)/2
    let two_j = k - 2;
    let block = curl_block(two_j, SPHERE_ORIENTATION);
    let mut out = Vec::new();
    for line in block.lines() {
        if line.eigenvalue != -(k as f64) {
            continue;
        }
        for v in &line.vectors {
            for copy in 0..crate::su2::dim(two_j) {
                let a = PwForm::single(1, two_j, copy, v.clone())?;
                for z in [C64::from(1.0), I] {
                    let re = a.scale_complex(z).real_part(reps);
                    if re.max_abs() > 1e-12 {
                        out.push(re.star(SPHERE_ORIENTATION));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Real dimension of the span of a set of real forms, by evaluation on a
/// grid.
pub fn real_rank(forms: &[PwForm], grid: &HaarGrid, reps: &mut RepCache) -> usize {
    if forms.is_empty() {
        return 0;
    }
    let cols: Vec<Vec<f64>> = forms
        .iter()
        .map(|f| grid.points.iter().flat_map(|(q, _)| f.evaluate(q, reps)).collect())
        .collect();
    let m = DMatrix::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i]);
    m.rank(1e-9 * m.amax().max(1.0))
}

/// `per_k` seeded random unit-norm combinations of eigenforms for each `k`.
pub fn generators(ks: &[u32], per_k: usize, seed: u64) -> Result<Vec<AsdGenerator>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reps = RepCache::new();
    let mut out = Vec::new();
    for &k in ks {
        let basis = eigenforms(k, &mut reps)?;
        for _ in 0..per_k {
            let mut alpha = PwForm::zero(2);
            for b in &basis {
                alpha = alpha.add(&b.scale(rng.gen_range(-1.0..1.0)))?;
            }
            let n = alpha.norm_sq().sqrt();
            out.push(asd_from_eigenform(&alpha.scale(1.0 / n), k)?);
        }
    }
    Ok(out)
}

/// Seeded sample points `(r, q)` with `r ∈ [0.1, 1]`.
pub fn sample_points(n: usize, seed: u64) -> Vec<(f64, EulerAngles)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rng.gen_range(0.1..1.0);
            let q = EulerAngles::new(
                rng.gen_range(0.0..std::f64::consts::PI),
                rng.gen_range(0.0..std::f64::consts::FRAC_PI_2),
                rng.gen_range(0.0..2.0 * std::f64::consts::PI),
            );
            (r, q)
        })
        .collect()
}

/// Pointwise matrix `(θᵢ, ωⱼ)` with the flat triple.
pub fn flat_gram(theta: &[MixedForm; 3], r: f64) -> Result<Matrix3<f64>> {
    let omega = flat_triple(r);
    let m = flat_metric(r);
    let mut out = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[(i, j)] = inner_product(&theta[i].values_only(), &omega.forms[j].values_only(), &m)?.value();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentReport {
    /// Largest entry of `(θᵢ, ωⱼ)` over the sample points.
    pub max_inner: f64,
    /// The matrix at the worst point.
    pub worst: [[f64; 3]; 3],
    /// Largest component of `L*θ` (spin-0 triples only).
    pub l_star: Option<f64>,
}

/// `(θᵢ, ωⱼ)` for a triple of generators against the flat triple, and
/// `L*θ` where it can be computed pointwise.
pub fn tangent_condition_check(
    theta: [&AsdGenerator; 3],
    points: &[(f64, EulerAngles)],
    reps: &mut RepCache,
) -> Result<TangentReport> {
    let mut max_inner = 0.0;
    let mut worst = [[0.0; 3]; 3];
    let invariant = theta.iter().all(|g| g.two_j == 0);
    let mut l_star_max: Option<f64> = invariant.then_some(0.0);
    for (r, q) in points {
        let forms = theta.map(|g| g.form_at(*r, q, reps));
        let gram = flat_gram(&forms, *r)?;
        let m = gram.amax();
        if m >= max_inner {
            max_inner = m;
            worst = std::array::from_fn(|i| std::array::from_fn(|j| gram[(i, j)]));
        }
        if let Some(ls) = l_star_max.as_mut() {
            let metric = flat_metric(*r);
            let omega = flat_triple(*r);
            let j = complex_structures(&omega, &metric);
            let th = TripleField::new(forms, Orientation::Standard, FrameMode::Fixed)?;
            let v = l_star(&th, &j, &metric)?;
            *ls = v.iter().map(|x| x.value().abs()).fold(*ls, f64::max);
        }
    }
    Ok(TangentReport {
        max_inner,
        worst,
        l_star: l_star_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientVerdict {
    pub pass: bool,
    /// Largest `|Σᵢ(αᵢ,γᵢ)|` on the grid.
    pub trace: f64,
    /// Largest `|(αᵢ,γⱼ) − (αⱼ,γᵢ)|` on the grid.
    pub skew: f64,
    /// Whether each `αᵢ` is closed with only negative spectral content.
    pub in_z2_minus: bool,
}

/// Checks that `(αᵢ, γⱼ)` is symmetric and traceless pointwise, for the
/// unit round framing `γⱼ = ηₖ∧ηₗ`.
pub fn quotient_condition_check(alpha: &PwTriple, max_two_j: u32, tol: f64) -> Result<QuotientVerdict> {
    let top = alpha.iter().map(|f| f.max_two_j()).max().unwrap_or(0);
    if top > max_two_j {
        return Err(Error::TruncationIncomplete {
            spin: top as f64 / 2.0,
            max: max_two_j as f64 / 2.0,
        });
    }
    let mut reps = RepCache::new();
    let grid = HaarGrid::for_spin(max_two_j);
    let (mut trace, mut skew) = (0.0f64, 0.0f64);
    for (q, _) in &grid.points {
        let m: Vec<Vec<f64>> = alpha.iter().map(|f| f.evaluate(q, &mut reps)).collect();
        trace = trace.max((m[0][0] + m[1][1] + m[2][2]).abs());
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            skew = skew.max((m[i][j] - m[j][i]).abs());
        }
    }
    let closed = alpha.iter().all(|f| f.d().max_abs() < 1e-10);
    let negative = crate::spectrum::classify_frequency(alpha, SPHERE_ORIENTATION, max_two_j)?;
    let in_z2_minus = closed
        && negative
            .components
            .iter()
            .all(|c| c.eigenvalue < 0.0);
    Ok(QuotientVerdict {
        pass: trace < tol && skew < tol,
        trace,
        skew,
        in_z2_minus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorRecord {
    pub index: usize,
    pub k: u32,
    pub spin: f64,
    pub closed_residual: f64,
    pub asd_residual: f64,
    pub tangent_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsdInventory {
    pub seed: u64,
    pub generators: Vec<GeneratorRecord>,
    /// Per consecutive triple of generators.
    pub triples: Vec<TangentReport>,
    pub max_closed: f64,
    pub max_asd: f64,
    pub max_tangent: f64,
}

/// Builds `per_k` generators for each `k` and runs the pointwise checks.
pub fn inventory(ks: &[u32], per_k: usize, seed: u64) -> Result<AsdInventory> {
    let gens = generators(ks, per_k, seed)?;
    let points = sample_points(SAMPLE_POINTS, seed ^ 0x5eed);
    let records: Vec<GeneratorRecord> = gens
        .par_iter()
        .enumerate()
        .map(|(index, g)| {
            let mut reps = RepCache::new();
            let mut asd = 0.0f64;
            let mut tangent = 0.0f64;
            for (r, q) in &points {
                asd = asd.max(g.asd_residual_at(*r, q, &mut reps)?);
                let beta = g.form_at(*r, q, &mut reps);
                let row = flat_gram(&[beta.clone(), beta.clone(), beta], *r)?;
                tangent = tangent.max(row.row(0).amax());
            }
            Ok(GeneratorRecord {
                index,
                k: g.k,
                spin: g.two_j as f64 / 2.0,
                closed_residual: g.eigen_residual,
                asd_residual: asd,
                tangent_residual: tangent,
            })
        })
        .collect::<Result<_>>()?;
    let triples: Vec<TangentReport> = gens
        .chunks_exact(3)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|c| tangent_condition_check([&c[0], &c[1], &c[2]], &points, &mut RepCache::new()))
        .collect::<Result<_>>()?;
    let fold = |f: &dyn Fn(&GeneratorRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
    let max_tangent = triples.iter().map(|t| t.max_inner).fold(fold(&|r| r.tangent_residual), f64::max);
    Ok(AsdInventory {
        seed,
        max_closed: fold(&|r| r.closed_residual),
        max_asd: fold(&|r| r.asd_residual),
        max_tangent,
        generators: records,
        triples,
    })
}
