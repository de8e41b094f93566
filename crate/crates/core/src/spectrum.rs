//! Curl and `D_Y` spectra on the round `S³` by Peter–Weyl blocks, and the
//! frequency of framing perturbations.
//!
//! Each spin-`j` block acts on the `v`-vectors of one copy; the block
//! multiplicity of an eigenvalue is counted `2j+1` times (one per copy).
//! Blocks are complex Hermitian; the spectrum of the underlying real operator
//! is the same multiset.

use std::io::Write;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::profile::{catalog, Family};
use crate::pwform::{d_block, PwForm, PwTriple};
use crate::su2::{dim, intertwiner, CMatrix, CVector, Rep};
use crate::{Error, Orientation, Result};

/// Distance to an integer below which eigenvalues are snapped.
pub const INTEGER_SNAP: f64 = 1e-7;
/// Eigenvalues closer than this are one line.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Relative weight below which a spectral component is ignored.
pub const WEIGHT_TOL: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralOperator {
    /// `*d` on 1-forms.
    Curl,
    /// `[[0, d*], [d, *d]]` on functions ⊕ 1-forms.
    Dy,
}

impl std::str::FromStr for SpectralOperator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "curl" => Ok(SpectralOperator::Curl),
            "dy" => Ok(SpectralOperator::Dy),
            _ => Err(Error::Invalid(format!("operator must be curl or dy, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IrrepBlock {
    pub two_j: u32,
    pub operator: SpectralOperator,
    pub orientation: Orientation,
    pub matrix: CMatrix,
}

pub fn curl_block(two_j: u32, orientation: Orientation) -> IrrepBlock {
    IrrepBlock {
        two_j,
        operator: SpectralOperator::Curl,
        orientation,
        matrix: d_block(two_j, 1).map(|z| z * orientation.sign()),
    }
}

pub fn dy_block(two_j: u32, orientation: Orientation) -> IrrepBlock {
    let n = dim(two_j);
    let d0 = d_block(two_j, 0);
    let mut m = CMatrix::zeros(4 * n, 4 * n);
    m.view_mut((0, n), (n, 3 * n)).copy_from(&d0.adjoint());
    m.view_mut((n, 0), (3 * n, n)).copy_from(&d0);
    m.view_mut((n, n), (3 * n, 3 * n))
        .copy_from(&d_block(two_j, 1).map(|z| z * orientation.sign()));
    IrrepBlock {
        two_j,
        operator: SpectralOperator::Dy,
        orientation,
        matrix: m,
    }
}

pub fn block(op: SpectralOperator, two_j: u32, orientation: Orientation) -> IrrepBlock {
    match op {
        SpectralOperator::Curl => curl_block(two_j, orientation),
        SpectralOperator::Dy => dy_block(two_j, orientation),
    }
}

/// One eigenvalue cluster of a block.
#[derive(Debug, Clone)]
pub struct BlockLine {
    pub eigenvalue: f64,
    pub vectors: Vec<CVector>,
}

impl IrrepBlock {
    pub fn hermitian_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `d*` restricted to the block's domain (1-form part).
    fn codifferential(&self) -> CMatrix {
        let n = dim(self.two_j);
        let co = d_block(self.two_j, 0).adjoint();
        match self.operator {
            SpectralOperator::Curl => co,
            SpectralOperator::Dy => {
                let mut m = CMatrix::zeros(n, 4 * n);
                m.view_mut((0, n), (n, 3 * n)).copy_from(&co);
                m
            }
        }
    }

    /// Eigenvalues clustered within [`CLUSTER_TOL`], ascending, with
    /// orthonormal eigenvectors.
    pub fn lines(&self) -> Vec<BlockLine> {
        let h = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut lines: Vec<BlockLine> = Vec::new();
        for k in order {
            let lambda = eig.eigenvalues[k];
            let v = eig.eigenvectors.column(k).clone_owned();
            match lines.last_mut() {
                Some(line) if (lambda - line.eigenvalue).abs() < CLUSTER_TOL => line.vectors.push(v),
                _ => lines.push(BlockLine {
                    eigenvalue: lambda,
                    vectors: vec![v],
                }),
            }
        }
        for line in &mut lines {
            line.eigenvalue = snap(line.eigenvalue);
        }
        lines
    }

    /// `dim(line ∩ ker d*)`.
    pub fn coclosed_dimension(&self, line: &BlockLine) -> usize {
        let co = self.codifferential();
        let n = line.vectors.len();
        let basis = CMatrix::from_columns(&line.vectors);
        let img = co * basis;
        let sv = img.singular_values();
        let rank = sv.iter().filter(|s| **s > 1e-8).count();
        n - rank
    }
}

pub fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < INTEGER_SNAP {
        r + 0.0 // no negative zero
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub eigenvalue: f64,
    /// Whether the eigenvalue snapped to an integer.
    pub integer: bool,
    /// Total multiplicity, block multiplicity times `2j+1`, summed over `j`.
    pub multiplicity: usize,
    /// `dim G_λ` (coclosed part).
    pub coclosed_multiplicity: usize,
    /// No contribution from the next two spins beyond the truncation.
    pub complete: bool,
    /// `(2j, block multiplicity)` contributions.
    pub sectors: Vec<(u32, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub operator: SpectralOperator,
    pub orientation: Orientation,
    pub max_two_j: u32,
    pub lines: Vec<SpectralLine>,
}

/// Aggregated spectrum over all spins `j ≤ max_two_j/2`.
pub fn spectrum(op: SpectralOperator, max_two_j: u32, orientation: Orientation) -> Spectrum {
    let per_block: Vec<Vec<(f64, usize, usize)>> = (0..=max_two_j + 2)
        .into_par_iter()
        .map(|two_j| {
            let b = block(op, two_j, orientation);
            b.lines()
                .iter()
                .map(|l| (l.eigenvalue, l.vectors.len(), b.coclosed_dimension(l)))
                .collect()
        })
        .collect();
    let beyond: Vec<f64> = per_block[max_two_j as usize + 1..]
        .iter()
        .flatten()
        .map(|x| x.0)
        .collect();

    let mut lines: Vec<SpectralLine> = Vec::new();
    for (two_j, block_lines) in per_block.iter().enumerate().take(max_two_j as usize + 1) {
        let copies = dim(two_j as u32);
        for &(lambda, m, mc) in block_lines {
            let idx = lines
                .iter()
                .position(|l| (l.eigenvalue - lambda).abs() < CLUSTER_TOL);
            let line = match idx {
                Some(i) => &mut lines[i],
                None => {
                    lines.push(SpectralLine {
                        eigenvalue: lambda,
                        integer: lambda == lambda.round(),
                        multiplicity: 0,
                        coclosed_multiplicity: 0,
                        complete: false,
                        sectors: Vec::new(),
                    });
                    lines.last_mut().expect("just pushed")
                }
            };
            line.multiplicity += m * copies;
            line.coclosed_multiplicity += mc * copies;
            line.sectors.push((two_j as u32, m));
        }
    }
    for line in &mut lines {
        line.complete = !beyond.iter().any(|x| (x - line.eigenvalue).abs() < CLUSTER_TOL);
    }
    lines.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    Spectrum {
        operator: op,
        orientation,
        max_two_j,
        lines,
    }
}

impl Spectrum {
    pub fn line(&self, lambda: f64) -> Option<&SpectralLine> {
        self.lines
            .iter()
            .find(|l| (l.eigenvalue - lambda).abs() < CLUSTER_TOL)
    }

    pub fn coclosed_multiplicity(&self, lambda: f64) -> usize {
        self.line(lambda).map_or(0, |l| l.coclosed_multiplicity)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["lambda", "mult", "coclosed_mult", "complete"])?;
        for l in &self.lines {
            wr.write_record([
                crate::io::fmt_f64(l.eigenvalue),
                l.multiplicity.to_string(),
                l.coclosed_multiplicity.to_string(),
                l.complete.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Positive,
    Negative,
    HarmonicZero,
    Mixed,
}

impl Frequency {
    pub fn flipped(self) -> Frequency {
        match self {
            Frequency::Positive => Frequency::Negative,
            Frequency::Negative => Frequency::Positive,
            other => other,
        }
    }
}

impl std::fmt::Display for Frequency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Frequency::Positive => "positive",
            Frequency::Negative => "negative",
            Frequency::HarmonicZero => "harmonic_zero",
            Frequency::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyComponent {
    pub eigenvalue: f64,
    /// Squared `L²` norm of the projection onto the eigenline.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVerdict {
    pub classification: Frequency,
    pub components: Vec<FrequencyComponent>,
}

/// Decomposes a perturbation of 2-forms onto the eigenlines of `d∘*`
/// (conjugate by `*` to the curl) and classifies it by eigenvalue signs.
pub fn classify_frequency(
    perturbation: &PwTriple,
    orientation: Orientation,
    max_two_j: u32,
) -> Result<FrequencyVerdict> {
    let mut components: Vec<FrequencyComponent> = Vec::new();
    let mut cache: std::collections::BTreeMap<u32, Vec<BlockLine>> = Default::default();
    for form in perturbation {
        if form.degree != 2 {
            return Err(Error::DegreeMismatch {
                expected: 2,
                found: form.degree,
            });
        }
        for (&(two_j, _), v) in &form.comps {
            if two_j > max_two_j {
                return Err(Error::TruncationIncomplete {
                    spin: two_j as f64 / 2.0,
                    max: max_two_j as f64 / 2.0,
                });
            }
            let lines = cache
                .entry(two_j)
                .or_insert_with(|| curl_block(two_j, orientation).lines());
            // the 1-form *β has coefficients σv
            let a = v.map(|z| z * orientation.sign());
            for line in lines.iter() {
                let w: f64 = line.vectors.iter().map(|e| e.dotc(&a).norm_sqr()).sum::<f64>()
                    / dim(two_j) as f64;
                match components
                    .iter_mut()
                    .find(|c| (c.eigenvalue - line.eigenvalue).abs() < CLUSTER_TOL)
                {
                    Some(c) => c.weight += w,
                    None => components.push(FrequencyComponent {
                        eigenvalue: line.eigenvalue,
                        weight: w,
                    }),
                }
            }
        }
    }
    let total: f64 = components.iter().map(|c| c.weight).sum();
    components.retain(|c| c.weight > WEIGHT_TOL.max(1e-14 * total));
    components.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    let pos = components.iter().any(|c| c.eigenvalue > 0.0);
    let neg = components.iter().any(|c| c.eigenvalue < 0.0);
    let zero = components.iter().any(|c| c.eigenvalue == 0.0);
    let classification = match (pos, neg, zero) {
        (true, false, false) => Frequency::Positive,
        (false, true, false) => Frequency::Negative,
        (false, false, _) => Frequency::HarmonicZero,
        _ => Frequency::Mixed,
    };
    Ok(FrequencyVerdict {
        classification,
        components,
    })
}

/// Left-invariant perturbation `Σ_c δ_c β_c` in component `c` (fixed frame).
pub fn invariant_perturbation_coords(delta: [f64; 3]) -> PwTriple {
    std::array::from_fn(|c| {
        let mut slots = [0.0; 3];
        slots[c] = delta[c];
        if delta[c] == 0.0 {
            PwForm::zero(2)
        } else {
            PwForm::invariant(2, &slots)
        }
    })
}

/// `Ω_c = Σₐ Ad(q)_{ca} δₐ βₐ` in Peter–Weyl coordinates: spin-1 matrix
/// coefficients (through the intertwiner from `ad` to `π₁`) times invariant
/// 2-forms.
pub fn rotated_perturbation_coords(delta: [f64; 3]) -> PwTriple {
    let u = intertwiner(&Rep::adjoint(), &Rep::spin(2)).expect("ad ≅ π₁");
    let uinv = u.clone().try_inverse().expect("intertwiner is invertible");
    std::array::from_fn(|c| {
        let mut form = PwForm::zero(2);
        if delta.iter().all(|d| *d == 0.0) {
            return form;
        }
        // Ad_{ca}(q) = Σ_u U_{cu} ⟨e_u, π₁(q) U⁻¹eₐ⟩
        for copy in 0..3 {
            let mut v = CVector::zeros(9);
            for a in 0..3 {
                let w = uinv.column(a).map(|z| z * u[(c, copy)] * delta[a]);
                v.rows_mut(3 * a, 3).copy_from(&w);
            }
            form.comps.insert((2, copy), v);
        }
        form
    })
}

/// Removes the `L²` component of `p` along `direction`; returns the
/// remainder and the coefficient.
pub fn project_out(p: &PwTriple, direction: &PwTriple) -> Result<(PwTriple, f64)> {
    let nn = crate::pwform::triple_inner(direction, direction).re;
    if nn == 0.0 {
        return Ok((p.clone(), 0.0));
    }
    let coeff = crate::pwform::triple_inner(direction, p).re / nn;
    let mut out = Vec::with_capacity(3);
    for i in 0..3 {
        out.push(p[i].sub(&direction[i].scale(coeff))?);
    }
    Ok((out.try_into().expect("three forms"), coeff))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum FrequencyPreset {
    /// Eguchi–Hanson framing at `r = 1` minus the unit round framing.
    EguchiHansonDelta { c: f64 },
    /// Taub–NUT framing at `r = m + 1/(2m)` minus the unit round framing,
    /// conjugated by `Ad(q)`.
    TaubNutDelta { m: f64 },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub preset: FrequencyPreset,
    pub orientation: Orientation,
    /// `g − (1,1,1)` of the perturbed framing.
    pub delta: [f64; 3],
    /// Verdict after removing the dilation direction (the unperturbed framing).
    pub verdict: FrequencyVerdict,
    /// Verdict of the raw perturbation.
    pub raw: FrequencyVerdict,
    pub dilation_coefficient: f64,
}

/// Coordinates, unit framing and default orientation of a preset.
pub fn preset_perturbation(preset: &FrequencyPreset) -> Result<(PwTriple, PwTriple, [f64; 3], Orientation)> {
    match *preset {
        FrequencyPreset::EguchiHansonDelta { c } => {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::ParameterOutOfRange {
                    name: "c",
                    value: c,
                    reason: "the r = 1 slice exists only for 0 < c < 1",
                });
            }
            let e = catalog(Family::EguchiHanson { c })?;
            let g = crate::framing::catalog_framing(&e, 1.0)?;
            let delta = g.g.map(|x| x - 1.0);
            Ok((
                invariant_perturbation_coords(delta),
                invariant_perturbation_coords([1.0; 3]),
                delta,
                g.orientation,
            ))
        }
        FrequencyPreset::TaubNutDelta { m } => {
            let e = catalog(Family::TaubNut { m })?;
            let g = crate::framing::catalog_framing(&e, m + 0.5 / m)?;
            let delta = g.g.map(|x| x - 1.0);
            Ok((
                rotated_perturbation_coords(delta),
                rotated_perturbation_coords([1.0; 3]),
                delta,
                g.orientation,
            ))
        }
        FrequencyPreset::Zero => Ok((
            invariant_perturbation_coords([0.0; 3]),
            invariant_perturbation_coords([1.0; 3]),
            [0.0; 3],
            Orientation::Standard,
        )),
    }
}

/// Classifies a preset perturbation (orientation defaults to the boundary
/// orientation of the family).
pub fn frequency_preset(preset: FrequencyPreset, orientation: Option<Orientation>) -> Result<FrequencyReport> {
    let (pert, unit, delta, default) = preset_perturbation(&preset)?;
    let orientation = orientation.unwrap_or(default);
    let max = 2;
    let raw = classify_frequency(&pert, orientation, max)?;
    let (rest, dilation_coefficient) = project_out(&pert, &unit)?;
    let verdict = classify_frequency(&rest, orientation, max)?;
    Ok(FrequencyReport {
        preset,
        orientation,
        delta,
        verdict,
        raw,
        dilation_coefficient,
    })
}

pub fn frequency_of_form(form: &PwForm, orientation: Orientation) -> Result<FrequencyVerdict> {
    let triple = [form.clone(), PwForm::zero(2), PwForm::zero(2)];
    classify_frequency(&triple, orientation, form.max_two_j())
}
