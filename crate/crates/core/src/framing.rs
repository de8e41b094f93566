//! Closed framings of `Λ²S³` and the hyperkähler flow `∂γ/∂t = d(*γ)`.
//!
//! A framing is written `γₐ = Σ_b M_ab βᵦ` with `βᵦ = η_{b+1}∧η_{b+2}`; the
//! diagonal case `M = diag(g)` is the SU(2)-invariant one that the flow
//! preserves. The flow time is the outward coordinate: for `Reversed`
//! orientation it is `−t` in terms of the 4d ansatz.

use std::io::Write;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::ode::{self, DenseOutput, Stop, Tolerances};
use crate::profile::CatalogEntry;
use crate::scalar::Scalar;
use crate::triple::TripleField;
use crate::{Axis, Error, FrameMode, Orientation, Result};

/// Relative size below which a frame length counts as collapsed.
pub const COLLAPSE_FRACTION: f64 = 1e-6;
/// Pairwise rate-ratio tolerance for a smooth point.
pub const RATE_RATIO_TOL: f64 = 1e-3;
/// Number of tail points used in the exponent fit.
pub const EXPONENT_FIT_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramingState {
    pub g: [f64; 3],
    pub mode: FrameMode,
    pub orientation: Orientation,
    /// Full coefficient matrix for non-diagonal framings; rows are `γₐ`.
    pub matrix: Option<[[f64; 3]; 3]>,
}

/// Metric on `span{ηᵢ}` making the framing orthonormal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedMetric {
    pub h: Matrix3<f64>,
    /// `√det h`, the coefficient of the volume form on `η₁∧η₂∧η₃`.
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Inward,
    Outward,
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inward" => Ok(Direction::Inward),
            "outward" => Ok(Direction::Outward),
            _ => Err(Error::Invalid(format!("direction must be inward or outward, got '{s}'"))),
        }
    }
}

/// `d` (fixed frame) or the twisted `D` (rotating frame) of the 1-form triple
/// `xₐ = Σ_e X_ae ηₑ`, as the coefficient matrix on `{βₑ}`.
pub fn d_one_form_matrix(x: &Matrix3<f64>, mode: FrameMode) -> Matrix3<f64> {
    match mode {
        FrameMode::Fixed => 2.0 * x,
        FrameMode::Rotating => 2.0 * x + 2.0 * x.transpose() - 2.0 * x.trace() * Matrix3::identity(),
    }
}

impl FramingState {
    pub fn diagonal(g: [f64; 3], mode: FrameMode, orientation: Orientation) -> Self {
        FramingState {
            g,
            mode,
            orientation,
            matrix: None,
        }
    }

    /// Non-diagonal framing; `g` records the diagonal of `m`.
    pub fn general(m: Matrix3<f64>, mode: FrameMode, orientation: Orientation) -> Self {
        let mut rows = [[0.0; 3]; 3];
        for (a, row) in rows.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = m[(a, b)];
            }
        }
        FramingState {
            g: [m[(0, 0)], m[(1, 1)], m[(2, 2)]],
            mode,
            orientation,
            matrix: Some(rows),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix.is_none()
    }

    pub fn coefficient_matrix(&self) -> Matrix3<f64> {
        match &self.matrix {
            Some(rows) => Matrix3::from_fn(|a, b| rows[a][b]),
            None => Matrix3::from_diagonal(&self.g.into()),
        }
    }

    /// `fᵢ = √(gⱼgₖ/gᵢ)`; requires a diagonal framing with `g > 0`.
    pub fn scale_factors(&self) -> Result<[f64; 3]> {
        if !self.is_diagonal() {
            return Err(Error::Invalid("scale factors are defined for diagonal framings".into()));
        }
        scale_factors(&self.g)
    }

    /// The framing of `ω` restricted to the slice through `f` (`gᵢ = fⱼfₖ`).
    pub fn from_profile(f: &[f64; 3], mode: FrameMode, orientation: Orientation) -> Self {
        FramingState::diagonal(
            std::array::from_fn(|i| f[(i + 1) % 3] * f[(i + 2) % 3]),
            mode,
            orientation,
        )
    }
}

pub fn scale_factors(g: &[f64; 3]) -> Result<[f64; 3]> {
    if g.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::NonPositiveFraming { g: *g });
    }
    Ok(std::array::from_fn(|i| {
        (g[(i + 1) % 3] * g[(i + 2) % 3] / g[i]).sqrt()
    }))
}

/// Boundary framing of a catalog solution at radius `r`, with the
/// orientation whose flow time points outward.
pub fn catalog_framing(entry: &CatalogEntry, r: f64) -> Result<FramingState> {
    let s = entry.state(r)?;
    Ok(FramingState::from_profile(&s.f, entry.mode(), entry.boundary_orientation()))
}

/// `h = |det M| (MᵀM)⁻¹`: the unique metric for which `γ` is an oriented
/// orthonormal frame of `Λ²`.
pub fn induced_metric(gamma: &FramingState) -> Result<InducedMetric> {
    let m = gamma.coefficient_matrix();
    let det = m.determinant();
    let scale = m.abs().max().max(f64::MIN_POSITIVE);
    if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(3) {
        return Err(Error::DegenerateFraming("det M vanishes"));
    }
    let mtm_inv = (m.transpose() * m).try_inverse().ok_or(Error::DegenerateFraming("MᵀM is singular"))?;
    let h = det.abs() * mtm_inv;
    let h = 0.5 * (h + h.transpose());
    Ok(InducedMetric {
        volume: h.determinant().sqrt(),
        h,
    })
}

/// Coefficient matrix of `*γ` on `{ηₑ}` (rows are `*γₐ`).
pub fn star_framing(gamma: &FramingState) -> Result<Matrix3<f64>> {
    let im = induced_metric(gamma)?;
    let m = gamma.coefficient_matrix();
    Ok(gamma.orientation.sign() * m * im.h / im.volume)
}

/// The matrix `S_ac = (γₐ, d*γ_c)` in the induced metric.
pub fn second_fundamental_matrix(gamma: &FramingState) -> Result<Matrix3<f64>> {
    let im = induced_metric(gamma)?;
    let m = gamma.coefficient_matrix();
    let dx = d_one_form_matrix(&star_framing(gamma)?, gamma.mode);
    Ok(m * im.h * dx.transpose() / im.h.determinant())
}

/// Half the trace of [`second_fundamental_matrix`].
pub fn mean_curvature(gamma: &FramingState) -> Result<f64> {
    Ok(0.5 * second_fundamental_matrix(gamma)?.trace())
}

/// `ġ` for the invariant flow: `2σf` (fixed) or `σ(2fᵢ − 2(fⱼ + fₖ))`
/// (rotating).
pub fn flow_rhs(g: &[f64; 3], mode: FrameMode, orientation: Orientation) -> Result<[f64; 3]> {
    let f = scale_factors(g)?;
    let s = orientation.sign();
    Ok(std::array::from_fn(|i| match mode {
        FrameMode::Fixed => s * 2.0 * f[i],
        FrameMode::Rotating => s * (2.0 * f[i] - 2.0 * (f[(i + 1) % 3] + f[(i + 2) % 3])),
    }))
}

/// `ḟ` from `g` and `ġ`: `ḟᵢ/fᵢ = ½(ġⱼ/gⱼ + ġₖ/gₖ − ġᵢ/gᵢ)`.
pub fn scale_factor_rates(g: &[f64; 3], dg: &[f64; 3]) -> Result<[f64; 3]> {
    let f = scale_factors(g)?;
    let l: [f64; 3] = std::array::from_fn(|i| dg[i] / g[i]);
    Ok(std::array::from_fn(|i| {
        0.5 * f[i] * (l[(i + 1) % 3] + l[(i + 2) % 3] - l[i])
    }))
}

/// The 4d triple `ds∧*γ + γ` at a flow state, with `s` the flow time,
/// as a triple on the `t`-coframe.
pub fn reconstructed_triple(g: &[f64; 3], mode: FrameMode, orientation: Orientation) -> Result<TripleField> {
    let dg = flow_rhs(g, mode, orientation)?;
    reconstructed_from(g, &dg, mode, orientation)
}

fn reconstructed_from(
    g: &[f64; 3],
    dg: &[f64; 3],
    mode: FrameMode,
    orientation: Orientation,
) -> Result<TripleField> {
    let f = scale_factors(g)?;
    let df = scale_factor_rates(g, dg)?;
    let s = orientation.sign();
    let jets = std::array::from_fn(|i| Scalar::with_derivative(s * f[i], s * df[i]));
    Ok(TripleField::from_profile(jets, Orientation::Standard, mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    pub g: [f64; 3],
    pub f: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStop {
    SpanReached,
    Collapse,
    SignChange,
    StepUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "axis", rename_all = "snake_case")]
pub enum TerminalKind {
    SmoothPoint,
    Bolt(Axis),
    IncompleteBlowup,
    SpanReached,
}

impl std::fmt::Display for TerminalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TerminalKind::SmoothPoint => write!(f, "smooth_point"),
            TerminalKind::Bolt(a) => write!(f, "bolt({a})"),
            TerminalKind::IncompleteBlowup => write!(f, "incomplete_blowup"),
            TerminalKind::SpanReached => write!(f, "span_reached"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalClass {
    pub kind: TerminalKind,
    /// `f` at the final sample.
    pub f_limit: [f64; 3],
    /// `df/ds` at the final sample (NaN where undefined).
    pub f_rate: [f64; 3],
    /// Fitted exponents `p` in `fᵢ ∝ |s − s*|^p` for collapsing components.
    pub exponents: [Option<f64>; 3],
    /// Estimated collapse time `s*`.
    pub collapse_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub mode: FrameMode,
    pub orientation: Orientation,
    pub direction: Direction,
    pub samples: Vec<FlowSample>,
    pub stop: FlowStop,
    pub terminal: TerminalClass,
    #[serde(skip)]
    dense: Option<DenseOutput<3>>,
}

impl FlowTrajectory {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("flow trajectory has a start sample")
    }

    pub fn interpolate(&self, t: f64) -> Option<[f64; 3]> {
        self.dense.as_ref()?.eval(t)
    }

    /// `max |dω|` of the reconstructed triple over all samples.
    pub fn closedness_residual(&self) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| reconstructed_triple(&s.g, self.mode, self.orientation).ok())
            .map(|w| w.closedness_residual())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "g1", "g2", "g3", "f1", "f2", "f3"])?;
        for s in &self.samples {
            let row = [s.t, s.g[0], s.g[1], s.g[2], s.f[0], s.f[1], s.f[2]];
            wr.write_record(row.iter().map(|x| crate::io::fmt_f64(*x)))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Flow-time sign that shrinks the slice volume (`−sign H`).
pub fn inward_sign(gamma: &FramingState) -> Result<f64> {
    let h = mean_curvature(gamma)?;
    if h == 0.0 {
        return Err(Error::Invalid("zero mean curvature: inward direction undefined".into()));
    }
    Ok(-h.signum())
}

/// Evolves a diagonal framing for flow time `span` in the given direction.
pub fn flow_integrate(
    g0: &FramingState,
    direction: Direction,
    span: f64,
    tol: &Tolerances,
) -> Result<FlowTrajectory> {
    if !g0.is_diagonal() {
        return Err(Error::Invalid(
            "the invariant flow is only defined for diagonal framings".into(),
        ));
    }
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::ParameterOutOfRange {
            name: "span",
            value: span,
            reason: "span must be positive",
        });
    }
    let f0 = scale_factors(&g0.g)?;
    let sign = match direction {
        Direction::Inward => inward_sign(g0)?,
        Direction::Outward => -inward_sign(g0)?,
    };
    let (mode, orientation) = (g0.mode, g0.orientation);
    let scale = f0.iter().copied().fold(0.0, f64::max);
    let floor = COLLAPSE_FRACTION * scale;

    let rhs = |_t: f64, g: &[f64; 3]| flow_rhs(g, mode, orientation).ok();
    let e0 = |_t: f64, g: &[f64; 3]| g[0];
    let e1 = |_t: f64, g: &[f64; 3]| g[1];
    let e2 = |_t: f64, g: &[f64; 3]| g[2];
    let collapse = |_t: f64, g: &[f64; 3]| {
        scale_factors(g).map_or(-floor, |f| f.iter().copied().fold(f64::INFINITY, f64::min) - floor)
    };
    let events: [ode::Event<'_, 3>; 4] = [&e0, &e1, &e2, &collapse];
    let sol = ode::integrate(rhs, 0.0, g0.g, sign * span, tol, &events);

    let stop = match &sol.stop {
        Stop::SpanReached => FlowStop::SpanReached,
        Stop::StepUnderflow { .. } => FlowStop::StepUnderflow,
        Stop::Event { indices, .. } if indices.contains(&3) => FlowStop::Collapse,
        Stop::Event { .. } => FlowStop::SignChange,
    };
    let samples = sol
        .t
        .iter()
        .zip(&sol.y)
        .map(|(&t, g)| FlowSample {
            t,
            g: *g,
            f: scale_factors(g).unwrap_or_else(|_| {
                std::array::from_fn(|i| (g[(i + 1) % 3] * g[(i + 2) % 3] / g[i]).abs().sqrt())
            }),
        })
        .collect();
    let mut traj = FlowTrajectory {
        mode,
        orientation,
        direction,
        samples,
        stop,
        terminal: TerminalClass {
            kind: TerminalKind::SpanReached,
            f_limit: [f64::NAN; 3],
            f_rate: [f64::NAN; 3],
            exponents: [None; 3],
            collapse_time: None,
        },
        dense: Some(sol.dense),
    };
    traj.terminal = classify_terminal(&traj);
    Ok(traj)
}

/// Classifies the end of a flow trajectory from its tail.
pub fn classify_terminal(traj: &FlowTrajectory) -> TerminalClass {
    let first = traj.samples[0];
    let last = *traj.last();
    let scale = first.f.iter().copied().fold(0.0, f64::max);
    let rate = traj
        .dense
        .as_ref()
        .and_then(|d| d.eval_dt(last.t))
        .and_then(|dg| scale_factor_rates(&last.g, &dg).ok())
        .unwrap_or([f64::NAN; 3]);
    let mut class = TerminalClass {
        kind: TerminalKind::IncompleteBlowup,
        f_limit: last.f,
        f_rate: rate,
        exponents: [None; 3],
        collapse_time: None,
    };
    if traj.stop == FlowStop::SpanReached {
        class.kind = TerminalKind::SpanReached;
        return class;
    }
    if traj.stop == FlowStop::StepUnderflow {
        return class;
    }

    let tiny: Vec<usize> = (0..3).filter(|&i| last.f[i] <= 1e-3 * scale).collect();
    if tiny.is_empty() {
        return class;
    }
    // linear extrapolation of the first collapsing component to zero
    let lead = *tiny
        .iter()
        .min_by(|&&a, &&b| last.f[a].total_cmp(&last.f[b]))
        .expect("nonempty");
    let t_star = if rate[lead].is_finite() && rate[lead] != 0.0 {
        last.t - last.f[lead] / rate[lead]
    } else {
        last.t
    };
    class.collapse_time = Some(t_star);
    for &i in &tiny {
        class.exponents[i] = fit_exponent(traj, i, t_star);
    }
    let linear = |i: usize| class.exponents[i].is_some_and(|p| (p - 1.0).abs() < 0.05);

    if tiny.len() == 3 {
        let r = rate.map(f64::abs);
        let ratios_ok = (0..3).all(|i| {
            let j = (i + 1) % 3;
            r[i].is_finite() && r[j] > 0.0 && (r[i] / r[j] - 1.0).abs() < RATE_RATIO_TOL
        });
        if ratios_ok && (0..3).all(linear) {
            class.kind = TerminalKind::SmoothPoint;
        }
    } else if tiny.len() == 1 && linear(lead) {
        class.kind = TerminalKind::Bolt(Axis::from_index(lead).expect("axis"));
    }
    class
}

/// Least-squares slope of `log fᵢ` against `log |s − s*|` over
/// geometrically spaced tail points of the dense output.
fn fit_exponent(traj: &FlowTrajectory, i: usize, t_star: f64) -> Option<f64> {
    let dense = traj.dense.as_ref()?;
    let last = traj.last().t;
    let start = traj.samples[0].t;
    let d0 = (t_star - last).abs();
    let d_max = (t_star - start).abs().min(1e3 * d0.max(1e-300));
    if !(d0 > 0.0 && d_max > d0 * 1.5) {
        return None;
    }
    let dir = (last - start).signum();
    let n = EXPONENT_FIT_POINTS;
    let (mut sx, mut sy, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let d = d0 * (d_max / d0).powf(k as f64 / (n - 1) as f64);
        let t = t_star - dir * d;
        let g = dense.eval(t)?;
        let f = scale_factors(&g).ok()?[i];
        let (x, y) = (d.ln(), f.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        count += 1.0;
    }
    let denom = count * sxx - sx * sx;
    (denom > 0.0).then(|| (count * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{MixedForm, Monomial};
    use crate::profile::{self, catalog, Family};
    use crate::triple::triple_d;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn max_diff(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn one_form_derivative_matches_exterior_kernel() {
        let x = Matrix3::new(0.3, -1.1, 0.4, 2.0, 0.7, -0.2, 0.5, 0.9, -1.3);
        for mode in [FrameMode::Fixed, FrameMode::Rotating] {
            let forms: [MixedForm; 3] = std::array::from_fn(|a| {
                (0..3).fold(MixedForm::zero(1), |acc, e| acc + MixedForm::eta(e).scale(x[(a, e)]))
            });
            let d = triple_d(&forms, mode);
            let dx = d_one_form_matrix(&x, mode);
            for a in 0..3 {
                for e in 0..3 {
                    let (mono, sign) = Monomial::eta_dual(e);
                    let c = d[a].coeff(mono).value() * sign;
                    assert!(close(c, dx[(a, e)], 1e-14), "{mode:?} {a}{e}");
                }
            }
        }
    }

    #[test]
    fn induced_metric_examples() {
        let r = 1.7;
        let flat = FramingState::diagonal([r * r; 3], FrameMode::Fixed, Orientation::Standard);
        let h = induced_metric(&flat).unwrap().h;
        assert!(max_diff(&h, &(r * r * Matrix3::identity())) < 1e-14);

        let unit = FramingState::diagonal([1.0; 3], FrameMode::Fixed, Orientation::Standard);
        assert!(max_diff(&induced_metric(&unit).unwrap().h, &Matrix3::identity()) < 1e-15);

        let eh = catalog(Family::EguchiHanson { c: 1.0 }).unwrap();
        let r = 1.4;
        let h = induced_metric(&catalog_framing(&eh, r).unwrap()).unwrap().h;
        let berger = Matrix3::from_diagonal(&[r * r * (1.0 - r.powi(-4)), r * r, r * r].into());
        assert!(max_diff(&h, &berger) < 1e-13);

        let zero = FramingState::general(Matrix3::zeros(), FrameMode::Fixed, Orientation::Standard);
        assert!(matches!(induced_metric(&zero), Err(Error::DegenerateFraming(_))));
    }

    #[test]
    fn framing_is_orthonormal_in_induced_metric() {
        let m = Matrix3::new(2.0, 0.3, -0.1, 0.4, 1.5, 0.2, -0.3, 0.1, 0.8);
        let im = induced_metric(&FramingState::general(m, FrameMode::Fixed, Orientation::Standard)).unwrap();
        let gram = m * im.h * m.transpose() / im.h.determinant();
        assert!(max_diff(&gram, &Matrix3::identity()) < 1e-13);
        assert!(im.h.symmetric_eigenvalues().iter().all(|x| *x > 0.0));
    }

    #[test]
    fn induced_metric_agrees_with_restricted_triple_metric() {
        let tn = catalog(Family::TaubNut { m: 1.0 }).unwrap();
        let s = tn.state(2.3).unwrap();
        let h = induced_metric(&FramingState::from_profile(&s.f, FrameMode::Rotating, Orientation::Reversed))
            .unwrap()
            .h;
        let g4 = crate::triple::metric_from_definite(&tn.triple(2.3).unwrap().point_matrices()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(h[(i, j)], g4[(i + 1, j + 1)], 1e-12));
            }
        }
    }

    #[test]
    fn mean_curvature_examples() {
        let r = 2.5;
        let flat = FramingState::diagonal([r * r; 3], FrameMode::Fixed, Orientation::Standard);
        assert!(close(mean_curvature(&flat).unwrap(), 3.0 / r, 1e-14));
        let s = second_fundamental_matrix(&flat).unwrap();
        assert!(max_diff(&s, &((2.0 / r) * Matrix3::identity())) < 1e-14);

        let flipped = FramingState { orientation: Orientation::Reversed, ..flat };
        assert!(max_diff(&second_fundamental_matrix(&flipped).unwrap(), &(-s)) < 1e-15);

        let tn = catalog(Family::TaubNut { m: 1.0 }).unwrap();
        let g = catalog_framing(&tn, 1.5).unwrap();
        assert_eq!(g.orientation, Orientation::Reversed);
        assert!(mean_curvature(&g).unwrap() > 0.0);
    }

    #[test]
    fn mean_curvature_matches_ambient_profile() {
        for (fam, r) in [
            (Family::FlatFixed, 1.3),
            (Family::FlatRotating, 0.7),
            (Family::EguchiHanson { c: 1.0 }, 1.6),
            (Family::TaubNut { m: 0.8 }, 2.2),
        ] {
            let e = catalog(fam).unwrap();
            let jets = e.jets(r).unwrap();
            let sigma = e.boundary_orientation().sign();
            let ambient: f64 = jets.iter().map(|j| j.dt_derivative() / j.value()).sum::<f64>() * sigma;
            let h = mean_curvature(&catalog_framing(&e, r).unwrap()).unwrap();
            assert!(close(h, ambient, 1e-10), "{fam:?}: {h} vs {ambient}");
            assert!(h > 0.0, "{fam:?}");
        }
    }

    #[test]
    fn flow_rhs_examples() {
        let s = Orientation::Standard;
        assert_eq!(flow_rhs(&[1.0; 3], FrameMode::Fixed, s).unwrap(), [2.0; 3]);
        assert_eq!(flow_rhs(&[1.0; 3], FrameMode::Rotating, s).unwrap(), [-2.0; 3]);
        assert_eq!(flow_rhs(&[4.0; 3], FrameMode::Fixed, s).unwrap(), [4.0; 3]);
        assert!(matches!(
            flow_rhs(&[1.0, -1.0, 1.0], FrameMode::Fixed, s),
            Err(Error::NonPositiveFraming { .. })
        ));
    }

    #[test]
    fn flow_rhs_is_the_derivative_of_the_profile_odes() {
        // gᵢ = fⱼfₖ differentiated along either ODE system
        let f = [0.8, 1.3, 1.9];
        for mode in [FrameMode::Fixed, FrameMode::Rotating] {
            let df = profile::ode_rhs(mode, &f).unwrap();
            let g = FramingState::from_profile(&f, mode, Orientation::Standard).g;
            let dg = flow_rhs(&g, mode, Orientation::Standard).unwrap();
            for i in 0..3 {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                assert!(close(dg[i], df[j] * f[k] + f[j] * df[k], 1e-13));
            }
            let back = scale_factor_rates(&g, &dg).unwrap();
            for i in 0..3 {
                assert!(close(back[i], df[i], 1e-13));
            }
        }
    }

    #[test]
    fn flow_rhs_equals_diagonal_of_star_derivative() {
        let g = [1.3, 0.6, 2.2];
        for mode in [FrameMode::Fixed, FrameMode::Rotating] {
            for o in [Orientation::Standard, Orientation::Reversed] {
                let st = FramingState::diagonal(g, mode, o);
                let dx = d_one_form_matrix(&star_framing(&st).unwrap(), mode);
                let dg = flow_rhs(&g, mode, o).unwrap();
                for i in 0..3 {
                    assert!(close(dx[(i, i)], dg[i], 1e-13));
                }
                assert!(dx.iter().enumerate().all(|(n, v)| n % 4 == 0 || v.abs() < 1e-13));
            }
        }
    }

    #[test]
    fn non_diagonal_flow_is_rejected() {
        let m = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let st = FramingState::general(m, FrameMode::Fixed, Orientation::Standard);
        assert!(flow_integrate(&st, Direction::Inward, 1.0, &Tolerances::default()).is_err());
        assert!(second_fundamental_matrix(&st).is_ok());
    }

    #[test]
    fn round_framing_flows_to_a_smooth_point() {
        let st = FramingState::diagonal([1.0; 3], FrameMode::Fixed, Orientation::Standard);
        let tr = flow_integrate(&st, Direction::Inward, 5.0, &Tolerances::default()).unwrap();
        assert_eq!(tr.stop, FlowStop::Collapse);
        assert_eq!(tr.terminal.kind, TerminalKind::SmoothPoint, "{:?}", tr.terminal);
        assert!(close(tr.terminal.collapse_time.unwrap(), -1.0, 1e-8));
        for s in &tr.samples {
            let t = 1.0 + s.t;
            assert!(close(s.g[0], t * t, 1e-9));
        }
        assert!(tr.closedness_residual() < 1e-8);
    }

    #[test]
    fn eguchi_hanson_flows_to_a_bolt() {
        let eh = catalog(Family::EguchiHanson { c: 1.0 }).unwrap();
        let st = catalog_framing(&eh, 2.0).unwrap();
        let f2 = (1.0f64 - 1.0 / 16.0).sqrt();
        assert!(close(st.g[0], 4.0, 1e-15) && close(st.g[1], 4.0 * f2, 1e-14));
        let tr = flow_integrate(&st, Direction::Inward, 10.0, &Tolerances::default()).unwrap();
        assert_eq!(tr.terminal.kind, TerminalKind::Bolt(Axis::One), "{:?}", tr.terminal);
        let g = tr.last().g;
        assert!(close(g[0], 1.0, 1e-5) && g[1].abs() < 1e-5 && g[2].abs() < 1e-5);
        assert!(close(tr.last().f[1], 1.0, 1e-5));
        assert!(tr.closedness_residual() < 1e-8);
    }

    #[test]
    fn taub_nut_flows_to_a_smooth_point() {
        let tn = catalog(Family::TaubNut { m: 1.0 }).unwrap();
        let st = catalog_framing(&tn, 1.5).unwrap();
        let tr = flow_integrate(&st, Direction::Inward, 10.0, &Tolerances::default()).unwrap();
        assert_eq!(tr.terminal.kind, TerminalKind::SmoothPoint, "{:?}", tr.terminal);
        assert!(tr.closedness_residual() < 1e-8);
    }

    #[test]
    fn outward_flow_reaches_span() {
        let st = FramingState::diagonal([1.0; 3], FrameMode::Fixed, Orientation::Standard);
        let tr = flow_integrate(&st, Direction::Outward, 1.0, &Tolerances::default()).unwrap();
        assert_eq!(tr.terminal.kind, TerminalKind::SpanReached);
        assert!(close(tr.last().g[0], 4.0, 1e-9));
    }

    #[test]
    fn flow_agrees_with_profile_integration() {
        let tol = Tolerances::default();
        for (fam, r) in [
            (Family::FlatFixed, 1.0),
            (Family::FlatRotating, 1.0),
            (Family::EguchiHanson { c: 1.0 }, 2.0),
            (Family::TaubNut { m: 1.0 }, 2.0),
        ] {
            let e = catalog(fam).unwrap();
            let start = e.state(r).unwrap();
            let st = catalog_framing(&e, r).unwrap();
            let sigma = st.orientation.sign();
            let flow = flow_integrate(&st, Direction::Inward, 0.3, &tol).unwrap();
            // the flow time is σ·t
            let prof = profile::integrate(&start, start.t + sigma * flow.last().t, &tol).unwrap();
            let fp = prof.last().f.map(f64::abs);
            for i in 0..3 {
                assert!(close(flow.last().f[i], fp[i], 1e-8), "{fam:?}");
            }
        }
    }

    #[test]
    fn scaling_rescales_time() {
        let tol = Tolerances::default();
        let g0 = [1.0, 1.4, 0.9];
        let lambda: f64 = 4.0;
        let base = flow_integrate(
            &FramingState::diagonal(g0, FrameMode::Fixed, Orientation::Standard),
            Direction::Outward,
            0.5,
            &tol,
        )
        .unwrap();
        let scaled = flow_integrate(
            &FramingState::diagonal(g0.map(|x| lambda * x), FrameMode::Fixed, Orientation::Standard),
            Direction::Outward,
            0.5 * lambda.sqrt(),
            &tol,
        )
        .unwrap();
        let a = base.last().g;
        let b = scaled.last().g;
        for i in 0..3 {
            assert!(close(b[i], lambda * a[i], 1e-8));
        }
    }

    #[test]
    fn reconstructed_triple_is_hyperkahler() {
        for mode in [FrameMode::Fixed, FrameMode::Rotating] {
            for o in [Orientation::Standard, Orientation::Reversed] {
                let w = reconstructed_triple(&[1.1, 0.7, 1.9], mode, o).unwrap();
                assert!(w.closedness_residual() < 1e-13);
                assert!(crate::triple::q_matrix(&w).unwrap().max_abs() < 1e-13);
            }
        }
    }

    #[test]
    fn permutation_equivariance_of_flow_rhs() {
        let g = [0.9, 1.6, 2.3];
        let p = [g[1], g[2], g[0]];
        for mode in [FrameMode::Fixed, FrameMode::Rotating] {
            let a = flow_rhs(&g, mode, Orientation::Standard).unwrap();
            let b = flow_rhs(&p, mode, Orientation::Standard).unwrap();
            assert!(close(b[0], a[1], 1e-14) && close(b[1], a[2], 1e-14) && close(b[2], a[0], 1e-14));
        }
    }
}
