//! The SU(2)-invariant ODE reductions, the closed-form catalog, and profile
//! trajectories.
//!
//! A profile `f = (f₁, f₂, f₃)` defines the triple
//! `ωᵢ = fᵢ dt∧ηᵢ + fⱼfₖ ηⱼ∧ηₖ`; it is closed iff `f` solves the fixed-frame
//! system (triple invariant under SU(2)) or the rotating-frame system
//! (triple rotated by `Ad(q)`).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::exterior::STRUCTURE_CONSTANT;
use crate::ode::{self, DenseOutput, Stop, Tolerances};
use crate::scalar::{ode_jets, Real, Scalar};
use crate::triple::{q_matrix, twisted_d, TripleField};
use crate::{Axis, Error, FrameMode, Orientation, Result};

fn check_denominators<R: Real>(f: &[R; 3]) -> Result<()> {
    let v = f.map(|x| x.value());
    if v[0] * v[1] == 0.0 || v[1] * v[2] == 0.0 || v[2] * v[0] == 0.0 || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularProfile { f: v });
    }
    Ok(())
}

/// Fixed-frame system `f₁' = (f₂² + f₃² − f₁²)/(f₂f₃)` (cyclic).
pub fn ode_rhs_fixed<R: Real>(f: &[R; 3]) -> Result<[R; 3]> {
    check_denominators(f)?;
    Ok(std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        (f[j] * f[j] + f[k] * f[k] - f[i] * f[i]) / (f[j] * f[k])
    }))
}

/// Rotating-frame system `f₁' = (f₂² + f₃² − f₁² − 2f₂f₃)/(f₂f₃)` (cyclic).
pub fn ode_rhs_rotating<R: Real>(f: &[R; 3]) -> Result<[R; 3]> {
    check_denominators(f)?;
    Ok(std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let two = R::lift(2.0);
        (f[j] * f[j] + f[k] * f[k] - f[i] * f[i] - two * f[j] * f[k]) / (f[j] * f[k])
    }))
}

pub fn ode_rhs<R: Real>(mode: FrameMode, f: &[R; 3]) -> Result<[R; 3]> {
    match mode {
        FrameMode::Fixed => ode_rhs_fixed(f),
        FrameMode::Rotating => ode_rhs_rotating(f),
    }
}

/// A point on a profile: `f` at parameter `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub f: [f64; 3],
    pub t: f64,
    pub mode: FrameMode,
}

impl ProfileState {
    pub fn new(f: [f64; 3], t: f64, mode: FrameMode) -> Self {
        ProfileState { f, t, mode }
    }

    pub fn rhs(&self) -> Result<[f64; 3]> {
        ode_rhs(self.mode, &self.f)
    }

    /// Taylor jets in `t` of the ODE solution through this state.
    pub fn jets(&self) -> Result<[Scalar; 3]> {
        self.rhs()?;
        let mode = self.mode;
        let mut failure = None;
        let jets = ode_jets(self.f, |x| {
            ode_rhs(mode, x).unwrap_or_else(|e| {
                failure = Some(e);
                [Scalar::ZERO; 3]
            })
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(jets),
        }
    }

    /// `dt² + Σ fᵢ² ηᵢ²` positive definite.
    pub fn metric_is_positive(&self) -> bool {
        self.f.iter().all(|x| *x != 0.0 && x.is_finite())
    }
}

/// The ansatz triple with every derivative channel taken from the ODE.
pub fn triple_from_profile(p: &ProfileState) -> Result<TripleField> {
    Ok(TripleField::from_profile(p.jets()?, Orientation::Standard, p.mode))
}

/// The ansatz triple from sampled values and first derivatives.
pub fn triple_from_sample(s: &Sample, mode: FrameMode) -> TripleField {
    let f = std::array::from_fn(|i| Scalar::with_derivative(s.f[i], s.df[i]));
    TripleField::from_profile(f, Orientation::Standard, mode)
}

/// Closed-form families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    FlatFixed,
    FlatRotating,
    EguchiHanson { c: f64 },
    TaubNut { m: f64 },
}

impl Family {
    pub fn mode(&self) -> FrameMode {
        match self {
            Family::FlatFixed | Family::EguchiHanson { .. } => FrameMode::Fixed,
            Family::FlatRotating | Family::TaubNut { .. } => FrameMode::Rotating,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::FlatFixed => "flat-fixed",
            Family::FlatRotating => "flat-rotating",
            Family::EguchiHanson { .. } => "eguchi-hanson",
            Family::TaubNut { .. } => "taub-nut",
        }
    }

    /// Parses a family name with its parameter (`c` or `m`, ignored for flat).
    pub fn parse(name: &str, param: f64) -> Result<Family> {
        match name {
            "flat-fixed" => Ok(Family::FlatFixed),
            "flat-rotating" => Ok(Family::FlatRotating),
            "eguchi-hanson" => Ok(Family::EguchiHanson { c: param }),
            "taub-nut" => Ok(Family::TaubNut { m: param }),
            other => Err(Error::Invalid(format!(
                "unknown family '{other}' (expected flat-fixed, flat-rotating, eguchi-hanson, taub-nut)"
            ))),
        }
    }
}

/// A closed-form solution parametrised by `r`, with `dr/dt` fixed by the ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub family: Family,
    /// Sign of `dr/dt`, chosen as the one satisfying the ODE.
    pub time_sign: f64,
}

pub fn catalog(family: Family) -> Result<CatalogEntry> {
    match family {
        Family::EguchiHanson { c } if !(c > 0.0 && c.is_finite()) => {
            return Err(Error::ParameterOutOfRange {
                name: "c",
                value: c,
                reason: "Eguchi–Hanson needs c > 0",
            })
        }
        Family::TaubNut { m } if !(m > 0.0 && m.is_finite()) => {
            return Err(Error::ParameterOutOfRange {
                name: "m",
                value: m,
                reason: "Taub–NUT needs m > 0",
            })
        }
        _ => {}
    }
    let mut entry = CatalogEntry {
        family,
        time_sign: 1.0,
    };
    let probe = 2.0 * entry.r_min().max(0.5);
    let plus = entry.residual(probe)?;
    entry.time_sign = -1.0;
    let minus = entry.residual(probe)?;
    entry.time_sign = if plus <= minus { 1.0 } else { -1.0 };
    Ok(entry)
}

impl CatalogEntry {
    pub fn mode(&self) -> FrameMode {
        self.family.mode()
    }

    /// Lower end of the open domain in `r`.
    pub fn r_min(&self) -> f64 {
        match self.family {
            Family::FlatFixed | Family::FlatRotating => 0.0,
            Family::EguchiHanson { c } => c,
            Family::TaubNut { m } => m,
        }
    }

    fn check_domain(&self, r: f64) -> Result<()> {
        if r > self.r_min() && r.is_finite() {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange {
                name: "r",
                value: r,
                reason: "outside the open domain r > r_min of the family",
            })
        }
    }

    /// `f(r)`.
    pub fn profile<R: Real>(&self, r: R) -> [R; 3] {
        let one = R::lift(1.0);
        match self.family {
            Family::FlatFixed | Family::FlatRotating => [r; 3],
            Family::EguchiHanson { c } => {
                let c4 = R::lift(c.powi(4));
                let r2 = r * r;
                let f1 = r * (one - c4 / (r2 * r2)).sqrt();
                [f1, r, r]
            }
            Family::TaubNut { m } => {
                let m_ = R::lift(m);
                let f1 = R::lift(2.0 * m) * ((r - m_) / (r + m_)).sqrt();
                let f2 = (r * r - m_ * m_).sqrt();
                [f1, f2, f2]
            }
        }
    }

    /// `dr/dt`.
    pub fn dr_dt<R: Real>(&self, r: R) -> R {
        let speed = match self.family {
            Family::FlatFixed | Family::FlatRotating => R::lift(1.0),
            Family::EguchiHanson { .. } => self.profile(r)[0] / r,
            Family::TaubNut { m } => self.profile(r)[0] / R::lift(m),
        };
        R::lift(self.time_sign) * speed
    }

    pub fn dt_dr(&self, r: f64) -> f64 {
        1.0 / self.dr_dt(r)
    }

    /// Jet of `r(t)` through `r`.
    pub fn radius_jet(&self, r: f64) -> Scalar {
        ode_jets([r], |x| [self.dr_dt(x[0])])[0]
    }

    /// Jets of `f(r(t))` in `t`.
    pub fn jets(&self, r: f64) -> Result<[Scalar; 3]> {
        self.check_domain(r)?;
        Ok(self.profile(self.radius_jet(r)))
    }

    pub fn triple(&self, r: f64) -> Result<TripleField> {
        Ok(TripleField::from_profile(self.jets(r)?, Orientation::Standard, self.mode()))
    }

    /// State at radius `r`; `t = ±r` for the flat families, `t = 0` otherwise.
    pub fn state(&self, r: f64) -> Result<ProfileState> {
        self.check_domain(r)?;
        let t = match self.family {
            Family::FlatFixed | Family::FlatRotating => self.time_sign * r,
            _ => 0.0,
        };
        Ok(ProfileState::new(self.profile(r), t, self.mode()))
    }

    /// Inverse of the profile: the radius of a state on this family.
    pub fn radius_of(&self, f: &[f64; 3]) -> f64 {
        match self.family {
            Family::FlatFixed | Family::FlatRotating => f[0],
            Family::EguchiHanson { .. } => f[1],
            Family::TaubNut { m } => (f[1] * f[1] + m * m).sqrt(),
        }
    }

    /// `max |f'(t) − rhs(f)|` at radius `r`.
    pub fn residual(&self, r: f64) -> Result<f64> {
        let jets = self.jets(r)?;
        let rhs = ode_rhs(self.mode(), &jets.map(|j| j.value()))?;
        Ok((0..3)
            .map(|i| (jets[i].dt_derivative() - rhs[i]).abs())
            .fold(0.0, f64::max))
    }

    /// Slice orientation for which the outward normal (increasing `r`) is
    /// `+∂_t`-positive: `Standard` iff `dr/dt > 0`.
    pub fn boundary_orientation(&self) -> Orientation {
        if self.time_sign > 0.0 {
            Orientation::Standard
        } else {
            Orientation::Reversed
        }
    }

    /// `(max |Q|, max |dω|)` of the catalog triple over `n` radii evenly
    /// spaced in `[r_lo, r_hi]`, using structure constant `κ`.
    pub fn grid_residuals(&self, r_lo: f64, r_hi: f64, n: usize, kappa: f64) -> Result<HkResidual> {
        let mut out = HkResidual::default();
        for k in 0..n {
            let r = if n == 1 {
                r_lo
            } else {
                r_lo + (r_hi - r_lo) * k as f64 / (n - 1) as f64
            };
            let w = self.triple(r)?;
            out.max_q = out.max_q.max(q_matrix(&w)?.max_abs());
            out.max_d = out.max_d.max(closedness_with(&w, kappa));
            out.points += 1;
        }
        Ok(out)
    }

    /// Default verification grid: `r ∈ [1.01 r₀, 10 r₀]` with `r₀ = r_min`
    /// (or `[0.1, 10]` for the flat families).
    pub fn default_grid(&self) -> (f64, f64) {
        match self.r_min() {
            r if r > 0.0 => (1.01 * r, 10.0 * r),
            _ => (0.1, 10.0),
        }
    }
}

/// Closedness residual with an arbitrary structure constant.
pub fn closedness_with(w: &TripleField, kappa: f64) -> f64 {
    let d: [crate::MixedForm; 3] = match w.frame {
        FrameMode::Fixed => {
            std::array::from_fn(|i| crate::exterior::ext_d_with(&w.forms[i], kappa))
        }
        FrameMode::Rotating => twisted_d(&w.forms, kappa),
    };
    d.iter().map(|f| f.max_abs()).fold(0.0, f64::max)
}

/// Maximum constraint residuals over a set of points.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HkResidual {
    pub max_q: f64,
    pub max_d: f64,
    pub points: usize,
    /// Points where `Q` is undefined (a vanishing `fᵢ`).
    pub skipped: usize,
}

impl HkResidual {
    pub fn below(&self, tol: f64) -> bool {
        self.max_q < tol && self.max_d < tol
    }
}

/// One trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub f: [f64; 3],
    pub df: [f64; 3],
}

/// How an integration ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileTerminal {
    ReachedSpan,
    /// Components (1-based in output) that crossed zero together.
    FComponentZero { axes: Vec<Axis> },
    /// A caller-supplied stop condition fired.
    StopCondition,
    StepUnderflow { t: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub mode: FrameMode,
    pub samples: Vec<Sample>,
    pub terminal: ProfileTerminal,
    #[serde(skip)]
    dense: Option<DenseOutput<3>>,
}

impl Trajectory {
    pub fn new(mode: FrameMode, samples: Vec<Sample>, terminal: ProfileTerminal) -> Self {
        Trajectory {
            mode,
            samples,
            terminal,
            dense: None,
        }
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has a start sample")
    }

    /// Dense-output value (only for freshly integrated trajectories).
    pub fn interpolate(&self, t: f64) -> Option<[f64; 3]> {
        self.dense.as_ref()?.eval(t)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "f1", "f2", "f3", "df1", "df2", "df3"])?;
        for s in &self.samples {
            let row = [s.t, s.f[0], s.f[1], s.f[2], s.df[0], s.df[1], s.df[2]];
            wr.write_record(row.iter().map(|x| crate::io::fmt_f64(*x)))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads samples written by [`Trajectory::write_csv`].
    pub fn read_csv<R: Read>(r: R, mode: FrameMode) -> Result<Trajectory> {
        let mut rd = csv::Reader::from_reader(r);
        let mut samples = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(|x| x.parse::<f64>().map_err(|e| Error::Invalid(e.to_string())))
                .collect::<Result<_>>()?;
            if v.len() != 7 {
                return Err(Error::Invalid(format!("expected 7 columns, found {}", v.len())));
            }
            samples.push(Sample {
                t: v[0],
                f: [v[1], v[2], v[3]],
                df: [v[4], v[5], v[6]],
            });
        }
        Ok(Trajectory::new(mode, samples, ProfileTerminal::ReachedSpan))
    }
}

/// Integrates the profile ODE from `start` to `t_end`, stopping where a
/// component of `f` crosses zero.
pub fn integrate(start: &ProfileState, t_end: f64, tol: &Tolerances) -> Result<Trajectory> {
    integrate_until(start, t_end, tol, None)
}

/// As [`integrate`], with an extra stop condition `stop(f) = 0`.
pub fn integrate_until(
    start: &ProfileState,
    t_end: f64,
    tol: &Tolerances,
    stop: Option<&dyn Fn(&[f64; 3]) -> f64>,
) -> Result<Trajectory> {
    start.rhs()?;
    let mode = start.mode;
    let rhs = |_t: f64, f: &[f64; 3]| ode_rhs(mode, f).ok();
    let e0 = |_t: f64, f: &[f64; 3]| f[0];
    let e1 = |_t: f64, f: &[f64; 3]| f[1];
    let e2 = |_t: f64, f: &[f64; 3]| f[2];
    let user = |_t: f64, f: &[f64; 3]| stop.map_or(1.0, |s| s(f));
    let events: [ode::Event<'_, 3>; 4] = [&e0, &e1, &e2, &user];
    let sol = ode::integrate(rhs, start.t, start.f, t_end, tol, &events);

    let scale = start.f.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let terminal = match &sol.stop {
        Stop::SpanReached => ProfileTerminal::ReachedSpan,
        Stop::StepUnderflow { t } => ProfileTerminal::StepUnderflow { t: *t },
        Stop::Event { indices, .. } if indices.contains(&3) => ProfileTerminal::StopCondition,
        Stop::Event { .. } => {
            let last = sol.y.last().expect("event sample");
            let axes = (0..3)
                .filter(|&i| last[i].abs() <= 1e-8 * scale)
                .filter_map(Axis::from_index)
                .collect();
            ProfileTerminal::FComponentZero { axes }
        }
    };

    let samples = sol
        .t
        .iter()
        .zip(&sol.y)
        .map(|(&t, f)| Sample {
            t,
            f: *f,
            df: ode_rhs(mode, f).unwrap_or([f64::NAN; 3]),
        })
        .collect();
    Ok(Trajectory {
        mode,
        samples,
        terminal,
        dense: Some(sol.dense),
    })
}

/// Deviation of an integrated catalog trajectory from its closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub r_start: f64,
    pub r_end: f64,
    /// `max |f − f(r(f))|` over the solver samples.
    pub shape_error: f64,
    /// `max |f(t(r)) − f(r)|` at `checkpoints` radii, with `t(r)` from
    /// quadrature of `dt/dr`.
    pub time_error: f64,
    pub checkpoints: usize,
    pub steps: usize,
}

impl OracleReport {
    pub fn sup_error(&self) -> f64 {
        self.shape_error.max(self.time_error)
    }
}

/// Integrates from the catalog state at `r_start` until `r = r_end` and
/// compares with the closed form.
pub fn oracle_comparison(
    entry: &CatalogEntry,
    r_start: f64,
    r_end: f64,
    tol: &Tolerances,
) -> Result<(Trajectory, OracleReport)> {
    let start = entry.state(r_start)?;
    entry.check_domain(r_end)?;
    let direction = entry.time_sign * (r_end - r_start).signum();
    // generous time budget; the stop condition ends the run
    let budget = 4.0 * crate::quadrature::gauss_legendre(64, r_start, r_end)
        .iter()
        .map(|(r, w)| w * entry.dt_dr(*r).abs())
        .sum::<f64>()
        + 1.0;
    let target = |f: &[f64; 3]| entry.radius_of(f) - r_end;
    let traj = integrate_until(&start, start.t + direction * budget, tol, Some(&target))?;

    let mut shape_error = 0.0f64;
    for s in &traj.samples {
        let exact = entry.profile(entry.radius_of(&s.f));
        for i in 0..3 {
            shape_error = shape_error.max((s.f[i] - exact[i]).abs());
        }
    }

    let checkpoints = 200;
    let mut time_error = 0.0f64;
    let (mut t, mut r_prev) = (start.t, r_start);
    for k in 1..=checkpoints {
        let r = r_start + (r_end - r_start) * k as f64 / checkpoints as f64;
        t += crate::quadrature::gauss_legendre(32, r_prev, r)
            .iter()
            .map(|(x, w)| w * entry.dt_dr(*x))
            .sum::<f64>();
        r_prev = r;
        if k == checkpoints {
            break; // the stop event sits at r_end, possibly past the last sample
        }
        let f = traj.interpolate(t).ok_or_else(|| {
            Error::Invalid(format!("trajectory ended before r = {r}"))
        })?;
        let exact = entry.profile(r);
        for i in 0..3 {
            time_error = time_error.max((f[i] - exact[i]).abs());
        }
    }
    let steps = traj.samples.len().saturating_sub(1);
    let report = OracleReport {
        r_start,
        r_end,
        shape_error,
        time_error,
        checkpoints: checkpoints - 1,
        steps,
    };
    Ok((traj, report))
}

/// `(max |Q|, max |dω|)` along a trajectory, evaluating the ansatz triple
/// on each sample's stored `(f, df)`.
pub fn hk_residual(traj: &Trajectory) -> HkResidual {
    let mut out = HkResidual::default();
    for s in &traj.samples {
        if s.f.iter().chain(&s.df).any(|x| !x.is_finite()) {
            out.skipped += 1;
            continue;
        }
        let w = triple_from_sample(s, traj.mode);
        match q_matrix(&w) {
            Ok(q) => {
                out.max_q = out.max_q.max(q.max_abs());
                out.max_d = out.max_d.max(closedness_with(&w, STRUCTURE_CONSTANT));
                out.points += 1;
            }
            Err(_) => out.skipped += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fixed_rhs_examples() {
        assert_eq!(ode_rhs_fixed(&[1.0, 1.0, 1.0]).unwrap(), [1.0; 3]);
        assert_eq!(ode_rhs_fixed(&[-3.5; 3]).unwrap(), [1.0; 3]);
        let q = 2f64.powf(0.25);
        let d = ode_rhs_fixed(&[1.0 / q, q, q]).unwrap();
        assert!(close(d[0], 1.5, 1e-15));
        assert!(matches!(
            ode_rhs_fixed(&[1.0, 0.0, 1.0]),
            Err(Error::SingularProfile { .. })
        ));
    }

    #[test]
    fn rotating_rhs_examples() {
        assert_eq!(ode_rhs_rotating(&[2.0; 3]).unwrap(), [-1.0; 3]);
        let s2 = 2f64.sqrt();
        let d = ode_rhs_rotating(&[s2, 2.0 * s2, 2.0 * s2]).unwrap();
        assert!(close(d[0], -0.25, 1e-15));
    }

    #[test]
    fn ansatz_closed_iff_ode() {
        // the exterior derivative of the ansatz reproduces both systems
        for mode in [FrameMode::Fixed, FrameMode::Rotating] {
            let f = [0.7, 1.3, 2.1];
            let rhs = ode_rhs(mode, &f).unwrap();
            let good = std::array::from_fn(|i| Scalar::with_derivative(f[i], rhs[i]));
            let w = TripleField::from_profile(good, Orientation::Standard, mode);
            assert!(w.closedness_residual() < 1e-14);
            let bad = std::array::from_fn(|i| Scalar::with_derivative(f[i], rhs[i] + 0.01 * i as f64));
            let w = TripleField::from_profile(bad, Orientation::Standard, mode);
            assert!(w.closedness_residual() > 1e-3);
        }
    }

    #[test]
    fn summed_structure_constant_reproduces_the_ode() {
        // d(f₂f₃ η₂∧η₃) = (f₂f₃)' dt∧η₂∧η₃ must cancel d(f₁ dt∧η₁) = −κ f₁ dt∧η₂∧η₃
        let f = [0.9, 1.4, 0.6];
        let rhs = ode_rhs_fixed(&f).unwrap();
        let d23 = rhs[1] * f[2] + f[1] * rhs[2];
        assert!(close(d23, 2.0 * f[0], 1e-14));
        let rhs = ode_rhs_rotating(&f).unwrap();
        let d23 = rhs[1] * f[2] + f[1] * rhs[2];
        assert!(close(d23, 2.0 * f[0] - 2.0 * (f[1] + f[2]), 1e-14));
    }

    #[test]
    fn catalog_examples() {
        let eh = catalog(Family::EguchiHanson { c: 1.0 }).unwrap();
        let q = 2f64.powf(0.25);
        let f = eh.profile(q);
        assert!(close(f[0], 1.0 / q, 1e-15) && f[1] == q && f[2] == q);
        assert_eq!(eh.time_sign, 1.0);

        let tn = catalog(Family::TaubNut { m: 1.0 }).unwrap();
        let f = tn.profile(3.0);
        let s2 = 2f64.sqrt();
        assert!(close(f[0], s2, 1e-15) && close(f[1], 2.0 * s2, 1e-15));
        assert_eq!(tn.time_sign, -1.0);
        assert!(close(tn.dt_dr(3.0), -0.5 * (4.0f64 / 2.0).sqrt(), 1e-15));

        let flat = catalog(Family::FlatFixed).unwrap();
        assert_eq!(flat.state(5.0).unwrap().f, [5.0; 3]);
        assert_eq!(flat.state(5.0).unwrap().t, 5.0);
        let rot = catalog(Family::FlatRotating).unwrap();
        assert_eq!(rot.time_sign, -1.0);
        assert_eq!(rot.state(2.0).unwrap().t, -2.0);

        assert!(catalog(Family::EguchiHanson { c: 0.0 }).is_err());
        assert!(catalog(Family::TaubNut { m: -1.0 }).is_err());
        assert!(eh.state(0.5).is_err());
    }

    #[test]
    fn catalog_residuals_on_grids() {
        for fam in [
            Family::FlatFixed,
            Family::FlatRotating,
            Family::EguchiHanson { c: 1.0 },
            Family::TaubNut { m: 1.0 },
        ] {
            let e = catalog(fam).unwrap();
            let (lo, hi) = e.default_grid();
            let r = e.grid_residuals(lo, hi, 100, 2.0).unwrap();
            assert!(r.below(1e-10), "{fam:?}: {r:?}");
            let wrong = e.grid_residuals(lo, hi, 20, 1.0).unwrap();
            assert!(wrong.max_d > 0.1, "{fam:?}: {wrong:?}");
        }
    }

    #[test]
    fn flat_integration_is_exact() {
        let tol = Tolerances::default();
        let start = ProfileState::new([1.0; 3], 1.0, FrameMode::Fixed);
        let tr = integrate(&start, 10.0, &tol).unwrap();
        assert_eq!(tr.terminal, ProfileTerminal::ReachedSpan);
        for s in &tr.samples {
            assert!(s.f.iter().all(|x| close(*x, s.t, 1e-9)));
        }
    }

    #[test]
    fn eguchi_hanson_outward_and_inward() {
        let tol = Tolerances::default();
        let eh = catalog(Family::EguchiHanson { c: 1.0 }).unwrap();
        let start = eh.state(1.1).unwrap();
        let target = |f: &[f64; 3]| eh.radius_of(f) - 10.0;
        let tr = integrate_until(&start, 100.0, &tol, Some(&target)).unwrap();
        assert_eq!(tr.terminal, ProfileTerminal::StopCondition);
        for s in &tr.samples {
            let exact = eh.profile(eh.radius_of(&s.f));
            for i in 0..3 {
                assert!(close(s.f[i], exact[i], 1e-8), "{s:?}");
            }
        }

        let start = eh.state(2.0).unwrap();
        let tr = integrate(&start, -10.0, &tol).unwrap();
        assert_eq!(
            tr.terminal,
            ProfileTerminal::FComponentZero { axes: vec![Axis::One] }
        );
        let last = tr.last();
        assert!(last.f[0].abs() < 1e-12);
        assert!(close(last.f[1], 1.0, 1e-6) && close(last.f[2], 1.0, 1e-6));
    }

    #[test]
    fn oracle_matches_closed_forms() {
        let tol = Tolerances::default();
        for fam in [
            Family::FlatFixed,
            Family::FlatRotating,
            Family::EguchiHanson { c: 1.0 },
            Family::TaubNut { m: 0.5 },
        ] {
            let e = catalog(fam).unwrap();
            let r0 = e.default_grid().0;
            let (tr, rep) = oracle_comparison(&e, r0, 10.0 * r0, &tol).unwrap();
            assert_eq!(tr.terminal, ProfileTerminal::StopCondition);
            assert!(rep.sup_error() < 1e-8, "{fam:?}: {rep:?}");
            assert!((e.radius_of(&tr.last().f) - 10.0 * r0).abs() < 1e-8);
        }
    }

    #[test]
    fn trajectory_residuals_and_detector() {
        let tol = Tolerances::default();
        let tn = catalog(Family::TaubNut { m: 1.0 }).unwrap();
        let tr = integrate(&tn.state(2.0).unwrap(), -5.0, &tol).unwrap();
        let r = hk_residual(&tr);
        assert!(r.below(1e-8), "{r:?}");
        let mut bad = tr.clone();
        bad.samples.iter_mut().for_each(|s| s.f[0] += 0.1);
        assert!(hk_residual(&bad).max_d > 0.01);
    }

    #[test]
    fn csv_round_trip() {
        let tol = Tolerances::default();
        let tr = integrate(&ProfileState::new([1.0, 1.2, 1.5], 0.0, FrameMode::Fixed), 0.5, &tol).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let back = Trajectory::read_csv(buf.as_slice(), FrameMode::Fixed).unwrap();
        assert_eq!(back.samples, tr.samples);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn profile() -> impl Strategy<Value = [f64; 3]> {
            prop::array::uniform3(prop_oneof![0.1f64..5.0, -5.0f64..-0.1])
        }

        proptest! {
            #[test]
            fn permutation_equivariance(f in profile()) {
                let perm = [f[1], f[2], f[0]];
                for mode in [FrameMode::Fixed, FrameMode::Rotating] {
                    let a = ode_rhs(mode, &f).unwrap();
                    let b = ode_rhs(mode, &perm).unwrap();
                    prop_assert!((b[0] - a[1]).abs() < 1e-12 * (1.0 + a[1].abs()));
                    prop_assert!((b[2] - a[0]).abs() < 1e-12 * (1.0 + a[0].abs()));
                    let swap = [f[0], f[2], f[1]];
                    let c = ode_rhs(mode, &swap).unwrap();
                    prop_assert!((c[1] - a[2]).abs() < 1e-12 * (1.0 + a[2].abs()));
                }
            }

            #[test]
            fn rhs_is_scale_free(f in profile(), lambda in 0.1f64..10.0) {
                for mode in [FrameMode::Fixed, FrameMode::Rotating] {
                    let a = ode_rhs(mode, &f).unwrap();
                    let b = ode_rhs(mode, &f.map(|x| lambda * x)).unwrap();
                    for i in 0..3 {
                        prop_assert!((a[i] - b[i]).abs() < 1e-10 * (1.0 + a[i].abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn scale_equivariance_of_solutions() {
        let tol = Tolerances::default();
        let f0 = [1.0, 1.3, 1.7];
        let base = integrate(&ProfileState::new(f0, 0.0, FrameMode::Fixed), 0.4, &tol).unwrap();
        for lambda in [2.0, 1.0 / 3.0] {
            let start = ProfileState::new(f0.map(|x| lambda * x), 0.0, FrameMode::Fixed);
            let scaled = integrate(&start, 0.4 * lambda, &tol).unwrap();
            let end = scaled.last();
            let reference = base.interpolate(end.t / lambda).unwrap();
            for i in 0..3 {
                assert!(close(end.f[i], lambda * reference[i], 1e-8));
            }
        }
    }

    #[test]
    fn first_integral_identities_along_solutions() {
        let tol = Tolerances::default();
        for mode in [FrameMode::Fixed, FrameMode::Rotating] {
            let tr = integrate(&ProfileState::new([1.0, 1.3, 1.7], 0.0, mode), 0.3, &tol).unwrap();
            for s in &tr.samples {
                let lhs = s.df[1] * s.f[2] + s.f[1] * s.df[2];
                let rhs = match mode {
                    FrameMode::Fixed => 2.0 * s.f[0],
                    FrameMode::Rotating => 2.0 * s.f[0] - 2.0 * (s.f[1] + s.f[2]),
                };
                assert!(close(lhs, rhs, 1e-8));
                assert!(ProfileState::new(s.f, s.t, mode).metric_is_positive());
            }
        }
    }
}
