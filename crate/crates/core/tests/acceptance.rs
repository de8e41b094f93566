//! Acceptance suite. Run with `cargo test --test acceptance -- --nocapture`
//! to see one line per criterion.

use hktriples::asd;
use hktriples::collar::greens_identity_check;
use hktriples::exterior::{DiagonalMetric, MixedForm, Monomial, STRUCTURE_CONSTANT};
use hktriples::framing::{catalog_framing, flow_integrate, mean_curvature, Direction, FramingState, TerminalKind};
use hktriples::ode::Tolerances;
use hktriples::profile::{catalog, oracle_comparison, CatalogEntry, Family};
use hktriples::spectrum::{frequency_preset, spectrum, Frequency, FrequencyPreset, SpectralOperator};
use hktriples::triple::{lin_p, q_matrix};
use hktriples::{Axis, FrameMode, Orientation, Scalar, TripleField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONSTRAINT_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-8;
const WRONG_NORMALISATION_MIN: f64 = 0.1;
const SNAP_TOL: f64 = 1e-7;
const BOLT_TOL: f64 = 1e-5;
const MEAN_CURVATURE_TOL: f64 = 1e-8;
const FLAT_MEAN_CURVATURE_TOL: f64 = 1e-12;
const ASD_TOL: f64 = 1e-10;
const GREEN_TOL: f64 = 1e-8;
const EPS_COARSE: f64 = 1e-4;
const EPS_FINE: f64 = 1e-5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn families() -> Vec<Family> {
    let mut v = vec![Family::FlatFixed, Family::FlatRotating];
    v.extend([0.5, 1.0, 2.0].map(|c| Family::EguchiHanson { c }));
    v.extend([0.5, 1.0, 4.0].map(|m| Family::TaubNut { m }));
    v
}

fn entries() -> Vec<CatalogEntry> {
    families().into_iter().map(|f| catalog(f).unwrap()).collect()
}

fn c1_constraints() -> Outcome {
    let (mut q, mut d) = (0.0f64, 0.0f64);
    for e in entries() {
        let (lo, hi) = e.default_grid();
        let r = e.grid_residuals(lo, hi, 200, STRUCTURE_CONSTANT).unwrap();
        assert_eq!(r.points, 200);
        q = q.max(r.max_q);
        d = d.max(r.max_d);
    }
    Outcome {
        pass: q < CONSTRAINT_TOL && d < CONSTRAINT_TOL,
        detail: format!("max|Q| = {q:.2e}, max|dω| = {d:.2e} over 8 families × 200 radii (tol {CONSTRAINT_TOL:.0e})"),
    }
}

fn c2_oracle() -> Outcome {
    // absolute sup error: large-m Taub-NUT profiles reach f ~ 40, beyond what rtol 1e-10 buys
    let tol = Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() };
    let mut worst = 0.0f64;
    let mut modes = Vec::new();
    for e in entries() {
        let r0 = e.default_grid().0;
        let (_, rep) = oracle_comparison(&e, r0, 10.0 * r0, &tol).unwrap();
        worst = worst.max(rep.sup_error());
        modes.push(e.mode());
    }
    let both = modes.contains(&FrameMode::Fixed) && modes.contains(&FrameMode::Rotating);
    Outcome {
        pass: worst < ORACLE_TOL && both,
        detail: format!("sup |f − f_exact| = {worst:.2e} over r ∈ [r₀, 10r₀], both ODE systems, rtol 1e-12 (tol {ORACLE_TOL:.0e})"),
    }
}

fn c3_structure_constant() -> Outcome {
    let (mut right, mut wrong) = (0.0f64, f64::INFINITY);
    for e in entries() {
        let (lo, hi) = e.default_grid();
        right = right.max(e.grid_residuals(lo, hi, 50, 2.0).unwrap().max_d);
        wrong = wrong.min(e.grid_residuals(lo, hi, 50, 1.0).unwrap().max_d);
    }
    Outcome {
        pass: right < CONSTRAINT_TOL && wrong > WRONG_NORMALISATION_MIN,
        detail: format!("κ = 2: max|dω| = {right:.2e}; κ = 1: min over families of max|dω| = {wrong:.3}"),
    }
}

fn c4_spectral_law() -> Outcome {
    let s = spectrum(SpectralOperator::Curl, 6, Orientation::Standard);
    let integers = s.lines.iter().all(|l| l.integer && (l.eigenvalue - l.eigenvalue.round()).abs() < SNAP_TOL);
    let mut law = true;
    let mut checked = Vec::new();
    for l in s.lines.iter().filter(|l| l.complete && l.eigenvalue.abs() <= 5.0) {
        let k = l.eigenvalue.abs() as usize;
        law &= l.coclosed_multiplicity == k * k - 1;
        checked.push(format!("{}:{}", l.eigenvalue, l.coclosed_multiplicity));
    }
    let all_present = (2..=5).all(|k| [k as f64, -(k as f64)].iter().all(|l| s.line(*l).is_some_and(|x| x.complete)));
    let no_low = [-1.0, 0.0, 1.0].iter().all(|l| s.coclosed_multiplicity(*l) == 0);
    Outcome {
        pass: integers && law && all_present && no_low,
        detail: format!("maxJ = 3: integer spectrum {integers}; complete lines λ:dim G = [{}]; G_λ = 0 for λ ∈ {{−1,0,1}}: {no_low}", checked.join(", ")),
    }
}

fn c5_frequency() -> Outcome {
    let eh = frequency_preset(FrequencyPreset::EguchiHansonDelta { c: 0.5 }, None).unwrap();
    let tn: Vec<_> = [0.5, 1.0, 2.0]
        .iter()
        .map(|m| frequency_preset(FrequencyPreset::TaubNutDelta { m: *m }, Some(Orientation::Reversed)).unwrap())
        .collect();
    let a = eh.verdict.classification == Frequency::Positive && eh.raw.classification == Frequency::Positive;
    let b = tn.iter().all(|r| r.verdict.classification == Frequency::Negative);
    let mut c = true;
    for preset in [
        FrequencyPreset::EguchiHansonDelta { c: 0.5 },
        FrequencyPreset::TaubNutDelta { m: 1.0 },
        FrequencyPreset::Zero,
    ] {
        let s = frequency_preset(preset, Some(Orientation::Standard)).unwrap();
        let r = frequency_preset(preset, Some(Orientation::Reversed)).unwrap();
        c &= s.verdict.classification.flipped() == r.verdict.classification;
        c &= s.raw.classification.flipped() == r.raw.classification;
    }
    Outcome {
        pass: a && b && c,
        detail: format!(
            "(a) EH {} (b) TN {} modulo dilation, raw {} (c) flip negates: {c}",
            eh.verdict.classification, tn[0].verdict.classification, tn[0].raw.classification
        ),
    }
}

fn c6_flow_terminals() -> Outcome {
    let tol = Tolerances::default();
    let mut ok = true;
    let mut worst = 0.0f64;
    for c in [0.5, 1.0, 2.0] {
        let e = catalog(Family::EguchiHanson { c }).unwrap();
        let st = catalog_framing(&e, 2.0 * c).unwrap();
        let tr = flow_integrate(&st, Direction::Inward, 100.0 * c * c, &tol).unwrap();
        ok &= tr.terminal.kind == TerminalKind::Bolt(Axis::One);
        let f = tr.last().f;
        worst = worst.max((f[1] - c).abs()).max((f[2] - c).abs());
    }
    let round = FramingState::diagonal([1.0; 3], FrameMode::Fixed, Orientation::Standard);
    let round = flow_integrate(&round, Direction::Inward, 10.0, &tol).unwrap().terminal.kind;
    let mut tn_ok = true;
    for m in [0.5, 1.0, 4.0] {
        let e = catalog(Family::TaubNut { m }).unwrap();
        let st = catalog_framing(&e, 2.0 * m).unwrap();
        let tr = flow_integrate(&st, Direction::Inward, 100.0 * m * m, &tol).unwrap();
        tn_ok &= tr.terminal.kind == TerminalKind::SmoothPoint;
    }
    Outcome {
        pass: ok && worst < BOLT_TOL && round == TerminalKind::SmoothPoint && tn_ok,
        detail: format!("EH → bolt(1) with max|f₂,₃ − c| = {worst:.2e} (tol {BOLT_TOL:.0e}); round → {round}; TN → smooth_point: {tn_ok}"),
    }
}

fn c7_mean_curvature() -> Outcome {
    let mut worst = 0.0f64;
    for e in entries() {
        let (lo, hi) = e.default_grid();
        let sigma = e.boundary_orientation().sign();
        for k in 0..50 {
            let r = lo + (hi - lo) * k as f64 / 49.0;
            let jets = e.jets(r).unwrap();
            let extrinsic: f64 = sigma * jets.iter().map(|j| j.dt_derivative() / j.value()).sum::<f64>();
            let intrinsic = mean_curvature(&catalog_framing(&e, r).unwrap()).unwrap();
            worst = worst.max((intrinsic - extrinsic).abs() / extrinsic.abs().max(1.0));
        }
    }
    let mut flat = 0.0f64;
    for fam in [Family::FlatFixed, Family::FlatRotating] {
        let e = catalog(fam).unwrap();
        for r in [0.25, 1.0, 3.0, 10.0] {
            let h = mean_curvature(&catalog_framing(&e, r).unwrap()).unwrap();
            flat = flat.max((h * r - 3.0).abs());
        }
    }
    Outcome {
        pass: worst < MEAN_CURVATURE_TOL && flat < FLAT_MEAN_CURVATURE_TOL,
        detail: format!("|H_framing − Σf'/f| = {worst:.2e} at 50 radii × 8 families (tol {MEAN_CURVATURE_TOL:.0e}); flat |H·r − 3| = {flat:.2e}"),
    }
}

fn c8_asd() -> Outcome {
    let inv = asd::inventory(&[2, 3], 15, asd::DEFAULT_SEED).unwrap();
    let n = inv.generators.len();
    let ks: Vec<u32> = inv.generators.iter().map(|g| g.k).collect();
    let both = ks.contains(&2) && ks.contains(&3);
    let l_star = inv.triples.iter().filter_map(|t| t.l_star).fold(0.0, f64::max);
    Outcome {
        pass: n == 30 && both && inv.max_closed < ASD_TOL && inv.max_asd < ASD_TOL && inv.max_tangent < ASD_TOL && l_star < ASD_TOL,
        detail: format!(
            "{n} generators: closed {:.2e}, *β + β {:.2e}, (θᵢ,ωⱼ) {:.2e}, L*θ {:.2e} (tol {ASD_TOL:.0e})",
            inv.max_closed, inv.max_asd, inv.max_tangent, l_star
        ),
    }
}

fn c9_green() -> Outcome {
    let rep = greens_identity_check(20, 9).unwrap();
    Outcome {
        pass: rep.pairs == 20 && rep.max_residual < GREEN_TOL,
        detail: format!("20 pairs, max relative residual {:.2e} (tol {GREEN_TOL:.0e})", rep.max_residual),
    }
}

fn c10_linearization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ratios = Vec::new();
    for (fam, r) in [
        (Family::EguchiHanson { c: 1.0 }, 1.5),
        (Family::TaubNut { m: 1.0 }, 2.0),
        (Family::FlatFixed, 1.0),
    ] {
        let e = catalog(fam).unwrap();
        let f = e.jets(r).unwrap().map(|j| Scalar::constant(j.value()));
        let w = TripleField::from_profile(f, Orientation::Standard, e.mode());
        let g = DiagonalMetric::new(f, Orientation::Standard);
        for _ in 0..3 {
            let forms = std::array::from_fn(|_| {
                let mut x = MixedForm::zero(2);
                for m in Monomial::of_degree(2) {
                    x.set_coeff(m, rng.gen_range(-1.0..1.0)).unwrap();
                }
                x
            });
            let theta = TripleField::new(forms, w.orientation, w.frame).unwrap();
            let p = lin_p(&theta, &w, &g).unwrap();
            let err = |eps: f64| {
                let q = q_matrix(&w.try_add(&theta.scale(eps)).unwrap()).unwrap();
                q.scale(1.0 / eps).sub(&p).max_abs()
            };
            ratios.push(err(EPS_FINE) / err(EPS_COARSE));
        }
    }
    // first order: the error shrinks by ε_fine/ε_coarse = 0.1, accepted within a factor 2
    let target = EPS_FINE / EPS_COARSE;
    let (lo, hi) = (0.5 * target, 2.0 * target);
    let pass = ratios.iter().all(|r| (lo..=hi).contains(r));
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(0.0, f64::max);
    Outcome {
        pass,
        detail: format!("err(1e-5)/err(1e-4) ∈ [{min:.4}, {max:.4}] over {} cases (accepted [{lo}, {hi}])", ratios.len()),
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("constraint verification", c1_constraints),
        ("oracle equivalence", c2_oracle),
        ("structure constant", c3_structure_constant),
        ("curl spectral law", c4_spectral_law),
        ("frequency", c5_frequency),
        ("flow terminals", c6_flow_terminals),
        ("mean curvature", c7_mean_curvature),
        ("ASD generators", c8_asd),
        ("Green's identity", c9_green),
        ("linearization", c10_linearization),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("{:>2} {} {:<24} {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
