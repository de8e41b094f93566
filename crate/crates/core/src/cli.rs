//! Command-line front end.
//!
//! Every subcommand writes its outputs plus a `config.json` into the output
//! directory (`--out`, else `$HKTRIPLES_OUT_DIR`, else `./out`). Replaying
//! that file with `--config` reproduces the run; flags given on the command
//! line override values from the file. Config files may also be plain
//! `key = value` text mirroring the flags.
//!
//! Exit status: 0 success, 1 tolerance failure, 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asd;
use crate::framing::{self, catalog_framing, flow_integrate, Direction, FramingState};
use crate::io::{resolve_out_dir, write_json};
use crate::ode::Tolerances;
use crate::profile::{self, catalog, oracle_comparison, Family, ProfileState};
use crate::spectrum::{self, FrequencyPreset, SpectralOperator};
use crate::{Error, FrameMode, Orientation};

/// `println!` that ignores a closed stdout (e.g. when piped into `head`).
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "hktriples",
    version,
    about = "Hyperkähler triples with SU(2) symmetry: catalog checks, ODE and flow integration, boundary spectra",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the hyperkähler constraints of a catalog family on a radial grid.
    Verify(VerifyArgs),
    /// Integrate the profile ODE, from a catalog state or explicit data.
    Integrate(IntegrateArgs),
    /// Evolve a diagonal framing by the flow and classify where it ends.
    Flow(FlowArgs),
    /// Curl or D_Y spectrum on the round 3-sphere.
    Spectrum(SpectrumArgs),
    /// Frequency of a framing perturbation.
    Frequency(FrequencyArgs),
    /// List the closed-form families, or evaluate one at a radius.
    Catalog(CatalogArgs),
    /// Closed anti-self-dual generators on the flat ball and their checks.
    Asd(AsdArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Integrate(_) => "integrate",
            Command::Flow(_) => "flow",
            Command::Spectrum(_) => "spectrum",
            Command::Frequency(_) => "frequency",
            Command::Catalog(_) => "catalog",
            Command::Asd(_) => "asd",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Read parameters from a key=value or JSON file (flags take precedence).
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for parallel parts.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyName {
    FlatFixed,
    FlatRotating,
    EguchiHanson,
    TaubNut,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Fixed,
    Rotating,
}

impl From<ModeArg> for FrameMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fixed => FrameMode::Fixed,
            ModeArg::Rotating => FrameMode::Rotating,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum OrientationArg {
    Standard,
    Reversed,
}

impl From<OrientationArg> for Orientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::Standard => Orientation::Standard,
            OrientationArg::Reversed => Orientation::Reversed,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum OperatorArg {
    Curl,
    Dy,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PresetArg {
    EguchiHansonDelta,
    TaubNutDelta,
    Zero,
}

#[derive(Args, Debug, Clone, Serialize)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Eguchi–Hanson parameter.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Taub–NUT parameter.
    #[arg(long, default_value_t = 1.0)]
    m: f64,
}

impl FamilyArgs {
    fn family(&self) -> Family {
        family_of(self.family, self.c, self.m)
    }
}

fn family_of(name: FamilyName, c: f64, m: f64) -> Family {
    match name {
        FamilyName::FlatFixed => Family::FlatFixed,
        FamilyName::FlatRotating => Family::FlatRotating,
        FamilyName::EguchiHanson => Family::EguchiHanson { c },
        FamilyName::TaubNut => Family::TaubNut { m },
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
    #[arg(long, default_value_t = 0.1)]
    max_step: f64,
}

impl SolverArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.atol,
            max_step: self.max_step,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    family: FamilyArgs,
    /// Number of radii.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Grid start (default just outside the singular radius).
    #[arg(long)]
    r_lo: Option<f64>,
    #[arg(long)]
    r_hi: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct IntegrateArgs {
    /// Start from a catalog family (compares against its closed form).
    #[arg(long, value_enum, conflicts_with = "f")]
    family: Option<FamilyName>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Catalog start radius.
    #[arg(long)]
    r0: Option<f64>,
    /// Catalog end radius (default 10·r0).
    #[arg(long)]
    r1: Option<f64>,
    /// Explicit initial profile f1,f2,f3.
    #[arg(long, value_delimiter = ',', requires = "t1")]
    f: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "fixed")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long)]
    t1: Option<f64>,
    /// Tolerance for the closed-form comparison.
    #[arg(long, default_value_t = 1e-8)]
    check: f64,
    #[command(flatten)]
    #[serde(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct FlowArgs {
    /// Diagonal framing coefficients g1,g2,g3.
    #[arg(long, value_delimiter = ',', required = true)]
    g: Vec<f64>,
    #[arg(long, value_enum, default_value = "fixed")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "standard")]
    orientation: OrientationArg,
    /// Flow towards shrinking volume (default).
    #[arg(long, overrides_with = "outward")]
    inward: bool,
    /// Flow towards growing volume.
    #[arg(long, overrides_with = "inward")]
    outward: bool,
    /// Flow-time span.
    #[arg(long, default_value_t = 10.0)]
    span: f64,
    #[command(flatten)]
    #[serde(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

fn parse_max_j(s: &str) -> std::result::Result<f64, String> {
    let j: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(j >= 0.0) || (2.0 * j).fract() != 0.0 {
        return Err(format!("maxj must be a non-negative half-integer, got {s}"));
    }
    Ok(j)
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct SpectrumArgs {
    #[arg(long, value_enum, default_value = "curl")]
    op: OperatorArg,
    /// Largest spin j included.
    #[arg(long, default_value = "3", value_parser = parse_max_j)]
    maxj: f64,
    #[arg(long, value_enum, default_value = "standard")]
    orientation: OrientationArg,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct FrequencyArgs {
    #[arg(long, value_enum, required_unless_present = "zero")]
    preset: Option<PresetArg>,
    /// The zero perturbation.
    #[arg(long)]
    zero: bool,
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Orientation (default: the boundary orientation of the family).
    #[arg(long, value_enum)]
    orientation: Option<OrientationArg>,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct CatalogArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Evaluate at this radius.
    #[arg(long, requires = "family")]
    r: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct AsdArgs {
    #[arg(long, default_value_t = asd::DEFAULT_SEED)]
    seed: u64,
    /// Generators per radial exponent.
    #[arg(long, default_value_t = 15)]
    per_k: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    ks: Vec<u32>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub version: String,
    pub params: Value,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match splice_config(args) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_TOLERANCE,
                _ => EXIT_USAGE,
            }
        }
    }
}

/// Inserts the flags from a `--config` file right after the subcommand, so
/// that later command-line flags override them.
fn splice_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let Some(sub_pos) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let command = args[sub_pos].to_string_lossy().into_owned();
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let given: Vec<String> = args[sub_pos + 1..]
        .iter()
        .filter_map(|a| {
            let a = a.to_string_lossy();
            a.strip_prefix("--").map(|k| k.split('=').next().unwrap_or("").to_string())
        })
        .collect();
    let flags = drop_given(config_flags(&text, &command)?, &given);
    let mut out = args[..=sub_pos].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend(args[sub_pos + 1..].iter().cloned());
    Ok(out)
}

fn config_flags(text: &str, command: &str) -> std::result::Result<Vec<String>, String> {
    let mut pairs: Vec<(String, Value)> = Vec::new();
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| format!("bad JSON config: {e}"))?;
        if let Some(c) = v.get("command").and_then(Value::as_str) {
            if c != command {
                return Err(format!("config is for '{c}', not '{command}'"));
            }
        }
        let params = v.get("params").unwrap_or(&v);
        let obj = params
            .as_object()
            .ok_or_else(|| "config params must be an object".to_string())?;
        for (k, val) in obj {
            if k != "command" && k != "version" {
                pairs.push((k.clone(), val.clone()));
            }
        }
    } else {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", n + 1))?;
            let v = v.trim();
            let val = match v {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                _ => Value::String(v.to_string()),
            };
            pairs.push((k.trim().to_string(), val));
        }
    }
    let mut flags = Vec::new();
    for (k, v) in pairs {
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => flags.push(flag),
            Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(scalar_text).collect();
                flags.push(flag);
                flags.push(joined.join(","));
            }
            other => {
                flags.push(flag);
                flags.push(scalar_text(&other));
            }
        }
    }
    Ok(flags)
}

/// Removes file flags (with their values) that the command line sets again.
fn drop_given(flags: Vec<String>, given: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(flags.len());
    let mut skipping = false;
    for f in flags {
        if let Some(k) = f.strip_prefix("--") {
            skipping = given.iter().any(|g| g == k);
        }
        if !skipping {
            out.push(f);
        }
    }
    out
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn dispatch(command: Command) -> crate::Result<i32> {
    let name = command.name();
    match command {
        Command::Verify(a) => with_common(name, &a, &a.common, cmd_verify),
        Command::Integrate(a) => with_common(name, &a, &a.common, cmd_integrate),
        Command::Flow(a) => with_common(name, &a, &a.common, cmd_flow),
        Command::Spectrum(a) => with_common(name, &a, &a.common, cmd_spectrum),
        Command::Frequency(a) => with_common(name, &a, &a.common, cmd_frequency),
        Command::Catalog(a) => with_common(name, &a, &a.common, cmd_catalog),
        Command::Asd(a) => with_common(name, &a, &a.common, cmd_asd),
    }
}

fn with_common<A: Serialize>(
    name: &str,
    args: &A,
    common: &Common,
    f: impl FnOnce(&A, &Path) -> crate::Result<i32>,
) -> crate::Result<i32> {
    if let Some(n) = common.jobs {
        // an already-initialised global pool is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let out = resolve_out_dir(common.out.as_deref());
    std::fs::create_dir_all(&out)?;
    let mut params = serde_json::to_value(args)?;
    if let Value::Object(map) = &mut params {
        map.insert("out".into(), json!(out));
    }
    let config = RunConfig {
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        params,
    };
    write_json(&out.join("config.json"), &config)?;
    f(args, &out)
}

fn triple_arg(name: &str, v: &[f64]) -> crate::Result<[f64; 3]> {
    match v {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(Error::Invalid(format!("--{name} needs exactly three values, got {}", v.len()))),
    }
}

fn csv_file(path: &Path) -> crate::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_verify(a: &VerifyArgs, out: &Path) -> crate::Result<i32> {
    let family = a.family.family();
    let entry = catalog(family)?;
    let (lo, hi) = entry.default_grid();
    let (lo, hi) = (a.r_lo.unwrap_or(lo), a.r_hi.unwrap_or(hi));
    let res = entry.grid_residuals(lo, hi, a.grid.max(1), crate::exterior::STRUCTURE_CONSTANT)?;
    let pass = res.below(a.tol);
    write_json(
        &out.join("verify.json"),
        &json!({
            "family": family,
            "r_lo": lo,
            "r_hi": hi,
            "points": res.points,
            "max_q": res.max_q,
            "max_d": res.max_d,
            "tol": a.tol,
            "pass": pass,
        }),
    )?;
    say!(
        "{}: max|Q| = {:.3e}, max|dω| = {:.3e} over {} radii in [{lo}, {hi}]: {}",
        family.name(),
        res.max_q,
        res.max_d,
        res.points,
        verdict(pass)
    );
    Ok(if pass { EXIT_OK } else { EXIT_TOLERANCE })
}

fn cmd_integrate(a: &IntegrateArgs, out: &Path) -> crate::Result<i32> {
    let tol = a.solver.tolerances();
    let (traj, oracle) = match (&a.family, &a.f) {
        (Some(name), _) => {
            let entry = catalog(family_of(*name, a.c, a.m))?;
            let r0 = a.r0.unwrap_or(entry.default_grid().0);
            let r1 = a.r1.unwrap_or(10.0 * r0);
            let (traj, rep) = oracle_comparison(&entry, r0, r1, &tol)?;
            (traj, Some(rep))
        }
        (None, Some(f)) => {
            let f = triple_arg("f", f)?;
            let t1 = a.t1.ok_or_else(|| Error::Invalid("--f needs --t1".into()))?;
            let start = ProfileState::new(f, a.t0, a.mode.into());
            (profile::integrate(&start, t1, &tol)?, None)
        }
        (None, None) => return Err(Error::Invalid("give --family or --f".into())),
    };
    traj.write_csv(csv_file(&out.join("trajectory.csv"))?)?;
    let hk = profile::hk_residual(&traj);
    let pass = oracle.is_none_or(|o| o.sup_error() <= a.check);
    write_json(
        &out.join("integrate.json"),
        &json!({
            "mode": traj.mode,
            "terminal": traj.terminal,
            "samples": traj.samples.len(),
            "hk_residual": hk,
            "oracle": oracle,
            "check": a.check,
            "pass": pass,
        }),
    )?;
    say!("terminal: {:?}, {} samples", traj.terminal, traj.samples.len());
    say!("max|Q| = {:.3e}, max|dω| = {:.3e}", hk.max_q, hk.max_d);
    if let Some(o) = oracle {
        say!(
            "closed-form deviation r ∈ [{}, {}]: {:.3e}: {}",
            o.r_start,
            o.r_end,
            o.sup_error(),
            verdict(pass)
        );
    }
    Ok(if pass { EXIT_OK } else { EXIT_TOLERANCE })
}

fn cmd_flow(a: &FlowArgs, out: &Path) -> crate::Result<i32> {
    let g = triple_arg("g", &a.g)?;
    let state = FramingState::diagonal(g, a.mode.into(), a.orientation.into());
    let direction = if a.outward {
        Direction::Outward
    } else {
        Direction::Inward
    };
    let traj = flow_integrate(&state, direction, a.span, &a.solver.tolerances())?;
    traj.write_csv(csv_file(&out.join("flow.csv"))?)?;
    let h0 = framing::mean_curvature(&state)?;
    write_json(
        &out.join("terminal.json"),
        &json!({
            "terminal": traj.terminal.kind.to_string(),
            "class": traj.terminal,
            "stop": traj.stop,
            "direction": direction,
            "mean_curvature": h0,
            "samples": traj.samples.len(),
            "closedness_residual": traj.closedness_residual(),
        }),
    )?;
    let last = traj.last();
    say!("terminal: {}", traj.terminal.kind);
    say!(
        "stop {:?} at s = {:.6}, g = ({:.6e}, {:.6e}, {:.6e})",
        traj.stop, last.t, last.g[0], last.g[1], last.g[2]
    );
    Ok(EXIT_OK)
}

fn cmd_spectrum(a: &SpectrumArgs, out: &Path) -> crate::Result<i32> {
    let op = match a.op {
        OperatorArg::Curl => SpectralOperator::Curl,
        OperatorArg::Dy => SpectralOperator::Dy,
    };
    let max_two_j = (2.0 * a.maxj).round() as u32;
    let s = spectrum::spectrum(op, max_two_j, a.orientation.into());
    s.write_csv(csv_file(&out.join("spectrum.csv"))?)?;
    write_json(&out.join("spectrum.json"), &s)?;
    say!("{:>14} {:>8} {:>10} {:>9}", "lambda", "mult", "coclosed", "complete");
    for l in &s.lines {
        say!(
            "{:>14} {:>8} {:>10} {:>9}",
            if l.integer {
                format!("{}", l.eigenvalue)
            } else {
                format!("{:.10}", l.eigenvalue)
            },
            l.multiplicity,
            l.coclosed_multiplicity,
            l.complete
        );
    }
    Ok(EXIT_OK)
}

fn cmd_frequency(a: &FrequencyArgs, out: &Path) -> crate::Result<i32> {
    let preset = if a.zero {
        FrequencyPreset::Zero
    } else {
        match a.preset {
            Some(PresetArg::EguchiHansonDelta) => FrequencyPreset::EguchiHansonDelta { c: a.c },
            Some(PresetArg::TaubNutDelta) => FrequencyPreset::TaubNutDelta { m: a.m },
            Some(PresetArg::Zero) | None => FrequencyPreset::Zero,
        }
    };
    let report = spectrum::frequency_preset(preset, a.orientation.map(Into::into))?;
    write_json(&out.join("frequency.json"), &report)?;
    say!("{}", report.verdict.classification);
    say!(
        "raw: {}; dilation component {:.6e}; orientation {:?}",
        report.raw.classification, report.dilation_coefficient, report.orientation
    );
    for c in &report.verdict.components {
        say!("  λ = {:>4}: weight {:.6e}", c.eigenvalue, c.weight);
    }
    Ok(EXIT_OK)
}

fn catalog_summary(family: Family) -> crate::Result<Value> {
    let e = catalog(family)?;
    let formula = match family {
        Family::FlatFixed | Family::FlatRotating => "f = (r, r, r)",
        Family::EguchiHanson { .. } => "f = (r·sqrt(1 − c⁴/r⁴), r, r)",
        Family::TaubNut { .. } => "f = (2m·sqrt((r − m)/(r + m)), sqrt(r² − m²), sqrt(r² − m²))",
    };
    Ok(json!({
        "family": family,
        "name": family.name(),
        "mode": e.mode(),
        "r_min": e.r_min(),
        "time_sign": e.time_sign,
        "boundary_orientation": e.boundary_orientation(),
        "profile": formula,
    }))
}

fn cmd_catalog(a: &CatalogArgs, out: &Path) -> crate::Result<i32> {
    let value = match (a.family, a.r) {
        (None, _) => {
            let all = [
                FamilyName::FlatFixed,
                FamilyName::FlatRotating,
                FamilyName::EguchiHanson,
                FamilyName::TaubNut,
            ];
            let list: Vec<Value> = all
                .iter()
                .map(|n| catalog_summary(family_of(*n, a.c, a.m)))
                .collect::<crate::Result<_>>()?;
            for v in &list {
                say!("{:<14} {:<9} {}", v["name"].as_str().unwrap_or(""), v["mode"], v["profile"]);
            }
            Value::Array(list)
        }
        (Some(name), r) => {
            let family = family_of(name, a.c, a.m);
            let mut v = catalog_summary(family)?;
            say!("{} {}", family.name(), v["profile"]);
            if let Some(r) = r {
                let e = catalog(family)?;
                let jets = e.jets(r)?;
                let gamma = catalog_framing(&e, r)?;
                let h = framing::mean_curvature(&gamma)?;
                let point = json!({
                    "r": r,
                    "f": jets.map(|j| j.value()),
                    "df_dt": jets.map(|j| j.dt_derivative()),
                    "framing": gamma.g,
                    "mean_curvature": h,
                    "ode_residual": e.residual(r)?,
                });
                say!("f({r}) = {}, γ = {:?}, H = {h}", point["f"], gamma.g);
                v["point"] = point;
            }
            v
        }
    };
    write_json(&out.join("catalog.json"), &value)?;
    Ok(EXIT_OK)
}

fn cmd_asd(a: &AsdArgs, out: &Path) -> crate::Result<i32> {
    let inv = asd::inventory(&a.ks, a.per_k, a.seed)?;
    write_json(&out.join("asd.json"), &inv)?;
    let pass = inv.max_closed < a.tol && inv.max_asd < a.tol && inv.max_tangent < a.tol;
    say!(
        "{} generators: closed {:.3e}, anti-self-dual {:.3e}, (θ,ω) {:.3e}: {}",
        inv.generators.len(),
        inv.max_closed,
        inv.max_asd,
        inv.max_tangent,
        verdict(pass)
    );
    Ok(if pass { EXIT_OK } else { EXIT_TOLERANCE })
}
