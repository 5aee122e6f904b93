use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

use contact3::charts::{
    build_chart, catalog, run_entry, verify_theorem4, ChartCase, ChartError, ChartParams, ExampleReport, Theorem4Report,
};
use contact3::curvature::{check_b_identities, Analysis};
use contact3::dhomothety::{apply, verify_transform, DHomothetyParams, DHomothetyReport};
use contact3::fdcheck::fd_check;
use contact3::nullity::{classify, nullity_sweep, Classification, NullityReport};
use contact3::report::CheckReport;
use contact3::sampling::SkippedPoint;
use contact3::specfile::{parse_spec, ManifoldSpec};
use contact3::structure::{validate, ContactStructure, SamplingBox, StructureError};

use crate::{text, ChartArgs, Format, RunConfig};

/// Relative tolerance of the finite-difference metric check.
const FD_REL_TOL: f64 = 1e-5;
/// Tolerance of `h` against a finite-difference Lie derivative.
const FD_H_TOL: f64 = 1e-6;

/// Usage or input problem; reported with exit status 2.
#[derive(Debug)]
pub struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn input(msg: impl fmt::Display) -> InputError {
    InputError(msg.to_string())
}

pub struct Output {
    pub body: String,
    pub passed: bool,
}

fn emit<T: Serialize>(
    config: &RunConfig,
    value: &T,
    passed: bool,
    render: impl FnOnce() -> String,
) -> Result<Output, InputError> {
    let body = match config.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(input)?;
            s.push('\n');
            s
        }
        Format::Text => render(),
    };
    Ok(Output { body, passed })
}

fn load(path: &Path) -> Result<(ManifoldSpec, ContactStructure), InputError> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let spec = parse_spec(&text).map_err(|e| input(format!("{}:{e}", path.display())))?;
    let structure = spec.build().map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok((spec, structure))
}

fn write_spec(path: &Path, spec: &ManifoldSpec) -> Result<(), InputError> {
    fs::write(path, spec.render()).map_err(|e| input(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
pub struct VerifyOutput {
    pub command: &'static str,
    pub structure: String,
    pub validation: CheckReport,
    pub identities: CheckReport,
    pub derivatives: CheckReport,
    pub passed: bool,
}

pub fn verify(path: &Path, config: &RunConfig) -> Result<Output, InputError> {
    let (_, s) = load(path)?;
    let n = config.n_points();
    let validation = validate(&s, n, config.seed, config.tol).map_err(input)?;
    let identities = check_b_identities(&Analysis::new(&s), n, config.seed, config.tol).map_err(input)?;
    let derivatives = fd_check(&s, n, config.seed, config.fd_step, FD_REL_TOL, FD_H_TOL).map_err(input)?;
    let passed = validation.passed && identities.passed && derivatives.passed;
    let out = VerifyOutput {
        command: "verify",
        structure: s.chart.name.clone(),
        validation,
        identities,
        derivatives,
        passed,
    };
    emit(config, &out, passed, || text::verify(&out))
}

#[derive(Serialize)]
pub struct NullityOutput {
    pub command: &'static str,
    pub structure: String,
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    pub validation: CheckReport,
    pub classification: Classification,
    pub rows: Vec<NullityReport>,
    pub skipped: Vec<SkippedPoint>,
    pub passed: bool,
}

pub fn nullity(path: &Path, config: &RunConfig) -> Result<Output, InputError> {
    let (_, s) = load(path)?;
    let n = config.n_points();
    let validation = validate(&s, n, config.seed, config.tol).map_err(input)?;
    let samples = nullity_sweep(&Analysis::new(&s), n, config.seed).map_err(input)?;
    let classification = classify(&samples.values, config.tol);
    let passed = validation.passed;
    let out = NullityOutput {
        command: "nullity",
        structure: s.chart.name.clone(),
        points: samples.values.len(),
        seed: config.seed,
        tol: config.tol,
        validation,
        classification,
        rows: samples.values,
        skipped: samples.skipped,
        passed,
    };
    emit(config, &out, passed, || text::nullity(&out, config.verbose))
}

#[derive(Serialize)]
pub struct DHomothetyOutput {
    pub command: &'static str,
    pub structure: String,
    pub deformed: String,
    pub report: DHomothetyReport,
    pub passed: bool,
}

pub fn dhomothety(path: &Path, alpha: f64, emit_path: Option<&Path>, config: &RunConfig) -> Result<Output, InputError> {
    DHomothetyParams::new(alpha).map_err(input)?;
    let (_, s) = load(path)?;
    let deformed = apply(&s, alpha).map_err(input)?;
    if let Some(p) = emit_path {
        write_spec(p, &ManifoldSpec::from_structure(&deformed))?;
    }
    let report =
        verify_transform(&Analysis::new(&s), alpha, config.n_points(), config.seed, config.tol).map_err(input)?;
    let passed = report.passed();
    let out = DHomothetyOutput {
        command: "dhomothety",
        structure: s.chart.name.clone(),
        deformed: deformed.chart.name.clone(),
        report,
        passed,
    };
    emit(config, &out, passed, || text::dhomothety(&out, config.verbose))
}

#[derive(Serialize)]
pub struct ChartOutput {
    pub command: &'static str,
    pub spec: String,
    pub report: Theorem4Report,
    pub passed: bool,
}

fn parse_box(entries: &[String]) -> Result<SamplingBox, InputError> {
    let mut bounds = contact3::charts::default_chart_box().bounds();
    for entry in entries {
        let bad = || input(format!("--box expects `coord=lo,hi` with coord one of x, y, z; got `{entry}`"));
        let (coord, range) = entry.split_once('=').ok_or_else(bad)?;
        let index = ["x", "y", "z"].iter().position(|c| *c == coord.trim()).ok_or_else(bad)?;
        let (lo, hi) = range.split_once(',').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        bounds[index] = (lo, hi);
    }
    SamplingBox::new(bounds).map_err(input)
}

/// Sampling failures on a generated chart almost always mean `lam_of_z <= 0`
/// throughout the box, so say so.
fn chart_error(e: ChartError) -> InputError {
    match e {
        ChartError::Sampling(_) | ChartError::Structure(StructureError::Sampling(_)) => {
            input(format!("{e}; generated charts require lam_of_z > 0, so adjust --lambda-const or --box"))
        }
        e => input(e),
    }
}

pub fn chart(args: &ChartArgs, config: &RunConfig) -> Result<Output, InputError> {
    let case = ChartCase::try_from(args.case).map_err(input)?;
    let mut params = ChartParams::parse(case, &args.k3, &args.r, &args.beta, &args.h).map_err(input)?;
    params.lambda_const = args.lambda_const;
    params.sampling_box = parse_box(&args.boxes)?;
    let generated = build_chart(&params).map_err(chart_error)?;
    if let Some(p) = &args.emit {
        write_spec(p, &generated.spec)?;
    }
    let report = verify_theorem4(&generated, config.n_points(), config.seed, config.tol).map_err(chart_error)?;
    let passed = report.passed;
    let out = ChartOutput { command: "chart", spec: generated.spec.render(), report, passed };
    emit(config, &out, passed, || text::chart(&out, config.verbose))
}

#[derive(Serialize)]
pub struct ExamplesOutput {
    pub command: &'static str,
    pub entries: Vec<ExampleReport>,
    pub passed: bool,
}

pub fn examples(config: &RunConfig) -> Result<Output, InputError> {
    let entries = catalog()
        .iter()
        .map(|e| run_entry(e, config.n_points(), config.seed, config.tol))
        .collect::<Result<Vec<_>, _>>()
        .map_err(input)?;
    let passed = entries.iter().all(|e| e.passed);
    let out = ExamplesOutput { command: "examples", entries, passed };
    emit(config, &out, passed, || text::examples(&out, config.verbose))
}
