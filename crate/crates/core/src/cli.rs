//! The `fwlab` command line.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for
//! usage, ingestion, and I/O errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::conditions::{check, Condition};
use crate::exactgeom::{Catalogue, Family};
use crate::models::{aggregate, builtin_model, load_model_file, validate_model, ChoiceA, ChoiceB, LoadedModel, StochasticModel};
use crate::montecarlo::{
    compare, estimate, estimate_converted, write_converted_trial_log, write_trial_log, EmpiricalDist, GENERATOR,
};
use crate::report::Report;
use crate::theorems::{
    convert_given_in_advance, export_cnf, ks_feasible, min_violation_witness, reduce_to_coloring, uncovered_pairs,
    verify_unsat_certificate, SearchStatus,
};
use crate::{suite, Error, Result, Verdict};

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "FWLAB_SEED";
pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "fwlab", version, about = "Exact verification of hidden-variable models for the Peres spin experiment")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1, global = true, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub threads: u64,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the 33 rays.
    Rays,
    /// List the 40 bases.
    Bases,
    /// Show that no 101-coloring of the rays exists.
    ProveKs {
        /// Write the constraint problem in DIMACS CNF.
        #[arg(long, value_name = "FILE")]
        export_cnf: Option<PathBuf>,
        /// Write the search certificate, one step per line.
        #[arg(long, value_name = "FILE")]
        certificate: Option<PathBuf>,
    },
    /// Check one condition on a model.
    Check {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(Condition::ALL.map(Condition::name)))]
        condition: String,
        /// `builtin:NAME` or a model file.
        #[arg(long)]
        model: String,
    },
    /// Move a model's randomness into the hidden state and audit the result.
    Convert {
        #[arg(long)]
        model: String,
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Number of sampled hidden states.
        #[arg(long, default_value_t = suite::CONVERSION_DRAWS, value_parser = clap::value_parser!(u64).range(1..))]
        lambdas: u64,
    },
    /// Sample outcomes at one setting and compare with the exact table.
    Simulate {
        #[arg(long)]
        model: String,
        /// Basis index.
        #[arg(long)]
        a: usize,
        /// Ray index.
        #[arg(long)]
        b: usize,
        #[arg(short = 'n', default_value_t = suite::MC_TRIALS, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = suite::MC_TOLERANCE, value_parser = positive_f64)]
        tolerance: f64,
        /// Sample the converted model, one fresh hidden state per trial.
        #[arg(long)]
        converted: bool,
        /// Write every trial as a JSON line.
        #[arg(long, value_name = "FILE")]
        trial_log: Option<PathBuf>,
    },
    /// Run the full verification suite.
    ReportAll {
        #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("must be a positive number".to_string())
    }
}

/// What a run printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Outcome {
    report: Report,
    text: String,
}

pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                CliOutput { code, stdout: String::new(), stderr: rendered }
            } else {
                CliOutput { code, stdout: rendered, stderr: String::new() }
            };
        }
    };
    run_parsed(&cli)
}

pub fn run_parsed(cli: &Cli) -> CliOutput {
    let start = Instant::now();
    let threads = cli.threads as usize;
    let result = match &cli.command {
        Command::Rays => Ok(rays()),
        Command::Bases => Ok(bases()),
        Command::ProveKs { export_cnf, certificate } => prove_ks(export_cnf.as_deref(), certificate.as_deref()),
        Command::Check { condition, model } => check_cmd(condition, model),
        Command::Convert { model, seed, lambdas } => convert(model, *seed, *lambdas, threads),
        Command::Simulate { model, a, b, n, seed, tolerance, converted, trial_log } => {
            simulate(model, *a, *b, *n, *seed, *tolerance, *converted, trial_log.as_deref(), threads)
        }
        Command::ReportAll { seed } => Ok(report_all(*seed, threads)),
    };
    let mut outcome = match result {
        Ok(o) => o,
        Err(e) => return CliOutput { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let code = if outcome.report.pass { 0 } else { 1 };
    let elapsed = start.elapsed().as_millis() as u64;
    if cli.timing {
        outcome.report.timing_ms = Some(elapsed);
        let _ = writeln!(outcome.text, "time: {elapsed} ms");
    }
    let rendered = match cli.format {
        Format::Json => outcome.report.to_json(),
        Format::Text => outcome.text,
    };
    match &cli.out {
        Some(path) => match std::fs::write(path, &rendered) {
            Ok(()) => CliOutput { code, stdout: String::new(), stderr: String::new() },
            Err(e) => CliOutput { code: 2, stdout: String::new(), stderr: format!("error: {}: {e}\n", path.display()) },
        },
        None => CliOutput { code, stdout: rendered, stderr: String::new() },
    }
}

/// Resolves `builtin:NAME` or a model file path.
pub fn load_model(spec: &str) -> Result<LoadedModel> {
    match spec.strip_prefix(BUILTIN_PREFIX) {
        Some(name) => Ok(LoadedModel::Stochastic(builtin_model(name)?)),
        None => load_model_file(Path::new(spec)),
    }
}

fn verdict_line(v: &Verdict) -> String {
    format!("{}\n", v.summary())
}

fn header(command: &str) -> String {
    format!("fwlab {} {command}\n", env!("CARGO_PKG_VERSION"))
}

fn rays() -> Outcome {
    let cat = Catalogue::peres();
    let mut report = Report::new("rays", json!({}));
    let mut text = header("rays");
    for (i, ray) in cat.rays.iter().enumerate() {
        let family = Family::ALL.into_iter().find(|f| f.rays().contains(ray)).expect("every ray has a family");
        report.push(&json!({"index": i, "family": family, "ray": ray}));
        let _ = writeln!(text, "{i:>3}  {:<14} {ray}", serde_json::to_value(family).unwrap().as_str().unwrap());
    }
    let _ = writeln!(text, "{} rays", cat.rays.len());
    Outcome { report, text }
}

fn bases() -> Outcome {
    let cat = Catalogue::peres();
    let mut report = Report::new("bases", json!({}));
    let mut text = header("bases");
    for (i, basis) in cat.bases.iter().enumerate() {
        report.push(&json!({
            "index": i,
            "kind": basis.kind,
            "x": basis.x,
            "y": basis.y,
            "z": basis.z,
            "members": basis.members,
        }));
        let members: Vec<String> =
            basis.members.iter().map(|m| m.map_or_else(|| "-".to_string(), |v| v.to_string())).collect();
        let kind = serde_json::to_value(basis.kind).unwrap();
        let _ = writeln!(
            text,
            "{i:>3}  {:<9} x={} y={} z={}  rays=[{}]",
            kind.as_str().unwrap(),
            basis.x,
            basis.y,
            basis.z,
            members.join(",")
        );
    }
    let _ = writeln!(text, "{} bases", cat.bases.len());
    Outcome { report, text }
}

fn prove_ks(cnf_path: Option<&Path>, cert_path: Option<&Path>) -> Result<Outcome> {
    let problem = reduce_to_coloring();
    let uncovered = uncovered_pairs(Catalogue::peres(), &problem);
    let full = ks_feasible(&problem);
    let verified = full.status == SearchStatus::Unsat && verify_unsat_certificate(&problem, &full.certificate);
    let ablation = ks_feasible(&problem.pairs_only());
    if let Some(path) = cnf_path {
        std::fs::write(path, export_cnf(&problem))?;
    }
    if let Some(path) = cert_path {
        std::fs::write(path, full.certificate_text())?;
    }
    let inputs = json!({
        "export_cnf": cnf_path.map(|p| p.display().to_string()),
        "certificate": cert_path.map(|p| p.display().to_string()),
    });
    let mut report = Report::new("prove-ks", inputs);
    report.push_check(
        "coverage",
        uncovered.is_empty(),
        json!({"triples": problem.triples.len(), "pairs": problem.pairs.len(), "uncovered": uncovered}),
    );
    report.push_check(
        "unsat",
        full.status == SearchStatus::Unsat && verified,
        json!({
            "status": full.status,
            "nodes_explored": full.nodes_explored,
            "certificate_steps": full.certificate.len(),
            "certificate_verified": verified,
        }),
    );
    report.push_check(
        "pairs-only",
        ablation.status == SearchStatus::Sat,
        json!({
            "status": ablation.status,
            "nodes_explored": ablation.nodes_explored,
            "coloring": ablation.coloring.as_ref().map(|c| &c.values),
        }),
    );
    let mut text = header("prove-ks");
    let _ = writeln!(
        text,
        "constraints: {} triples, {} pairs, {} uncovered orthogonal pairs",
        problem.triples.len(),
        problem.pairs.len(),
        uncovered.len()
    );
    let _ = writeln!(
        text,
        "status: {:?}  nodes={}  certificate steps={}  verified={verified}",
        full.status,
        full.nodes_explored,
        full.certificate.len()
    );
    let _ = writeln!(text, "pairs-only ablation: {:?}", ablation.status);
    let _ = writeln!(text, "{}", if report.pass { "PASS" } else { "FAIL" });
    Ok(Outcome { report, text })
}

fn check_cmd(condition: &str, model_spec: &str) -> Result<Outcome> {
    let cond = Condition::from_name(condition).ok_or_else(|| Error::InvalidModel(format!("unknown condition {condition}")))?;
    let loaded = load_model(model_spec)?;
    let model = loaded.to_stochastic();
    let valid = validate_model(&model);
    let mut report = Report::new("check", json!({"condition": condition, "model": model_spec}));
    let mut text = header("check");
    let _ = writeln!(text, "model: {} ({model_spec})", model.name);
    report.push_verdict(&valid);
    text.push_str(&verdict_line(&valid));
    if valid.pass {
        if cond == Condition::MinDeterministic {
            loaded.to_deterministic()?;
        }
        let v = check(cond, &model);
        report.push_verdict(&v);
        text.push_str(&verdict_line(&v));
    }
    Ok(Outcome { report, text })
}

fn stochastic(spec: &str) -> Result<StochasticModel> {
    let model = load_model(spec)?.to_stochastic();
    let valid = validate_model(&model);
    if !valid.pass {
        return Err(Error::InvalidModel(valid.summary()));
    }
    Ok(model)
}

fn convert(model_spec: &str, seed: u64, lambdas: u64, threads: usize) -> Result<Outcome> {
    let model = stochastic(model_spec)?;
    let cm = convert_given_in_advance(&model, seed);
    let (conv, _) = min_violation_witness(&cm, lambdas, threads);
    let inputs = json!({"model": model_spec, "seed": seed, "lambdas": lambdas, "generator": GENERATOR});
    let mut report = Report::new("convert", inputs);
    report.push_check("spin-preserved", conv.spin_violations == 0, json!({"violations": conv.spin_violations}));
    report.push_check(
        "twin-preserved",
        conv.twin_violations == 0,
        json!({"checked": conv.twin_checked, "violations": conv.twin_violations}),
    );
    report.push_check(
        "min-broken",
        conv.min_violation_fraction >= suite::MIN_FRACTION,
        json!({
            "threshold": suite::MIN_FRACTION,
            "violating": conv.min_violating,
            "fraction": conv.min_violation_fraction,
            "first_witness": conv.first_witness,
            "draws_without_witness": conv.draws_without_witness,
        }),
    );
    let mut text = header("convert");
    let _ = writeln!(text, "model: {} ({model_spec})  seed={seed}  draws={lambdas}", model.name);
    let _ = writeln!(text, "generator: {GENERATOR}");
    let _ = writeln!(text, "SPIN violations: {}", conv.spin_violations);
    let _ = writeln!(text, "TWIN violations: {} of {} matching settings", conv.twin_violations, conv.twin_checked);
    let _ = writeln!(text, "MIN violated in {} of {} draws ({})", conv.min_violating, lambdas, conv.min_violation_fraction);
    if let Some(w) = &conv.first_witness {
        let _ = writeln!(text, "first witness: {}", w.describe());
    }
    let _ = writeln!(text, "{}", if report.pass { "PASS" } else { "FAIL" });
    Ok(Outcome { report, text })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    model_spec: &str,
    a: usize,
    b: usize,
    n: u64,
    seed: u64,
    tolerance: f64,
    converted: bool,
    trial_log: Option<&Path>,
    threads: usize,
) -> Result<Outcome> {
    let model = stochastic(model_spec)?;
    let (ca, cb) = (ChoiceA(a), ChoiceB(b));
    let exact = aggregate(&model, ca, cb)?;
    let ia = model.domain.pos_a(ca).ok_or_else(|| Error::ChoiceOutOfRange(format!("a={a}")))?;
    let ib = model.domain.pos_b(cb).ok_or_else(|| Error::ChoiceOutOfRange(format!("b={b}")))?;
    let emp: EmpiricalDist = if converted {
        let cm = convert_given_in_advance(&model, seed);
        if let Some(path) = trial_log {
            let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_converted_trial_log(&cm, ia, ib, n, &mut out)?;
        }
        estimate_converted(&cm, ia, ib, n, threads)
    } else {
        if let Some(path) = trial_log {
            let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_trial_log(&model, ca, cb, n, seed, &mut out)?;
        }
        estimate(&model, ca, cb, n, seed, threads)?
    };
    let verdict = compare(&emp, &exact, tolerance);
    let inputs = json!({
        "model": model_spec,
        "a": a,
        "b": b,
        "n": n,
        "seed": seed,
        "tolerance": tolerance,
        "converted": converted,
        "generator": GENERATOR,
        "trial_log": trial_log.map(|p| p.display().to_string()),
    });
    let mut report = Report::new("simulate", inputs);
    let mut text = header("simulate");
    let _ = writeln!(text, "model: {} ({model_spec})  a={a} b={b} n={n} seed={seed} converted={converted}", model.name);
    let _ = writeln!(text, "generator: {GENERATOR}");
    let _ = writeln!(text, "{:<8} {:>22} {:>10} {:>10}", "cell", "exact", "exact≈", "empirical");
    let mut rows = Vec::new();
    for c in crate::models::Cell::all() {
        let p = exact.get(c);
        if p.is_zero() && emp.count(c) == 0 {
            continue;
        }
        rows.push(json!({
            "cell": c.to_string(),
            "exact": p,
            "exact_decimal": p.to_f64(),
            "count": emp.count(c),
            "frequency": emp.frequency(c),
        }));
        let _ = writeln!(text, "{:<8} {:>22} {:>10.6} {:>10.6}", c.to_string(), p.to_string(), p.to_f64(), emp.frequency(c));
    }
    report.push(&json!({"table": rows, "empirical": emp}));
    report.push_verdict(&verdict);
    text.push_str(&verdict_line(&verdict));
    Ok(Outcome { report, text })
}

fn report_all(seed: u64, threads: usize) -> Outcome {
    let criteria = suite::run_with_determinism(seed, threads);
    let mut report = Report::new("report-all", json!({"seed": seed, "generator": GENERATOR}));
    let mut text = header("report-all");
    for c in &criteria {
        report.push_check(&c.name, c.pass, json!({"criterion": c.id, "details": c.details}));
        let _ = writeln!(text, "{}", c.line());
    }
    let _ = writeln!(text, "{}", if report.pass { "PASS" } else { "FAIL" });
    Outcome { report, text }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn run_args(args: &[&str]) -> CliOutput {
        run(std::iter::once("fwlab").chain(args.iter().copied()))
    }

    #[test]
    fn check_pi_on_qm_data_passes() {
        let out = run_args(&["check", "pi", "--model", "builtin:qm-data"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("pi"));
    }

    #[test]
    fn agreement_on_toy_fails_with_cell() {
        let out = run_args(&["--format", "json", "check", "agreement", "--model", "builtin:toy-minimal"]);
        assert_eq!(out.code, 1);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        let last = v["results"].as_array().unwrap().last().unwrap().clone();
        assert_eq!(last["pass"], false);
        assert!(last["witness"]["cell"].is_string());
    }

    #[test]
    fn usage_errors_exit_2_and_name_the_flag() {
        let out = run_args(&["check", "pi", "--modle", "builtin:qm-data"]);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("--modle"));
        let out = run_args(&["check", "nonsense", "--model", "builtin:qm-data"]);
        assert_eq!(out.code, 2);
        let out = run_args(&["check", "pi", "--model", "builtin:nope"]);
        assert_eq!(out.code, 2);
    }

    #[test]
    fn mind_on_stochastic_model_is_an_error() {
        let out = run_args(&["check", "mind", "--model", "builtin:qm-data"]);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("deterministic"), "{}", out.stderr);
    }

    #[test]
    fn rays_and_bases_list_the_catalogue() {
        let out = run_args(&["rays"]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains("33 rays"));
        let out = run_args(&["--format", "json", "bases"]);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["results"].as_array().unwrap().len(), 40);
    }
}
