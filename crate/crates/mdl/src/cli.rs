//! Batch front-end: load an instance, run algorithms / bound evaluators /
//! verification suites, and emit machine-readable reports.
//!
//! Commands are pure functions of their flags and input files; identical
//! invocations produce byte-identical outputs. JSON reports carry a
//! `schema_version` field; the `mc` command emits a plot-ready CSV with the
//! fixed header
//! `algorithm,n,T,regret_mean,regret_se,errprob_mean,errprob_se,bound_value,bound_applicable,seed`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage/validation error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algorithms::{resolve_eps, run_lcb_dr, run_lcb_dr_manual, EpsSpec, LcbDrOptions};
use crate::bounds::{
    empirical_max_bounds, g_quantity, lcb_dr_error_bound_from_schedule, nue_regret_bound,
    ue_distribution_free_bound, ue_regret_bound, variance_quantities, VarianceMethod,
};
use crate::instance::Instance;
use crate::sampling::{splitmix64, substream};
use crate::verify::{
    exact_ue_distribution, expectation_max_check, mc_regret, oracle_mc_agreement,
    random_small_allocation, random_small_instance, tail_check_bernstein, tail_check_mcdiarmid,
    AlgorithmSpec, VerifyError, DEFAULT_ENUMERATION_CAP,
};

pub const SCHEMA_VERSION: u32 = 1;

pub const MC_CSV_HEADER: &str =
    "algorithm,n,T,regret_mean,regret_se,errprob_mean,errprob_se,bound_value,bound_applicable,seed";

/// Exit code for verification failures (distinct from usage errors).
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit code for usage and validation errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "mdl",
    about = "Robust best-decision identification on finite multi-distribution instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate an instance and report its gap profile and Lipschitz constants.
    Analyze(AnalyzeArgs),
    /// One seeded algorithm run.
    Run(RunArgs),
    /// Monte Carlo sweep; CSV with one row per sweep point.
    Mc(McArgs),
    /// Evaluate closed-form bounds.
    Bounds(BoundsArgs),
    /// Run the verification suites; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    instance: String,
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    instance: String,
    /// ue | nue | lcb-dr
    #[arg(long)]
    algorithm: String,
    /// Samples per distribution (ue).
    #[arg(long)]
    n: Option<u64>,
    /// Comma-separated allocation (nue), e.g. 10,20.
    #[arg(long)]
    allocation: Option<String>,
    /// Comma-separated action names (lcb-dr), e.g. a1,a2.
    #[arg(long)]
    permutation: Option<String>,
    /// auto | scaled:<factor> | comma-separated values (lcb-dr).
    #[arg(long, default_value = "auto")]
    eps: String,
    /// Explicit per-round budgets (lcb-dr manual mode).
    #[arg(long)]
    budgets: Option<String>,
    /// Record deviation-event diagnostics (lcb-dr).
    #[arg(long)]
    instrument: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long)]
    instance: String,
    #[arg(long)]
    algorithm: String,
    /// Sweep of per-distribution sample counts (ue), e.g. 500,1000,2000.
    #[arg(long)]
    n_list: Option<String>,
    /// Sweep of allocations (nue), semicolon-separated, e.g. 10,20;20,40.
    #[arg(long)]
    allocation_list: Option<String>,
    /// Sweep of index-parameter scale factors (lcb-dr).
    #[arg(long)]
    eps_scale_list: Option<String>,
    /// Permutation for lcb-dr sweeps.
    #[arg(long)]
    permutation: Option<String>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    instance: String,
    /// Comma-separated: ue,ue-free,nue,lcb-dr,emp-max.
    #[arg(long, default_value = "ue,ue-free")]
    which: String,
    #[arg(long)]
    n: Option<u64>,
    /// Total budget for ue-free (defaults to n·k).
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    allocation: Option<String>,
    #[arg(long)]
    permutation: Option<String>,
    #[arg(long, default_value = "auto")]
    eps: String,
    /// exact | mc (variance quantities for the nue bound).
    #[arg(long, default_value = "exact")]
    method: String,
    #[arg(long, default_value_t = 100_000)]
    mc_trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Instance to check (defaults to the built-in fixture battery).
    #[arg(long)]
    instance: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    allocation: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
}

/// Serializable record of a command invocation; round-trips losslessly
/// through JSON and is echoed in every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation_list: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_scale_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub instrument: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub which: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        CliError::usage(e.to_string())
    }
}

/// Parse arguments and execute; returns the process exit code. Output goes
/// to `--out` when given, otherwise to stdout.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version print and exit 0; usage errors exit 2.
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Mc(a) => cmd_mc(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok((code, output, out_path)) => {
            match out_path {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, output) {
                        eprintln!("error: cannot write {path}: {e}");
                        return EXIT_USAGE;
                    }
                }
                None => print!("{output}"),
            }
            code
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

type CmdOutput = (i32, String, Option<String>);

fn load_instance(path: &str) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::usage(format!("cannot read instance {path}: {e}")))?;
    Instance::from_json_str(&text)
        .map_err(|e| CliError::usage(format!("malformed instance {path}: {e}")))
}

fn load_valid_instance(path: &str) -> Result<Instance, CliError> {
    let inst = load_instance(path)?;
    let report = inst.validate();
    if !report.is_valid() {
        let mut msg = format!("instance {path} failed validation:");
        for v in &report.violations {
            let _ = write!(msg, "\n  {}: {}", v.field, v.message);
        }
        return Err(CliError::usage(msg));
    }
    Ok(inst)
}

fn parse_u64_list(s: &str, what: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| CliError::usage(format!("bad {what} entry {p:?}")))
        })
        .collect()
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad {what} entry {p:?}")))
        })
        .collect()
}

fn parse_permutation(inst: &Instance, s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|name| {
            inst.action_index(name.trim())
                .map_err(|e| CliError::usage(e.to_string()))
        })
        .collect()
}

fn parse_eps(s: &str) -> Result<EpsSpec, CliError> {
    if s == "auto" {
        return Ok(EpsSpec::Auto);
    }
    if let Some(factor) = s.strip_prefix("scaled:") {
        let f: f64 = factor
            .parse()
            .map_err(|_| CliError::usage(format!("bad scale factor {factor:?}")))?;
        return Ok(EpsSpec::Scaled(f));
    }
    Ok(EpsSpec::Explicit(parse_f64_list(s, "eps")?))
}

fn envelope(config: &ExperimentConfig, result: Value) -> String {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "config": config,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
    s.push('\n');
    s
}

/// Flatten a JSON value into `key,value` CSV rows (arrays indexed, objects
/// dotted), ordered deterministically.
fn flatten_csv(value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, child, rows);
                }
            }
            Value::Array(items) => {
                for (i, child) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), child, rows);
                }
            }
            other => rows.push((prefix.to_string(), scalar_to_string(other))),
        }
    }
    fn scalar_to_string(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    let mut rows = Vec::new();
    walk("", value, &mut rows);
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

fn render(config: &ExperimentConfig, result: Value) -> String {
    match config.format.as_deref() {
        Some("csv") => flatten_csv(&result),
        _ => envelope(config, result),
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<CmdOutput, CliError> {
    if args.format != "json" && args.format != "csv" {
        return Err(CliError::usage(format!("unknown format {:?}", args.format)));
    }
    let config = ExperimentConfig {
        command: "analyze".into(),
        instance: Some(args.instance.clone()),
        format: Some(args.format.clone()),
        out: args.out.clone(),
        ..Default::default()
    };
    let inst = load_instance(&args.instance)?;
    let report = inst.validate();
    if !report.is_valid() {
        let mut msg = format!("instance {} failed validation:", args.instance);
        for v in &report.violations {
            let _ = write!(msg, "\n  {}: {}", v.field, v.message);
        }
        return Err(CliError::usage(msg));
    }
    let profile = inst.gap_profile();
    let result = json!({
        "actions": inst.actions,
        "distributions": inst.distributions.iter().map(|d| d.name.clone()).collect::<Vec<_>>(),
        "gap_profile": profile,
        "lipschitz": inst.lipschitz(),
        "validation": report,
    });
    Ok((0, render(&config, result), args.out.clone()))
}

fn cmd_run(args: &RunArgs) -> Result<CmdOutput, CliError> {
    let inst = load_valid_instance(&args.instance)?;
    let profile = inst.gap_profile();
    let stream = substream(args.seed, 0);

    let mut config = ExperimentConfig {
        command: "run".into(),
        instance: Some(args.instance.clone()),
        algorithm: Some(args.algorithm.clone()),
        seed: args.seed,
        out: args.out.clone(),
        ..Default::default()
    };

    let run = match args.algorithm.as_str() {
        "ue" => {
            let n = args
                .n
                .ok_or_else(|| CliError::usage("ue requires --n"))?;
            config.n = Some(n);
            crate::algorithms::run_ue(&inst, n, &stream)
        }
        "nue" => {
            let alloc = parse_u64_list(
                args.allocation
                    .as_deref()
                    .ok_or_else(|| CliError::usage("nue requires --allocation"))?,
                "allocation",
            )?;
            config.allocation = Some(alloc.clone());
            crate::algorithms::run_nue(&inst, &alloc, &stream)
        }
        "lcb-dr" => {
            let perm_str = args
                .permutation
                .as_deref()
                .ok_or_else(|| CliError::usage("lcb-dr requires --permutation"))?;
            let permutation = parse_permutation(&inst, perm_str)?;
            config.permutation =
                Some(perm_str.split(',').map(|s| s.trim().to_string()).collect());
            config.eps = Some(args.eps.clone());
            config.instrument = args.instrument;
            let eps = parse_eps(&args.eps)?;
            match &args.budgets {
                Some(b) => {
                    let budgets = parse_u64_list(b, "budgets")?;
                    config.budgets = Some(budgets.clone());
                    let eps_values = match eps {
                        EpsSpec::Explicit(v) => v,
                        _ => {
                            return Err(CliError::usage(
                                "manual budgets require explicit --eps values",
                            ))
                        }
                    };
                    run_lcb_dr_manual(
                        &inst,
                        &profile,
                        &permutation,
                        &eps_values,
                        &budgets,
                        args.instrument,
                        &stream,
                    )
                }
                None => {
                    let options = LcbDrOptions {
                        eps,
                        instrument: args.instrument,
                    };
                    run_lcb_dr(&inst, &profile, &permutation, &options, &stream)
                }
            }
        }
        other => return Err(CliError::usage(format!("unknown algorithm {other:?}"))),
    }
    .map_err(|e| CliError::usage(e.to_string()))?;

    let result = json!({
        "chosen_action": inst.actions[run.chosen],
        "regret": run.regret(&profile),
        "is_error": run.is_error(&profile),
        "run": run,
    });
    Ok((0, envelope(&config, result), args.out.clone()))
}

/// Format a float for CSV: integers without a trailing `.0`, everything else
/// with the shortest round-trip representation.
fn csv_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// One sweep-point row: (algorithm, n, T, regret mean/se, errprob mean/se,
/// bound value, bound applicable).
type McRow = (String, f64, f64, f64, f64, f64, f64, f64, bool);

fn cmd_mc(args: &McArgs) -> Result<CmdOutput, CliError> {
    let inst = load_valid_instance(&args.instance)?;
    let profile = inst.gap_profile();
    if args.trials < 2 {
        return Err(CliError::usage("--trials must be at least 2"));
    }
    let k = inst.n_distributions();

    let mut rows: Vec<McRow> = Vec::new();
    match args.algorithm.as_str() {
        "ue" => {
            let ns = parse_u64_list(
                args.n_list
                    .as_deref()
                    .ok_or_else(|| CliError::usage("ue sweep requires --n-list"))?,
                "n-list",
            )?;
            for &n in &ns {
                let spec = AlgorithmSpec::Ue { n };
                let mc = mc_regret(&inst, &profile, &spec, args.trials, args.seed)?;
                let bound = ue_regret_bound(&profile, k, n);
                rows.push((
                    "ue".into(),
                    n as f64,
                    mc.avg_total_samples,
                    mc.regret.mean,
                    mc.regret.std_error,
                    mc.error_prob.mean,
                    mc.error_prob.std_error,
                    bound.value,
                    bound.applicable,
                ));
            }
        }
        "nue" => {
            let lists = args
                .allocation_list
                .as_deref()
                .ok_or_else(|| CliError::usage("nue sweep requires --allocation-list"))?;
            for part in lists.split(';') {
                let alloc = parse_u64_list(part, "allocation")?;
                if alloc.len() != k {
                    return Err(CliError::usage(format!(
                        "allocation {part:?} has {} entries, instance has {k}",
                        alloc.len()
                    )));
                }
                let spec = AlgorithmSpec::Nue {
                    allocation: alloc.clone(),
                };
                let mc = mc_regret(&inst, &profile, &spec, args.trials, args.seed)?;
                let min_nq = *alloc.iter().min().unwrap();
                let vq = variance_quantities(&inst, &alloc, VarianceMethod::Exact, None)
                    .or_else(|_| {
                        variance_quantities(
                            &inst,
                            &alloc,
                            VarianceMethod::MonteCarlo { trials: 100_000 },
                            Some(&substream(args.seed, u64::MAX - 1)),
                        )
                    })
                    .map_err(|e| CliError::usage(e.to_string()))?;
                let lip = inst.lipschitz().overall;
                let g = g_quantity(k, min_nq, lip, vq.sigma2_t.sqrt());
                let bound = nue_regret_bound(&profile, &vq, g, lip, min_nq);
                rows.push((
                    "nue".into(),
                    min_nq as f64,
                    mc.avg_total_samples,
                    mc.regret.mean,
                    mc.regret.std_error,
                    mc.error_prob.mean,
                    mc.error_prob.std_error,
                    bound.value,
                    bound.applicable,
                ));
            }
        }
        "lcb-dr" => {
            let scales = parse_f64_list(
                args.eps_scale_list
                    .as_deref()
                    .ok_or_else(|| CliError::usage("lcb-dr sweep requires --eps-scale-list"))?,
                "eps-scale-list",
            )?;
            let permutation = parse_permutation(
                &inst,
                args.permutation
                    .as_deref()
                    .ok_or_else(|| CliError::usage("lcb-dr sweep requires --permutation"))?,
            )?;
            for &scale in &scales {
                let eps = EpsSpec::Scaled(scale);
                let schedule = resolve_eps(&profile, &permutation, &eps)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                let spec = AlgorithmSpec::LcbDr {
                    permutation: permutation.clone(),
                    eps,
                };
                let mc = mc_regret(&inst, &profile, &spec, args.trials, args.seed)?;
                let bound = lcb_dr_error_bound_from_schedule(&profile, &permutation, &schedule)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                rows.push((
                    "lcb-dr".into(),
                    scale,
                    mc.avg_total_samples,
                    mc.regret.mean,
                    mc.regret.std_error,
                    mc.error_prob.mean,
                    mc.error_prob.std_error,
                    bound.value,
                    bound.applicable,
                ));
            }
        }
        other => return Err(CliError::usage(format!("unknown algorithm {other:?}"))),
    }

    let mut out = String::from(MC_CSV_HEADER);
    out.push('\n');
    for (alg, n, t, rm, rse, em, ese, bv, ba) in rows {
        let _ = writeln!(
            out,
            "{alg},{},{},{rm},{rse},{em},{ese},{bv},{ba},{}",
            csv_num(n),
            csv_num(t),
            args.seed
        );
    }
    Ok((0, out, args.out.clone()))
}

fn cmd_bounds(args: &BoundsArgs) -> Result<CmdOutput, CliError> {
    if args.format != "json" && args.format != "csv" {
        return Err(CliError::usage(format!("unknown format {:?}", args.format)));
    }
    let inst = load_valid_instance(&args.instance)?;
    let profile = inst.gap_profile();
    let k = inst.n_distributions();
    let l = inst.n_actions();
    let which: Vec<String> = args.which.split(',').map(|s| s.trim().to_string()).collect();

    let config = ExperimentConfig {
        command: "bounds".into(),
        instance: Some(args.instance.clone()),
        which: Some(which.clone()),
        n: args.n,
        t: args.t,
        allocation: args
            .allocation
            .as_deref()
            .map(|s| parse_u64_list(s, "allocation"))
            .transpose()?,
        eps: Some(args.eps.clone()),
        method: Some(args.method.clone()),
        seed: args.seed,
        format: Some(args.format.clone()),
        out: args.out.clone(),
        ..Default::default()
    };

    let mut reports: BTreeMap<String, Value> = BTreeMap::new();
    for name in &which {
        let value = match name.as_str() {
            "ue" => {
                let n = args.n.ok_or_else(|| CliError::usage("ue bound requires --n"))?;
                serde_json::to_value(ue_regret_bound(&profile, k, n)).unwrap()
            }
            "ue-free" => {
                let t = match (args.t, args.n) {
                    (Some(t), _) => t,
                    (None, Some(n)) => n * k as u64,
                    (None, None) => {
                        return Err(CliError::usage("ue-free bound requires --t or --n"))
                    }
                };
                let report = ue_distribution_free_bound(k, l, t)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                serde_json::to_value(report).unwrap()
            }
            "nue" => {
                let alloc = parse_u64_list(
                    args.allocation
                        .as_deref()
                        .ok_or_else(|| CliError::usage("nue bound requires --allocation"))?,
                    "allocation",
                )?;
                let method = match args.method.as_str() {
                    "exact" => VarianceMethod::Exact,
                    "mc" => VarianceMethod::MonteCarlo {
                        trials: args.mc_trials,
                    },
                    other => return Err(CliError::usage(format!("unknown method {other:?}"))),
                };
                let stream = substream(args.seed, u64::MAX - 1);
                let vq = variance_quantities(&inst, &alloc, method, Some(&stream))
                    .map_err(|e| CliError::usage(e.to_string()))?;
                let min_nq = *alloc.iter().min().unwrap();
                let lip = inst.lipschitz().overall;
                let g = g_quantity(k, min_nq, lip, vq.sigma2_t.sqrt());
                let report = nue_regret_bound(&profile, &vq, g, lip, min_nq);
                json!({ "bound": report, "variance_quantities": vq, "g_t": g })
            }
            "lcb-dr" => {
                let permutation = parse_permutation(
                    &inst,
                    args.permutation
                        .as_deref()
                        .ok_or_else(|| CliError::usage("lcb-dr bound requires --permutation"))?,
                )?;
                let eps = parse_eps(&args.eps)?;
                let schedule = resolve_eps(&profile, &permutation, &eps)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                let report = lcb_dr_error_bound_from_schedule(&profile, &permutation, &schedule)
                    .map_err(|e| CliError::usage(e.to_string()))?;
                json!({ "bound": report, "schedule": schedule })
            }
            "emp-max" => {
                let alloc = parse_u64_list(
                    args.allocation
                        .as_deref()
                        .ok_or_else(|| CliError::usage("emp-max bound requires --allocation"))?,
                    "allocation",
                )?;
                let min_nq = *alloc.iter().min().unwrap();
                let sigma2_t = (0..k)
                    .map(|q| inst.data_variance(q) / alloc[q] as f64)
                    .fold(f64::NEG_INFINITY, f64::max);
                let (first, second) = empirical_max_bounds(
                    k,
                    min_nq,
                    Some(inst.lipschitz().overall),
                    Some(sigma2_t.sqrt()),
                );
                json!({ "hoeffding": first, "bernstein": second })
            }
            other => return Err(CliError::usage(format!("unknown bound {other:?}"))),
        };
        reports.insert(name.clone(), value);
    }

    let result = json!({ "bounds": reports });
    Ok((0, render(&config, result), args.out.clone()))
}

struct CheckLog {
    lines: Vec<String>,
    failures: u64,
}

impl CheckLog {
    fn new() -> Self {
        CheckLog {
            lines: Vec::new(),
            failures: 0,
        }
    }

    fn record(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        self.lines
            .push(format!("{} {name}: {detail}", if pass { "ok  " } else { "FAIL" }));
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<CmdOutput, CliError> {
    if args.trials < 2 {
        return Err(CliError::usage("--trials must be at least 2"));
    }
    if args.trials < 1000 {
        eprintln!(
            "warning: the 3-standard-error slack rule is unreliable below 1000 trials (got {})",
            args.trials
        );
    }
    let trials = args.trials;
    let seed = args.seed;
    let mut log = CheckLog::new();

    match &args.instance {
        Some(path) => {
            let inst = load_valid_instance(path)?;
            let profile = inst.gap_profile();
            let alloc = match (&args.allocation, args.n) {
                (Some(s), _) => parse_u64_list(s, "allocation")?,
                (None, Some(n)) => vec![n; inst.n_distributions()],
                (None, None) => vec![2; inst.n_distributions()],
            };
            let agreement = oracle_mc_agreement(&inst, &profile, &alloc, trials, seed)
                .map_err(verify_to_cli)?;
            log.record(
                "oracle-vs-mc",
                agreement.pass,
                format!(
                    "exact error {:.6}, mc {:.6} +/- {:.6}",
                    agreement.exact_error_prob,
                    agreement.mc.error_prob.mean,
                    agreement.mc.error_prob.std_error
                ),
            );
            if inst.n_actions() >= 2 {
                let grid = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
                let check = tail_check_mcdiarmid(&inst, 0, 1, 20, &grid, trials, seed)
                    .map_err(verify_to_cli)?;
                log.record(
                    "mcdiarmid-tails",
                    check.all_pass(),
                    summarize_tail(&check),
                );
            }
        }
        None => default_battery(&mut log, trials, seed)?,
    }

    let mut output = String::new();
    for line in &log.lines {
        let _ = writeln!(output, "{line}");
    }
    let _ = writeln!(
        output,
        "{} checks, {} failed",
        log.lines.len(),
        log.failures
    );
    let code = if log.failures > 0 { EXIT_CHECK_FAILED } else { 0 };
    Ok((code, output, args.out.clone()))
}

fn verify_to_cli(e: VerifyError) -> CliError {
    CliError::usage(e.to_string())
}

fn summarize_tail(check: &crate::verify::TailCheck) -> String {
    let worst = check
        .t_grid
        .iter()
        .zip(check.empirical.iter().zip(&check.bound))
        .map(|(t, (emp, b))| (t, emp.value - b))
        .fold((0.0f64, f64::NEG_INFINITY), |acc, (t, slack)| {
            if slack > acc.1 {
                (*t, slack)
            } else {
                acc
            }
        });
    format!(
        "{} thresholds, tightest margin {:.5} at t = {}",
        check.t_grid.len(),
        -worst.1,
        worst.0
    )
}

fn default_battery(log: &mut CheckLog, trials: u64, seed: u64) -> Result<(), CliError> {
    let inst = crate::instance::presets::two_by_two();
    let profile = inst.gap_profile();

    let agreement =
        oracle_mc_agreement(&inst, &profile, &[1, 1], trials, splitmix64(seed ^ 1))
            .map_err(verify_to_cli)?;
    log.record(
        "oracle-vs-mc-single-sample",
        agreement.pass,
        format!(
            "exact error {:.6}, mc {:.6} +/- {:.6}",
            agreement.exact_error_prob,
            agreement.mc.error_prob.mean,
            agreement.mc.error_prob.std_error
        ),
    );
    let agreement =
        oracle_mc_agreement(&inst, &profile, &[2, 2], trials, splitmix64(seed ^ 2))
            .map_err(verify_to_cli)?;
    log.record(
        "oracle-vs-mc-two-each",
        agreement.pass,
        format!("exact error {:.6}", agreement.exact_error_prob),
    );

    let grid = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
    let check = tail_check_mcdiarmid(&inst, 0, 1, 20, &grid, trials, splitmix64(seed ^ 3))
        .map_err(verify_to_cli)?;
    log.record("mcdiarmid-tails", check.all_pass(), summarize_tail(&check));

    let check =
        tail_check_bernstein(&inst, 0, 1, &[10, 20], &grid, trials, splitmix64(seed ^ 4))
            .map_err(verify_to_cli)?;
    log.record("bernstein-tails", check.all_pass(), summarize_tail(&check));

    for (i, alloc) in [[10u64, 10], [10, 20]].iter().enumerate() {
        let check = expectation_max_check(
            &inst,
            0,
            alloc,
            trials,
            splitmix64(seed ^ (5 + i as u64)),
        )
        .map_err(verify_to_cli)?;
        log.record(
            &format!("expectation-max-{}-{}", alloc[0], alloc[1]),
            check.pass_hoeffding && check.pass_bernstein,
            format!(
                "estimate {:.5} vs bounds {:.5} / {:.5}",
                check.estimate.value, check.bound_hoeffding, check.bound_bernstein
            ),
        );
    }

    let vq = variance_quantities(&inst, &[10, 20], VarianceMethod::Exact, None)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let crude: f64 = (0..2).map(|q| inst.data_variance(q) / [10.0, 20.0][q]).sum();
    let hierarchy = vq.sigma2_t <= vq.big_sigma2_t.value + 1e-12
        && vq.big_sigma2_t.value <= vq.v_t.value + 1e-12
        && vq.v_t.value <= crude + 1e-12;
    log.record(
        "variance-hierarchy",
        hierarchy,
        format!(
            "sigma2 {:.6} <= Sigma2 {:.6} <= V {:.6} <= crude {:.6}",
            vq.sigma2_t, vq.big_sigma2_t.value, vq.v_t.value, crude
        ),
    );

    // Randomized oracle battery (small instances, exact law within reach).
    let mut gen_stream = substream(splitmix64(seed ^ 100), 0);
    for i in 0..5u64 {
        let rand_inst = random_small_instance(&mut gen_stream);
        let rand_profile = rand_inst.gap_profile();
        let k = rand_inst.n_distributions();
        let alloc = random_small_allocation(&mut gen_stream, k);
        let agreement = oracle_mc_agreement(
            &rand_inst,
            &rand_profile,
            &alloc,
            trials,
            splitmix64(seed ^ (200 + i)),
        )
        .map_err(verify_to_cli)?;
        log.record(
            &format!("oracle-battery-{i}"),
            agreement.pass,
            format!(
                "l={} k={} m={} alloc {:?}",
                rand_inst.n_actions(),
                k,
                rand_inst.support_len(),
                alloc
            ),
        );
    }
    Ok(())
}

// Re-exported for integration tests that need the oracle refusal path.
pub fn oracle_cap_check(inst: &Instance, allocation: &[u64]) -> Result<(), VerifyError> {
    let profile = inst.gap_profile();
    exact_ue_distribution(inst, &profile, allocation, DEFAULT_ENUMERATION_CAP).map(|_| ())
}
