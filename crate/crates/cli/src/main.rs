//! Command-line front end binding the library modules into reproducible
//! batch runs.
//!
//! Every subcommand reads a JSON config file, applies `--set key=value`
//! overrides on dotted paths, resolves the master seed (`--seed`, then the
//! config's `master_seed`, then `CMSTEIN_SEED`), runs the requested
//! operation, and writes a JSON document embedding the resolved config.
//! Errors are printed as structured JSON on stderr and mapped to exit
//! codes: 1 usage, 2 validation/precondition, 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use cmstein::bounds::{theorem1_bound, BoundInputs};
use cmstein::config::{sample_configuration, sample_configuration_with, Configuration};
use cmstein::degseq::{check_conditions, DegreeDistribution, DegreeSequence};
use cmstein::explore::explore_truncated;
use cmstein::mc::{
    run_clt_experiment, sample_mean_var, variance_scaling_study, ExperimentConfig,
};
use cmstein::rng;
use cmstein::stats::{evaluate_statistic, statistic_value, BuiltStatistic, StatisticSpec};
use cmstein::stein::{coupling_draw, estimate_variance_identity};
use cmstein::Error as LibError;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "cmstein", version, about = "Configuration-model statistics toolbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; overrides the config and CMSTEIN_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Dotted-path config override, e.g. --set replications=500. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample a configuration and write it as JSON.
    Sample,
    /// Explore the truncated component of one vertex.
    Explore,
    /// Evaluate a local statistic on a configuration.
    Stat,
    /// Emit coupling records as JSON lines.
    Couple,
    /// Evaluate the Wasserstein error bound.
    Bound,
    /// Variance estimation: coupling identity or scaling study.
    Variance,
    /// Run a CLT experiment; writes JSON plus a CSV of samples.
    Clt,
    /// Check the giant-component conditions for a distribution.
    Conditions,
}

struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            kind: "usage",
            message: message.into(),
            code: EXIT_USAGE,
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            kind: "runtime",
            message: message.into(),
            code: EXIT_RUNTIME,
        }
    }
}

impl From<LibError> for Failure {
    fn from(err: LibError) -> Self {
        let code = match err {
            LibError::OddTotalDegree(_)
            | LibError::EmptySequence
            | LibError::ZeroMeanDegree
            | LibError::InvalidVertex { .. }
            | LibError::PreconditionViolated(_)
            | LibError::EmptySample
            | LibError::InvalidDistribution(_)
            | LibError::InvalidConfiguration(_)
            | LibError::InvalidExperiment(_)
            | LibError::UnknownStatistic(_) => EXIT_VALIDATION,
            LibError::StatisticOutOfBound { .. }
            | LibError::ZeroVariance
            | LibError::DegenerateVariance => EXIT_RUNTIME,
        };
        let kind = if code == EXIT_VALIDATION {
            "validation"
        } else {
            "runtime"
        };
        Failure {
            kind,
            message: err.to_string(),
            code,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if err.use_stderr() {
                report(&Failure::usage(err.to_string()));
                return ExitCode::from(EXIT_USAGE);
            }
            // help/version requests
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
    };
    if let Some(threads) = cli.threads {
        cmstein::exec::init_threads(threads);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            report(&failure);
            ExitCode::from(failure.code)
        }
    }
}

fn report(failure: &Failure) {
    let doc = json!({"error": {"kind": failure.kind, "message": failure.message}});
    eprintln!("{doc}");
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::usage("--config PATH is required"))?;
    let raw = std::fs::read_to_string(config_path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", config_path.display())))?;
    let mut config: Value = serde_json::from_str(&raw)
        .map_err(|e| Failure::usage(format!("config does not parse as JSON: {e}")))?;
    for assignment in &cli.set {
        apply_override(&mut config, assignment)?;
    }
    resolve_seed(&mut config, cli.seed)?;

    match cli.command {
        Command::Sample => cmd_sample(cli, config),
        Command::Explore => cmd_explore(cli, config),
        Command::Stat => cmd_stat(cli, config),
        Command::Couple => cmd_couple(cli, config),
        Command::Bound => cmd_bound(cli, config),
        Command::Variance => cmd_variance(cli, config),
        Command::Clt => cmd_clt(cli, config),
        Command::Conditions => cmd_conditions(cli, config),
    }
}

/// Applies `path.to.key=value`; the value parses as JSON, else as a string.
fn apply_override(config: &mut Value, assignment: &str) -> Result<(), Failure> {
    let (path, value) = assignment
        .split_once('=')
        .ok_or_else(|| Failure::usage(format!("--set wants KEY=VALUE, got {assignment:?}")))?;
    let parsed: Value = serde_json::from_str(value).unwrap_or(Value::String(value.to_string()));
    let mut cursor = config;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        let map = cursor.as_object_mut().ok_or_else(|| {
            Failure::usage(format!(
                "--set path {path:?} crosses a non-object at {segment:?}"
            ))
        })?;
        if i + 1 == segments.len() {
            map.insert((*segment).to_string(), parsed);
            return Ok(());
        }
        cursor = map
            .entry((*segment).to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Seed precedence: --seed, then the config's master_seed, then CMSTEIN_SEED.
fn resolve_seed(config: &mut Value, flag: Option<u64>) -> Result<(), Failure> {
    let resolved = if let Some(seed) = flag {
        Some(seed)
    } else if config.get("master_seed").and_then(Value::as_u64).is_some() {
        None // keep the config value
    } else if let Ok(text) = std::env::var("CMSTEIN_SEED") {
        Some(text.parse::<u64>().map_err(|e| {
            Failure::usage(format!("CMSTEIN_SEED must be an unsigned integer: {e}"))
        })?)
    } else {
        None
    };
    if let Some(seed) = resolved {
        config
            .as_object_mut()
            .ok_or_else(|| Failure::usage("config must be a JSON object"))?
            .insert("master_seed".into(), json!(seed));
    }
    Ok(())
}

fn require_seed(config: &Value) -> Result<u64, Failure> {
    config.get("master_seed").and_then(Value::as_u64).ok_or_else(|| {
        Failure::usage("no master_seed: set it in the config, via --seed, or CMSTEIN_SEED")
    })
}

fn write_output(cli: &Cli, document: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(document)
        .map_err(|e| Failure::runtime(format!("serialising output: {e}")))?;
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::runtime(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_sibling(path: &Path, extension: &str, text: &str) -> Result<(), Failure> {
    let sibling = path.with_extension(extension);
    std::fs::write(&sibling, text)
        .map_err(|e| Failure::runtime(format!("writing {}: {e}", sibling.display())))
}

/// Degree input shared by several subcommands: an inline array, a file of
/// newline-delimited integers, or a distribution plus `n`.
fn degree_sequence_from(config: &Value) -> Result<DegreeSequence, Failure> {
    if let Some(array) = config.get("degrees") {
        let degrees: Vec<usize> = serde_json::from_value(array.clone())
            .map_err(|e| Failure::usage(format!("degrees must be a nonnegative array: {e}")))?;
        return Ok(DegreeSequence::validate(degrees)?);
    }
    if let Some(path) = config.get("degrees_file").and_then(Value::as_str) {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))?;
        return Ok(DegreeSequence::from_text(&text)?);
    }
    if let Some(dist) = config.get("distribution") {
        let pi: DegreeDistribution = serde_json::from_value(dist.clone())
            .map_err(|e| Failure::usage(format!("bad distribution: {e}")))?;
        let n = config
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Failure::usage("distribution input needs \"n\""))?
            as usize;
        let cap = config
            .get("cap")
            .and_then(Value::as_u64)
            .map(|c| c as usize)
            .unwrap_or_else(|| pi.iter().map(|(j, _)| j).max().unwrap_or(1).max(1));
        let seed = require_seed(config)?;
        return Ok(pi.sample_degree_sequence(n, cap, rng::derive_seed(seed, &[0])));
    }
    Err(Failure::usage(
        "config needs \"degrees\", \"degrees_file\", or \"distribution\" + \"n\"",
    ))
}

/// Configuration input: inline `configuration` JSON or degrees plus the seed.
fn configuration_from(config: &Value) -> Result<Configuration, Failure> {
    if let Some(wire) = config.get("configuration") {
        return Ok(Configuration::from_json_value(wire)?);
    }
    let d = degree_sequence_from(config)?;
    let seed = require_seed(config)?;
    Ok(sample_configuration(&d, rng::derive_seed(seed, &[1])))
}

fn statistic_from(config: &Value) -> Result<(StatisticSpec, BuiltStatistic), Failure> {
    let spec_value = config
        .get("statistic")
        .ok_or_else(|| Failure::usage("config needs a \"statistic\" object"))?;
    let spec: StatisticSpec = serde_json::from_value(spec_value.clone())
        .map_err(|e| Failure::usage(format!("bad statistic spec: {e}")))?;
    let built = spec.build()?;
    Ok((spec, built))
}

fn cmd_sample(cli: &Cli, config: Value) -> Result<(), Failure> {
    let d = degree_sequence_from(&config)?;
    let seed = require_seed(&config)?;
    let g = sample_configuration(&d, rng::derive_seed(seed, &[1]));
    let document = json!({
        "config": config,
        "master_seed": seed,
        "result": g.to_json_value(),
    });
    write_output(cli, &document)
}

fn cmd_explore(cli: &Cli, config: Value) -> Result<(), Failure> {
    let g = configuration_from(&config)?;
    let root = config
        .get("root")
        .and_then(Value::as_u64)
        .ok_or_else(|| Failure::usage("explore needs \"root\" (1-based vertex)"))?
        as usize;
    if root == 0 {
        return Err(Failure::usage("vertex labels are 1-based"));
    }
    let ell = config
        .get("ell")
        .and_then(Value::as_u64)
        .ok_or_else(|| Failure::usage("explore needs \"ell\""))? as usize;
    let t = explore_truncated(&g, root - 1, ell)?;
    let document = json!({
        "config": config,
        "result": t.to_json_value(),
    });
    write_output(cli, &document)
}

fn cmd_stat(cli: &Cli, config: Value) -> Result<(), Failure> {
    let g = configuration_from(&config)?;
    let (spec, built) = statistic_from(&config)?;
    let summary = evaluate_statistic(&g, &built)?;
    let document = json!({
        "config": config,
        "result": {
            "statistic": spec,
            "value": summary.value,
            "per_vertex": summary.per_vertex,
        },
    });
    write_output(cli, &document)
}

#[derive(Deserialize)]
struct CoupleConfig {
    master_seed: u64,
    #[serde(default)]
    replications: Option<usize>,
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    vertices: Option<Vec<usize>>,
}

fn cmd_couple(cli: &Cli, config: Value) -> Result<(), Failure> {
    let d = degree_sequence_from(&config)?;
    let (_, built) = statistic_from(&config)?;
    let couple: CoupleConfig = serde_json::from_value(config.clone())
        .map_err(|e| Failure::usage(format!("bad couple config: {e}")))?;
    let replications = couple.replications.unwrap_or(1);
    if replications == 0 {
        return Err(Failure::usage("replications must be positive"));
    }
    let seed = couple.master_seed;

    // Standardising scale: explicit sigma, or a pilot estimate of sd(U).
    let sigma = match couple.sigma {
        Some(s) if s > 0.0 => s,
        Some(_) => return Err(Failure::from(LibError::ZeroVariance)),
        None => {
            let values: Vec<f64> = (0..replications.max(2))
                .map(|r| {
                    let mut stream = rng::stream(seed, &[9, r as u64]);
                    let g = sample_configuration_with(&d, &mut stream);
                    statistic_value(&g, &built)
                })
                .collect::<cmstein::Result<_>>()?;
            let (_, var) = sample_mean_var(&values);
            if var <= 0.0 {
                return Err(Failure::from(LibError::DegenerateVariance));
            }
            var.sqrt()
        }
    };

    let vertices: Vec<usize> = match &couple.vertices {
        Some(list) => {
            if list.iter().any(|&v| v == 0 || v > d.n()) {
                return Err(Failure::usage("vertices are 1-based and must be in range"));
            }
            list.iter().map(|&v| v - 1).collect()
        }
        None => (0..d.n()).collect(),
    };

    let mut lines = String::new();
    for r in 0..replications {
        let mut stream = rng::stream(seed, &[0, r as u64]);
        let g = sample_configuration_with(&d, &mut stream);
        let summary = evaluate_statistic(&g, &built)?;
        for &v in &vertices {
            let mut draw_stream = rng::stream(seed, &[1, r as u64, v as u64]);
            let record = coupling_draw(&g, v, &built, &summary, sigma, &mut draw_stream)?;
            let mut value = record.to_json_value();
            value["replication"] = json!(r);
            lines.push_str(&value.to_string());
            lines.push('\n');
        }
    }
    match &cli.out {
        Some(path) => std::fs::write(path, lines)
            .map_err(|e| Failure::runtime(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{lines}");
            Ok(())
        }
    }
}

fn cmd_bound(cli: &Cli, config: Value) -> Result<(), Failure> {
    #[derive(Deserialize)]
    struct BoundConfig {
        sup_norm: f64,
        d_max: usize,
        ell: usize,
        n: usize,
        m: usize,
        #[serde(default)]
        sigma: Option<f64>,
        #[serde(default)]
        sigma2: Option<f64>,
    }
    let parsed: BoundConfig = serde_json::from_value(config.clone())
        .map_err(|e| Failure::usage(format!("bad bound config: {e}")))?;
    let sigma = match (parsed.sigma, parsed.sigma2) {
        (Some(s), _) => s,
        (None, Some(s2)) => s2.sqrt(),
        (None, None) => return Err(Failure::usage("bound needs \"sigma\" or \"sigma2\"")),
    };
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Failure::from(LibError::ZeroVariance));
    }
    let report = theorem1_bound(&BoundInputs {
        sup_norm: parsed.sup_norm,
        d_max: parsed.d_max,
        ell: parsed.ell,
        n: parsed.n,
        m: parsed.m,
        sigma,
    });
    let document = json!({
        "config": config,
        "result": report,
    });
    write_output(cli, &document)
}

fn cmd_variance(cli: &Cli, config: Value) -> Result<(), Failure> {
    let kind = config
        .get("kind")
        .and_then(Value::as_str)
        .unwrap_or("identity");
    match kind {
        "identity" => {
            let d = degree_sequence_from(&config)?;
            let (_, built) = statistic_from(&config)?;
            let replications = config
                .get("replications")
                .and_then(Value::as_u64)
                .ok_or_else(|| Failure::usage("variance identity needs \"replications\""))?
                as usize;
            if replications < 2 {
                return Err(Failure::usage("replications must be at least 2"));
            }
            let seed = require_seed(&config)?;
            let (sigma2_hat, std_error) =
                estimate_variance_identity(&d, &built, replications, seed)?;
            let document = json!({
                "config": config,
                "result": {"sigma2_hat": sigma2_hat, "std_error": std_error},
            });
            write_output(cli, &document)
        }
        "scaling" => {
            let experiment: ExperimentConfig = serde_json::from_value(config.clone())
                .map_err(|e| Failure::usage(format!("bad experiment config: {e}")))?;
            let study = variance_scaling_study(&experiment)?;
            let document = json!({
                "config": config,
                "result": study,
            });
            write_output(cli, &document)
        }
        other => Err(Failure::usage(format!(
            "variance \"kind\" must be \"identity\" or \"scaling\", got {other:?}"
        ))),
    }
}

fn cmd_clt(cli: &Cli, config: Value) -> Result<(), Failure> {
    let experiment: ExperimentConfig = serde_json::from_value(config)
        .map_err(|e| Failure::usage(format!("bad experiment config: {e}")))?;
    let result = run_clt_experiment(&experiment)?;
    let document = serde_json::to_value(&result)
        .map_err(|e| Failure::runtime(format!("serialising result: {e}")))?;
    write_output(cli, &document)?;
    if let Some(path) = &cli.out {
        write_sibling(path, "csv", &result.to_csv())?;
    }
    Ok(())
}

fn cmd_conditions(cli: &Cli, config: Value) -> Result<(), Failure> {
    let pi: DegreeDistribution = serde_json::from_value(
        config
            .get("distribution")
            .cloned()
            .ok_or_else(|| Failure::usage("conditions needs \"distribution\""))?,
    )
    .map_err(|e| Failure::usage(format!("bad distribution: {e}")))?;
    let n_grid: Vec<usize> = serde_json::from_value(
        config
            .get("n_grid")
            .cloned()
            .ok_or_else(|| Failure::usage("conditions needs \"n_grid\""))?,
    )
    .map_err(|e| Failure::usage(format!("bad n_grid: {e}")))?;
    if n_grid.len() < 2 {
        return Err(Failure::usage("n_grid needs at least two sizes"));
    }
    let cap = config
        .get("cap")
        .and_then(Value::as_u64)
        .map(|c| c as usize)
        .unwrap_or_else(|| pi.iter().map(|(j, _)| j).max().unwrap_or(1).max(1));
    let seed = require_seed(&config)?;
    let family: Vec<DegreeSequence> = n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| pi.sample_degree_sequence(n, cap, rng::derive_seed(seed, &[i as u64])))
        .collect();
    let report = check_conditions(&pi, &family);
    let document = json!({
        "config": config,
        "result": report,
    });
    write_output(cli, &document)
}
