//! Command-line frontend for `cavity-core`.
//!
//! Exit status is 0 on success, 1 on usage or input errors and 2 when a
//! certification or identity check fails. Oracle caps may be overridden by
//! `CAVITY_ORACLE_CAP` and `CAVITY_COLOR_CAP`; a `--cap` flag wins over both.

pub mod experiment;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use cavity_core::analytic::{
    bezakova_bound, color_limit, energy_shift, ind_limit, kelly_marginals, lambda_threshold, solve_fixed_point,
    DEFAULT_TOLERANCE,
};
use cavity_core::graph::{generate, parse_graph, write_graph};
use cavity_core::oracle::{
    count_proper_colorings, independence_polynomial, verify_cavity_identity, verify_color_identity,
};
use cavity_core::tree::{decay_csv, decay_experiment, DecayModel};
use cavity_core::verifier::{taylor_certify, CertificationReport};
use cavity_core::{
    count_colorings, count_independent_sets, rewire_count_demo, Activity, CountEstimate, CountOptions, Graph,
    GraphKind, GridSpec, Method, Model, OracleConfig, VerifierError,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use experiment::{experiment_csv, experiment_random_regular, ExperimentConfig, ExperimentModel, Mode};
use output::{sig12, to_json};

pub const ENV_ORACLE_CAP: &str = "CAVITY_ORACLE_CAP";
pub const ENV_COLOR_CAP: &str = "CAVITY_COLOR_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAILED_CHECK: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cavity", version, about = "Correlation-decay counting on large-girth graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate ln Z for the hard-core model.
    CountInd {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "1")]
        lambda: f64,
        #[arg(long, default_value = "0.1")]
        epsilon: f64,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Approximate ln of the number of proper q-colorings.
    CountColor {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        q: usize,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Exact partition function by enumeration.
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Activity as an integer, decimal or p/q.
        #[arg(long, conflicts_with = "q")]
        lambda: Option<String>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        cap: Option<usize>,
        /// Also check the telescoping identity along the elimination order.
        #[arg(long)]
        check_identity: bool,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Closed-form limits for regular graphs of large girth.
    Analytic {
        #[arg(value_enum)]
        quantity: Quantity,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value = "1")]
        lambda: f64,
        #[arg(long)]
        q: Option<usize>,
    },
    /// Grid maximum and Lipschitz certificate for the contraction gradient.
    VerifyContraction {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "0.001")]
        resolution: f64,
        #[arg(long, default_value = "0.9")]
        target: f64,
    },
    /// Generate a graph in the edge-list format.
    Gen {
        /// Generator spec such as cycle:60 or random-regular:20:3:7.
        #[arg(long = "gen")]
        spec: String,
    },
    /// Rewire a regular graph towards a target girth, tracking the shift in Z.
    RewireDemo {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "1")]
        lambda: f64,
        #[arg(long)]
        girth: usize,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Boundary influence on the depth-t ball of the r-regular tree (CSV).
    Decay {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, conflicts_with = "q")]
        lambda: Option<f64>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, default_value = "32")]
        samples: usize,
        #[arg(long, default_value = "0")]
        seed: u64,
    },
    /// Per-node free energy of random regular graphs against the limit (CSV).
    ExperimentRandomRegular {
        #[arg(long)]
        r: usize,
        #[arg(long, conflicts_with = "q")]
        lambda: Option<String>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value = "20")]
        reps: usize,
        #[arg(long, default_value = "0")]
        seed: u64,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        #[arg(long, default_value = "0.1")]
        epsilon: f64,
        #[arg(long)]
        cap: Option<usize>,
    },
}

/// Exactly one of a graph file or a generator spec.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    #[arg(long)]
    input: Option<std::path::PathBuf>,
    #[arg(long = "gen")]
    generator: Option<String>,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    /// Elimination order: comma-separated node ids, `identity`, `reverse` or `random`.
    #[arg(long)]
    order: Option<String>,
    /// Seed for `--order random`.
    #[arg(long, default_value = "0")]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Cavity,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Threshold,
    FixedPoint,
    IndLimit,
    ColorLimit,
    Kelly,
    EnergyShift,
    Bezakova,
}

/// Outcome of a subcommand: text for stdout and whether its check passed.
struct Outcome {
    stdout: String,
    passed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, passed: true }
    }
}

type CmdResult = Result<Outcome, String>;

/// Parses `args` (including the program name), runs the subcommand and
/// writes its output. Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, stderr) {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            if out.passed {
                EXIT_OK
            } else {
                EXIT_FAILED_CHECK
            }
        }
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn dispatch(command: Command, stderr: &mut dyn Write) -> CmdResult {
    match command {
        Command::CountInd { input, lambda, epsilon, order, cap, format } => {
            let g = load_graph(&input)?;
            let order = resolve_order(&order, g.node_count())?;
            let opts = CountOptions { oracle: oracle_config(cap, None)? };
            let est = count_independent_sets(&g, epsilon, lambda, order.as_deref(), &opts).map_err(err)?;
            if let Some(w) = &est.warning {
                let _ = writeln!(stderr, "warning: {w}");
            }
            Ok(Outcome::ok(render_estimate(&est, format)))
        }
        Command::CountColor { input, q, order, format } => {
            let g = load_graph(&input)?;
            let order = resolve_order(&order, g.node_count())?;
            let est = count_colorings(&g, q, order.as_deref()).map_err(err)?;
            Ok(Outcome::ok(render_estimate(&est, format)))
        }
        Command::Oracle { input, lambda, q, cap, check_identity, order, format } => {
            let g = load_graph(&input)?;
            let order = resolve_order(&order, g.node_count())?;
            oracle_command(&g, lambda, q, cap, check_identity, order, format)
        }
        Command::Analytic { quantity, r, lambda, q } => analytic_command(quantity, r, lambda, q),
        Command::VerifyContraction { k, resolution, target } => verify_contraction(k, resolution, target),
        Command::Gen { spec } => {
            let kind: GraphKind = spec.parse().map_err(err)?;
            Ok(Outcome::ok(write_graph(&generate(&kind).map_err(err)?)))
        }
        Command::RewireDemo { input, lambda, girth, cap } => {
            let g = load_graph(&input)?;
            let report = rewire_count_demo(&g, lambda, girth, &oracle_config(cap, None)?).map_err(err)?;
            Ok(Outcome::ok(to_json(&rounded_rewire(report)) + "\n"))
        }
        Command::Decay { r, depth, lambda, q, samples, seed } => {
            let model = match (lambda, q) {
                (_, Some(q)) => DecayModel::Coloring { q },
                (lambda, None) => DecayModel::Independent { lambda: lambda.unwrap_or(1.0) },
            };
            let rows = decay_experiment(r, depth, model, samples, seed).map_err(err)?;
            Ok(Outcome::ok(decay_csv(&rows)))
        }
        Command::ExperimentRandomRegular { r, lambda, q, n_min, n_max, reps, seed, mode, epsilon, cap } => {
            let model = match (lambda, q) {
                (_, Some(q)) => ExperimentModel::Coloring(q),
                (lambda, None) => ExperimentModel::Independent(parse_activity(lambda.as_deref().unwrap_or("1"))?),
            };
            let oracle = match model {
                ExperimentModel::Coloring(_) => oracle_config(None, cap)?,
                ExperimentModel::Independent(_) => oracle_config(cap, None)?,
            };
            let mode = match mode {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Cavity => Mode::Cavity,
                ModeArg::Auto => Mode::Auto,
            };
            let cfg = ExperimentConfig { r, model, n_min, n_max, reps, seed, mode, epsilon, oracle };
            Ok(Outcome::ok(experiment_csv(&experiment_random_regular(&cfg).map_err(err)?)))
        }
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn load_graph(input: &Input) -> Result<Graph, String> {
    match (&input.input, &input.generator) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_graph(&text).map_err(err)
        }
        (None, Some(spec)) => generate(&spec.parse::<GraphKind>().map_err(err)?).map_err(err),
        _ => Err("give exactly one of --input and --gen".into()),
    }
}

fn resolve_order(args: &OrderArgs, n: usize) -> Result<Option<Vec<usize>>, String> {
    let Some(spec) = args.order.as_deref() else { return Ok(None) };
    Ok(Some(match spec {
        "identity" => (0..n).collect(),
        "reverse" => (0..n).rev().collect(),
        "random" => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(args.seed));
            order
        }
        list => list
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad node id '{s}' in --order")))
            .collect::<Result<_, _>>()?,
    }))
}

fn parse_activity(s: &str) -> Result<Activity, String> {
    s.parse::<Activity>().map_err(|e| format!("bad activity '{s}': {e}"))
}

fn env_cap(name: &str) -> Result<Option<usize>, String> {
    match std::env::var(name) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("{name}={v} is not a node count")),
        Err(_) => Ok(None),
    }
}

/// Flag, then environment, then library default.
fn oracle_config(ind_cap: Option<usize>, color_cap: Option<usize>) -> Result<OracleConfig, String> {
    let mut cfg = OracleConfig::default();
    if let Some(cap) = ind_cap.or(env_cap(ENV_ORACLE_CAP)?) {
        cfg.ind_cap = cap;
    }
    if let Some(cap) = color_cap.or(env_cap(ENV_COLOR_CAP)?) {
        cfg.color_cap = cap;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct EstimateJson {
    n: usize,
    girth: Option<usize>,
    method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    log_z: f64,
    log_z_per_node: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    certified_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certified_hi: Option<f64>,
    epsilon: Option<f64>,
    depth: Option<usize>,
}

fn render_estimate(est: &CountEstimate, format: Format) -> String {
    let (lambda, q) = match est.model {
        Model::Lambda(l) => (Some(sig12(l)), None),
        Model::Q(q) => (None, Some(q)),
    };
    let json = EstimateJson {
        n: est.n,
        girth: est.girth,
        method: est.method,
        lambda,
        q,
        log_z: sig12(est.log_z),
        log_z_per_node: sig12(est.log_z_per_node()),
        certified_lo: est.certified.map(|c| sig12(c.0)),
        certified_hi: est.certified.map(|c| sig12(c.1)),
        epsilon: est.epsilon.map(sig12),
        depth: est.depth,
    };
    match format {
        Format::Json => to_json(&json) + "\n",
        Format::Text => {
            let mut s = format!(
                "n = {}\ngirth = {}\nmethod = {}\nln Z = {}\nln Z / n = {}\n",
                json.n,
                json.girth.map_or("inf".into(), |g| g.to_string()),
                to_json(&json.method).trim_matches('"'),
                json.log_z,
                json.log_z_per_node
            );
            if let (Some(lo), Some(hi)) = (json.certified_lo, json.certified_hi) {
                s.push_str(&format!("certified = [{lo}, {hi}]\n"));
            }
            s
        }
    }
}

#[derive(Serialize)]
struct OracleJson {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    /// Exact value as an integer or `p/q` when available.
    value: String,
    exact: bool,
    log_z: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    identity_holds: Option<bool>,
}

fn oracle_command(
    g: &Graph,
    lambda: Option<String>,
    q: Option<usize>,
    cap: Option<usize>,
    check_identity: bool,
    order: Option<Vec<usize>>,
    format: Format,
) -> CmdResult {
    let (json, holds) = match q {
        Some(q) => {
            let cfg = oracle_config(None, cap)?;
            let res = count_proper_colorings(g, q, &cfg).map_err(err)?;
            let holds = check_identity
                .then(|| verify_color_identity(g, q, order.as_deref(), &cfg).map(|r| r.holds))
                .transpose()
                .map_err(err)?;
            let v = &res.value;
            (OracleJson { n: g.node_count(), lambda: None, q: Some(q), value: v.to_string(), exact: v.is_exact(), log_z: sig12(v.ln()), identity_holds: holds }, holds)
        }
        None => {
            let activity = parse_activity(lambda.as_deref().unwrap_or("1"))?;
            let cfg = oracle_config(cap, None)?;
            let res = independence_polynomial(g, &activity, &cfg).map_err(err)?;
            let holds = check_identity
                .then(|| verify_cavity_identity(g, &activity, order.as_deref(), &cfg).map(|r| r.holds))
                .transpose()
                .map_err(err)?;
            let v = &res.value;
            let lambda = Some(activity.to_string());
            (OracleJson { n: g.node_count(), lambda, q: None, value: v.to_string(), exact: v.is_exact(), log_z: sig12(v.ln()), identity_holds: holds }, holds)
        }
    };
    let stdout = match format {
        Format::Json => to_json(&json) + "\n",
        Format::Text => format!("Z = {}\nln Z = {}\n", json.value, json.log_z),
    };
    Ok(Outcome { stdout, passed: holds != Some(false) })
}

#[derive(Serialize)]
struct AnalyticJson {
    quantity: &'static str,
    r: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    /// `null` for an infinite threshold.
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value_secondary: Option<f64>,
}

fn analytic_command(quantity: Quantity, r: usize, lambda: f64, q: Option<usize>) -> CmdResult {
    let need_q = || q.ok_or_else(|| "this quantity needs --q".to_string());
    let (name, value, secondary, uses_lambda) = match quantity {
        Quantity::Threshold => ("threshold", lambda_threshold(r).map_err(err)?.as_f64(), None, false),
        Quantity::FixedPoint => {
            ("fixed_point", solve_fixed_point(r, lambda, DEFAULT_TOLERANCE).map_err(err)?.x, None, true)
        }
        Quantity::IndLimit => ("ind_limit", ind_limit(r, lambda).map_err(err)?, None, true),
        Quantity::ColorLimit => ("color_limit", color_limit(need_q()?, r).map_err(err)?, None, false),
        Quantity::Kelly => {
            let (a, b) = kelly_marginals(r, lambda).map_err(err)?;
            ("kelly_marginals", a, Some(b), true)
        }
        Quantity::EnergyShift => ("energy_shift", energy_shift(r, lambda).map_err(err)?, None, true),
        Quantity::Bezakova => ("bezakova_bound", bezakova_bound(need_q()?, r).map_err(err)?, None, false),
    };
    let json = AnalyticJson {
        quantity: name,
        r,
        lambda: uses_lambda.then(|| sig12(lambda)),
        q: if uses_lambda { None } else { q },
        value: value.is_finite().then(|| sig12(value)),
        value_secondary: secondary.map(sig12),
    };
    Ok(Outcome::ok(to_json(&json) + "\n"))
}

#[derive(Serialize)]
struct ContractionJson {
    k: usize,
    resolution: f64,
    grid_max: String,
    certified_bound: f64,
    certified: bool,
}

fn verify_contraction(k: usize, resolution: f64, target: f64) -> CmdResult {
    let den = (1.0 / resolution).round();
    if !(resolution > 0.0) || den < 1.0 || (den * resolution - 1.0).abs() > 1e-9 {
        return Err(format!("resolution {resolution} is not the reciprocal of a positive integer"));
    }
    let spec = GridSpec::new(k).with_resolution(den as u64);
    let report: CertificationReport = match taylor_certify(&spec, target) {
        Ok(report) => report,
        Err(VerifierError::CertificationFailed { report, .. }) => *report,
        Err(e) => return Err(e.to_string()),
    };
    let json = ContractionJson {
        k,
        resolution: sig12(1.0 / report.resolution_den as f64),
        grid_max: report.grid_max.clone(),
        certified_bound: sig12(report.certified_bound),
        certified: report.certified,
    };
    Ok(Outcome { stdout: to_json(&json) + "\n", passed: report.certified })
}

fn rounded_rewire(mut report: cavity_core::RewireReport) -> cavity_core::RewireReport {
    report.lambda = sig12(report.lambda);
    report.accumulated_shift = sig12(report.accumulated_shift);
    report.limit_shift = report.limit_shift.map(sig12);
    for s in &mut report.steps {
        s.measured = s.measured.map(sig12);
        s.predicted = s.predicted.map(sig12);
    }
    report
}
