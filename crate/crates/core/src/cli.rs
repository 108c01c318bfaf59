//! Command-line front end: calculators, simulations, sweeps and oracles.
//!
//! Every command renders a JSON report `{inputs, analytic, empirical, meta}`
//! or a CSV table. Errors map to stable exit codes, see [`exit_code`].

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::combinatorics::log_binomial;
use crate::error::Error;
use crate::pair_stats::{
    default_joint_b, estimate_from_records, fixed_size_oracle, law_from_records, run_trials,
    EmpiricalLaw, IndependentEnumeration, OracleResult, DEFAULT_BOOTSTRAP, JOINT_B_CAP,
};
use crate::sampler::{sample_family, ModelConfig};
use crate::stein_chen::{epsilon_multivariate, tv_bound_univariate};
use crate::thresholds::{classical_comparison, janson_bounds, threshold, JansonReport};

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 42;
pub const OUTPUT_DIR_ENV: &str = "EKR_OUTPUT_DIR";

pub const SWEEP_COLUMNS: &str =
    "n,k,r,t,p,A,trials,estimate,ci_low,ci_high,janson_lo,janson_hi,limit_eA2";
pub const HISTOGRAM_COLUMNS: &str = "r,x,count,prob";

#[derive(Debug, Parser)]
#[command(name = "ekr", version, about = "Random intersecting families of k-sets: thresholds, bounds and simulation")]
pub struct Cli {
    /// Directory for relative `--output` paths.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Threshold family size t0 for an r-overlapping pair.
    Threshold(ThresholdArgs),
    /// Janson and Poisson-approximation bounds at inclusion probability p.
    Bounds(BoundsArgs),
    /// Monte Carlo estimate of P(X_r = 0), optionally with empirical laws.
    Simulate(SimulateArgs),
    /// P(X_r = 0) across a grid of A = t/t0 or of family sizes.
    Sweep(SweepArgs),
    /// Exact laws by exhaustive enumeration on tiny instances.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Fixed,
    Independent,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub k: u64,
    #[arg(long, default_value_t = 0)]
    pub r: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub k: u64,
    /// Single overlap size; defaults to 0.
    #[arg(long, conflicts_with = "b")]
    pub r: Option<u64>,
    /// Joint law of overlap sizes 0..=b.
    #[arg(long)]
    pub b: Option<u64>,
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "size", required = true, multiple = false, args = ["t", "p", "a"])]
pub struct SizeArgs {
    /// Fixed family size.
    #[arg(long)]
    pub t: Option<u64>,
    /// Inclusion probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Size as a multiple of t0: t = max(2, round(A t0)).
    #[arg(long = "A", visible_alias = "a")]
    pub a: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[command(flatten)]
    pub size: SizeArgs,
    /// Sampling model for `--A`; `--t` implies fixed and `--p` independent.
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[command(flatten)]
    pub run: RunArgs,
    /// Also report empirical laws of X_0..=X_{r_max}.
    #[arg(long)]
    pub r_max: Option<usize>,
    /// Overlap sizes 0..=b in the joint histogram (default min(r_max, admissible b, 4)).
    #[arg(long)]
    pub joint_b: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    /// Write the family of trial 0 as text.
    #[arg(long)]
    pub family_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "grid", required = true, multiple = false, args = ["a_grid", "t_grid"])]
pub struct GridArgs {
    /// Comma-separated values of A.
    #[arg(long, value_delimiter = ',')]
    pub a_grid: Vec<f64>,
    /// Comma-separated family sizes.
    #[arg(long, value_delimiter = ',')]
    pub t_grid: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Model::Fixed)]
    pub model: Model,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
#[group(id = "oracle_size", required = true, multiple = false, args = ["t", "p"])]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    /// `null` for deterministic commands.
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub inputs: Value,
    pub analytic: Value,
    pub empirical: Value,
    pub meta: Meta,
}

impl Report {
    fn new(inputs: Value, analytic: Value, empirical: Value, run: Option<&RunArgs>) -> Self {
        Self {
            inputs,
            analytic,
            empirical,
            meta: Meta {
                seed: run.map(|r| r.seed),
                trials: run.map(|r| r.trials),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub t: f64,
    pub p: f64,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub janson_lo: Option<f64>,
    pub janson_hi: Option<f64>,
    #[serde(rename = "limit_eA2")]
    pub limit_ea2: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

/// 2 domain or usage, 3 infeasible, 4 saturation, 5 capacity, 1 I/O.
pub fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Core(Error::Domain(_) | Error::Range(_) | Error::Parse(_)) | CliError::Usage(_) => 2,
        CliError::Core(Error::Infeasible { .. }) => 3,
        CliError::Core(Error::Saturation { .. }) => 4,
        CliError::Core(Error::Capacity(_)) => 5,
        CliError::Io { .. } => 1,
    }
}

/// Parses `args`, runs the command and writes its output; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (text, out) = render(&cli.command)?;
    match &out.output {
        Some(path) => {
            let path = resolve_output(path, cli.output_dir.as_deref());
            write_file(&path, &text)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Relative paths land under `dir` when one is configured.
pub fn resolve_output(path: &Path, dir: Option<&Path>) -> PathBuf {
    match dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

/// Output text for a command plus where it should go.
pub fn render(command: &Command) -> Result<(String, &OutputArgs), CliError> {
    match command {
        Command::Threshold(a) => Ok((cmd_threshold(a)?, &a.out)),
        Command::Bounds(a) => Ok((cmd_bounds(a)?, &a.out)),
        Command::Simulate(a) => Ok((cmd_simulate(a)?, &a.out)),
        Command::Sweep(a) => Ok((cmd_sweep(a)?, &a.out)),
        Command::Oracle(a) => Ok((cmd_oracle(a)?, &a.out)),
    }
}

fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Plain decimals for moderate magnitudes, exponent form otherwise.
pub fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn cmd_threshold(a: &ThresholdArgs) -> Result<String, CliError> {
    let rep = threshold(a.n, a.k, a.r)?;
    let comparison = classical_comparison(a.n, a.k)
        .ok()
        .filter(|c| c.near_three_fifths());
    match a.out.format.unwrap_or(Format::Json) {
        Format::Json => Ok(to_json(&Report::new(
            json!({ "n": a.n, "k": a.k, "r": a.r }),
            json!({ "threshold": rep, "classical_comparison": comparison }),
            Value::Null,
            None,
        ))),
        Format::Csv => Ok(format!(
            "n,k,r,t0_exact,t0_convenient,validity_upper,k_over_sqrt_n,k_over_n_two_thirds\n{},{},{},{},{},{},{},{}\n",
            rep.n,
            rep.k,
            rep.r,
            num(rep.t0_exact),
            opt(rep.t0_convenient),
            num(rep.validity_upper),
            num(rep.k_over_sqrt_n),
            num(rep.k_over_n_two_thirds)
        )),
    }
}

fn janson_or_trivial(n: u64, k: u64, r: u64, p: f64) -> Result<Option<JansonReport>, Error> {
    if p == 0.0 {
        // Validate the instance even though the answer is trivial.
        threshold_domain(n, k, r)?;
        return Ok(Some(JansonReport::trivial(n, k, r)));
    }
    if p == 1.0 {
        return Ok(None);
    }
    janson_bounds(n, k, r, p).map(Some)
}

fn threshold_domain(n: u64, k: u64, r: u64) -> Result<(), Error> {
    if 2 * k > n || r > k {
        return Err(Error::Domain(format!(
            "need 2k <= n and r <= k, got n={n}, k={k}, r={r}"
        )));
    }
    Ok(())
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<String, CliError> {
    let (janson, bound) = match a.b {
        Some(b) => (
            janson_or_trivial(a.n, a.k, 0, a.p)?,
            epsilon_multivariate(a.n, a.k, b, a.p)?,
        ),
        None => {
            let r = a.r.unwrap_or(0);
            (
                janson_or_trivial(a.n, a.k, r, a.p)?,
                tv_bound_univariate(a.n, a.k, r, a.p)?,
            )
        }
    };
    match a.out.format.unwrap_or(Format::Json) {
        Format::Json => Ok(to_json(&Report::new(
            json!({ "n": a.n, "k": a.k, "r": a.r, "b": a.b, "p": a.p }),
            json!({ "janson": janson, "poisson_bound": bound }),
            Value::Null,
            None,
        ))),
        Format::Csv => {
            let (scope, index) = match a.b {
                Some(b) => ("joint", b),
                None => ("overlap", a.r.unwrap_or(0)),
            };
            Ok(format!(
                "n,k,scope,index,p,mu,janson_lo,janson_hi,tv_bound,condition_ratio,applicable\n{},{},{scope},{index},{},{},{},{},{},{},{}\n",
                a.n,
                a.k,
                num(a.p),
                opt(janson.as_ref().map(|j| j.mu)),
                opt(janson.as_ref().map(|j| j.lower_bound)),
                opt(janson.as_ref().map(|j| j.upper_bound)),
                num(bound.tv_bound),
                num(bound.condition_ratio),
                bound.applicable
            ))
        }
    }
}

/// Requested and realized sizes for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeChoice {
    pub model: Model,
    pub t: Option<u64>,
    pub p: Option<f64>,
    pub requested_a: Option<f64>,
    /// `t / t0_exact` after rounding.
    pub realized_a: Option<f64>,
}

/// `t = max(2, round(A t0))` and the matching `p = t / C(n,k)`.
pub fn size_from_a(n: usize, k: usize, r: usize, a: f64) -> Result<(u64, f64, f64), Error> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::Domain(format!("A must be finite and non-negative, got {a}")));
    }
    let t0 = threshold(n as u64, k as u64, r as u64)?.t0_exact;
    let t = ((a * t0).round() as u64).max(2);
    let p = ((t as f64).ln() - log_binomial(n as u64, k as u64)?).exp();
    Ok((t, p, t as f64 / t0))
}

fn model_config(
    n: usize,
    k: usize,
    r: usize,
    size: &SizeArgs,
    model: Option<Model>,
    seed: u64,
) -> Result<(ModelConfig, SizeChoice), CliError> {
    let (cfg, choice) = match (size.t, size.p, size.a) {
        (Some(t), None, None) => {
            if model == Some(Model::Independent) {
                return Err(CliError::Usage("--t selects the fixed-size model".into()));
            }
            (
                ModelConfig::fixed(n, k, t, seed),
                SizeChoice { model: Model::Fixed, t: Some(t), p: None, requested_a: None, realized_a: None },
            )
        }
        (None, Some(p), None) => {
            if model == Some(Model::Fixed) {
                return Err(CliError::Usage("--p selects the independent model".into()));
            }
            (
                ModelConfig::independent(n, k, p, seed),
                SizeChoice { model: Model::Independent, t: None, p: Some(p), requested_a: None, realized_a: None },
            )
        }
        (None, None, Some(a)) => {
            let (t, p, realized) = size_from_a(n, k, r, a)?;
            let model = model.unwrap_or(Model::Fixed);
            let cfg = match model {
                Model::Fixed => ModelConfig::fixed(n, k, t, seed),
                Model::Independent => ModelConfig::independent(n, k, p, seed),
            };
            (
                cfg,
                SizeChoice { model, t: Some(t), p: Some(p), requested_a: Some(a), realized_a: Some(realized) },
            )
        }
        _ => return Err(CliError::Usage("give exactly one of --t, --p, --A".into())),
    };
    cfg.validate()?;
    Ok((cfg, choice))
}

fn check_trials(trials: u64) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<String, CliError> {
    check_trials(a.run.trials)?;
    if a.r > a.k {
        return Err(Error::Domain(format!("r={} exceeds k={}", a.r, a.k)).into());
    }
    let (cfg, choice) = model_config(a.n, a.k, a.r, &a.size, a.model, a.run.seed)?;
    let format = a.out.format.unwrap_or(Format::Json);
    if let Some(path) = &a.family_out {
        write_file(path, &sample_family(&cfg.for_trial(0))?.to_text())?;
    }
    let records = run_trials(&cfg, a.run.trials, a.run.threads)?;
    let ekr = estimate_from_records(&cfg, a.r, &records)?;
    // CSV output is the histogram, so it always needs the laws.
    let r_max = a.r_max.or((format == Format::Csv).then_some(a.r));
    let law = match r_max {
        Some(r_max) => {
            let b = match a.joint_b {
                Some(b) if b > r_max.min(JOINT_B_CAP) => {
                    return Err(CliError::Usage(format!(
                        "--joint-b must not exceed min(r_max, {JOINT_B_CAP})"
                    )))
                }
                Some(b) => b,
                None => default_joint_b(a.n, a.k, r_max),
            };
            Some(law_from_records(&cfg, &records, r_max, b, a.bootstrap)?)
        }
        None => None,
    };
    match format {
        Format::Json => Ok(to_json(&Report::new(
            json!({
                "n": a.n, "k": a.k, "r": a.r,
                "size": choice,
                "model": cfg,
                "r_max": r_max,
                "joint_b": law.as_ref().map(|l| l.joint.b),
                "bootstrap": law.as_ref().map(|_| a.bootstrap),
            }),
            value(&ekr.comparison),
            json!({
                "estimate": ekr.estimate,
                "mean_family_size": ekr.mean_family_size,
                "law": law,
            }),
            Some(&a.run),
        ))),
        Format::Csv => Ok(histogram_csv(law.as_ref().expect("csv computes laws"))),
    }
}

/// One row per observed value of each tracked `X_r`.
pub fn histogram_csv(law: &EmpiricalLaw) -> String {
    let mut out = format!("{HISTOGRAM_COLUMNS}\n");
    for m in &law.marginals {
        for (x, &c) in m.histogram.iter().enumerate() {
            let _ = writeln!(out, "{},{x},{c},{}", m.r, num(c as f64 / law.trials as f64));
        }
    }
    out
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<String, CliError> {
    check_trials(a.run.trials)?;
    if a.r > a.k {
        return Err(Error::Domain(format!("r={} exceeds k={}", a.r, a.k)).into());
    }
    let sizes: Vec<SizeArgs> = if !a.grid.a_grid.is_empty() {
        a.grid
            .a_grid
            .iter()
            .map(|&v| SizeArgs { t: None, p: None, a: Some(v) })
            .collect()
    } else {
        let ln_total = log_binomial(a.n as u64, a.k as u64)?;
        a.grid
            .t_grid
            .iter()
            .map(|&t| match a.model {
                Model::Fixed => SizeArgs { t: Some(t), p: None, a: None },
                Model::Independent => SizeArgs {
                    t: None,
                    p: Some(((t as f64).ln() - ln_total).exp()),
                    a: None,
                },
            })
            .collect()
    };
    let mut rows = Vec::with_capacity(sizes.len());
    for size in &sizes {
        let (cfg, _) = model_config(a.n, a.k, a.r, size, Some(a.model), a.run.seed)?;
        let records = run_trials(&cfg, a.run.trials, a.run.threads)?;
        let ekr = estimate_from_records(&cfg, a.r, &records)?;
        let c = &ekr.comparison;
        rows.push(SweepRow {
            n: a.n,
            k: a.k,
            r: a.r,
            t: c.t_equivalent,
            p: c.p_equivalent,
            a: c.a_ratio,
            trials: a.run.trials,
            estimate: ekr.estimate.estimate,
            ci_low: ekr.estimate.ci_low,
            ci_high: ekr.estimate.ci_high,
            janson_lo: c.janson.as_ref().map(|j| j.lower_bound),
            janson_hi: c.janson.as_ref().map(|j| j.upper_bound),
            limit_ea2: c.limit_probability,
        });
    }
    match a.out.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(sweep_csv(&rows)),
        Format::Json => Ok(to_json(&Report::new(
            json!({
                "n": a.n, "k": a.k, "r": a.r, "model": a.model,
                "a_grid": a.grid.a_grid, "t_grid": a.grid.t_grid,
            }),
            Value::Null,
            value(&rows),
            Some(&a.run),
        ))),
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_COLUMNS}\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.n,
            row.k,
            row.r,
            num(row.t),
            num(row.p),
            opt(row.a),
            row.trials,
            num(row.estimate),
            num(row.ci_low),
            num(row.ci_high),
            opt(row.janson_lo),
            opt(row.janson_hi),
            opt(row.limit_ea2)
        );
    }
    out
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<String, CliError> {
    let result: OracleResult = match (a.t, a.p) {
        (Some(t), None) => fixed_size_oracle(a.n, a.k, t)?,
        (None, Some(p)) => IndependentEnumeration::new(a.n, a.k)?.evaluate(p)?,
        _ => return Err(CliError::Usage("give exactly one of --t, --p".into())),
    };
    match a.out.format.unwrap_or(Format::Json) {
        Format::Json => Ok(to_json(&Report::new(
            json!({ "n": a.n, "k": a.k, "model": result.model }),
            value(&result),
            Value::Null,
            None,
        ))),
        Format::Csv => {
            // Exact marginals; `count` is the number of families in fixed-size mode.
            let mut out = format!("{HISTOGRAM_COLUMNS}\n");
            for (r, dist) in result.marginals.iter().enumerate() {
                for (x, &prob) in dist.probs.iter().enumerate() {
                    let count = result
                        .denominator
                        .map(|d| ((prob * d as f64).round() as u64).to_string())
                        .unwrap_or_default();
                    let _ = writeln!(out, "{r},{x},{count},{}", num(prob));
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ekr").chain(args.iter().copied())).unwrap()
    }

    fn report(args: &[&str]) -> Report {
        let cli = parse(args);
        let (text, _) = render(&cli.command).unwrap();
        serde_json::from_str(&text).unwrap()
    }

    fn code(args: &[&str]) -> i32 {
        let cli = parse(args);
        exit_code(&render(&cli.command).unwrap_err())
    }

    #[test]
    fn threshold_report() {
        let r = report(&["threshold", "--n", "400", "--k", "40", "--r", "0"]);
        let conv = r.analytic["threshold"]["t0_convenient"].as_f64().unwrap();
        assert!((conv - 10.4497).abs() < 1e-4);
        let r = report(&["threshold", "--n", "6", "--k", "3", "--r", "1"]);
        let t0 = r.analytic["threshold"]["t0_exact"].as_f64().unwrap();
        assert!((t0 - 2.1082).abs() < 1e-4);
        assert_eq!(r.meta.seed, None);
    }

    #[test]
    fn bounds_reports() {
        let r = report(&["bounds", "--n", "6", "--k", "3", "--r", "0", "--p", "0.001"]);
        let tv = r.analytic["poisson_bound"]["tv_bound"].as_f64().unwrap();
        assert!((tv - 0.001999).abs() < 1e-12);
        let r = report(&["bounds", "--n", "6", "--k", "3", "--b", "1", "--p", "0.001"]);
        let eps = r.analytic["poisson_bound"]["tv_bound"].as_f64().unwrap();
        assert!((eps - 4.0001e-6).abs() < 1e-10);
        let r = report(&["bounds", "--n", "6", "--k", "3", "--p", "0"]);
        assert_eq!(r.analytic["janson"]["lower_bound"], 1.0);
        assert_eq!(r.analytic["janson"]["upper_bound"], 1.0);
        assert_eq!(r.analytic["poisson_bound"]["tv_bound"], 0.0);
    }

    #[test]
    fn simulate_single_set() {
        let r = report(&["simulate", "--n", "20", "--k", "4", "--t", "1", "--trials", "50"]);
        assert_eq!(r.empirical["estimate"]["estimate"], 1.0);
        assert_eq!(r.meta.seed, Some(DEFAULT_SEED));
        assert_eq!(r.meta.trials, Some(50));
    }

    #[test]
    fn a_parameterization() {
        let (t, _, realized) = size_from_a(400, 40, 0, 1.0).unwrap();
        assert_eq!(t, 13);
        assert!((realized - 13.0 / 13.0696).abs() < 1e-3);
        assert_eq!(size_from_a(400, 40, 0, 0.01).unwrap().0, 2);
    }

    #[test]
    fn oracle_command() {
        let r = report(&["oracle", "--n", "4", "--k", "2", "--t", "2"]);
        assert!((r.analytic["p_no_disjoint"].as_f64().unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(code(&["threshold", "--n", "4", "--k", "3"]), 2);
        assert_eq!(code(&["simulate", "--n", "6", "--k", "3", "--t", "21", "--trials", "1"]), 3);
        assert_eq!(code(&["oracle", "--n", "8", "--k", "4", "--p", "0.1"]), 5);
        assert_eq!(code(&["simulate", "--n", "2000", "--k", "3", "--t", "2", "--trials", "1"]), 5);
        assert!(Cli::try_parse_from(["ekr", "simulate", "--n", "6", "--k", "3"]).is_err());
        assert!(Cli::try_parse_from(["ekr", "simulate", "--n", "6", "--k", "3", "--t", "2", "--p", "0.1"]).is_err());
    }

    #[test]
    fn output_dir_resolution() {
        let dir = Path::new("/tmp/out");
        assert_eq!(resolve_output(Path::new("a.json"), Some(dir)), dir.join("a.json"));
        assert_eq!(resolve_output(Path::new("/x/a.json"), Some(dir)), PathBuf::from("/x/a.json"));
        assert_eq!(resolve_output(Path::new("a.json"), None), PathBuf::from("a.json"));
    }
}
