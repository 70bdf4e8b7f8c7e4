//! Command-line front end. The binary only parses arguments and calls [`run`].

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::json;

use crate::codec::{decode, encode, server_compute, Partition, SchemeParams};
use crate::error::{Error, Result};
use crate::ffield::{format_matrix, read_matrix, write_matrix, FieldMatrix, FieldPrime, MERSENNE_31};
use crate::partition::{
    decimal_17, exhaustive_rate_opt, exhaustive_threshold_opt, gap_sweep, parse_ratio, rate_sweep, theorem1_estimate,
    theorem2_estimate, write_records, OptimizationResult, RateRow,
};
use crate::security::{masking_matrix_check, SubsetMode};
use crate::simulator::{parse_delay, run_simulation, threshold_experiment, StragglerConfig};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "ALIGNED_SMM_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "aligned-smm",
    version,
    about = "Secure two-sided distributed matrix multiplication"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition maximising the rate.
    OptimizeRate(OptimizeRateArgs),
    /// Partition minimising the number of servers for a rate floor.
    OptimizeThreshold(OptimizeThresholdArgs),
    /// Encode, compute, drop servers and decode two matrix files.
    Roundtrip(RoundtripArgs),
    /// Rates of every strategy for ell = 1..N.
    SweepRate(SweepArgs),
    /// Gap between the exhaustive optimum and the closed-form estimate.
    SweepGap(SweepArgs),
    /// Invertibility of the key-masking matrices of every colluding set.
    SecurityCheck(SecurityArgs),
    /// Straggler simulation.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateMethod {
    Exhaustive,
    Theorem1,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdMethod {
    Exhaustive,
    Theorem2,
    Both,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Number of servers.
    #[arg(long)]
    pub n: u64,
    /// Collusion level.
    #[arg(long)]
    pub ell: u64,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeRateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub method: RateMethod,
}

#[derive(Debug, Args)]
pub struct OptimizeThresholdArgs {
    #[command(flatten)]
    pub common: Common,
    /// Rate floor as `num/den`.
    #[arg(long)]
    pub rth: String,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub method: ThresholdMethod,
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    #[command(flatten)]
    pub common: Common,
    /// Matrix file for A.
    #[arg(long)]
    pub a: PathBuf,
    /// Matrix file for B.
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub ra: u64,
    #[arg(long)]
    pub rb: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated 1-based servers whose answers are discarded.
    #[arg(long, value_delimiter = ',')]
    pub drop: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: u64,
    /// Print JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SecurityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub ra: u64,
    #[arg(long)]
    pub rb: u64,
    /// Field size; must exceed N.
    #[arg(long, default_value_t = MERSENNE_31)]
    pub q: u64,
    /// Check this many random subsets instead of all of them.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Defaults to the rate-optimal partition.
    #[arg(long, requires = "rb")]
    pub ra: Option<u64>,
    #[arg(long, requires = "ra")]
    pub rb: Option<u64>,
    #[arg(long, default_value_t = MERSENNE_31)]
    pub q: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Straggler config file of `key = value` lines.
    #[arg(long, conflicts_with = "slow")]
    pub config: Option<PathBuf>,
    /// Comma-separated 1-based servers that are late.
    #[arg(long, value_delimiter = ',')]
    pub slow: Vec<usize>,
    /// Lateness of `--slow` servers in ticks; `inf` for never.
    #[arg(long, default_value = "inf")]
    pub delay: String,
    /// Compare rate-optimal and threshold-optimal partitions at this rate floor.
    #[arg(long)]
    pub rth: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Rows of the random A.
    #[arg(long)]
    pub m: Option<usize>,
    /// Inner dimension.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Columns of the random B.
    #[arg(long)]
    pub p: Option<usize>,
}

/// Applies [`THREADS_ENV`] to the global rayon pool. Call once, early.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if threads == 0 {
            return Err(Error::Parse(format!("{THREADS_ENV} must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        log::debug!("rayon capped at {threads} threads");
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ResultView {
    method: String,
    r_a: u64,
    r_b: u64,
    q: u64,
    rate: String,
    rate_decimal: String,
    feasible: bool,
}

impl From<&OptimizationResult> for ResultView {
    fn from(r: &OptimizationResult) -> Self {
        ResultView {
            method: r.method.to_string(),
            r_a: r.r_a,
            r_b: r.r_b,
            q: r.q,
            rate: r.rate.to_string(),
            rate_decimal: r.rate.decimal(),
            feasible: r.feasible,
        }
    }
}

fn result_line(r: &ResultView) -> String {
    format!(
        "{}: r_A={} r_B={} Q={} R={} ({}){}",
        r.method,
        r.r_a,
        r.r_b,
        r.q,
        r.rate,
        r.rate_decimal,
        if r.feasible { "" } else { " INFEASIBLE" }
    )
}

fn gap_text(gap: Ratio<i128>) -> (String, String) {
    let (num, den) = (*gap.numer(), *gap.denom());
    let dec = decimal_17(num.unsigned_abs(), den as u128);
    let sign = if num < 0 { "-" } else { "" };
    (format!("{num}/{den}"), format!("{sign}{dec}"))
}

/// Prints text or JSON and mirrors the JSON into `--out`.
fn emit(out: &mut dyn Write, common: &Common, text: &str, value: &serde_json::Value) -> Result<()> {
    let pretty = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    if common.json {
        writeln!(out, "{pretty}")?;
    } else {
        write!(out, "{text}")?;
    }
    if let Some(path) = &common.out {
        std::fs::write(path, pretty + "\n")?;
    }
    Ok(())
}

fn optimize_rate(args: &OptimizeRateArgs, out: &mut dyn Write) -> Result<bool> {
    let c = &args.common;
    let mut results = Vec::new();
    if matches!(args.method, RateMethod::Exhaustive | RateMethod::Both) {
        results.push(exhaustive_rate_opt(c.n, c.ell)?);
    }
    if matches!(args.method, RateMethod::Theorem1 | RateMethod::Both) {
        results.push(theorem1_estimate(c.n, c.ell)?);
    }
    let views: Vec<ResultView> = results.iter().map(ResultView::from).collect();
    let mut text: String = views.iter().map(|v| result_line(v) + "\n").collect();
    let mut value = json!({ "n": c.n, "ell": c.ell, "results": views });
    if let [best, est] = results.as_slice() {
        let (gap, gap_decimal) = gap_text(best.rate.minus(est.rate));
        text += &format!("additive gap: {gap} ({gap_decimal})\n");
        value["additive_gap"] = json!(gap);
        value["additive_gap_decimal"] = json!(gap_decimal);
    }
    emit(out, c, &text, &value)?;
    Ok(true)
}

fn optimize_threshold(args: &OptimizeThresholdArgs, out: &mut dyn Write) -> Result<bool> {
    let c = &args.common;
    let r_th = parse_ratio(&args.rth)?;
    let mut results = Vec::new();
    if matches!(args.method, ThresholdMethod::Exhaustive | ThresholdMethod::Both) {
        results.push(exhaustive_threshold_opt(c.n, c.ell, r_th)?);
    }
    if matches!(args.method, ThresholdMethod::Theorem2 | ThresholdMethod::Both) {
        results.push(theorem2_estimate(c.n, c.ell, r_th)?);
    }
    let views: Vec<ResultView> = results.iter().map(ResultView::from).collect();
    let mut text: String = views.iter().map(|v| result_line(v) + "\n").collect();
    let mut value = json!({ "n": c.n, "ell": c.ell, "rate_threshold": r_th.to_string(), "results": views });
    if let [best, est] = results.as_slice() {
        let excess = est.q as i64 - best.q as i64;
        text += &format!("server excess: {excess}\n");
        value["server_excess"] = json!(excess);
    }
    emit(out, c, &text, &value)?;
    Ok(true)
}

fn roundtrip(args: &RoundtripArgs, out: &mut dyn Write) -> Result<bool> {
    let c = &args.common;
    let a = read_matrix(&args.a)?;
    let b = read_matrix(&args.b)?;
    if a.prime() != b.prime() {
        return Err(Error::MismatchedField {
            left: a.prime().modulus(),
            right: b.prime().modulus(),
        });
    }
    let params = SchemeParams::new(c.n, c.ell, a.prime())?;
    let part = Partition::new(args.ra, args.rb)?;
    for &d in &args.drop {
        if d == 0 || d as u64 > c.n {
            return Err(Error::InvalidParams(format!(
                "dropped server {d} is outside [1, {}]",
                c.n
            )));
        }
    }
    let shares = encode(&a, &b, part, &params, args.seed)?;
    let answers = shares
        .iter()
        .filter(|s| !args.drop.contains(&s.server_index))
        .map(server_compute)
        .collect::<Result<Vec<_>>>()?;
    let product = decode(&answers, part, &params, a.rows(), b.cols())?;
    let verified = product == a.mat_mul(&b)?;
    let status = if verified { "VERIFIED" } else { "MISMATCH" };
    if let Some(path) = &c.out {
        write_matrix(path, &product)?;
    }
    if c.json {
        let value = json!({
            "n": c.n,
            "ell": c.ell,
            "partition": part,
            "q": part.q(c.ell),
            "answers_used": answers.len().min(part.q(c.ell) as usize),
            "verified": verified,
        });
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&value).map_err(|e| Error::Io(e.to_string()))?
        )?;
    } else {
        if c.out.is_none() {
            write!(out, "{}", format_matrix(&product))?;
        }
        writeln!(out, "{status}")?;
    }
    Ok(verified)
}

fn sweep_output(args: &SweepArgs, out: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &args.out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            write(&mut f)?;
            f.flush()?;
        }
        None => write(out)?,
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn json_line(w: &mut dyn Write, v: &serde_json::Value) -> Result<()> {
    writeln!(
        w,
        "{}",
        serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?
    )?;
    Ok(())
}

fn sweep_rate(args: &SweepArgs, out: &mut dyn Write) -> Result<bool> {
    check_sweep_n(args.n)?;
    let records: Vec<_> = rate_sweep(args.n).iter().map(RateRow::record).collect();
    sweep_output(args, out, |w| {
        if args.json {
            json_line(w, &json!({ "n": args.n, "rows": records }))
        } else {
            write_records(w, &records).map_err(csv_err)
        }
    })?;
    Ok(true)
}

fn sweep_gap(args: &SweepArgs, out: &mut dyn Write) -> Result<bool> {
    check_sweep_n(args.n)?;
    let sweep = gap_sweep(args.n);
    sweep_output(args, out, |w| {
        if args.json {
            json_line(w, &sweep.to_json())
        } else {
            sweep.write_csv(w).map_err(csv_err)
        }
    })?;
    let (gap, dec) = gap_text(sweep.max_gap);
    log::info!(
        "N={}: max gap {gap} ({dec}), {} suboptimal",
        args.n,
        sweep.suboptimal_count
    );
    Ok(true)
}

fn check_sweep_n(n: u64) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("sweeps need N >= 3, got {n}")));
    }
    Ok(())
}

fn security_check(args: &SecurityArgs, out: &mut dyn Write) -> Result<bool> {
    let c = &args.common;
    let params = SchemeParams::new(c.n, c.ell, FieldPrime::new(args.q)?)?;
    let mode = match args.sample {
        Some(count) => SubsetMode::Sampled { count, seed: args.seed },
        None => SubsetMode::AllSubsets,
    };
    let report = masking_matrix_check(&params, args.ra, args.rb, mode)?;
    let text = match &report.failing_subset {
        None => format!("all {} colluding sets masked: SECURE\n", report.subsets_checked),
        Some(s) => format!("colluding set {s:?} sees a singular masking matrix: INSECURE\n"),
    };
    emit(
        out,
        c,
        &text,
        &serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?,
    )?;
    Ok(report.all_invertible)
}

fn straggler_config(args: &SimulateArgs) -> Result<StragglerConfig> {
    if let Some(path) = &args.config {
        return StragglerConfig::from_file(path);
    }
    if args.slow.is_empty() {
        return Ok(StragglerConfig::none());
    }
    Ok(StragglerConfig::slow_set(args.slow.clone(), parse_delay(&args.delay)?))
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<bool> {
    let c = &args.common;
    let params = SchemeParams::new(c.n, c.ell, FieldPrime::new(args.q)?)?;
    let straggler = straggler_config(args)?;

    if let Some(rth) = &args.rth {
        let summary = threshold_experiment(&params, parse_ratio(rth)?, &straggler, args.trials, args.seed)?;
        let fmt_tick = |t: Option<f64>| t.map_or("never".to_string(), |t| format!("{t:.4}"));
        let mut text = String::new();
        for (name, s) in [
            ("rate-optimal", &summary.rate_optimal),
            ("threshold-optimal", &summary.threshold_optimal),
        ] {
            text += &format!(
                "{name}: r_A={} r_B={} Q={} decoded {}/{} mean tick {}\n",
                s.partition.r_a,
                s.partition.r_b,
                s.q,
                s.decoded,
                summary.trials,
                fmt_tick(s.mean_tick)
            );
        }
        emit(
            out,
            c,
            &text,
            &serde_json::to_value(&summary).map_err(|e| Error::Io(e.to_string()))?,
        )?;
        return Ok(true);
    }

    let part = match (args.ra, args.rb) {
        (Some(r_a), Some(r_b)) => Partition::new(r_a, r_b)?,
        _ => exhaustive_rate_opt(c.n, c.ell)?.partition(),
    };
    let m = args.m.unwrap_or(part.r_a as usize);
    let p = args.p.unwrap_or(part.r_b as usize);
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let a = FieldMatrix::random(m, args.k, params.prime(), &mut rng);
    let b = FieldMatrix::random(args.k, p, params.prime(), &mut rng);
    let report = run_simulation(&a, &b, part, &params, &straggler, args.seed)?;
    let text = format!(
        "r_A={} r_B={} Q={} responders {:?} completion tick {} {}\n",
        part.r_a,
        part.r_b,
        report.q,
        report.responders_used,
        report.completion_tick.map_or("never".to_string(), |t| t.to_string()),
        if report.decoded_ok { "DECODED" } else { "FAILED" }
    );
    emit(
        out,
        c,
        &text,
        &serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?,
    )?;
    if let Some(e) = &report.error {
        log::error!("{e}");
    }
    Ok(report.decoded_ok)
}

/// Runs one subcommand. `Ok(false)` means it ran but verification failed.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::OptimizeRate(a) => optimize_rate(a, out),
        Command::OptimizeThreshold(a) => optimize_threshold(a, out),
        Command::Roundtrip(a) => roundtrip(a, out),
        Command::SweepRate(a) => sweep_rate(a, out),
        Command::SweepGap(a) => sweep_gap(a, out),
        Command::SecurityCheck(a) => security_check(a, out),
        Command::Simulate(a) => simulate(a, out),
    }
}

/// Parses `args` (program name first) and runs, capturing stdout.
pub fn run_to_string<I, T>(args: I) -> Result<(bool, String)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Parse(e.to_string()))?;
    let mut buf = Vec::new();
    let ok = run(&cli, &mut buf)?;
    Ok((ok, String::from_utf8(buf).expect("utf-8 output")))
}
