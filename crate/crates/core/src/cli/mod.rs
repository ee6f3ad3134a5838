//! The `corank-lab` command line.
//!
//! Every subcommand accepts `--config <file.toml>` and `--out <file.jsonl>`.
//! Records go to `--out` when given and to standard output otherwise; the
//! human-readable summary always goes to standard output.

mod config;
mod inputs;
mod output;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use num::{BigInt, BigRational};
use serde::Serialize;
use serde_json::{Map, Value};

pub use config::Resolver;
pub use output::{config_hash, reproducibility_digest, RunManifest, TOOL_VERSION};

use crate::anticoncentration::{build_distribution_capped, scalar_levy, threshold, DEFAULT_C_LKR, DEFAULT_ENUMERATION_CAP};
use crate::error::Error;
use crate::experiments::{bound_table, enumerate_corank, fixed_vector_event_mc, mc_corank, operator_norm_calibration};
use crate::geometry::classify_vector;
use crate::prob::{ratio_to_f64, ratio_to_string};
use crate::rank::{rank_mod_prime, rank_rational};
use crate::restricted_invertibility::{select_columns, SelectionMode};
use crate::theta::{compute_theta, verify_theta, ThetaConfig};
use config::required;
use inputs::{bit_matrix_input, file_or_inline, parse_number_list, real_matrix_input, vector_input};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_resource_refusal() => 2,
            CliError::Lib(e) if e.is_invariant_violation() => 3,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "corank-lab", version, about = "Exact and Monte Carlo experiments on the corank of random 0/1 matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML file with the same keys as the long flags (`-` written as `_`)
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSONL output file (truncated)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact rank of a 0/1 matrix, optionally also modulo a prime
    Rank {
        /// Matrix file: `rows cols` header, then one 0/1 row per line
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long)]
        prime: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Lévy concentration L(sum x_i b_i, r)
    Levy {
        /// File or inline list such as `1,1`
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        r: Option<f64>,
        /// Largest number of weights enumerated (2^cap outcomes)
        #[arg(long)]
        cap: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// sup of t in (0,1) with L(sum b_i x_i, t) > L t
    Threshold {
        #[arg(long, allow_hyphen_values = true)]
        weights: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long = "L")]
        big_l: Option<f64>,
        #[arg(long)]
        cap: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Certified small-ball radius for Mx, M with orthonormal rows
    Theta {
        /// Real matrix file: `rows cols` header, then rows of numbers
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long = "C")]
        c: Option<f64>,
        /// Also bracket L(Mx, theta) by enumeration
        #[arg(long)]
        verify: bool,
        /// Override the per-row top set size
        #[arg(long)]
        top_set_size: Option<usize>,
        #[arg(long)]
        cap: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Column subset with small Hilbert-Schmidt norm of the inverse
    Rinv {
        #[arg(long)]
        matrix: Option<String>,
        /// exhaustive or greedy
        #[arg(long)]
        mode: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Compressible / incompressible label of a unit vector
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        vector: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact corank law of an n x n Ber(p) matrix (n <= 5)
    Enumerate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded Monte Carlo estimate
    Mc {
        /// corank, fixed-vector or operator-norm
        #[arg(long)]
        event: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// n x k matrix with orthonormal columns (file), or an inline column
        #[arg(long, allow_hyphen_values = true)]
        v: Option<String>,
        /// Hilbert-Schmidt scale of the fixed-vector event
        #[arg(long)]
        c: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form bound columns over a range of n
    Bounds {
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Exact structured-union and corank columns for n <= 5
        #[arg(long)]
        exact_union: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Join JSONL results against the bound table
    Report {
        #[arg(long, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the subcommand named by the config key `experiment`
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

/// What a subcommand produced, before the manifest is attached.
struct Run {
    subcommand: &'static str,
    inputs: Map<String, Value>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    records: Vec<(&'static str, Value)>,
    summary: Vec<String>,
    /// Print the full record lines as the summary.
    echo: bool,
}

impl Run {
    fn new(subcommand: &'static str, r: &mut Resolver, common: &Common) -> Result<Self, CliError> {
        let out = r.string("out", common.out.as_ref().map(|p| p.display().to_string()))?;
        Ok(Run {
            subcommand,
            inputs: Map::new(),
            seed: None,
            out: out.map(PathBuf::from),
            records: Vec::new(),
            summary: Vec::new(),
            echo: false,
        })
    }

    fn record<T: Serialize>(&mut self, kind: &'static str, value: &T) -> Result<(), CliError> {
        let v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
        self.records.push((kind, v));
        Ok(())
    }

    fn seal(mut self, r: Resolver) -> Result<Self, CliError> {
        r.finish()?;
        self.inputs = r.inputs;
        Ok(self)
    }
}

fn resolver(common: &Common, subcommand: &str) -> Result<Resolver, CliError> {
    Resolver::new(common.config.as_deref(), subcommand)
}

pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    if let Command::Run { config } = command {
        return run_from_config(config);
    }
    let started = output::now_ms();
    let run = match command {
        Command::Rank { matrix, prime, common } => cmd_rank(matrix, prime, &common)?,
        Command::Levy { weights, p, r, cap, common } => cmd_levy(weights, p, r, cap, &common)?,
        Command::Threshold { weights, p, big_l, cap, common } => cmd_threshold(weights, p, big_l, cap, &common)?,
        Command::Theta { matrix, p, c, verify, top_set_size, cap, common } => {
            cmd_theta(matrix, p, c, verify, top_set_size, cap, &common)?
        }
        Command::Rinv { matrix, mode, common } => cmd_rinv(matrix, mode, &common)?,
        Command::Classify { vector, delta, rho, common } => cmd_classify(vector, delta, rho, &common)?,
        Command::Enumerate { n, p, common } => cmd_enumerate(n, p, &common)?,
        Command::Mc { event, n, k, p, trials, seed, v, c, common } => cmd_mc(event, n, k, p, trials, seed, v, c, &common)?,
        Command::Bounds { n_min, n_max, p, k, epsilon, exact_union, csv, common } => {
            cmd_bounds(n_min, n_max, p, k, epsilon, exact_union, csv, &common)?
        }
        Command::Report { inputs, epsilon, csv, common } => report::cmd_report(inputs, epsilon, csv, &common)?,
        Command::Run { .. } => unreachable!(),
    };
    emit(run, started)
}

fn emit(run: Run, started: u128) -> Result<(), CliError> {
    let manifest = RunManifest {
        subcommand: run.subcommand.to_string(),
        config_hash: config_hash(run.subcommand, &run.inputs),
        seed: run.seed,
        tool_version: TOOL_VERSION,
        started,
        finished: output::now_ms(),
    };
    let lines = run
        .records
        .iter()
        .map(|(kind, v)| output::envelope(kind, v, &manifest))
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = String::new();
    if !run.echo {
        for line in &run.summary {
            text.push_str(line);
            text.push('\n');
        }
    }
    if let Some(path) = &run.out {
        output::write_jsonl(path, &lines)?;
    }
    if run.out.is_none() || run.echo {
        for line in &lines {
            text.push_str(&line.to_string());
            text.push('\n');
        }
    }
    // A closed pipe (`| head`) is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    Ok(())
}

fn run_from_config(path: PathBuf) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("malformed config {}: {e}", path.display())))?;
    let experiment = match table.get("experiment") {
        Some(toml::Value::String(s)) => s.clone(),
        Some(other) => return Err(CliError::Config(format!("key `experiment`: expected a subcommand name, found {other}"))),
        None => return Err(CliError::Config("missing required key `experiment`".into())),
    };
    if experiment == "run" {
        return Err(CliError::Config("key `experiment`: `run` cannot name itself".into()));
    }
    let argv = [OsString::from("corank-lab"), experiment.clone().into(), "--config".into(), path.into_os_string()];
    let cli = Cli::try_parse_from(argv)
        .map_err(|_| CliError::Config(format!("key `experiment`: unknown subcommand `{experiment}`")))?;
    execute(cli.command)
}

#[derive(Serialize)]
struct RankRecord {
    rows: usize,
    cols: usize,
    rational: crate::RankResult,
    modular: Option<crate::RankResult>,
}

fn cmd_rank(matrix: Option<String>, prime: Option<u64>, common: &Common) -> Result<Run, CliError> {
    let mut r = resolver(common, "rank")?;
    let m = bit_matrix_input(&mut r, matrix)?;
    let prime = r.u64("prime", prime)?;
    let mut run = Run::new("rank", &mut r, common)?.seal(r)?;
    let rational = rank_rational(&m);
    let modular = prime.map(|q| rank_mod_prime(&m, q)).transpose()?;
    run.summary.push(format!("rank = {}, corank = {} ({} x {})", rational.rank, rational.corank, m.rows(), m.cols()));
    if let Some(md) = &modular {
        run.summary.push(format!("rank mod {} = {}", md.prime.unwrap_or_default(), md.rank));
    }
    run.record("rank", &RankRecord { rows: m.rows(), cols: m.cols(), rational, modular })?;
    Ok(run)
}

#[derive(Serialize)]
struct LevyRecord {
    weights: Vec<f64>,
    p: crate::Probability,
    r: f64,
    value: String,
    value_f64: f64,
    method: &'static str,
    atoms: usize,
    value_tolerance: f64,
    enumeration_cap: usize,
}

fn cmd_levy(weights: Option<String>, p: Option<String>, radius: Option<f64>, cap: Option<usize>, common: &Common) -> Result<Run, CliError> {
    let mut r = resolver(common, "levy")?;
    let x = required("weights", vector_input(&mut r, "weights", weights)?)?;
    let p = required("p", r.prob("p", p)?)?;
    let radius = required("r", r.f64("r", radius)?)?;
    let cap = r.usize("cap", cap)?.unwrap_or(DEFAULT_ENUMERATION_CAP);
    let mut run = Run::new("levy", &mut r, common)?.seal(r)?;
    let d = build_distribution_capped(&x, p, cap)?;
    let value = scalar_levy(&d, radius)?;
    run.echo = true;
    run.record(
        "levy",
        &LevyRecord {
            weights: x,
            p,
            r: radius,
            value: ratio_to_string(&value),
            value_f64: ratio_to_f64(&value),
            method: "exact-enumeration-sliding-window",
            atoms: d.len(),
            value_tolerance: d.tolerance(),
            enumeration_cap: cap,
        },
    )?;
    Ok(run)
}

#[derive(Serialize)]
struct ThresholdRecord {
    weights: Vec<f64>,
    p: crate::Probability,
    #[serde(rename = "L")]
    big_l: f64,
    value: f64,
    method: &'static str,
    enumeration_cap: usize,
}

fn cmd_threshold(weights: Option<String>, p: Option<String>, big_l: Option<f64>, cap: Option<usize>, common: &Common) -> Result<Run, CliError> {
    let mut r = resolver(common, "threshold")?;
    let x = required("weights", vector_input(&mut r, "weights", weights)?)?;
    let p = required("p", r.prob("p", p)?)?;
    let big_l = required("L", r.f64("L", big_l)?)?;
    let cap = r.usize("cap", cap)?.unwrap_or(DEFAULT_ENUMERATION_CAP);
    let mut run = Run::new("threshold", &mut r, common)?.seal(r)?;
    if x.len() > cap {
        return Err(Error::EnumerationCap { n: x.len(), cap }.into());
    }
    let value = threshold(&x, p, big_l)?;
    run.echo = true;
    run.record(
        "threshold",
        &ThresholdRecord {
            weights: x,
            p,
            big_l,
            value,
            method: "exact-enumeration-pairwise-breakpoints",
            enumeration_cap: cap,
        },
    )?;
    Ok(run)
}

#[derive(Serialize)]
struct ThetaRecord {
    certificate: crate::theta::ThetaCertificate,
    verification: Option<crate::theta::ThetaVerification>,
    enumeration_cap: usize,
}

fn cmd_theta(
    matrix: Option<String>,
    p: Option<String>,
    c: Option<f64>,
    verify: bool,
    top_set_size: Option<usize>,
    cap: Option<usize>,
    common: &Common,
) -> Result<Run, CliError> {
    let mut r = resolver(common, "theta")?;
    let m = real_matrix_input(&mut r, "matrix", matrix)?;
    let p = required("p", r.prob("p", p)?)?;
    let c = r.f64("C", c)?.unwrap_or(DEFAULT_C_LKR);
    r.inputs.insert("C".into(), Value::from(c));
    let verify = r.bool("verify", verify)?;
    let top_set_size = r.usize("top_set_size", top_set_size)?;
    let cap = r.usize("cap", cap)?.unwrap_or(DEFAULT_ENUMERATION_CAP);
    let mut run = Run::new("theta", &mut r, common)?.seal(r)?;
    let cfg = ThetaConfig {
        c_lkr: c,
        top_set_size,
        enumeration_cap: cap,
    };
    let cert = compute_theta(&m, p, &cfg)?;
    run.summary.push(format!(
        "theta = {:e} (case {:?}, k = {}, |T_i| = {})",
        cert.theta, cert.case, cert.k, cert.top_set_size
    ));
    let verification = if verify {
        let v = verify_theta(&cert, &m, p, cap)?;
        run.summary.push(format!(
            "L(Mx, theta) in [{}, {}], target {} : {}",
            ratio_to_string(&v.lower),
            ratio_to_string(&v.upper),
            ratio_to_string(&v.target),
            if v.ok { "ok" } else { "NOT VERIFIED" }
        ));
        Some(v)
    } else {
        None
    };
    run.record(
        "theta_certificate",
        &ThetaRecord {
            certificate: cert,
            verification,
            enumeration_cap: cap,
        },
    )?;
    Ok(run)
}

#[derive(Serialize)]
struct RinvRecord {
    rows: usize,
    cols: usize,
    selection: crate::restricted_invertibility::ColumnSelection,
}

fn cmd_rinv(matrix: Option<String>, mode: Option<String>, common: &Common) -> Result<Run, CliError> {
    let mut r = resolver(common, "rinv")?;
    let u = real_matrix_input(&mut r, "matrix", matrix)?;
    let mode_text = r.input_string("mode", mode)?.unwrap_or_else(|| "exhaustive".into());
    let mode: SelectionMode = mode_text
        .parse()
        .map_err(|e: Error| CliError::Config(format!("key `mode`: {e}")))?;
    r.inputs.insert("mode".into(), Value::from(mode_text));
    let mut run = Run::new("rinv", &mut r, common)?.seal(r)?;
    let sel = select_columns(&u, mode)?;
    run.summary.push(format!(
        "S = {:?}, ||(U_S)^-1||_HS^2 = {:.6}, bound = {:.6}, qualifies = {}",
        sel.subset, sel.hs_inv_sq, sel.bound, sel.qualifies
    ));
    run.record("column_selection", &RinvRecord { rows: u.nrows(), cols: u.ncols(), selection: sel })?;
    Ok(run)
}

fn cmd_classify(vector: Option<String>, delta: Option<f64>, rho: Option<f64>, common: &Common) -> Result<Run, CliError> {
    let mut r = resolver(common, "classify")?;
    let x = required("vector", vector_input(&mut r, "vector", vector)?)?;
    let delta = required("delta", r.f64("delta", delta)?)?;
    let rho = required("rho", r.f64("rho", rho)?)?;
    let mut run = Run::new("classify", &mut r, common)?.seal(r)?;
    let class = classify_vector(&x, delta, rho)?;
    run.summary.push(format!(
        "{:?}: distance to {}-sparse = {:.6} (rho = {rho})",
        class.label, class.sparsity, class.distance
    ));
    run.record("vector_class", &class)?;
    Ok(run)
}

fn cmd_enumerate(n: Option<usize>, p: Option<String>, common: &Common) -> Result<Run, CliError> {
    let mut r = resolver(common, "enumerate")?;
    let n = required("n", r.usize("n", n)?)?;
    let p = required("p", r.prob("p", p)?)?;
    let mut run = Run::new("enumerate", &mut r, common)?.seal(r)?;
    let dist = enumerate_corank(n, p)?;
    // Print each tail over den^(n^2) as well as reduced.
    let total = BigInt::from(p.den()).pow((n * n) as u32);
    for k in 1..=n {
        let tail = dist.at_least(k);
        let scaled: BigRational = &tail * BigRational::from_integer(total.clone());
        let line = if scaled.is_integer() {
            let raw = format!("{}/{total}", scaled.to_integer());
            let reduced = ratio_to_string(&tail);
            if raw == reduced {
                format!("P[corank >= {k}] = {raw}")
            } else {
                format!("P[corank >= {k}] = {raw} = {reduced}")
            }
        } else {
            format!("P[corank >= {k}] = {}", ratio_to_string(&tail))
        };
        run.summary.push(line);
    }
    run.record("corank_distribution", &dist)?;
    Ok(run)
}

/// `--v`: a matrix file, or an inline list read as a single column.
fn fixed_vector_input(r: &mut Resolver, flag: Option<String>) -> Result<DMatrix<f64>, CliError> {
    if let Some(f) = &flag {
        if !std::path::Path::new(f).is_file() {
            let v = parse_number_list(&file_or_inline(f)?)?;
            if v.is_empty() {
                return Err(CliError::Config("key `v`: empty vector".into()));
            }
            let _ = r.raw("v");
            r.inputs.insert("v".into(), serde_json::json!([v]));
            return Ok(DMatrix::from_column_slice(v.len(), 1, &v));
        }
    }
    if flag.is_none() {
        if let Some(toml::Value::String(s)) = r.raw("v") {
            if !std::path::Path::new(&s).is_file() {
                return fixed_vector_input(r, Some(s));
            }
        }
    }
    real_matrix_input(r, "v", flag)
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc(
    event: Option<String>,
    n: Option<usize>,
    k: Option<usize>,
    p: Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
    v: Option<String>,
    c: Option<f64>,
    common: &Common,
) -> Result<Run, CliError> {
    let mut r = resolver(common, "mc")?;
    let event = r.input_string("event", event)?.unwrap_or_else(|| "corank".into());
    r.inputs.insert("event".into(), Value::from(event.clone()));
    let p = required("p", r.prob("p", p)?)?;
    let trials = required("trials", r.u64("trials", trials)?)?;
    let seed = r.u64("seed", seed)?.unwrap_or(0);
    r.inputs.insert("seed".into(), Value::from(seed));
    let mut run = match event.as_str() {
        "corank" => {
            let n = required("n", r.usize("n", n)?)?;
            let k = required("k", r.usize("k", k)?)?;
            let mut run = Run::new("mc", &mut r, common)?.seal(r)?;
            let rec = mc_corank(n, p, k, trials, seed)?;
            summarize_estimate(&mut run, &rec, format!("P[corank >= {k}], n = {n}, p = {p}"));
            run.record("estimate", &rec)?;
            run
        }
        "fixed-vector" => {
            let vm = fixed_vector_input(&mut r, v)?;
            let c = required("c", r.f64("c", c)?)?;
            let mut run = Run::new("mc", &mut r, common)?.seal(r)?;
            let rec = fixed_vector_event_mc(&vm, p, c, trials, seed)?;
            summarize_estimate(
                &mut run,
                &rec,
                format!("P[||M V||_HS <= c sqrt(n)], n = {}, k = {}, c = {c}", rec.n, rec.k),
            );
            run.record("estimate", &rec)?;
            run
        }
        "operator-norm" => {
            let n = required("n", r.usize("n", n)?)?;
            let k = required("k", r.usize("k", k)?)?;
            let mut run = Run::new("mc", &mut r, common)?.seal(r)?;
            let cal = operator_norm_calibration(n, k, p, trials, seed)?;
            run.summary.push(format!(
                "||M|_H|| / sqrt(n): max {:.6}, mean {:.6} over {trials} samples",
                cal.max_scaled_norm, cal.mean_scaled_norm
            ));
            run.record("operator_norm_calibration", &cal)?;
            run
        }
        other => {
            return Err(CliError::Config(format!(
                "key `event`: unknown event `{other}` (expected corank, fixed-vector or operator-norm)"
            )))
        }
    };
    run.seed = Some(seed);
    Ok(run)
}

fn summarize_estimate(run: &mut Run, rec: &crate::experiments::EstimateRecord, what: String) {
    run.summary.push(format!(
        "{what}: {}/{} = {:.6}, 95% CI [{:.6}, {:.6}]",
        rec.hits, rec.trials, rec.estimate, rec.ci_low, rec.ci_high
    ));
    if let Some(bound) = rec.rule_of_three {
        run.summary.push(format!(
            "no hits: below Monte Carlo resolution; rule of three gives P <= {bound:.3e} (3/trials)"
        ));
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds(
    n_min: Option<usize>,
    n_max: Option<usize>,
    p: Option<String>,
    k: Option<usize>,
    epsilon: Option<f64>,
    exact_union: bool,
    csv: Option<PathBuf>,
    common: &Common,
) -> Result<Run, CliError> {
    let mut r = resolver(common, "bounds")?;
    let n_min = required("n_min", r.usize("n_min", n_min)?)?;
    let n_max = required("n_max", r.usize("n_max", n_max)?)?;
    let p = required("p", r.prob("p", p)?)?;
    let k = required("k", r.usize("k", k)?)?;
    let epsilon = r.f64("epsilon", epsilon)?.unwrap_or(0.0);
    r.inputs.insert("epsilon".into(), Value::from(epsilon));
    let exact_union = r.bool("exact_union", exact_union)?;
    let csv = r.string("csv", csv.map(|p| p.display().to_string()))?;
    let mut run = Run::new("bounds", &mut r, common)?.seal(r)?;
    if n_min == 0 || n_min > n_max {
        return Err(CliError::Config(format!("need 1 <= n_min <= n_max, got {n_min}..{n_max}")));
    }
    let rows = bound_table(n_min..=n_max, p, k, epsilon, exact_union)?;
    run.summary.push(format!(
        "{:>3} {:>3} {:>14} {:>14} {:>14} {:>14} {:>14}",
        "n", "k", "theorem_rate", "zero_rows", "conjecture", "structured", "exact"
    ));
    for row in &rows {
        run.summary.push(format!(
            "{:>3} {:>3} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e} {:>14}",
            row.n,
            row.k,
            row.theorem_rate,
            row.zero_rows_lower,
            row.conjecture_rhs,
            row.structured_lower,
            row.corank_exact.as_deref().unwrap_or("-")
        ));
        run.record("bound_row", row)?;
    }
    if let Some(path) = csv {
        let table: Vec<report::CsvRow> = rows.iter().map(report::CsvRow::from_bounds).collect();
        report::write_csv(std::path::Path::new(&path), &table)?;
        run.summary.push(format!("wrote {path}"));
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Lib(Error::EnumerationRefused { n: 6, max: 5 }).exit_code(), 2);
        assert_eq!(CliError::Lib(Error::Invariant("x".into())).exit_code(), 3);
        assert_eq!(CliError::Lib(Error::NotPrime(4)).exit_code(), 1);
    }

    #[test]
    fn help_and_unknown() {
        assert_eq!(dispatch(["corank-lab", "--help"]), 0);
        assert_eq!(dispatch(["corank-lab", "mc", "--help"]), 0);
        assert_eq!(dispatch(["corank-lab", "bogus"]), 1);
    }
}
