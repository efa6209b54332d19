//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and parameter errors, 2 for runtime
//! errors (unreadable data, `k > n`, engine failures).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{load_manifest, rank_methods, run_comparison, write_report, ReportFormat};
use crate::data::{load_csv, standardize, CsvOptions, Dataset, Standardize};
use crate::engine::{
    fuzzy_between, fuzzy_inertia, fuzzy_within, Centroids, FcmConfig, MembershipMatrix,
};
use crate::error::Error;
use crate::seeding::{fit, seed, Method, SeedSet};
use crate::synth::{write_csv, GeneratorSpec};
use crate::validity::ValidityScores;

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "FUZZSEED_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fuzzseed",
    version,
    about = "Fuzzy C-Means seeding, fitting, validation and benchmarking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute initial centroids and print them as JSON.
    Seed(SeedArgs),
    /// Seed, run FCM and write the result as JSON.
    Fit(FitArgs),
    /// Score a fit result against its data.
    Validate(ValidateArgs),
    /// Generate a synthetic dataset from a JSON spec.
    Generate(GenerateArgs),
    /// Run the method comparison over a dataset manifest.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Input CSV.
    #[arg(long)]
    data: PathBuf,
    /// Column holding ground-truth labels; excluded from the features.
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    #[arg(long, value_enum, default_value_t = StandardizeArg::None)]
    standardize: StandardizeArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StandardizeArg {
    None,
    ZScore,
    MinMax,
}

impl From<StandardizeArg> for Standardize {
    fn from(s: StandardizeArg) -> Self {
        match s {
            StandardizeArg::None => Standardize::None,
            StandardizeArg::ZScore => Standardize::ZScore,
            StandardizeArg::MinMax => Standardize::MinMax,
        }
    }
}

#[derive(Debug, Args)]
struct SeedArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long)]
    method: Method,
    /// RNG seed for stochastic methods.
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct FcmArgs {
    #[arg(long, default_value_t = 2.0)]
    m: f64,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
}

impl FcmArgs {
    fn config(&self) -> Result<FcmConfig, Failure> {
        let cfg = FcmConfig {
            m: self.m,
            epsilon: self.epsilon,
            max_iterations: self.max_iter,
        };
        cfg.validate().map_err(Failure::usage)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    k: u64,
    #[arg(long)]
    method: Method,
    #[command(flatten)]
    fcm: FcmArgs,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Write the result JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the membership matrix as CSV.
    #[arg(long)]
    membership: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// JSON written by `fit`.
    #[arg(long)]
    result: PathBuf,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON list of datasets; relative paths resolve against its directory.
    #[arg(long)]
    manifest: PathBuf,
    /// Comma-separated method ids.
    #[arg(
        long,
        default_value = "macqueen2,faber,kmeanspp,kmeanspp_x10,maxmin_linear"
    )]
    methods: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    #[command(flatten)]
    fcm: FcmArgs,
    /// Comma-separated subset of json, csv, markdown.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FormatArg::Json, FormatArg::Csv, FormatArg::Markdown])]
    format: Vec<FormatArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Markdown,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Markdown => ReportFormat::Markdown,
        }
    }
}

/// Output of `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub schema_version: u32,
    pub dataset: String,
    /// Seed given on the command line (or drawn), for stochastic methods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    pub seeds: SeedSet,
}

/// Output of `fit`, input of `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub schema_version: u32,
    pub method: Method,
    pub dataset: String,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub m: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    /// Cycles of the kept run.
    pub iterations: usize,
    /// Cycles summed over all relaunches.
    pub total_iterations: usize,
    pub converged: bool,
    pub fw: f64,
    pub fb: f64,
    pub fi: f64,
    pub centroids: Vec<Vec<f64>>,
    pub objective_trace: Vec<f64>,
    pub membership: Vec<Vec<f64>>,
    pub seeds: SeedSet,
}

/// Output of `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateRecord {
    pub schema_version: u32,
    pub dataset: String,
    pub n: usize,
    pub k: usize,
    pub m: f64,
    pub fw: f64,
    pub fb: f64,
    pub fi: f64,
    #[serde(flatten)]
    pub scores: ValidityScores,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::runtime(e)
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = match cli.command {
        Command::Seed(a) => cmd_seed(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn load(args: &DataArgs) -> Result<Dataset, Failure> {
    if !args.delimiter.is_ascii() {
        return Err(Failure::usage(format!(
            "delimiter {:?} is not ASCII",
            args.delimiter
        )));
    }
    let opts = CsvOptions {
        label_column: args.label_column.clone(),
        delimiter: args.delimiter as u8,
    };
    let d = load_csv(&args.data, &opts)?;
    Ok(standardize(&d, args.standardize.into())?)
}

/// The seed a stochastic method runs with; drawn and announced when absent.
fn effective_seed(method: Method, given: Option<u64>) -> Option<u64> {
    if !method.is_stochastic() {
        return None;
    }
    let s = given.unwrap_or_else(rand::random);
    eprintln!("seed: {s}");
    Some(s)
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::runtime)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::runtime(Error::io(path, e))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes()).map_err(Failure::runtime)
        }
    }
}

fn cmd_seed(a: SeedArgs) -> Result<(), Failure> {
    let d = load(&a.data)?;
    let k = a.k as usize;
    let rng_seed = effective_seed(a.method, a.seed);
    let seeds = if a.method.relaunch_of().is_some() {
        // Relaunch methods pick their seeds by running FCM.
        fit(a.method, &d, k, &FcmConfig::default(), rng_seed)?.seeds
    } else {
        seed(a.method, &d, k, rng_seed)?
    };
    emit_json(
        &SeedRecord {
            schema_version: SCHEMA_VERSION,
            dataset: d.name().to_string(),
            rng_seed,
            seeds,
        },
        None,
    )
}

fn cmd_fit(a: FitArgs) -> Result<(), Failure> {
    let cfg = a.fcm.config()?;
    let d = load(&a.data)?;
    let k = a.k as usize;
    let rng_seed = effective_seed(a.method, a.seed);
    let f = fit(a.method, &d, k, &cfg, rng_seed)?;
    let r = &f.result;
    let record = FitRecord {
        schema_version: SCHEMA_VERSION,
        method: a.method,
        dataset: d.name().to_string(),
        n: d.n(),
        p: d.p(),
        k,
        m: cfg.m,
        epsilon: cfg.epsilon,
        max_iterations: cfg.max_iterations,
        rng_seed,
        iterations: r.iterations,
        total_iterations: f.total_iterations,
        converged: r.converged,
        fw: r.fw,
        fb: r.fb,
        fi: r.fi,
        centroids: r.centroids.to_rows(),
        objective_trace: r.objective_trace.clone(),
        membership: r.membership.to_rows(),
        seeds: f.seeds.clone(),
    };
    if let Some(path) = &a.membership {
        write_membership(&record.membership, path)?;
    }
    emit_json(&record, a.out.as_deref())?;
    let summary = format!(
        "iterations={} fw={} fb={} fi={} converged={}",
        f.total_iterations, r.fw, r.fb, r.fi, r.converged
    );
    // Keep stdout parseable when it carries the JSON.
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn write_membership(rows: &[Vec<f64>], path: &Path) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| Failure::runtime(Error::io(path, e)))?;
    let mut w = BufWriter::new(file);
    let k = rows.first().map_or(0, Vec::len);
    let header: Vec<String> = (0..k).map(|j| format!("u{j}")).collect();
    let io = |e: std::io::Error| Failure::runtime(Error::io(path, e));
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.result)
        .map_err(|e| Failure::runtime(Error::io(&a.result, e)))?;
    let record: FitRecord =
        serde_json::from_str(&text).map_err(|e| Failure::runtime(Error::Json(e)))?;
    let d = load(&a.data)?;
    if record.membership.len() != d.n() {
        return Err(Failure::runtime(format!(
            "result has {} membership rows, data has {} points",
            record.membership.len(),
            d.n()
        )));
    }
    let c = Centroids::from_rows(&record.centroids)?;
    if c.p() != d.p() {
        return Err(Failure::runtime(format!(
            "result centroids have {} features, data has {}",
            c.p(),
            d.p()
        )));
    }
    let flat: Vec<f64> = record.membership.iter().flatten().copied().collect();
    let u = ndarray::Array2::from_shape_vec((d.n(), c.k()), flat)
        .map_err(|e| Failure::runtime(Error::Shape(e.to_string())))?;
    let u = MembershipMatrix::new(u)?;
    let m = record.m;
    let fw = fuzzy_within(&d, &c, &u, m)?;
    let fb = fuzzy_between(&d, &c, &u, m)?;
    let fi = fuzzy_inertia(&d, &u, m)?;
    let scores = ValidityScores::from_parts(&d, &c, &u, fw, fb, fi, m)?;
    emit_json(
        &ValidateRecord {
            schema_version: SCHEMA_VERSION,
            dataset: d.name().to_string(),
            n: d.n(),
            k: c.k(),
            m,
            fw,
            fb,
            fi,
            scores,
        },
        None,
    )
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Failure> {
    let spec = GeneratorSpec::from_json_file(&a.spec)?;
    spec.validate().map_err(Failure::usage)?;
    let base = a.spec.parent().unwrap_or(Path::new("."));
    let d = spec.generate(base)?;
    write_csv(&d, &a.out)?;
    eprintln!(
        "wrote {} rows x {} features to {}",
        d.n(),
        d.p(),
        a.out.display()
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let cfg = a.fcm.config()?;
    let methods = Method::parse_list(&a.methods).map_err(Failure::usage)?;
    if methods.is_empty() {
        return Err(Failure::usage("--methods is empty"));
    }
    let master = a.seed.unwrap_or_else(rand::random);
    eprintln!("seed: {master}");
    let inputs = load_manifest(&a.manifest)?;
    let report = rank_methods(run_comparison(
        &inputs,
        &methods,
        &cfg,
        master,
        a.jobs as usize,
    )?);
    let formats: Vec<ReportFormat> = a.format.iter().map(|&f| f.into()).collect();
    for path in write_report(&report, &a.out, &formats)? {
        println!("{}", path.display());
    }
    let errors = report.error_count();
    if errors > 0 {
        eprintln!("warning: {errors} cell(s) failed");
        for ds in &report.datasets {
            for c in ds.cells.iter().filter(|c| !c.is_ok()) {
                eprintln!(
                    "warning: {} / {}: {}",
                    ds.name,
                    c.method,
                    c.error.as_deref().unwrap_or("")
                );
            }
        }
    }
    Ok(())
}
