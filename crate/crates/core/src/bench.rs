//! Comparison protocol: every method on every dataset through FCM, ten
//! criteria per run, per-dataset ranks, and average ranks across datasets.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{standardize, Dataset, Standardize};
use crate::engine::FcmConfig;
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, fit, Method, GENERATOR_NAME, SEED_SCHEME};
use crate::synth::{CsvSource, GeneratorSpec};
use crate::validity::{Direction, Score, ValidityScores};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Iterations,
    Pc,
    Cl,
    Fb,
    Fw,
    Fi,
    #[serde(rename = "fratio")]
    FRatio,
    Tsfd,
    Fs,
    Xb,
}

impl Criterion {
    /// Column order of the published tables.
    pub const ALL: [Criterion; 10] = [
        Criterion::Iterations,
        Criterion::Pc,
        Criterion::Cl,
        Criterion::Fb,
        Criterion::Fw,
        Criterion::Fi,
        Criterion::FRatio,
        Criterion::Tsfd,
        Criterion::Fs,
        Criterion::Xb,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Criterion::Iterations => "iterations",
            Criterion::Pc => "pc",
            Criterion::Cl => "cl",
            Criterion::Fb => "fb",
            Criterion::Fw => "fw",
            Criterion::Fi => "fi",
            Criterion::FRatio => "fratio",
            Criterion::Tsfd => "tsfd",
            Criterion::Fs => "fs",
            Criterion::Xb => "xb",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Criterion::Iterations => "# of iterations",
            Criterion::Pc => "V_PC",
            Criterion::Cl => "V_CL",
            Criterion::Fb => "FB",
            Criterion::Fw => "FW",
            Criterion::Fi => "FI",
            Criterion::FRatio => "V_FRatio",
            Criterion::Tsfd => "V_TSFD",
            Criterion::Fs => "V_FS",
            Criterion::Xb => "V_XB",
        }
    }

    /// FI is ranked as maximised, like FB.
    pub fn direction(self) -> Direction {
        match self {
            Criterion::Iterations | Criterion::Fw | Criterion::Fs | Criterion::Xb => {
                Direction::Minimize
            }
            _ => Direction::Maximize,
        }
    }
}

/// One value per criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerCriterion<T> {
    pub iterations: T,
    pub pc: T,
    pub cl: T,
    pub fb: T,
    pub fw: T,
    pub fi: T,
    pub fratio: T,
    pub tsfd: T,
    pub fs: T,
    pub xb: T,
}

impl<T> PerCriterion<T> {
    pub fn from_fn(mut f: impl FnMut(Criterion) -> T) -> Self {
        PerCriterion {
            iterations: f(Criterion::Iterations),
            pc: f(Criterion::Pc),
            cl: f(Criterion::Cl),
            fb: f(Criterion::Fb),
            fw: f(Criterion::Fw),
            fi: f(Criterion::Fi),
            fratio: f(Criterion::FRatio),
            tsfd: f(Criterion::Tsfd),
            fs: f(Criterion::Fs),
            xb: f(Criterion::Xb),
        }
    }

    pub fn get(&self, c: Criterion) -> &T {
        match c {
            Criterion::Iterations => &self.iterations,
            Criterion::Pc => &self.pc,
            Criterion::Cl => &self.cl,
            Criterion::Fb => &self.fb,
            Criterion::Fw => &self.fw,
            Criterion::Fi => &self.fi,
            Criterion::FRatio => &self.fratio,
            Criterion::Tsfd => &self.tsfd,
            Criterion::Fs => &self.fs,
            Criterion::Xb => &self.xb,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionInfo {
    pub id: Criterion,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<PerCriterion<Score>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fch: Option<Score>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<PerCriterion<f64>>,
}

impl Cell {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub name: String,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRank {
    pub method: Method,
    pub ranks: PerCriterion<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub master_seed: u64,
    pub rng_generator: String,
    pub seed_scheme: String,
    pub config: FcmConfig,
    pub methods: Vec<Method>,
    pub criteria: Vec<CriterionInfo>,
    pub datasets: Vec<DatasetReport>,
    /// Filled by [`rank_methods`].
    #[serde(default)]
    pub average_ranks: Vec<AverageRank>,
}

impl ComparisonReport {
    pub fn error_count(&self) -> usize {
        self.datasets
            .iter()
            .flat_map(|d| &d.cells)
            .filter(|c| !c.is_ok())
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// A dataset queued for comparison. A failed load is carried along so the
/// run can record it instead of aborting.
#[derive(Debug, Clone)]
pub struct BenchInput {
    pub name: String,
    pub expected_k: usize,
    pub data: std::result::Result<Dataset, String>,
}

impl BenchInput {
    pub fn new(data: Dataset, expected_k: usize) -> Self {
        BenchInput {
            name: data.name().to_string(),
            expected_k,
            data: Ok(data),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntrySource {
    Generator { generator: GeneratorSpec },
    Csv(CsvSource),
}

/// One line of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub expected_k: usize,
    #[serde(default)]
    pub standardize: Standardize,
    #[serde(flatten)]
    pub source: EntrySource,
}

impl ManifestEntry {
    pub fn load(&self, base_dir: &Path) -> Result<Dataset> {
        let d = match &self.source {
            EntrySource::Csv(csv) => csv.load(base_dir)?,
            EntrySource::Generator { generator } => generator.generate(base_dir)?,
        };
        Ok(standardize(&d, self.standardize)?.renamed(self.name.clone()))
    }
}

/// Reads a manifest (a JSON array of entries). Paths resolve against the
/// manifest's directory. Malformed JSON is an error; a dataset that fails to
/// load becomes an errored [`BenchInput`].
pub fn load_manifest(path: &Path) -> Result<Vec<BenchInput>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(entries
        .iter()
        .map(|e| BenchInput {
            name: e.name.clone(),
            expected_k: e.expected_k,
            data: e.load(base).map_err(|err| err.to_string()),
        })
        .collect())
}

/// Seed of a (dataset, method) cell.
pub fn cell_seed(master_seed: u64, dataset: &str, method: Method) -> u64 {
    derive_seed(master_seed, &[dataset.as_bytes(), method.id().as_bytes()])
}

fn run_cell(data: &Dataset, k: usize, method: Method, cfg: &FcmConfig, master_seed: u64) -> Cell {
    let rng_seed = method
        .is_stochastic()
        .then(|| cell_seed(master_seed, data.name(), method));
    let outcome = fit(method, data, k, cfg, rng_seed).and_then(|f| {
        let scores = ValidityScores::compute(data, &f.result, cfg.m)?;
        Ok((f, scores))
    });
    match outcome {
        Ok((f, s)) => {
            let r = &f.result;
            let values = PerCriterion::from_fn(|c| match c {
                Criterion::Iterations => Score(f.total_iterations as f64),
                Criterion::Pc => s.pc,
                Criterion::Cl => s.cl,
                Criterion::Fb => Score(r.fb),
                Criterion::Fw => Score(r.fw),
                Criterion::Fi => Score(r.fi),
                Criterion::FRatio => s.fratio,
                Criterion::Tsfd => s.tsfd,
                Criterion::Fs => s.fs,
                Criterion::Xb => s.xb,
            });
            let mut flags = s.flags.clone();
            if !r.converged {
                flags.push("max_iterations_reached".to_string());
            }
            if f.seeds.uniform_fallback {
                flags.push("uniform_fallback".to_string());
            }
            Cell {
                method,
                rng_seed,
                error: None,
                values: Some(values),
                fch: Some(s.fch),
                flags,
                ranks: None,
            }
        }
        Err(e) => Cell {
            method,
            rng_seed,
            error: Some(e.to_string()),
            values: None,
            fch: None,
            flags: Vec::new(),
            ranks: None,
        },
    }
}

/// Runs every (dataset, method) pair on up to `jobs` threads.
///
/// Stochastic methods get the seed `cell_seed(master_seed, dataset, method)`.
/// The report does not depend on `jobs` or on scheduling order. Ranks are not
/// filled in; see [`rank_methods`].
pub fn run_comparison(
    inputs: &[BenchInput],
    methods: &[Method],
    cfg: &FcmConfig,
    master_seed: u64,
    jobs: usize,
) -> Result<ComparisonReport> {
    cfg.validate()?;
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods to compare".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let tasks: Vec<(usize, usize)> = inputs
        .iter()
        .enumerate()
        .filter(|(_, inp)| inp.data.is_ok())
        .flat_map(|(d, _)| (0..methods.len()).map(move |m| (d, m)))
        .collect();
    let mut cells: Vec<Option<Cell>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(d, m)| {
                let data = inputs[d].data.as_ref().expect("filtered");
                Some(run_cell(
                    data,
                    inputs[d].expected_k,
                    methods[m],
                    cfg,
                    master_seed,
                ))
            })
            .collect()
    });

    let mut next = cells.iter_mut();
    let datasets = inputs
        .iter()
        .map(|inp| match &inp.data {
            Ok(d) => DatasetReport {
                name: inp.name.clone(),
                k: inp.expected_k,
                n: Some(d.n()),
                p: Some(d.p()),
                error: None,
                cells: methods
                    .iter()
                    .map(|_| {
                        next.next()
                            .and_then(Option::take)
                            .expect("one cell per task")
                    })
                    .collect(),
            },
            Err(msg) => DatasetReport {
                name: inp.name.clone(),
                k: inp.expected_k,
                n: None,
                p: None,
                error: Some(msg.clone()),
                cells: methods
                    .iter()
                    .map(|&method| Cell {
                        method,
                        rng_seed: None,
                        error: Some(format!("dataset unavailable: {msg}")),
                        values: None,
                        fch: None,
                        flags: Vec::new(),
                        ranks: None,
                    })
                    .collect(),
            },
        })
        .collect();

    Ok(ComparisonReport {
        schema_version: REPORT_SCHEMA_VERSION,
        master_seed,
        rng_generator: GENERATOR_NAME.to_string(),
        seed_scheme: SEED_SCHEME.to_string(),
        config: *cfg,
        methods: methods.to_vec(),
        criteria: Criterion::ALL
            .iter()
            .map(|&id| CriterionInfo {
                id,
                direction: id.direction(),
            })
            .collect(),
        datasets,
        average_ranks: Vec::new(),
    })
}

/// Ranks with 1 = best. Exact ties share the mean of the ranks they cover.
/// Missing and non-finite values rank after every finite value.
pub fn rank_values(values: &[Option<f64>], direction: Direction) -> Vec<f64> {
    let key = |v: Option<f64>| -> Option<f64> {
        v.filter(|x| x.is_finite()).map(|x| match direction {
            Direction::Maximize => -x,
            Direction::Minimize => x,
        })
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| match (key(values[a]), key(values[b])) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let head = key(values[order[start]]);
        let mut end = start + 1;
        while end < order.len() && key(values[order[end]]) == head {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Fills per-dataset ranks and the cross-dataset average ranks.
///
/// Datasets without a single successful cell are left out of the averages.
pub fn rank_methods(mut report: ComparisonReport) -> ComparisonReport {
    let m = report.methods.len();
    let mut sums: Vec<PerCriterion<f64>> = (0..m).map(|_| PerCriterion::from_fn(|_| 0.0)).collect();
    let mut counted = 0usize;

    for ds in &mut report.datasets {
        let per_criterion: Vec<Vec<f64>> = Criterion::ALL
            .iter()
            .map(|&c| {
                let vals: Vec<Option<f64>> = ds
                    .cells
                    .iter()
                    .map(|cell| cell.values.as_ref().map(|v| v.get(c).value()))
                    .collect();
                rank_values(&vals, c.direction())
            })
            .collect();
        let col = |c: Criterion| {
            Criterion::ALL
                .iter()
                .position(|&x| x == c)
                .expect("known criterion")
        };
        for (i, cell) in ds.cells.iter_mut().enumerate() {
            cell.ranks = Some(PerCriterion::from_fn(|c| per_criterion[col(c)][i]));
        }
        if ds.cells.iter().any(Cell::is_ok) {
            counted += 1;
            for (i, cell) in ds.cells.iter().enumerate() {
                let r = cell.ranks.as_ref().expect("just set");
                sums[i] = PerCriterion::from_fn(|c| sums[i].get(c) + r.get(c));
            }
        }
    }

    report.average_ranks = report
        .methods
        .iter()
        .zip(sums)
        .map(|(&method, s)| AverageRank {
            method,
            ranks: PerCriterion::from_fn(|c| {
                if counted == 0 {
                    f64::NAN
                } else {
                    s.get(c) / counted as f64
                }
            }),
        })
        .collect();
    report
}

/// Mean of per-dataset ranks.
pub fn average_rank(ranks: &[f64]) -> f64 {
    ranks.iter().sum::<f64>() / ranks.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn fmt_rank(r: f64) -> String {
    if r.is_finite() {
        format!("{r}")
    } else {
        "nan".into()
    }
}

struct Table {
    title: String,
    rows: Vec<(Method, Vec<String>)>,
}

fn tables(report: &ComparisonReport) -> Vec<(String, Table)> {
    let mut out = Vec::new();
    for (i, ds) in report.datasets.iter().enumerate() {
        let base = format!("{:02}_{}", i + 1, slug(&ds.name));
        let values = ds
            .cells
            .iter()
            .map(|c| {
                let cols = Criterion::ALL
                    .iter()
                    .map(|&k| match &c.values {
                        Some(v) => v.get(k).to_string(),
                        None => "error".into(),
                    })
                    .collect();
                (c.method, cols)
            })
            .collect();
        out.push((
            format!("{base}_values"),
            Table {
                title: format!("Results on {}", ds.name),
                rows: values,
            },
        ));
        let ranks = ds
            .cells
            .iter()
            .map(|c| {
                let cols = Criterion::ALL
                    .iter()
                    .map(|&k| {
                        c.ranks
                            .as_ref()
                            .map_or_else(|| "-".into(), |r| fmt_rank(*r.get(k)))
                    })
                    .collect();
                (c.method, cols)
            })
            .collect();
        out.push((
            format!("{base}_ranks"),
            Table {
                title: format!("Ranking on {}", ds.name),
                rows: ranks,
            },
        ));
    }
    let avg = report
        .average_ranks
        .iter()
        .map(|a| {
            (
                a.method,
                Criterion::ALL
                    .iter()
                    .map(|&k| fmt_rank(*a.ranks.get(k)))
                    .collect(),
            )
        })
        .collect();
    out.push((
        "average_ranks".into(),
        Table {
            title: "Average ranking on all datasets".into(),
            rows: avg,
        },
    ));
    out
}

fn render_csv(t: &Table) -> String {
    let mut s = String::from("method");
    for c in Criterion::ALL {
        s.push(',');
        s.push_str(c.id());
    }
    s.push('\n');
    for (m, cols) in &t.rows {
        s.push_str(m.id());
        for v in cols {
            s.push(',');
            s.push_str(v);
        }
        s.push('\n');
    }
    s
}

fn render_markdown(t: &Table) -> String {
    let mut s = format!("### {}\n\n| Initialization method |", t.title);
    for c in Criterion::ALL {
        let _ = write!(s, " {} |", c.label());
    }
    s.push_str("\n|---|");
    for _ in Criterion::ALL {
        s.push_str("---|");
    }
    s.push('\n');
    for (m, cols) in &t.rows {
        let _ = write!(s, "| {} |", m.id());
        for v in cols {
            let _ = write!(s, " {v} |");
        }
        s.push('\n');
    }
    s
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `report.json` and/or `tables/*.csv`, `tables/*.md` under `out_dir`.
pub fn write_report(
    report: &ComparisonReport,
    out_dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    if formats.contains(&ReportFormat::Json) {
        written.push(write_file(out_dir.join("report.json"), &report.to_json()?)?);
    }
    let want_csv = formats.contains(&ReportFormat::Csv);
    let want_md = formats.contains(&ReportFormat::Markdown);
    if want_csv || want_md {
        let dir = out_dir.join("tables");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (stem, table) in tables(report) {
            if want_csv {
                written.push(write_file(
                    dir.join(format!("{stem}.csv")),
                    &render_csv(&table),
                )?);
            }
            if want_md {
                written.push(write_file(
                    dir.join(format!("{stem}.md")),
                    &render_markdown(&table),
                )?);
            }
        }
    }
    Ok(written)
}
