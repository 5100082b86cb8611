//! Command-line front end: `learn`, `gdpa-check`, `classify` and `benchmark`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{pdcone_with_objective, PdConeParams};
use crate::data::{
    cross_val_split, default_fold_count, load_any, normalize, split_folds, Dataset, Manifest,
    Normalizer,
};
use crate::error::{Error, Result};
use crate::graph::{check_balance_matrix, connected_components, Balance, Color, Coloring};
use crate::knn::{accuracy, DEFAULT_NEIGHBORS};
use crate::matrix::MetricMatrix;
use crate::objectives::{Objective, ObjectiveKind};
use crate::optimizer::{sgml_with_log, PhaseTimings, SgmlParams, Termination};
use crate::spectral::{gdpa_scalars, gershgorin, jacobi_eigen, scaled_gershgorin, GdpaScalars};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_UNBALANCED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Alignment deviation accepted by `gdpa-check`, relative to `max(1, |lambda_min|)`.
pub const ALIGNMENT_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "sgml", version, about = "Signed-graph metric learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a metric matrix from a dataset.
    Learn(LearnArgs),
    /// Check disc alignment of a balanced-graph Laplacian stored as JSON.
    GdpaCheck(GdpaCheckArgs),
    /// Learn a metric and evaluate a k-NN classifier with it.
    Classify(ClassifyArgs),
    /// Run every (dataset, objective, scheme, fold) job of a manifest.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sgml,
    Pdcone,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Sgml => "sgml",
            Scheme::Pdcone => "pdcone",
        }
    }
}

fn parse_objective(s: &str) -> std::result::Result<ObjectiveKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Optimizer settings shared by every subcommand that learns a metric.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Scheme::Sgml)]
    pub scheme: Scheme,
    /// Trace budget; defaults to the feature count.
    #[arg(long = "C", value_name = "C")]
    pub trace_budget: Option<f64>,
    /// Lower bound on every disc left-end (eigenvalue floor for pdcone).
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    pub main_tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_main_iter: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub sub_tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_sub_iter: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lobpcg_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub lobpcg_max_iter: usize,
    #[arg(long, default_value_t = 0.5)]
    pub nr_tol: f64,
    /// Keep every edge positive (sgml only).
    #[arg(long)]
    pub positive_only: bool,
    /// Use the data as loaded, without z-scoring and row normalization.
    #[arg(long)]
    pub raw: bool,
}

impl SolverArgs {
    pub fn sgml_params(&self) -> SgmlParams {
        SgmlParams {
            trace_budget: self.trace_budget,
            disc_margin: self.rho,
            main_tol: self.main_tol,
            max_main_iter: self.max_main_iter,
            sub_tol: self.sub_tol,
            max_sub_iter: self.max_sub_iter,
            lobpcg_tol: self.lobpcg_tol,
            lobpcg_max_iter: self.lobpcg_max_iter,
            nr_tol: self.nr_tol,
            seed: self.seed,
            allow_negative_edges: !self.positive_only,
            ..SgmlParams::default()
        }
    }

    pub fn pdcone_params(&self) -> PdConeParams {
        PdConeParams {
            eig_floor: self.rho,
            trace_budget: self.trace_budget,
            main_tol: self.main_tol,
            max_main_iter: self.max_main_iter,
            seed: self.seed,
            ..PdConeParams::default()
        }
    }

    fn prepare(&self, data: Dataset) -> Result<Dataset> {
        if self.raw {
            Ok(data)
        } else {
            normalize(&data)
        }
    }

    /// Scales both sets with moments fitted on `train` alone.
    fn prepare_split(&self, train: Dataset, test: Dataset) -> Result<(Dataset, Dataset)> {
        if self.raw {
            return Ok((train, test));
        }
        let scaler = Normalizer::fit(&train)?;
        Ok((scaler.apply(&train)?, scaler.apply(&test)?))
    }
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// LibSVM or CSV (by extension) dataset.
    pub data: PathBuf,
    #[arg(long, value_parser = parse_objective)]
    pub objective: ObjectiveKind,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Metric output file.
    #[arg(long, default_value = "metric.json")]
    pub out: PathBuf,
    /// Run report output file; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GdpaCheckArgs {
    /// JSON matrix: `{"dim": K, "entries": [...]}` or an array of rows.
    pub matrix: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Training set (or the whole set with `--cv10`).
    pub train: PathBuf,
    /// Test set.
    #[arg(long, conflicts_with = "cv10", required_unless_present = "cv10")]
    pub test: Option<PathBuf>,
    /// Ten random 90/10 splits with seeds 0 to 9; reports the mean accuracy.
    #[arg(long)]
    pub cv10: bool,
    #[arg(long, value_parser = parse_objective)]
    pub objective: ObjectiveKind,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = DEFAULT_NEIGHBORS)]
    pub k: usize,
    /// Report output file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// JSON array of `{name, path, format}` entries.
    pub manifest: PathBuf,
    /// Comma-separated objectives.
    #[arg(long, value_delimiter = ',', value_parser = parse_objective,
          default_value = "mcml,deml,lsml,lmnn,glr")]
    pub objectives: Vec<ObjectiveKind>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sgml,pdcone")]
    pub schemes: Vec<Scheme>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Only the first this many folds of each dataset.
    #[arg(long)]
    pub max_folds: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value = "bench-out")]
    pub out: PathBuf,
}

/// Serialized metric: row-major entries plus the certificate of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFile {
    pub dim: usize,
    pub entries: Vec<f64>,
    /// Node colors when the matrix is a balanced-graph Laplacian.
    pub coloring: Option<Vec<Color>>,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub lambda_min: f64,
    pub trace: f64,
    pub balanced: bool,
}

impl MetricFile {
    pub fn new(m: &MetricMatrix, coloring: Option<&Coloring>, lambda_min: f64) -> Self {
        let coloring = coloring
            .cloned()
            .or_else(|| check_balance_matrix(m).coloring().cloned());
        MetricFile {
            dim: m.dim(),
            entries: m.as_row_major().to_vec(),
            certificate: Certificate {
                lambda_min,
                trace: m.trace(),
                balanced: coloring.is_some(),
            },
            coloring: coloring.map(|c| c.0),
        }
    }

    pub fn matrix(&self) -> Result<MetricMatrix> {
        MetricMatrix::from_row_major(self.dim, self.entries.clone())
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Flat { dim: usize, entries: Vec<f64> },
    Rows(Vec<Vec<f64>>),
}

pub fn read_matrix(path: &Path) -> Result<MetricMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match serde_json::from_str::<MatrixInput>(&text)? {
        MatrixInput::Flat { dim, entries } => MetricMatrix::from_row_major(dim, entries),
        MatrixInput::Rows(rows) => MetricMatrix::from_rows(&rows),
    }
}

/// Wall-clock milliseconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WallMs {
    pub total: f64,
    pub eigen: f64,
    pub lp: f64,
    pub gradient: f64,
}

impl From<&PhaseTimings> for WallMs {
    fn from(t: &PhaseTimings) -> Self {
        let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
        WallMs {
            total: ms(t.total),
            eigen: ms(t.eigen),
            lp: ms(t.lp),
            gradient: ms(t.gradient),
        }
    }
}

/// Summary of one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scheme: Scheme,
    pub objective: String,
    pub dataset: String,
    pub fold: Option<usize>,
    pub final_objective: f64,
    pub iterations: usize,
    pub wall_ms: WallMs,
    pub lambda_min: f64,
    pub trace: f64,
    pub termination: Termination,
    pub accuracy: Option<f64>,
}

/// A learned metric together with its run report.
#[derive(Debug, Clone)]
pub struct Learned {
    pub m: MetricMatrix,
    pub coloring: Option<Coloring>,
    pub report: RunReport,
}

/// Runs the selected scheme on already prepared data.
pub fn learn_metric(data: &Dataset, kind: ObjectiveKind, solver: &SolverArgs) -> Result<Learned> {
    let objective = Objective::new(kind, data, solver.seed)?;
    match solver.scheme {
        Scheme::Sgml => {
            let r = sgml_with_log(data, &objective, &solver.sgml_params())?;
            Ok(Learned {
                report: RunReport {
                    scheme: Scheme::Sgml,
                    objective: kind.to_string(),
                    dataset: data.name.clone(),
                    fold: None,
                    final_objective: r.objective,
                    iterations: r.main_iterations,
                    wall_ms: WallMs::from(&r.log.timings),
                    lambda_min: r.lambda_min,
                    trace: r.trace,
                    termination: r.termination,
                    accuracy: None,
                },
                m: r.m,
                coloring: Some(r.coloring),
            })
        }
        Scheme::Pdcone => {
            let r = pdcone_with_objective(data, &objective, &solver.pdcone_params())?;
            Ok(Learned {
                report: RunReport {
                    scheme: Scheme::Pdcone,
                    objective: kind.to_string(),
                    dataset: data.name.clone(),
                    fold: None,
                    final_objective: r.objective,
                    iterations: r.iterations,
                    wall_ms: WallMs::from(&r.timings),
                    lambda_min: r.lambda_min,
                    trace: r.trace,
                    termination: r.termination,
                    accuracy: None,
                },
                m: r.m,
                coloring: None,
            })
        }
    }
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_for(termination: Termination) -> i32 {
    if termination == Termination::DegenerateAbort {
        EXIT_DEGENERATE
    } else {
        EXIT_OK
    }
}

pub fn cmd_learn(args: &LearnArgs) -> Result<i32> {
    let data = args.solver.prepare(load_any(&args.data)?)?;
    let learned = learn_metric(&data, args.objective, &args.solver)?;
    let file = MetricFile::new(
        &learned.m,
        learned.coloring.as_ref(),
        learned.report.lambda_min,
    );
    write_json(&file, Some(&args.out))?;
    write_json(&learned.report, args.report.as_deref())?;
    Ok(exit_for(learned.report.termination))
}

/// Outcome of a disc-alignment check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub dim: usize,
    pub lambda_min: f64,
    /// Plain Gershgorin lower bound before scaling.
    pub lower_bound_before: f64,
    /// Lowest scaled disc left-end.
    pub lower_bound_after: f64,
    /// Largest distance of a scaled left-end from its component's first eigenvalue.
    pub max_deviation: f64,
    pub components: usize,
    pub aligned: bool,
}

/// Per-component GDPA scalars from exact first eigenpairs.
pub fn gdpa_check(m: &MetricMatrix) -> Result<AlignmentReport> {
    let coloring = match check_balance_matrix(m) {
        Balance::Balanced(c) => c,
        Balance::Unbalanced { edge } => return Err(Error::Unbalanced(edge.0, edge.1)),
    };
    let k = m.dim();
    let mut s = vec![1.0; k];
    let mut lambda_of = vec![0.0; k];
    let comps = connected_components(m);
    for nodes in &comps {
        let sub = m.submatrix(nodes);
        let pair = jacobi_eigen(&sub).smallest();
        if nodes.len() > 1 {
            let sub_coloring = Coloring(nodes.iter().map(|&i| coloring.color(i)).collect());
            let sc = gdpa_scalars(&sub, &sub_coloring, &pair)?;
            for (&i, &v) in nodes.iter().zip(sc.values()) {
                s[i] = v;
            }
        }
        for &i in nodes {
            lambda_of[i] = pair.value;
        }
    }
    let scalars = GdpaScalars::new(s)?;
    let ends = scaled_gershgorin(m, &scalars).left_ends();
    let max_deviation = ends
        .iter()
        .zip(&lambda_of)
        .map(|(l, lam)| (l - lam).abs())
        .fold(0.0, f64::max);
    let lambda_min = lambda_of.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(AlignmentReport {
        dim: k,
        lambda_min,
        lower_bound_before: gershgorin(m).lower_bound,
        lower_bound_after: ends.iter().copied().fold(f64::INFINITY, f64::min),
        max_deviation,
        components: comps.len(),
        aligned: max_deviation <= ALIGNMENT_TOL * lambda_min.abs().max(1.0),
    })
}

pub fn cmd_gdpa_check(args: &GdpaCheckArgs) -> Result<i32> {
    let m = read_matrix(&args.matrix)?;
    let report = gdpa_check(&m)?;
    write_json(&report, None)?;
    Ok(if report.aligned { EXIT_OK } else { EXIT_FAILURE })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub k: usize,
    pub mean_accuracy: f64,
    pub runs: Vec<RunReport>,
}

pub fn cmd_classify(args: &ClassifyArgs) -> Result<i32> {
    let train = load_any(&args.train)?;
    let mut runs = Vec::new();
    if args.cv10 {
        let splits = cross_val_split(train.len(), 0.9, 0..10)?;
        for (n, split) in splits.iter().enumerate() {
            let (tr, te) = args
                .solver
                .prepare_split(train.subset(&split.train), train.subset(&split.test))?;
            let mut run = classify_once(&tr, &te, args)?;
            run.fold = Some(n);
            runs.push(run);
        }
    } else {
        let test_path = args.test.as_ref().expect("clap requires --test without --cv10");
        let (tr, te) = args.solver.prepare_split(train, load_any(test_path)?)?;
        runs.push(classify_once(&tr, &te, args)?);
    }
    let mean_accuracy =
        runs.iter().filter_map(|r| r.accuracy).sum::<f64>() / runs.len() as f64;
    let code = runs
        .iter()
        .map(|r| exit_for(r.termination))
        .max()
        .unwrap_or(EXIT_OK);
    write_json(
        &ClassifyReport {
            k: args.k,
            mean_accuracy,
            runs,
        },
        args.out.as_deref(),
    )?;
    Ok(code)
}

fn classify_once(train: &Dataset, test: &Dataset, args: &ClassifyArgs) -> Result<RunReport> {
    let learned = learn_metric(train, args.objective, &args.solver)?;
    let mut report = learned.report;
    report.accuracy = Some(accuracy(train, test, &learned.m, args.k)?);
    Ok(report)
}

/// One row of the per-job benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub objective: String,
    pub scheme: Scheme,
    pub fold: usize,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

/// Fold-averaged results of one (dataset, objective, scheme) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub dataset: String,
    pub objective: String,
    pub scheme: Scheme,
    pub folds: usize,
    pub failed: usize,
    pub mean_objective: Option<f64>,
    pub mean_total_ms: Option<f64>,
    pub eigen_fraction: Option<f64>,
    /// Mean sgml time over mean pdcone time for the same dataset and objective.
    pub speed_ratio: Option<f64>,
}

struct Job {
    dataset: usize,
    kind: ObjectiveKind,
    scheme: Scheme,
    fold: usize,
}

/// Runs a benchmark suite and returns per-job rows (sorted) and cell summaries.
pub fn run_benchmark(
    datasets: &[Dataset],
    objectives: &[ObjectiveKind],
    schemes: &[Scheme],
    solver: &SolverArgs,
    max_folds: Option<usize>,
) -> Result<(Vec<BenchRow>, Vec<BenchSummary>)> {
    let mut plans = Vec::new();
    for d in datasets {
        plans.push(split_folds(d.len(), default_fold_count(d.len()), solver.seed)?);
    }
    let mut jobs = Vec::new();
    for (di, plan) in plans.iter().enumerate() {
        let folds = max_folds.map_or(plan.fold_count, |f| f.min(plan.fold_count));
        for &kind in objectives {
            for &scheme in schemes {
                for fold in 0..folds {
                    jobs.push(Job {
                        dataset: di,
                        kind,
                        scheme,
                        fold,
                    });
                }
            }
        }
    }
    let mut rows: Vec<BenchRow> = jobs
        .par_iter()
        .map(|job| {
            let data = &datasets[job.dataset];
            let subset = data.subset(&plans[job.dataset].fold(job.fold));
            let solver = SolverArgs {
                scheme: job.scheme,
                ..solver.clone()
            };
            let result = solver
                .prepare(subset)
                .and_then(|s| learn_metric(&s, job.kind, &solver));
            let (report, error) = match result {
                Ok(l) => {
                    let mut r = l.report;
                    r.dataset = data.name.clone();
                    r.fold = Some(job.fold);
                    (Some(r), None)
                }
                Err(e) => (None, Some(e.to_string())),
            };
            BenchRow {
                dataset: data.name.clone(),
                objective: job.kind.to_string(),
                scheme: job.scheme,
                fold: job.fold,
                report,
                error,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (&a.dataset, &a.objective, a.scheme, a.fold).cmp(&(&b.dataset, &b.objective, b.scheme, b.fold))
    });
    Ok((rows.clone(), summarize(&rows)))
}

fn summarize(rows: &[BenchRow]) -> Vec<BenchSummary> {
    let mut cells: BTreeMap<(String, String, Scheme), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        cells
            .entry((r.dataset.clone(), r.objective.clone(), r.scheme))
            .or_default()
            .push(r);
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let mut out: Vec<BenchSummary> = cells
        .into_iter()
        .map(|((dataset, objective, scheme), rs)| {
            let ok: Vec<&RunReport> = rs.iter().filter_map(|r| r.report.as_ref()).collect();
            let objs: Vec<f64> = ok.iter().map(|r| r.final_objective).collect();
            let totals: Vec<f64> = ok.iter().map(|r| r.wall_ms.total).collect();
            let eigen: f64 = ok.iter().map(|r| r.wall_ms.eigen).sum();
            let total: f64 = totals.iter().sum();
            BenchSummary {
                dataset,
                objective,
                scheme,
                folds: rs.len(),
                failed: rs.len() - ok.len(),
                mean_objective: mean(&objs),
                mean_total_ms: mean(&totals),
                eigen_fraction: (total > 0.0).then(|| eigen / total),
                speed_ratio: None,
            }
        })
        .collect();
    let times: BTreeMap<(String, String, Scheme), f64> = out
        .iter()
        .filter_map(|s| {
            s.mean_total_ms
                .map(|t| ((s.dataset.clone(), s.objective.clone(), s.scheme), t))
        })
        .collect();
    for s in &mut out {
        let key = |scheme| (s.dataset.clone(), s.objective.clone(), scheme);
        if let (Some(a), Some(b)) = (times.get(&key(Scheme::Sgml)), times.get(&key(Scheme::Pdcone))) {
            if *b > 0.0 {
                s.speed_ratio = Some(a / b);
            }
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn rows_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "dataset,objective,scheme,fold,final_objective,iterations,lambda_min,trace,termination,total_ms,eigen_ms,lp_ms,gradient_ms,error\n",
    );
    for r in rows {
        let rep = r.report.as_ref();
        let term = rep
            .map(|x| serde_json::to_value(x.termination).ok())
            .and_then(|v| v.and_then(|v| v.as_str().map(str::to_string)))
            .unwrap_or_default();
        out += &format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_field(&r.dataset),
            r.objective,
            r.scheme.name(),
            r.fold,
            opt(rep.map(|x| x.final_objective)),
            rep.map(|x| x.iterations.to_string()).unwrap_or_default(),
            opt(rep.map(|x| x.lambda_min)),
            opt(rep.map(|x| x.trace)),
            term,
            opt(rep.map(|x| x.wall_ms.total)),
            opt(rep.map(|x| x.wall_ms.eigen)),
            opt(rep.map(|x| x.wall_ms.lp)),
            opt(rep.map(|x| x.wall_ms.gradient)),
            csv_field(r.error.as_deref().unwrap_or("")),
        );
    }
    out
}

pub fn summary_csv(summary: &[BenchSummary]) -> String {
    let mut out = String::from(
        "dataset,objective,scheme,folds,failed,mean_objective,mean_total_ms,eigen_fraction,speed_ratio\n",
    );
    for s in summary {
        out += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            csv_field(&s.dataset),
            s.objective,
            s.scheme.name(),
            s.folds,
            s.failed,
            opt(s.mean_objective),
            opt(s.mean_total_ms),
            opt(s.eigen_fraction),
            opt(s.speed_ratio),
        );
    }
    out
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<i32> {
    let manifest = Manifest::load(&args.manifest)?;
    let datasets = manifest
        .datasets
        .iter()
        .map(|e| e.load())
        .collect::<Result<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let (rows, summary) = pool.install(|| {
        run_benchmark(
            &datasets,
            &args.objectives,
            &args.schemes,
            &args.solver,
            args.max_folds,
        )
    })?;
    log::info!("benchmark finished in {:?}", start.elapsed());
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let write = |name: &str, text: String| -> Result<()> {
        let p = args.out.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write("results.csv", rows_csv(&rows))?;
    write("summary.csv", summary_csv(&summary))?;
    write(
        "results.json",
        serde_json::to_string_pretty(&serde_json::json!({ "rows": rows, "summary": summary }))? + "\n",
    )?;
    write_json(&summary, None)?;
    Ok(EXIT_OK)
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Unbalanced(..) => "unbalanced",
        Error::DegenerateEigenvector { .. } | Error::SignPatternViolation { .. } => "degenerate",
        Error::Io { .. } => "io",
        Error::Parse { .. } | Error::Json(_) => "parse",
        Error::InvalidParameter(_) => "invalid-parameter",
        _ => "error",
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Unbalanced(..) => EXIT_UNBALANCED,
        Error::DegenerateEigenvector { .. } | Error::SignPatternViolation { .. } => EXIT_DEGENERATE,
        _ => EXIT_FAILURE,
    }
}

/// Runs a parsed command and maps errors to exit codes, reporting them as
/// JSON on stderr.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Learn(a) => cmd_learn(a),
        Command::GdpaCheck(a) => cmd_gdpa_check(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let mut payload = serde_json::json!({
                "error": error_kind(&e),
                "message": e.to_string(),
            });
            if let Error::Unbalanced(i, j) = e {
                payload["edge"] = serde_json::json!([i, j]);
            }
            let _ = writeln!(std::io::stderr(), "{payload}");
            exit_code_for(&e)
        }
    }
}

/// Full entry point: logging setup, argument parsing and dispatch.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("GDPA_LOG", "warn"))
        .try_init();
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}
