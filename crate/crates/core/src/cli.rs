//! Command-line verbs: run, simulate, bench, report.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chromosome::{Encoding, IndexedChromosome, StandardChromosome};
use crate::datagen::{default_true_set, generate, write_dataset_csv, write_truth, SimResult, SimSpec};
use crate::error::{Error, Result};
use crate::fitness::Dataset;
use crate::ga::{default_threads, Checkpoint, Evolution, GaConfig, RunReport};
use crate::ingest::{load_delimited, IngestSpec};
use crate::predictor_space::{PredictorSpace, TermDescriptor, TermId};
use crate::report::{compare_selections, history_csv, render_report};
use crate::Chromosome;

/// Simulation settings. The true set is either listed or drawn with
/// `default_true_set` when only `n_true` is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_main: u32,
    pub n_samples: usize,
    pub n_true: Option<usize>,
    pub true_terms: Vec<String>,
    pub interaction_fraction: f64,
    pub noise_variance: f64,
    pub threshold: f64,
    pub rng_seed: u64,
    pub complete_hierarchy: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        let s = SimSpec::default();
        SimConfig {
            n_main: s.n_main,
            n_samples: s.n_samples,
            n_true: None,
            true_terms: Vec::new(),
            interaction_fraction: 0.4,
            noise_variance: s.noise_variance,
            threshold: s.threshold,
            rng_seed: 1,
            complete_hierarchy: false,
        }
    }
}

/// Stream used to draw the true set, apart from the data stream.
const TRUTH_STREAM: u64 = 2;

impl SimConfig {
    pub fn spec(&self) -> Result<SimSpec> {
        let space = PredictorSpace::new(self.n_main, true)?;
        let true_terms = if !self.true_terms.is_empty() {
            self.true_terms
                .iter()
                .map(|l| space.encode(TermDescriptor::parse_label(l)?))
                .collect::<Result<Vec<_>>>()?
        } else if let Some(n_true) = self.n_true {
            let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
            rng.set_stream(TRUTH_STREAM);
            default_true_set(self.n_main, n_true, self.interaction_fraction, &mut rng)?
        } else {
            return Err(Error::Config("simulation needs true_terms or n_true".into()));
        };
        Ok(SimSpec {
            n_main: self.n_main,
            n_samples: self.n_samples,
            true_terms,
            noise_variance: self.noise_variance,
            threshold: self.threshold,
            rng_seed: self.rng_seed,
            complete_hierarchy: self.complete_hierarchy,
        })
    }

    pub fn generate(&self) -> Result<SimResult> {
        generate(&self.spec()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Independent runs with seeds `rng_seed, rng_seed + 1, ..`.
    pub repeat: usize,
    pub out_dir: Option<PathBuf>,
    pub ga: GaConfig,
    pub data: Option<IngestSpec>,
    pub simulate: Option<SimConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "run".into(),
            repeat: 1,
            out_dir: None,
            ga: GaConfig::default(),
            data: None,
            simulate: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeat == 0 {
            return Err(Error::Config("repeat must be at least 1".into()));
        }
        match (&self.data, &self.simulate) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::Config("exactly one of [data] and [simulate] is required".into())),
        }
        self.ga.validate()
    }
}

/// Parses TOML, reporting the offending line on failure.
pub fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        let at = line.map_or(String::new(), |l| format!("line {l}: "));
        Error::Config(format!("{}: {at}{}", path.display(), e.message()))
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_experiment(path: &Path) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = parse_toml(&read_text(path)?, path)?;
    if let Some(data) = &mut cfg.data {
        if data.path.is_relative() {
            if let Some(dir) = path.parent() {
                data.path = dir.join(&data.path);
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Everything a `run` invocation writes as its machine-readable report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub experiment: ExperimentConfig,
    pub runs: Vec<RunReport>,
    pub run_seconds: Vec<f64>,
    pub mean_seconds: f64,
    /// Labels of the simulated true terms, when known.
    pub truth: Option<Vec<String>>,
    /// Per run, how many selected terms are true terms.
    pub correct_terms: Option<Vec<usize>>,
}

struct Source {
    dataset: Dataset,
    truth: Option<Vec<TermId>>,
}

fn load_source(cfg: &ExperimentConfig) -> Result<Source> {
    if let Some(spec) = &cfg.data {
        return Ok(Source {
            dataset: load_delimited(spec)?,
            truth: None,
        });
    }
    let sim = cfg.simulate.as_ref().expect("validated");
    let r = sim.generate()?;
    info!("simulated {} rows, positive rate {:.4}", r.dataset.rows(), r.positive_rate);
    Ok(Source {
        dataset: r.dataset.with_standardization(true),
        truth: Some(r.spec.true_terms),
    })
}

/// Options that do not come from the config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub threads: usize,
    pub checkpoint: Option<PathBuf>,
    pub resume: Option<PathBuf>,
}

fn evolve<C: Chromosome>(ga: &GaConfig, dataset: &Dataset, opts: &RunOptions) -> Result<RunReport> {
    let mut evo = match &opts.resume {
        Some(path) => {
            let cp: Checkpoint = serde_json::from_str(&read_text(path)?)?;
            if cp.config != *ga {
                warn!("resuming with the checkpoint's config, which differs from the config file");
            }
            Evolution::<C>::resume(&cp, dataset, opts.threads)?
        }
        None => Evolution::<C>::new(ga.clone(), dataset, opts.threads)?,
    };
    while evo.generation() < evo.config().generations {
        let g = evo.step()?;
        info!(
            "generation {}: best {:?} size {}",
            g.generation, g.best_fitness, g.best_model_size
        );
        if let Some(path) = &opts.checkpoint {
            write_json(path, &evo.checkpoint())?;
        }
    }
    evo.report()
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if cfg.repeat > 1 && (opts.resume.is_some() || opts.checkpoint.is_some()) {
        return Err(Error::Config("checkpoint and resume need repeat = 1".into()));
    }
    let source = load_source(cfg)?;
    let space = source.dataset.space()?;
    let mut runs = Vec::with_capacity(cfg.repeat);
    for i in 0..cfg.repeat {
        let ga = GaConfig {
            rng_seed: cfg.ga.rng_seed.wrapping_add(i as u64),
            ..cfg.ga.clone()
        };
        let report = match ga.encoding {
            Encoding::Standard => evolve::<StandardChromosome>(&ga, &source.dataset, opts)?,
            Encoding::Indexed => evolve::<IndexedChromosome>(&ga, &source.dataset, opts)?,
        };
        runs.push(report);
    }
    let run_seconds: Vec<f64> = runs.iter().map(|r| r.total_seconds).collect();
    let mean_seconds = run_seconds.iter().sum::<f64>() / run_seconds.len() as f64;
    let correct_terms = source.truth.as_ref().map(|truth| {
        runs.iter()
            .map(|r| r.best_term_ids().iter().filter(|t| truth.contains(t)).count())
            .collect()
    });
    Ok(ExperimentOutput {
        experiment: cfg.clone(),
        truth: source
            .truth
            .map(|t| t.iter().map(|&id| source.dataset.term_label(&space, id)).collect()),
        correct_terms,
        runs,
        run_seconds,
        mean_seconds,
    })
}

pub fn render_experiment(out: &ExperimentOutput) -> String {
    let mut s = String::new();
    for (i, r) in out.runs.iter().enumerate() {
        if out.runs.len() > 1 {
            s.push_str(&format!("== run {} ==\n", i + 1));
        }
        s.push_str(&render_report(r));
        if let (Some(truth), Some(correct)) = (&out.truth, &out.correct_terms) {
            s.push_str(&format!("correct terms: {} of {}\n", correct[i], truth.len()));
        }
        s.push('\n');
    }
    let times: Vec<String> = out.run_seconds.iter().map(|t| format!("{t:.3}")).collect();
    s.push_str(&format!(
        "run times (s): {}  mean {:.3}\n",
        times.join(" "),
        out.mean_seconds
    ));
    s
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingChoice {
    Standard,
    Indexed,
    Both,
}

impl EncodingChoice {
    fn encodings(self) -> Vec<Encoding> {
        match self {
            EncodingChoice::Standard => vec![Encoding::Standard],
            EncodingChoice::Indexed => vec![Encoding::Indexed],
            EncodingChoice::Both => vec![Encoding::Standard, Encoding::Indexed],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub n_main: u32,
    pub n_true: usize,
    pub max_length: usize,
    #[serde(default = "both")]
    pub encoding: EncodingChoice,
}

fn both() -> EncodingChoice {
    EncodingChoice::Both
}

/// A benchmark grid: GA settings shared by every cell, plus the cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchGrid {
    pub ga: GaConfig,
    pub simulate: SimConfig,
    /// Cells whose estimated working set exceeds this many MiB are not run.
    pub memory_budget_mb: Option<f64>,
    #[serde(rename = "cell")]
    pub cells: Vec<GridCell>,
}

impl Default for BenchGrid {
    fn default() -> Self {
        BenchGrid {
            ga: GaConfig::default(),
            simulate: SimConfig::default(),
            memory_budget_mb: None,
            cells: Vec::new(),
        }
    }
}

impl BenchGrid {
    /// The five simulated-data settings with both encodings.
    pub fn builtin() -> Self {
        let cells = [(5, 3, 15), (20, 19, 50), (30, 28, 100), (40, 35, 100), (50, 45, 100)]
            .into_iter()
            .map(|(n_main, n_true, max_length)| GridCell {
                n_main,
                n_true,
                max_length,
                encoding: EncodingChoice::Both,
            })
            .collect();
        BenchGrid {
            cells,
            ..Default::default()
        }
    }
}

/// Rough peak bytes for fitting the largest model an encoding can represent:
/// the full and training design matrices, a weighted copy, and the Gram matrix.
pub fn estimated_cell_bytes(n_samples: usize, n_main: u32, encoding: Encoding, max_length: usize) -> Option<f64> {
    let total = crate::predictor_space::term_count(n_main, true).ok()? as f64;
    let p = 1.0 + match encoding {
        Encoding::Standard => total,
        Encoding::Indexed => (max_length as f64).min(total),
    };
    let n = n_samples as f64;
    Some(8.0 * (3.0 * n * p + p * p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n_main: u32,
    pub total_terms: u32,
    pub max_length: usize,
    pub encoding: Encoding,
    pub status: CellStatus,
    pub total_correct: usize,
    pub correct_terms: Option<usize>,
    pub model_size: Option<usize>,
    /// Full-data AIC of the selected model.
    pub aic: Option<f64>,
    pub best_fitness: Option<f64>,
    pub run_seconds: Option<f64>,
    pub true_terms: Vec<String>,
    pub selected_terms: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    OverBudget { estimated_mb: f64 },
    Failed { message: String },
}

pub fn run_cell(grid: &BenchGrid, cell: &GridCell, encoding: Encoding, seed: u64) -> CellResult {
    let total_terms = crate::predictor_space::term_count(cell.n_main, true).unwrap_or(0);
    let mut out = CellResult {
        n_main: cell.n_main,
        total_terms,
        max_length: cell.max_length,
        encoding,
        status: CellStatus::Ok,
        total_correct: cell.n_true,
        correct_terms: None,
        model_size: None,
        aic: None,
        best_fitness: None,
        run_seconds: None,
        true_terms: Vec::new(),
        selected_terms: Vec::new(),
    };
    let sim = SimConfig {
        n_main: cell.n_main,
        n_true: Some(cell.n_true),
        true_terms: Vec::new(),
        rng_seed: seed,
        ..grid.simulate.clone()
    };
    if let Some(budget) = grid.memory_budget_mb {
        let bytes = estimated_cell_bytes(sim.n_samples, cell.n_main, encoding, cell.max_length).unwrap_or(f64::INFINITY);
        let mb = bytes / (1024.0 * 1024.0);
        if mb > budget {
            out.status = CellStatus::OverBudget { estimated_mb: mb };
            return out;
        }
    }
    let result = (|| -> Result<()> {
        let r = sim.generate()?;
        let dataset = r.dataset.with_standardization(true);
        let space = dataset.space()?;
        out.total_correct = r.spec.true_terms.len();
        out.true_terms = r.spec.true_terms.iter().map(|&t| space.label(t)).collect();
        let ga = GaConfig {
            encoding,
            max_length: cell.max_length,
            rng_seed: seed,
            ..grid.ga.clone()
        };
        let started = Instant::now();
        let report = crate::ga::run_with_threads(&ga, &dataset, 1)?;
        out.run_seconds = Some(started.elapsed().as_secs_f64());
        let ids = report.best_term_ids();
        out.correct_terms = Some(ids.iter().filter(|t| r.spec.true_terms.contains(t)).count());
        out.model_size = Some(ids.len());
        out.aic = report.final_fit.as_ref().map(|f| f.aic);
        out.best_fitness = report.best_fitness;
        out.selected_terms = report.best_labels;
        Ok(())
    })();
    if let Err(e) = result {
        out.status = CellStatus::Failed { message: e.to_string() };
    }
    out
}

/// Runs every cell and encoding; failures are recorded per cell.
pub fn run_bench(grid: &BenchGrid, seed: u64, jobs: usize) -> Result<Vec<CellResult>> {
    grid.ga.validate()?;
    let tasks: Vec<(&GridCell, Encoding)> = grid
        .cells
        .iter()
        .flat_map(|c| c.encoding.encodings().into_iter().map(move |e| (c, e)))
        .collect();
    let work = |&(cell, enc): &(&GridCell, Encoding)| run_cell(grid, cell, enc, seed);
    if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        Ok(pool.install(|| tasks.par_iter().map(work).collect()))
    } else {
        Ok(tasks.iter().map(work).collect())
    }
}

pub fn render_bench(cells: &[CellResult]) -> String {
    let mut s = format!(
        "{:<10} {:>14} {:>14} {:>11} {:>10} {:>13}\n",
        "", "Correct terms", "Total correct", "Model size", "AIC", "Run time (s)"
    );
    let mut last = None;
    for c in cells {
        if last != Some((c.n_main, c.max_length)) {
            s.push_str(&format!(
                "{} main effects - {} total predictors (l = {})\n",
                c.n_main, c.total_terms, c.max_length
            ));
            last = Some((c.n_main, c.max_length));
        }
        let name = match c.encoding {
            Encoding::Standard => "Standard",
            Encoding::Indexed => "Indexed",
        };
        let na = "N.A.";
        match &c.status {
            CellStatus::Ok => s.push_str(&format!(
                "{:<10} {:>14} {:>14} {:>11} {:>10} {:>13}\n",
                name,
                c.correct_terms.map_or(na.into(), |v| v.to_string()),
                c.total_correct,
                c.model_size.map_or(na.into(), |v| v.to_string()),
                c.aic.map_or(na.into(), |v| format!("{v:.1}")),
                c.run_seconds.map_or(na.into(), |v| format!("{v:.2}")),
            )),
            CellStatus::OverBudget { estimated_mb } => s.push_str(&format!(
                "{:<10} {:>14} {:>14} {:>11} {:>10} {:>13}  (estimated {estimated_mb:.0} MiB over budget)\n",
                name, na, na, na, na, na
            )),
            CellStatus::Failed { message } => s.push_str(&format!(
                "{:<10} {:>14} {:>14} {:>11} {:>10} {:>13}  (failed: {message})\n",
                name, na, na, na, na, na
            )),
        }
    }
    s
}

#[derive(Parser, Debug)]
#[command(name = "ga-varsel", version, about = "GA variable selection with interaction terms")]
pub struct Cli {
    /// Worker threads (also capped by GA_VARSEL_THREADS).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a GA experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Write a resumable checkpoint after every generation.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from a checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Generate a simulated dataset and its truth file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare both encodings over a grid of simulated datasets.
    Bench {
        /// Grid file; the built-in five-setting grid when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Skip cells whose estimated working set exceeds this many MiB.
        #[arg(long)]
        memory_budget: Option<f64>,
        /// Overrides the generation count of every cell.
        #[arg(long)]
        generations: Option<usize>,
    },
    /// Render one report, or compare the selections of two.
    Report {
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 1,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn threads(jobs: Option<usize>) -> usize {
    let cap = default_threads();
    jobs.map_or(cap, |j| j.clamp(1, cap.max(1)))
}

pub fn execute(cli: Cli) -> std::result::Result<(), CliError> {
    let jobs = threads(cli.jobs);
    match cli.command {
        Command::Run {
            config,
            common,
            checkpoint,
            resume,
        } => {
            let mut cfg = load_experiment(&config)?;
            if let Some(seed) = common.seed {
                cfg.ga.rng_seed = seed;
                if let Some(sim) = &mut cfg.simulate {
                    sim.rng_seed = seed;
                }
            }
            let out_dir = common.out_dir.or(cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
            ensure_dir(&out_dir)?;
            let opts = RunOptions {
                threads: jobs,
                checkpoint,
                resume,
            };
            let out = run_experiment(&cfg, &opts)?;
            let text = render_experiment(&out);
            write_json(&out_dir.join(format!("{}.json", cfg.name)), &out)?;
            write_text(&out_dir.join(format!("{}.txt", cfg.name)), &text)?;
            if let Some(r) = out.runs.first() {
                write_text(&out_dir.join(format!("{}.history.csv", cfg.name)), &history_csv(r))?;
            }
            print!("{text}");
        }
        Command::Simulate { config, common } => {
            let mut sim: SimConfig = parse_toml(&read_text(&config)?, &config)?;
            if let Some(seed) = common.seed {
                sim.rng_seed = seed;
            }
            let out_dir = common.out_dir.unwrap_or_else(|| PathBuf::from("."));
            ensure_dir(&out_dir)?;
            let r = sim.generate()?;
            let space = r.spec.space()?;
            write_dataset_csv(&r.dataset, &out_dir.join("sim.csv"), "y")?;
            write_truth(&r.spec.true_terms, &space, &out_dir.join("sim.truth"))?;
            println!(
                "wrote {} rows x {} main effects; {} true terms; positive rate {:.4}",
                r.dataset.rows(),
                r.dataset.n_main(),
                r.spec.true_terms.len(),
                r.positive_rate
            );
        }
        Command::Bench {
            config,
            common,
            memory_budget,
            generations,
        } => {
            let mut grid = match &config {
                Some(path) => parse_toml::<BenchGrid>(&read_text(path)?, path)?,
                None => BenchGrid::builtin(),
            };
            if memory_budget.is_some() {
                grid.memory_budget_mb = memory_budget;
            }
            if let Some(g) = generations {
                grid.ga.generations = g;
            }
            let seed = common.seed.unwrap_or(grid.ga.rng_seed);
            let cells = run_bench(&grid, seed, jobs)?;
            let text = render_bench(&cells);
            if let Some(dir) = common.out_dir {
                ensure_dir(&dir)?;
                write_json(&dir.join("bench.json"), &cells)?;
                write_text(&dir.join("bench.txt"), &text)?;
            }
            print!("{text}");
        }
        Command::Report { files, out_dir } => {
            let outputs = files
                .iter()
                .map(|f| {
                    let text = read_text(f)?;
                    serde_json::from_str::<ExperimentOutput>(&text)
                        .map_err(|e| Error::Parse { path: f.clone(), message: e.to_string() })
                })
                .collect::<Result<Vec<_>>>()?;
            for (f, out) in files.iter().zip(&outputs) {
                println!("# {}", f.display());
                print!("{}", render_experiment(out));
                let stem = f.file_stem().map_or("report".into(), |s| s.to_string_lossy().into_owned());
                for (i, r) in out.runs.iter().enumerate() {
                    let csv = history_csv(r);
                    match &out_dir {
                        Some(dir) => {
                            ensure_dir(dir)?;
                            write_text(&dir.join(format!("{stem}.run{}.history.csv", i + 1)), &csv)?;
                        }
                        None => print!("{csv}"),
                    }
                }
            }
            if let [a, b] = outputs.as_slice() {
                let (ra, rb) = (a.runs.first(), b.runs.first());
                if let (Some(ra), Some(rb)) = (ra, rb) {
                    println!();
                    print!(
                        "{}",
                        compare_selections(&ra.config.encoding.to_string(), &ra.best_labels, &rb.config.encoding.to_string(), &rb.best_labels)
                    );
                }
            }
        }
    }
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
