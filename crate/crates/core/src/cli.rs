//! The `newtonnet` command.
//!
//! Exit codes: 0 on success, 1 for usage, input and configuration errors,
//! 2 when the numerics fail (non-finite loss, eigensolver breakdown).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::csbm::{self, CsbmConfig};
use crate::error::Result;
use crate::experiments::{
    bench_k_scaling, frequency_importance_sweep, run_delta_s_study, run_homophily_study,
    verify_transition_phase, BenchKConfig, DeltaSStudyConfig, HomophilyStudyConfig, HomophilyTrialReport,
    ImportanceSweepConfig, TheoremFilterSpec, TheoremTrialReport, TransitionConfig,
};
use crate::filter::{equal_spaced_nodes, FilterExport};
use crate::graph::random_split;
use crate::io::{read_json, validate_graph_file, write_atomic, write_graph, write_json};
use crate::model::{train, TrainConfig, TrainReport};

/// Points sampled by `export-filter`.
pub const CURVE_POINTS: usize = 200;

#[derive(Debug, Parser)]
#[command(name = "newtonnet", version, about = "Newton-interpolation spectral graph filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a two-class CSBM graph and write it as JSON + feature CSV.
    CsbmGen {
        /// Nodes per class.
        #[arg(long)]
        n: usize,
        /// Feature dimension.
        #[arg(long)]
        f: usize,
        #[arg(long, default_value_t = 5.0)]
        d: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train NewtonNet on a graph file.
    Train {
        #[arg(long)]
        graph: PathBuf,
        /// Training configuration (JSON); defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the band-filter frequency-importance sweep.
    Importance {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the importance-vs-h table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo checks of the homophily and frequency relations.
    VerifyTheory {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Median epoch time for several filter orders.
    BenchK {
        #[arg(long)]
        graph: PathBuf,
        /// Comma-separated filter orders.
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a trained filter on [0, 2] as `lambda,g_lambda` CSV.
    ExportFilter {
        /// A `train` report or a bare `{"q","t","a"}` filter file.
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Which {
    Lemma31,
    Thm32,
    Thm33,
}

/// Configuration file of the `train` command: the training configuration
/// plus the split fractions. The split is drawn with the training seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainJob {
    #[serde(flatten)]
    pub model: TrainConfig,
    pub split: [f64; 3],
}

// `flatten` would let unknown keys through, so `split` is taken out by hand
// and the rest must parse as a strict TrainConfig.
impl<'de> Deserialize<'de> for TrainJob {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut map = serde_json::Map::<String, serde_json::Value>::deserialize(d)?;
        let split = match map.remove("split") {
            Some(v) => serde_json::from_value(v).map_err(D::Error::custom)?,
            None => default_split(),
        };
        let model = serde_json::from_value(serde_json::Value::Object(map)).map_err(D::Error::custom)?;
        Ok(TrainJob { model, split })
    }
}

fn default_split() -> [f64; 3] {
    [0.6, 0.2, 0.2]
}

impl Default for TrainJob {
    fn default() -> Self {
        TrainJob { model: TrainConfig::default(), split: default_split() }
    }
}

/// Output of the `train` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutput {
    pub config: TrainJob,
    pub seed: u64,
    #[serde(flatten)]
    pub report: TrainReport,
    pub filter: FilterExport,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum TheoryResults {
    Homophily(Vec<HomophilyTrialReport>),
    Trials(Vec<TheoremTrialReport>),
}

#[derive(Debug, Serialize)]
struct TheoryOutput<C> {
    which: Which,
    config: C,
    seed: u64,
    results: TheoryResults,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FilterSource {
    Report { filter: FilterExport },
    Bare(FilterExport),
}

fn load_or_default<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    path.map_or_else(|| Ok(T::default()), read_json)
}

/// Runs the command line and returns the process exit code. Errors are
/// printed to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::CsbmGen { n, f, d, mu, h, seed, out } => {
            let g = csbm::generate(&CsbmConfig { n, f, d, mu, h, seed })?;
            write_graph(&g, &out)
        }
        Command::Train { graph, config, seed, out } => {
            let g = validate_graph_file(&graph)?;
            let mut job: TrainJob = load_or_default(config.as_deref())?;
            if let Some(s) = seed {
                job.model.seed = s;
            }
            let [a, b, c] = job.split;
            let split = random_split(g.num_nodes(), (a, b, c), job.model.seed)?;
            let (params, report) = train(&g, &split, &job.model)?;
            let filter = FilterExport::new(&equal_spaced_nodes(job.model.k)?, &params.t)?;
            let seed = job.model.seed;
            write_json(&out, &TrainOutput { config: job, seed, report, filter })
        }
        Command::Importance { config, seed, out, csv } => {
            let mut cfg: ImportanceSweepConfig = load_or_default(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = frequency_importance_sweep(&cfg)?;
            if let Some(csv) = csv {
                write_atomic(&csv, report.to_csv().as_bytes())?;
            }
            write_json(&out, &report)
        }
        Command::VerifyTheory { which, config, seed, out } => match which {
            Which::Lemma31 => {
                let mut cfg: HomophilyStudyConfig = load_or_default(config.as_deref())?;
                cfg.seed = seed.unwrap_or(cfg.seed);
                let results = TheoryResults::Homophily(run_homophily_study(&cfg)?);
                write_json(&out, &TheoryOutput { which, seed: cfg.seed, config: cfg, results })
            }
            Which::Thm32 => {
                let mut cfg: DeltaSStudyConfig = load_or_default(config.as_deref())?;
                cfg.seed = seed.unwrap_or(cfg.seed);
                let results = TheoryResults::Trials(run_delta_s_study(&cfg)?);
                write_json(&out, &TheoryOutput { which, seed: cfg.seed, config: cfg, results })
            }
            Which::Thm33 => {
                let mut cfg: TransitionConfig = load_or_default(config.as_deref())?;
                cfg.seed = seed.unwrap_or(cfg.seed);
                let results =
                    TheoryResults::Trials(verify_transition_phase(&cfg, TheoremFilterSpec::default_pair)?);
                write_json(&out, &TheoryOutput { which, seed: cfg.seed, config: cfg, results })
            }
        },
        Command::BenchK { graph, k, epochs, repeats, seed, out } => {
            let g = validate_graph_file(&graph)?;
            let split = random_split(g.num_nodes(), (0.6, 0.2, 0.2), seed)?;
            let defaults = BenchKConfig::default();
            let cfg = BenchKConfig { ks: k, epochs, repeats, train: TrainConfig { seed, ..defaults.train } };
            let report = bench_k_scaling(&g, &split, &cfg)?;
            write_json(&out, &report)
        }
        Command::ExportFilter { report, out } => {
            let filter = match read_json::<FilterSource>(&report)? {
                FilterSource::Report { filter } | FilterSource::Bare(filter) => filter,
            };
            let curve = filter.sample_curve(CURVE_POINTS)?;
            let mut csv = String::from("lambda,g_lambda\n");
            for (lambda, g) in curve {
                csv.push_str(&format!("{lambda},{g}\n"));
            }
            write_atomic(&out, csv.as_bytes())
        }
    }
}
