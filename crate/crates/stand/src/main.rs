use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use stand::bench::{load_config, run_bench, summarize, write_trace_csv, write_trace_json};
use stand::export::{leaf_summary_doc, LeafSummaryDoc};
use stand::formats::load_path_conforming;
use stand::service::{serve, AppState};
use stand::timing::{benchmark_dataset, compare};
use stand::{load_path, LabelPolicy, Model};
use stand_core::teachsim::ExperimentConfig;
use stand_core::version_space::enumerate_g;
use stand_core::{AmbiguityReport, DecisionTree, StandTree, VersionSpace};

/// Option-tree version spaces: fit, score, benchmark and serve.
///
/// Set `STAND_LOG` (e.g. `info`, `debug`) to control log output on stderr.
#[derive(Parser)]
#[command(name = "stand", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerArg {
    Stand,
    Tree,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on labeled data and write it as JSON.
    Fit {
        /// Training data (.csv or .json).
        #[arg(long, value_parser = existing_file)]
        data: PathBuf,
        /// Split threshold in (0, 1].
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "stand")]
        learner: LearnerArg,
        /// Tie-break seed for the single-split baseline.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Model file; stdout when omitted.
        #[arg(long, value_parser = writable_path)]
        out: Option<PathBuf>,
    },
    /// Predicted label per row of a pool, as CSV.
    Predict {
        #[arg(long, value_parser = existing_file)]
        model: PathBuf,
        /// Rows to score; labels are optional.
        #[arg(long, value_parser = existing_file)]
        data: PathBuf,
        #[arg(long, value_parser = writable_path)]
        out: Option<PathBuf>,
    },
    /// Signed instance certainty per row of a pool, as CSV.
    Certainty {
        #[arg(long, value_parser = existing_file)]
        model: PathBuf,
        #[arg(long, value_parser = existing_file)]
        data: PathBuf,
        #[arg(long, value_parser = writable_path)]
        out: Option<PathBuf>,
    },
    /// Run a teaching benchmark and write its trace.
    Bench {
        /// Experiment configuration (JSON); omitted fields take defaults.
        #[arg(long, value_parser = existing_file)]
        config: PathBuf,
        /// Trace CSV, one row per problem per repetition.
        #[arg(long, value_parser = writable_path)]
        out: PathBuf,
        /// Full traces, including holdout predictions and certainties.
        #[arg(long, value_parser = writable_path)]
        json: Option<PathBuf>,
        /// Per-problem means and final-third metrics.
        #[arg(long, value_parser = writable_path)]
        summary: Option<PathBuf>,
    },
    /// Time fit and predict for the option tree and the baseline.
    Time {
        /// Data to time on; without it, examples are drawn from the
        /// benchmark concept.
        #[arg(long, value_parser = existing_file)]
        data: Option<PathBuf>,
        /// Experiment configuration used to draw examples.
        #[arg(long, value_parser = existing_file, conflicts_with = "data")]
        config: Option<PathBuf>,
        /// Number of drawn examples.
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve teaching sessions over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of session event logs; sessions are in-memory without it.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Version-space diagnostics of a model: ambiguity, per-leaf bounds and
    /// general DNF statements.
    Export {
        #[arg(long, value_parser = existing_file)]
        model: PathBuf,
        /// Maximum number of general statements to enumerate.
        #[arg(long, default_value_t = 1000)]
        limit: usize,
        #[arg(long, value_parser = writable_path)]
        out: Option<PathBuf>,
    },
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

fn writable_path(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    match p.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(format!("no such directory: {}", dir.display())),
        _ => Ok(p),
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> stand::Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Diagnostics {
    kind: &'static str,
    training_size: usize,
    ambiguity: Option<AmbiguityReport>,
    leaves: Vec<LeafSummaryDoc>,
    statements: Vec<String>,
    truncated: bool,
}

fn diagnostics(model: &Model, limit: usize) -> stand::Result<Diagnostics> {
    Ok(match model {
        Model::Stand(tree) => {
            let space = VersionSpace::new(tree);
            let (statements, truncated) = match enumerate_g(tree, limit) {
                Ok(g) => (g.statements.iter().map(|d| d.display(tree.data().schema()).to_string()).collect(), g.truncated),
                Err(stand_core::Error::Infeasible(reason)) => {
                    log::warn!("skipping general statements: {reason}");
                    (Vec::new(), true)
                }
                Err(e) => return Err(e.into()),
            };
            Diagnostics {
                kind: "stand",
                training_size: tree.data().len(),
                ambiguity: Some(space.ambiguity()),
                leaves: space.summaries().iter().map(|s| leaf_summary_doc(tree, s)).collect(),
                statements,
                truncated,
            }
        }
        Model::Tree { tree, data } => Diagnostics {
            kind: "tree",
            training_size: data.len(),
            ambiguity: None,
            leaves: Vec::new(),
            statements: vec![tree.positive_dnf().display(data.schema()).to_string()],
            truncated: false,
        },
    })
}

fn score_rows(model: &Path, data: &Path, out: Option<&Path>, certainty: bool) -> stand::Result<()> {
    let model = Model::load(model)?;
    let pool = load_path_conforming(data, LabelPolicy::Optional, model.schema())?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(output(out)?);
    if certainty {
        w.write_record(["row", "prediction", "signed_ic", "ic_plus", "ic_minus"])?;
    } else {
        w.write_record(["row", "prediction"])?;
    }
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (i, e) in pool.examples().iter().enumerate() {
        let pred = if model.predict(&e.values) { "1" } else { "0" };
        if !certainty {
            w.write_record([i.to_string(), pred.into()])?;
            continue;
        }
        match model.certainty(&e.values) {
            Some(r) => w.write_record([i.to_string(), pred.into(), r.signed_ic.to_string(), opt(r.ic_plus), opt(r.ic_minus)])?,
            None => w.write_record([i.to_string(), pred.into(), model.signed_ic(&e.values).to_string(), String::new(), String::new()])?,
        }
    }
    w.flush()?;
    Ok(())
}

fn run(command: Command) -> stand::Result<()> {
    match command {
        Command::Fit { data, alpha, learner, seed, out } => {
            let data = load_path(&data, LabelPolicy::Required)?;
            let model = match learner {
                LearnerArg::Stand => Model::Stand(StandTree::fit(data, alpha)?),
                LearnerArg::Tree => Model::Tree { tree: DecisionTree::fit(&data, seed)?, data },
            };
            write_json(out.as_deref(), &model.export())
        }
        Command::Predict { model, data, out } => score_rows(&model, &data, out.as_deref(), false),
        Command::Certainty { model, data, out } => score_rows(&model, &data, out.as_deref(), true),
        Command::Bench { config, out, json, summary } => {
            let config = load_config(&config)?;
            log::info!("running {} reps of {} problems", config.n_reps, config.n_problems);
            let traces = run_bench(&config)?;
            let mut w = output(Some(&out))?;
            write_trace_csv(&mut w, &config, &traces)?;
            w.flush()?;
            if let Some(path) = json {
                let mut w = output(Some(&path))?;
                write_trace_json(&mut w, &config, &traces)?;
                w.flush()?;
            }
            if let Some(path) = summary {
                write_json(Some(&path), &summarize(&config, &traces)?)?;
            }
            Ok(())
        }
        Command::Time { data, config, samples, reps, alpha, seed } => {
            let data = match (data, config) {
                (Some(path), _) => load_path(&path, LabelPolicy::Required)?,
                (None, Some(path)) => benchmark_dataset(&load_config(&path)?, samples, 0)?,
                (None, None) => benchmark_dataset(&ExperimentConfig { seed, ..ExperimentConfig::default() }, samples, 0)?,
            };
            write_json(None, &compare(&data, reps, alpha, seed)?)
        }
        Command::Serve { host, port, store } => {
            let app = match store {
                Some(dir) => AppState::persistent(&dir)?,
                None => AppState::ephemeral(),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
                serve(listener, app).await
            })?;
            Ok(())
        }
        Command::Export { model, limit, out } => write_json(out.as_deref(), &diagnostics(&Model::load(&model)?, limit)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("STAND_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
