//! Teaching benchmark runs and their CSV / JSON traces.
//!
//! Trace CSV columns, one row per problem per repetition:
//!
//! | column | meaning |
//! |---|---|
//! | `learner`, `mode` | learner id and `normal` / `active` |
//! | `rep`, `seed` | repetition index and base seed |
//! | `problem` | problems taught so far (1-based) |
//! | `completeness` | fraction of holdout states fully correct |
//! | `omissions`, `commissions` | holdout false negatives / false positives |
//! | `ambiguity` | model ambiguity, empty for learners without one |
//! | `training_size` | training examples after the problem |
//! | `confirmations`, `corrections`, `demonstrations` | labels added by the teacher |
//! | `selection_score` | minimum-certainty score of the chosen problem (active mode) |
//!
//! The first line is a `#` comment holding the configuration as JSON, so the
//! seeds travel with the data.

use std::io::Write;
use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use stand_core::teachsim::{
    active_utility, productive_monotonicity_in, reoccurrence_rates, run_repetition, ExperimentConfig, Reoccurrence,
    TeachingTrace,
};

use crate::{Error, Result};

pub const TRACE_COLUMNS: [&str; 14] = [
    "learner",
    "mode",
    "rep",
    "seed",
    "problem",
    "completeness",
    "omissions",
    "commissions",
    "ambiguity",
    "training_size",
    "confirmations",
    "corrections",
    "demonstrations",
    "selection_score",
];

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    config.validate()?;
    Ok(config)
}

/// Every repetition, run in parallel and returned in repetition order.
pub fn run_bench(config: &ExperimentConfig) -> Result<Vec<TeachingTrace>> {
    config.validate()?;
    (0..config.n_reps)
        .into_par_iter()
        .map(|rep| run_repetition(config, rep).map_err(Error::from))
        .collect()
}

pub fn write_trace_csv(out: impl Write, config: &ExperimentConfig, traces: &[TeachingTrace]) -> Result<()> {
    let mut out = out;
    writeln!(out, "# {}", serde_json::to_string(config)?)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for t in traces {
        for r in &t.records {
            w.write_record([
                t.learner.clone(),
                t.mode.clone(),
                t.rep.to_string(),
                t.seed.to_string(),
                r.problem.to_string(),
                r.completeness.to_string(),
                r.omissions.to_string(),
                r.commissions.to_string(),
                opt(r.ambiguity.map(|a| a.to_string())),
                r.training_size.to_string(),
                r.interaction.confirmations.to_string(),
                r.interaction.corrections.to_string(),
                r.interaction.demonstrations.to_string(),
                opt(r.selection_score.map(|s| s.to_string())),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TraceFile<'a> {
    config: &'a ExperimentConfig,
    traces: &'a [TeachingTrace],
}

pub fn write_trace_json(out: impl Write, config: &ExperimentConfig, traces: &[TeachingTrace]) -> Result<()> {
    serde_json::to_writer(out, &TraceFile { config, traces })?;
    Ok(())
}

/// Records `2n/3 .. n` of an `n`-problem run.
pub fn final_third(n_problems: usize) -> Range<usize> {
    (2 * n_problems / 3)..n_problems
}

/// Mean and standard error of `f` over repetitions.
pub fn mean_se(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.into_iter().collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// Mean holdout completeness after `problem` problems (1-based).
pub fn completeness_at(traces: &[TeachingTrace], problem: usize) -> f64 {
    mean_se(traces.iter().map(|t| t.records[problem - 1].completeness)).0
}

/// Mean completeness over the records in `window`, averaged over reps.
pub fn completeness_over(traces: &[TeachingTrace], window: Range<usize>) -> f64 {
    mean_se(traces.iter().map(|t| {
        let w = &t.records[window.clone()];
        w.iter().map(|r| r.completeness).sum::<f64>() / w.len() as f64
    }))
    .0
}

/// Mean productive monotonicity over reps where certainty changed at all.
pub fn monotonicity_over(traces: &[TeachingTrace], window: Range<usize>) -> Result<Option<f64>> {
    let mut values = Vec::new();
    for t in traces {
        if let Some(m) = productive_monotonicity_in(t, window.clone())? {
            values.push(m);
        }
    }
    Ok((!values.is_empty()).then(|| mean_se(values).0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemSummary {
    pub problem: usize,
    pub completeness: f64,
    pub completeness_se: f64,
}

/// Headline numbers of one benchmark run.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub learner: String,
    pub mode: String,
    pub reps: usize,
    pub per_problem: Vec<ProblemSummary>,
    pub final_third_completeness: f64,
    pub final_third_monotonicity: Option<f64>,
    pub reoccurrence: Vec<Reoccurrence>,
}

pub fn summarize(config: &ExperimentConfig, traces: &[TeachingTrace]) -> Result<Summary> {
    let per_problem = (1..=config.n_problems)
        .map(|p| {
            let (completeness, completeness_se) = mean_se(traces.iter().map(|t| t.records[p - 1].completeness));
            ProblemSummary { problem: p, completeness, completeness_se }
        })
        .collect();
    let window = final_third(config.n_problems);
    let reoccurrence =
        if config.n_problems >= 2 { traces.iter().map(reoccurrence_rates).collect::<Result<_, _>>()? } else { Vec::new() };
    Ok(Summary {
        learner: config.learner.clone(),
        mode: config.mode.id().into(),
        reps: traces.len(),
        per_problem,
        final_third_completeness: completeness_over(traces, window.clone()),
        final_third_monotonicity: if window.len() >= 2 { monotonicity_over(traces, window)? } else { None },
        reoccurrence,
    })
}

/// Normalized active-learning utility over the final third.
pub fn final_third_utility(active: &[TeachingTrace], normal: &[TeachingTrace], n_problems: usize) -> Option<f64> {
    let w = final_third(n_problems);
    active_utility(completeness_over(active, w.clone()), completeness_over(normal, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use stand_core::teachsim::Mode;

    fn smoke() -> ExperimentConfig {
        ExperimentConfig { n_features: 8, n_problems: 6, n_reps: 3, holdout_size: 10, ..ExperimentConfig::default() }
    }

    #[test]
    fn parallel_run_matches_sequential() {
        let cfg = smoke();
        let par = run_bench(&cfg).unwrap();
        let seq = stand_core::teachsim::run_experiment(&cfg).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn csv_has_one_row_per_problem_per_rep_and_is_reproducible() {
        let cfg = ExperimentConfig { mode: Mode::Active, pool_size: 4, ..smoke() };
        let render = || {
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &cfg, &run_bench(&cfg).unwrap()).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let text = render();
        assert_eq!(text, render());
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# {") && lines[0].contains("\"seed\":0"));
        assert_eq!(lines[1], TRACE_COLUMNS.join(","));
        assert_eq!(lines.len(), 2 + 6 * 3);
        assert!(lines[2].starts_with("stand,active,0,0,1,"));
    }

    #[test]
    fn summary_shapes() {
        let cfg = smoke();
        let s = summarize(&cfg, &run_bench(&cfg).unwrap()).unwrap();
        assert_eq!(s.per_problem.len(), 6);
        assert_eq!(s.reoccurrence.len(), 3);
        assert!((0.0..=1.0).contains(&s.final_third_completeness));
        assert_eq!(final_third(100), 66..100);
    }
}
