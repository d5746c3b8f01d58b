//! Wall-clock fit and predict timings.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stand_core::teachsim::{derive_seed, random_example, ExperimentConfig};
use stand_core::{Dataset, DecisionTree, Example, StandTree};

use crate::Result;

/// Mean durations in milliseconds. `predict_ms` is per example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPredict {
    pub fit_ms: f64,
    pub predict_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub samples: usize,
    pub reps: usize,
    pub stand: FitPredict,
    pub tree: FitPredict,
}

impl Comparison {
    pub fn fit_ratio(&self) -> f64 {
        self.stand.fit_ms / self.tree.fit_ms
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn time_with<M>(data: &Dataset, reps: usize, fit: impl Fn(&Dataset) -> Result<M>, predict: impl Fn(&M, &[u32]) -> bool) -> Result<FitPredict> {
    let reps = reps.max(1);
    let (mut fit_t, mut pred_t, mut calls) = (Duration::ZERO, Duration::ZERO, 0usize);
    for _ in 0..reps {
        let start = Instant::now();
        let model = black_box(fit(black_box(data))?);
        fit_t += start.elapsed();
        let start = Instant::now();
        for e in data.examples() {
            black_box(predict(&model, black_box(&e.values)));
        }
        pred_t += start.elapsed();
        calls += data.len();
    }
    Ok(FitPredict { fit_ms: ms(fit_t) / reps as f64, predict_ms: ms(pred_t) / calls.max(1) as f64 })
}

/// Mean option-tree fit time and per-example predict time over `reps` runs.
pub fn time_fit_predict(data: &Dataset, reps: usize, alpha: f64) -> Result<FitPredict> {
    time_with(data, reps, |d| Ok(StandTree::fit(d.clone(), alpha)?), |t, x| t.predict(x))
}

pub fn time_baseline(data: &Dataset, reps: usize, seed: u64) -> Result<FitPredict> {
    time_with(data, reps, |d| Ok(DecisionTree::fit(d, seed)?), |t, x| t.predict(x))
}

pub fn compare(data: &Dataset, reps: usize, alpha: f64, seed: u64) -> Result<Comparison> {
    Ok(Comparison {
        samples: data.len(),
        reps,
        stand: time_fit_predict(data, reps, alpha)?,
        tree: time_baseline(data, reps, seed)?,
    })
}

/// `n` uniformly drawn examples labeled by the concept of repetition `rep`,
/// at the sizes a benchmark run reaches.
pub fn benchmark_dataset(config: &ExperimentConfig, n: usize, rep: usize) -> Result<Dataset> {
    let concept = config.concept(rep)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, rep as u64, 6));
    let examples = (0..n)
        .map(|_| {
            let x = random_example(&concept.schema, &mut rng);
            let label = concept.label(&x);
            Example::labeled(x, label)
        })
        .collect();
    Ok(Dataset::new(concept.schema, examples)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_rep_gives_non_negative_durations() {
        let data = benchmark_dataset(&ExperimentConfig::default(), 50, 0).unwrap();
        let t = time_fit_predict(&data, 1, 1.0).unwrap();
        assert!(t.fit_ms >= 0.0 && t.predict_ms >= 0.0);
        assert_eq!(data.len(), 50);
    }
}
