use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Example;
use crate::Result;

use super::concept::Problem;
use super::learner::Learner;

/// Grades proposed actions with their ground-truth labels, optionally
/// flipping each label with probability `noise_rate`.
#[derive(Debug, Clone)]
pub struct Teacher {
    noise_rate: f64,
    rng: ChaCha8Rng,
}

impl Teacher {
    pub fn ideal() -> Self {
        Self::noisy(0.0, 0)
    }

    pub fn noisy(noise_rate: f64, seed: u64) -> Self {
        Self { noise_rate, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn grade(&mut self, candidate: &Example) -> Example {
        let truth = candidate.label.expect("problems carry ground truth");
        let label = if self.noise_rate > 0.0 && self.rng.random::<f64>() < self.noise_rate {
            !truth
        } else {
            truth
        };
        Example::labeled(candidate.values.clone(), label)
    }
}

/// What happened while teaching one problem.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionLog {
    /// Proposed actions graded correct.
    pub confirmations: usize,
    /// Proposed actions graded incorrect.
    pub corrections: usize,
    pub demonstrations: usize,
}

impl InteractionLog {
    pub fn labels(&self) -> usize {
        self.confirmations + self.corrections + self.demonstrations
    }
}

/// Runs the ideal-teacher protocol over every state of `problem`: each
/// action the learner proposes is graded; if no correct action was proposed,
/// one is demonstrated. The learner refits after each state.
pub fn teach_problem(learner: &mut dyn Learner, problem: &Problem, teacher: &mut Teacher) -> Result<InteractionLog> {
    let mut log = InteractionLog::default();
    for state in &problem.states {
        let mut feedback = Vec::new();
        let mut proposed_correct = false;
        for c in &state.candidates {
            if learner.predict(&c.values) {
                let graded = teacher.grade(c);
                if graded.label == Some(true) {
                    log.confirmations += 1;
                } else {
                    log.corrections += 1;
                }
                proposed_correct |= c.label == Some(true);
                feedback.push(graded);
            }
        }
        if !proposed_correct {
            if let Some(demo) = state.candidates.iter().find(|c| c.label == Some(true)) {
                log.demonstrations += 1;
                feedback.push(Example::labeled(demo.values.clone(), true));
            }
        }
        learner.observe(&feedback)?;
    }
    Ok(log)
}

/// Holdout measurements after one training problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    /// 1-based count of problems taught.
    pub problem: usize,
    pub completeness: f64,
    pub omissions: usize,
    pub commissions: usize,
    pub ambiguity: Option<usize>,
    pub training_size: usize,
    pub interaction: InteractionLog,
    /// Minimum-certainty score of the selected problem (active mode).
    pub selection_score: Option<f64>,
    /// Per holdout candidate, in holdout order.
    pub predictions: Vec<bool>,
    pub certainties: Vec<f64>,
}

/// One repetition of a teaching run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeachingTrace {
    pub learner: String,
    pub mode: String,
    pub rep: usize,
    pub seed: u64,
    /// Ground truth of every holdout candidate, in holdout order.
    pub holdout_truth: Vec<bool>,
    pub records: Vec<ProblemRecord>,
}
