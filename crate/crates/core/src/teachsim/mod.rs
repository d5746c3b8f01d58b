//! Simulated teaching: synthetic DNF targets, problems made of candidate
//! actions, an ideal teacher that grades every proposed action and
//! demonstrates a missing one, the active-learning pool protocol, and the
//! evaluation metrics computed over a holdout set.

mod active;
mod concept;
mod experiment;
mod learner;
mod metrics;
mod teach;

pub use active::{active_select, active_utility, active_utility_ratio, problem_score, Selection};
pub use concept::{gen_concept, gen_problem, random_example, random_problem, sample_problem, ConceptSpec, Problem, State};
pub use experiment::{derive_seed, run_experiment, run_repetition, ExperimentConfig, Mode};
pub use learner::{Learner, LearnerKind, StandLearner, TreeLearner};
pub use metrics::{
    completeness, error_counts, evaluate, holdout_truth, precision_at_certainty, precision_of, productive_monotonicity,
    productive_monotonicity_in, reoccurrence_rates, reoccurrence_rates_in, Evaluation, Reoccurrence,
};
pub use teach::{teach_problem, InteractionLog, ProblemRecord, Teacher, TeachingTrace};
