use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureSchema;
use crate::{Error, Result};

use super::active::active_select;
use super::concept::{gen_concept, sample_problem, ConceptSpec, Problem};
use super::learner::LearnerKind;
use super::metrics::{evaluate, holdout_truth};
use super::teach::{teach_problem, ProblemRecord, Teacher, TeachingTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Normal,
    Active,
}

impl Mode {
    pub fn id(self) -> &'static str {
        match self {
            Mode::Normal => "normal",
            Mode::Active => "active",
        }
    }
}

/// One experiment: a learner taught on a sequence of problems, repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub learner: String,
    pub mode: Mode,
    pub n_features: usize,
    pub n_disjuncts: usize,
    pub literals_per: usize,
    pub n_problems: usize,
    pub n_reps: usize,
    pub holdout_size: usize,
    pub states_per_problem: usize,
    pub candidates_per_state: usize,
    pub pool_size: usize,
    pub alpha: f64,
    pub seed: u64,
    pub noise_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            learner: String::from("stand"),
            mode: Mode::Normal,
            n_features: 20,
            n_disjuncts: 3,
            literals_per: 3,
            n_problems: 100,
            n_reps: 20,
            holdout_size: 100,
            states_per_problem: 3,
            candidates_per_state: 4,
            pool_size: 20,
            alpha: 1.0,
            seed: 0,
            noise_rate: 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<LearnerKind> {
        let kind = LearnerKind::parse(&self.learner)?;
        let positive = [
            ("n_features", self.n_features),
            ("n_problems", self.n_problems),
            ("holdout_size", self.holdout_size),
            ("states_per_problem", self.states_per_problem),
            ("candidates_per_state", self.candidates_per_state),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.mode == Mode::Active && self.pool_size == 0 {
            return Err(Error::Config("pool_size must be at least 1 in active mode".to_string()));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::Config(format!("noise_rate {} outside [0, 1]", self.noise_rate)));
        }
        crate::tree::check_alpha(self.alpha)?;
        Ok(kind)
    }

    pub fn schema(&self) -> FeatureSchema {
        FeatureSchema::binary(self.n_features)
    }

    /// Target of one repetition. Depends only on `seed` and `rep`, so every
    /// learner and mode sees the same concept for the same repetition.
    pub fn concept(&self, rep: usize) -> Result<ConceptSpec> {
        gen_concept(&self.schema(), self.n_disjuncts, self.literals_per, derive_seed(self.seed, rep as u64, 1))
    }

    /// Holdout problems of one repetition; shared like [`Self::concept`].
    pub fn holdout(&self, concept: &ConceptSpec, rep: usize) -> Result<Vec<Problem>> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, rep as u64, 2));
        (0..self.holdout_size)
            .map(|_| sample_problem(concept, self.states_per_problem, self.candidates_per_state, &mut rng))
            .collect()
    }
}

/// SplitMix64 mix of a base seed with a repetition and a stream id.
pub fn derive_seed(base: u64, rep: u64, stream: u64) -> u64 {
    let mut z = base
        ^ rep.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ stream.wrapping_mul(0xd1b5_4a32_d192_ed03);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Teaches one repetition and records holdout metrics after every problem.
pub fn run_repetition(config: &ExperimentConfig, rep: usize) -> Result<TeachingTrace> {
    let kind = config.validate()?;
    let concept = config.concept(rep)?;
    let holdout = config.holdout(&concept, rep)?;
    let mut learner = kind.build(config.schema(), config.alpha, derive_seed(config.seed, rep as u64, 4));
    let mut teacher = Teacher::noisy(config.noise_rate, derive_seed(config.seed, rep as u64, 5));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, rep as u64, 3));
    let draw = |rng: &mut ChaCha8Rng| {
        sample_problem(&concept, config.states_per_problem, config.candidates_per_state, rng)
    };
    let mut pool: Vec<Problem> = match config.mode {
        Mode::Active => (0..config.pool_size).map(|_| draw(&mut rng)).collect::<Result<_>>()?,
        Mode::Normal => Vec::new(),
    };
    let mut records = Vec::with_capacity(config.n_problems);
    for t in 0..config.n_problems {
        let (problem, selection_score) = match config.mode {
            Mode::Normal => (draw(&mut rng)?, None),
            Mode::Active => {
                let sel = active_select(learner.as_ref(), core::mem::take(&mut pool), || draw(&mut rng))?;
                pool = sel.pool;
                (sel.chosen, Some(sel.score))
            }
        };
        let interaction = teach_problem(learner.as_mut(), &problem, &mut teacher)?;
        let eval = evaluate(learner.as_ref(), &holdout);
        records.push(ProblemRecord {
            problem: t + 1,
            completeness: eval.completeness,
            omissions: eval.omissions,
            commissions: eval.commissions,
            ambiguity: learner.ambiguity(),
            training_size: learner.training_len(),
            interaction,
            selection_score,
            predictions: eval.predictions,
            certainties: eval.certainties,
        });
    }
    Ok(TeachingTrace {
        learner: kind.id().to_string(),
        mode: config.mode.id().to_string(),
        rep,
        seed: config.seed,
        holdout_truth: holdout_truth(&holdout),
        records,
    })
}

/// All repetitions, in order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TeachingTrace>> {
    config.validate()?;
    (0..config.n_reps).map(|rep| run_repetition(config, rep)).collect()
}
