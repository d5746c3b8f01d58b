use alloc::boxed::Box;
use alloc::string::ToString;

use crate::baselines::DecisionTree;
use crate::dataset::{Dataset, Example, FeatureSchema, ValueIndex};
use crate::tree::StandTree;
use crate::version_space::VersionSpace;
use crate::{Error, Result};

use super::experiment::derive_seed;

/// What the teaching loop needs from a precondition learner.
pub trait Learner {
    /// Appends labeled examples to the training set and refits.
    fn observe(&mut self, examples: &[Example]) -> Result<()>;
    fn predict(&self, x: &[ValueIndex]) -> bool;
    /// Signed certainty in `[-1, 1]`; the sign agrees with [`Learner::predict`].
    fn certainty(&self, x: &[ValueIndex]) -> f64;
    /// Model ambiguity, where the learner has one.
    fn ambiguity(&self) -> Option<usize> {
        None
    }
    fn training_len(&self) -> usize;
}

/// Option-tree learner with cached leaf summaries.
#[derive(Debug, Clone)]
pub struct StandLearner {
    schema: FeatureSchema,
    alpha: f64,
    model: Option<(StandTree, VersionSpace)>,
}

impl StandLearner {
    pub fn new(schema: FeatureSchema, alpha: f64) -> Self {
        Self { schema, alpha, model: None }
    }

    pub fn tree(&self) -> Option<&StandTree> {
        self.model.as_ref().map(|(t, _)| t)
    }

    pub fn version_space(&self) -> Option<&VersionSpace> {
        self.model.as_ref().map(|(_, v)| v)
    }

    /// Certainty report of `x`, or `None` before the first example.
    pub fn report(&self, x: &[ValueIndex]) -> Option<crate::CertaintyReport> {
        self.model.as_ref().map(|(t, v)| v.certainty(t, x))
    }
}

impl Learner for StandLearner {
    fn observe(&mut self, examples: &[Example]) -> Result<()> {
        if examples.is_empty() {
            return Ok(());
        }
        let tree = match &self.model {
            Some((tree, _)) => tree.incremental_update(examples)?,
            None => StandTree::fit(Dataset::new(self.schema.clone(), examples.to_vec())?, self.alpha)?,
        };
        let space = VersionSpace::new(&tree);
        self.model = Some((tree, space));
        Ok(())
    }

    fn predict(&self, x: &[ValueIndex]) -> bool {
        self.report(x).is_some_and(|r| r.prediction())
    }

    fn certainty(&self, x: &[ValueIndex]) -> f64 {
        self.report(x).map_or(0.0, |r| r.signed_ic)
    }

    fn ambiguity(&self) -> Option<usize> {
        self.version_space().map(|v| v.ambiguity().total)
    }

    fn training_len(&self) -> usize {
        self.tree().map_or(0, |t| t.data().len())
    }
}

/// Single randomized greedy tree, refit from scratch on every update with a
/// seed derived from the training-set size. Certainty is `±1`.
#[derive(Debug, Clone)]
pub struct TreeLearner {
    data: Dataset,
    seed: u64,
    tree: Option<DecisionTree>,
}

impl TreeLearner {
    pub fn new(schema: FeatureSchema, seed: u64) -> Self {
        Self { data: Dataset::empty(schema), seed, tree: None }
    }

    pub fn tree(&self) -> Option<&DecisionTree> {
        self.tree.as_ref()
    }
}

impl Learner for TreeLearner {
    fn observe(&mut self, examples: &[Example]) -> Result<()> {
        if examples.is_empty() {
            return Ok(());
        }
        if let Some(i) = examples.iter().position(|x| x.label.is_none()) {
            return Err(Error::Unlabeled(self.data.len() + i));
        }
        self.data.extend(examples)?;
        let seed = derive_seed(self.seed, self.data.len() as u64, 0);
        self.tree = Some(DecisionTree::fit(&self.data, seed)?);
        Ok(())
    }

    fn predict(&self, x: &[ValueIndex]) -> bool {
        self.tree.as_ref().is_some_and(|t| t.predict(x))
    }

    fn certainty(&self, x: &[ValueIndex]) -> f64 {
        match &self.tree {
            Some(t) if t.predict(x) => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        }
    }

    fn training_len(&self) -> usize {
        self.data.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Stand,
    Tree,
}

impl LearnerKind {
    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "stand" => Ok(Self::Stand),
            "tree" | "decision_tree" => Ok(Self::Tree),
            other => Err(Error::UnknownLearner(other.to_string())),
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Self::Stand => "stand",
            Self::Tree => "tree",
        }
    }

    pub fn build(self, schema: FeatureSchema, alpha: f64, seed: u64) -> Box<dyn Learner> {
        match self {
            Self::Stand => Box::new(StandLearner::new(schema, alpha)),
            Self::Tree => Box::new(TreeLearner::new(schema, seed)),
        }
    }
}
