//! Option-tree version spaces over categorical features.
//!
//! `stand-core` builds a compressed option-tree DAG that holds every decision
//! tree a randomized greedy gini learner could produce on the same data, then
//! reads that structure as an approximate version space: per-leaf general
//! options and specific extensions, a model-ambiguity heuristic, and a signed
//! instance certainty in `[-1, 1]`.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, timing, the
//! HTTP service and the command line live in the `stand` crate.

#![no_std]

extern crate alloc;

pub mod baselines;
pub mod dataset;
mod error;
pub mod teachsim;
pub mod tree;
pub mod version_space;

pub use error::Error;

pub use baselines::DecisionTree;
pub use dataset::{Dataset, Dnf, Example, Feature, FeatureSchema, Literal, Polarity, ValueIndex};
pub use tree::{NodeId, NodeKey, SplitCandidate, StandNode, StandTree};
pub use version_space::{AmbiguityReport, CertaintyReport, LeafGeneralization, VersionSpace};

pub type Result<T, E = Error> = core::result::Result<T, E>;
