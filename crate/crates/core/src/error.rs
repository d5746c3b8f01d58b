use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("example {row} does not conform to the schema: {reason}")]
    SchemaMismatch { row: usize, reason: String },
    #[error("literal references feature {index} but the schema has {arity} features")]
    FeatureOutOfRange { index: usize, arity: usize },
    #[error("cannot fit an empty dataset")]
    EmptyDataset,
    #[error("example {0} has no label")]
    Unlabeled(usize),
    #[error("impurity of an empty label multiset is undefined")]
    EmptyLabels,
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("node is not a leaf")]
    NotALeaf,
    #[error("unknown node")]
    UnknownNode,
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("unknown learner `{0}`")]
    UnknownLearner(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("trace has {0} records, need at least 2")]
    ShortTrace(usize),
    #[error("empty pool")]
    EmptyPool,
}
