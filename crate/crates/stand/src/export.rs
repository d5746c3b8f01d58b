//! JSON model files.
//!
//! Nodes are keyed by their canonical sample subset, written as comma
//! separated indices (`"0,2,4"`). A model file carries its training data and
//! fit parameters; loading refits and checks the result against the stored
//! structure, so a file that loads is exactly the model that wrote it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use stand_core::baselines::TreeNode;
use stand_core::tree::LeafKind;
use stand_core::version_space::LeafSummary;
use stand_core::{CertaintyReport, Dataset, DecisionTree, FeatureSchema, Literal, Polarity, StandTree, ValueIndex};

use crate::formats::{DatasetDoc, LabelPolicy};
use crate::{Error, Result};

pub fn subset_key(samples: &[u32]) -> String {
    let mut s = String::with_capacity(samples.len() * 3);
    for (i, x) in samples.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&x.to_string());
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralDoc {
    pub feature: usize,
    pub value: ValueIndex,
    pub polarity: Polarity,
    /// Rendered as `name=value` or `name!=value`.
    pub text: String,
}

impl LiteralDoc {
    pub fn new(schema: &FeatureSchema, lit: &Literal) -> Self {
        Self { feature: lit.feature, value: lit.value, polarity: lit.polarity, text: schema.display(lit).to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafDoc {
    pub label: bool,
    /// `pure`, or `majority` for an impure node no split separates.
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub literal: LiteralDoc,
    pub child: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDoc {
    pub gain: f64,
    /// The literal's edge, then its negation's.
    pub edges: [EdgeDoc; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentDoc {
    pub parent: String,
    pub literal: LiteralDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub samples: Vec<u32>,
    pub leaf: Option<LeafDoc>,
    pub splits: Vec<SplitDoc>,
    pub parents: Vec<ParentDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandExport {
    pub alpha: f64,
    pub root: String,
    pub nodes: BTreeMap<String, NodeDoc>,
    pub training: DatasetDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeExport {
    pub seed: u64,
    pub root: String,
    pub nodes: BTreeMap<String, NodeDoc>,
    pub training: DatasetDoc,
}

/// A model file: the option tree or the single-split baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelExport {
    Stand(StandExport),
    Tree(TreeExport),
}

fn leaf_kind(kind: LeafKind) -> String {
    match kind {
        LeafKind::Pure => "pure".into(),
        LeafKind::Majority => "majority".into(),
    }
}

pub fn export_stand(tree: &StandTree) -> StandExport {
    let schema = tree.data().schema();
    let key = |id| subset_key(tree.node(id).key().samples());
    let nodes = tree
        .ids()
        .map(|id| {
            let node = tree.node(id);
            let doc = NodeDoc {
                samples: node.key().samples().to_vec(),
                leaf: node.leaf_label().zip(node.leaf_kind()).map(|(label, k)| LeafDoc { label, kind: leaf_kind(k) }),
                splits: node
                    .splits()
                    .iter()
                    .map(|s| SplitDoc {
                        gain: s.gain,
                        edges: s.edges().map(|(l, c)| EdgeDoc { literal: LiteralDoc::new(schema, &l), child: key(c) }),
                    })
                    .collect(),
                parents: node
                    .parents()
                    .iter()
                    .map(|(p, l)| ParentDoc { parent: key(*p), literal: LiteralDoc::new(schema, l) })
                    .collect(),
            };
            (key(id), doc)
        })
        .collect();
    StandExport { alpha: tree.alpha(), root: key(tree.root()), nodes, training: DatasetDoc::from_dataset(tree.data()) }
}

pub fn export_tree(tree: &DecisionTree, data: &Dataset) -> TreeExport {
    let schema = data.schema();
    let key = |i: usize| subset_key(tree.nodes()[i].samples());
    let mut nodes = BTreeMap::new();
    let mut parents: BTreeMap<usize, Vec<ParentDoc>> = BTreeMap::new();
    for (i, n) in tree.nodes().iter().enumerate() {
        if let TreeNode::Split { literal, negation, left, right, .. } = n {
            parents.entry(*left).or_default().push(ParentDoc { parent: key(i), literal: LiteralDoc::new(schema, literal) });
            parents.entry(*right).or_default().push(ParentDoc { parent: key(i), literal: LiteralDoc::new(schema, negation) });
        }
    }
    for (i, n) in tree.nodes().iter().enumerate() {
        let doc = match n {
            TreeNode::Leaf { samples, label } => {
                let pure = samples.iter().all(|&s| data.label(s) == Some(*label));
                NodeDoc {
                    samples: samples.clone(),
                    leaf: Some(LeafDoc {
                        label: *label,
                        kind: leaf_kind(if pure { LeafKind::Pure } else { LeafKind::Majority }),
                    }),
                    splits: Vec::new(),
                    parents: parents.remove(&i).unwrap_or_default(),
                }
            }
            TreeNode::Split { samples, literal, negation, left, right } => {
                let edges = [
                    EdgeDoc { literal: LiteralDoc::new(schema, literal), child: key(*left) },
                    EdgeDoc { literal: LiteralDoc::new(schema, negation), child: key(*right) },
                ];
                NodeDoc {
                    samples: samples.clone(),
                    leaf: None,
                    splits: vec![SplitDoc { gain: split_gain(data, samples, literal), edges }],
                    parents: parents.remove(&i).unwrap_or_default(),
                }
            }
        };
        nodes.insert(key(i), doc);
    }
    TreeExport { seed: tree.seed(), root: key(0), nodes, training: DatasetDoc::from_dataset(data) }
}

fn split_gain(data: &Dataset, samples: &[u32], literal: &Literal) -> f64 {
    let labels = |f: &dyn Fn(u32) -> bool| -> Vec<bool> {
        samples.iter().filter(|&&s| f(s)).map(|&s| data.label(s) == Some(true)).collect()
    };
    let all = labels(&|_| true);
    let (l, r) = (labels(&|s| literal.holds(data.values(s))), labels(&|s| !literal.holds(data.values(s))));
    let imp = |v: &[bool]| stand_core::tree::impurity(v).unwrap_or(0.0);
    imp(&all) - (l.len() as f64 * imp(&l) + r.len() as f64 * imp(&r)) / all.len() as f64
}

/// A loaded model.
#[derive(Debug, Clone)]
pub enum Model {
    Stand(StandTree),
    Tree { tree: DecisionTree, data: Dataset },
}

impl Model {
    pub fn schema(&self) -> &FeatureSchema {
        match self {
            Model::Stand(t) => t.data().schema(),
            Model::Tree { data, .. } => data.schema(),
        }
    }

    pub fn predict(&self, x: &[ValueIndex]) -> bool {
        match self {
            Model::Stand(t) => t.predict(x),
            Model::Tree { tree, .. } => tree.predict(x),
        }
    }

    /// Full report for the option tree; the baseline reports `None`.
    pub fn certainty(&self, x: &[ValueIndex]) -> Option<CertaintyReport> {
        match self {
            Model::Stand(t) => Some(t.certainty(x)),
            Model::Tree { .. } => None,
        }
    }

    /// Signed certainty; the baseline is always fully certain.
    pub fn signed_ic(&self, x: &[ValueIndex]) -> f64 {
        match self {
            Model::Stand(t) => t.certainty(x).signed_ic,
            Model::Tree { tree, .. } => {
                if tree.predict(x) {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    pub fn export(&self) -> ModelExport {
        match self {
            Model::Stand(t) => ModelExport::Stand(export_stand(t)),
            Model::Tree { tree, data } => ModelExport::Tree(export_tree(tree, data)),
        }
    }

    /// Refits from the stored training data and checks the structure.
    pub fn import(doc: ModelExport) -> Result<Self> {
        match doc {
            ModelExport::Stand(doc) => {
                let data = doc.training.clone().into_dataset(LabelPolicy::Required)?;
                let tree = StandTree::fit(data, doc.alpha)?;
                compare(&export_stand(&tree).nodes, &doc.nodes, &doc.root, &subset_key(tree.node(tree.root()).key().samples()))?;
                Ok(Model::Stand(tree))
            }
            ModelExport::Tree(doc) => {
                let data = doc.training.clone().into_dataset(LabelPolicy::Required)?;
                let tree = DecisionTree::fit(&data, doc.seed)?;
                let ours = export_tree(&tree, &data);
                compare(&ours.nodes, &doc.nodes, &doc.root, &ours.root)?;
                Ok(Model::Tree { tree, data })
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::import(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn compare(ours: &BTreeMap<String, NodeDoc>, theirs: &BTreeMap<String, NodeDoc>, root: &str, our_root: &str) -> Result<()> {
    if root != our_root {
        return Err(Error::Export(format!("root `{root}`, refit gives `{our_root}`")));
    }
    if ours.len() != theirs.len() {
        return Err(Error::Export(format!("{} nodes stored, refit gives {}", theirs.len(), ours.len())));
    }
    for (k, node) in ours {
        match theirs.get(k) {
            Some(n) if n == node => {}
            Some(_) => return Err(Error::Export(format!("node `{k}` differs"))),
            None => return Err(Error::Export(format!("node `{k}` missing"))),
        }
    }
    Ok(())
}

/// One leaf's bounding literals, for state views and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafSummaryDoc {
    pub key: String,
    pub label: bool,
    pub ambiguity: usize,
    /// Edges into the leaf and its ancestors as `parent key` and literal.
    pub options: Vec<ParentDoc>,
    pub specific: Vec<LiteralDoc>,
}

pub fn leaf_summary_doc(tree: &StandTree, s: &LeafSummary) -> LeafSummaryDoc {
    let schema = tree.data().schema();
    LeafSummaryDoc {
        key: subset_key(tree.node(s.leaf).key().samples()),
        label: s.label,
        ambiguity: s.ambiguity(),
        options: s
            .options
            .iter()
            .map(|(p, l)| ParentDoc { parent: subset_key(tree.node(*p).key().samples()), literal: LiteralDoc::new(schema, l) })
            .collect(),
        specific: s.specific.iter().map(|l| LiteralDoc::new(schema, l)).collect(),
    }
}
