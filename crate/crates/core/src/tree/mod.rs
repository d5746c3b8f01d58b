//! The compressed option-tree DAG.
//!
//! Every impure node expands all near-best splits; each split contributes two
//! edges (the literal and its negation). Child nodes are identified by the
//! subset of training samples they select, so edges that select the same
//! subset share one node and the option tree collapses into a DAG.

mod key;
mod split;

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, Example, Literal, ValueIndex};
use crate::version_space::{self, CertaintyReport};
use crate::{Error, Result};

pub use key::NodeKey;
pub use split::check_alpha;
pub use split::{best_splits, expansion_splits, impurity, SplitCandidate, GAIN_TOLERANCE};
pub(crate) use split::SplitScorer;

/// Default split acceptance threshold.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Arena index of a node. The root is always `NodeId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafKind {
    /// All samples share one label.
    Pure,
    /// Impure, but no split separates the samples; labeled by majority with
    /// ties going negative.
    Majority,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedSplit {
    pub literal: Literal,
    pub negation: Literal,
    pub gain: f64,
    /// Child selected by `literal`.
    pub left: NodeId,
    /// Child selected by `negation`.
    pub right: NodeId,
}

impl ExpandedSplit {
    /// Both edges as `(literal, child)`.
    pub fn edges(&self) -> [(Literal, NodeId); 2] {
        [(self.literal, self.left), (self.negation, self.right)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandNode {
    key: NodeKey,
    splits: Vec<ExpandedSplit>,
    parents: Vec<(NodeId, Literal)>,
    leaf: Option<(bool, LeafKind)>,
}

impl StandNode {
    fn new(key: NodeKey) -> Self {
        Self { key, splits: Vec::new(), parents: Vec::new(), leaf: None }
    }

    pub fn key(&self) -> &NodeKey {
        &self.key
    }

    pub fn splits(&self) -> &[ExpandedSplit] {
        &self.splits
    }

    /// Incoming edges as `(parent, edge literal)`, in creation order.
    pub fn parents(&self) -> &[(NodeId, Literal)] {
        &self.parents
    }

    pub fn is_leaf(&self) -> bool {
        self.leaf.is_some()
    }

    pub fn leaf_label(&self) -> Option<bool> {
        self.leaf.map(|(l, _)| l)
    }

    pub fn leaf_kind(&self) -> Option<LeafKind> {
        self.leaf.map(|(_, k)| k)
    }

    /// Iterates every outgoing edge as `(literal, child)`.
    pub fn edges(&self) -> impl Iterator<Item = (Literal, NodeId)> + '_ {
        self.splits.iter().flat_map(|s| s.edges())
    }
}

/// A fitted option-tree DAG together with the data it was fit on.
#[derive(Debug, Clone, PartialEq)]
pub struct StandTree {
    data: Dataset,
    alpha: f64,
    nodes: Vec<StandNode>,
    index: BTreeMap<NodeKey, NodeId>,
}

impl StandTree {
    /// Fits the full structure on labeled, nonempty data.
    pub fn fit(data: Dataset, alpha: f64) -> Result<Self> {
        split::check_alpha(alpha)?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        data.require_labels()?;
        Ok(Builder::run(data, alpha, None))
    }

    /// Adds labeled examples and refits. Nodes whose sample subset did not
    /// change are copied from `self` without rescoring; the result equals
    /// `fit` on the combined data.
    pub fn incremental_update(&self, new_examples: &[Example]) -> Result<Self> {
        if let Some(i) = new_examples.iter().position(|x| x.label.is_none()) {
            return Err(Error::Unlabeled(self.data.len() + i));
        }
        let mut data = self.data.clone();
        data.extend(new_examples)?;
        Ok(Builder::run(data, self.alpha, Some(self)))
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn nodes(&self) -> &[StandNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &StandNode {
        &self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lookup(&self, key: &NodeKey) -> Option<NodeId> {
        self.index.get(key).copied()
    }

    /// Looks up a node by its sample list.
    pub fn find(&self, samples: &[u32]) -> Option<NodeId> {
        self.lookup(&NodeKey::from_unsorted(samples.to_vec()))
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(|&id| self.node(id).is_leaf())
    }

    /// Every leaf reachable from the root along edges whose literals `x`
    /// satisfies, in arena order.
    pub fn route(&self, x: &[ValueIndex]) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![NodeId::ROOT];
        seen[0] = true;
        let mut leaves = Vec::new();
        while let Some(id) = stack.pop() {
            let node = self.node(id);
            if node.is_leaf() {
                leaves.push(id);
                continue;
            }
            for s in &node.splits {
                let next = if s.literal.holds(x) { s.left } else { s.right };
                if !seen[next.index()] {
                    seen[next.index()] = true;
                    stack.push(next);
                }
            }
        }
        leaves.sort_unstable();
        leaves
    }

    /// Signed instance certainty of `x`; see [`version_space::instance_certainty`].
    pub fn certainty(&self, x: &[ValueIndex]) -> CertaintyReport {
        version_space::instance_certainty(self, x)
    }

    /// Positive iff the signed certainty is on the positive side; examples
    /// reaching no leaf are negative.
    pub fn predict(&self, x: &[ValueIndex]) -> bool {
        self.certainty(x).prediction()
    }
}

struct Builder<'a> {
    data: &'a Dataset,
    nodes: Vec<StandNode>,
    index: BTreeMap<NodeKey, NodeId>,
    queue: VecDeque<NodeId>,
}

impl<'a> Builder<'a> {
    fn run(data: Dataset, alpha: f64, prior: Option<&StandTree>) -> StandTree {
        let (nodes, index) = {
            let mut b = Builder {
                data: &data,
                nodes: Vec::new(),
                index: BTreeMap::new(),
                queue: VecDeque::new(),
            };
            let mut scorer = SplitScorer::new(&data);
            b.intern(NodeKey::new((0..data.len() as u32).collect()));
            while let Some(id) = b.queue.pop_front() {
                let reused = prior.and_then(|p| p.lookup(&b.nodes[id.index()].key).map(|pid| (p, pid)));
                match reused {
                    Some((p, pid)) => b.copy_expansion(id, p, pid),
                    None => b.expand(id, &mut scorer, alpha),
                }
            }
            (b.nodes, b.index)
        };
        StandTree { data, alpha, nodes, index }
    }

    fn intern(&mut self, key: NodeKey) -> NodeId {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.index.insert(key.clone(), id);
        self.nodes.push(StandNode::new(key));
        self.queue.push_back(id);
        id
    }

    fn link(&mut self, parent: NodeId, literal: Literal, negation: Literal, gain: f64, left: NodeKey, right: NodeKey) {
        let left = self.intern(left);
        let right = self.intern(right);
        self.nodes[left.index()].parents.push((parent, literal));
        self.nodes[right.index()].parents.push((parent, negation));
        self.nodes[parent.index()].splits.push(ExpandedSplit { literal, negation, gain, left, right });
    }

    fn expand(&mut self, id: NodeId, scorer: &mut SplitScorer, alpha: f64) {
        let data = self.data;
        let samples = self.nodes[id.index()].key.samples();
        let pos = samples.iter().filter(|&&s| data.label(s) == Some(true)).count();
        if pos == 0 || pos == samples.len() {
            self.nodes[id.index()].leaf = Some((pos > 0, LeafKind::Pure));
            return;
        }
        let candidates = scorer.expansion(samples, data, alpha);
        if candidates.is_empty() {
            let majority = 2 * pos > samples.len();
            self.nodes[id.index()].leaf = Some((majority, LeafKind::Majority));
            return;
        }
        for c in candidates {
            self.link(id, c.literal, c.negation, c.gain, NodeKey::new(c.left), NodeKey::new(c.right));
        }
    }

    fn copy_expansion(&mut self, id: NodeId, prior: &StandTree, pid: NodeId) {
        let old = prior.node(pid);
        if old.leaf.is_some() {
            self.nodes[id.index()].leaf = old.leaf;
            return;
        }
        for s in &old.splits {
            let left = prior.node(s.left).key.clone();
            let right = prior.node(s.right).key.clone();
            self.link(id, s.literal, s.negation, s.gain, left, right);
        }
    }
}
