//! Single greedy decision tree built from the same split machinery as the
//! option tree, choosing one of the tied best splits at random.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Dnf, Literal, ValueIndex};
use crate::tree::{SplitScorer, SplitCandidate, StandTree};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf { samples: Vec<u32>, label: bool },
    Split { samples: Vec<u32>, literal: Literal, negation: Literal, left: usize, right: usize },
}

impl TreeNode {
    pub fn samples(&self) -> &[u32] {
        match self {
            TreeNode::Leaf { samples, .. } | TreeNode::Split { samples, .. } => samples,
        }
    }
}

/// A binary tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
    seed: u64,
}

impl DecisionTree {
    /// Greedy gini tree; ties among the best splits are broken uniformly at
    /// random from `seed`.
    pub fn fit(data: &Dataset, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tree = Self::fit_with(data, |c| rng.random_range(0..c.len()))?;
        tree.seed = seed;
        Ok(tree)
    }

    /// Greedy tree whose split at each node is picked by `choose` from the
    /// node's candidate list (indices into the slice).
    pub fn fit_with(data: &Dataset, mut choose: impl FnMut(&[SplitCandidate]) -> usize) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        data.require_labels()?;
        let mut scorer = SplitScorer::new(data);
        let mut nodes = Vec::new();
        let mut stack = vec![((0..data.len() as u32).collect::<Vec<u32>>(), None::<(usize, bool)>)];
        while let Some((samples, slot)) = stack.pop() {
            let id = nodes.len();
            if let Some((parent, is_left)) = slot {
                if let TreeNode::Split { left, right, .. } = &mut nodes[parent] {
                    if is_left {
                        *left = id;
                    } else {
                        *right = id;
                    }
                }
            }
            match leaf_label(data, &samples, &mut scorer) {
                Ok(label) => nodes.push(TreeNode::Leaf { samples, label }),
                Err(mut candidates) => {
                    let pick = choose(&candidates);
                    let c = candidates.swap_remove(pick);
                    nodes.push(TreeNode::Split { samples, literal: c.literal, negation: c.negation, left: 0, right: 0 });
                    stack.push((c.right, Some((id, false))));
                    stack.push((c.left, Some((id, true))));
                }
            }
        }
        Ok(Self { nodes, seed: 0 })
    }

    /// Every tree reachable by some sequence of tie-break choices, up to
    /// `limit` trees. Returns `None` when the limit would be exceeded.
    pub fn enumerate(data: &Dataset, limit: usize) -> Result<Option<Vec<DecisionTree>>> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        data.require_labels()?;
        let mut scorer = SplitScorer::new(data);
        let root: Vec<u32> = (0..data.len() as u32).collect();
        Ok(enumerate_subtrees(data, root, &mut scorer, limit).map(|subtrees| {
            subtrees.into_iter().map(|nodes| DecisionTree { nodes, seed: 0 }).collect()
        }))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn predict(&self, x: &[ValueIndex]) -> bool {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                TreeNode::Leaf { label, .. } => return *label,
                TreeNode::Split { literal, left, right, .. } => {
                    id = if literal.holds(x) { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    /// The conjunctions of edge literals along paths to positive leaves.
    pub fn positive_dnf(&self) -> Dnf {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new())];
        while let Some((id, path)) = stack.pop() {
            match &self.nodes[id] {
                TreeNode::Leaf { label: true, .. } => out.push(path),
                TreeNode::Leaf { label: false, .. } => {}
                TreeNode::Split { literal, negation, left, right, .. } => {
                    let mut l = path.clone();
                    l.push(*literal);
                    let mut r = path;
                    r.push(*negation);
                    stack.push((*right, r));
                    stack.push((*left, l));
                }
            }
        }
        Dnf(out)
    }

    /// Whether every node of this tree appears in `stand` with the same
    /// sample subset, each split among the option node's expanded splits and
    /// each leaf with the same label.
    pub fn embeds_in(&self, stand: &StandTree) -> bool {
        self.nodes.iter().all(|n| {
            let Some(id) = stand.find(n.samples()) else {
                return false;
            };
            let node = stand.node(id);
            match n {
                TreeNode::Leaf { label, .. } => node.leaf_label() == Some(*label),
                TreeNode::Split { literal, left, right, .. } => node.splits().iter().any(|s| {
                    s.literal == *literal
                        && stand.node(s.left).key().samples() == self.nodes[*left].samples()
                        && stand.node(s.right).key().samples() == self.nodes[*right].samples()
                }),
            }
        })
    }
}

/// `Ok(label)` for a leaf, otherwise the candidate splits.
fn leaf_label(data: &Dataset, samples: &[u32], scorer: &mut SplitScorer) -> core::result::Result<bool, Vec<SplitCandidate>> {
    let pos = samples.iter().filter(|&&s| data.label(s) == Some(true)).count();
    if pos == 0 || pos == samples.len() {
        return Ok(pos > 0);
    }
    let candidates = scorer.expansion(samples, data, 1.0);
    if candidates.is_empty() {
        Ok(2 * pos > samples.len())
    } else {
        Err(candidates)
    }
}

fn enumerate_subtrees(data: &Dataset, samples: Vec<u32>, scorer: &mut SplitScorer, limit: usize) -> Option<Vec<Vec<TreeNode>>> {
    let candidates = match leaf_label(data, &samples, scorer) {
        Ok(label) => return Some(vec![vec![TreeNode::Leaf { samples, label }]]),
        Err(c) => c,
    };
    let mut out: Vec<Vec<TreeNode>> = Vec::new();
    for c in candidates {
        let lefts = enumerate_subtrees(data, c.left, scorer, limit)?;
        let rights = enumerate_subtrees(data, c.right, scorer, limit)?;
        if out.len() + lefts.len() * rights.len() > limit {
            return None;
        }
        for l in &lefts {
            for r in &rights {
                let mut nodes = Vec::with_capacity(1 + l.len() + r.len());
                nodes.push(TreeNode::Split { samples: samples.clone(), literal: c.literal, negation: c.negation, left: 1, right: 1 + l.len() });
                nodes.extend(l.iter().cloned().map(|n| shift(n, 1)));
                nodes.extend(r.iter().cloned().map(|n| shift(n, 1 + l.len())));
                out.push(nodes);
            }
        }
    }
    Some(out)
}

fn shift(node: TreeNode, by: usize) -> TreeNode {
    match node {
        TreeNode::Split { samples, literal, negation, left, right } => {
            TreeNode::Split { samples, literal, negation, left: left + by, right: right + by }
        }
        leaf => leaf,
    }
}
