//! Reading a fitted [`StandTree`] as an approximate version space.
//!
//! Each leaf carries a mini version space: the general options on the edges
//! leading into it and its ancestors (every conjunction formed by picking one
//! option per node along a root-to-leaf path selects exactly the leaf's
//! samples), bounded below by a specific extension of literals common to all
//! of the leaf's samples.
//!
//! The ambiguity heuristic of a leaf counts those literals. Instance certainty
//! asks, for each leaf that accepts an example, what fraction of the literals
//! bounding it the example satisfies, averaged per class.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::dataset::{Dnf, Literal, Polarity, ValueIndex};
use crate::tree::{NodeId, StandTree};
use crate::{Error, Result};

/// The alternative edge literals from one parent into one node on a path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OptionSet {
    pub parent: NodeId,
    pub node: NodeId,
    pub literals: Vec<Literal>,
}

/// Mini version space of one leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafGeneralization {
    pub leaf: NodeId,
    /// Root-to-leaf paths, each a sequence of option sets. Sorted.
    pub paths: Vec<Vec<OptionSet>>,
    /// Distinct `(parent, literal)` options across every path.
    pub union_options: Vec<(NodeId, Literal)>,
    pub specific_extension: Vec<Literal>,
}

impl LeafGeneralization {
    /// `A_i`: distinct general options plus the specific extension.
    pub fn ambiguity(&self) -> usize {
        self.union_options.len() + self.specific_extension.len()
    }

    /// The distinct conjunctions obtained by picking one literal per option
    /// set along each path. Each conjunction is sorted.
    pub fn conjunctions(&self) -> BTreeSet<Vec<Literal>> {
        let mut out = BTreeSet::new();
        for path in &self.paths {
            let mut partial: Vec<Vec<Literal>> = vec![Vec::new()];
            for set in path {
                let mut next = Vec::with_capacity(partial.len() * set.literals.len());
                for conj in &partial {
                    for lit in &set.literals {
                        let mut c = conj.clone();
                        c.push(*lit);
                        next.push(c);
                    }
                }
                partial = next;
            }
            for mut c in partial {
                c.sort_unstable();
                c.dedup();
                out.insert(c);
            }
        }
        out
    }
}

/// The part of a leaf generalization needed for ambiguity and certainty.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafSummary {
    pub leaf: NodeId,
    pub label: bool,
    pub options: Vec<(NodeId, Literal)>,
    pub specific: Vec<Literal>,
}

impl LeafSummary {
    pub fn ambiguity(&self) -> usize {
        self.options.len() + self.specific.len()
    }

    /// `A'_i`: the bounding literals `x` satisfies.
    pub fn satisfied(&self, x: &[ValueIndex]) -> usize {
        self.options.iter().filter(|(_, l)| l.holds(x)).count()
            + self.specific.iter().filter(|l| l.holds(x)).count()
    }
}

/// Edges into the leaf and all of its ancestors, and the specific extension.
pub fn leaf_summary(tree: &StandTree, leaf: NodeId) -> Result<LeafSummary> {
    if leaf.index() >= tree.len() {
        return Err(Error::UnknownNode);
    }
    let label = tree.node(leaf).leaf_label().ok_or(Error::NotALeaf)?;
    let mut seen = vec![false; tree.len()];
    seen[leaf.index()] = true;
    let mut stack = vec![leaf];
    let mut options = Vec::new();
    while let Some(id) = stack.pop() {
        for &(parent, lit) in tree.node(id).parents() {
            options.push((parent, lit));
            if !seen[parent.index()] {
                seen[parent.index()] = true;
                stack.push(parent);
            }
        }
    }
    options.sort_unstable();
    options.dedup();
    let specific = specific_extension(tree, leaf, &options);
    Ok(LeafSummary { leaf, label, options, specific })
}

fn specific_extension(tree: &StandTree, leaf: NodeId, options: &[(NodeId, Literal)]) -> Vec<Literal> {
    let data = tree.data();
    let schema = data.schema();
    let samples = tree.node(leaf).key().samples();
    if samples.is_empty() {
        return Vec::new();
    }
    // a feature is settled once a general option pins its value
    let mut settled = vec![false; schema.arity()];
    for (_, lit) in options {
        settled[lit.feature] |= lit.polarity == Polarity::Eq || schema.features()[lit.feature].is_binary();
    }
    let mut out = Vec::new();
    for (f, feature) in schema.features().iter().enumerate() {
        if settled[f] {
            continue;
        }
        let mut present = vec![false; feature.domain.len()];
        for &s in samples {
            present[data.values(s)[f] as usize] = true;
        }
        let constant = present.iter().filter(|&&p| p).count() == 1;
        for (v, &p) in present.iter().enumerate() {
            let lit = match (p, constant) {
                (true, true) => Literal::eq(f, v as ValueIndex),
                (false, _) if !feature.is_binary() => Literal::ne(f, v as ValueIndex),
                _ => continue,
            };
            if !options.iter().any(|(_, o)| *o == lit) {
                out.push(lit);
            }
        }
    }
    out
}

/// Full generalization of a leaf including every root-to-leaf path. The
/// number of paths can grow exponentially with depth; meant for small trees.
pub fn leaf_generalization(tree: &StandTree, leaf: NodeId) -> Result<LeafGeneralization> {
    let summary = leaf_summary(tree, leaf)?;
    let mut memo: BTreeMap<NodeId, Vec<Vec<OptionSet>>> = BTreeMap::new();
    let mut paths = paths_to(tree, leaf, &mut memo);
    paths.sort();
    Ok(LeafGeneralization {
        leaf,
        paths,
        union_options: summary.options,
        specific_extension: summary.specific,
    })
}

fn paths_to(tree: &StandTree, node: NodeId, memo: &mut BTreeMap<NodeId, Vec<Vec<OptionSet>>>) -> Vec<Vec<OptionSet>> {
    if node == tree.root() {
        return vec![Vec::new()];
    }
    if let Some(p) = memo.get(&node) {
        return p.clone();
    }
    let mut by_parent: BTreeMap<NodeId, Vec<Literal>> = BTreeMap::new();
    for &(parent, lit) in tree.node(node).parents() {
        by_parent.entry(parent).or_default().push(lit);
    }
    let mut out = Vec::new();
    for (parent, mut literals) in by_parent {
        literals.sort_unstable();
        for mut prefix in paths_to(tree, parent, memo) {
            prefix.push(OptionSet { parent, node, literals: literals.clone() });
            out.push(prefix);
        }
    }
    memo.insert(node, out.clone());
    out
}

/// Size estimate of a mini version space, saturating on overflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpaceSize {
    pub value: u64,
    pub overflow: bool,
}

/// `(prod |option set|) * (1 + |s|)!` for the given option-set sizes.
pub fn space_size(option_sizes: &[usize], specific_len: usize) -> SpaceSize {
    let mut value: u64 = 1;
    let mut overflow = false;
    let factors = option_sizes.iter().copied().chain(2..=specific_len + 1);
    for f in factors {
        match value.checked_mul(f as u64) {
            Some(v) => value = v,
            None => {
                value = u64::MAX;
                overflow = true;
                break;
            }
        }
    }
    SpaceSize { value, overflow }
}

/// Diagnostic size of a leaf's mini version space, using the option sets of
/// its lexicographically first path.
pub fn mini_space_size(g: &LeafGeneralization) -> SpaceSize {
    let sizes: Vec<usize> = g
        .paths
        .first()
        .map(|p| p.iter().map(|s| s.literals.len()).collect())
        .unwrap_or_default();
    space_size(&sizes, g.specific_extension.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeafAmbiguity {
    pub leaf: NodeId,
    pub label: bool,
    pub ambiguity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmbiguityReport {
    pub per_leaf: Vec<LeafAmbiguity>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafCertainty {
    pub leaf: NodeId,
    pub label: bool,
    /// `A_i`
    pub ambiguity: usize,
    /// `A'_i`
    pub satisfied: usize,
}

impl LeafCertainty {
    /// `A'_i / A_i`; a leaf bounded by no literals accepts fully.
    pub fn ratio(&self) -> f64 {
        if self.ambiguity == 0 {
            1.0
        } else {
            self.satisfied as f64 / self.ambiguity as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertaintyReport {
    pub ic_plus: Option<f64>,
    pub ic_minus: Option<f64>,
    pub signed_ic: f64,
    /// Accepting leaves of both classes.
    pub leaves: Vec<LeafCertainty>,
}

impl CertaintyReport {
    pub fn from_leaves(leaves: Vec<LeafCertainty>) -> Self {
        let ic_plus = mean_ratio(leaves.iter().filter(|l| l.label));
        let ic_minus = mean_ratio(leaves.iter().filter(|l| !l.label));
        let (p, m) = (ic_plus.unwrap_or(0.0), ic_minus.unwrap_or(0.0));
        let signed_ic = if p >= m { p } else { -m };
        Self { ic_plus, ic_minus, signed_ic, leaves }
    }

    /// Positive iff some leaf accepts and `IC+ >= IC-`.
    pub fn prediction(&self) -> bool {
        !self.leaves.is_empty() && self.ic_plus.unwrap_or(0.0) >= self.ic_minus.unwrap_or(0.0)
    }

    pub fn accepted(&self, label: bool) -> impl Iterator<Item = NodeId> + '_ {
        self.leaves.iter().filter(move |l| l.label == label).map(|l| l.leaf)
    }
}

fn mean_ratio<'a>(leaves: impl Iterator<Item = &'a LeafCertainty>) -> Option<f64> {
    let (sum, n) = leaves.fold((0.0, 0usize), |(s, n), l| (s + l.ratio(), n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Signed instance certainty of `x`, summarizing only the leaves it reaches.
pub fn instance_certainty(tree: &StandTree, x: &[ValueIndex]) -> CertaintyReport {
    let leaves = tree
        .route(x)
        .into_iter()
        .map(|leaf| {
            let s = leaf_summary(tree, leaf).expect("route yields leaves");
            LeafCertainty { leaf, label: s.label, ambiguity: s.ambiguity(), satisfied: s.satisfied(x) }
        })
        .collect();
    CertaintyReport::from_leaves(leaves)
}

/// Ambiguity heuristic over every leaf of both classes.
pub fn ambiguity(tree: &StandTree) -> AmbiguityReport {
    VersionSpace::new(tree).ambiguity()
}

/// Precomputed leaf summaries of one tree, for repeated certainty queries.
#[derive(Debug, Clone, PartialEq)]
pub struct VersionSpace {
    summaries: Vec<LeafSummary>,
    slot: Vec<Option<usize>>,
}

impl VersionSpace {
    pub fn new(tree: &StandTree) -> Self {
        let mut slot = vec![None; tree.len()];
        let summaries: Vec<LeafSummary> = tree
            .leaves()
            .map(|leaf| leaf_summary(tree, leaf).expect("leaf"))
            .collect();
        for (i, s) in summaries.iter().enumerate() {
            slot[s.leaf.index()] = Some(i);
        }
        Self { summaries, slot }
    }

    pub fn summaries(&self) -> &[LeafSummary] {
        &self.summaries
    }

    pub fn summary(&self, leaf: NodeId) -> Option<&LeafSummary> {
        self.slot.get(leaf.index()).copied().flatten().map(|i| &self.summaries[i])
    }

    pub fn ambiguity(&self) -> AmbiguityReport {
        let per_leaf: Vec<LeafAmbiguity> = self
            .summaries
            .iter()
            .map(|s| LeafAmbiguity { leaf: s.leaf, label: s.label, ambiguity: s.ambiguity() })
            .collect();
        let total = per_leaf.iter().map(|l| l.ambiguity).sum();
        AmbiguityReport { per_leaf, total }
    }

    /// Same result as [`instance_certainty`] for the tree this was built from.
    pub fn certainty(&self, tree: &StandTree, x: &[ValueIndex]) -> CertaintyReport {
        let leaves = tree
            .route(x)
            .into_iter()
            .filter_map(|leaf| self.summary(leaf))
            .map(|s| LeafCertainty {
                leaf: s.leaf,
                label: s.label,
                ambiguity: s.ambiguity(),
                satisfied: s.satisfied(x),
            })
            .collect();
        CertaintyReport::from_leaves(leaves)
    }
}

/// Output of [`enumerate_g`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSet {
    /// Minimal sets of positive leaves covering every positive sample.
    pub covers: Vec<Vec<NodeId>>,
    pub statements: Vec<Dnf>,
    pub truncated: bool,
}

/// Largest number of positive leaves for which covers are searched exhaustively.
pub const MAX_COVER_LEAVES: usize = 20;

/// Enumerates most-general DNF statements: for every minimal cover of the
/// positive training samples by positive leaves, every disjunction choosing
/// one conjunction per covering leaf. Stops after `limit` statements.
pub fn enumerate_g(tree: &StandTree, limit: usize) -> Result<GeneralSet> {
    let positive: Vec<NodeId> = tree.leaves().filter(|&l| tree.node(l).leaf_label() == Some(true)).collect();
    if positive.len() > MAX_COVER_LEAVES {
        return Err(Error::Infeasible(alloc::format!(
            "{} positive leaves exceeds the exhaustive cover limit of {MAX_COVER_LEAVES}",
            positive.len()
        )));
    }
    let data = tree.data();
    let targets: Vec<u32> = (0..data.len() as u32).filter(|&s| data.label(s) == Some(true)).collect();
    let covers_of: Vec<Vec<bool>> = positive
        .iter()
        .map(|&l| {
            let key = tree.node(l).key();
            targets.iter().map(|&s| key.contains(s)).collect()
        })
        .collect();
    let covers_all = |mask: u32| {
        (0..targets.len()).all(|t| (0..positive.len()).any(|i| mask & (1 << i) != 0 && covers_of[i][t]))
    };
    let mut masks: Vec<u32> = (0..(1u32 << positive.len()))
        .filter(|&m| covers_all(m))
        .filter(|&m| (0..positive.len()).all(|i| m & (1 << i) == 0 || !covers_all(m & !(1 << i))))
        .collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let covers: Vec<Vec<NodeId>> = masks
        .iter()
        .map(|&m| (0..positive.len()).filter(|i| m & (1 << i) != 0).map(|i| positive[i]).collect())
        .collect();

    let mut conj_cache: BTreeMap<NodeId, Vec<Vec<Literal>>> = BTreeMap::new();
    let mut seen: BTreeSet<Dnf> = BTreeSet::new();
    let mut statements = Vec::new();
    let mut truncated = false;
    'covers: for cover in &covers {
        let mut options: Vec<&Vec<Vec<Literal>>> = Vec::with_capacity(cover.len());
        for &leaf in cover {
            if !conj_cache.contains_key(&leaf) {
                let g = leaf_generalization(tree, leaf)?;
                conj_cache.insert(leaf, g.conjunctions().into_iter().collect());
            }
        }
        for leaf in cover {
            options.push(&conj_cache[leaf]);
        }
        let mut idx = vec![0usize; options.len()];
        loop {
            let mut dnf: Vec<Vec<Literal>> = idx.iter().zip(&options).map(|(&i, o)| o[i].clone()).collect();
            dnf.sort();
            dnf.dedup();
            let dnf = Dnf(dnf);
            if !seen.contains(&dnf) {
                if statements.len() >= limit {
                    truncated = true;
                    break 'covers;
                }
                seen.insert(dnf.clone());
                statements.push(dnf);
            }
            // odometer over the cartesian product
            let mut k = 0;
            loop {
                if k == idx.len() {
                    continue 'covers;
                }
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
    Ok(GeneralSet { covers, statements, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Dataset;

    fn d_and_tree() -> StandTree {
        let data = Dataset::from_bits(&[(&[1, 1], true), (&[1, 0], false), (&[0, 1], false), (&[0, 0], false)])
            .unwrap();
        StandTree::fit(data, 1.0).unwrap()
    }

    #[test]
    fn space_size_formula() {
        assert_eq!(space_size(&[2, 2], 2).value, 24);
        assert_eq!(space_size(&[1], 0).value, 1);
        assert_eq!(space_size(&[3, 2], 3).value, 144);
        let big = space_size(&[2], 40);
        assert!(big.overflow);
        assert_eq!(big.value, u64::MAX);
    }

    #[test]
    fn d_and_positive_leaf_generalization() {
        let tree = d_and_tree();
        let leaf = tree.find(&[0]).unwrap();
        let g = leaf_generalization(&tree, leaf).unwrap();
        assert_eq!(g.paths.len(), 2);
        let conj: Vec<_> = g.conjunctions().into_iter().collect();
        assert_eq!(conj, vec![vec![Literal::eq(0, 1), Literal::eq(1, 1)]]);
        assert!(g.specific_extension.is_empty());
        assert_eq!(g.ambiguity(), 4);
        assert_eq!(mini_space_size(&g).value, 1);
    }

    #[test]
    fn categorical_specific_extension_keeps_exclusions() {
        use crate::dataset::{Example, Feature, FeatureSchema};
        use alloc::string::ToString;
        let color = Feature::new("color", ["r", "g", "b"].iter().map(|v| v.to_string()).collect());
        let schema = FeatureSchema::new(vec![color, Feature::binary("X")]).unwrap();
        let data = Dataset::new(schema, vec![Example::labeled(vec![0, 1], true), Example::labeled(vec![1, 1], true)])
            .unwrap();
        let tree = StandTree::fit(data, 1.0).unwrap();
        let g = leaf_generalization(&tree, tree.root()).unwrap();
        assert_eq!(g.specific_extension, vec![Literal::ne(0, 2), Literal::eq(1, 1)]);
    }

    #[test]
    fn root_leaf_generalization_is_the_empty_conjunction() {
        let data = Dataset::from_bits(&[(&[1, 0, 1], true)]).unwrap();
        let tree = StandTree::fit(data, 1.0).unwrap();
        let g = leaf_generalization(&tree, tree.root()).unwrap();
        assert_eq!(g.conjunctions().into_iter().collect::<Vec<_>>(), vec![Vec::<Literal>::new()]);
        assert_eq!(g.specific_extension, vec![Literal::eq(0, 1), Literal::eq(1, 0), Literal::eq(2, 1)]);
        assert_eq!(ambiguity(&tree).total, 3);
    }

    #[test]
    fn non_leaf_is_rejected() {
        let tree = d_and_tree();
        assert_eq!(leaf_generalization(&tree, tree.root()), Err(Error::NotALeaf));
        assert_eq!(leaf_summary(&tree, NodeId(999)), Err(Error::UnknownNode));
    }

    #[test]
    fn certainty_on_d_and() {
        let tree = d_and_tree();
        let pos = instance_certainty(&tree, &[1, 1]);
        assert_eq!(pos.signed_ic, 1.0);
        assert_eq!(pos.ic_minus, None);
        let neg = instance_certainty(&tree, &[0, 0]);
        assert_eq!(neg.signed_ic, -1.0);
        assert_eq!(neg.ic_plus, None);
        assert!(!neg.prediction());
        let vs = VersionSpace::new(&tree);
        for x in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(vs.certainty(&tree, &x), instance_certainty(&tree, &x));
        }
    }

    #[test]
    fn certainty_arithmetic() {
        let one = CertaintyReport::from_leaves(vec![LeafCertainty { leaf: NodeId(1), label: true, ambiguity: 10, satisfied: 8 }]);
        assert_eq!(one.ic_plus, Some(0.8));
        assert_eq!(one.signed_ic, 0.8);
        let mixed = CertaintyReport::from_leaves(vec![
            LeafCertainty { leaf: NodeId(1), label: true, ambiguity: 4, satisfied: 1 },
            LeafCertainty { leaf: NodeId(2), label: false, ambiguity: 4, satisfied: 3 },
        ]);
        assert_eq!(mixed.signed_ic, -0.75);
        assert!(!mixed.prediction());
        let none = CertaintyReport::from_leaves(Vec::new());
        assert_eq!(none.signed_ic, 0.0);
        assert!(!none.prediction());
    }

    #[test]
    fn d_and_general_set() {
        let tree = d_and_tree();
        let g = enumerate_g(&tree, 10).unwrap();
        assert_eq!(g.covers, vec![vec![tree.find(&[0]).unwrap()]]);
        assert_eq!(g.statements, vec![Dnf(vec![vec![Literal::eq(0, 1), Literal::eq(1, 1)]])]);
        assert!(!g.truncated);
        let none = enumerate_g(&tree, 0).unwrap();
        assert!(none.statements.is_empty());
        assert!(none.truncated);
    }

    #[test]
    fn training_samples_are_fully_certain() {
        let data = Dataset::from_bits(&[
            (&[1, 1, 0], true),
            (&[1, 0, 1], true),
            (&[0, 1, 1], false),
            (&[0, 0, 0], false),
            (&[1, 1, 1], true),
        ])
        .unwrap();
        let tree = StandTree::fit(data.clone(), 1.0).unwrap();
        for x in data.examples() {
            let ic = tree.certainty(&x.values).signed_ic;
            assert_eq!(ic, if x.label == Some(true) { 1.0 } else { -1.0 });
        }
    }
}
