use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, Literal};
use crate::{Error, Result};

/// Relative tolerance used when comparing a gain against the best gain.
pub const GAIN_TOLERANCE: f64 = 1e-9;

/// Gini impurity `2p(1-p)` of a multiset of binary labels.
pub fn impurity(labels: &[bool]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyLabels);
    }
    let pos = labels.iter().filter(|&&l| l).count();
    Ok(gini(labels.len(), pos))
}

#[inline]
pub(crate) fn gini(n: usize, pos: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let p = pos as f64;
    2.0 * p * (n - p) / (n * n)
}

/// One accepted (or candidate) split of a node's samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub literal: Literal,
    pub negation: Literal,
    pub gain: f64,
    /// Samples satisfying `literal`.
    pub left: Vec<u32>,
    /// Samples satisfying `negation`.
    pub right: Vec<u32>,
}

/// Per-node split scoring with reusable count buffers.
pub(crate) struct SplitScorer {
    splits: Vec<(Literal, Literal)>,
    offsets: Vec<usize>,
    total: Vec<u32>,
    positive: Vec<u32>,
}

struct Scored {
    split: usize,
    gain: f64,
    left_n: u32,
}

impl SplitScorer {
    pub(crate) fn new(data: &Dataset) -> Self {
        let schema = data.schema();
        let mut offsets = Vec::with_capacity(schema.arity());
        let mut width = 0;
        for f in schema.features() {
            offsets.push(width);
            width += f.domain.len();
        }
        Self {
            splits: schema.splits(),
            offsets,
            total: vec![0; width],
            positive: vec![0; width],
        }
    }

    fn score(&mut self, samples: &[u32], data: &Dataset) -> (usize, Vec<Scored>) {
        self.total.iter_mut().for_each(|c| *c = 0);
        self.positive.iter_mut().for_each(|c| *c = 0);
        let mut pos_total = 0usize;
        for &s in samples {
            let label = data.label(s).unwrap_or(false);
            pos_total += usize::from(label);
            for (&off, &v) in self.offsets.iter().zip(data.values(s)) {
                let idx = off + v as usize;
                self.total[idx] += 1;
                self.positive[idx] += u32::from(label);
            }
        }
        let n = samples.len();
        let parent = gini(n, pos_total);
        let mut scored = Vec::new();
        for (i, (lit, _)) in self.splits.iter().enumerate() {
            // Eq literal selects the counted cell; Ne is its complement.
            let idx = self.offsets[lit.feature] + lit.value as usize;
            let (cell_n, cell_p) = (self.total[idx] as usize, self.positive[idx] as usize);
            let (left_n, left_p) = match lit.polarity {
                crate::dataset::Polarity::Eq => (cell_n, cell_p),
                crate::dataset::Polarity::Ne => (n - cell_n, pos_total - cell_p),
            };
            let (right_n, right_p) = (n - left_n, pos_total - left_p);
            if left_n == 0 || right_n == 0 {
                continue;
            }
            let children = (left_n as f64 * gini(left_n, left_p)
                + right_n as f64 * gini(right_n, right_p))
                / n as f64;
            let gain = (parent - children).max(0.0);
            scored.push(Scored { split: i, gain, left_n: left_n as u32 });
        }
        (pos_total, scored)
    }

    fn materialize(&self, scored: &[Scored], samples: &[u32], data: &Dataset) -> Vec<SplitCandidate> {
        scored
            .iter()
            .map(|s| {
                let (literal, negation) = self.splits[s.split];
                let mut left = Vec::with_capacity(s.left_n as usize);
                let mut right = Vec::with_capacity(samples.len() - s.left_n as usize);
                for &i in samples {
                    if literal.holds(data.values(i)) {
                        left.push(i);
                    } else {
                        right.push(i);
                    }
                }
                SplitCandidate { literal, negation, gain: s.gain, left, right }
            })
            .collect()
    }

    /// Splits within `alpha` of the best positive gain.
    pub(crate) fn best(&mut self, samples: &[u32], data: &Dataset, alpha: f64) -> Vec<SplitCandidate> {
        let (_, mut scored) = self.score(samples, data);
        let best = scored.iter().map(|s| s.gain).fold(0.0_f64, f64::max);
        if best <= 0.0 {
            return Vec::new();
        }
        let threshold = alpha * best * (1.0 - GAIN_TOLERANCE);
        scored.retain(|s| s.gain >= threshold && s.gain > 0.0);
        // stable: ties keep feature/value order
        scored.sort_by(|a, b| b.gain.total_cmp(&a.gain));
        self.materialize(&scored, samples, data)
    }

    /// The splits a node expands: the near-best splits, or when every split
    /// has zero gain, every split that separates the samples at all.
    pub(crate) fn expansion(&mut self, samples: &[u32], data: &Dataset, alpha: f64) -> Vec<SplitCandidate> {
        let best = self.best(samples, data, alpha);
        if !best.is_empty() {
            return best;
        }
        let (_, scored) = self.score(samples, data);
        self.materialize(&scored, samples, data)
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// All splits of `samples` whose gain is at least `alpha` times the best
/// gain, ordered by gain (descending) then feature and value order. Returns
/// an empty list when no split reduces impurity.
pub fn best_splits(samples: &[u32], data: &Dataset, alpha: f64) -> Result<Vec<SplitCandidate>> {
    check_alpha(alpha)?;
    data.require_labels()?;
    Ok(SplitScorer::new(data).best(samples, data, alpha))
}

/// The splits a node of the option tree (or a greedy tree) expands; see
/// [`best_splits`]. Impure nodes whose splits all have zero gain fall back to
/// every split that produces two non-empty children.
pub fn expansion_splits(samples: &[u32], data: &Dataset, alpha: f64) -> Result<Vec<SplitCandidate>> {
    check_alpha(alpha)?;
    data.require_labels()?;
    Ok(SplitScorer::new(data).expansion(samples, data, alpha))
}
