//! Independent oracles shared by the integration and acceptance tests. Gains
//! are recomputed here from raw counts rather than through the library.
#![allow(dead_code)]

use rand::Rng;
use stand_core::{Dataset, Example, FeatureSchema, StandTree};

pub const EPS: f64 = 1e-9;

pub fn gini(n: usize, p: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let q = p as f64 / n as f64;
    2.0 * q * (1.0 - q)
}

fn label(data: &Dataset, s: u32) -> bool {
    data.examples()[s as usize].label == Some(true)
}

/// Partition of `samples` by binary feature `f`: `(X=1, X=0)`.
pub fn partition(data: &Dataset, samples: &[u32], f: usize) -> (Vec<u32>, Vec<u32>) {
    samples.iter().partition(|&&s| data.examples()[s as usize].values[f] == 1)
}

/// Gini gain of splitting on binary feature `f`; `None` if one side is empty.
pub fn gain(data: &Dataset, samples: &[u32], f: usize) -> Option<f64> {
    let (l, r) = partition(data, samples, f);
    if l.is_empty() || r.is_empty() {
        return None;
    }
    let pos = |xs: &[u32]| xs.iter().filter(|&&s| label(data, s)).count();
    let n = samples.len() as f64;
    let parent = gini(samples.len(), pos(samples));
    Some(parent - (l.len() as f64 * gini(l.len(), pos(&l)) + r.len() as f64 * gini(r.len(), pos(&r))) / n)
}

pub fn is_pure(data: &Dataset, samples: &[u32]) -> bool {
    samples.iter().all(|&s| label(data, s) == label(data, samples[0]))
}

/// Features a greedy gini tree may split `samples` on: every best-gain
/// feature, or every separating feature when no split reduces impurity.
/// Empty for leaves.
pub fn greedy_choices(data: &Dataset, samples: &[u32]) -> Vec<usize> {
    option_choices(data, samples, 1.0)
}

/// Features an option node with threshold `alpha` expands.
pub fn option_choices(data: &Dataset, samples: &[u32], alpha: f64) -> Vec<usize> {
    if is_pure(data, samples) {
        return Vec::new();
    }
    let gains: Vec<(usize, f64)> =
        (0..data.schema().arity()).filter_map(|f| gain(data, samples, f).map(|g| (f, g))).collect();
    let best = gains.iter().map(|g| g.1).fold(0.0, f64::max);
    if best <= EPS {
        return gains.iter().map(|g| g.0).collect();
    }
    gains.iter().filter(|g| g.1 >= alpha * best - EPS).map(|g| g.0).collect()
}

/// Number of distinct greedy trees over every tie-break.
pub fn count_greedy_trees(data: &Dataset, samples: &[u32]) -> u128 {
    let choices = greedy_choices(data, samples);
    if choices.is_empty() {
        return 1;
    }
    choices
        .into_iter()
        .map(|f| {
            let (l, r) = partition(data, samples, f);
            count_greedy_trees(data, &l) * count_greedy_trees(data, &r)
        })
        .sum()
}

/// Checks that every node of every greedy tree rooted at `samples` is a node
/// of `stand` carrying the same split.
pub fn check_greedy_embedding(stand: &StandTree, samples: &[u32]) -> Result<(), String> {
    let data = stand.data();
    let id = stand.find(samples).ok_or_else(|| format!("no node for {samples:?}"))?;
    let node = stand.node(id);
    let choices = greedy_choices(data, samples);
    if choices.is_empty() {
        return if node.is_leaf() { Ok(()) } else { Err(format!("{samples:?} should be a leaf")) };
    }
    for f in choices {
        if !node.splits().iter().any(|s| s.literal.feature == f) {
            return Err(format!("{samples:?} lacks split on feature {f}"));
        }
        let (l, r) = partition(data, samples, f);
        check_greedy_embedding(stand, &l)?;
        check_greedy_embedding(stand, &r)?;
    }
    Ok(())
}

pub fn all_samples(data: &Dataset) -> Vec<u32> {
    (0..data.len() as u32).collect()
}

pub fn random_binary_dataset(rng: &mut impl Rng, max_samples: usize, max_features: usize) -> Dataset {
    let n = rng.random_range(1..=max_samples);
    let m = rng.random_range(1..=max_features);
    let examples = (0..n)
        .map(|_| Example::labeled((0..m).map(|_| rng.random_range(0..2)).collect(), rng.random_bool(0.5)))
        .collect();
    Dataset::new(FeatureSchema::binary(m), examples).unwrap()
}

/// Drops examples whose feature vector already appeared, so labels are a
/// function of the features.
pub fn dedup_inputs(data: &Dataset) -> Dataset {
    let mut seen = std::collections::BTreeSet::new();
    let examples = data.examples().iter().filter(|e| seen.insert(e.values.clone())).cloned().collect();
    Dataset::new(data.schema().clone(), examples).unwrap()
}

pub fn d_and() -> Dataset {
    Dataset::from_bits(&[(&[1, 1], true), (&[1, 0], false), (&[0, 1], false), (&[0, 0], false)]).unwrap()
}

fn mask_of(set: &[usize]) -> u8 {
    set.iter().fold(0, |m, &i| m | 1 << i)
}

/// Gini gain of splitting the samples in `within` by column `col`, all as
/// bit masks over seven samples.
fn mask_gain(within: u8, col: u8, positive: u8) -> Option<f64> {
    let count = |m: u8| m.count_ones() as usize;
    let (l, r) = (within & col, within & !col);
    if l == 0 || r == 0 {
        return None;
    }
    let weighted = |m: u8| count(m) as f64 * gini(count(m), count(m & positive));
    Some(gini(count(within), count(within & positive)) - (weighted(l) + weighted(r)) / count(within) as f64)
}

/// Columns an option node over `within` expands at `alpha`.
fn mask_choices(within: u8, cols: &[u8], positive: u8, alpha: f64) -> Vec<usize> {
    let gains: Vec<(usize, f64)> =
        cols.iter().enumerate().filter_map(|(f, &c)| mask_gain(within, c, positive).map(|g| (f, g))).collect();
    let best = gains.iter().map(|g| g.1).fold(0.0, f64::max);
    gains.iter().filter(|g| best > EPS && g.1 >= alpha * best - EPS).map(|g| g.0).collect()
}

/// Widest interval of thresholds `alpha` for which some labeling and some
/// X2/X5 columns make the root expand exactly X3, X4 and X6 and node
/// [0,2,4,5,6] expand exactly X2 and X5, as `(lower, upper)`: splits whose
/// gain ratio to the best is at most `lower` must be rejected, and
/// `alpha <= upper` keeps X3, X4 and X6. Distractor columns only add
/// rejections, so an empty interval rules out every 7x7 dataset.
pub fn three_way_root_window() -> (f64, f64) {
    const ROOT: u8 = 0x7f;
    let (x4, x3) = (mask_of(&[0, 2, 4, 5, 6]), mask_of(&[0, 3, 4]));
    let mut widest = (1.0, 0.0);
    for positive in (0u8..128).filter(|&p| p & mask_of(&[1, 3]) == mask_of(&[1, 3])) {
        for x2 in 0u8..128 {
            for x5 in (0u8..128).filter(|&x5| x4 & x2 == x4 & !x5) {
                let cols = [0, x2, x3, x4, x5, x4, 0];
                let root: Vec<f64> = cols.iter().map(|&c| mask_gain(ROOT, c, positive).unwrap_or(0.0)).collect();
                let left: Vec<f64> = cols.iter().map(|&c| mask_gain(x4, c, positive).unwrap_or(0.0)).collect();
                let (rb, lb) = (root.iter().copied().fold(0.0, f64::max), left.iter().copied().fold(0.0, f64::max));
                if rb <= EPS || lb <= EPS || left[1] < lb - EPS || left[4] < lb - EPS {
                    continue;
                }
                let upper = root[2].min(root[3]) / rb;
                let lower = (root[1] / rb).max(root[4] / rb).max(left[2] / lb);
                if upper - lower > widest.1 - widest.0 {
                    widest = (lower, upper);
                }
            }
        }
    }
    widest
}

/// Seven samples over seven binary features (feature `i` is `X{i+1}`)
/// realizing the worked example as far as gini allows: the root expands
/// exactly X4 and X6 into [0,2,4,5,6] and the pure positive [1,3]; X3 keeps
/// the figure's partition [0,3,4] but loses on gain; node [0,2,4,5,6]
/// expands exactly X2 and X5, which select the same subset. Found by brute
/// force over column and label masks in increasing order, checked with the
/// local gain oracle only.
pub fn d7() -> Dataset {
    const ROOT: u8 = 0x7f;
    let x4 = mask_of(&[0, 2, 4, 5, 6]);
    let x3 = mask_of(&[0, 3, 4]);
    for positive in (0u8..128).filter(|&p| p & mask_of(&[1, 3]) == mask_of(&[1, 3])) {
        for x2 in 0u8..128 {
            for x5 in (0u8..128).filter(|&x5| x4 & x2 == x4 & !x5) {
                let partial = [0, x2, x3, x4, x5, x4, 0];
                if mask_choices(ROOT, &partial, positive, 1.0) != [3, 5]
                    || mask_choices(x4, &partial, positive, 1.0) != [1, 4]
                {
                    continue;
                }
                // distractors vary but never tie
                for x1 in 1u8..127 {
                    for x7 in 1u8..127 {
                        let cols = [x1, x2, x3, x4, x5, x4, x7];
                        if mask_choices(ROOT, &cols, positive, 1.0) == [3, 5]
                            && mask_choices(x4, &cols, positive, 1.0) == [1, 4]
                        {
                            return from_masks(cols, positive);
                        }
                    }
                }
            }
        }
    }
    panic!("no dataset with the worked-example structure");
}

fn from_masks(cols: [u8; 7], positive: u8) -> Dataset {
    let examples = (0..7)
        .map(|s| Example::labeled(cols.iter().map(|c| u32::from(c >> s & 1)).collect(), positive >> s & 1 == 1))
        .collect();
    Dataset::new(FeatureSchema::binary(7), examples).unwrap()
}
