use alloc::vec::Vec;

use serde::Serialize;

use crate::{Error, Result};

use super::concept::Problem;
use super::learner::Learner;

/// Minimum signed certainty over the candidates predicted positive, or 0
/// when nothing would be proposed.
pub fn problem_score(learner: &dyn Learner, problem: &Problem) -> f64 {
    problem
        .candidates()
        .filter(|c| learner.predict(&c.values))
        .map(|c| learner.certainty(&c.values))
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))))
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub chosen: Problem,
    /// Position of `chosen` in the pool it was selected from.
    pub index: usize,
    pub score: f64,
    /// Scores of the pool before refreshing, in pool order.
    pub scores: Vec<f64>,
    /// Pool after replacement; same length as before.
    pub pool: Vec<Problem>,
}

/// Picks the lowest-scoring problem (first on ties), then replaces it and
/// the highest-scoring half of the remaining pool with fresh problems from
/// `regenerate`, keeping pool positions.
pub fn active_select(
    learner: &dyn Learner,
    pool: Vec<Problem>,
    mut regenerate: impl FnMut() -> Result<Problem>,
) -> Result<Selection> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let scores: Vec<f64> = pool.iter().map(|p| problem_score(learner, p)).collect();
    let mut index = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[index] {
            index = i;
        }
    }
    let mut others: Vec<usize> = (0..pool.len()).filter(|&i| i != index).collect();
    // highest score first; stable so earlier positions win ties
    others.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut replace = alloc::vec![false; pool.len()];
    replace[index] = true;
    for &i in others.iter().take(pool.len() / 2) {
        replace[i] = true;
    }
    let chosen = pool[index].clone();
    let mut refreshed = Vec::with_capacity(pool.len());
    for (i, p) in pool.into_iter().enumerate() {
        refreshed.push(if replace[i] { regenerate()? } else { p });
    }
    Ok(Selection { chosen, index, score: scores[index], scores, pool: refreshed })
}

/// Fraction of the normal learner's completeness deficit removed by active
/// selection; `None` when the normal learner has no deficit.
pub fn active_utility(c_active: f64, c_normal: f64) -> Option<f64> {
    let deficit = 1.0 - c_normal;
    (deficit > 0.0).then(|| (c_active - c_normal) / deficit)
}

/// [`active_utility`] on completeness counts over the same holdout of
/// `states` states, as a reduced fraction `(numerator, denominator)`.
pub fn active_utility_ratio(active_complete: u64, normal_complete: u64, states: u64) -> Option<(i64, u64)> {
    let deficit = states.checked_sub(normal_complete).filter(|&d| d > 0)?;
    let gain = active_complete as i64 - normal_complete as i64;
    let g = gcd(gain.unsigned_abs(), deficit).max(1);
    Some((gain / g as i64, deficit / g))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
