use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::concept::Problem;
use super::learner::Learner;
use super::teach::TeachingTrace;

/// Certainty changes smaller than this are treated as no change.
const CHANGE_EPSILON: f64 = 1e-12;

/// Predictions and certainties of a learner over a holdout set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub completeness: f64,
    pub omissions: usize,
    pub commissions: usize,
    pub predictions: Vec<bool>,
    pub certainties: Vec<f64>,
}

pub fn holdout_truth(holdout: &[Problem]) -> Vec<bool> {
    holdout.iter().flat_map(|p| p.candidates()).map(|c| c.label == Some(true)).collect()
}

pub fn evaluate(learner: &dyn Learner, holdout: &[Problem]) -> Evaluation {
    let mut states = 0usize;
    let mut complete = 0usize;
    let (mut omissions, mut commissions) = (0, 0);
    let mut predictions = Vec::new();
    let mut certainties = Vec::new();
    for state in holdout.iter().flat_map(|p| p.states.iter()) {
        states += 1;
        let mut all_right = true;
        for c in &state.candidates {
            let pred = learner.predict(&c.values);
            let truth = c.label == Some(true);
            match (pred, truth) {
                (false, true) => omissions += 1,
                (true, false) => commissions += 1,
                _ => {}
            }
            all_right &= pred == truth;
            predictions.push(pred);
            certainties.push(learner.certainty(&c.values));
        }
        complete += usize::from(all_right);
    }
    let completeness = if states == 0 { 0.0 } else { complete as f64 / states as f64 };
    Evaluation { completeness, omissions, commissions, predictions, certainties }
}

/// Fraction of holdout states where every candidate is predicted correctly.
pub fn completeness(learner: &dyn Learner, holdout: &[Problem]) -> f64 {
    evaluate(learner, holdout).completeness
}

/// `(omissions, commissions)`: false negatives and false positives over all
/// holdout candidates.
pub fn error_counts(learner: &dyn Learner, holdout: &[Problem]) -> (usize, usize) {
    let e = evaluate(learner, holdout);
    (e.omissions, e.commissions)
}

/// Precision of positive predictions whose signed certainty is at least
/// `threshold`; `None` when there are none.
pub fn precision_of(predictions: &[bool], certainties: &[f64], truth: &[bool], threshold: f64) -> Option<f64> {
    let (mut hits, mut n) = (0usize, 0usize);
    for ((&p, &c), &t) in predictions.iter().zip(certainties).zip(truth) {
        if p && c >= threshold {
            n += 1;
            hits += usize::from(t);
        }
    }
    (n > 0).then(|| hits as f64 / n as f64)
}

pub fn precision_at_certainty(learner: &dyn Learner, holdout: &[Problem], threshold: f64) -> Option<f64> {
    let e = evaluate(learner, holdout);
    precision_of(&e.predictions, &e.certainties, &holdout_truth(holdout), threshold)
}

/// Error re-occurrence: correct predictions that become incorrect after a
/// training event, as a fraction of the correct predictions before it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reoccurrence {
    pub total: Option<f64>,
    /// True positives turning into false negatives.
    pub omission: Option<f64>,
    /// True negatives turning into false positives.
    pub commission: Option<f64>,
    pub omission_events: usize,
    pub commission_events: usize,
}

pub fn reoccurrence_rates(trace: &TeachingTrace) -> Result<Reoccurrence> {
    reoccurrence_rates_in(trace, 0..trace.records.len())
}

/// Re-occurrence over consecutive record pairs inside `records`.
pub fn reoccurrence_rates_in(trace: &TeachingTrace, records: Range<usize>) -> Result<Reoccurrence> {
    let window = &trace.records[records];
    if window.len() < 2 {
        return Err(Error::ShortTrace(window.len()));
    }
    let (mut tp, mut tn, mut om, mut com) = (0usize, 0usize, 0usize, 0usize);
    for pair in window.windows(2) {
        let (before, after) = (&pair[0].predictions, &pair[1].predictions);
        for ((&b, &a), &t) in before.iter().zip(after).zip(&trace.holdout_truth) {
            match (t, b) {
                (true, true) => {
                    tp += 1;
                    om += usize::from(!a);
                }
                (false, false) => {
                    tn += 1;
                    com += usize::from(a);
                }
                _ => {}
            }
        }
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(Reoccurrence {
        total: ratio(om + com, tp + tn),
        omission: ratio(om, tp),
        commission: ratio(com, tn),
        omission_events: om,
        commission_events: com,
    })
}

pub fn productive_monotonicity(trace: &TeachingTrace) -> Result<Option<f64>> {
    productive_monotonicity_in(trace, 0..trace.records.len())
}

/// Among holdout candidates whose certainty changed between consecutive
/// records, the fraction that moved toward `+1` when correct and toward `-1`
/// when incorrect. `None` when nothing changed.
pub fn productive_monotonicity_in(trace: &TeachingTrace, records: Range<usize>) -> Result<Option<f64>> {
    let window = &trace.records[records];
    if window.len() < 2 {
        return Err(Error::ShortTrace(window.len()));
    }
    let (mut productive, mut changes) = (0usize, 0usize);
    for pair in window.windows(2) {
        for ((&b, &a), &t) in pair[0].certainties.iter().zip(&pair[1].certainties).zip(&trace.holdout_truth) {
            let delta = a - b;
            if delta.abs() <= CHANGE_EPSILON {
                continue;
            }
            changes += 1;
            productive += usize::from((delta > 0.0) == t);
        }
    }
    Ok((changes > 0).then(|| productive as f64 / changes as f64))
}
