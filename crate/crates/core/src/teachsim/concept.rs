use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dnf, Example, FeatureSchema, Literal, ValueIndex};
use crate::{Error, Result};

/// Random examples drawn when checking that a target is neither always true
/// nor always false.
const TRIVIALITY_SAMPLES: usize = 2000;
const CONCEPT_ATTEMPTS: usize = 1000;
const STATE_ATTEMPTS: usize = 10_000;

/// A ground-truth target over a schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptSpec {
    pub schema: FeatureSchema,
    pub target: Dnf,
    pub seed: u64,
}

impl ConceptSpec {
    pub fn label(&self, values: &[ValueIndex]) -> bool {
        self.target.eval(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub candidates: Vec<Example>,
}

/// A sequence of states, each with candidate actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub states: Vec<State>,
}

impl Problem {
    pub fn candidates(&self) -> impl Iterator<Item = &Example> {
        self.states.iter().flat_map(|s| s.candidates.iter())
    }

    pub fn candidate_count(&self) -> usize {
        self.states.iter().map(|s| s.candidates.len()).sum()
    }
}

pub fn random_example(schema: &FeatureSchema, rng: &mut impl Rng) -> Vec<ValueIndex> {
    schema
        .features()
        .iter()
        .map(|f| rng.random_range(0..f.domain.len() as ValueIndex))
        .collect()
}

/// Random DNF with `n_disjuncts` conjunctions of `literals_per` equality
/// literals on distinct features, resampled until it is neither trivially
/// true nor trivially false on random examples.
pub fn gen_concept(schema: &FeatureSchema, n_disjuncts: usize, literals_per: usize, seed: u64) -> Result<ConceptSpec> {
    if n_disjuncts == 0 || literals_per == 0 {
        return Err(Error::Infeasible(format!(
            "need at least one disjunct and one literal, got {n_disjuncts} x {literals_per}"
        )));
    }
    if literals_per > schema.arity() {
        return Err(Error::Infeasible(format!(
            "{literals_per} literals per conjunction but only {} features",
            schema.arity()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..CONCEPT_ATTEMPTS {
        let target = Dnf((0..n_disjuncts).map(|_| random_conjunction(schema, literals_per, &mut rng)).collect());
        let (mut pos, mut neg) = (false, false);
        for _ in 0..TRIVIALITY_SAMPLES {
            if target.eval(&random_example(schema, &mut rng)) {
                pos = true;
            } else {
                neg = true;
            }
            if pos && neg {
                return Ok(ConceptSpec { schema: schema.clone(), target, seed });
            }
        }
    }
    Err(Error::Infeasible(format!(
        "no non-trivial {n_disjuncts} x {literals_per} target found in {CONCEPT_ATTEMPTS} attempts"
    )))
}

fn random_conjunction(schema: &FeatureSchema, k: usize, rng: &mut impl Rng) -> Vec<Literal> {
    let mut features: Vec<usize> = (0..schema.arity()).collect();
    for i in 0..k {
        let j = rng.random_range(i..features.len());
        features.swap(i, j);
    }
    let mut conj: Vec<Literal> = features[..k]
        .iter()
        .map(|&f| Literal::eq(f, rng.random_range(0..schema.features()[f].domain.len() as ValueIndex)))
        .collect();
    conj.sort_unstable();
    conj
}

/// Unlabeled problem of uniformly random candidates.
pub fn random_problem(schema: &FeatureSchema, n_states: usize, candidates_per_state: usize, rng: &mut impl Rng) -> Problem {
    let states = (0..n_states)
        .map(|_| State {
            candidates: (0..candidates_per_state)
                .map(|_| Example::unlabeled(random_example(schema, rng)))
                .collect(),
        })
        .collect();
    Problem { states }
}

/// Labeled problem; every state is resampled until it holds a positive
/// candidate.
pub fn sample_problem(concept: &ConceptSpec, n_states: usize, candidates_per_state: usize, rng: &mut impl Rng) -> Result<Problem> {
    if n_states == 0 || candidates_per_state == 0 {
        return Err(Error::Infeasible(format!("empty problem shape {n_states} x {candidates_per_state}")));
    }
    let mut states = Vec::with_capacity(n_states);
    for _ in 0..n_states {
        let mut found = None;
        for _ in 0..STATE_ATTEMPTS {
            let candidates: Vec<Example> = (0..candidates_per_state)
                .map(|_| {
                    let values = random_example(&concept.schema, rng);
                    let label = concept.label(&values);
                    Example::labeled(values, label)
                })
                .collect();
            if candidates.iter().any(|c| c.label == Some(true)) {
                found = Some(State { candidates });
                break;
            }
        }
        states.push(found.ok_or_else(|| {
            Error::Infeasible(format!("no positive candidate found in {STATE_ATTEMPTS} sampled states"))
        })?);
    }
    Ok(Problem { states })
}

pub fn gen_problem(concept: &ConceptSpec, n_states: usize, candidates_per_state: usize, seed: u64) -> Result<Problem> {
    sample_problem(concept, n_states, candidates_per_state, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concepts_are_reproducible_and_nontrivial() {
        let schema = FeatureSchema::binary(20);
        let a = gen_concept(&schema, 3, 3, 1).unwrap();
        let b = gen_concept(&schema, 3, 3, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.target.0.len(), 3);
        assert!(a.target.0.iter().all(|c| c.len() == 3));
        let c = gen_concept(&schema, 3, 3, 2).unwrap();
        assert_ne!(a.target, c.target);
    }

    #[test]
    fn single_disjunct_is_conjunctive() {
        let c = gen_concept(&FeatureSchema::binary(8), 1, 4, 7).unwrap();
        assert_eq!(c.target.0.len(), 1);
    }

    #[test]
    fn infeasible_shapes_error() {
        let schema = FeatureSchema::binary(3);
        assert!(gen_concept(&schema, 1, 4, 0).is_err());
        assert!(gen_concept(&schema, 0, 1, 0).is_err());
    }

    #[test]
    fn problems_have_a_positive_per_state() {
        let concept = gen_concept(&FeatureSchema::binary(10), 2, 3, 5).unwrap();
        let p = gen_problem(&concept, 1, 4, 9).unwrap();
        assert_eq!(p.candidate_count(), 4);
        assert_eq!(p, gen_problem(&concept, 1, 4, 9).unwrap());
        let big = gen_problem(&concept, 30, 3, 11).unwrap();
        for s in &big.states {
            assert!(s.candidates.iter().any(|c| c.label == Some(true)));
            for c in &s.candidates {
                assert_eq!(c.label, Some(concept.label(&c.values)));
            }
        }
    }

    #[test]
    fn unreachable_positives_error() {
        // one conjunction over all 24 features: 2^-24 per candidate
        let schema = FeatureSchema::binary(24);
        let concept = ConceptSpec {
            schema: schema.clone(),
            target: Dnf(alloc::vec![(0..24).map(|f| Literal::eq(f, 1)).collect()]),
            seed: 0,
        };
        assert!(gen_problem(&concept, 1, 1, 0).is_err());
    }
}
