mod support;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stand_core::teachsim::{random_example, sample_problem, teach_problem, ExperimentConfig, StandLearner, Teacher};
use stand_core::version_space::{ambiguity, enumerate_g, instance_certainty, leaf_generalization};
use stand_core::{Dataset, Error, Example, StandTree, VersionSpace};

fn random_trees(seed: u64, n: usize) -> Vec<StandTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandTree::fit(support::random_binary_dataset(&mut rng, 12, 6), 1.0).unwrap()).collect()
}

/// Learners taught by the simulator for a few problems each, so trees have
/// realistic size and shape.
fn taught_learners(reps: usize, problems: usize) -> Vec<(StandLearner, ExperimentConfig)> {
    let cfg = ExperimentConfig { n_features: 12, ..ExperimentConfig::default() };
    (0..reps)
        .map(|rep| {
            let concept = cfg.concept(rep).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(rep as u64 + 100);
            let mut l = StandLearner::new(cfg.schema(), cfg.alpha);
            let mut t = Teacher::ideal();
            for _ in 0..problems {
                let p = sample_problem(&concept, 3, 4, &mut rng).unwrap();
                teach_problem(&mut l, &p, &mut t).unwrap();
            }
            (l, cfg.clone())
        })
        .collect()
}

/// `(A_i, A'_i)` recomputed from the enumerated paths instead of the
/// reverse edge walk the library uses.
fn oracle_leaf(tree: &StandTree, leaf: stand_core::NodeId, x: &[u32]) -> (usize, usize) {
    let g = leaf_generalization(tree, leaf).unwrap();
    let options: BTreeSet<_> =
        g.paths.iter().flatten().flat_map(|s| s.literals.iter().map(move |l| (s.parent, *l))).collect();
    let a = options.len() + g.specific_extension.len();
    let sat = options.iter().filter(|(_, l)| l.holds(x)).count()
        + g.specific_extension.iter().filter(|l| l.holds(x)).count();
    (a, sat)
}

fn oracle_ic(tree: &StandTree, x: &[u32]) -> f64 {
    let mut sums = [(0.0, 0usize); 2];
    for leaf in tree.route(x) {
        let (a, sat) = oracle_leaf(tree, leaf, x);
        let r = if a == 0 { 1.0 } else { sat as f64 / a as f64 };
        let side = &mut sums[usize::from(tree.node(leaf).leaf_label().unwrap())];
        side.0 += r;
        side.1 += 1;
    }
    let mean = |(s, n): (f64, usize)| if n == 0 { 0.0 } else { s / n as f64 };
    let (p, m) = (mean(sums[1]), mean(sums[0]));
    if p >= m {
        p
    } else {
        -m
    }
}

#[test]
fn every_path_conjunction_selects_exactly_its_leaf() {
    for tree in random_trees(21, 200) {
        let data = tree.data();
        for leaf in tree.leaves() {
            let want = tree.node(leaf).key().samples();
            for conj in leaf_generalization(&tree, leaf).unwrap().conjunctions() {
                let got: Vec<u32> = (0..data.len() as u32)
                    .filter(|&s| conj.iter().all(|l| l.holds(data.values(s))))
                    .collect();
                assert_eq!(got, want);
            }
        }
    }
}

#[test]
fn specific_extensions_hold_on_leaf_samples_and_avoid_options() {
    for tree in random_trees(22, 200) {
        for leaf in tree.leaves() {
            let g = leaf_generalization(&tree, leaf).unwrap();
            let option_features: BTreeSet<usize> = g.union_options.iter().map(|(_, l)| l.feature).collect();
            for l in &g.specific_extension {
                assert!(!option_features.contains(&l.feature));
                for &s in tree.node(leaf).key().samples() {
                    assert!(l.holds(tree.data().values(s)));
                }
            }
        }
    }
}

#[test]
fn general_statements_classify_the_training_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    for _ in 0..200 {
        let data = support::dedup_inputs(&support::random_binary_dataset(&mut rng, 12, 6));
        let tree = StandTree::fit(data.clone(), 1.0).unwrap();
        let g = match enumerate_g(&tree, 2000) {
            Ok(g) => g,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        for dnf in &g.statements {
            for e in data.examples() {
                assert_eq!(dnf.eval(&e.values), e.label.unwrap());
            }
        }
        checked += g.statements.len();
    }
    assert!(checked > 0);
}

#[test]
fn ambiguity_totals_and_bounds() {
    for tree in random_trees(24, 200) {
        let report = ambiguity(&tree);
        assert_eq!(report.total, report.per_leaf.iter().map(|l| l.ambiguity).sum::<usize>());
        for l in &report.per_leaf {
            let (a, _) = oracle_leaf(&tree, l.leaf, &vec![0; tree.data().schema().arity()]);
            assert_eq!(l.ambiguity, a);
            if l.leaf != tree.root() {
                assert!(l.ambiguity >= 1);
            }
        }
    }
}

#[test]
fn training_samples_fully_satisfy_their_leaves() {
    for tree in random_trees(25, 200) {
        for (s, e) in tree.data().examples().iter().enumerate() {
            let report = instance_certainty(&tree, &e.values);
            for l in &report.leaves {
                if tree.node(l.leaf).key().contains(s as u32) {
                    assert_eq!(l.satisfied, l.ambiguity);
                }
            }
        }
    }
}

#[test]
fn consistent_training_samples_score_plus_or_minus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..200 {
        let data = support::dedup_inputs(&support::random_binary_dataset(&mut rng, 12, 6));
        let tree = StandTree::fit(data.clone(), 1.0).unwrap();
        for e in data.examples() {
            let ic = tree.certainty(&e.values).signed_ic;
            assert_eq!(ic, if e.label.unwrap() { 1.0 } else { -1.0 });
        }
    }
}

#[test]
fn certainty_matches_the_path_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for tree in random_trees(28, 100) {
        let arity = tree.data().schema().arity();
        for _ in 0..20 {
            let x: Vec<u32> = (0..arity).map(|_| rng.random_range(0..2)).collect();
            let got = tree.certainty(&x).signed_ic;
            assert!((got - oracle_ic(&tree, &x)).abs() < 1e-12);
        }
    }
}

#[test]
fn certainty_range_on_ten_thousand_examples() {
    let learners = taught_learners(5, 30);
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for i in 0..10_000 {
        let (l, cfg) = &learners[i % learners.len()];
        let x = random_example(&cfg.schema(), &mut rng);
        let r = l.report(&x).unwrap();
        assert!((-1.0..=1.0).contains(&r.signed_ic));
        for side in [r.ic_plus, r.ic_minus].into_iter().flatten() {
            assert!((0.0..=1.0).contains(&side));
        }
        assert!(r.leaves.iter().all(|c| c.satisfied <= c.ambiguity));
        assert_eq!(r.prediction(), r.signed_ic >= 0.0);
    }
}

#[test]
fn cached_version_space_agrees_with_direct_computation() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for (l, cfg) in taught_learners(3, 20) {
        let (tree, space) = (l.tree().unwrap(), l.version_space().unwrap());
        assert_eq!(space.ambiguity(), VersionSpace::new(tree).ambiguity());
        for _ in 0..200 {
            let x = random_example(&cfg.schema(), &mut rng);
            assert_eq!(space.certainty(tree, &x), instance_certainty(tree, &x));
        }
    }
}

/// The leaf of `updated` that `leaf` of `tree` becomes once sample `new` is
/// added to it.
fn grown_leaf(tree: &StandTree, updated: &StandTree, leaf: stand_core::NodeId, new: u32) -> Option<stand_core::NodeId> {
    let mut samples = tree.node(leaf).key().samples().to_vec();
    samples.push(new);
    updated.find(&samples).filter(|&id| updated.node(id).is_leaf())
}

#[test]
fn consistent_positive_examples_never_grow_a_surviving_leaf() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut checked, mut grew) = (0, 0);
    for (l, cfg) in taught_learners(5, 30) {
        let tree = l.tree().unwrap();
        let before = ambiguity(tree);
        for _ in 0..200 {
            let x = random_example(&cfg.schema(), &mut rng);
            let report = tree.certainty(&x);
            let positive: Vec<_> = report.accepted(true).collect();
            if positive.is_empty() {
                continue;
            }
            let updated = tree.incremental_update(&[Example::labeled(x.clone(), true)]).unwrap();
            let after = ambiguity(&updated);
            for leaf in positive {
                if let Some(grown) = grown_leaf(tree, &updated, leaf, tree.data().len() as u32) {
                    let a0 = before.per_leaf.iter().find(|p| p.leaf == leaf).unwrap().ambiguity;
                    let a1 = after.per_leaf.iter().find(|p| p.leaf == grown).unwrap().ambiguity;
                    checked += 1;
                    grew += usize::from(a1 > a0);
                }
            }
        }
    }
    assert!(checked > 0);
    assert_eq!(grew, 0, "{grew} of {checked} surviving leaves grew");
}

/// `(tested, changed)`: fully certain examples, and those whose confirmation
/// changes the model ambiguity.
fn learn_nothing_violations(learners: &[(StandLearner, ExperimentConfig)], probes: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut tested, mut changed) = (0, 0);
    for (l, cfg) in learners {
        let tree = l.tree().unwrap();
        let before = ambiguity(tree).total;
        for _ in 0..probes {
            let x = random_example(&cfg.schema(), &mut rng);
            if tree.certainty(&x).signed_ic != 1.0 {
                continue;
            }
            tested += 1;
            let updated = tree.incremental_update(&[Example::labeled(x, true)]).unwrap();
            changed += usize::from(ambiguity(&updated).total != before);
        }
    }
    (tested, changed)
}

#[test]
#[ignore = "fails: confirming a fully certain example can shift gain ties at ancestor nodes"]
fn confirming_a_fully_certain_example_changes_nothing() {
    let (tested, changed) = learn_nothing_violations(&taught_learners(5, 30), 500, 32);
    assert!(tested > 0);
    assert_eq!(changed, 0, "{changed} of {tested} fully certain confirmations changed the model");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn signed_certainty_is_bounded_and_agrees_with_prediction(seed in any::<u64>(), bits in prop::collection::vec(0u32..2, 6)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Dataset = support::random_binary_dataset(&mut rng, 12, 6);
        let tree = StandTree::fit(data.clone(), 1.0).unwrap();
        let x = &bits[..data.schema().arity()];
        let r = tree.certainty(x);
        prop_assert!((-1.0..=1.0).contains(&r.signed_ic));
        prop_assert_eq!(tree.predict(x), r.signed_ic >= 0.0);
        prop_assert!(!r.leaves.is_empty());
    }
}
