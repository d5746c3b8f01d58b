mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stand_core::{DecisionTree, StandTree};

#[test]
fn every_greedy_tree_embeds_in_the_option_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let data = support::random_binary_dataset(&mut rng, 12, 6);
        let stand = StandTree::fit(data.clone(), 1.0).unwrap();
        support::check_greedy_embedding(&stand, &support::all_samples(&data))
            .unwrap_or_else(|e| panic!("case {case}: {e}"));
        let expected = support::count_greedy_trees(&data, &support::all_samples(&data));
        let trees = DecisionTree::enumerate(&data, 1 << 16).unwrap();
        if let Some(trees) = trees {
            assert_eq!(trees.len() as u128, expected, "case {case}");
            assert!(trees.iter().all(|t| t.embeds_in(&stand)), "case {case}");
        } else {
            assert!(expected > 1 << 16);
        }
    }
}

#[test]
fn seeded_trees_are_among_the_enumerated_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let data = support::random_binary_dataset(&mut rng, 10, 5);
        let all = DecisionTree::enumerate(&data, 1 << 16).unwrap().unwrap();
        for seed in 0..5 {
            let t = DecisionTree::fit(&data, seed).unwrap();
            assert!(all.iter().any(|a| a.nodes() == t.nodes()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_tie_breaks_embed(seed in any::<u64>(), tree_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = support::random_binary_dataset(&mut rng, 12, 6);
        let stand = StandTree::fit(data.clone(), 1.0).unwrap();
        let tree = DecisionTree::fit(&data, tree_seed).unwrap();
        prop_assert!(tree.embeds_in(&stand));
    }
}
