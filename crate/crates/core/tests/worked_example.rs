mod support;

use std::collections::BTreeSet;

use stand_core::baselines::TreeNode;
use stand_core::version_space::{enumerate_g, leaf_generalization};
use stand_core::{DecisionTree, Literal, StandTree};

fn x(i: usize) -> Literal {
    Literal::eq(i - 1, 1)
}

fn not_x(i: usize) -> Literal {
    Literal::eq(i - 1, 0)
}

fn d7_tree() -> StandTree {
    StandTree::fit(support::d7(), 1.0).unwrap()
}

#[test]
fn no_threshold_gives_the_three_way_root() {
    let (lower, upper) = support::three_way_root_window();
    assert!(upper <= lower, "feasible window ({lower}, {upper}]");
}

#[test]
fn root_options_share_nodes() {
    let tree = d7_tree();
    let root = tree.node(tree.root());
    let feats: BTreeSet<usize> = root.splits().iter().map(|s| s.literal.feature + 1).collect();
    assert_eq!(feats, BTreeSet::from([4, 6]));
    assert_eq!(root.edges().count(), 4);
    let targets: BTreeSet<Vec<u32>> = root.edges().map(|(_, c)| tree.node(c).key().samples().to_vec()).collect();
    assert_eq!(targets, BTreeSet::from([vec![0, 2, 4, 5, 6], vec![1, 3]]));
    let pure = tree.find(&[1, 3]).unwrap();
    assert_eq!(tree.node(pure).leaf_label(), Some(true));
}

#[test]
fn left_most_leaf_has_four_alternative_conjunctions() {
    let tree = d7_tree();
    let left = tree.find(&[0, 2, 4, 5, 6]).unwrap();
    let (_, leaf) = tree.node(left).edges().find(|(l, _)| *l == x(2)).unwrap();
    let g = leaf_generalization(&tree, leaf).unwrap();
    let mut expected: BTreeSet<Vec<Literal>> = BTreeSet::new();
    for a in [x(4), x(6)] {
        for b in [x(2), not_x(5)] {
            let mut c = vec![a, b];
            c.sort();
            expected.insert(c);
        }
    }
    assert_eq!(g.conjunctions(), expected);
}

#[test]
fn baseline_rooted_at_x4_derives_the_two_term_statement() {
    let data = support::d7();
    let trees = DecisionTree::enumerate(&data, 1000).unwrap().unwrap();
    let rendered: Vec<String> = trees
        .iter()
        .filter(|t| matches!(t.nodes().first(), Some(TreeNode::Split { literal, .. }) if literal.feature == 3))
        .map(|t| t.positive_dnf().display(data.schema()).to_string())
        .collect();
    assert!(rendered.contains(&"OR(AND(X4=1,X2=1), AND(X4=0))".to_string()), "{rendered:?}");
}

#[test]
fn general_set_pairs_left_most_conjunctions_with_the_pure_leaf() {
    let tree = d7_tree();
    let g = enumerate_g(&tree, 10_000).unwrap();
    assert!(!g.truncated);
    let pure = tree.find(&[1, 3]).unwrap();
    assert!(g.covers.iter().any(|c| c.contains(&pure)));
    assert!(!g.statements.is_empty());
    for dnf in &g.statements {
        for e in tree.data().examples() {
            assert_eq!(dnf.eval(&e.values), e.label.unwrap());
        }
    }
}
