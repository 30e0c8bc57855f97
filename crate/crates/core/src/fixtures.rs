//! Small named trees used by tests, examples and the CLI smoke checks.

use crate::scalar::Scalar;
use crate::tree::{TreeBuilder, WeightedTree};

fn int<T: Scalar>(v: i64) -> T {
    T::from_i64(v).expect("integer fits")
}

/// Five-leaf caterpillar `1,2 | 3 | 4,5`: twigs 1..=5 for leaves 1..=5, inner
/// edge 6 between the stalk of {1,2} and the node of 3, inner edge 7 between
/// that node and the stalk of {4,5}.
pub fn caterpillar<T: Scalar>() -> WeightedTree<T> {
    caterpillar_with([1, 2, 3, 4, 5, 6, 7].map(int))
}

/// Caterpillar with weights `[a, b, c, d, e, f1, f2]` in the layout of
/// [`caterpillar`].
pub fn caterpillar_with<T: Scalar>(w: [T; 7]) -> WeightedTree<T> {
    let [a, b, c, d, e, f1, f2] = w;
    let mut t = TreeBuilder::new();
    let s1 = t.internal();
    let mid = t.internal();
    let s2 = t.internal();
    t.attach(s1, 1, a).attach(s1, 2, b).attach(mid, 3, c);
    t.attach(s2, 4, d).attach(s2, 5, e);
    t.edge(s1, mid, f1).edge(mid, s2, f2);
    t.build().expect("caterpillar is a valid tree")
}

/// Quartet `12|34`: twigs 1, 2, 3, 4 and inner edge 5.
pub fn quartet<T: Scalar>() -> WeightedTree<T> {
    let mut t = TreeBuilder::new();
    let s1 = t.internal();
    let s2 = t.internal();
    t.attach(s1, 1, int(1)).attach(s1, 2, int(2));
    t.attach(s2, 3, int(3)).attach(s2, 4, int(4));
    t.edge(s1, s2, int(5));
    t.build().expect("quartet is a valid tree")
}

/// Star on `n >= 3` leaves with every twig equal to `twig`.
pub fn star<T: Scalar>(n: usize, twig: T) -> WeightedTree<T> {
    let mut t = TreeBuilder::new();
    let c = t.internal();
    for l in 1..=n {
        t.attach(c, l, twig.clone());
    }
    t.build().expect("star is a valid tree")
}

/// Two leaves joined by one edge.
pub fn path_pair<T: Scalar>(weight: T) -> WeightedTree<T> {
    let mut t = TreeBuilder::new();
    let a = t.leaf(1);
    let b = t.leaf(2);
    t.edge(a, b, weight);
    t.build().expect("pair is a valid tree")
}

/// Fully balanced binary tree with `2^depth` leaves (`depth >= 2`), unit
/// weights on every edge; the degree-2 root is suppressed.
pub fn balanced<T: Scalar>(depth: u32) -> WeightedTree<T> {
    assert!(depth >= 2, "balanced tree needs depth >= 2");
    let mut t = TreeBuilder::new();
    let root = t.internal();
    let mut level = vec![root];
    for _ in 1..depth {
        let mut next = Vec::new();
        for &p in &level {
            for _ in 0..2 {
                let c = t.internal();
                t.edge(p, c, T::one());
                next.push(c);
            }
        }
        level = next;
    }
    let mut label = 1;
    for &p in &level {
        for _ in 0..2 {
            t.attach(p, label, T::one());
            label += 1;
        }
    }
    t.build().expect("balanced tree is valid").canonicalize()
}
