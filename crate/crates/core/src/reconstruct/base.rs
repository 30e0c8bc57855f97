//! Closed solutions for the smallest label sets: up to four labels for
//! doubles, exactly five for triples.

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use crate::tree::{Edge, WeightedTree};
use crate::weights::{star_pairs_at, DoubleWeights, TripleWeights};

/// Why a base instance has no realizing tree.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseFailure<T> {
    /// The star condition does not single out the pairs the shape needs.
    NoStarPairs { labels: Vec<usize> },
    /// The linear system for the edge lengths has no exact solution.
    Inconsistent { residual: T },
}

/// One edge of the base solution. `leaf` names the label at its leaf end;
/// inner edges have none.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseEdge<T> {
    pub leaf: Option<usize>,
    pub weight: T,
}

/// Twigs of a four-label set obtained by merging one star pair of the
/// five-label base into a single leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct FourSet<T> {
    pub pruned: (usize, usize),
    /// `(label, twig)` of the three labels kept.
    pub twigs: Vec<(usize, T)>,
    /// Twig of the leaf standing for the merged pair.
    pub merged_twig: T,
}

#[derive(Debug, Clone)]
pub struct BaseCase<T> {
    pub labels: Vec<usize>,
    pub edges: Vec<BaseEdge<T>>,
    /// Largest absolute residual of the fitted system.
    pub residual: T,
    /// Filled for five-label triple bases only.
    pub four_sets: Vec<FourSet<T>>,
    pub(crate) sketch: Sketch<T>,
}

/// A tree whose leaves carry arbitrary labels.
#[derive(Debug, Clone)]
pub(crate) struct Sketch<T> {
    pub labels: Vec<Option<usize>>,
    pub edges: Vec<(usize, usize, T)>,
}

impl<T: Scalar> Sketch<T> {
    pub fn leaf_node(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == Some(label))
    }

    /// Turns the leaf `label` into a branching node carrying `twigs`.
    pub fn expand(&mut self, label: usize, twigs: &[(usize, T)]) {
        let node = self.leaf_node(label).expect("merged label present");
        self.labels[node] = None;
        for (member, a) in twigs {
            self.labels.push(Some(*member));
            self.edges.push((node, self.labels.len() - 1, a.clone()));
        }
    }

    /// Builds the tree, renaming each label through `rename` (which must
    /// produce `1..=m`).
    pub fn to_tree(&self, rename: impl Fn(usize) -> usize) -> Result<WeightedTree<T>> {
        let labels = self.labels.iter().map(|l| l.map(&rename)).collect();
        let edges = self
            .edges
            .iter()
            .map(|(u, v, w)| Edge {
                u: *u,
                v: *v,
                weight: w.clone(),
            })
            .collect();
        WeightedTree::new(labels, edges)
    }
}

/// Unweighted layout whose edge lengths are fitted to the data.
struct Shape {
    labels: Vec<Option<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Shape {
    fn new() -> Self {
        Shape {
            labels: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn internal(&mut self) -> usize {
        self.labels.push(None);
        self.labels.len() - 1
    }

    fn attach(&mut self, node: usize, label: usize) {
        self.labels.push(Some(label));
        self.edges.push((node, self.labels.len() - 1));
    }

    fn link(&mut self, u: usize, v: usize) {
        self.edges.push((u, v));
    }

    /// Leaf labels on the `v` side of every edge.
    fn sides(&self) -> Vec<Vec<usize>> {
        self.edges
            .iter()
            .map(|&(u, v)| {
                let mut out = Vec::new();
                let mut stack = vec![(v, u)];
                while let Some((x, from)) = stack.pop() {
                    if let Some(l) = self.labels[x] {
                        out.push(l);
                    }
                    for &(a, b) in &self.edges {
                        let next = if a == x {
                            b
                        } else if b == x {
                            a
                        } else {
                            continue;
                        };
                        if next != from {
                            stack.push((next, x));
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// Least-residual edge lengths for the subset sums in `rows`.
    fn fit<T: Scalar>(&self, rows: &[(Vec<usize>, T)]) -> (Vec<T>, T) {
        let sides = self.sides();
        let a: Vec<Vec<T>> = rows
            .iter()
            .map(|(subset, _)| {
                sides
                    .iter()
                    .map(|side| {
                        let inside = subset.iter().filter(|l| side.contains(l)).count();
                        if inside > 0 && inside < subset.len() {
                            T::one()
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let b: Vec<T> = rows.iter().map(|(_, v)| v.clone()).collect();
        let sol = linalg::solve(&a, &b);
        (sol.values, sol.residual)
    }

    fn weighted<T: Scalar>(&self, values: Vec<T>) -> Sketch<T> {
        Sketch {
            labels: self.labels.clone(),
            edges: self
                .edges
                .iter()
                .zip(values)
                .map(|(&(u, v), w)| (u, v, w))
                .collect(),
        }
    }
}

fn finish<T: Scalar>(
    shape: &Shape,
    rows: &[(Vec<usize>, T)],
    labels: Vec<usize>,
    tol: &T,
) -> std::result::Result<BaseCase<T>, BaseFailure<T>> {
    let (values, residual) = shape.fit(rows);
    if residual > *tol {
        return Err(BaseFailure::Inconsistent { residual });
    }
    let sketch = shape.weighted(values);
    let edges = sketch
        .edges
        .iter()
        .map(|(u, v, w)| BaseEdge {
            leaf: sketch.labels[*u].or(sketch.labels[*v]),
            weight: w.clone(),
        })
        .collect();
    Ok(BaseCase {
        labels,
        edges,
        residual,
        four_sets: Vec::new(),
        sketch,
    })
}

pub(crate) fn solve_doubles<T: Scalar>(
    d: &DoubleWeights<T>,
    tol: &T,
) -> std::result::Result<BaseCase<T>, BaseFailure<T>> {
    let l = d.labels().to_vec();
    let mut shape = Shape::new();
    match l.len() {
        2 => {
            let a = shape.internal();
            shape.labels[a] = Some(l[0]);
            let b = shape.internal();
            shape.labels[b] = Some(l[1]);
            shape.link(a, b);
        }
        3 => {
            let c = shape.internal();
            for &x in &l {
                shape.attach(c, x);
            }
        }
        4 => {
            let Some(&(p, q)) = star_pairs_at(d, tol).first() else {
                return Err(BaseFailure::NoStarPairs { labels: l });
            };
            let rest: Vec<usize> = (0..4).filter(|&x| x != p && x != q).collect();
            let s1 = shape.internal();
            let s2 = shape.internal();
            shape.attach(s1, l[p]);
            shape.attach(s1, l[q]);
            shape.attach(s2, l[rest[0]]);
            shape.attach(s2, l[rest[1]]);
            shape.link(s1, s2);
        }
        m => panic!("base case for doubles needs 2..=4 labels, got {m}"),
    }
    let rows: Vec<(Vec<usize>, T)> = d.entries().into_iter().map(|((i, j), v)| (vec![i, j], v)).collect();
    finish(&shape, &rows, l, tol)
}

pub(crate) fn solve_triples<T: Scalar>(
    t: &TripleWeights<T>,
    tol: &T,
) -> std::result::Result<BaseCase<T>, BaseFailure<T>> {
    let l = t.labels().to_vec();
    assert_eq!(l.len(), 5, "base case for triples needs five labels");
    let pairs = star_pairs_at(t, tol);
    let chosen = pairs.iter().find_map(|&(p, q)| {
        pairs
            .iter()
            .find(|&&(r, s)| r != p && r != q && s != p && s != q)
            .map(|&(r, s)| (p, q, r, s))
    });
    let Some((p, q, r, s)) = chosen else {
        return Err(BaseFailure::NoStarPairs { labels: l });
    };
    let g = (0..5).find(|&x| ![p, q, r, s].contains(&x)).expect("fifth label");
    let (alpha, alpha2, gamma, beta, beta2) = (l[p], l[q], l[g], l[r], l[s]);

    // Edge order a, b, c, d, e, f1, f2.
    let mut shape = Shape::new();
    let s1 = shape.internal();
    let mid = shape.internal();
    let s2 = shape.internal();
    shape.attach(s1, alpha);
    shape.attach(s1, alpha2);
    shape.attach(mid, gamma);
    shape.attach(s2, beta);
    shape.attach(s2, beta2);
    shape.link(s1, mid);
    shape.link(mid, s2);

    let rows: Vec<(Vec<usize>, T)> = t
        .entries()
        .into_iter()
        .map(|((i, j, k), v)| (vec![i, j, k], v))
        .collect();
    let mut base = finish(&shape, &rows, l, tol)?;
    let w: Vec<T> = base.edges.iter().map(|e| e.weight.clone()).collect();
    base.four_sets = vec![
        FourSet {
            pruned: (alpha, alpha2),
            twigs: vec![(gamma, w[2].clone()), (beta, w[3].clone()), (beta2, w[4].clone())],
            merged_twig: w[5].clone(),
        },
        FourSet {
            pruned: (beta, beta2),
            twigs: vec![(alpha, w[0].clone()), (alpha2, w[1].clone()), (gamma, w[2].clone())],
            merged_twig: w[6].clone(),
        },
    ];
    Ok(base)
}

fn rank_tree<T: Scalar>(base: &BaseCase<T>, tol: &T) -> Result<WeightedTree<T>> {
    let labels = &base.labels;
    let tree = base
        .sketch
        .to_tree(|l| labels.iter().position(|&x| x == l).expect("known label") + 1)?;
    Ok(tree.canonicalize_within(tol))
}

/// Solves a triple instance on exactly five labels as a caterpillar fixed by
/// two disjoint star pairs. Leaves of the returned tree are the ranks of the
/// input labels.
pub fn base_case_triples_5<T: Scalar>(
    t: &TripleWeights<T>,
    tol: &T,
) -> Result<std::result::Result<WeightedTree<T>, BaseFailure<T>>> {
    if t.n() != 5 {
        return Err(Error::Argument(format!("five labels expected, got {}", t.n())));
    }
    Ok(match solve_triples(t, tol) {
        Ok(base) => Ok(rank_tree(&base, tol)?),
        Err(f) => Err(f),
    })
}

/// Solves a double instance on two to four labels. Leaves of the returned
/// tree are the ranks of the input labels.
pub fn base_case_doubles<T: Scalar>(
    d: &DoubleWeights<T>,
    tol: &T,
) -> Result<std::result::Result<WeightedTree<T>, BaseFailure<T>>> {
    if d.n() > 4 {
        return Err(Error::Argument(format!("at most four labels expected, got {}", d.n())));
    }
    Ok(match solve_doubles(d, tol) {
        Ok(base) => Ok(rank_tree(&base, tol)?),
        Err(f) => Err(f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::Rational;
    use crate::tree::{tree_equal, TreeBuilder};

    fn q(v: i64) -> Rational {
        Rational::from_integer(v)
    }

    #[test]
    fn caterpillar_triples_give_caterpillar() {
        let c = fixtures::caterpillar::<Rational>();
        let t = c.triple_weights().unwrap();
        let got = base_case_triples_5(&t, &q(0)).unwrap().unwrap();
        assert!(tree_equal(&got, &c, &q(0)));
        let base = solve_triples(&t, &q(0)).unwrap();
        let w: Vec<Rational> = base.edges.iter().map(|e| e.weight.clone()).collect();
        assert_eq!(w, [1, 2, 3, 4, 5, 6, 7].map(q));
    }

    #[test]
    fn zero_inner_edge_collapses() {
        let c = fixtures::caterpillar_with([1, 2, 3, 4, 5, 0, 7].map(q));
        let got = base_case_triples_5(&c.triple_weights().unwrap(), &q(0)).unwrap().unwrap();
        assert_eq!(got.internal_count(), 2);
        let hub = (0..got.node_count()).find(|&u| got.degree(u) == 4);
        assert!(hub.is_some());
        assert!(tree_equal(&got, &c, &q(0)));
    }

    #[test]
    fn perturbed_five_sets() {
        let c = fixtures::caterpillar::<Rational>().triple_weights().unwrap();
        // D_345 = c + d + e + f2 is the only value holding f2 without f1;
        // raising it is absorbed by a negative first inner edge.
        let t = c.with_value(3, 4, 5, q(100)).unwrap();
        let got = base_case_triples_5(&t, &q(0)).unwrap().unwrap();
        assert_eq!(got.triple_weights().unwrap(), t);
        assert!(!got.all_weights_positive());
        let t = c.with_value(2, 4, 5, q(100)).unwrap();
        let out = base_case_triples_5(&t, &q(0)).unwrap();
        assert!(matches!(out, Err(BaseFailure::NoStarPairs { .. })), "{out:?}");
    }

    #[test]
    fn doubles_three_point_star() {
        let d = fixtures::quartet::<Rational>().double_weights().restrict(&[1, 2, 3]).unwrap();
        let base = solve_doubles(&d, &q(0)).unwrap();
        let twigs: Vec<(Option<usize>, Rational)> =
            base.edges.iter().map(|e| (e.leaf, e.weight.clone())).collect();
        assert_eq!(twigs, vec![(Some(1), q(1)), (Some(2), q(2)), (Some(3), q(8))]);
    }

    #[test]
    fn doubles_quartet_and_pair() {
        let qt = fixtures::quartet::<Rational>();
        let got = base_case_doubles(&qt.double_weights(), &q(0)).unwrap().unwrap();
        assert!(tree_equal(&got, &qt, &q(0)));
        let d = DoubleWeights::from_labels_fn(2, |_, _| q(7)).unwrap();
        let got = base_case_doubles(&d, &q(0)).unwrap().unwrap();
        assert_eq!(got.edges().len(), 1);
        assert_eq!(got.edges()[0].weight, q(7));
    }

    #[test]
    fn doubles_without_star_pair_fail() {
        // Three distinct pair sums: no quartet topology fits.
        let d = DoubleWeights::from_labels_fn(4, |i, j| q(match (i, j) {
            (1, 2) => 10,
            (3, 4) => 1,
            (1, 3) => 5,
            (2, 4) => 1,
            _ => 2,
        }))
        .unwrap();
        let out = base_case_doubles(&d, &q(0)).unwrap();
        assert!(matches!(out, Err(BaseFailure::NoStarPairs { .. })), "{out:?}");
    }

    #[test]
    fn four_sets_cover_every_edge() {
        let t = fixtures::caterpillar::<Rational>().triple_weights().unwrap();
        let base = solve_triples(&t, &q(0)).unwrap();
        assert_eq!(base.four_sets[0].pruned, (1, 2));
        assert_eq!(base.four_sets[0].merged_twig, q(6));
        assert_eq!(base.four_sets[1].pruned, (4, 5));
        assert_eq!(base.four_sets[1].merged_twig, q(7));
    }

    #[test]
    fn negative_inner_edge_is_fitted() {
        let mut b = TreeBuilder::new();
        let s1 = b.internal();
        let s2 = b.internal();
        b.attach(s1, 1, q(3)).attach(s1, 2, q(3)).attach(s2, 3, q(4)).attach(s2, 4, q(4));
        b.edge(s1, s2, q(-2));
        let t = b.build().unwrap();
        let got = base_case_doubles(&t.double_weights(), &q(0)).unwrap().unwrap();
        assert!(tree_equal(&got, &t, &q(0)));
    }
}
