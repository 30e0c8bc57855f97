//! Brute-force realizability for small label sets: enumerate every labeled
//! topology, fit edge weights exactly, keep the first that reproduces the
//! target.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::scalar::{Rational, Scalar};
use crate::tree::{Edge, WeightedTree};
use crate::weights::{DoubleWeights, TripleWeights};

pub const MAX_LEAVES: usize = 8;

/// Unweighted tree on leaves `1..=n`; internal nodes have degree ≥ 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    labels: Vec<Option<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn leaf_count(&self) -> usize {
        self.labels.iter().flatten().count()
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_binary(&self) -> bool {
        (0..self.labels.len())
            .filter(|&v| self.labels[v].is_none())
            .all(|v| self.degree(v) == 3)
    }

    fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.labels.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Nested-parenthesis encoding rooted at leaf 1 with sorted children;
    /// equal exactly for isomorphic labeled topologies.
    pub fn canonical(&self) -> String {
        fn enc(v: usize, from: usize, adj: &[Vec<usize>], labels: &[Option<usize>]) -> String {
            let mut parts: Vec<String> = adj[v]
                .iter()
                .filter(|&&w| w != from)
                .map(|&w| enc(w, v, adj, labels))
                .collect();
            if parts.is_empty() {
                return labels[v].map_or_else(|| "?".into(), |l| l.to_string());
            }
            parts.sort();
            format!("({})", parts.join(","))
        }
        let adj = self.adjacency();
        let root = self.labels.iter().position(|&l| l == Some(1)).expect("leaf 1");
        let child = adj[root][0];
        enc(child, root, &adj, &self.labels)
    }

    /// Leaf labels on the far side of each edge from leaf 1, as bit masks.
    fn edge_masks(&self) -> Vec<u32> {
        let adj = self.adjacency();
        self.edges
            .iter()
            .map(|&(a, b)| {
                let mut mask = 0u32;
                let mut stack = vec![(b, a)];
                while let Some((v, from)) = stack.pop() {
                    if let Some(l) = self.labels[v] {
                        mask |= 1 << (l - 1);
                    }
                    stack.extend(adj[v].iter().filter(|&&w| w != from).map(|&w| (w, v)));
                }
                mask
            })
            .collect()
    }

    fn with_leaf_on_edge(&self, e: usize, label: usize) -> Topology {
        let mut t = self.clone();
        let (a, b) = t.edges[e];
        let mid = t.labels.len();
        t.labels.push(None);
        let leaf = t.labels.len();
        t.labels.push(Some(label));
        t.edges[e] = (a, mid);
        t.edges.push((mid, b));
        t.edges.push((mid, leaf));
        t
    }

    fn with_leaf_on_node(&self, v: usize, label: usize) -> Topology {
        let mut t = self.clone();
        let leaf = t.labels.len();
        t.labels.push(Some(label));
        t.edges.push((v, leaf));
        t
    }

    /// Tree with the given weight per edge, in edge order.
    pub fn with_weights<T: Scalar>(&self, weights: &[T]) -> Result<WeightedTree<T>> {
        let edges = self
            .edges
            .iter()
            .zip(weights)
            .map(|(&(u, v), w)| Edge { u, v, weight: w.clone() })
            .collect();
        WeightedTree::new(self.labels.clone(), edges)
    }
}

/// Every labeled topology on `1..=n`, by inserting leaf `m` on each edge
/// (and each internal node, when multifurcations are wanted) of every
/// topology on `m − 1` leaves.
pub fn enumerate_topologies(n: usize, include_multifurcating: bool) -> Result<Vec<Topology>> {
    if !(2..=MAX_LEAVES).contains(&n) {
        return Err(Error::Argument(format!("topology enumeration needs 2 ≤ n ≤ {MAX_LEAVES}, got {n}")));
    }
    let mut level = vec![Topology {
        labels: vec![Some(1), Some(2)],
        edges: vec![(0, 1)],
    }];
    for m in 3..=n {
        let mut seen = std::collections::HashSet::new();
        let mut next = Vec::new();
        for t in &level {
            let mut grown: Vec<Topology> = (0..t.edges.len()).map(|e| t.with_leaf_on_edge(e, m)).collect();
            if include_multifurcating {
                grown.extend(
                    (0..t.labels.len())
                        .filter(|&v| t.labels[v].is_none())
                        .map(|v| t.with_leaf_on_node(v, m)),
                );
            }
            for g in grown {
                if seen.insert(g.canonical()) {
                    next.push(g);
                }
            }
        }
        level = next;
    }
    Ok(level)
}

/// Bit mask of a label subset, or `None` when some label is outside `1..=n`.
fn mask_of(labels: &[usize], n: usize) -> Option<u32> {
    labels.iter().try_fold(0u32, |m, &l| (1..=n).contains(&l).then(|| m | 1 << (l - 1)))
}

/// Weight containers the oracle can fit: each entry is one equation.
pub trait Target: Sync {
    fn n(&self) -> usize;

    /// Subset masks over labels `1..=n` and their values, or `None` when a
    /// label falls outside that range.
    fn rows(&self) -> Option<(Vec<u32>, Vec<Rational>)>;
}

impl Target for DoubleWeights<Rational> {
    fn n(&self) -> usize {
        DoubleWeights::n(self)
    }

    fn rows(&self) -> Option<(Vec<u32>, Vec<Rational>)> {
        let n = self.n();
        let l = self.labels();
        let mut masks = Vec::new();
        let mut values = Vec::new();
        for p in 0..n {
            for q in p + 1..n {
                masks.push(mask_of(&[l[p], l[q]], n)?);
                values.push(self.at(p, q).clone());
            }
        }
        Some((masks, values))
    }
}

impl Target for TripleWeights<Rational> {
    fn n(&self) -> usize {
        TripleWeights::n(self)
    }

    fn rows(&self) -> Option<(Vec<u32>, Vec<Rational>)> {
        let n = self.n();
        let l = self.labels();
        let mut masks = Vec::new();
        let mut values = Vec::new();
        for p in 0..n {
            for q in p + 1..n {
                for r in q + 1..n {
                    masks.push(mask_of(&[l[p], l[q], l[r]], n)?);
                    values.push(self.at(p, q, r).clone());
                }
            }
        }
        Some((masks, values))
    }
}

fn coefficients(topo: &Topology, n: usize, masks: &[u32]) -> Vec<Vec<u8>> {
    let full = (1u32 << n) - 1;
    let sides = topo.edge_masks();
    masks
        .iter()
        .map(|&s| {
            sides
                .iter()
                .map(|&side| u8::from(s & side != 0 && s & (full & !side) != 0))
                .collect()
        })
        .collect()
}

fn fit_rows(topo: &Topology, n: usize, masks: &[u32], values: &[Rational], prefilter: bool) -> Option<Vec<Rational>> {
    if topo.leaf_count() != n {
        return None;
    }
    let coef = coefficients(topo, n, masks);
    if prefilter {
        let a: Vec<Vec<f64>> = coef.iter().map(|r| r.iter().map(|&c| f64::from(c)).collect()).collect();
        let b: Vec<f64> = values.iter().map(|v| v.to_f64_lossy()).collect();
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if solve(&a, &b).residual > 1e-6 * scale {
            return None;
        }
    }
    let a: Vec<Vec<Rational>> = coef
        .iter()
        .map(|r| r.iter().map(|&c| Rational::from_count(c as usize)).collect())
        .collect();
    let sol = solve(&a, values);
    sol.consistent(&Rational::from_integer(0)).then_some(sol.values)
}

/// Exact edge weights of `topo` reproducing every entry of `target`, in the
/// topology's edge order; free variables are zero.
pub fn fit_weights<W: Target>(topo: &Topology, target: &W) -> Option<Vec<Rational>> {
    let (masks, values) = target.rows()?;
    fit_rows(topo, target.n(), &masks, &values, false)
}

/// First topology in enumeration order whose fitted weights reproduce
/// `target`, as a canonical tree. With `require_positive`, only fits with
/// every weight positive count.
pub fn realizable_brute<W: Target>(
    target: &W,
    require_positive: bool,
) -> Result<Option<WeightedTree<Rational>>> {
    let topologies = enumerate_topologies(target.n(), true)?;
    let n = target.n();
    let Some((masks, values)) = target.rows() else {
        return Err(Error::Argument("oracle expects labels 1..=n".into()));
    };
    let zero = Rational::from_integer(0);
    let found = topologies.par_iter().find_map_first(|topo| {
        let weights = fit_rows(topo, n, &masks, &values, true)?;
        if require_positive && weights.iter().any(|w| *w <= zero) {
            return None;
        }
        Some(topo.with_weights(&weights))
    });
    found.transpose().map(|t| t.map(|t| t.canonicalize()))
}

/// [`realizable_brute`] on pairwise values.
pub fn realizable_doubles(d: &DoubleWeights<Rational>, require_positive: bool) -> Result<Option<WeightedTree<Rational>>> {
    realizable_brute(d, require_positive)
}

/// [`realizable_brute`] on triple values.
pub fn realizable_triples(t: &TripleWeights<Rational>, require_positive: bool) -> Result<Option<WeightedTree<Rational>>> {
    realizable_brute(t, require_positive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tree::tree_equal;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v)
    }

    fn double_factorial(mut k: usize) -> usize {
        let mut out = 1;
        while k > 1 {
            out *= k;
            k -= 2;
        }
        out
    }

    #[test]
    fn binary_counts() {
        assert_eq!(enumerate_topologies(3, false).unwrap().len(), 1);
        assert_eq!(enumerate_topologies(3, true).unwrap().len(), 1);
        for n in 4..=7 {
            let all = enumerate_topologies(n, false).unwrap();
            assert_eq!(all.len(), double_factorial(2 * n - 5), "n = {n}");
            assert!(all.iter().all(Topology::is_binary));
        }
        assert!(enumerate_topologies(1, false).is_err());
        assert!(enumerate_topologies(9, false).is_err());
    }

    #[test]
    fn multifurcating_counts() {
        // Labeled unrooted trees with internal degree ≥ 3: 1, 4, 26, 236.
        for (n, count) in [(3, 1), (4, 4), (5, 26), (6, 236)] {
            let all = enumerate_topologies(n, true).unwrap();
            assert_eq!(all.len(), count);
            let set: std::collections::HashSet<_> = all.iter().map(Topology::canonical).collect();
            assert_eq!(set.len(), count);
        }
    }

    fn caterpillar_topology() -> Topology {
        // ((1,2),3,(4,5)) from leaf insertion: find it by canonical form.
        let c = fixtures::caterpillar::<Rational>();
        let target = c.triple_weights().unwrap();
        enumerate_topologies(5, false)
            .unwrap()
            .into_iter()
            .find(|t| fit_weights(t, &target).is_some())
            .unwrap()
    }

    #[test]
    fn fits_caterpillar() {
        let topo = caterpillar_topology();
        let c = fixtures::caterpillar::<Rational>();
        let w = fit_weights(&topo, &c.triple_weights().unwrap()).unwrap();
        let mut sorted = w.clone();
        sorted.sort();
        assert_eq!(sorted, (1..=7).map(q).collect::<Vec<_>>());
        assert!(tree_equal(&topo.with_weights(&w).unwrap(), &c, &q(0)));
    }

    #[test]
    fn wrong_quartet_topology() {
        let qt = fixtures::quartet::<Rational>().double_weights();
        let fits: Vec<bool> = enumerate_topologies(4, false)
            .unwrap()
            .iter()
            .map(|t| fit_weights(t, &qt).is_some())
            .collect();
        assert_eq!(fits.iter().filter(|&&f| f).count(), 1);
    }

    #[test]
    fn round_trip_binary() {
        for (k, topo) in enumerate_topologies(6, false).unwrap().iter().enumerate() {
            let weights: Vec<Rational> = (0..topo.edges().len()).map(|e| q((e * 7 + k) as i64 % 11 + 1)).collect();
            let tree = topo.with_weights(&weights).unwrap();
            assert_eq!(fit_weights(topo, &tree.double_weights()).unwrap(), weights);
            assert_eq!(fit_weights(topo, &tree.triple_weights().unwrap()).unwrap(), weights);
        }
    }

    #[test]
    fn brute_examples() {
        let c = fixtures::caterpillar::<Rational>();
        let got = realizable_triples(&c.triple_weights().unwrap(), true).unwrap().unwrap();
        assert!(tree_equal(&got, &c, &q(0)));

        // Pair sums 2, 4, 6: no two agree, so no quartet fits even with
        // negative weights.
        let bad = DoubleWeights::from_labels_fn(4, |i, j| q(match (i, j) {
            (1, 2) | (3, 4) => 1,
            (1, 3) | (2, 4) => 2,
            _ => 3,
        }))
        .unwrap();
        assert!(realizable_doubles(&bad, false).unwrap().is_none());

        let zero = DoubleWeights::from_labels_fn(5, |_, _| q(0)).unwrap();
        let got = realizable_doubles(&zero, false).unwrap().unwrap();
        assert!(!got.all_weights_positive());
        assert!(realizable_doubles(&zero, true).unwrap().is_none());
    }

    #[test]
    fn positive_fits_need_multifurcations() {
        let s = fixtures::star::<Rational>(5, q(2));
        let got = realizable_doubles(&s.double_weights(), true).unwrap().unwrap();
        assert!(tree_equal(&got, &s, &q(0)));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn brute_force_recovers_positive_trees(k in 0usize..26, w in proptest::collection::vec(1i64..9, 7)) {
            let topo = &enumerate_topologies(5, true).unwrap()[k];
            let weights: Vec<Rational> = w[..topo.edges().len()].iter().map(|&v| q(v)).collect();
            let tree = topo.with_weights(&weights).unwrap();
            let got = realizable_doubles(&tree.double_weights(), true).unwrap().unwrap();
            proptest::prop_assert!(tree_equal(&got, &tree, &q(0)));
            let got = realizable_triples(&tree.triple_weights().unwrap(), true).unwrap().unwrap();
            proptest::prop_assert!(tree_equal(&got, &tree, &q(0)));
        }
    }
}
