//! Edge-weighted trees with labeled leaves.
//!
//! Leaves carry the labels `1..=n`; internal nodes are unlabeled. Weights are
//! arbitrary reals (zero and negative included). A tree is *canonical* when no
//! internal node has degree 2, no internal edge has weight exactly zero, and
//! nodes are numbered in preorder from the internal node adjacent to leaf 1
//! with children ordered by their smallest descendant leaf.

mod json;
mod newick;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::weights::{DoubleWeights, TripleWeights};

pub use json::{EdgeJson, NodeJson, TreeJson};
pub use newick::parse_newick;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub u: usize,
    pub v: usize,
    pub weight: T,
}

#[derive(Debug, Clone)]
pub struct WeightedTree<T> {
    labels: Vec<Option<usize>>,
    edges: Vec<Edge<T>>,
    adj: Vec<Vec<(usize, usize)>>,
    leaf_nodes: Vec<usize>,
}

/// A maximal bell: leaves hanging from one branching node (the stalk).
#[derive(Debug, Clone, PartialEq)]
pub struct Bell<T> {
    /// `None` only for the two-leaf tree, whose stalk is the conventional
    /// midpoint of its single edge.
    pub stalk: Option<usize>,
    /// `(leaf label, twig length)`, sorted by label.
    pub twigs: Vec<(usize, T)>,
}

impl<T> Bell<T> {
    pub fn members(&self) -> Vec<usize> {
        self.twigs.iter().map(|(l, _)| *l).collect()
    }
}

/// Incremental construction of a tree by nodes and edges.
#[derive(Debug, Clone, Default)]
pub struct TreeBuilder<T> {
    labels: Vec<Option<usize>>,
    edges: Vec<Edge<T>>,
    leaf_index: BTreeMap<usize, usize>,
}

impl<T: Scalar> TreeBuilder<T> {
    pub fn new() -> Self {
        TreeBuilder {
            labels: Vec::new(),
            edges: Vec::new(),
            leaf_index: BTreeMap::new(),
        }
    }

    /// Adds an unlabeled node and returns its id.
    pub fn internal(&mut self) -> usize {
        self.labels.push(None);
        self.labels.len() - 1
    }

    /// Returns the node of leaf `label`, creating it on first use.
    pub fn leaf(&mut self, label: usize) -> usize {
        if let Some(&node) = self.leaf_index.get(&label) {
            return node;
        }
        self.labels.push(Some(label));
        let node = self.labels.len() - 1;
        self.leaf_index.insert(label, node);
        node
    }

    pub fn edge(&mut self, u: usize, v: usize, weight: T) -> &mut Self {
        self.edges.push(Edge { u, v, weight });
        self
    }

    /// Hangs leaf `label` from `node`.
    pub fn attach(&mut self, node: usize, label: usize, weight: T) -> &mut Self {
        let leaf = self.leaf(label);
        self.edge(node, leaf, weight)
    }

    pub fn build(self) -> Result<WeightedTree<T>> {
        WeightedTree::new(self.labels, self.edges)
    }
}

impl<T: Scalar> WeightedTree<T> {
    /// Validates and wraps a node/edge description.
    pub fn new(labels: Vec<Option<usize>>, edges: Vec<Edge<T>>) -> Result<Self> {
        let count = labels.len();
        if count < 2 {
            return Err(Error::Tree("a tree needs at least two leaves".into()));
        }
        if edges.len() + 1 != count {
            return Err(Error::Tree(format!(
                "{} nodes need {} edges, got {}",
                count,
                count - 1,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); count];
        for (k, e) in edges.iter().enumerate() {
            if e.u >= count || e.v >= count || e.u == e.v {
                return Err(Error::Tree(format!("bad edge {}-{}", e.u, e.v)));
            }
            adj[e.u].push((e.v, k));
            adj[e.v].push((e.u, k));
        }
        let mut seen = vec![false; count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        if reached != count {
            return Err(Error::Tree("graph is not connected".into()));
        }

        let leaf_total = labels.iter().flatten().count();
        let mut leaf_nodes = vec![usize::MAX; leaf_total];
        for (node, label) in labels.iter().enumerate() {
            match label {
                Some(l) => {
                    if *l == 0 || *l > leaf_total {
                        return Err(Error::Tree(format!(
                            "leaf label {l} outside 1..={leaf_total}"
                        )));
                    }
                    if leaf_nodes[l - 1] != usize::MAX {
                        return Err(Error::Tree(format!("leaf label {l} repeated")));
                    }
                    if adj[node].len() != 1 {
                        return Err(Error::Tree(format!("leaf {l} has degree {}", adj[node].len())));
                    }
                    leaf_nodes[l - 1] = node;
                }
                None => {
                    if adj[node].len() < 2 {
                        return Err(Error::Tree(format!("unlabeled node {node} is a leaf")));
                    }
                }
            }
        }
        if leaf_total < 2 {
            return Err(Error::Tree("a tree needs at least two leaves".into()));
        }
        Ok(WeightedTree {
            labels,
            edges,
            adj,
            leaf_nodes,
        })
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_nodes.len()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn label(&self, node: usize) -> Option<usize> {
        self.labels[node]
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    /// `(neighbor, edge index)` pairs of `node`.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adj[node]
    }

    pub fn leaf_node(&self, label: usize) -> Result<usize> {
        label
            .checked_sub(1)
            .and_then(|k| self.leaf_nodes.get(k).copied())
            .ok_or(Error::UnknownLabel(label))
    }

    pub fn internal_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    pub fn map_weights<U: Scalar>(&self, f: impl Fn(&T) -> U) -> WeightedTree<U> {
        WeightedTree {
            labels: self.labels.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    u: e.u,
                    v: e.v,
                    weight: f(&e.weight),
                })
                .collect(),
            adj: self.adj.clone(),
            leaf_nodes: self.leaf_nodes.clone(),
        }
    }

    /// Path weight from `start` to every node.
    fn distances_from(&self, start: usize) -> Vec<T> {
        let mut dist = vec![T::zero(); self.node_count()];
        let mut stack = vec![(start, usize::MAX)];
        while let Some((u, parent)) = stack.pop() {
            for &(v, e) in &self.adj[u] {
                if v != parent {
                    dist[v] = dist[u].clone() + self.edges[e].weight.clone();
                    stack.push((v, u));
                }
            }
        }
        dist
    }

    /// Sum of edge weights on the path between leaves `i` and `j`.
    pub fn pairwise_weight(&self, i: usize, j: usize) -> Result<T> {
        let a = self.leaf_node(i)?;
        let b = self.leaf_node(j)?;
        if i == j {
            return Err(Error::Argument(format!("pairwise weight needs two labels, got {i} twice")));
        }
        Ok(self.distances_from(a)[b].clone())
    }

    /// Weight of the minimal subtree spanning leaves `i`, `j`, `k`.
    pub fn triple_weight(&self, i: usize, j: usize, k: usize) -> Result<T> {
        if i == j || i == k || j == k {
            return Err(Error::Argument(format!("labels {i}, {j}, {k} are not distinct")));
        }
        self.k_weight(&[i, j, k])
    }

    /// Weight of the minimal subtree spanning `subset`.
    pub fn k_weight(&self, subset: &[usize]) -> Result<T> {
        if subset.len() < 2 {
            return Err(Error::Argument("a k-weight needs at least two labels".into()));
        }
        let mut member = vec![false; self.node_count()];
        for &l in subset {
            let node = self.leaf_node(l)?;
            if member[node] {
                return Err(Error::Argument(format!("label {l} repeated")));
            }
            member[node] = true;
        }
        // Rooted at a member, an edge belongs to the Steiner subtree iff the
        // subtree below it contains another member.
        let root = self.leaf_node(subset[0])?;
        let mut order = Vec::with_capacity(self.node_count());
        let mut parent_edge = vec![usize::MAX; self.node_count()];
        let mut stack = vec![(root, usize::MAX)];
        while let Some((u, parent)) = stack.pop() {
            order.push(u);
            for &(v, e) in &self.adj[u] {
                if v != parent {
                    parent_edge[v] = e;
                    stack.push((v, u));
                }
            }
        }
        let mut total = T::zero();
        for &u in order.iter().rev() {
            if u == root {
                continue;
            }
            let e = &self.edges[parent_edge[u]];
            if member[u] {
                total = total + e.weight.clone();
                let parent = if e.u == u { e.v } else { e.u };
                member[parent] = true;
            }
        }
        Ok(total)
    }

    /// All pairwise weights, one traversal per leaf.
    pub fn double_weights(&self) -> DoubleWeights<T> {
        let n = self.leaf_count();
        let rows: Vec<Vec<T>> = self
            .leaf_nodes
            .iter()
            .map(|&node| {
                let dist = self.distances_from(node);
                self.leaf_nodes.iter().map(|&other| dist[other].clone()).collect()
            })
            .collect();
        DoubleWeights::from_fn((1..=n).collect(), |p, q| rows[p][q].clone())
            .expect("tree has at least two leaves")
    }

    /// All triple weights through the half-sum identity on pairwise weights.
    pub fn triple_weights(&self) -> Result<TripleWeights<T>> {
        crate::weights::triples_from_doubles(&self.double_weights())
    }

    /// Rooted view used by serialization and renumbering.
    pub(crate) fn rooted(&self) -> Rooted {
        let count = self.node_count();
        let leaf_one = self.leaf_nodes[0];
        let root = self.adj[leaf_one][0].0;
        let mut parent = vec![usize::MAX; count];
        let mut parent_edge = vec![usize::MAX; count];
        let mut order = Vec::with_capacity(count);
        let mut stack = vec![root];
        let mut seen = vec![false; count];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            order.push(u);
            for &(v, e) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    parent_edge[v] = e;
                    stack.push(v);
                }
            }
        }
        let mut min_leaf = vec![usize::MAX; count];
        for &u in order.iter().rev() {
            if let Some(l) = self.labels[u] {
                min_leaf[u] = min_leaf[u].min(l);
            }
            if parent[u] != usize::MAX {
                let p = parent[u];
                min_leaf[p] = min_leaf[p].min(min_leaf[u]);
            }
        }
        let mut children = vec![Vec::new(); count];
        for &u in &order {
            if parent[u] != usize::MAX {
                children[parent[u]].push(u);
            }
        }
        for c in &mut children {
            c.sort_by_key(|&v| min_leaf[v]);
        }
        Rooted {
            root,
            parent_edge,
            children,
        }
    }

    /// Suppresses degree-2 nodes, contracts zero-weight internal edges and
    /// renumbers nodes canonically. Every k-weight is preserved.
    pub fn canonicalize(&self) -> WeightedTree<T> {
        self.simplify(|w| w.is_zero())
    }

    /// Like [`canonicalize`](Self::canonicalize) but also contracts internal
    /// edges whose weight is within `tol` of zero.
    pub fn canonicalize_within(&self, tol: &T) -> WeightedTree<T> {
        self.simplify(|w| w.abs() <= *tol)
    }

    fn simplify(&self, negligible: impl Fn(&T) -> bool) -> WeightedTree<T> {
        let count = self.node_count();
        let mut adj: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); count];
        for e in &self.edges {
            adj[e.u].insert(e.v, e.weight.clone());
            adj[e.v].insert(e.u, e.weight.clone());
        }
        let mut alive = vec![true; count];
        let internal = |u: usize| self.labels[u].is_none();

        loop {
            let mut changed = false;
            for u in 0..count {
                if !alive[u] || !internal(u) {
                    continue;
                }
                // Contract negligible internal edges into u.
                loop {
                    let target = adj[u]
                        .iter()
                        .find(|(&v, w)| internal(v) && negligible(w))
                        .map(|(&v, _)| v);
                    let Some(v) = target else { break };
                    adj[u].remove(&v);
                    let moved: Vec<(usize, T)> = std::mem::take(&mut adj[v])
                        .into_iter()
                        .filter(|(x, _)| *x != u)
                        .collect();
                    for (x, w) in moved {
                        adj[x].remove(&v);
                        adj[x].insert(u, w.clone());
                        adj[u].insert(x, w);
                    }
                    alive[v] = false;
                    changed = true;
                }
                if adj[u].len() == 2 {
                    let mut it = std::mem::take(&mut adj[u]).into_iter();
                    let (a, wa) = it.next().expect("two neighbors");
                    let (b, wb) = it.next().expect("two neighbors");
                    adj[a].remove(&u);
                    adj[b].remove(&u);
                    let w = wa + wb;
                    adj[a].insert(b, w.clone());
                    adj[b].insert(a, w);
                    alive[u] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let ids: Vec<usize> = (0..count).filter(|&u| alive[u]).collect();
        let mut new_id = vec![usize::MAX; count];
        for (k, &u) in ids.iter().enumerate() {
            new_id[u] = k;
        }
        let labels = ids.iter().map(|&u| self.labels[u]).collect();
        let mut edges = Vec::new();
        for &u in &ids {
            for (&v, w) in &adj[u] {
                if u < v {
                    edges.push(Edge {
                        u: new_id[u],
                        v: new_id[v],
                        weight: w.clone(),
                    });
                }
            }
        }
        let compact = WeightedTree::new(labels, edges).expect("simplification keeps a valid tree");
        compact.renumbered()
    }

    /// Renumbers nodes in canonical preorder; edges are listed parent→child
    /// in the preorder of the child.
    fn renumbered(&self) -> WeightedTree<T> {
        let rooted = self.rooted();
        let count = self.node_count();
        let mut preorder = Vec::with_capacity(count);
        let mut stack = vec![rooted.root];
        while let Some(u) = stack.pop() {
            preorder.push(u);
            for &c in rooted.children[u].iter().rev() {
                stack.push(c);
            }
        }
        let mut new_id = vec![0; count];
        for (k, &u) in preorder.iter().enumerate() {
            new_id[u] = k;
        }
        let labels = preorder.iter().map(|&u| self.labels[u]).collect();
        let edges = preorder
            .iter()
            .filter(|&&u| u != rooted.root)
            .map(|&u| {
                let e = &self.edges[rooted.parent_edge[u]];
                let parent = if e.u == u { e.v } else { e.u };
                Edge {
                    u: new_id[parent],
                    v: new_id[u],
                    weight: e.weight.clone(),
                }
            })
            .collect();
        WeightedTree::new(labels, edges).expect("renumbering keeps a valid tree")
    }

    /// Maximal bells, sorted by smallest member.
    pub fn cherries(&self) -> Vec<Bell<T>> {
        if self.leaf_count() == 2 && self.internal_count() == 0 {
            let half = self.edges[0].weight.half();
            return vec![Bell {
                stalk: None,
                twigs: vec![(1, half.clone()), (2, half)],
            }];
        }
        let mut groups: BTreeMap<usize, Vec<(usize, T)>> = BTreeMap::new();
        for (k, &leaf) in self.leaf_nodes.iter().enumerate() {
            let (mut prev, mut cur) = (leaf, self.adj[leaf][0].0);
            let mut length = self.edges[self.adj[leaf][0].1].weight.clone();
            while self.labels[cur].is_none() && self.adj[cur].len() == 2 {
                let &(next, e) = self.adj[cur]
                    .iter()
                    .find(|(v, _)| *v != prev)
                    .expect("degree-2 node has another neighbor");
                length = length + self.edges[e].weight.clone();
                prev = cur;
                cur = next;
            }
            if self.labels[cur].is_none() {
                groups.entry(cur).or_default().push((k + 1, length));
            }
        }
        if groups.is_empty() {
            // Two leaves joined by a path of degree-2 nodes.
            let half = self.pairwise_weight(1, 2).expect("two leaves").half();
            return vec![Bell {
                stalk: None,
                twigs: vec![(1, half.clone()), (2, half)],
            }];
        }
        let mut bells: Vec<Bell<T>> = groups
            .into_iter()
            .filter(|(_, twigs)| twigs.len() >= 2)
            .map(|(stalk, twigs)| Bell {
                stalk: Some(stalk),
                twigs,
            })
            .collect();
        bells.sort_by_key(|b| b.twigs[0].0);
        bells
    }

    /// Unordered leaf pairs lying in a common bell, sorted.
    pub fn bell_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for bell in self.cherries() {
            let m = bell.members();
            for a in 0..m.len() {
                for b in a + 1..m.len() {
                    pairs.push((m[a], m[b]));
                }
            }
        }
        pairs.sort();
        pairs
    }

    pub fn all_weights_positive(&self) -> bool {
        self.edges.iter().all(|e| e.weight.is_positive())
    }
}

/// True iff both trees, after contracting internal edges of weight at most
/// `tol` in absolute value, are isomorphic as leaf-labeled trees with
/// corresponding weights within `tol`.
pub fn tree_equal<T: Scalar>(a: &WeightedTree<T>, b: &WeightedTree<T>, tol: &T) -> bool {
    if a.leaf_count() != b.leaf_count() {
        return false;
    }
    let a = a.simplify(|w| w.abs() <= *tol);
    let b = b.simplify(|w| w.abs() <= *tol);
    a.labels == b.labels
        && a.edges.len() == b.edges.len()
        && a.edges.iter().zip(&b.edges).all(|(x, y)| {
            x.u == y.u && x.v == y.v && (x.weight.clone() - y.weight.clone()).abs() <= *tol
        })
}

pub(crate) struct Rooted {
    pub root: usize,
    pub parent_edge: Vec<usize>,
    pub children: Vec<Vec<usize>>,
}

/// Random canonical tree on leaves `1..=n`, deterministic in `seed`.
///
/// Leaves are inserted one at a time on a uniformly chosen edge (which yields
/// the uniform distribution over binary topologies); without `binary_only`
/// a leaf is hung from an existing internal node with probability 0.3.
pub fn random_tree<T: Scalar>(
    n: usize,
    seed: u64,
    weight_min: f64,
    weight_max: f64,
    binary_only: bool,
) -> Result<WeightedTree<T>> {
    if n < 2 {
        return Err(Error::Argument(format!("random tree needs n >= 2, got {n}")));
    }
    if !(weight_min <= weight_max) {
        return Err(Error::Argument(format!(
            "weight range [{weight_min}, {weight_max}] is empty"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Option<usize>> = vec![Some(1), Some(2)];
    let mut pairs: Vec<(usize, usize)> = vec![(0, 1)];
    let mut internals: Vec<usize> = Vec::new();
    for m in 3..=n {
        labels.push(Some(m));
        let leaf = labels.len() - 1;
        if !binary_only && !internals.is_empty() && rng.gen_bool(0.3) {
            let &hub = internals.choose(&mut rng).expect("non-empty");
            pairs.push((hub, leaf));
        } else {
            let k = rng.gen_range(0..pairs.len());
            let (u, v) = pairs[k];
            labels.push(None);
            let mid = labels.len() - 1;
            internals.push(mid);
            pairs[k] = (u, mid);
            pairs.push((mid, v));
            pairs.push((mid, leaf));
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(u, v)| Edge {
            u,
            v,
            weight: T::from_grid(if weight_min == weight_max {
                weight_min
            } else {
                rng.gen_range(weight_min..=weight_max)
            }),
        })
        .collect();
    Ok(WeightedTree::new(labels, edges)?.canonicalize())
}
