//! Neighbor joining: the classic one-pair-per-step method, the pruning
//! variant that extracts every bell of a round from one scan of the S
//! matrix, and the triple-weight generalization.

use rayon::prelude::*;

use crate::error::{require_size, Error, Result};
use crate::scalar::{Range, Scalar};
use crate::tree::{Edge, WeightedTree};
use crate::weights::{derived_pairwise_mid, DoubleWeights, TripleWeights, WeightSet};

/// Symmetric selection matrix; the diagonal is zero and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix<T> {
    labels: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SMatrix<T> {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn at(&self, p: usize, q: usize) -> &T {
        &self.values[p * self.n() + q]
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&T> {
        let pos = |l: usize| self.labels.iter().position(|&x| x == l).ok_or(Error::UnknownLabel(l));
        let (p, q) = (pos(i)?, pos(j)?);
        if p == q {
            return Err(Error::Argument(format!("label {i} given twice")));
        }
        Ok(self.at(p, q))
    }

    /// Every label pair attaining the global minimum, lexicographic.
    pub fn argmin_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let Some((p, q)) = min_position(&self.values, n) else {
            return Vec::new();
        };
        let best = self.at(p, q).clone();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if *self.at(a, b) == best {
                    out.push((self.labels[a], self.labels[b]));
                }
            }
        }
        out
    }
}

/// First position pair (lexicographic) holding the global minimum.
fn min_position<T: Scalar>(values: &[T], n: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for a in 0..n {
        for b in a + 1..n {
            let v = &values[a * n + b];
            if best.map_or(true, |(x, y)| *v < values[x * n + y]) {
                best = Some((a, b));
            }
        }
    }
    best
}

/// Dense working copy of a distance matrix over the active labels.
#[derive(Debug, Clone)]
struct Work<T> {
    labels: Vec<usize>,
    d: Vec<T>,
    /// Tree node standing for each active label.
    node: Vec<usize>,
}

impl<T: Scalar> Work<T> {
    fn m(&self) -> usize {
        self.labels.len()
    }

    fn at(&self, p: usize, q: usize) -> &T {
        &self.d[p * self.m() + q]
    }

    fn s_values(&self) -> Vec<T> {
        let m = self.m();
        let factor = T::from_count(m.saturating_sub(2));
        let sums: Vec<T> = (0..m)
            .into_par_iter()
            .map(|p| (0..m).filter(|&k| k != p).fold(T::zero(), |acc, k| acc + self.at(p, k).clone()))
            .collect();
        (0..m)
            .into_par_iter()
            .flat_map_iter(|p| {
                let sums = &sums;
                let factor = factor.clone();
                (0..m).map(move |q| {
                    if p == q {
                        T::zero()
                    } else {
                        factor.clone() * self.at(p, q).clone() - sums[p].clone() - sums[q].clone()
                    }
                })
            })
            .collect()
    }

    /// `½(D_pq + D_px − D_qx)` with `x` the first position outside `{p, q}`.
    fn twig(&self, p: usize, q: usize) -> T {
        match (0..self.m()).find(|&x| x != p && x != q) {
            Some(x) => (self.at(p, q).clone() + self.at(p, x).clone() - self.at(q, x).clone()).half(),
            None => self.at(p, q).half(),
        }
    }

    /// Replaces each group of positions by one entry. `groups[g][0]` is the
    /// representative and `twig_of` the amount subtracted per position.
    fn regroup(&self, groups: &[Vec<usize>], labels: Vec<usize>, nodes: Vec<usize>, twig_of: &[T]) -> Work<T> {
        let k = groups.len();
        let mut d = vec![T::zero(); k * k];
        for g in 0..k {
            for h in g + 1..k {
                let (a, b) = (groups[g][0], groups[h][0]);
                let v = self.at(a, b).clone() - twig_of[a].clone() - twig_of[b].clone();
                d[g * k + h] = v.clone();
                d[h * k + g] = v;
            }
        }
        Work { labels, d, node: nodes }
    }
}

/// Nodes and edges of the tree under construction.
#[derive(Debug)]
struct Assembly<T> {
    labels: Vec<Option<usize>>,
    edges: Vec<Edge<T>>,
}

impl<T: Scalar> Assembly<T> {
    fn new() -> Self {
        Assembly { labels: Vec::new(), edges: Vec::new() }
    }

    fn node(&mut self, label: Option<usize>) -> usize {
        self.labels.push(label);
        self.labels.len() - 1
    }

    fn edge(&mut self, u: usize, v: usize, weight: T) {
        self.edges.push(Edge { u, v, weight });
    }

    fn finish(self) -> Result<WeightedTree<T>> {
        Ok(WeightedTree::new(self.labels, self.edges)?.canonicalize())
    }
}

fn start<T: Scalar>(d: &DoubleWeights<T>, asm: &mut Assembly<T>) -> Result<Work<T>> {
    let labels = d.labels().to_vec();
    if labels.iter().enumerate().any(|(k, &l)| l != k + 1) {
        return Err(Error::Argument("neighbor joining expects labels 1..=n".into()));
    }
    let n = labels.len();
    let mut values = vec![T::zero(); n * n];
    for p in 0..n {
        for q in 0..n {
            if p != q {
                values[p * n + q] = d.at(p, q).clone();
            }
        }
    }
    let node = labels.iter().map(|&l| asm.node(Some(l))).collect();
    Ok(Work { labels, d: values, node })
}

/// Merges each group of positions (size ≥ 2) into a new node; positions in
/// no group stay. Group members get the given twigs.
fn merge<T: Scalar>(w: &Work<T>, asm: &mut Assembly<T>, bells: &[(Vec<usize>, Vec<T>)], next_label: &mut usize) -> Work<T> {
    let m = w.m();
    let mut in_bell = vec![false; m];
    let mut twig_of = vec![T::zero(); m];
    for (members, twigs) in bells {
        for (&p, a) in members.iter().zip(twigs) {
            in_bell[p] = true;
            twig_of[p] = a.clone();
        }
    }
    let mut groups: Vec<Vec<usize>> = (0..m).filter(|&p| !in_bell[p]).map(|p| vec![p]).collect();
    let mut labels: Vec<usize> = groups.iter().map(|g| w.labels[g[0]]).collect();
    let mut nodes: Vec<usize> = groups.iter().map(|g| w.node[g[0]]).collect();
    for (members, twigs) in bells {
        let u = asm.node(None);
        for (&p, a) in members.iter().zip(twigs) {
            asm.edge(u, w.node[p], a.clone());
        }
        groups.push(members.clone());
        labels.push(*next_label);
        nodes.push(u);
        *next_label += 1;
    }
    w.regroup(&groups, labels, nodes, &twig_of)
}

/// One classic step: join the lexicographically first global minimum of S.
fn classic_join<T: Scalar>(w: &Work<T>, asm: &mut Assembly<T>, next_label: &mut usize) -> Work<T> {
    let s = w.s_values();
    let (p, q) = min_position(&s, w.m()).expect("at least three labels");
    let a = w.twig(p, q);
    let b = w.at(p, q).clone() - a.clone();
    merge(w, asm, &[(vec![p, q], vec![a, b])], next_label)
}

/// Joins down to two labels and adds the final edge.
fn finish_classic<T: Scalar>(mut w: Work<T>, asm: &mut Assembly<T>, next_label: &mut usize) {
    while w.m() > 2 {
        w = classic_join(&w, asm, next_label);
    }
    if w.m() == 2 {
        asm.edge(w.node[0], w.node[1], w.at(0, 1).clone());
    }
}

/// `S_ij = (n − 2) D_ij − Σ_k D_ik − Σ_k D_jk`.
pub fn s_matrix<T: Scalar>(d: &DoubleWeights<T>) -> Result<SMatrix<T>> {
    require_size(d.n(), 3)?;
    let labels = d.labels().to_vec();
    let n = labels.len();
    let mut values = vec![T::zero(); n * n];
    for p in 0..n {
        for q in 0..n {
            if p != q {
                values[p * n + q] = d.at(p, q).clone();
            }
        }
    }
    let w = Work { labels: labels.clone(), d: values, node: vec![0; n] };
    Ok(SMatrix { labels, values: w.s_values() })
}

/// Classic neighbor joining. Always returns a tree; it realizes the input
/// only when the input is additive.
pub fn nj_classic<T: Scalar>(d: &DoubleWeights<T>) -> Result<WeightedTree<T>> {
    let mut asm = Assembly::new();
    let w = start(d, &mut asm)?;
    let mut next = d.n() + 1;
    finish_classic(w, &mut asm, &mut next);
    asm.finish()
}

/// Column scan of one pruning round.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord<T> {
    pub column: usize,
    pub minimum: T,
    /// Smallest row label attaining the column minimum.
    pub row: usize,
    /// Spread of `D(row, k) − D(column, k)` over the other labels.
    pub spread: T,
    pub confirmed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scan<T> {
    /// Every label pair inside a found bell, lexicographic.
    pub pairs: Vec<(usize, usize)>,
    /// Confirmed pairs grouped into bells, ordered by smallest member.
    pub bells: Vec<Vec<usize>>,
    pub records: Vec<ScanRecord<T>>,
    /// Matrix entries read while building S and scanning it.
    pub entries_examined: u64,
}

struct PositionScan<T> {
    bells: Vec<Vec<usize>>,
    records: Vec<(usize, T, usize, T, bool)>,
    entries: u64,
}

fn scan_positions<T: Scalar>(w: &Work<T>, eps: &T) -> PositionScan<T> {
    let m = w.m();
    let s = w.s_values();
    // Row sums read m(m−1) entries, S itself m(m−1) more.
    let mut entries = 2 * (m as u64) * (m as u64 - 1);
    let columns: Vec<(usize, T, usize, T, bool, u64)> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut row = usize::MAX;
            let mut min: Option<T> = None;
            for i in (0..m).filter(|&i| i != j) {
                let v = &s[i * m + j];
                if min.as_ref().map_or(true, |mv| v < mv) {
                    min = Some(v.clone());
                    row = i;
                }
            }
            let mut range: Option<Range<T>> = None;
            let mut read = (m - 1) as u64;
            for k in (0..m).filter(|&k| k != row && k != j) {
                let diff = w.at(row, k).clone() - w.at(j, k).clone();
                read += 2;
                match &mut range {
                    Some(r) => r.push(diff),
                    None => range = Some(Range::new(diff)),
                }
            }
            let spread = range.map_or(T::zero(), |r| r.spread());
            let ok = spread <= *eps;
            (j, min.expect("two labels"), row, spread, ok, read)
        })
        .collect();
    entries += columns.iter().map(|c| c.5).sum::<u64>();

    // Union confirmed pairs into bells.
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let mut linked = vec![false; m];
    for c in &columns {
        if c.4 {
            let (a, b) = (find(&mut parent, c.0), find(&mut parent, c.2));
            parent[a.max(b)] = a.min(b);
            linked[c.0] = true;
            linked[c.2] = true;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for p in (0..m).filter(|&p| linked[p]) {
        let r = find(&mut parent, p);
        groups.entry(r).or_default().push(p);
    }
    let mut bells: Vec<Vec<usize>> = groups.into_values().collect();
    bells.sort_by_key(|b| b[0]);
    PositionScan {
        bells,
        records: columns.into_iter().map(|c| (c.0, c.1, c.2, c.3, c.4)).collect(),
        entries,
    }
}

/// One pruning round's scan: column minima of S, each candidate pair
/// confirmed when its D-column difference has spread at most `eps`.
pub fn cherry_scan<T: Scalar>(d: &DoubleWeights<T>, eps: &T) -> Result<Scan<T>> {
    require_size(d.n(), 4)?;
    let n = d.n();
    let labels = d.labels().to_vec();
    let mut values = vec![T::zero(); n * n];
    for p in 0..n {
        for q in 0..n {
            if p != q {
                values[p * n + q] = d.at(p, q).clone();
            }
        }
    }
    let w = Work {
        labels: labels.clone(),
        d: values,
        node: vec![0; n],
    };
    let scan = scan_positions(&w, eps);
    let bells: Vec<Vec<usize>> = scan.bells.iter().map(|b| b.iter().map(|&p| labels[p]).collect()).collect();
    let mut pairs = Vec::new();
    for b in &bells {
        for x in 0..b.len() {
            for y in x + 1..b.len() {
                pairs.push((b[x], b[y]));
            }
        }
    }
    pairs.sort_unstable();
    Ok(Scan {
        pairs,
        bells,
        records: scan
            .records
            .into_iter()
            .map(|(j, minimum, i, spread, confirmed)| ScanRecord {
                column: labels[j],
                minimum,
                row: labels[i],
                spread,
                confirmed,
            })
            .collect(),
        entries_examined: scan.entries,
    })
}

/// Counters of a pruning run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NjTelemetry {
    /// Scan rounds performed.
    pub rounds: usize,
    pub bells_per_round: Vec<usize>,
    pub entries_per_round: Vec<u64>,
    /// Rounds in which nothing was confirmed and one classic join was made.
    pub fallback_joins: usize,
}

/// Pruning neighbor joining: every round merges all bells found by
/// [`cherry_scan`]; rounds confirming nothing make one classic join. Three
/// or fewer labels are finished classically.
pub fn nj_pruning<T: Scalar>(d: &DoubleWeights<T>, eps: &T) -> Result<(WeightedTree<T>, NjTelemetry)> {
    let mut asm = Assembly::new();
    let mut w = start(d, &mut asm)?;
    let mut next = d.n() + 1;
    let mut tel = NjTelemetry::default();
    while w.m() >= 4 {
        let scan = scan_positions(&w, eps);
        tel.rounds += 1;
        tel.entries_per_round.push(scan.entries);
        tel.bells_per_round.push(scan.bells.len());
        if scan.bells.is_empty() {
            tel.fallback_joins += 1;
            w = classic_join(&w, &mut asm, &mut next);
            continue;
        }
        let measured: Vec<(Vec<usize>, Vec<T>)> = scan
            .bells
            .iter()
            .map(|b| {
                let twigs = b
                    .iter()
                    .map(|&p| {
                        let partner = *b.iter().find(|&&q| q != p).expect("bell has two members");
                        w.twig(p, partner)
                    })
                    .collect();
                (b.clone(), twigs)
            })
            .collect();
        w = merge(&w, &mut asm, &measured, &mut next);
    }
    finish_classic(w, &mut asm, &mut next);
    Ok((asm.finish()?, tel))
}

/// `S_ij = ((n − 2)/2) Σ_r D_ijr − Σ_{r,s} D_irs − Σ_{r,s} D_jrs`, the sums
/// over labels other than the fixed ones.
pub fn s_matrix_triples<T: Scalar>(t: &TripleWeights<T>) -> Result<SMatrix<T>> {
    require_size(t.n(), 5)?;
    let n = t.n();
    let totals: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = T::zero();
            for r in (0..n).filter(|&r| r != i) {
                for s in (r + 1..n).filter(|&s| s != i) {
                    acc = acc + t.at(i, r, s).clone();
                }
            }
            acc
        })
        .collect();
    let factor = T::from_count(n - 2).half();
    let values: Vec<T> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let totals = &totals;
            let factor = factor.clone();
            (0..n).map(move |j| {
                if i == j {
                    return T::zero();
                }
                let through = (0..n)
                    .filter(|&r| r != i && r != j)
                    .fold(T::zero(), |acc, r| acc + t.at(i, j, r).clone());
                factor.clone() * through - totals[i].clone() - totals[j].clone()
            })
        })
        .collect();
    Ok(SMatrix {
        labels: t.labels().to_vec(),
        values,
    })
}

/// Neighbor joining on triple weights: joins the global minimum of the
/// triple S matrix each round (checked with the triple star condition
/// within `eps`; an unconfirmed minimum is joined anyway), and finishes
/// classically on derived pairwise values once five labels remain.
pub fn nj_from_triples<T: Scalar>(t: &TripleWeights<T>, eps: &T) -> Result<WeightedTree<T>> {
    require_size(t.n(), 5)?;
    if t.labels().iter().enumerate().any(|(k, &l)| l != k + 1) {
        return Err(Error::Argument("neighbor joining expects labels 1..=n".into()));
    }
    let mut asm = Assembly::new();
    let mut nodes: Vec<usize> = t.labels().iter().map(|&l| asm.node(Some(l))).collect();
    let mut cur = t.clone();
    let mut next = t.n() + 1;
    while cur.n() > 5 {
        let s = s_matrix_triples(&cur)?;
        let n = cur.n();
        let (p, q) = min_position(&s.values, n).expect("five labels");
        // The star check only informs; the minimum is joined either way.
        let _confirmed = cur.star_holds_at(p, q, eps);
        let pair = derived_pairwise_mid(&cur, p, q);
        let mut rest = (0..n).filter(|&x| x != p && x != q);
        let (x, y) = (rest.next().expect("labels"), rest.next().expect("labels"));
        let a = (pair.clone() + cur.at(p, x, y).clone() - cur.at(q, x, y).clone()).half();
        let b = pair - a.clone();
        let u = asm.node(None);
        asm.edge(u, nodes[p], a.clone());
        asm.edge(u, nodes[q], b);

        let keep: Vec<usize> = (0..n).filter(|&x| x != p && x != q).collect();
        let mut labels: Vec<usize> = keep.iter().map(|&x| cur.labels()[x]).collect();
        labels.push(next);
        next += 1;
        let mut new_nodes: Vec<usize> = keep.iter().map(|&x| nodes[x]).collect();
        new_nodes.push(u);
        let m = keep.len();
        cur = TripleWeights::from_fn(labels, |i, j, k| {
            // Only k can be the merged label, since it is last.
            if k == m {
                cur.at(keep[i], keep[j], p).clone() - a.clone()
            } else {
                cur.at(keep[i], keep[j], keep[k]).clone()
            }
        })?;
        nodes = new_nodes;
    }
    let labels = cur.labels().to_vec();
    let d = DoubleWeights::from_fn(labels.clone(), |i, j| derived_pairwise_mid(&cur, i, j))?;
    let n = labels.len();
    let mut values = vec![T::zero(); n * n];
    for p in 0..n {
        for q in 0..n {
            if p != q {
                values[p * n + q] = d.at(p, q).clone();
            }
        }
    }
    let w = Work { labels, d: values, node: nodes };
    finish_classic(w, &mut asm, &mut next);
    asm.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::reconstruct::{reconstruct_from_doubles, reconstruct_from_triples};
    use crate::scalar::Rational;
    use crate::tree::{random_tree, tree_equal};
    use crate::weights::triples_from_doubles;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v)
    }

    fn zero() -> Rational {
        q(0)
    }

    #[test]
    fn s_matrix_of_quartet() {
        let s = s_matrix(&fixtures::quartet::<Rational>().double_weights()).unwrap();
        assert_eq!(s.get(1, 2).unwrap(), &q(-40));
        assert_eq!(s.get(3, 4).unwrap(), &q(-40));
        for (i, j) in [(1, 3), (1, 4), (2, 3), (2, 4)] {
            assert_eq!(s.get(i, j).unwrap(), &q(-30));
        }
        assert_eq!(s.argmin_pairs(), vec![(1, 2), (3, 4)]);
        let eq = DoubleWeights::from_labels_fn(6, |_, _| q(4)).unwrap();
        let s = s_matrix(&eq).unwrap();
        assert_eq!(s.argmin_pairs().len(), 15);
        assert!(s_matrix(&DoubleWeights::from_labels_fn(2, |_, _| q(1)).unwrap()).is_err());
    }

    #[test]
    fn classic_recovers_trees() {
        let qt = fixtures::quartet::<Rational>();
        assert!(tree_equal(&nj_classic(&qt.double_weights()).unwrap(), &qt, &zero()));
        let t: WeightedTree<Rational> = random_tree(15, 5, 0.5, 4.0, true).unwrap();
        assert!(tree_equal(&nj_classic(&t.double_weights()).unwrap(), &t, &zero()));
        let d = DoubleWeights::from_labels_fn(3, |i, j| q((i * j) as i64)).unwrap();
        let got = nj_classic(&d).unwrap();
        assert_eq!(got.internal_count(), 1);
        assert_eq!(got.double_weights(), d);
    }

    #[test]
    fn scan_examples() {
        let qt = fixtures::quartet::<Rational>().double_weights();
        assert_eq!(cherry_scan(&qt, &zero()).unwrap().pairs, vec![(1, 2), (3, 4)]);
        let c = fixtures::caterpillar::<Rational>().double_weights();
        assert_eq!(cherry_scan(&c, &zero()).unwrap().pairs, vec![(1, 2), (4, 5)]);
        let delta = Rational::new(1, 10);
        let noisy = qt.with_value(1, 3, qt.get(1, 3).unwrap().clone() + delta.clone()).unwrap();
        let scan = cherry_scan(&noisy, &(delta * q(2))).unwrap();
        assert_eq!(scan.pairs, vec![(1, 2), (3, 4)]);
        assert!(cherry_scan(&DoubleWeights::from_labels_fn(3, |_, _| q(1)).unwrap(), &zero()).is_err());
    }

    #[test]
    fn scan_groups_multi_leaf_bells() {
        let s = fixtures::star::<Rational>(5, q(2)).double_weights();
        let scan = cherry_scan(&s, &zero()).unwrap();
        assert_eq!(scan.bells, vec![vec![1, 2, 3, 4, 5]]);
        assert_eq!(scan.pairs.len(), 10);
        for r in &scan.records {
            assert_ne!(r.row, r.column);
        }
    }

    #[test]
    fn pruning_rounds() {
        let qt = fixtures::quartet::<Rational>();
        let (got, tel) = nj_pruning(&qt.double_weights(), &zero()).unwrap();
        assert!(tree_equal(&got, &qt, &zero()));
        assert_eq!(tel.rounds, 1);
        assert_eq!(tel.bells_per_round, vec![2]);

        let b = fixtures::balanced::<Rational>(4);
        let (got, tel) = nj_pruning(&b.double_weights(), &zero()).unwrap();
        assert!(tree_equal(&got, &b, &zero()));
        assert_eq!(tel.bells_per_round, vec![8, 4, 2]);
        assert_eq!(tel.fallback_joins, 0);
    }

    #[test]
    fn pruning_matches_classic() {
        let t: WeightedTree<Rational> = random_tree(30, 17, 0.5, 4.0, true).unwrap();
        let d = t.double_weights();
        let (p, _) = nj_pruning(&d, &zero()).unwrap();
        assert!(tree_equal(&p, &nj_classic(&d).unwrap(), &zero()));
        assert!(tree_equal(&p, &t, &zero()));
    }

    #[test]
    fn triple_s_matrix() {
        let t = fixtures::caterpillar::<Rational>().triple_weights().unwrap();
        let s = s_matrix_triples(&t).unwrap();
        assert_eq!(s.argmin_pairs(), vec![(4, 5)]);
        assert!(s.get(1, 2).unwrap() < s.get(1, 3).unwrap());
        let star = fixtures::star::<Rational>(5, q(3)).triple_weights().unwrap();
        assert_eq!(s_matrix_triples(&star).unwrap().argmin_pairs().len(), 10);
        for seed in 0..50 {
            let tree: WeightedTree<Rational> = random_tree(5 + seed as usize % 6, seed, 0.5, 4.0, false).unwrap();
            let d = tree.double_weights();
            let a = s_matrix_triples(&triples_from_doubles(&d).unwrap()).unwrap().argmin_pairs();
            let b = s_matrix(&d).unwrap().argmin_pairs();
            assert_eq!(a, b, "seed {seed}");
        }
    }

    #[test]
    fn triples_nj() {
        let c = fixtures::caterpillar::<Rational>();
        let got = nj_from_triples(&c.triple_weights().unwrap(), &zero()).unwrap();
        assert!(tree_equal(&got, &c, &zero()));
        let t: WeightedTree<Rational> = random_tree(10, 23, 0.5, 4.0, true).unwrap();
        let tw = t.triple_weights().unwrap();
        let got = nj_from_triples(&tw, &zero()).unwrap();
        let r = reconstruct_from_triples(&tw, &zero(), false).unwrap();
        assert!(tree_equal(&got, &r.tree, &zero()));
        let star = fixtures::star::<Rational>(5, q(3));
        let got = nj_from_triples(&star.triple_weights().unwrap(), &zero()).unwrap();
        assert!(tree_equal(&got, &star, &zero()));
    }

    #[test]
    fn three_procedures_agree() {
        for seed in 0..20 {
            let t: WeightedTree<Rational> = random_tree(4 + seed as usize % 20, seed, 0.5, 4.0, false).unwrap();
            let d = t.double_weights();
            let a = nj_classic(&d).unwrap();
            let (b, _) = nj_pruning(&d, &zero()).unwrap();
            let c = reconstruct_from_doubles(&d, &zero(), true).unwrap().tree;
            assert!(tree_equal(&a, &b, &zero()) && tree_equal(&a, &c, &zero()), "seed {seed}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn pruning_equals_classic(n in 4usize..30, seed in proptest::prelude::any::<u64>()) {
            let t: WeightedTree<Rational> = random_tree(n, seed, 0.5, 6.0, false).unwrap();
            let d = t.double_weights();
            let (p, tel) = nj_pruning(&d, &zero()).unwrap();
            proptest::prop_assert!(tree_equal(&p, &t, &zero()));
            proptest::prop_assert!(tree_equal(&nj_classic(&d).unwrap(), &t, &zero()));
            proptest::prop_assert_eq!(tel.fallback_joins, 0);
        }

        #[test]
        fn scan_finds_every_bell(n in 4usize..30, seed in proptest::prelude::any::<u64>()) {
            let t: WeightedTree<Rational> = random_tree(n, seed, 0.5, 6.0, false).unwrap();
            let scan = cherry_scan(&t.double_weights(), &zero()).unwrap();
            proptest::prop_assert_eq!(scan.pairs, t.bell_pairs());
        }
    }
}
