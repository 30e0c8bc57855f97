//! Decision and reconstruction by recursive pseudobell pruning.
//!
//! A pseudobell is a set of labels that pairwise satisfy the star condition.
//! At each level every complete pseudobell gets twig lengths, is replaced by
//! a fresh label, and the weights are rewritten on the smaller label set.
//! Once the floor (four labels for doubles, five for triples) is reached the
//! remaining instance is solved directly and the pruned bells are hung back
//! in reverse order.

mod base;
mod report;

use std::fmt;

use crate::error::{require_size, Error, Result};
use crate::scalar::{Range, Scalar};
use crate::tree::WeightedTree;
use crate::weights::{
    derived_pairwise_consistent, derived_pairwise_mid, star_pairs_at, triples_from_doubles,
    DerivedPairwise, DoubleWeights, TripleWeights, WeightSet,
};

pub use base::{base_case_doubles, base_case_triples_5, BaseCase, BaseEdge, BaseFailure, FourSet};
pub use report::report_json;

use base::Sketch;

/// A pruned pseudobell with the twig length of each pruned member.
#[derive(Debug, Clone, PartialEq)]
pub struct Pseudobell<T> {
    pub members: Vec<usize>,
    pub twigs: Vec<T>,
    /// Label standing for the members at the next level.
    pub merged: usize,
    /// Only some members of a larger complete pseudobell were pruned, to
    /// keep the label count at the floor.
    pub partial: bool,
}

/// Weight container of either order.
#[derive(Debug, Clone, PartialEq)]
pub enum Reduced<T> {
    Doubles(DoubleWeights<T>),
    Triples(TripleWeights<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionLevel<T> {
    pub before: Vec<usize>,
    pub after: Vec<usize>,
    pub pruned: Vec<Pseudobell<T>>,
    pub reduced: Reduced<T>,
}

#[derive(Debug, Clone)]
pub struct ReconstructionTrace<T> {
    /// 2 for doubles, 3 for triples.
    pub order: usize,
    pub levels: Vec<ReductionLevel<T>>,
    pub base: Option<BaseCase<T>>,
    /// Every twig and base edge has the sign a positive tree requires.
    pub all_twigs_positive: bool,
    /// First offending value when `all_twigs_positive` is false.
    pub positivity_witness: Option<PositivityWitness<T>>,
}

impl<T> ReconstructionTrace<T> {
    fn new(order: usize) -> Self {
        ReconstructionTrace {
            order,
            levels: Vec::new(),
            base: None,
            all_twigs_positive: false,
            positivity_witness: None,
        }
    }
}

/// Where the positivity certificate fails. `level` equal to the number of
/// reduction levels means the base case; `label` is `None` for inner edges.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityWitness<T> {
    pub level: usize,
    pub label: Option<usize>,
    pub value: T,
}

#[derive(Debug, Clone)]
pub struct Reconstruction<T> {
    pub tree: WeightedTree<T>,
    pub trace: ReconstructionTrace<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FailureKind<T> {
    /// Bad arguments or an instance below the minimum size.
    Input(Error),
    /// The derived pairwise value of `pair` depends on the completion.
    Condition2 { pair: (usize, usize), spread: T },
    /// The star relation is not a disjoint union of cliques.
    NotClique { level: usize, a: usize, b: usize, c: usize },
    /// Fewer than two disjoint star pairs.
    TooFewPseudobells { level: usize, pseudobells: Vec<Vec<usize>> },
    /// A twig or rewritten weight differs between representatives.
    IllDefined { level: usize, entry: Vec<usize>, spread: T },
    BaseCase { level: usize, reason: BaseFailure<T> },
    /// The rebuilt tree misses an input weight.
    Verification { entry: Vec<usize>, expected: T, actual: T },
    NotPositive(PositivityWitness<T>),
}

impl<T: Scalar> FailureKind<T> {
    /// Short machine-readable name.
    pub fn name(&self) -> &'static str {
        match self {
            FailureKind::Input(_) => "input",
            FailureKind::Condition2 { .. } => "condition2",
            FailureKind::NotClique { .. } => "not_clique",
            FailureKind::TooFewPseudobells { .. } => "too_few_pseudobells",
            FailureKind::IllDefined { .. } => "ill_defined",
            FailureKind::BaseCase { .. } => "base_case",
            FailureKind::Verification { .. } => "verification",
            FailureKind::NotPositive(_) => "not_positive",
        }
    }
}

impl<T: Scalar> fmt::Display for FailureKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureKind::Input(e) => write!(f, "{e}"),
            FailureKind::Condition2 { pair, spread } => write!(
                f,
                "derived pairwise value of {{{}, {}}} is not well defined (spread {spread})",
                pair.0, pair.1
            ),
            FailureKind::NotClique { level, a, b, c } => write!(
                f,
                "level {level}: *({a},{b}) and *({a},{c}) hold but *({b},{c}) does not"
            ),
            FailureKind::TooFewPseudobells { level, pseudobells } => write!(
                f,
                "level {level}: fewer than two disjoint star pairs (pseudobells {pseudobells:?})"
            ),
            FailureKind::IllDefined { level, entry, spread } => write!(
                f,
                "level {level}: value for {entry:?} depends on the representative (spread {spread})"
            ),
            FailureKind::BaseCase { level, reason } => match reason {
                BaseFailure::NoStarPairs { labels } => {
                    write!(f, "level {level}: base set {labels:?} lacks the needed star pairs")
                }
                BaseFailure::Inconsistent { residual } => {
                    write!(f, "level {level}: base system inconsistent (residual {residual})")
                }
            },
            FailureKind::Verification {
                entry,
                expected,
                actual,
            } => write!(f, "rebuilt tree gives {actual} for {entry:?}, expected {expected}"),
            FailureKind::NotPositive(w) => match w.label {
                Some(l) => write!(f, "level {}: twig of {l} is {} (not positive)", w.level, w.value),
                None => write!(f, "level {}: inner edge of weight {} (not positive)", w.level, w.value),
            },
        }
    }
}

/// A failed decision with the trace gathered up to the failure.
#[derive(Debug, Clone)]
pub struct Failure<T> {
    pub kind: FailureKind<T>,
    pub trace: ReconstructionTrace<T>,
}

impl<T: Scalar> fmt::Display for Failure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl<T: Scalar> std::error::Error for Failure<T> {}

pub type Outcome<T> = std::result::Result<Reconstruction<T>, Failure<T>>;

/// Complete pseudobells of size at least two, each sorted, ordered by
/// smallest member.
///
/// Fails with [`Error::NotClique`] when the star relation is not a disjoint
/// union of cliques.
pub fn complete_pseudobells<T: Scalar, W: WeightSet<T>>(w: &W, tol: &T) -> Result<Vec<Vec<usize>>> {
    let labels = w.labels();
    require_size(labels.len(), W::min_labels())?;
    cliques(labels, &star_pairs_at(w, tol)).map(|groups| {
        groups
            .into_iter()
            .map(|g| g.into_iter().map(|p| labels[p]).collect())
            .collect()
    })
}

/// Groups positions by the star relation, checking it is a clique union.
fn cliques(labels: &[usize], pairs: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
    let n = labels.len();
    let mut adj = vec![Vec::new(); n];
    for &(p, q) in pairs {
        adj[p].push(q);
        adj[q].push(p);
    }
    let mut taken = vec![false; n];
    let mut groups = Vec::new();
    for p in 0..n {
        if taken[p] || adj[p].is_empty() {
            continue;
        }
        let mut group = adj[p].clone();
        group.push(p);
        group.sort_unstable();
        for &q in &adj[p] {
            if let Some(&r) = group.iter().find(|&&r| r != q && !adj[q].contains(&r)) {
                return Err(Error::NotClique {
                    a: labels[p],
                    b: labels[q.min(r)],
                    c: labels[q.max(r)],
                });
            }
            if let Some(&r) = adj[q].iter().find(|r| !group.contains(r)) {
                return Err(Error::NotClique {
                    a: labels[q],
                    b: labels[p.min(r)],
                    c: labels[p.max(r)],
                });
            }
        }
        for &x in &group {
            taken[x] = true;
        }
        groups.push(group);
    }
    Ok(groups)
}

/// `½(D_αα' + D_αx − D_α'x)`.
pub fn twig_length_doubles<T: Scalar>(d: &DoubleWeights<T>, alpha: usize, alpha2: usize, x: usize) -> Result<T> {
    distinct(&[alpha, alpha2, x])?;
    Ok((d.get(alpha, alpha2)?.clone() + d.get(alpha, x)?.clone() - d.get(alpha2, x)?.clone()).half())
}

/// `½(D_αα' + D_αxy − D_α'xy)` with the pairwise value taken from `derived`.
pub fn twig_length_triples<T: Scalar>(
    t: &TripleWeights<T>,
    derived: &DoubleWeights<T>,
    alpha: usize,
    alpha2: usize,
    x: usize,
    y: usize,
) -> Result<T> {
    distinct(&[alpha, alpha2, x, y])?;
    Ok((derived.get(alpha, alpha2)?.clone() + t.get(alpha, x, y)?.clone()
        - t.get(alpha2, x, y)?.clone())
    .half())
}

fn distinct(ids: &[usize]) -> Result<()> {
    for a in 0..ids.len() {
        for b in a + 1..ids.len() {
            if ids[a] == ids[b] {
                return Err(Error::Argument(format!("label {} used twice", ids[a])));
            }
        }
    }
    Ok(())
}

/// Operations the pruning loop needs from a weight container.
trait Reducible<T: Scalar>: WeightSet<T> + Clone + Sized {
    const FLOOR: usize;

    fn count(&self) -> usize {
        self.labels().len()
    }

    fn position(&self, label: usize) -> Result<usize>;

    /// Pairwise value used in the twig formula, by positions.
    fn pair_value(&self, p: usize, q: usize) -> T;

    /// Rewrites the weights on merged groups of positions; `twig_of` is the
    /// amount subtracted per original position.
    fn regroup(&self, labels: Vec<usize>, groups: &[Vec<usize>], twig_of: &[T], tol: &T) -> Regrouped<Self, T>;

    fn solve_base(&self, tol: &T) -> std::result::Result<BaseCase<T>, BaseFailure<T>>;

    fn wrap(&self) -> Reduced<T>;

    /// First input weight the tree misses by more than `tol`.
    fn mismatch(&self, tree: &WeightedTree<T>, tol: &T) -> Option<(Vec<usize>, T, T)>;
}

type Regrouped<W, T> = std::result::Result<W, (Vec<usize>, T)>;

fn spread_mid<T: Scalar>(values: impl Iterator<Item = T>) -> Range<T> {
    let mut range: Option<Range<T>> = None;
    for v in values {
        match &mut range {
            Some(r) => r.push(v),
            None => range = Some(Range::new(v)),
        }
    }
    range.expect("non-empty group")
}

impl<T: Scalar> Reducible<T> for DoubleWeights<T> {
    const FLOOR: usize = 4;

    fn position(&self, label: usize) -> Result<usize> {
        DoubleWeights::position(self, label)
    }

    fn pair_value(&self, p: usize, q: usize) -> T {
        self.at(p, q).clone()
    }

    fn regroup(&self, labels: Vec<usize>, groups: &[Vec<usize>], twig_of: &[T], tol: &T) -> Regrouped<Self, T> {
        let m = groups.len();
        let mut values = Vec::with_capacity(m * (m - 1) / 2);
        for g in 0..m {
            for h in g + 1..m {
                let range = spread_mid(groups[g].iter().flat_map(|&a| {
                    groups[h].iter().map(move |&b| {
                        self.at(a, b).clone() - twig_of[a].clone() - twig_of[b].clone()
                    })
                }));
                if range.spread() > *tol {
                    return Err((vec![labels[g], labels[h]], range.spread()));
                }
                values.push(range.mid());
            }
        }
        let mut it = values.into_iter();
        Ok(DoubleWeights::from_fn(labels, |_, _| it.next().expect("value per pair")).expect("valid labels"))
    }

    fn solve_base(&self, tol: &T) -> std::result::Result<BaseCase<T>, BaseFailure<T>> {
        base::solve_doubles(self, tol)
    }

    fn wrap(&self) -> Reduced<T> {
        Reduced::Doubles(self.clone())
    }

    fn mismatch(&self, tree: &WeightedTree<T>, tol: &T) -> Option<(Vec<usize>, T, T)> {
        let got = tree.double_weights();
        self.entries().into_iter().find_map(|((i, j), v)| {
            let g = got.get(i, j).expect("same labels").clone();
            ((g.clone() - v.clone()).abs() > *tol).then(|| (vec![i, j], v, g))
        })
    }
}

impl<T: Scalar> Reducible<T> for TripleWeights<T> {
    const FLOOR: usize = 5;

    fn position(&self, label: usize) -> Result<usize> {
        TripleWeights::position(self, label)
    }

    fn pair_value(&self, p: usize, q: usize) -> T {
        derived_pairwise_mid(self, p, q)
    }

    fn regroup(&self, labels: Vec<usize>, groups: &[Vec<usize>], twig_of: &[T], tol: &T) -> Regrouped<Self, T> {
        let m = groups.len();
        let mut values = Vec::with_capacity(m * (m - 1) * (m - 2) / 6);
        // Same slot order as `TripleWeights::from_fn`.
        for c in 2..m {
            for b in 1..c {
                for a in 0..b {
                    let mut range: Option<Range<T>> = None;
                    for &x in &groups[a] {
                        for &y in &groups[b] {
                            for &z in &groups[c] {
                                let v = self.at(x, y, z).clone()
                                    - twig_of[x].clone()
                                    - twig_of[y].clone()
                                    - twig_of[z].clone();
                                match &mut range {
                                    Some(r) => r.push(v),
                                    None => range = Some(Range::new(v)),
                                }
                            }
                        }
                    }
                    let range = range.expect("non-empty groups");
                    if range.spread() > *tol {
                        return Err((vec![labels[a], labels[b], labels[c]], range.spread()));
                    }
                    values.push(range.mid());
                }
            }
        }
        let mut it = values.into_iter();
        Ok(TripleWeights::from_fn(labels, |_, _, _| it.next().expect("value per triple")).expect("valid labels"))
    }

    fn solve_base(&self, tol: &T) -> std::result::Result<BaseCase<T>, BaseFailure<T>> {
        base::solve_triples(self, tol)
    }

    fn wrap(&self) -> Reduced<T> {
        Reduced::Triples(self.clone())
    }

    fn mismatch(&self, tree: &WeightedTree<T>, tol: &T) -> Option<(Vec<usize>, T, T)> {
        let got = tree.triple_weights().expect("at least three leaves");
        self.entries().into_iter().find_map(|((i, j, k), v)| {
            let g = got.get(i, j, k).expect("same labels").clone();
            ((g.clone() - v.clone()).abs() > *tol).then(|| (vec![i, j, k], v, g))
        })
    }
}

/// Twig of every member of a complete pseudobell (positions), checked to be
/// independent of the partner used.
fn measure<T: Scalar, W: Reducible<T>>(w: &W, members: &[usize], tol: &T) -> std::result::Result<Vec<T>, (usize, T)> {
    members
        .iter()
        .map(|&a| {
            let range = spread_mid(members.iter().filter(|&&b| b != a).map(|&b| {
                (w.pair_value(a, b) + w.star_range(a, b).mid()).half()
            }));
            if range.spread() > *tol {
                Err((a, range.spread()))
            } else {
                Ok(range.mid())
            }
        })
        .collect()
}

/// Chooses what to prune so at least `floor` labels remain: whole
/// pseudobells in order of smallest member, then possibly the smallest
/// members of the next one. Returns `(members, partial)` per pruned set.
fn select(bells: &[Vec<usize>], count: usize, floor: usize) -> Vec<(Vec<usize>, bool)> {
    let mut size = count;
    let mut out = Vec::new();
    for bell in bells {
        if size < floor + 1 {
            break;
        }
        if size - (bell.len() - 1) >= floor {
            size -= bell.len() - 1;
            out.push((bell.clone(), false));
        } else {
            let k = size - floor + 1;
            out.push((bell[..k].to_vec(), true));
            size = floor;
        }
    }
    out
}

/// Prunes the given pseudobells (labels and twigs already set) from `w`,
/// keeping at least `floor` labels by the retention rule of [`select`].
/// Merged labels are numbered from one past the largest current label.
fn prune<T: Scalar, W: Reducible<T>>(
    w: &W,
    chosen: &[(Vec<usize>, Vec<T>, bool)],
    tol: &T,
    level: usize,
) -> std::result::Result<(W, ReductionLevel<T>), FailureKind<T>> {
    let labels = w.labels().to_vec();
    let mut next = labels.last().copied().unwrap_or(0) + 1;
    let mut twig_of = vec![T::zero(); labels.len()];
    let mut in_bell = vec![false; labels.len()];
    let mut pruned = Vec::new();
    let mut merged_groups = Vec::new();
    for (members, twigs, partial) in chosen {
        let mut group = Vec::new();
        for (m, a) in members.iter().zip(twigs) {
            let p = w.position(*m).map_err(FailureKind::Input)?;
            twig_of[p] = a.clone();
            in_bell[p] = true;
            group.push(p);
        }
        merged_groups.push(group);
        pruned.push(Pseudobell {
            members: members.clone(),
            twigs: twigs.clone(),
            merged: next,
            partial: *partial,
        });
        next += 1;
    }
    let mut groups: Vec<Vec<usize>> = (0..labels.len()).filter(|&p| !in_bell[p]).map(|p| vec![p]).collect();
    let mut after: Vec<usize> = groups.iter().map(|g| labels[g[0]]).collect();
    after.extend(pruned.iter().map(|b| b.merged));
    groups.extend(merged_groups);
    let reduced = w
        .regroup(after.clone(), &groups, &twig_of, tol)
        .map_err(|(entry, spread)| FailureKind::IllDefined { level, entry, spread })?;
    let record = ReductionLevel {
        before: labels,
        after,
        pruned,
        reduced: reduced.wrap(),
    };
    Ok((reduced, record))
}

/// Twigs for a list of pseudobells given by labels.
fn pseudobell_twigs<T: Scalar, W: Reducible<T>>(
    w: &W,
    bells: &[Vec<usize>],
    tol: &T,
    level: usize,
) -> std::result::Result<Vec<Vec<T>>, FailureKind<T>> {
    bells
        .iter()
        .map(|bell| {
            let pos = bell
                .iter()
                .map(|&l| w.position(l))
                .collect::<Result<Vec<_>>>()
                .map_err(FailureKind::Input)?;
            measure(w, &pos, tol).map_err(|(p, spread)| FailureKind::IllDefined {
                level,
                entry: vec![w.labels()[p]],
                spread,
            })
        })
        .collect()
}

/// One pruning step on doubles: computes twigs of the given complete
/// pseudobells and rewrites the weights, keeping at least `floor` labels.
pub fn prune_doubles<T: Scalar>(
    d: &DoubleWeights<T>,
    pseudobells: &[Vec<usize>],
    tol: &T,
    floor: usize,
) -> std::result::Result<(DoubleWeights<T>, ReductionLevel<T>), FailureKind<T>> {
    prune_step(d, pseudobells, tol, floor, 0)
}

/// One pruning step on triples; see [`prune_doubles`].
pub fn prune_triples<T: Scalar>(
    t: &TripleWeights<T>,
    pseudobells: &[Vec<usize>],
    tol: &T,
    floor: usize,
) -> std::result::Result<(TripleWeights<T>, ReductionLevel<T>), FailureKind<T>> {
    prune_step(t, pseudobells, tol, floor, 0)
}

fn prune_step<T: Scalar, W: Reducible<T>>(
    w: &W,
    pseudobells: &[Vec<usize>],
    tol: &T,
    floor: usize,
    level: usize,
) -> std::result::Result<(W, ReductionLevel<T>), FailureKind<T>> {
    let twigs = pseudobell_twigs(w, pseudobells, tol, level)?;
    let chosen: Vec<(Vec<usize>, Vec<T>, bool)> = select(pseudobells, w.count(), floor)
        .into_iter()
        .map(|(members, partial)| {
            let k = pseudobells
                .iter()
                .position(|b| b[0] == members[0])
                .expect("selected from the list");
            (members.clone(), twigs[k][..members.len()].to_vec(), partial)
        })
        .collect();
    prune(w, &chosen, tol, level)
}

fn check_labels<T: Scalar>(labels: &[usize]) -> std::result::Result<(), FailureKind<T>> {
    if labels.iter().enumerate().any(|(k, &l)| l != k + 1) {
        return Err(FailureKind::Input(Error::Argument(
            "reconstruction expects labels 1..=n".into(),
        )));
    }
    Ok(())
}

fn run<T: Scalar, W: Reducible<T>>(
    w: &W,
    tol: &T,
    require_positive: bool,
    trace: &mut ReconstructionTrace<T>,
) -> std::result::Result<WeightedTree<T>, FailureKind<T>> {
    let n = w.count();
    check_labels(w.labels())?;
    let mut current = w.clone();
    while current.count() > W::FLOOR {
        let level = trace.levels.len();
        let bells = complete_pseudobells(&current, tol).map_err(|e| match e {
            Error::NotClique { a, b, c } => FailureKind::NotClique { level, a, b, c },
            other => FailureKind::Input(other),
        })?;
        if bells.iter().map(|b| b.len() / 2).sum::<usize>() < 2 {
            return Err(FailureKind::TooFewPseudobells {
                level,
                pseudobells: bells,
            });
        }
        let (next, record) = prune_step(&current, &bells, tol, W::FLOOR, level)?;
        trace.levels.push(record);
        current = next;
    }
    let level = trace.levels.len();
    let base = current
        .solve_base(tol)
        .map_err(|reason| FailureKind::BaseCase { level, reason })?;
    let mut sketch: Sketch<T> = base.sketch.clone();
    trace.base = Some(base);
    for record in trace.levels.iter().rev() {
        for bell in &record.pruned {
            let twigs: Vec<(usize, T)> = bell.members.iter().copied().zip(bell.twigs.iter().cloned()).collect();
            sketch.expand(bell.merged, &twigs);
        }
    }
    let tree = sketch
        .to_tree(|l| l)
        .map_err(FailureKind::Input)?
        .canonicalize_within(tol);

    let vtol = tol.clone() * T::from_count(4 * (trace.levels.len() + 1));
    if let Some((entry, expected, actual)) = w.mismatch(&tree, &vtol) {
        return Err(FailureKind::Verification {
            entry,
            expected,
            actual,
        });
    }
    trace.positivity_witness = positivity(trace, n, tol);
    trace.all_twigs_positive = trace.positivity_witness.is_none();
    if require_positive {
        if let Some(w) = &trace.positivity_witness {
            return Err(FailureKind::NotPositive(w.clone()));
        }
    }
    Ok(tree)
}

/// Sign check over the trace. Twigs of input labels must be positive;
/// twigs of merged labels and inner base edges only non-negative, since a
/// zero there is an edge that canonicalization contracts.
fn positivity<T: Scalar>(trace: &ReconstructionTrace<T>, n: usize, tol: &T) -> Option<PositivityWitness<T>> {
    let slack = if T::EXACT { T::zero() } else { tol.clone() };
    let bad = |label: Option<usize>, v: &T| match label {
        Some(l) if l <= n => !v.is_positive(),
        _ => *v < -slack.clone(),
    };
    for (level, record) in trace.levels.iter().enumerate() {
        for bell in &record.pruned {
            for (m, a) in bell.members.iter().zip(&bell.twigs) {
                if bad(Some(*m), a) {
                    return Some(PositivityWitness {
                        level,
                        label: Some(*m),
                        value: a.clone(),
                    });
                }
            }
        }
    }
    let base = trace.base.as_ref()?;
    let level = trace.levels.len();
    base.edges.iter().find(|e| bad(e.leaf, &e.weight)).map(|e| PositivityWitness {
        level,
        label: e.leaf,
        value: e.weight.clone(),
    })
}

fn finish<T: Scalar>(
    result: std::result::Result<WeightedTree<T>, FailureKind<T>>,
    trace: ReconstructionTrace<T>,
) -> Outcome<T> {
    match result {
        Ok(tree) => Ok(Reconstruction { tree, trace }),
        Err(kind) => Err(Failure { kind, trace }),
    }
}

/// Decides whether `t` are the triple weights of a tree and rebuilds it.
///
/// Requires `n >= 5` and labels `1..=n`. With `require_positive` the
/// decision is for positive-weighted trees.
pub fn reconstruct_from_triples<T: Scalar>(t: &TripleWeights<T>, tol: &T, require_positive: bool) -> Outcome<T> {
    let mut trace = ReconstructionTrace::new(3);
    let result = (|| {
        match derived_pairwise_consistent(t, tol).map_err(FailureKind::Input)? {
            DerivedPairwise::Consistent(_) => {}
            DerivedPairwise::Inconsistent { pair, spread } => {
                return Err(FailureKind::Condition2 { pair, spread });
            }
        }
        run(t, tol, require_positive, &mut trace)
    })();
    finish(result, trace)
}

/// Decides whether `d` are the pairwise weights of a tree and rebuilds it.
/// Requires `n >= 2` and labels `1..=n`.
pub fn reconstruct_from_doubles<T: Scalar>(d: &DoubleWeights<T>, tol: &T, require_positive: bool) -> Outcome<T> {
    let mut trace = ReconstructionTrace::new(2);
    let result = run(d, tol, require_positive, &mut trace);
    finish(result, trace)
}

/// Lifts `d` to triple weights and runs [`reconstruct_from_triples`].
pub fn reconstruct_from_doubles_via_triples<T: Scalar>(
    d: &DoubleWeights<T>,
    tol: &T,
    require_positive: bool,
) -> Outcome<T> {
    match triples_from_doubles(d).and_then(|t| require_size(t.n(), 5).map(|_| t)) {
        Ok(t) => reconstruct_from_triples(&t, tol, require_positive),
        Err(e) => Err(Failure {
            kind: FailureKind::Input(e),
            trace: ReconstructionTrace::new(3),
        }),
    }
}
