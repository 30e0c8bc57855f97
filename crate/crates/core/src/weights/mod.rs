//! Double and triple weight containers and the checks defined on them.
//!
//! Both containers index values by *labels*, which are arbitrary positive
//! integers kept in increasing order; the reconstruction procedures relabel
//! merged pseudobells with fresh labels above `n`. Internally everything is
//! addressed by position in the sorted label list.

mod io;

use rayon::prelude::*;

use crate::error::{require_size, Error, Result};
use crate::scalar::{Range, Scalar};

pub use io::{emit_doubles, emit_triples, parse_doubles, parse_triples};

#[derive(Debug, Clone, PartialEq)]
struct LabelIndex {
    labels: Vec<usize>,
    pos: Vec<usize>,
}

impl LabelIndex {
    fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument("labels must be strictly increasing".into()));
        }
        if labels.first() == Some(&0) {
            return Err(Error::Argument("labels start at 1".into()));
        }
        let max = labels.last().copied().unwrap_or(0);
        let mut pos = vec![usize::MAX; max + 1];
        for (p, &l) in labels.iter().enumerate() {
            pos[l] = p;
        }
        Ok(LabelIndex { labels, pos })
    }

    fn position(&self, label: usize) -> Result<usize> {
        match self.pos.get(label) {
            Some(&p) if p != usize::MAX => Ok(p),
            _ => Err(Error::UnknownLabel(label)),
        }
    }
}

/// Real values on the 2-subsets of a label set.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleWeights<T> {
    index: LabelIndex,
    values: Vec<T>,
}

impl<T: Scalar> DoubleWeights<T> {
    /// Builds the container from `f(p, q)` over positions `p < q` of `labels`.
    pub fn from_fn(labels: Vec<usize>, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let index = LabelIndex::new(labels)?;
        let n = index.labels.len();
        require_size(n, 2)?;
        let mut values = vec![T::zero(); n * n];
        for p in 0..n {
            for q in p + 1..n {
                let v = f(p, q);
                values[p * n + q] = v.clone();
                values[q * n + p] = v;
            }
        }
        Ok(DoubleWeights { index, values })
    }

    /// Weights on labels `1..=n` from `f(i, j)` with `i < j`.
    pub fn from_labels_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        Self::from_fn((1..=n).collect(), |p, q| f(p + 1, q + 1))
    }

    pub fn n(&self) -> usize {
        self.index.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.index.labels
    }

    pub fn position(&self, label: usize) -> Result<usize> {
        self.index.position(label)
    }

    /// Value by positions; `p != q`.
    pub fn at(&self, p: usize, q: usize) -> &T {
        debug_assert_ne!(p, q);
        &self.values[p * self.n() + q]
    }

    /// Value by labels, in either order.
    pub fn get(&self, i: usize, j: usize) -> Result<&T> {
        let p = self.position(i)?;
        let q = self.position(j)?;
        if p == q {
            return Err(Error::Argument(format!("label {i} given twice")));
        }
        Ok(self.at(p, q))
    }

    /// Same container with every value mapped through `f`.
    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        DoubleWeights {
            index: self.index.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Copy with the entry for `{i, j}` replaced.
    pub fn with_value(&self, i: usize, j: usize, value: T) -> Result<Self> {
        self.get(i, j)?;
        let (p, q) = (self.position(i)?, self.position(j)?);
        let mut out = self.clone();
        let n = self.n();
        out.values[p * n + q] = value.clone();
        out.values[q * n + p] = value;
        Ok(out)
    }

    /// All entries as `((i, j), value)` with `i < j`, lexicographic.
    pub fn entries(&self) -> Vec<((usize, usize), T)> {
        let n = self.n();
        let l = &self.index.labels;
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for p in 0..n {
            for q in p + 1..n {
                out.push(((l[p], l[q]), self.at(p, q).clone()));
            }
        }
        out
    }

    /// Restriction to a subset of the labels.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let pos = keep.iter().map(|&l| self.position(l)).collect::<Result<Vec<_>>>()?;
        DoubleWeights::from_fn(keep, |a, b| self.at(pos[a], pos[b]).clone())
    }
}

/// Real values on the 3-subsets of a label set.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleWeights<T> {
    index: LabelIndex,
    values: Vec<T>,
}

fn triple_slot(p: usize, q: usize, r: usize) -> usize {
    let (mut a, mut b, mut c) = (p, q, r);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    if b > c {
        std::mem::swap(&mut b, &mut c);
    }
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    debug_assert!(a < b && b < c);
    c * (c - 1) * (c - 2) / 6 + b * (b - 1) / 2 + a
}

impl<T: Scalar> TripleWeights<T> {
    /// Builds the container from `f(p, q, r)` over positions `p < q < r`.
    pub fn from_fn(labels: Vec<usize>, mut f: impl FnMut(usize, usize, usize) -> T) -> Result<Self> {
        let index = LabelIndex::new(labels)?;
        let n = index.labels.len();
        require_size(n, 3)?;
        let mut values = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
        // Slot order: c major, then b, then a.
        for c in 2..n {
            for b in 1..c {
                for a in 0..b {
                    values.push(f(a, b, c));
                }
            }
        }
        Ok(TripleWeights { index, values })
    }

    /// Weights on labels `1..=n` from `f(i, j, k)` with `i < j < k`.
    pub fn from_labels_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Result<Self> {
        Self::from_fn((1..=n).collect(), |p, q, r| f(p + 1, q + 1, r + 1))
    }

    pub fn n(&self) -> usize {
        self.index.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.index.labels
    }

    pub fn position(&self, label: usize) -> Result<usize> {
        self.index.position(label)
    }

    /// Value by pairwise distinct positions, any order.
    pub fn at(&self, p: usize, q: usize, r: usize) -> &T {
        &self.values[triple_slot(p, q, r)]
    }

    /// Value by labels, any order.
    pub fn get(&self, i: usize, j: usize, k: usize) -> Result<&T> {
        let (p, q, r) = (self.position(i)?, self.position(j)?, self.position(k)?);
        if p == q || p == r || q == r {
            return Err(Error::Argument(format!("labels {i}, {j}, {k} are not distinct")));
        }
        Ok(self.at(p, q, r))
    }

    /// Copy with the entry for `{i, j, k}` replaced.
    pub fn with_value(&self, i: usize, j: usize, k: usize, value: T) -> Result<Self> {
        self.get(i, j, k)?;
        let slot = triple_slot(self.position(i)?, self.position(j)?, self.position(k)?);
        let mut out = self.clone();
        out.values[slot] = value;
        Ok(out)
    }

    /// All entries as `((i, j, k), value)` with `i < j < k`, lexicographic.
    pub fn entries(&self) -> Vec<((usize, usize, usize), T)> {
        let n = self.n();
        let l = &self.index.labels;
        let mut out = Vec::with_capacity(self.values.len());
        for p in 0..n {
            for q in p + 1..n {
                for r in q + 1..n {
                    out.push(((l[p], l[q], l[r]), self.at(p, q, r).clone()));
                }
            }
        }
        out
    }
}

/// Outcome of a star-condition query.
#[derive(Debug, Clone, PartialEq)]
pub struct StarResult<T> {
    pub holds: bool,
    /// Midrange of the observed differences, present when `holds`.
    pub common_difference: Option<T>,
    /// Maximum minus minimum of the observed differences.
    pub max_spread: T,
}

impl<T: Scalar> StarResult<T> {
    fn from_range(range: Range<T>, tol: &T) -> Self {
        let spread = range.spread();
        let holds = spread <= *tol;
        StarResult {
            holds,
            common_difference: holds.then(|| range.mid()),
            max_spread: spread,
        }
    }
}

/// Weight containers on which the star condition is defined.
pub trait WeightSet<T: Scalar>: Sync {
    /// Subset size `k` of the indexed weights.
    const ORDER: usize;

    fn labels(&self) -> &[usize];

    /// Differences `D(p, ·) − D(q, ·)` over every completion avoiding `p`, `q`.
    fn star_range(&self, p: usize, q: usize) -> Range<T>;

    /// Early-exit form of `star_range(p, q).spread() <= tol`.
    fn star_holds_at(&self, p: usize, q: usize, tol: &T) -> bool;

    /// Smallest label count for which the star condition characterizes bells.
    fn min_labels() -> usize {
        2 * Self::ORDER - 1
    }
}

impl<T: Scalar> WeightSet<T> for DoubleWeights<T> {
    const ORDER: usize = 2;

    fn labels(&self) -> &[usize] {
        DoubleWeights::labels(self)
    }

    fn star_range(&self, p: usize, q: usize) -> Range<T> {
        let mut range: Option<Range<T>> = None;
        for g in (0..self.n()).filter(|&g| g != p && g != q) {
            let d = self.at(p, g).clone() - self.at(q, g).clone();
            match &mut range {
                Some(r) => r.push(d),
                None => range = Some(Range::new(d)),
            }
        }
        range.expect("at least one completion")
    }

    fn star_holds_at(&self, p: usize, q: usize, tol: &T) -> bool {
        let mut range: Option<Range<T>> = None;
        for g in (0..self.n()).filter(|&g| g != p && g != q) {
            let d = self.at(p, g).clone() - self.at(q, g).clone();
            match &mut range {
                Some(r) => {
                    r.push(d);
                    if r.spread() > *tol {
                        return false;
                    }
                }
                None => range = Some(Range::new(d)),
            }
        }
        true
    }
}

impl<T: Scalar> WeightSet<T> for TripleWeights<T> {
    const ORDER: usize = 3;

    fn labels(&self) -> &[usize] {
        TripleWeights::labels(self)
    }

    fn star_range(&self, p: usize, q: usize) -> Range<T> {
        let n = self.n();
        let mut range: Option<Range<T>> = None;
        for a in (0..n).filter(|&a| a != p && a != q) {
            for b in (a + 1..n).filter(|&b| b != p && b != q) {
                let d = self.at(p, a, b).clone() - self.at(q, a, b).clone();
                match &mut range {
                    Some(r) => r.push(d),
                    None => range = Some(Range::new(d)),
                }
            }
        }
        range.expect("at least one completion")
    }

    fn star_holds_at(&self, p: usize, q: usize, tol: &T) -> bool {
        let n = self.n();
        let mut range: Option<Range<T>> = None;
        for a in (0..n).filter(|&a| a != p && a != q) {
            for b in (a + 1..n).filter(|&b| b != p && b != q) {
                let d = self.at(p, a, b).clone() - self.at(q, a, b).clone();
                match &mut range {
                    Some(r) => {
                        r.push(d);
                        if r.spread() > *tol {
                            return false;
                        }
                    }
                    None => range = Some(Range::new(d)),
                }
            }
        }
        true
    }
}

fn star_query<T: Scalar, W: WeightSet<T>>(
    w: &W,
    a: usize,
    b: usize,
    tol: &T,
    position: impl Fn(usize) -> Result<usize>,
) -> Result<StarResult<T>> {
    require_size(w.labels().len(), W::ORDER + 1)?;
    let p = position(a)?;
    let q = position(b)?;
    if p == q {
        return Err(Error::Argument(format!("star condition needs two labels, got {a} twice")));
    }
    Ok(StarResult::from_range(w.star_range(p, q), tol))
}

/// `D(a, γ) − D(b, γ)` is constant over `γ` outside `{a, b}`, within `tol`.
pub fn star_condition_doubles<T: Scalar>(
    w: &DoubleWeights<T>,
    a: usize,
    b: usize,
    tol: &T,
) -> Result<StarResult<T>> {
    star_query(w, a, b, tol, |l| w.position(l))
}

/// `D(a, γ1, γ2) − D(b, γ1, γ2)` is constant over 2-subsets outside `{a, b}`.
pub fn star_condition_triples<T: Scalar>(
    w: &TripleWeights<T>,
    a: usize,
    b: usize,
    tol: &T,
) -> Result<StarResult<T>> {
    star_query(w, a, b, tol, |l| w.position(l))
}

/// Label pairs satisfying the star condition, sorted lexicographically.
///
/// Requires at least `2k − 1` labels for weights of order `k`, the range in
/// which the star condition holds exactly for pairs in a common bell.
pub fn neighbor_pairs<T: Scalar, W: WeightSet<T>>(w: &W, tol: &T) -> Result<Vec<(usize, usize)>> {
    let labels = w.labels();
    require_size(labels.len(), W::min_labels())?;
    Ok(star_pairs_at(w, tol)
        .into_iter()
        .map(|(p, q)| (labels[p], labels[q]))
        .collect())
}

/// Position pairs satisfying the star condition, lexicographic.
pub(crate) fn star_pairs_at<T: Scalar, W: WeightSet<T>>(w: &W, tol: &T) -> Vec<(usize, usize)> {
    let n = w.labels().len();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|p| {
            (p + 1..n)
                .filter(move |&q| w.star_holds_at(p, q, tol))
                .map(move |q| (p, q))
        })
        .collect()
}

/// Three times the derived pairwise value, by positions.
fn derived_times_three<T: Scalar>(
    t: &TripleWeights<T>,
    i: usize,
    j: usize,
    r: usize,
    s: usize,
    u: usize,
) -> T {
    let plus = t.at(i, j, r).clone() + t.at(i, j, s).clone() + t.at(i, j, u).clone() + t.at(r, s, u).clone();
    let minus = t.at(i, r, s).clone()
        + t.at(i, r, u).clone()
        + t.at(i, s, u).clone()
        + t.at(j, r, s).clone()
        + t.at(j, r, u).clone()
        + t.at(j, s, u).clone();
    T::two() * plus - minus
}

/// Pairwise value recovered from triple weights through `r, s, u`:
/// ⅔(D_ijr + D_ijs + D_iju + D_rsu) − ⅓(D_irs + D_iru + D_isu + D_jrs + D_jru + D_jsu).
pub fn derived_pairwise<T: Scalar>(
    t: &TripleWeights<T>,
    i: usize,
    j: usize,
    r: usize,
    s: usize,
    u: usize,
) -> Result<T> {
    let ids = [i, j, r, s, u];
    for a in 0..5 {
        for b in a + 1..5 {
            if ids[a] == ids[b] {
                return Err(Error::Argument(format!("label {} repeated", ids[a])));
            }
        }
    }
    let mut pos = [0; 5];
    for (k, &l) in ids.iter().enumerate() {
        pos[k] = t.position(l)?;
    }
    let [i, j, r, s, u] = pos;
    Ok(derived_times_three(t, i, j, r, s, u) / T::from_count(3))
}

/// Midrange of the derived pairwise value over every completion, by positions.
pub(crate) fn derived_pairwise_mid<T: Scalar>(t: &TripleWeights<T>, i: usize, j: usize) -> T {
    if let Some((cube, scale)) = scaled_cube(t) {
        let (lo, hi) = integer_range(&cube, t.n(), i, j);
        return T::from_i64(lo + hi).expect("small integer") / (scale * T::from_count(6));
    }
    let rest: Vec<usize> = (0..t.n()).filter(|&x| x != i && x != j).collect();
    let mut range: Option<Range<T>> = None;
    for a in 0..rest.len() {
        for b in a + 1..rest.len() {
            for c in b + 1..rest.len() {
                let v = derived_times_three(t, i, j, rest[a], rest[b], rest[c]);
                match &mut range {
                    Some(rg) => rg.push(v),
                    None => range = Some(Range::new(v)),
                }
            }
        }
    }
    range.expect("five labels").mid() / T::from_count(3)
}

/// Result of checking that derived pairwise values are well defined.
#[derive(Debug, Clone, PartialEq)]
pub enum DerivedPairwise<T> {
    /// Every pair agreed within tolerance; values are the midranges.
    Consistent(DoubleWeights<T>),
    /// First pair (lexicographic) whose values spread beyond tolerance.
    Inconsistent { pair: (usize, usize), spread: T },
}

impl<T> DerivedPairwise<T> {
    pub fn is_consistent(&self) -> bool {
        matches!(self, DerivedPairwise::Consistent(_))
    }
}

/// Dense `n³` cube of scaled integer triple weights, when exact and small.
fn scaled_cube<T: Scalar>(t: &TripleWeights<T>) -> Option<(Vec<i64>, T)> {
    if !T::EXACT {
        return None;
    }
    let refs: Vec<&T> = t.values.iter().collect();
    let (ints, scale) = T::scaled_integers(&refs)?;
    let n = t.n();
    let mut cube = vec![0i64; n * n * n];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                if p != q && q != r && p != r {
                    cube[(p * n + q) * n + r] = ints[triple_slot(p, q, r)];
                }
            }
        }
    }
    Some((cube, scale))
}

/// Smallest and largest three-fold derived value of `(i, j)` on the cube.
fn integer_range(cube: &[i64], n: usize, i: usize, j: usize) -> (i64, i64) {
    let at = |p: usize, q: usize, r: usize| cube[(p * n + q) * n + r];
    let rest: Vec<usize> = (0..n).filter(|&x| x != i && x != j).collect();
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    for a in 0..rest.len() {
        let r = rest[a];
        let (ijr, ir, jr) = (at(i, j, r), i * n + r, j * n + r);
        for b in a + 1..rest.len() {
            let s = rest[b];
            let base = ijr + at(i, j, s);
            let side = at(i, r, s) + at(j, r, s);
            for &u in &rest[b + 1..] {
                let plus = base + at(i, j, u) + at(r, s, u);
                let minus = side + cube[ir * n + u] + at(i, s, u) + cube[jr * n + u] + at(j, s, u);
                let v = 2 * plus - minus;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    (lo, hi)
}

/// Evaluates the derived pairwise value of every pair over every choice of
/// `{r, s, u}` and checks the spread per pair is at most `tol`.
pub fn derived_pairwise_consistent<T: Scalar>(
    t: &TripleWeights<T>,
    tol: &T,
) -> Result<DerivedPairwise<T>> {
    let n = t.n();
    require_size(n, 5)?;
    let tol3 = tol.clone() * T::from_count(3);
    let three = T::from_count(3);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).collect();
    let ranges: Vec<Range<T>> = match scaled_cube(t) {
        Some((cube, scale)) => pairs
            .par_iter()
            .map(|&(i, j)| {
                let (lo, hi) = integer_range(&cube, n, i, j);
                let to_t = |v: i64| T::from_i64(v).expect("small integer") / scale.clone();
                let mut range = Range::new(to_t(lo));
                range.push(to_t(hi));
                range
            })
            .collect(),
        None => pairs
            .par_iter()
            .map(|&(i, j)| {
                let rest: Vec<usize> = (0..n).filter(|&x| x != i && x != j).collect();
                let mut range: Option<Range<T>> = None;
                for a in 0..rest.len() {
                    for b in a + 1..rest.len() {
                        for c in b + 1..rest.len() {
                            let v = derived_times_three(t, i, j, rest[a], rest[b], rest[c]);
                            match &mut range {
                                Some(rg) => rg.push(v),
                                None => range = Some(Range::new(v)),
                            }
                        }
                    }
                }
                range.expect("n >= 5")
            })
            .collect(),
    };
    for (&(i, j), range) in pairs.iter().zip(&ranges) {
        if range.spread() > tol3 {
            let labels = t.labels();
            return Ok(DerivedPairwise::Inconsistent {
                pair: (labels[i], labels[j]),
                spread: range.spread() / three,
            });
        }
    }
    let mut mids = ranges.into_iter().map(|r| r.mid() / three.clone());
    let doubles = DoubleWeights::from_fn(t.labels().to_vec(), |_, _| {
        mids.next().expect("one value per pair")
    })?;
    Ok(DerivedPairwise::Consistent(doubles))
}

/// `D_ijk = ½(D_ij + D_ik + D_jk)` for every 3-subset.
pub fn triples_from_doubles<T: Scalar>(d: &DoubleWeights<T>) -> Result<TripleWeights<T>> {
    TripleWeights::from_fn(d.labels().to_vec(), |p, q, r| {
        (d.at(p, q).clone() + d.at(p, r).clone() + d.at(q, r).clone()).half()
    })
}

/// Four-point verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<T> {
    Pass,
    /// First offending quadruple in lexicographic order with its three
    /// pair sums `D_ij+D_kh, D_ik+D_jh, D_ih+D_jk`.
    Fail { quad: [usize; 4], sums: [T; 3] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BunemanReport<T> {
    pub verdict: Verdict<T>,
    /// Metric-axiom violations; reported, never a reason to fail.
    pub warnings: Vec<String>,
}

impl<T> BunemanReport<T> {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass)
    }
}

/// Four-point condition: in every quadruple the largest of the three pair
/// sums is attained at least twice (the two largest differ by at most `tol`).
pub fn buneman_check<T: Scalar>(d: &DoubleWeights<T>, tol: &T) -> BunemanReport<T> {
    let n = d.n();
    let labels = d.labels();
    let first_failure: Option<([usize; 4], [T; 3])> = (0..n)
        .into_par_iter()
        .map(|i| {
            for j in i + 1..n {
                for k in j + 1..n {
                    for h in k + 1..n {
                        let sums = [
                            d.at(i, j).clone() + d.at(k, h).clone(),
                            d.at(i, k).clone() + d.at(j, h).clone(),
                            d.at(i, h).clone() + d.at(j, k).clone(),
                        ];
                        let mut sorted = sums.clone();
                        sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
                        if sorted[2].clone() - sorted[1].clone() > *tol {
                            return Some(([labels[i], labels[j], labels[k], labels[h]], sums));
                        }
                    }
                }
            }
            None
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();

    let mut warnings = Vec::new();
    let negatives = d.entries().into_iter().filter(|(_, v)| v.is_negative()).count();
    if negatives > 0 {
        warnings.push(format!("{negatives} negative distance(s)"));
    }
    'tri: for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a == b || b == c || a == c {
                    continue;
                }
                if d.at(a, c).clone() - tol.clone() > d.at(a, b).clone() + d.at(b, c).clone() {
                    warnings.push(format!(
                        "triangle inequality fails for ({}, {}, {})",
                        labels[a], labels[b], labels[c]
                    ));
                    break 'tri;
                }
            }
        }
    }

    BunemanReport {
        verdict: match first_failure {
            Some((quad, sums)) => Verdict::Fail { quad, sums },
            None => Verdict::Pass,
        },
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::Rational;
    use crate::tree::WeightedTree;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v)
    }

    fn zero() -> Rational {
        q(0)
    }

    fn quartet() -> DoubleWeights<Rational> {
        fixtures::quartet::<Rational>().double_weights()
    }

    fn caterpillar_triples() -> TripleWeights<Rational> {
        fixtures::caterpillar::<Rational>().triple_weights().unwrap()
    }

    #[test]
    fn quartet_distances_match_hand_values() {
        let d = quartet();
        let expect = [((1, 2), 3), ((1, 3), 9), ((1, 4), 10), ((2, 3), 10), ((2, 4), 11), ((3, 4), 7)];
        for ((i, j), v) in expect {
            assert_eq!(d.get(i, j).unwrap(), &q(v));
            assert_eq!(d.get(j, i).unwrap(), &q(v));
        }
    }

    #[test]
    fn caterpillar_triples_match_ten_formulas() {
        // a..e = 1..5, f1 = 6, f2 = 7
        let t = caterpillar_triples();
        let expect = [
            ((1, 2, 3), 12),
            ((1, 2, 4), 20),
            ((1, 3, 4), 21),
            ((2, 3, 4), 22),
            ((1, 2, 5), 21),
            ((1, 3, 5), 22),
            ((2, 3, 5), 23),
            ((1, 4, 5), 23),
            ((2, 4, 5), 24),
            ((3, 4, 5), 19),
        ];
        for ((i, j, k), v) in expect {
            assert_eq!(t.get(i, j, k).unwrap(), &q(v), "D{i}{j}{k}");
            assert_eq!(t.get(k, i, j).unwrap(), &q(v));
        }
    }

    #[test]
    fn star_doubles_examples() {
        let d = quartet();
        let r = star_condition_doubles(&d, 1, 2, &zero()).unwrap();
        assert!(r.holds);
        assert_eq!(r.common_difference, Some(q(-1)));
        let r = star_condition_doubles(&d, 1, 3, &zero()).unwrap();
        assert!(!r.holds);
        assert_eq!(r.max_spread, q(10));

        let three = DoubleWeights::from_labels_fn(3, |i, j| q((i * j) as i64)).unwrap();
        assert!(star_condition_doubles(&three, 1, 2, &zero()).unwrap().holds);
        let two = DoubleWeights::from_labels_fn(2, |_, _| q(1)).unwrap();
        assert!(matches!(
            star_condition_doubles(&two, 1, 2, &zero()),
            Err(Error::TooSmall { required: 3, .. })
        ));
    }

    #[test]
    fn star_triples_examples() {
        let t = caterpillar_triples();
        let r = star_condition_triples(&t, 1, 2, &zero()).unwrap();
        assert!(r.holds);
        assert_eq!(r.common_difference, Some(q(-1)));
        let r = star_condition_triples(&t, 1, 3, &zero()).unwrap();
        assert!(!r.holds);
        assert_eq!(r.max_spread, q(6));
        let r = star_condition_triples(&t, 4, 5, &zero()).unwrap();
        assert_eq!(r.common_difference, Some(q(-1)));
    }

    #[test]
    fn neighbor_pair_examples() {
        assert_eq!(neighbor_pairs(&caterpillar_triples(), &zero()).unwrap(), vec![(1, 2), (4, 5)]);
        assert_eq!(neighbor_pairs(&quartet(), &zero()).unwrap(), vec![(1, 2), (3, 4)]);
        let star = fixtures::star::<Rational>(5, q(1)).triple_weights().unwrap();
        assert_eq!(neighbor_pairs(&star, &zero()).unwrap().len(), 10);
        let small = fixtures::quartet::<Rational>().triple_weights().unwrap();
        assert_eq!(
            neighbor_pairs(&small, &zero()),
            Err(Error::TooSmall { required: 5, actual: 4 })
        );
    }

    #[test]
    fn derived_pairwise_examples() {
        let t = caterpillar_triples();
        assert_eq!(derived_pairwise(&t, 1, 2, 3, 4, 5).unwrap(), q(3));
        let zeros = TripleWeights::from_labels_fn(5, |_, _, _| zero()).unwrap();
        assert_eq!(derived_pairwise(&zeros, 1, 2, 3, 4, 5).unwrap(), zero());
        assert!(matches!(derived_pairwise(&t, 1, 2, 3, 3, 5), Err(Error::Argument(_))));
        let d = DoubleWeights::from_labels_fn(6, |i, j| Rational::new((i * 7 + j * j) as i64, 3)).unwrap();
        let t = triples_from_doubles(&d).unwrap();
        assert_eq!(derived_pairwise(&t, 2, 5, 1, 6, 3).unwrap(), d.get(2, 5).unwrap().clone());
    }

    #[test]
    fn derived_pairwise_consistency_examples() {
        let c: WeightedTree<Rational> = fixtures::caterpillar();
        match derived_pairwise_consistent(&caterpillar_triples(), &zero()).unwrap() {
            DerivedPairwise::Consistent(d) => assert_eq!(d, c.double_weights()),
            other => panic!("expected consistency, got {other:?}"),
        }
        // With five labels every pair has a single witness set, so bumping
        // needs a sixth label to be visible.
        let six: WeightedTree<Rational> = fixtures::star(6, q(2));
        let bumped = six.triple_weights().unwrap().with_value(1, 2, 3, q(7)).unwrap();
        assert!(!derived_pairwise_consistent(&bumped, &zero()).unwrap().is_consistent());
        let small = fixtures::quartet::<Rational>().triple_weights().unwrap();
        assert!(derived_pairwise_consistent(&small, &zero()).is_err());
    }

    #[test]
    fn triples_from_doubles_examples() {
        let t = triples_from_doubles(&quartet()).unwrap();
        assert_eq!(t.get(1, 2, 3).unwrap(), &q(11));
        let zeros = DoubleWeights::from_labels_fn(4, |_, _| zero()).unwrap();
        assert!(triples_from_doubles(&zeros).unwrap().entries().iter().all(|(_, v)| v == &zero()));
        let c: WeightedTree<Rational> = fixtures::caterpillar();
        for ((i, j, k), v) in triples_from_doubles(&c.double_weights()).unwrap().entries() {
            assert_eq!(v, c.triple_weight(i, j, k).unwrap());
        }
    }

    #[test]
    fn buneman_examples() {
        assert!(buneman_check(&quartet(), &zero()).passed());
        let c = fixtures::caterpillar::<Rational>().double_weights();
        let d = |i, j| c.get(i, j).unwrap().clone();
        assert_eq!(
            [d(1, 2) + d(3, 4), d(1, 3) + d(2, 4), d(1, 4) + d(2, 3)],
            [q(17), q(29), q(29)]
        );
        assert!(buneman_check(&c, &zero()).passed());

        let bad = quartet().with_value(1, 2, q(30)).unwrap();
        let report = buneman_check(&bad, &zero());
        assert_eq!(
            report.verdict,
            Verdict::Fail {
                quad: [1, 2, 3, 4],
                sums: [q(37), q(20), q(20)]
            }
        );
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn restriction_keeps_values() {
        let d = quartet().restrict(&[3, 1, 2]).unwrap();
        assert_eq!(d.labels(), &[1, 2, 3]);
        assert_eq!(d.get(2, 3).unwrap(), &q(10));
    }
}
