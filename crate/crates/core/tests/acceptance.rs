//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exact criteria run in rational mode at tolerance 0. Criterion 5 asks for
//! every single-entry perturbation of the caterpillar triples to be rejected;
//! two of them are realizable by another real-weighted caterpillar, which the
//! oracle confirms, so that line stays red and only that explanation is
//! accepted for it.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use treeweights::fixtures;
use treeweights::nj::{cherry_scan, nj_classic, nj_pruning, s_matrix};
use treeweights::oracle::{enumerate_topologies, realizable_doubles, realizable_triples, Topology};
use treeweights::reconstruct::{reconstruct_from_doubles, reconstruct_from_triples};
use treeweights::weights::{derived_pairwise, neighbor_pairs};
use treeweights::{random_tree, tree_equal, DoubleWeights, Rational, WeightedTree};

const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(120);
const SCAN_FIT_FACTOR: f64 = 1.5;
const SCAN_ROUND_BUDGET: Duration = Duration::from_secs(5);
const NOISE_EPS_FACTOR: f64 = 4.0;
const NOISE_INNER_FACTOR: f64 = 10.0;
const NOISE_PASS_RATE: f64 = 0.95;

fn q(v: i64) -> Rational {
    Rational::from_integer(v)
}

fn zero() -> Rational {
    q(0)
}

struct Outcome {
    pass: bool,
    detail: String,
    /// Reason a red line is expected, when it is.
    known: Option<String>,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, known: None }
    }
}

/// Weights drawn on a small integer grid. Odd draws allow zero and negative
/// values so the positivity and real-weight paths are exercised.
fn draw_weights(topo: &Topology, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = if seed % 2 == 0 { 1 } else { -3 };
    (0..topo.edges().len()).map(|_| q(rng.gen_range(lo..=9))).collect()
}

fn small_topologies() -> Vec<Topology> {
    (2..=6).flat_map(|n| enumerate_topologies(n, true).unwrap()).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let failures = (0..500u64)
        .into_par_iter()
        .filter(|&seed| {
            let n = 4 + (seed as usize * 7) % 37;
            let t: WeightedTree<Rational> = random_tree(n, seed, 0.5, 10.0, false).unwrap();
            match reconstruct_from_doubles(&t.double_weights(), &zero(), false) {
                Ok(r) => !tree_equal(&r.tree, &t, &zero()),
                Err(_) => true,
            }
        })
        .count();
    let elapsed = start.elapsed();
    Outcome::check(
        failures == 0 && elapsed < ROUND_TRIP_BUDGET,
        format!("500 trees, n in [4,40], {failures} mismatches, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let failures = (0..300u64)
        .into_par_iter()
        .filter(|&seed| {
            let n = 5 + (seed as usize * 5) % 21;
            let t: WeightedTree<Rational> = random_tree(n, 1000 + seed, 0.5, 10.0, false).unwrap();
            match reconstruct_from_triples(&t.triple_weights().unwrap(), &zero(), false) {
                Ok(r) => !tree_equal(&r.tree, &t, &zero()),
                Err(_) => true,
            }
        })
        .count();
    Outcome::check(failures == 0, format!("300 trees, n in [5,25], {failures} mismatches"))
}

fn agree(procedure: Option<WeightedTree<Rational>>, oracle: Option<WeightedTree<Rational>>) -> bool {
    match (procedure, oracle) {
        (Some(a), Some(b)) => tree_equal(&a, &b, &zero()),
        (None, None) => true,
        _ => false,
    }
}

fn criterion_3() -> Outcome {
    let topologies = small_topologies();
    let instances: Vec<(usize, u64)> = (0..topologies.len()).flat_map(|k| (0..20u64).map(move |d| (k, d))).collect();
    let disagreements = instances
        .par_iter()
        .filter(|&&(k, draw)| {
            let topo = &topologies[k];
            let tree = topo.with_weights(&draw_weights(topo, k as u64 * 100 + draw)).unwrap();
            let d = tree.double_weights();
            let mut ok = agree(
                reconstruct_from_doubles(&d, &zero(), false).ok().map(|r| r.tree),
                realizable_doubles(&d, false).unwrap(),
            );
            if tree.leaf_count() >= 5 {
                let t = tree.triple_weights().unwrap();
                ok &= agree(
                    reconstruct_from_triples(&t, &zero(), false).ok().map(|r| r.tree),
                    realizable_triples(&t, false).unwrap(),
                );
            }
            !ok
        })
        .count();

    // Single-entry perturbations of realizable instances with n in {5, 6}.
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut perturbed = Vec::new();
    for k in 0..topologies.len() {
        if topologies[k].leaf_count() < 5 {
            continue;
        }
        let tree = topologies[k].with_weights(&draw_weights(&topologies[k], 7 + k as u64 * 2)).unwrap();
        perturbed.push((tree, rng.gen::<u64>()));
    }
    let results: Vec<(bool, usize)> = perturbed
        .par_iter()
        .map(|(tree, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let n = tree.leaf_count();
            let bump = q(rng.gen_range(1..=5));
            let d = tree.double_weights();
            let (i, j) = loop {
                let (i, j) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
                if i < j {
                    break (i, j);
                }
            };
            let d2 = d.with_value(i, j, d.get(i, j).unwrap().clone() + bump.clone()).unwrap();
            let t = tree.triple_weights().unwrap();
            let (a, b, c) = loop {
                let mut v = [rng.gen_range(1..=n), rng.gen_range(1..=n), rng.gen_range(1..=n)];
                v.sort_unstable();
                if v[0] < v[1] && v[1] < v[2] {
                    break (v[0], v[1], v[2]);
                }
            };
            let t2 = t.with_value(a, b, c, t.get(a, b, c).unwrap().clone() + bump).unwrap();
            let od = realizable_doubles(&d2, false).unwrap();
            let ot = realizable_triples(&t2, false).unwrap();
            let rejected = od.is_none() as usize + ot.is_none() as usize;
            let ok = agree(reconstruct_from_doubles(&d2, &zero(), false).ok().map(|r| r.tree), od)
                && agree(reconstruct_from_triples(&t2, &zero(), false).ok().map(|r| r.tree), ot);
            (ok, rejected)
        })
        .collect();
    let rejected: usize = results.iter().map(|r| r.1).sum();
    let perturb_bad = results.iter().filter(|r| !r.0).count();
    Outcome::check(
        disagreements == 0 && perturb_bad == 0 && rejected >= 200,
        format!(
            "{} instances, {disagreements} disagreements; {} perturbations, {rejected} oracle-rejected, {perturb_bad} disagreements",
            instances.len(),
            2 * results.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let topologies = small_topologies();
    let bad = topologies
        .par_iter()
        .enumerate()
        .filter(|&(k, topo)| {
            let n = topo.leaf_count();
            if n < 3 {
                return false;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let weights: Vec<Rational> = (0..topo.edges().len()).map(|_| q(rng.gen_range(1..=9))).collect();
            let tree = topo.with_weights(&weights).unwrap();
            let expected = tree.bell_pairs();
            let mut ok = neighbor_pairs(&tree.double_weights(), &zero()).unwrap() == expected;
            if n >= 5 {
                ok &= neighbor_pairs(&tree.triple_weights().unwrap(), &zero()).unwrap() == expected;
            }
            !ok
        })
        .count();
    Outcome::check(bad == 0, format!("{} shapes, {bad} mismatches", topologies.len()))
}

fn criterion_5() -> Outcome {
    let c = fixtures::caterpillar::<Rational>();
    let t = c.triple_weights().unwrap();
    let exact = match reconstruct_from_triples(&t, &zero(), true) {
        Ok(r) => {
            let mut w: Vec<Rational> = r.tree.edges().iter().map(|e| e.weight.clone()).collect();
            w.sort();
            w == (1..=7).map(q).collect::<Vec<_>>() && tree_equal(&r.tree, &c, &zero())
        }
        Err(_) => false,
    };
    let mut accepted = Vec::new();
    let mut accepted_and_realizable = true;
    for ((a, b, cc), v) in t.entries() {
        let bumped = t.with_value(a, b, cc, v + q(1)).unwrap();
        if let Ok(r) = reconstruct_from_triples(&bumped, &zero(), false) {
            accepted.push(format!("D{a}{b}{cc}"));
            // An accepted perturbation must be a genuine realization.
            accepted_and_realizable &= agree(Some(r.tree), realizable_triples(&bumped, false).unwrap());
        }
    }
    let pass = exact && accepted.is_empty();
    let known = (exact && accepted_and_realizable && !accepted.is_empty()).then(|| {
        format!(
            "perturbed {} realizable by a real-weighted caterpillar (oracle-confirmed)",
            accepted.join(", ")
        )
    });
    Outcome {
        pass,
        detail: format!("weights exact: {exact}; perturbations accepted: {}", accepted.len()),
        known,
    }
}

fn criterion_6() -> Outcome {
    let bad: usize = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let n = 5 + seed as usize % 4;
            let tree: WeightedTree<Rational> = random_tree(n, 2000 + seed, 0.5, 10.0, false).unwrap();
            let t = tree.triple_weights().unwrap();
            let mut bad = 0;
            for i in 1..=n {
                for j in (1..=n).filter(|&j| j != i) {
                    let truth = tree.pairwise_weight(i, j).unwrap();
                    let rest: Vec<usize> = (1..=n).filter(|&x| x != i && x != j).collect();
                    for &r in &rest {
                        for &s in rest.iter().filter(|&&s| s != r) {
                            for &u in rest.iter().filter(|&&u| u != r && u != s) {
                                if derived_pairwise(&t, i, j, r, s, u).unwrap() != truth {
                                    bad += 1;
                                }
                            }
                        }
                    }
                }
            }
            bad
        })
        .sum();
    Outcome::check(bad == 0, format!("100 trees, n in [5,8], every ordered (i,j,r,s,u), {bad} mismatches"))
}

fn criterion_7() -> Outcome {
    let bad = (0..200u64)
        .into_par_iter()
        .filter(|&seed| {
            let n = 4 + seed as usize % 27;
            let tree: WeightedTree<Rational> = random_tree(n, 3000 + seed, 0.5, 10.0, false).unwrap();
            let d = tree.double_weights();
            let a = nj_classic(&d).unwrap();
            let (b, _) = nj_pruning(&d, &zero()).unwrap();
            let c = reconstruct_from_doubles(&d, &zero(), false).unwrap().tree;
            !(tree_equal(&a, &b, &zero()) && tree_equal(&a, &c, &zero()) && tree_equal(&a, &tree, &zero()))
        })
        .count();
    Outcome::check(bad == 0, format!("200 instances, n in [4,30], {bad} mismatches"))
}

fn argmin_is_cherry(tree: &WeightedTree<Rational>) -> bool {
    let s = s_matrix(&tree.double_weights()).unwrap();
    let pairs = tree.bell_pairs();
    s.argmin_pairs().iter().all(|p| pairs.contains(p))
}

fn criterion_8() -> Outcome {
    let topologies: Vec<Topology> = (3..=6).flat_map(|n| enumerate_topologies(n, true).unwrap()).collect();
    let exhaustive = topologies
        .par_iter()
        .enumerate()
        .filter(|&(k, topo)| {
            (0..5u64).any(|draw| {
                let mut rng = ChaCha8Rng::seed_from_u64(k as u64 * 10 + draw);
                let weights: Vec<Rational> = (0..topo.edges().len()).map(|_| q(rng.gen_range(1..=9))).collect();
                !argmin_is_cherry(&topo.with_weights(&weights).unwrap())
            })
        })
        .count();
    let random = (0..200u64)
        .into_par_iter()
        .filter(|&seed| {
            let n = 7 + seed as usize % 34;
            let tree = random_tree(n, 4000 + seed, 0.5, 10.0, false).unwrap();
            !argmin_is_cherry(&tree)
        })
        .count();
    Outcome::check(
        exhaustive + random == 0,
        format!("{} shapes x 5 draws and 200 trees n in [7,40], {} misses", topologies.len(), exhaustive + random),
    )
}

fn criterion_9() -> Outcome {
    let ratios: Vec<f64> = [100usize, 200, 400, 800]
        .iter()
        .map(|&n| {
            let tree: WeightedTree<f64> = random_tree(n, n as u64, 0.5, 10.0, false).unwrap();
            let scan = cherry_scan(&tree.double_weights(), &1e-9).unwrap();
            scan.entries_examined as f64 / (n * n) as f64
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0f64), |(l, h), &r| (l.min(r), h.max(r)));
    let tree: WeightedTree<f64> = random_tree(1000, 1000, 0.5, 10.0, false).unwrap();
    let d = tree.double_weights();
    let start = Instant::now();
    cherry_scan(&d, &1e-9).unwrap();
    let elapsed = start.elapsed();
    Outcome::check(
        hi / lo <= SCAN_FIT_FACTOR && elapsed < SCAN_ROUND_BUDGET,
        format!(
            "entries/n^2 in [{lo:.3}, {hi:.3}] (spread x{:.3}); n=1000 round {:.3}s",
            hi / lo,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_10() -> Outcome {
    let delta = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut hits = 0;
    let trials = 1000;
    for _ in 0..trials {
        // Random pairing of the four labels into the two cherries.
        let partner = rng.gen_range(2..=4);
        let others: Vec<usize> = (2..=4).filter(|&x| x != partner).collect();
        let twigs: Vec<f64> = (0..4).map(|_| rng.gen_range(1.0..20.0)).collect();
        let inner = rng.gen_range(NOISE_INNER_FACTOR * delta..3.0 * NOISE_INNER_FACTOR * delta);
        let side = |x: usize| x == 1 || x == partner;
        let d = DoubleWeights::from_labels_fn(4, |i, j| {
            let base = twigs[i - 1] + twigs[j - 1] + if side(i) == side(j) { 0.0 } else { inner };
            base + rng.gen_range(-delta..=delta)
        })
        .unwrap();
        let scan = cherry_scan(&d, &(NOISE_EPS_FACTOR * delta)).unwrap();
        let mut expected = vec![(1, partner), (others[0], others[1])];
        expected.sort_unstable();
        if scan.pairs == expected {
            hits += 1;
        }
    }
    let rate = hits as f64 / trials as f64;
    Outcome::check(rate >= NOISE_PASS_RATE, format!("{hits}/{trials} recovered ({:.1}%)", rate * 100.0))
}

fn criterion_11() -> Outcome {
    let topologies = small_topologies();
    let instances: Vec<(usize, u64)> = (0..topologies.len()).flat_map(|k| (0..20u64).map(move |d| (k, d))).collect();
    let counts: Vec<(usize, usize)> = instances
        .par_iter()
        .map(|&(k, draw)| {
            let topo = &topologies[k];
            let tree = topo.with_weights(&draw_weights(topo, k as u64 * 100 + draw)).unwrap();
            let d = tree.double_weights();
            let truth = realizable_doubles(&d, false).unwrap().expect("tree data is realizable");
            let negative = !truth.all_weights_positive() as usize;
            let mut bad = (reconstruct_from_doubles(&d, &zero(), true).is_err() != (negative == 1)) as usize;
            if tree.leaf_count() >= 5 {
                let t = tree.triple_weights().unwrap();
                let truth = realizable_triples(&t, false).unwrap().expect("tree data is realizable");
                let rejected = reconstruct_from_triples(&t, &zero(), true).is_err();
                bad += (rejected != !truth.all_weights_positive()) as usize;
            }
            (bad, negative)
        })
        .collect();
    let bad: usize = counts.iter().map(|c| c.0).sum();
    let negative: usize = counts.iter().map(|c| c.1).sum();
    Outcome::check(
        bad == 0 && negative > 0,
        format!("{} instances, {negative} with a non-positive edge, {bad} mismatches", instances.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("round-trip doubles", criterion_1),
        ("round-trip triples", criterion_2),
        ("oracle equivalence", criterion_3),
        ("star condition iff bell", criterion_4),
        ("five-leaf base case", criterion_5),
        ("derived pairwise identity", criterion_6),
        ("neighbor-joining equivalence", criterion_7),
        ("S-matrix minimum at a cherry", criterion_8),
        ("scan complexity", criterion_9),
        ("noise tolerance", criterion_10),
        ("positivity certificate", criterion_11),
    ];
    let mut unexpected = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {:>2} {name}: {} [{:.1}s]",
            k + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
        if !out.pass {
            match out.known {
                Some(why) => println!("     expected: {why}"),
                None => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
