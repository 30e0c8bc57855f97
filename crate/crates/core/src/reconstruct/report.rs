//! JSON rendering of a reconstruction outcome.

use serde_json::{json, Value};

use super::{FailureKind, Outcome, ReconstructionTrace};
use crate::scalar::Scalar;

fn num<T: Scalar>(v: &T) -> Value {
    if T::EXACT {
        json!({ "value": v.to_f64_lossy(), "exact": v.exact_text() })
    } else {
        json!(v.to_f64_lossy())
    }
}

fn failure<T: Scalar>(kind: &FailureKind<T>) -> Value {
    let witness = match kind {
        FailureKind::Input(_) => Value::Null,
        FailureKind::Condition2 { pair, spread } => json!({ "pair": [pair.0, pair.1], "spread": num(spread) }),
        FailureKind::NotClique { level, a, b, c } => json!({ "level": level, "labels": [a, b, c] }),
        FailureKind::TooFewPseudobells { level, pseudobells } => {
            json!({ "level": level, "pseudobells": pseudobells })
        }
        FailureKind::IllDefined { level, entry, spread } => {
            json!({ "level": level, "entry": entry, "spread": num(spread) })
        }
        FailureKind::BaseCase { level, reason } => match reason {
            super::BaseFailure::NoStarPairs { labels } => json!({ "level": level, "labels": labels }),
            super::BaseFailure::Inconsistent { residual } => {
                json!({ "level": level, "residual": num(residual) })
            }
        },
        FailureKind::Verification {
            entry,
            expected,
            actual,
        } => json!({ "entry": entry, "expected": num(expected), "actual": num(actual) }),
        FailureKind::NotPositive(w) => {
            json!({ "level": w.level, "label": w.label, "value": num(&w.value) })
        }
    };
    json!({ "kind": kind.name(), "message": kind.to_string(), "witness": witness })
}

fn trace<T: Scalar>(trace: &ReconstructionTrace<T>) -> Value {
    let levels: Vec<Value> = trace
        .levels
        .iter()
        .map(|level| {
            let bells: Vec<Value> = level
                .pruned
                .iter()
                .map(|b| {
                    json!({
                        "members": b.members,
                        "twigs": b.twigs.iter().map(num).collect::<Vec<_>>(),
                        "merged": b.merged,
                        "partial": b.partial,
                    })
                })
                .collect();
            json!({ "before": level.before, "after": level.after, "pseudobells": bells })
        })
        .collect();
    let base = trace.base.as_ref().map(|b| {
        json!({
            "labels": b.labels,
            "edges": b.edges.iter().map(|e| json!({ "leaf": e.leaf, "weight": num(&e.weight) })).collect::<Vec<_>>(),
            "residual": num(&b.residual),
            "four_sets": b.four_sets.iter().map(|f| json!({
                "pruned": [f.pruned.0, f.pruned.1],
                "twigs": f.twigs.iter().map(|(l, a)| json!([l, num(a)])).collect::<Vec<_>>(),
                "merged_twig": num(&f.merged_twig),
            })).collect::<Vec<_>>(),
        })
    });
    json!({ "order": trace.order, "levels": levels, "base_case": base })
}

/// Report with verdict, failure witness, per-level pseudobells, base case,
/// positivity flag and, on success, the tree as Newick and JSON.
pub fn report_json<T: Scalar>(outcome: &Outcome<T>) -> Value {
    match outcome {
        Ok(r) => json!({
            "verdict": "realizable",
            "failure": Value::Null,
            "trace": trace(&r.trace),
            "all_twigs_positive": r.trace.all_twigs_positive,
            "positivity_witness": r.trace.positivity_witness.as_ref().map(|w| json!({
                "level": w.level, "label": w.label, "value": num(&w.value),
            })),
            "newick": r.tree.to_newick(),
            "tree": serde_json::to_value(r.tree.to_json()).expect("tree serializes"),
        }),
        Err(f) => json!({
            "verdict": "not_realizable",
            "failure": failure(&f.kind),
            "trace": trace(&f.trace),
            "all_twigs_positive": false,
        }),
    }
}
