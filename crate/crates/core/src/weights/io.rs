//! Text format for weight files.
//!
//! ```text
//! # optional comments
//! 4
//! 1 2 3
//! 1 3 9
//! ...
//! ```
//!
//! The first non-comment line holds `n`; every following line holds `k`
//! labels in `1..=n` and a value (decimal or `p/q`). Each `k`-subset must
//! appear exactly once.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{DoubleWeights, TripleWeights};
use crate::error::{parse_err, Error, Result};
use crate::scalar::Scalar;

struct Parsed<T> {
    n: usize,
    values: HashMap<Vec<usize>, T>,
    last_line: usize,
}

fn parse_generic<T: Scalar>(text: &str, order: usize) -> Result<Parsed<T>> {
    let mut n: Option<usize> = None;
    let mut values: HashMap<Vec<usize>, T> = HashMap::new();
    let mut seen_at: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(size) = n else {
            if tokens.len() != 1 {
                return Err(parse_err(line, "expected the label count n on its own line"));
            }
            let size: usize = tokens[0]
                .parse()
                .map_err(|_| parse_err(line, format!("bad label count {:?}", tokens[0])))?;
            if size < order {
                return Err(parse_err(line, format!("n = {size} is below {order}")));
            }
            n = Some(size);
            continue;
        };
        if tokens.len() != order + 1 {
            return Err(parse_err(
                line,
                format!("expected {} labels and a value, got {} fields", order, tokens.len()),
            ));
        }
        let mut key = Vec::with_capacity(order);
        for tok in &tokens[..order] {
            let label: usize = tok
                .parse()
                .map_err(|_| parse_err(line, format!("bad label {tok:?}")))?;
            if label == 0 || label > size {
                return Err(parse_err(line, format!("label {label} outside 1..={size}")));
            }
            key.push(label);
        }
        key.sort_unstable();
        if key.windows(2).any(|w| w[0] == w[1]) {
            return Err(parse_err(line, "repeated label in one entry"));
        }
        let value = T::parse_value(tokens[order])
            .ok_or_else(|| parse_err(line, format!("bad value {:?}", tokens[order])))?;
        if let Some(first) = seen_at.get(&key) {
            return Err(parse_err(
                line,
                format!("duplicate entry {key:?} (first given on line {first})"),
            ));
        }
        seen_at.insert(key.clone(), line);
        values.insert(key, value);
    }
    let n = n.ok_or_else(|| parse_err(last_line.max(1), "missing label count"))?;
    Ok(Parsed { n, values, last_line })
}

fn missing(parsed: &Parsed<impl Scalar>, key: &[usize]) -> Error {
    parse_err(parsed.last_line + 1, format!("missing entry for {key:?}"))
}

pub fn parse_doubles<T: Scalar>(text: &str) -> Result<DoubleWeights<T>> {
    let parsed = parse_generic::<T>(text, 2)?;
    let n = parsed.n;
    for i in 1..=n {
        for j in i + 1..=n {
            if !parsed.values.contains_key(&vec![i, j]) {
                return Err(missing(&parsed, &[i, j]));
            }
        }
    }
    DoubleWeights::from_labels_fn(n, |i, j| parsed.values[&vec![i, j]].clone())
}

pub fn parse_triples<T: Scalar>(text: &str) -> Result<TripleWeights<T>> {
    let parsed = parse_generic::<T>(text, 3)?;
    let n = parsed.n;
    for i in 1..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                if !parsed.values.contains_key(&vec![i, j, k]) {
                    return Err(missing(&parsed, &[i, j, k]));
                }
            }
        }
    }
    TripleWeights::from_labels_fn(n, |i, j, k| parsed.values[&vec![i, j, k]].clone())
}

/// Writes `d` in the file format. Labels must be `1..=n`.
pub fn emit_doubles<T: Scalar>(d: &DoubleWeights<T>) -> String {
    let mut out = format!("{}\n", d.n());
    for ((i, j), v) in d.entries() {
        writeln!(out, "{i} {j} {}", v.exact_text()).expect("write to string");
    }
    out
}

/// Writes `t` in the file format. Labels must be `1..=n`.
pub fn emit_triples<T: Scalar>(t: &TripleWeights<T>) -> String {
    let mut out = format!("{}\n", t.n());
    for ((i, j, k), v) in t.entries() {
        writeln!(out, "{i} {j} {k} {}", v.exact_text()).expect("write to string");
    }
    out
}
