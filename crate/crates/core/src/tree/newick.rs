use std::fmt::Write as _;

use super::{Edge, WeightedTree};
use crate::error::{parse_err, Error, Result};
use crate::scalar::{format_significant, Scalar};

impl<T: Scalar> WeightedTree<T> {
    /// Newick text rooted at the node adjacent to leaf 1, children ordered by
    /// smallest descendant leaf, weights with 12 significant digits.
    ///
    /// Call on a canonical tree to get the canonical string.
    pub fn to_newick(&self) -> String {
        let rooted = self.rooted();
        let mut out = String::new();
        // (node, next child index)
        let mut stack: Vec<(usize, usize)> = vec![(rooted.root, 0)];
        while let Some((u, k)) = stack.pop() {
            let kids = &rooted.children[u];
            if k == 0 && !kids.is_empty() {
                out.push('(');
            }
            if k < kids.len() {
                if k > 0 {
                    out.push(',');
                }
                stack.push((u, k + 1));
                stack.push((kids[k], 0));
                continue;
            }
            if !kids.is_empty() {
                out.push(')');
            }
            if let Some(l) = self.labels[u] {
                write!(out, "{l}").expect("write to string");
            }
            if u != rooted.root {
                let w = &self.edges[rooted.parent_edge[u]].weight;
                write!(out, ":{}", format_significant(w.to_f64_lossy(), 12)).expect("write to string");
            }
        }
        out.push(';');
        out
    }
}

#[derive(Debug)]
struct Pending {
    label: Option<String>,
    length: Option<String>,
    parent: Option<usize>,
    children: usize,
}

/// Parses Newick text with integer leaf labels `1..=n`.
///
/// Internal node labels (e.g. support values) are ignored, `[...]` comments
/// are skipped and a missing branch length counts as zero. A root of degree
/// 2 is kept as an ordinary degree-2 node; call `canonicalize` to drop it.
pub fn parse_newick<T: Scalar>(text: &str) -> Result<WeightedTree<T>> {
    let bytes = text.as_bytes();
    let mut nodes: Vec<Pending> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let mut current: Option<usize> = None;
    let mut expect_node = true;
    let mut finished = false;
    let mut line = 1;
    let mut i = 0;

    let new_node = |nodes: &mut Vec<Pending>, parent: Option<usize>| {
        nodes.push(Pending {
            label: None,
            length: None,
            parent,
            children: 0,
        });
        let id = nodes.len() - 1;
        if let Some(p) = parent {
            nodes[p].children += 1;
        }
        id
    };

    while i < bytes.len() {
        let c = bytes[i];
        if finished {
            if !c.is_ascii_whitespace() {
                return Err(parse_err(line, "text after ';'"));
            }
            if c == b'\n' {
                line += 1;
            }
            i += 1;
            continue;
        }
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'[' => {
                let end = text[i..]
                    .find(']')
                    .ok_or_else(|| parse_err(line, "unterminated comment"))?;
                line += text[i..i + end].matches('\n').count();
                i += end + 1;
            }
            b'(' => {
                if !expect_node {
                    return Err(parse_err(line, "unexpected '('"));
                }
                let id = new_node(&mut nodes, open.last().copied());
                open.push(id);
                current = None;
                expect_node = true;
                i += 1;
            }
            b',' | b')' => {
                if open.is_empty() {
                    return Err(parse_err(line, format!("unexpected '{}'", c as char)));
                }
                if expect_node {
                    // Empty leaf such as "(,A)".
                    new_node(&mut nodes, open.last().copied());
                }
                if c == b',' {
                    current = None;
                    expect_node = true;
                } else {
                    current = open.pop();
                    expect_node = false;
                }
                i += 1;
            }
            b':' => {
                let node = match current {
                    Some(n) => n,
                    None if expect_node => {
                        let n = new_node(&mut nodes, open.last().copied());
                        current = Some(n);
                        expect_node = false;
                        n
                    }
                    None => return Err(parse_err(line, "branch length without a node")),
                };
                let start = i + 1;
                let mut end = start;
                while end < bytes.len() && !b"(),:;[".contains(&bytes[end]) && !bytes[end].is_ascii_whitespace() {
                    end += 1;
                }
                if nodes[node].length.is_some() {
                    return Err(parse_err(line, "two branch lengths on one node"));
                }
                nodes[node].length = Some(text[start..end].to_string());
                i = end;
            }
            b';' => {
                if !open.is_empty() {
                    return Err(parse_err(line, "unbalanced parentheses"));
                }
                if nodes.is_empty() {
                    return Err(parse_err(line, "empty tree"));
                }
                finished = true;
                i += 1;
            }
            _ => {
                let (label, end) = if c == b'\'' {
                    let close = text[i + 1..]
                        .find('\'')
                        .ok_or_else(|| parse_err(line, "unterminated quoted label"))?;
                    (text[i + 1..i + 1 + close].to_string(), i + close + 2)
                } else {
                    let mut end = i;
                    while end < bytes.len()
                        && !b"(),:;[".contains(&bytes[end])
                        && !bytes[end].is_ascii_whitespace()
                    {
                        end += 1;
                    }
                    (text[i..end].to_string(), end)
                };
                let node = match current {
                    Some(n) => n,
                    None if expect_node => {
                        let n = new_node(&mut nodes, open.last().copied());
                        current = Some(n);
                        expect_node = false;
                        n
                    }
                    None => return Err(parse_err(line, "label without a node")),
                };
                if nodes[node].label.is_some() {
                    return Err(parse_err(line, "two labels on one node"));
                }
                nodes[node].label = Some(label);
                i = end;
            }
        }
    }
    if !finished {
        return Err(parse_err(line, "missing terminating ';'"));
    }

    let mut labels = Vec::with_capacity(nodes.len());
    let mut edges = Vec::with_capacity(nodes.len().saturating_sub(1));
    for (id, node) in nodes.iter().enumerate() {
        let degree = node.children + usize::from(node.parent.is_some());
        let label = if degree == 1 {
            let text = node
                .label
                .as_deref()
                .ok_or_else(|| Error::Tree(format!("leaf node {id} has no label")))?;
            Some(text.trim().parse::<usize>().map_err(|_| {
                Error::Tree(format!("leaf label {text:?} is not a positive integer"))
            })?)
        } else {
            None
        };
        labels.push(label);
        if let Some(p) = node.parent {
            let weight = match &node.length {
                Some(s) => T::parse_value(s)
                    .ok_or_else(|| Error::Tree(format!("bad branch length {s:?}")))?,
                None => T::zero(),
            };
            edges.push(Edge { u: p, v: id, weight });
        }
    }
    WeightedTree::new(labels, edges)
}
