use serde::{Deserialize, Serialize};

use super::{Edge, WeightedTree};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Machine-readable tree: node list plus weighted edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeJson {
    pub leaf_count: usize,
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    pub label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    /// Lossless weight text (`p/q` in rational mode); preferred when reading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl<T: Scalar> WeightedTree<T> {
    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            leaf_count: self.leaf_count(),
            nodes: self
                .labels
                .iter()
                .enumerate()
                .map(|(id, &label)| NodeJson { id, label })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    u: e.u,
                    v: e.v,
                    weight: e.weight.to_f64_lossy(),
                    exact: Some(e.weight.exact_text()),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &TreeJson) -> Result<Self> {
        let mut labels = vec![None; json.nodes.len()];
        for node in &json.nodes {
            let slot = labels
                .get_mut(node.id)
                .ok_or_else(|| Error::Tree(format!("node id {} out of range", node.id)))?;
            *slot = node.label;
        }
        let edges = json
            .edges
            .iter()
            .map(|e| {
                let weight = match &e.exact {
                    Some(text) => T::parse_value(text)
                        .ok_or_else(|| Error::Tree(format!("bad weight {text:?}")))?,
                    None => T::from_f64(e.weight)
                        .ok_or_else(|| Error::Tree(format!("bad weight {}", e.weight)))?,
                };
                Ok(Edge { u: e.u, v: e.v, weight })
            })
            .collect::<Result<Vec<_>>>()?;
        let tree = WeightedTree::new(labels, edges)?;
        if tree.leaf_count() != json.leaf_count {
            return Err(Error::Tree(format!(
                "leaf_count says {}, tree has {}",
                json.leaf_count,
                tree.leaf_count()
            )));
        }
        Ok(tree)
    }
}
