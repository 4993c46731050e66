//! Canonical JSON form of [`AugNode`] graphs.
//!
//! Keys appear in a fixed order (`kind`, `op`, `params`, `weights`, `seed`,
//! `children`) and parameter maps are sorted, so equal graphs always produce
//! identical text. Seeds are mandatory.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AugNode, DistSpec, NodeKind};
use crate::error::{Error, Result};
use crate::ops;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Leaf,
    Cascade,
    Choice,
    Identity,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRepr {
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    op: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<BTreeMap<String, DistSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<NodeRepr>>,
}

impl From<&AugNode> for NodeRepr {
    fn from(n: &AugNode) -> Self {
        let mut r = NodeRepr {
            kind: KindTag::Identity,
            op: None,
            params: None,
            weights: None,
            seed: n.seed,
            children: None,
        };
        match &n.kind {
            NodeKind::Leaf { op, params } => {
                r.kind = KindTag::Leaf;
                r.op = Some(op.clone());
                r.params = Some(params.clone());
            }
            NodeKind::Cascade(children) => {
                r.kind = KindTag::Cascade;
                r.children = Some(children.iter().map(NodeRepr::from).collect());
            }
            NodeKind::Choice { children, weights } => {
                r.kind = KindTag::Choice;
                r.weights = Some(weights.clone());
                r.children = Some(children.iter().map(NodeRepr::from).collect());
            }
            NodeKind::Identity => {}
        }
        r
    }
}

fn unexpected(at: &str, field: &str, kind: &str) -> Error {
    Error::config(format!("{at}/{field}"), format!("'{field}' is not allowed on a {kind} node"))
}

fn missing(at: &str, field: &str, kind: &str) -> Error {
    Error::config(at.to_string(), format!("a {kind} node requires '{field}'"))
}

impl NodeRepr {
    fn into_node(self, at: &str) -> Result<AugNode> {
        let kind_name = format!("{:?}", self.kind).to_lowercase();
        let children = |list: Option<Vec<NodeRepr>>| -> Result<Vec<AugNode>> {
            list.ok_or_else(|| missing(at, "children", &kind_name))?
                .into_iter()
                .enumerate()
                .map(|(i, c)| c.into_node(&format!("{at}/children/{i}")))
                .collect()
        };
        let kind = match self.kind {
            KindTag::Leaf => {
                if self.weights.is_some() {
                    return Err(unexpected(at, "weights", &kind_name));
                }
                if self.children.is_some() {
                    return Err(unexpected(at, "children", &kind_name));
                }
                let op = self.op.ok_or_else(|| missing(at, "op", &kind_name))?;
                let desc = ops::descriptor(&op).ok_or_else(|| {
                    Error::config(format!("{at}/op"), format!("unknown operation '{op}'"))
                })?;
                let params = desc
                    .complete_params(&self.params.unwrap_or_default())
                    .map_err(|(name, e)| Error::config(format!("{at}/params/{name}"), e.to_string()))?;
                NodeKind::Leaf { op, params }
            }
            KindTag::Cascade => {
                if self.op.is_some() {
                    return Err(unexpected(at, "op", &kind_name));
                }
                if self.params.is_some() {
                    return Err(unexpected(at, "params", &kind_name));
                }
                if self.weights.is_some() {
                    return Err(unexpected(at, "weights", &kind_name));
                }
                NodeKind::Cascade(children(self.children)?)
            }
            KindTag::Choice => {
                if self.op.is_some() {
                    return Err(unexpected(at, "op", &kind_name));
                }
                if self.params.is_some() {
                    return Err(unexpected(at, "params", &kind_name));
                }
                let children = children(self.children)?;
                let weights = self
                    .weights
                    .unwrap_or_else(|| vec![1.0 / children.len().max(1) as f64; children.len()]);
                NodeKind::Choice { children, weights }
            }
            KindTag::Identity => {
                for (present, field) in [
                    (self.op.is_some(), "op"),
                    (self.params.is_some(), "params"),
                    (self.weights.is_some(), "weights"),
                    (self.children.is_some(), "children"),
                ] {
                    if present {
                        return Err(unexpected(at, field, &kind_name));
                    }
                }
                NodeKind::Identity
            }
        };
        let node = AugNode {
            seed: self.seed,
            kind,
        };
        node.validate_at(at)?;
        Ok(node)
    }
}

/// Canonical, pretty-printed JSON for a graph.
pub fn serialize(node: &AugNode) -> String {
    serde_json::to_string_pretty(&NodeRepr::from(node)).expect("graph serializes")
}

/// Parses and validates a graph document. Omitted leaf parameters take
/// their catalog defaults; omitted choice weights are uniform.
pub fn deserialize(text: &str) -> Result<AugNode> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let repr: NodeRepr = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        Error::config(pointer, e.into_inner().to_string())
    })?;
    repr.into_node("")
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    out
}
