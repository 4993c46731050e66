//! Augmentation flow networks.
//!
//! A graph is a tree of [`AugNode`]s. Leaves name a catalog operation and the
//! distributions of its parameters; inner nodes either run their children in
//! order (cascade) or pick one child at random (choice). Each node carries a
//! seed and nothing else that varies between instances, so a node together
//! with the raster size fully determines the path taken and every sampled
//! value.
//!
//! Randomness is keyed as follows. The root key hashes `(seed, width,
//! height)`; a child key hashes `(child seed, parent key, child index)`. A
//! leaf samples each parameter from its own stream (keyed by the parameter
//! name) and feeds the op a separate stream for pixel noise and plasmas; a
//! choice draws its branch from a dedicated stream.

mod dist;
mod serial;

pub use dist::DistSpec;
pub use serial::{deserialize, serialize};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{
    compose_fields, remap_bilinear, remap_mask, threshold_validity, transform_points, MaskF,
    SampleBundle, SamplingField,
};
use crate::ops::{self, OpKind};
use crate::rng::{derive, hash_bytes, RandSource};

/// Stream id for branch draws.
pub const CHOICE_STREAM: u64 = 0x8000_0000_0000_0001;
/// Stream id handed to an op for pixel noise and plasmas.
pub const OP_STREAM: u64 = 0x8000_0000_0000_0002;

#[derive(Debug, Clone, PartialEq)]
pub struct AugNode {
    pub seed: u64,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Leaf {
        op: String,
        params: BTreeMap<String, DistSpec>,
    },
    Cascade(Vec<AugNode>),
    /// `weights[i]` is the probability of `children[i]` up to normalization.
    Choice {
        children: Vec<AugNode>,
        weights: Vec<f64>,
    },
    Identity,
}

impl AugNode {
    pub fn leaf(op: &str, params: BTreeMap<String, DistSpec>, seed: u64) -> Self {
        AugNode {
            seed,
            kind: NodeKind::Leaf {
                op: op.to_string(),
                params,
            },
        }
    }

    /// Leaf with every parameter at its catalog default.
    pub fn leaf_default(op: &str, seed: u64) -> Result<Self> {
        let desc = ops::descriptor(op)
            .ok_or_else(|| Error::config("/op", format!("unknown operation '{op}'")))?;
        let params = desc
            .params
            .iter()
            .map(|p| (p.name.to_string(), p.default.clone()))
            .collect();
        Ok(Self::leaf(op, params, seed))
    }

    pub fn cascade(children: Vec<AugNode>, seed: u64) -> Self {
        AugNode {
            seed,
            kind: NodeKind::Cascade(children),
        }
    }

    /// Choice with uniform weights.
    pub fn choice(children: Vec<AugNode>, seed: u64) -> Self {
        let weights = vec![1.0 / children.len().max(1) as f64; children.len()];
        Self::weighted_choice(children, weights, seed)
    }

    pub fn weighted_choice(children: Vec<AugNode>, weights: Vec<f64>, seed: u64) -> Self {
        AugNode {
            seed,
            kind: NodeKind::Choice { children, weights },
        }
    }

    pub fn identity(seed: u64) -> Self {
        AugNode {
            seed,
            kind: NodeKind::Identity,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + match &self.kind {
            NodeKind::Cascade(c) | NodeKind::Choice { children: c, .. } => {
                c.iter().map(AugNode::node_count).sum()
            }
            _ => 0,
        }
    }

    /// Structural validation against the op catalog. Parameters must be
    /// complete; errors carry a JSON-pointer-style location.
    pub fn validate(&self) -> Result<()> {
        self.validate_at("")
    }

    fn validate_at(&self, at: &str) -> Result<()> {
        match &self.kind {
            NodeKind::Leaf { op, params } => {
                let desc = ops::descriptor(op).ok_or_else(|| {
                    Error::config(format!("{at}/op"), format!("unknown operation '{op}'"))
                })?;
                let full = desc.complete_params(params).map_err(|(name, e)| {
                    Error::config(format!("{at}/params/{name}"), e.to_string())
                })?;
                if let Some(missing) = full.keys().find(|k| !params.contains_key(*k)) {
                    return Err(Error::config(
                        format!("{at}/params"),
                        format!("missing parameter '{missing}'"),
                    ));
                }
                Ok(())
            }
            NodeKind::Cascade(children) => children
                .iter()
                .enumerate()
                .try_for_each(|(i, c)| c.validate_at(&format!("{at}/children/{i}"))),
            NodeKind::Choice { children, weights } => {
                if children.is_empty() {
                    return Err(Error::config(
                        format!("{at}/children"),
                        "a choice needs at least one branch",
                    ));
                }
                if weights.len() != children.len() {
                    return Err(Error::config(
                        format!("{at}/weights"),
                        format!(
                            "{} weights for {} branches",
                            weights.len(),
                            children.len()
                        ),
                    ));
                }
                dist::validate_weights(weights)
                    .map_err(|m| Error::config(format!("{at}/weights"), m))?;
                children
                    .iter()
                    .enumerate()
                    .try_for_each(|(i, c)| c.validate_at(&format!("{at}/children/{i}")))
            }
            NodeKind::Identity => Ok(()),
        }
    }
}

/// The concrete outcome of sampling a graph for one raster size.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AppliedParams {
    Leaf {
        op: String,
        values: BTreeMap<String, f64>,
        #[serde(skip)]
        key: u64,
    },
    Cascade {
        children: Vec<AppliedParams>,
    },
    Choice {
        branch: usize,
        chosen: Box<AppliedParams>,
    },
    Identity,
}

impl AppliedParams {
    /// Leaves in execution order as `(op, values, key)`.
    pub fn leaves(&self) -> Vec<(&str, &BTreeMap<String, f64>, u64)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, &'a BTreeMap<String, f64>, u64)>) {
        match self {
            AppliedParams::Leaf { op, values, key } => out.push((op, values, *key)),
            AppliedParams::Cascade { children } => {
                children.iter().for_each(|c| c.collect_leaves(out))
            }
            AppliedParams::Choice { chosen, .. } => chosen.collect_leaves(out),
            AppliedParams::Identity => {}
        }
    }

    /// Branch indices taken at each choice, in depth-first order.
    pub fn branch_path(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_branches(&mut out);
        out
    }

    fn collect_branches(&self, out: &mut Vec<usize>) {
        match self {
            AppliedParams::Cascade { children } => {
                children.iter().for_each(|c| c.collect_branches(out))
            }
            AppliedParams::Choice { branch, chosen } => {
                out.push(*branch);
                chosen.collect_branches(out);
            }
            _ => {}
        }
    }
}

/// Samples the path and every parameter for a raster of the given size.
pub fn sample_params(node: &AugNode, width: usize, height: usize) -> Result<AppliedParams> {
    node.validate()?;
    let key = derive(&[node.seed, width as u64, height as u64]);
    Ok(sample_keyed(node, key))
}

fn sample_keyed(node: &AugNode, key: u64) -> AppliedParams {
    let child_key = |c: &AugNode, i: usize| derive(&[c.seed, key, i as u64]);
    match &node.kind {
        NodeKind::Leaf { op, params } => {
            let values = params
                .iter()
                .map(|(name, d)| {
                    let mut rng = RandSource::new(key, hash_bytes(name.as_bytes()));
                    (name.clone(), d.sample(&mut rng))
                })
                .collect();
            AppliedParams::Leaf {
                op: op.clone(),
                values,
                key,
            }
        }
        NodeKind::Cascade(children) => AppliedParams::Cascade {
            children: children
                .iter()
                .enumerate()
                .map(|(i, c)| sample_keyed(c, child_key(c, i)))
                .collect(),
        },
        NodeKind::Choice { children, weights } => {
            let mut rng = RandSource::new(key, CHOICE_STREAM);
            let branch = dist::categorical(weights, &mut rng);
            let c = &children[branch];
            AppliedParams::Choice {
                branch,
                chosen: Box::new(sample_keyed(c, child_key(c, branch))),
            }
        }
        NodeKind::Identity => AppliedParams::Identity,
    }
}

/// Applies a graph to a bundle. See [`apply_with_params`].
pub fn apply(node: &AugNode, bundle: &SampleBundle) -> Result<SampleBundle> {
    apply_with_params(node, bundle).map(|(b, _)| b)
}

/// Applies a graph and also returns what was sampled.
///
/// Consecutive ventral leaves are fused into one sampling field and resampled
/// once; a dorsal leaf first materializes any pending geometry. The output
/// always carries a validity mask reflecting every geometric step.
pub fn apply_with_params(
    node: &AugNode,
    bundle: &SampleBundle,
) -> Result<(SampleBundle, AppliedParams)> {
    bundle.check_sizes()?;
    let (w, h) = (bundle.width(), bundle.height());
    let plan = sample_params(node, w, h)?;

    let mut out = bundle.clone();
    let mut pending: Option<SamplingField> = None;
    for (op, values, key) in plan.leaves() {
        let desc = ops::descriptor(op).expect("validated above");
        let mut rng = RandSource::new(key, OP_STREAM);
        match desc.kind {
            OpKind::Ventral => {
                let f = ops::run_ventral(op, values, w, h, &mut rng)?;
                pending = Some(match pending.take() {
                    None => f,
                    Some(acc) => compose_fields(&f, &acc)?,
                });
            }
            OpKind::Dorsal => {
                if let Some(f) = pending.take() {
                    materialize(&mut out, &f);
                }
                out.image = ops::run_dorsal(op, values, &out.image, &mut rng)?;
            }
        }
    }
    if let Some(f) = pending.take() {
        materialize(&mut out, &f);
    }
    if out.validity.is_none() {
        out.validity = Some(MaskF::ones(w, h));
    }
    Ok((out, plan))
}

fn materialize(b: &mut SampleBundle, f: &SamplingField) {
    b.image = remap_bilinear(&b.image, f, 0.0);
    if let Some(m) = &b.mask {
        b.mask = Some(remap_mask(m, f, 0.0));
    }
    if let Some(p) = &b.points {
        b.points = Some(transform_points(p, f));
    }
    let prior = b
        .validity
        .take()
        .unwrap_or_else(|| MaskF::ones(b.image.width(), b.image.height()));
    b.validity = Some(threshold_validity(&remap_mask(&prior, f, 0.0)));
}
