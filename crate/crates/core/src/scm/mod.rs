//! Linear/threshold structural causal models.
//!
//! A model is an ordered list of nodes, each one of
//!
//! - `latent-normal`: exogenous `N(mean, variance)`;
//! - `threshold-binary`: `1(Φ(Σ coef·parent) > threshold)`, no own noise;
//! - `linear-gaussian`: `intercept + Σ coef·parent + N(0, variance)`.
//!
//! The node order must be topological. Models load from and save to TOML;
//! see `specs/paper_dgp.toml` in the repository for the schema.

mod simulate;
mod truth;

pub use simulate::{simulate, CHUNK_SIZE, RNG_ALGORITHM};
pub use truth::{true_estimand, truth_with, TruthOptions};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// One incoming edge with its structural coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentCoef {
    pub node: String,
    pub coef: f64,
}

impl ParentCoef {
    pub fn new(node: &str, coef: f64) -> Self {
        Self {
            node: node.to_string(),
            coef,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NodeKind {
    LatentNormal {
        mean: f64,
        variance: f64,
    },
    ThresholdBinary {
        parents: Vec<ParentCoef>,
        threshold: f64,
    },
    LinearGaussian {
        intercept: f64,
        parents: Vec<ParentCoef>,
        variance: f64,
    },
}

impl NodeKind {
    pub fn parents(&self) -> &[ParentCoef] {
        match self {
            NodeKind::LatentNormal { .. } => &[],
            NodeKind::ThresholdBinary { parents, .. }
            | NodeKind::LinearGaussian { parents, .. } => parents,
        }
    }

    fn parents_mut(&mut self) -> Option<&mut Vec<ParentCoef>> {
        match self {
            NodeKind::LatentNormal { .. } => None,
            NodeKind::ThresholdBinary { parents, .. }
            | NodeKind::LinearGaussian { parents, .. } => Some(parents),
        }
    }

    /// Whether the node consumes a standard-normal draw per unit.
    pub fn has_noise(&self) -> bool {
        !matches!(self, NodeKind::ThresholdBinary { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: NodeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EstimandKind {
    Ace,
    Nde,
    Nie,
    Total,
    Late,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimandQuery {
    pub kind: EstimandKind,
    pub treatment: String,
    pub outcome: String,
    /// Required for NDE/NIE.
    pub mediator: Option<String>,
    /// Required for LATE.
    pub instrument: Option<String>,
    pub baseline: f64,
    pub active: f64,
}

impl EstimandQuery {
    pub fn new(kind: EstimandKind, treatment: &str, outcome: &str) -> Self {
        Self {
            kind,
            treatment: treatment.to_string(),
            outcome: outcome.to_string(),
            mediator: None,
            instrument: None,
            baseline: 0.0,
            active: 1.0,
        }
    }

    pub fn with_mediator(mut self, mediator: &str) -> Self {
        self.mediator = Some(mediator.to_string());
        self
    }

    pub fn with_instrument(mut self, instrument: &str) -> Self {
        self.instrument = Some(instrument.to_string());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthMethod {
    PathTrace,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthResult {
    pub value: f64,
    /// Zero for path tracing.
    pub mc_std_error: f64,
    pub method: TruthMethod,
}

/// A validated model. Construct with [`ScmSpec::new`] or [`ScmSpec::from_toml`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct ScmSpec {
    nodes: Vec<NodeDef>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    nodes: Vec<NodeDef>,
}

impl TryFrom<SpecFile> for ScmSpec {
    type Error = Error;
    fn try_from(f: SpecFile) -> Result<Self> {
        ScmSpec::new(f.nodes)
    }
}

impl From<ScmSpec> for SpecFile {
    fn from(s: ScmSpec) -> Self {
        SpecFile { nodes: s.nodes }
    }
}

fn invalid(node: &str, reason: impl Into<String>) -> Error {
    Error::InvalidSpec {
        node: node.to_string(),
        reason: reason.into(),
    }
}

impl ScmSpec {
    pub fn new(nodes: Vec<NodeDef>) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if node.name.trim().is_empty() {
                return Err(invalid(&node.name, "empty name"));
            }
            match &node.kind {
                NodeKind::LatentNormal { mean, variance } => {
                    if !mean.is_finite() {
                        return Err(invalid(&node.name, "mean must be finite"));
                    }
                    if !(variance.is_finite() && *variance > 0.0) {
                        return Err(invalid(&node.name, "variance must be finite and > 0"));
                    }
                }
                NodeKind::ThresholdBinary { threshold, .. } => {
                    if !(*threshold > 0.0 && *threshold < 1.0) {
                        return Err(invalid(&node.name, "threshold must lie in (0, 1)"));
                    }
                }
                NodeKind::LinearGaussian {
                    intercept,
                    variance,
                    ..
                } => {
                    if !intercept.is_finite() {
                        return Err(invalid(&node.name, "intercept must be finite"));
                    }
                    if !(variance.is_finite() && *variance > 0.0) {
                        return Err(invalid(&node.name, "variance must be finite and > 0"));
                    }
                }
            }
            let mut seen = Vec::new();
            for p in node.kind.parents() {
                if !p.coef.is_finite() {
                    return Err(invalid(
                        &node.name,
                        format!("coefficient on `{}` not finite", p.node),
                    ));
                }
                if seen.contains(&&p.node) {
                    return Err(invalid(
                        &node.name,
                        format!("duplicate parent `{}`", p.node),
                    ));
                }
                seen.push(&p.node);
                if !index.contains_key(&p.node) {
                    let reason = if p.node == node.name || nodes.iter().any(|n| n.name == p.node) {
                        format!(
                            "parent `{}` does not precede it (cycle or bad order)",
                            p.node
                        )
                    } else {
                        format!("unknown parent `{}`", p.node)
                    };
                    return Err(invalid(&node.name, reason));
                }
            }
            if index.insert(node.name.clone(), i).is_some() {
                return Err(invalid(&node.name, "duplicate node name"));
            }
        }
        Ok(Self { nodes, index })
    }

    pub fn nodes(&self) -> &[NodeDef] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn node(&self, name: &str) -> Result<&NodeDef> {
        Ok(&self.nodes[self.index_of(name)?])
    }

    /// Coefficient of the edge `parent -> child`, if present.
    pub fn edge_coef(&self, parent: &str, child: &str) -> Result<Option<f64>> {
        Ok(self
            .node(child)?
            .kind
            .parents()
            .iter()
            .find(|p| p.node == parent)
            .map(|p| p.coef))
    }

    /// Returns a copy with the `parent -> child` coefficient set (0 removes the edge).
    pub fn with_edge(&self, parent: &str, child: &str, coef: f64) -> Result<Self> {
        self.index_of(parent)?;
        let mut nodes = self.nodes.clone();
        let ci = self.index_of(child)?;
        let parents = nodes[ci]
            .kind
            .parents_mut()
            .ok_or_else(|| invalid(child, "latent nodes have no parents"))?;
        parents.retain(|p| p.node != parent);
        if coef != 0.0 {
            parents.push(ParentCoef::new(parent, coef));
        }
        Self::new(nodes)
    }

    pub(crate) fn parent_indices(&self) -> Vec<Vec<(usize, f64)>> {
        self.nodes
            .iter()
            .map(|n| {
                n.kind
                    .parents()
                    .iter()
                    .map(|p| (self.index[&p.node], p.coef))
                    .collect()
            })
            .collect()
    }

    pub(crate) fn children(&self) -> Vec<Vec<(usize, f64)>> {
        let mut children = vec![Vec::new(); self.nodes.len()];
        for (child, parents) in self.parent_indices().into_iter().enumerate() {
            for (p, c) in parents {
                children[p].push((child, c));
            }
        }
        children
    }

    /// All directed paths `from -> ... -> to`, each as node indices with the edge coefficients.
    pub(crate) fn directed_paths(&self, from: usize, to: usize) -> Vec<(Vec<usize>, f64)> {
        fn walk(
            children: &[Vec<(usize, f64)>],
            at: usize,
            to: usize,
            path: &mut Vec<usize>,
            product: f64,
            out: &mut Vec<(Vec<usize>, f64)>,
        ) {
            if at == to {
                out.push((path.clone(), product));
                return;
            }
            for &(c, coef) in &children[at] {
                path.push(c);
                walk(children, c, to, path, product * coef, out);
                path.pop();
            }
        }
        let children = self.children();
        let mut out = Vec::new();
        if from != to {
            walk(&children, from, to, &mut vec![from], 1.0, &mut out);
        }
        out
    }

    /// Whether `anc` has a directed path to `desc` (or is it).
    pub(crate) fn reaches(&self, anc: usize, desc: usize, blocked: Option<usize>) -> bool {
        let children = self.children();
        let mut stack = vec![anc];
        let mut seen = vec![false; self.nodes.len()];
        while let Some(v) = stack.pop() {
            if v == desc {
                return true;
            }
            if seen[v] || Some(v) == blocked {
                continue;
            }
            seen[v] = true;
            stack.extend(children[v].iter().map(|&(c, _)| c));
        }
        false
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model serializes")
    }

    /// Evaluate one unit. `noise[i]` is a standard-normal draw for node `i`
    /// (ignored for threshold nodes); `overrides[i]` fixes node `i` (do-operator).
    pub(crate) fn evaluate(
        &self,
        parents: &[Vec<(usize, f64)>],
        noise: &[f64],
        overrides: &[Option<f64>],
        out: &mut [f64],
    ) {
        for (i, node) in self.nodes.iter().enumerate() {
            if let Some(v) = overrides[i] {
                out[i] = v;
                continue;
            }
            let linear = |out: &[f64]| parents[i].iter().map(|&(p, c)| c * out[p]).sum::<f64>();
            out[i] = match &node.kind {
                NodeKind::LatentNormal { mean, variance } => mean + variance.sqrt() * noise[i],
                NodeKind::ThresholdBinary { threshold, .. } => {
                    threshold_indicator(linear(out), *threshold)
                }
                NodeKind::LinearGaussian {
                    intercept,
                    variance,
                    ..
                } => intercept + linear(out) + variance.sqrt() * noise[i],
            };
        }
    }
}

/// `1(Φ(index) > q)`.
pub fn threshold_indicator(index: f64, q: f64) -> f64 {
    if crate::normal::cdf(index) > q {
        1.0
    } else {
        0.0
    }
}

/// Sum over directed paths of the products of edge coefficients.
///
/// Every node after the treatment on any such path (the outcome included)
/// must be linear-gaussian; otherwise the effect is not a path product.
pub fn path_trace_effect(spec: &ScmSpec, treatment: &str, outcome: &str) -> Result<f64> {
    let t = spec.index_of(treatment)?;
    let y = spec.index_of(outcome)?;
    path_sum(spec, t, y, |_| true)
}

pub(crate) fn path_sum(
    spec: &ScmSpec,
    from: usize,
    to: usize,
    keep: impl Fn(&[usize]) -> bool,
) -> Result<f64> {
    let mut total = 0.0;
    for (path, product) in spec.directed_paths(from, to) {
        for &v in &path[1..] {
            if !matches!(spec.nodes[v].kind, NodeKind::LinearGaussian { .. }) {
                return Err(Error::NonlinearPath {
                    node: spec.nodes[v].name.clone(),
                });
            }
        }
        if keep(&path) {
            total += product;
        }
    }
    Ok(total)
}

/// The data-generating model of the three-setting simulation study:
///
/// ```text
/// U_IY, U_AY, U_MY ~ N(0, 1)
/// I := 1(Φ(U_IY) > 0.6)
/// A := 1(Φ(I + U_AY) > 0.7)
/// M ~ N(-1.5 A + 1.5 U_MY, 1)
/// Y ~ N(3 A + 2 M + 1.5 U_IY + U_AY - 1.5 U_MY, 1)
/// ```
pub fn build_paper_dgp() -> ScmSpec {
    let latent = |name: &str| NodeDef {
        name: name.into(),
        kind: NodeKind::LatentNormal {
            mean: 0.0,
            variance: 1.0,
        },
    };
    let p = ParentCoef::new;
    ScmSpec::new(vec![
        latent("U_IY"),
        latent("U_AY"),
        latent("U_MY"),
        NodeDef {
            name: "I".into(),
            kind: NodeKind::ThresholdBinary {
                parents: vec![p("U_IY", 1.0)],
                threshold: 0.6,
            },
        },
        NodeDef {
            name: "A".into(),
            kind: NodeKind::ThresholdBinary {
                parents: vec![p("I", 1.0), p("U_AY", 1.0)],
                threshold: 0.7,
            },
        },
        NodeDef {
            name: "M".into(),
            kind: NodeKind::LinearGaussian {
                intercept: 0.0,
                parents: vec![p("A", -1.5), p("U_MY", 1.5)],
                variance: 1.0,
            },
        },
        NodeDef {
            name: "Y".into(),
            kind: NodeKind::LinearGaussian {
                intercept: 0.0,
                parents: vec![
                    p("A", 3.0),
                    p("M", 2.0),
                    p("U_IY", 1.5),
                    p("U_AY", 1.0),
                    p("U_MY", -1.5),
                ],
                variance: 1.0,
            },
        },
    ])
    .expect("paper model is valid")
}
