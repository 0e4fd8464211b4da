//! Reconciliations of a parasite tree onto a host tree: validation, event
//! classification, loss expansion, time-consistency and cost scoring.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{NodeId, PhyloTree};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ReconError {
    #[error("unknown parasite node `{0}`")]
    UnknownParasite(String),
    #[error("unknown host node `{0}`")]
    UnknownHost(String),
    #[error("parasite leaf `{0}` has no leaf-map entry")]
    MissingPhi(String),
    #[error("leaf map sends `{parasite}` to `{host}`, which is not a host leaf")]
    PhiNotLeaf { parasite: String, host: String },
    #[error("leaf map entry for `{0}`, which is not a parasite leaf")]
    PhiOnInternal(String),
    #[error("mapping has no entry for parasite node `{0}`")]
    MissingGamma(String),
    #[error("parasite node `{0}` is listed twice")]
    DuplicateEntry(String),
    #[error("arc `{parent}` -> `{child}` is not an arc of the parasite tree")]
    UnknownArc { parent: String, child: String },
    #[error("parasite node `{0}` matches no event rule")]
    Unclassifiable(String),
    #[error("parasite node `{0}` is the source of two host-switch arcs")]
    DoubleSwitch(String),
    #[error("reconciliation is invalid: {0}")]
    Invalid(ValidationReport),
}

/// One violated reconciliation condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Violation {
    /// A leaf is not mapped where the leaf map sends it.
    LeafMismatch {
        leaf: String,
        mapped: String,
        expected: String,
    },
    /// A child sits on a proper ancestor of its parent's host.
    ChildAboveParent { parent: String, child: String },
    /// Neither child of an internal node is mapped below the node's host.
    NoChildBelow { node: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LeafMismatch {
                leaf,
                mapped,
                expected,
            } => write!(
                f,
                "(i) leaf `{leaf}` mapped to `{mapped}` but the leaf map says `{expected}`"
            ),
            Violation::ChildAboveParent { parent, child } => write!(
                f,
                "(ii) child `{child}` of `{parent}` is mapped to a proper ancestor of its parent's host"
            ),
            Violation::NoChildBelow { node } => write!(
                f,
                "(iii) no child of `{node}` is mapped in the subtree of its host"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Arcs whose endpoints share a host. These are accepted, but the
    /// strict `lca(parent, child) != child` reading would reject them.
    pub same_host_arcs: Vec<(String, String)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A mapping of every parasite node onto a host node, together with the
/// leaf map it must extend.
#[derive(Clone, Debug)]
pub struct Reconciliation {
    host: Arc<PhyloTree>,
    parasite: Arc<PhyloTree>,
    phi: Vec<Option<NodeId>>,
    gamma: Vec<NodeId>,
}

impl Reconciliation {
    /// Builds a reconciliation from id-level maps. `phi` is indexed by
    /// parasite node and must be `Some` exactly on parasite leaves.
    pub fn new(
        host: Arc<PhyloTree>,
        parasite: Arc<PhyloTree>,
        phi: Vec<Option<NodeId>>,
        gamma: Vec<NodeId>,
    ) -> Result<Self, ReconError> {
        check_phi(&host, &parasite, &phi)?;
        if gamma.len() != parasite.len() {
            return Err(ReconError::MissingGamma(format!(
                "<{} entries for {} nodes>",
                gamma.len(),
                parasite.len()
            )));
        }
        if let Some(bad) = gamma.iter().find(|g| g.0 >= host.len()) {
            return Err(ReconError::UnknownHost(bad.to_string()));
        }
        Ok(Reconciliation {
            host,
            parasite,
            phi,
            gamma,
        })
    }

    /// Builds a reconciliation from label pairs. Leaves absent from `gamma`
    /// default to their leaf-map image; internal nodes must be listed.
    pub fn from_labels(
        host: Arc<PhyloTree>,
        parasite: Arc<PhyloTree>,
        phi: &[(String, String)],
        gamma: &[(String, String)],
    ) -> Result<Self, ReconError> {
        let phi = resolve_phi(&host, &parasite, phi)?;
        let mut g: Vec<Option<NodeId>> = vec![None; parasite.len()];
        for (p, h) in gamma {
            let pid = parasite
                .node(p)
                .ok_or_else(|| ReconError::UnknownParasite(p.clone()))?;
            let hid = host
                .node(h)
                .ok_or_else(|| ReconError::UnknownHost(h.clone()))?;
            if g[pid.0].replace(hid).is_some() {
                return Err(ReconError::DuplicateEntry(p.clone()));
            }
        }
        let mut gamma = Vec::with_capacity(parasite.len());
        for v in parasite.nodes() {
            match (g[v.0], phi[v.0]) {
                (Some(h), _) => gamma.push(h),
                (None, Some(h)) => gamma.push(h),
                (None, None) => {
                    return Err(ReconError::MissingGamma(parasite.label(v).to_string()))
                }
            }
        }
        Reconciliation::new(host, parasite, phi, gamma)
    }

    /// Leaves by the leaf map, each internal node at the lca of its
    /// children's hosts.
    pub fn lca_mapping(
        host: Arc<PhyloTree>,
        parasite: Arc<PhyloTree>,
        phi: Vec<Option<NodeId>>,
    ) -> Result<Self, ReconError> {
        check_phi(&host, &parasite, &phi)?;
        let mut gamma = vec![NodeId(0); parasite.len()];
        for v in parasite.postorder() {
            gamma[v.0] = match parasite.children(v) {
                None => phi[v.0].expect("checked"),
                Some([a, b]) => host.lca_unchecked(gamma[a.0], gamma[b.0]),
            };
        }
        Ok(Reconciliation {
            host,
            parasite,
            phi,
            gamma,
        })
    }

    pub fn host(&self) -> &PhyloTree {
        &self.host
    }

    pub fn parasite(&self) -> &PhyloTree {
        &self.parasite
    }

    pub fn host_arc(&self) -> &Arc<PhyloTree> {
        &self.host
    }

    pub fn parasite_arc(&self) -> &Arc<PhyloTree> {
        &self.parasite
    }

    pub fn phi(&self, leaf: NodeId) -> Option<NodeId> {
        self.phi[leaf.0]
    }

    pub fn phi_vec(&self) -> &[Option<NodeId>] {
        &self.phi
    }

    #[inline]
    pub fn gamma(&self, p: NodeId) -> NodeId {
        self.gamma[p.0]
    }

    pub fn gamma_vec(&self) -> &[NodeId] {
        &self.gamma
    }

    /// Same trees and leaf map, different mapping.
    pub fn with_gamma(&self, gamma: Vec<NodeId>) -> Result<Self, ReconError> {
        Reconciliation::new(
            self.host.clone(),
            self.parasite.clone(),
            self.phi.clone(),
            gamma,
        )
    }

    /// Mapping as sorted `(parasite, host)` label pairs.
    pub fn gamma_labels(&self) -> Vec<(String, String)> {
        let mut out: Vec<_> = self
            .parasite
            .nodes()
            .map(|p| {
                (
                    self.parasite.label(p).to_string(),
                    self.host.label(self.gamma(p)).to_string(),
                )
            })
            .collect();
        out.sort();
        out
    }

    /// `(p, c)` is a host switch when `gamma(c)` is outside the subtree of `gamma(p)`.
    #[inline]
    pub fn is_switch(&self, parent: NodeId, child: NodeId) -> bool {
        !self
            .host
            .is_ancestor_or_self(self.gamma(parent), self.gamma(child))
    }

    pub fn switch_arcs(&self) -> Vec<(NodeId, NodeId)> {
        self.parasite
            .arcs()
            .filter(|&(p, c)| self.is_switch(p, c))
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let h = &*self.host;
        let p = &*self.parasite;
        let mut report = ValidationReport::default();
        for v in p.preorder().iter().copied() {
            if let Some(expected) = self.phi[v.0] {
                if self.gamma(v) != expected {
                    report.violations.push(Violation::LeafMismatch {
                        leaf: p.label(v).into(),
                        mapped: h.label(self.gamma(v)).into(),
                        expected: h.label(expected).into(),
                    });
                }
            }
        }
        for (a, b) in p.arcs() {
            let (ga, gb) = (self.gamma(a), self.gamma(b));
            if h.is_proper_ancestor_unchecked(gb, ga) {
                report.violations.push(Violation::ChildAboveParent {
                    parent: p.label(a).into(),
                    child: p.label(b).into(),
                });
            } else if ga == gb {
                report
                    .same_host_arcs
                    .push((p.label(a).into(), p.label(b).into()));
            }
        }
        for v in p.preorder().iter().copied() {
            if let Some([c1, c2]) = p.children(v) {
                let g = self.gamma(v);
                if !h.is_ancestor_or_self(g, self.gamma(c1))
                    && !h.is_ancestor_or_self(g, self.gamma(c2))
                {
                    report.violations.push(Violation::NoChildBelow {
                        node: p.label(v).into(),
                    });
                }
            }
        }
        report
    }

    pub fn ensure_valid(&self) -> Result<(), ReconError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(ReconError::Invalid(report))
        }
    }

    /// Losses along a parasite arc: host path length minus one, zero for
    /// host switches and for arcs that stay on one host.
    pub fn count_losses(&self, parent: NodeId, child: NodeId) -> Result<u32, ReconError> {
        if self.parasite.parent(child) != Some(parent) {
            return Err(ReconError::UnknownArc {
                parent: label_or_id(&self.parasite, parent),
                child: label_or_id(&self.parasite, child),
            });
        }
        Ok(self.losses_unchecked(parent, child))
    }

    pub(crate) fn losses_unchecked(&self, parent: NodeId, child: NodeId) -> u32 {
        if self.is_switch(parent, child) {
            return 0;
        }
        let h = &self.host;
        let len = h.depth(self.gamma(child)) - h.depth(self.gamma(parent));
        len.saturating_sub(1)
    }

    pub fn classify_events(&self) -> Result<EventReport, ReconError> {
        let h = &*self.host;
        let p = &*self.parasite;
        let mut events = BTreeMap::new();
        let mut switch_arcs = Vec::new();
        for v in p.preorder().iter().copied() {
            let Some([c1, c2]) = p.children(v) else {
                continue;
            };
            let s1 = self.is_switch(v, c1);
            let s2 = self.is_switch(v, c2);
            if s1 && s2 {
                return Err(ReconError::DoubleSwitch(p.label(v).into()));
            }
            let kind = if s1 || s2 {
                switch_arcs.push((v, if s1 { c1 } else { c2 }));
                EventKind::HostSwitch
            } else {
                let (g1, g2) = (self.gamma(c1), self.gamma(c2));
                let l = h.lca_unchecked(g1, g2);
                if l != g1 && l != g2 && l == self.gamma(v) {
                    EventKind::CoSpeciation
                } else if l == g1 || l == g2 {
                    EventKind::Duplication
                } else {
                    return Err(ReconError::Unclassifiable(p.label(v).into()));
                }
            };
            events.insert(v, kind);
        }
        let losses = p
            .arcs()
            .map(|(a, b)| ((a, b), self.losses_unchecked(a, b)))
            .collect();
        Ok(EventReport {
            events,
            losses,
            switch_arcs,
        })
    }

    /// Inserts one pass-through node per loss.
    pub fn expand_losses(&self) -> ExpandedParasite {
        ExpandedParasite::build(self)
    }

    /// Topological order of the time-constraint digraph, or `None` when the
    /// constraints are cyclic.
    pub fn check_time_consistency(&self) -> Option<TimeOrder> {
        let p = &*self.parasite;
        let items: Vec<TimeItem> = p
            .nodes()
            .map(|v| TimeItem {
                host: self.gamma(v),
                key: p.label(v).to_string(),
            })
            .collect();
        let arcs: Vec<(usize, usize)> = p.arcs().map(|(a, b)| (a.0, b.0)).collect();
        let order = time_order(&self.host, &items, &arcs)?;
        let mut rank = vec![0usize; p.len()];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i + 1;
        }
        Some(TimeOrder {
            order: order.into_iter().map(NodeId).collect(),
            rank,
        })
    }

    pub fn score(&self, costs: &CostVector) -> Result<u64, ReconError> {
        let report = self.classify_events()?;
        Ok(report.cost(costs))
    }
}

fn label_or_id(t: &PhyloTree, v: NodeId) -> String {
    if v.0 < t.len() {
        t.label(v).to_string()
    } else {
        v.to_string()
    }
}

fn check_phi(
    host: &PhyloTree,
    parasite: &PhyloTree,
    phi: &[Option<NodeId>],
) -> Result<(), ReconError> {
    if phi.len() != parasite.len() {
        return Err(ReconError::MissingPhi("<size mismatch>".into()));
    }
    for v in parasite.nodes() {
        match (parasite.is_leaf(v), phi[v.0]) {
            (true, None) => return Err(ReconError::MissingPhi(parasite.label(v).into())),
            (false, Some(_)) => return Err(ReconError::PhiOnInternal(parasite.label(v).into())),
            (true, Some(h)) => {
                if h.0 >= host.len() {
                    return Err(ReconError::UnknownHost(h.to_string()));
                }
                if !host.is_leaf(h) {
                    return Err(ReconError::PhiNotLeaf {
                        parasite: parasite.label(v).into(),
                        host: host.label(h).into(),
                    });
                }
            }
            (false, None) => {}
        }
    }
    Ok(())
}

/// Resolves a label-level leaf map into an id vector indexed by parasite node.
pub fn resolve_phi(
    host: &PhyloTree,
    parasite: &PhyloTree,
    pairs: &[(String, String)],
) -> Result<Vec<Option<NodeId>>, ReconError> {
    let mut phi = vec![None; parasite.len()];
    for (p, h) in pairs {
        let pid = parasite
            .node(p)
            .ok_or_else(|| ReconError::UnknownParasite(p.clone()))?;
        let hid = host
            .node(h)
            .ok_or_else(|| ReconError::UnknownHost(h.clone()))?;
        if !parasite.is_leaf(pid) {
            return Err(ReconError::PhiOnInternal(p.clone()));
        }
        if phi[pid.0].replace(hid).is_some() {
            return Err(ReconError::DuplicateEntry(p.clone()));
        }
    }
    check_phi(host, parasite, &phi)?;
    Ok(phi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    CoSpeciation,
    Duplication,
    HostSwitch,
}

#[derive(Clone, Debug)]
pub struct EventReport {
    /// Event label of every internal parasite node.
    pub events: BTreeMap<NodeId, EventKind>,
    /// Loss count of every parasite arc.
    pub losses: BTreeMap<(NodeId, NodeId), u32>,
    pub switch_arcs: Vec<(NodeId, NodeId)>,
}

impl EventReport {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.values().filter(|&&k| k == kind).count()
    }

    pub fn total_losses(&self) -> u64 {
        self.losses.values().map(|&l| l as u64).sum()
    }

    pub fn cost(&self, c: &CostVector) -> u64 {
        self.count(EventKind::CoSpeciation) as u64 * c.cospeciation
            + self.count(EventKind::Duplication) as u64 * c.duplication
            + self.count(EventKind::HostSwitch) as u64 * c.hostswitch
            + self.total_losses() * c.loss
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostVector {
    pub cospeciation: u64,
    pub duplication: u64,
    pub loss: u64,
    pub hostswitch: u64,
}

impl Default for CostVector {
    /// Co-speciation 0, duplication 2, loss 1, host switch 3.
    fn default() -> Self {
        CostVector {
            cospeciation: 0,
            duplication: 2,
            loss: 1,
            hostswitch: 3,
        }
    }
}

/// A linear order of parasite nodes; `rank` is 1-based and indexed by node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeOrder {
    pub order: Vec<NodeId>,
    pub rank: Vec<usize>,
}

impl TimeOrder {
    /// Checks both clauses of the time-consistency definition directly.
    pub fn is_valid_for(&self, rec: &Reconciliation) -> bool {
        let p = rec.parasite();
        let h = rec.host();
        if self.order.len() != p.len() {
            return false;
        }
        if p.arcs().any(|(a, b)| self.rank[a.0] >= self.rank[b.0]) {
            return false;
        }
        for (i, &a) in self.order.iter().enumerate() {
            for &b in &self.order[i + 1..] {
                if h.is_proper_ancestor_unchecked(rec.gamma(b), rec.gamma(a)) {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) struct TimeItem {
    pub host: NodeId,
    pub key: String,
}

/// Kahn's algorithm over the constraint digraph: `arcs` (tree arcs) plus an
/// edge `a -> b` whenever `host(a)` is a proper ancestor of `host(b)`. Ties
/// break on `key`. Returns item indices earliest first.
pub(crate) fn time_order(
    host: &PhyloTree,
    items: &[TimeItem],
    arcs: &[(usize, usize)],
) -> Option<Vec<usize>> {
    let n = items.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(a, b) in arcs {
        succ[a].push(b);
        indeg[b] += 1;
    }
    for a in 0..n {
        for b in 0..n {
            if host.is_proper_ancestor_unchecked(items[a].host, items[b].host) {
                succ[a].push(b);
                indeg[b] += 1;
            }
        }
    }
    let mut heap: BinaryHeap<Reverse<(&str, usize)>> = (0..n)
        .filter(|&i| indeg[i] == 0)
        .map(|i| Reverse((items[i].key.as_str(), i)))
        .collect();
    let mut out = Vec::with_capacity(n);
    while let Some(Reverse((_, v))) = heap.pop() {
        out.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                heap.push(Reverse((items[w].key.as_str(), w)));
            }
        }
    }
    (out.len() == n).then_some(out)
}

/// Where a node of the expanded parasite tree comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpandedOrigin {
    Original(NodeId),
    /// `index`-th loss node (1-based) on the arc `parent -> child`.
    Loss {
        parent: NodeId,
        child: NodeId,
        index: usize,
    },
}

#[derive(Clone, Debug)]
pub struct ExpandedNode {
    pub label: String,
    pub host: NodeId,
    pub origin: ExpandedOrigin,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// The parasite tree with degree-two nodes inserted for every loss.
#[derive(Clone, Debug)]
pub struct ExpandedParasite {
    pub nodes: Vec<ExpandedNode>,
    pub root: usize,
    /// Index of every original parasite node inside `nodes`.
    pub of_original: Vec<usize>,
}

impl ExpandedParasite {
    fn build(rec: &Reconciliation) -> Self {
        let p = rec.parasite();
        let h = rec.host();
        let mut nodes: Vec<ExpandedNode> = p
            .nodes()
            .map(|v| ExpandedNode {
                label: p.label(v).to_string(),
                host: rec.gamma(v),
                origin: ExpandedOrigin::Original(v),
                parent: None,
                children: Vec::new(),
            })
            .collect();
        let of_original: Vec<usize> = (0..p.len()).collect();
        for v in p.preorder().iter().copied() {
            let Some(kids) = p.children(v) else { continue };
            for c in kids {
                let mut prev = v.0;
                if !rec.is_switch(v, c) {
                    let path = h
                        .path_down(rec.gamma(v), rec.gamma(c))
                        .expect("non-switch arcs descend");
                    let inner = path.len().saturating_sub(2);
                    for (i, &host) in path.iter().skip(1).take(inner).enumerate() {
                        let id = nodes.len();
                        nodes.push(ExpandedNode {
                            label: format!("{}~{}#{}", p.label(v), p.label(c), i + 1),
                            host,
                            origin: ExpandedOrigin::Loss {
                                parent: v,
                                child: c,
                                index: i + 1,
                            },
                            parent: Some(prev),
                            children: Vec::new(),
                        });
                        nodes[prev].children.push(id);
                        prev = id;
                    }
                }
                nodes[c.0].parent = Some(prev);
                nodes[prev].children.push(c.0);
            }
        }
        ExpandedParasite {
            nodes,
            root: p.root().0,
            of_original,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dummy_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.origin, ExpandedOrigin::Loss { .. }))
            .count()
    }

    /// Removes every loss node, returning `(parent, child)` arcs between
    /// original nodes.
    pub fn contract(&self) -> Vec<(NodeId, NodeId)> {
        let mut arcs = Vec::new();
        for n in &self.nodes {
            let ExpandedOrigin::Original(v) = n.origin else {
                continue;
            };
            for &c in &n.children {
                let mut cur = c;
                while let ExpandedOrigin::Loss { .. } = self.nodes[cur].origin {
                    cur = self.nodes[cur].children[0];
                }
                if let ExpandedOrigin::Original(w) = self.nodes[cur].origin {
                    arcs.push((v, w));
                }
            }
        }
        arcs
    }

    /// Nodes in postorder (children first).
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                out.push(v);
                continue;
            }
            stack.push((v, true));
            for &c in self.nodes[v].children.iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }
}

/// Label-keyed view used by the CLI and JSON output.
pub fn event_summary(rec: &Reconciliation, report: &EventReport) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    m.insert("cospeciation".into(), report.count(EventKind::CoSpeciation));
    m.insert("duplication".into(), report.count(EventKind::Duplication));
    m.insert("hostswitch".into(), report.count(EventKind::HostSwitch));
    m.insert("loss".into(), report.total_losses() as usize);
    let _ = rec;
    m
}

/// Maps labels to ids for a set of `(parent, child)` label pairs.
pub fn arcs_by_label(
    parasite: &PhyloTree,
    arcs: &[(String, String)],
) -> Result<Vec<(NodeId, NodeId)>, ReconError> {
    let idx: HashMap<&str, NodeId> = parasite.nodes().map(|v| (parasite.label(v), v)).collect();
    arcs.iter()
        .map(|(a, b)| {
            let pa = *idx
                .get(a.as_str())
                .ok_or_else(|| ReconError::UnknownParasite(a.clone()))?;
            let pb = *idx
                .get(b.as_str())
                .ok_or_else(|| ReconError::UnknownParasite(b.clone()))?;
            Ok((pa, pb))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_newick;

    fn rec(h: &str, p: &str, phi: &[(&str, &str)], gamma: &[(&str, &str)]) -> Reconciliation {
        let host = Arc::new(parse_newick(h).unwrap());
        let par = Arc::new(parse_newick(p).unwrap());
        let phi: Vec<_> = phi
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let gamma: Vec<_> = gamma
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Reconciliation::from_labels(host, par, &phi, &gamma).unwrap()
    }

    #[test]
    fn lca_mapping_of_cherry_is_valid_cospeciation() {
        let r = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "r")],
        );
        assert!(r.validate().is_valid());
        let ev = r.classify_events().unwrap();
        let q = r.parasite().node("q").unwrap();
        assert_eq!(ev.events[&q], EventKind::CoSpeciation);
        assert_eq!(ev.total_losses(), 0);
    }

    #[test]
    fn condition_three_violation() {
        // both children on `a`, parent on `b`: neither child below `b`
        let r = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "a")],
            &[("q", "b")],
        );
        let report = r.validate();
        assert_eq!(
            report.violations,
            vec![Violation::NoChildBelow { node: "q".into() }]
        );
    }

    #[test]
    fn condition_one_violation() {
        let r = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "r"), ("x", "b")],
        );
        let report = r.validate();
        assert!(report.violations.contains(&Violation::LeafMismatch {
            leaf: "x".into(),
            mapped: "b".into(),
            expected: "a".into(),
        }));
    }

    #[test]
    fn condition_two_violation() {
        // child mapped to the root while the parent sits on leaf `a`
        let r = rec(
            "(a,b)r;",
            "((x,y)s,z)q;",
            &[("x", "a"), ("y", "a"), ("z", "a")],
            &[("q", "a"), ("s", "r")],
        );
        let report = r.validate();
        assert!(report.violations.contains(&Violation::ChildAboveParent {
            parent: "q".into(),
            child: "s".into()
        }));
    }

    #[test]
    fn same_host_arcs_are_flagged_not_rejected() {
        let r = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "a")],
            &[("q", "a")],
        );
        let report = r.validate();
        assert!(report.is_valid());
        assert_eq!(report.same_host_arcs.len(), 2);
    }

    #[test]
    fn duplication_and_switch() {
        let dup = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "a")],
            &[("q", "a")],
        );
        let q = dup.parasite().node("q").unwrap();
        assert_eq!(
            dup.classify_events().unwrap().events[&q],
            EventKind::Duplication
        );

        let sw = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "a")],
        );
        let ev = sw.classify_events().unwrap();
        let q = sw.parasite().node("q").unwrap();
        let y = sw.parasite().node("y").unwrap();
        assert_eq!(ev.events[&q], EventKind::HostSwitch);
        assert_eq!(ev.switch_arcs, vec![(q, y)]);
        assert_eq!(ev.losses[&(q, y)], 0);
    }

    #[test]
    fn unclassifiable_node_is_reported() {
        // children on a and b below x, parent on the root: valid but no rule
        let r = rec(
            "((a,b)x,c)r;",
            "(u,v)q;",
            &[("u", "a"), ("v", "b")],
            &[("q", "r")],
        );
        assert!(r.validate().is_valid());
        assert_eq!(
            r.classify_events().unwrap_err(),
            ReconError::Unclassifiable("q".into())
        );
    }

    #[test]
    fn loss_counts() {
        let r = rec(
            "((a,b)x,c)r;",
            "(u,v)q;",
            &[("u", "a"), ("v", "c")],
            &[("q", "r")],
        );
        let p = r.parasite();
        let (q, u, v) = (
            p.node("q").unwrap(),
            p.node("u").unwrap(),
            p.node("v").unwrap(),
        );
        assert_eq!(r.count_losses(q, u).unwrap(), 1);
        assert_eq!(r.count_losses(q, v).unwrap(), 0);
        assert!(r.count_losses(u, v).is_err());

        let same = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "a")],
            &[("q", "a")],
        );
        let p = same.parasite();
        assert_eq!(
            same.count_losses(p.node("q").unwrap(), p.node("x").unwrap())
                .unwrap(),
            0
        );
    }

    #[test]
    fn expansion_inserts_one_node_per_loss() {
        let r = rec(
            "(((a,b)x,c)y,d)r;",
            "(u,v)q;",
            &[("u", "a"), ("v", "d")],
            &[("q", "r")],
        );
        let ex = r.expand_losses();
        assert_eq!(ex.dummy_count(), 2);
        assert_eq!(ex.len(), r.parasite().len() + 2);
        let mut arcs = ex.contract();
        arcs.sort();
        let mut orig: Vec<_> = r.parasite().arcs().collect();
        orig.sort();
        assert_eq!(arcs, orig);
        // loss nodes sit on the intermediate hosts, top-down
        let hosts: Vec<&str> = ex
            .nodes
            .iter()
            .filter(|n| matches!(n.origin, ExpandedOrigin::Loss { .. }))
            .map(|n| r.host().label(n.host))
            .collect();
        assert_eq!(hosts, ["y", "x"]);
    }

    #[test]
    fn expansion_without_losses_is_identity() {
        let r = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "r")],
        );
        let ex = r.expand_losses();
        assert_eq!(ex.len(), 3);
        assert_eq!(ex.dummy_count(), 0);
    }

    #[test]
    fn time_order_for_single_leaf() {
        let r = rec("a;", "x;", &[("x", "a")], &[]);
        let t = r.check_time_consistency().unwrap();
        assert_eq!(t.rank, vec![1]);
        assert!(t.is_valid_for(&r));
    }

    /// Two switches whose targets sit above each other's source hosts.
    type Pairs = &'static [(&'static str, &'static str)];
    const CYCLIC: (&str, &str, Pairs, Pairs) = (
        "((a,b)x,(c,d)y)r;",
        "((u1,(s1,t1)c1)p1,(u2,(s2,t2)c2)p2)q;",
        &[
            ("u1", "a"),
            ("s1", "c"),
            ("t1", "d"),
            ("u2", "c"),
            ("s2", "a"),
            ("t2", "b"),
        ],
        &[
            ("q", "r"),
            ("p1", "a"),
            ("c1", "y"),
            ("p2", "c"),
            ("c2", "x"),
        ],
    );

    #[test]
    fn cyclic_switches_are_inconsistent() {
        let (h, p, phi, gamma) = CYCLIC;
        let r = rec(h, p, phi, gamma);
        assert!(r.validate().is_valid());
        assert_eq!(r.classify_events().unwrap().count(EventKind::HostSwitch), 2);
        assert!(r.check_time_consistency().is_none());
    }

    #[test]
    fn lca_mapping_is_time_consistent() {
        let r = rec(
            "((a,b)x,(c,d)y)r;",
            "((u,v)s,(w,z)t)q;",
            &[("u", "a"), ("v", "c"), ("w", "b"), ("z", "d")],
            &[("s", "r"), ("t", "r"), ("q", "r")],
        );
        let t = r.check_time_consistency().unwrap();
        assert!(t.is_valid_for(&r));
        // ties broken by label: q first, then s before t
        let labels: Vec<_> = t.order.iter().map(|&v| r.parasite().label(v)).collect();
        assert_eq!(&labels[..3], ["q", "s", "t"]);
    }

    #[test]
    fn default_costs() {
        let c = CostVector::default();
        assert_eq!(
            (c.cospeciation, c.duplication, c.loss, c.hostswitch),
            (0, 2, 1, 3)
        );
        let dup = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "a")],
            &[("q", "a")],
        );
        assert_eq!(dup.score(&c).unwrap(), 2);
        let cosp = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "r")],
        );
        assert_eq!(cosp.score(&c).unwrap(), 0);
    }

    #[test]
    fn switch_plus_loss_scores_four() {
        // q on a switches to y on c; the other child sits on a.
        // The root s on r reaches q on a through x: one loss.
        let r = rec(
            "((a,b)x,c)r;",
            "((u,y)q,z)s;",
            &[("u", "a"), ("y", "c"), ("z", "c")],
            &[("q", "a"), ("s", "r")],
        );
        assert!(r.validate().is_valid());
        let ev = r.classify_events().unwrap();
        assert_eq!(ev.count(EventKind::HostSwitch), 1);
        assert_eq!(ev.count(EventKind::CoSpeciation), 1);
        assert_eq!(ev.total_losses(), 1);
        assert_eq!(r.score(&CostVector::default()).unwrap(), 4);
    }
}
