//! Union graph of an instance, planarity testing and the greedy maximal
//! planar subgraph, plus extraction of host child orders and the parasite
//! leaf order from an embedding.

mod embedding;
mod lr;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reconcile::Reconciliation;
use crate::tree::{NodeId, PhyloTree};

pub use embedding::PlanarEmbedding;
pub use lr::lr_planarity;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PlanarError {
    #[error("leaf map sends `{parasite}` to `{host}`, which is not a host leaf")]
    PhiNotLeaf { parasite: String, host: String },
    #[error("parasite leaf `{0}` has no leaf-map entry")]
    MissingPhi(String),
    #[error("parasite node `{0}` is the source of two host-switch arcs")]
    DoubleSwitch(String),
    #[error("embedding does not belong to this union graph: {0}")]
    ForeignEmbedding(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    HostArc,
    ParasiteArc,
    Tangle,
    RootLink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnionEdge {
    pub u: usize,
    pub v: usize,
    pub kind: EdgeKind,
}

/// `H ∪ P ∪ tangles ∪ {(r(H), r(P))}`. Host node `h` is vertex `h`,
/// parasite node `p` is vertex `|H| + p`.
#[derive(Clone, Debug)]
pub struct UnionGraph {
    host: Arc<PhyloTree>,
    parasite: Arc<PhyloTree>,
    phi: Vec<Option<NodeId>>,
    pub edges: Vec<UnionEdge>,
}

impl UnionGraph {
    pub fn host(&self) -> &PhyloTree {
        &self.host
    }

    pub fn parasite(&self) -> &PhyloTree {
        &self.parasite
    }

    pub fn vertex_count(&self) -> usize {
        self.host.len() + self.parasite.len()
    }

    pub fn host_vertex(&self, h: NodeId) -> usize {
        h.0
    }

    pub fn parasite_vertex(&self, p: NodeId) -> usize {
        self.host.len() + p.0
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.u, e.v)).collect()
    }

    /// Same vertices, edges filtered.
    pub fn subgraph(&self, keep: impl Fn(&UnionEdge) -> bool) -> UnionGraph {
        UnionGraph {
            host: self.host.clone(),
            parasite: self.parasite.clone(),
            phi: self.phi.clone(),
            edges: self.edges.iter().copied().filter(|e| keep(e)).collect(),
        }
    }

    fn parasite_arc_edge(&self, parent: NodeId, child: NodeId) -> UnionEdge {
        UnionEdge {
            u: self.parasite_vertex(parent),
            v: self.parasite_vertex(child),
            kind: EdgeKind::ParasiteArc,
        }
    }
}

pub fn build_union_graph(
    host: &Arc<PhyloTree>,
    parasite: &Arc<PhyloTree>,
    phi: &[Option<NodeId>],
) -> Result<UnionGraph, PlanarError> {
    let off = host.len();
    let mut edges = Vec::with_capacity(host.len() + parasite.len() * 2);
    for (a, b) in host.arcs() {
        edges.push(UnionEdge {
            u: a.0,
            v: b.0,
            kind: EdgeKind::HostArc,
        });
    }
    for (a, b) in parasite.arcs() {
        edges.push(UnionEdge {
            u: off + a.0,
            v: off + b.0,
            kind: EdgeKind::ParasiteArc,
        });
    }
    for p in parasite.leaves() {
        let h = phi
            .get(p.0)
            .copied()
            .flatten()
            .ok_or_else(|| PlanarError::MissingPhi(parasite.label(p).to_string()))?;
        if h.0 >= host.len() || !host.is_leaf(h) {
            return Err(PlanarError::PhiNotLeaf {
                parasite: parasite.label(p).to_string(),
                host: if h.0 < host.len() {
                    host.label(h).to_string()
                } else {
                    h.to_string()
                },
            });
        }
        edges.push(UnionEdge {
            u: off + p.0,
            v: h.0,
            kind: EdgeKind::Tangle,
        });
    }
    edges.push(UnionEdge {
        u: host.root().0,
        v: off + parasite.root().0,
        kind: EdgeKind::RootLink,
    });
    Ok(UnionGraph {
        host: host.clone(),
        parasite: parasite.clone(),
        phi: phi.to_vec(),
        edges,
    })
}

/// Embedding of the union graph, or `None` when it is not planar.
pub fn test_planarity(g: &UnionGraph) -> Option<PlanarEmbedding> {
    let mut emb = lr_planarity(g.vertex_count(), &g.pairs())?;
    // the face to the right of the root link plays the outer face
    let (a, b) = (g.host.root().0, g.parasite_vertex(g.parasite.root()));
    if let Some(i) = emb
        .faces()
        .iter()
        .position(|f| f.iter().any(|&(x, y)| (x, y) == (a, b)))
    {
        emb.outer_face = i;
    }
    Some(emb)
}

pub fn is_planar_instance(
    host: &Arc<PhyloTree>,
    parasite: &Arc<PhyloTree>,
    phi: &[Option<NodeId>],
) -> Result<bool, PlanarError> {
    let g = build_union_graph(host, parasite, phi)?;
    Ok(lr_planarity(g.vertex_count(), &g.pairs()).is_some())
}

/// Host child orders and parasite leaf order read off an embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafOrder {
    /// Children of every internal host node, left first.
    pub host_children: Vec<Option<[NodeId; 2]>>,
    /// Host leaves left to right.
    pub host_leaves: Vec<NodeId>,
    /// Parasite leaves left to right (σ).
    pub sigma: Vec<NodeId>,
}

impl LeafOrder {
    /// 0-based position of every parasite leaf; `usize::MAX` for internal nodes.
    pub fn sigma_rank(&self, parasite_len: usize) -> Vec<usize> {
        let mut r = vec![usize::MAX; parasite_len];
        for (i, p) in self.sigma.iter().enumerate() {
            r[p.0] = i;
        }
        r
    }
}

/// Walks the host tree from its root, entering along the root link and
/// visiting neighbours in rotation order. The visit order gives the host
/// child orders; the tangles met at each host leaf give σ. The orientation
/// is normalised so that the root's first visited child is its stored
/// first child.
pub fn leaf_order_from_embedding(
    e: &PlanarEmbedding,
    g: &UnionGraph,
) -> Result<LeafOrder, PlanarError> {
    let first = walk(e, g)?;
    let h = g.host();
    if let Some([a, _]) = h.children(h.root()) {
        if first.host_children[h.root().0].map(|c| c[0]) != Some(a) {
            return walk(&e.mirrored(), g);
        }
    }
    Ok(first)
}

fn walk(e: &PlanarEmbedding, g: &UnionGraph) -> Result<LeafOrder, PlanarError> {
    let h = g.host();
    let p = g.parasite();
    if e.vertex_count() != g.vertex_count() {
        return Err(PlanarError::ForeignEmbedding("vertex count differs".into()));
    }
    let mut host_children = vec![None; h.len()];
    let mut host_leaves = Vec::with_capacity(h.leaf_count());
    let mut sigma = Vec::with_capacity(p.leaf_count());
    let pr = g.parasite_vertex(p.root());
    if p.len() == 1 {
        sigma.push(p.root());
    }
    // (vertex, neighbour we arrived from)
    let mut stack = vec![(h.root(), pr)];
    while let Some((v, from)) = stack.pop() {
        let rot = &e.rotation[v.0];
        let start = rot.iter().position(|&w| w == from).ok_or_else(|| {
            PlanarError::ForeignEmbedding(format!("`{}` lacks its parent edge", h.label(v)))
        })?;
        let k = rot.len();
        let ordered: Vec<usize> = (1..=k).map(|i| rot[(start + i) % k]).collect();
        match h.children(v) {
            Some([a, b]) => {
                let kids: Vec<NodeId> = ordered
                    .iter()
                    .filter(|&&w| w == a.0 || w == b.0)
                    .map(|&w| NodeId(w))
                    .collect();
                if kids.len() != 2 {
                    return Err(PlanarError::ForeignEmbedding(format!(
                        "`{}` lacks a child edge",
                        h.label(v)
                    )));
                }
                host_children[v.0] = Some([kids[0], kids[1]]);
                stack.push((kids[1], v.0));
                stack.push((kids[0], v.0));
            }
            None => {
                host_leaves.push(v);
                if p.len() > 1 {
                    for &w in &ordered {
                        if w < h.len() {
                            continue;
                        }
                        let q = NodeId(w - h.len());
                        if p.is_leaf(q) && g.phi[q.0] == Some(v) {
                            sigma.push(q);
                        }
                    }
                }
            }
        }
    }
    if sigma.len() != p.leaf_count() {
        return Err(PlanarError::ForeignEmbedding(
            "not every parasite leaf was reached by a tangle".into(),
        ));
    }
    Ok(LeafOrder {
        host_children,
        host_leaves,
        sigma,
    })
}

/// Greedy maximal planar subgraph of the union graph.
#[derive(Clone, Debug)]
pub struct MpsResult {
    pub planar_subgraph: UnionGraph,
    pub embedding: PlanarEmbedding,
    /// Parasite arcs that could not be added back.
    pub non_planar_arcs: Vec<(NodeId, NodeId)>,
    /// Arcs held back in the first phase, in the order they were retried.
    pub missing_arcs_order: Vec<(NodeId, NodeId)>,
}

/// Keeps every host arc, the root link, every tangle and, per internal
/// parasite, the arc to a non-switch child (the first stored child when
/// neither is a switch). The held-back arcs are re-added greedily,
/// shallowest first, whenever planarity survives.
pub fn maximal_planar_subgraph(rec: &Reconciliation) -> Result<MpsResult, PlanarError> {
    let full = build_union_graph(rec.host_arc(), rec.parasite_arc(), rec.phi_vec())?;
    let p = rec.parasite();
    let mut missing = Vec::new();
    let mut kept = Vec::new();
    for v in p.internal_nodes() {
        let [a, b] = p.children(v).expect("internal");
        let (sa, sb) = (rec.is_switch(v, a), rec.is_switch(v, b));
        match (sa, sb) {
            (true, true) => return Err(PlanarError::DoubleSwitch(p.label(v).to_string())),
            (false, _) => {
                kept.push((v, a));
                missing.push((v, b));
            }
            (true, false) => {
                kept.push((v, b));
                missing.push((v, a));
            }
        }
    }
    missing.sort_by(|x, y| (p.depth(x.0), p.label(x.1)).cmp(&(p.depth(y.0), p.label(y.1))));
    let mut sub = full.subgraph(|e| e.kind != EdgeKind::ParasiteArc);
    for &(a, b) in &kept {
        sub.edges.push(full.parasite_arc_edge(a, b));
    }
    let mut embedding =
        lr_planarity(sub.vertex_count(), &sub.pairs()).expect("a forest plus one link is planar");
    let mut rejected = Vec::new();
    for &(a, b) in &missing {
        sub.edges.push(full.parasite_arc_edge(a, b));
        match lr_planarity(sub.vertex_count(), &sub.pairs()) {
            Some(e) => embedding = e,
            None => {
                sub.edges.pop();
                rejected.push((a, b));
            }
        }
    }
    Ok(MpsResult {
        planar_subgraph: sub,
        embedding,
        non_planar_arcs: rejected,
        missing_arcs_order: missing,
    })
}

/// Exhaustive planarity check over all rotation systems. Intended as a
/// test oracle for small graphs; returns `None` when the number of
/// rotation systems exceeds `cap`.
pub fn brute_force_planar(n: usize, edges: &[(usize, usize)], cap: u64) -> Option<bool> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u != v && !adj[u].contains(&v) {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut total: u64 = 1;
    for a in &adj {
        let f = (1..a.len().max(1) as u64).product::<u64>();
        total = total.checked_mul(f)?;
        if total > cap {
            return None;
        }
    }
    // each vertex: fix its first neighbour, permute the rest
    let perms: Vec<Vec<Vec<usize>>> = adj
        .iter()
        .map(|a| {
            if a.len() <= 2 {
                return vec![a.clone()];
            }
            let mut rest = a[1..].to_vec();
            let mut out = Vec::new();
            permute(&mut rest, 0, &mut |r| {
                let mut v = vec![a[0]];
                v.extend_from_slice(r);
                out.push(v);
            });
            out
        })
        .collect();
    let mut idx = vec![0usize; n];
    loop {
        let emb = PlanarEmbedding {
            rotation: (0..n).map(|v| perms[v][idx[v]].clone()).collect(),
            outer_face: 0,
        };
        if emb.satisfies_euler() {
            return Some(true);
        }
        let mut i = 0;
        loop {
            if i == n {
                return Some(false);
            }
            idx[i] += 1;
            if idx[i] < perms[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}
