//! Seeded instance generators: random reconciliations, sewing trees and the
//! tanglegram-to-drawing reduction instance.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, so a seed
//! fixes the output across platforms and releases of this crate.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::reconcile::{ReconError, Reconciliation};
use crate::tree::{NodeId, PhyloTree, TreeError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("rejection budget of {0} exhausted; retry with another seed")]
    Exhausted(usize),
    #[error("sewing tree anchors must be two distinct host leaves")]
    BadAnchors,
    #[error("trees must be complete binary trees of the same height")]
    NotComplete,
    #[error("leaf correspondence is not a bijection")]
    NotBijective,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Reconciliation(#[from] ReconError),
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Arena builder for trees whose nodes carry a host.
#[derive(Default)]
struct Builder {
    labels: Vec<String>,
    children: Vec<Option<[NodeId; 2]>>,
    host: Vec<NodeId>,
}

impl Builder {
    fn leaf(&mut self, label: String, host: NodeId) -> NodeId {
        self.labels.push(label);
        self.children.push(None);
        self.host.push(host);
        NodeId(self.labels.len() - 1)
    }

    fn internal(&mut self, label: String, host: NodeId, a: NodeId, b: NodeId) -> NodeId {
        let id = self.leaf(label, host);
        self.children[id.0] = Some([a, b]);
        id
    }

    fn finish(self, root: NodeId) -> Result<(PhyloTree, Vec<NodeId>), TreeError> {
        Ok((
            PhyloTree::from_parts(self.labels, self.children, root)?,
            self.host,
        ))
    }
}

/// Random full binary tree by repeated splitting of a uniformly chosen
/// leaf. Leaves are labelled `{leaf}{i}`, internal nodes `{inner}{i}`.
pub fn random_tree(
    n_leaves: usize,
    leaf: &str,
    inner: &str,
    rng: &mut ChaCha8Rng,
) -> Result<PhyloTree, GenError> {
    if n_leaves == 0 {
        return Err(GenError::Parameter("a tree needs at least one leaf".into()));
    }
    let mut children: Vec<Option<[NodeId; 2]>> = vec![None];
    let mut leaves = vec![NodeId(0)];
    while leaves.len() < n_leaves {
        let i = rng.random_range(0..leaves.len());
        let v = leaves.swap_remove(i);
        let a = NodeId(children.len());
        let b = NodeId(children.len() + 1);
        children.push(None);
        children.push(None);
        children[v.0] = Some([a, b]);
        leaves.push(a);
        leaves.push(b);
    }
    // number leaves and internal nodes in preorder for readable labels
    let mut labels = vec![String::new(); children.len()];
    let (mut nl, mut ni) = (0, 0);
    let mut stack = vec![NodeId(0)];
    while let Some(v) = stack.pop() {
        match children[v.0] {
            Some([a, b]) => {
                labels[v.0] = format!("{inner}{ni}");
                ni += 1;
                stack.push(b);
                stack.push(a);
            }
            None => {
                labels[v.0] = format!("{leaf}{nl}");
                nl += 1;
            }
        }
    }
    Ok(PhyloTree::from_parts(labels, children, NodeId(0))?)
}

/// Complete binary tree of the given height, leaves `{leaf}{i}` left to
/// right and internal nodes `{inner}{i}` in preorder.
pub fn complete_tree(height: u32, leaf: &str, inner: &str) -> Result<PhyloTree, GenError> {
    let mut b = Builder::default();
    let root = complete_into(&mut b, height, leaf, inner, NodeId(0), &mut (0, 0));
    Ok(b.finish(root)?.0)
}

fn complete_into(
    b: &mut Builder,
    height: u32,
    leaf: &str,
    inner: &str,
    host: NodeId,
    counters: &mut (usize, usize),
) -> NodeId {
    if height == 0 {
        let id = b.leaf(format!("{leaf}{}", counters.0), host);
        counters.0 += 1;
        return id;
    }
    let label = format!("{inner}{}", counters.1);
    counters.1 += 1;
    let id = b.leaf(label, host);
    let l = complete_into(b, height - 1, leaf, inner, host, counters);
    let r = complete_into(b, height - 1, leaf, inner, host, counters);
    b.children[id.0] = Some([l, r]);
    id
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub host_leaves: usize,
    pub parasite_leaves: usize,
    pub switch_rate: f64,
    pub seed: u64,
}

const REJECTION_BUDGET: usize = 10_000;

/// Random host and parasite trees, a uniform leaf map and the lca mapping,
/// after which each internal parasite is, with probability `switch_rate`,
/// moved below the lca towards one child so that the arc to its other
/// child becomes a host switch. Moves that break validity or leave a node
/// without an event are rejected.
pub fn gen_random_reconciliation(spec: RandomSpec) -> Result<Reconciliation, GenError> {
    if !(0.0..=1.0).contains(&spec.switch_rate) || spec.switch_rate.is_nan() {
        return Err(GenError::Parameter("switch rate must lie in [0, 1]".into()));
    }
    if spec.host_leaves == 0 || spec.parasite_leaves == 0 {
        return Err(GenError::Parameter("leaf counts must be positive".into()));
    }
    let mut rng = rng_from_seed(spec.seed);
    let host = Arc::new(random_tree(spec.host_leaves, "h", "H", &mut rng)?);
    let parasite = Arc::new(random_tree(spec.parasite_leaves, "p", "P", &mut rng)?);
    let host_leaves: Vec<NodeId> = host.leaves().collect();
    let mut phi = vec![None; parasite.len()];
    for l in parasite.leaves() {
        phi[l.0] = Some(host_leaves[rng.random_range(0..host_leaves.len())]);
    }
    let base = Reconciliation::lca_mapping(host, parasite, phi)?;
    perturb_switches(&base, spec.switch_rate, &mut rng)
}

/// `count` mappings over one pair of trees and leaf map: the lca mapping
/// perturbed with seeds `seed, seed + 1, ...` after the trees are drawn
/// from `seed`.
pub fn gen_random_family(spec: RandomSpec, count: usize) -> Result<Vec<Reconciliation>, GenError> {
    let first = gen_random_reconciliation(spec)?;
    let base = Reconciliation::lca_mapping(
        first.host_arc().clone(),
        first.parasite_arc().clone(),
        first.phi_vec().to_vec(),
    )?;
    let mut out = vec![first];
    for i in 1..count {
        let mut rng = rng_from_seed(spec.seed.wrapping_add(i as u64) ^ 0x9e37_79b9_7f4a_7c15);
        out.push(perturb_switches(&base, spec.switch_rate, &mut rng)?);
    }
    Ok(out)
}

fn perturb_switches(
    base: &Reconciliation,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Reconciliation, GenError> {
    if rate == 0.0 {
        return Ok(base.clone());
    }
    let host = base.host();
    let parasite = base.parasite();
    let mut gamma = base.gamma_vec().to_vec();
    let mut rejected = 0;
    for v in parasite.postorder() {
        let Some(kids) = parasite.children(v) else {
            continue;
        };
        if !rng.random_bool(rate) {
            continue;
        }
        let k = rng.random_range(0..2);
        let (target, keep) = (kids[k], kids[1 - k]);
        let (gt, gk) = (gamma[target.0], gamma[keep.0]);
        if host.is_ancestor_or_self(gt, gk) || host.is_ancestor_or_self(gk, gt) {
            continue;
        }
        let l = host.lca(gt, gk)?;
        let path = host.path_down(l, gk).expect("lca is an ancestor");
        let choices = &path[1..];
        let pick = choices[rng.random_range(0..choices.len())];
        let old = gamma[v.0];
        gamma[v.0] = pick;
        let candidate = base.with_gamma(gamma.clone())?;
        if !candidate.validate().is_valid() || candidate.classify_events().is_err() {
            gamma[v.0] = old;
            rejected += 1;
            if rejected > REJECTION_BUDGET {
                return Err(GenError::Exhausted(REJECTION_BUDGET));
            }
        }
    }
    Ok(base.with_gamma(gamma)?)
}

/// The alternating gadget: `2m + 1` parasite nodes mapped to two host leaves.
#[derive(Clone, Debug)]
pub struct SewingTree {
    pub size: usize,
    pub anchors: (NodeId, NodeId),
    pub labels: Vec<String>,
    pub children: Vec<Option<[usize; 2]>>,
    pub host: Vec<NodeId>,
    pub root: usize,
}

impl SewingTree {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// As a standalone reconciliation onto `host`.
    pub fn to_reconciliation(&self, host: Arc<PhyloTree>) -> Result<Reconciliation, GenError> {
        let children = self
            .children
            .iter()
            .map(|c| c.map(|[a, b]| [NodeId(a), NodeId(b)]))
            .collect();
        let tree = Arc::new(PhyloTree::from_parts(
            self.labels.clone(),
            children,
            NodeId(self.root),
        )?);
        let phi = (0..self.len())
            .map(|i| self.children[i].is_none().then_some(self.host[i]))
            .collect();
        Ok(Reconciliation::new(host, tree, phi, self.host.clone())?)
    }
}

/// `S_0` is one node on `h2`; `S_{m+1}` adds a root on the other anchor
/// with children the old root and a new leaf on the new root's anchor.
pub fn gen_sewing_tree(
    host: &PhyloTree,
    m: usize,
    h1: NodeId,
    h2: NodeId,
    prefix: &str,
) -> Result<SewingTree, GenError> {
    if h1 == h2
        || h1.0 >= host.len()
        || h2.0 >= host.len()
        || !host.is_leaf(h1)
        || !host.is_leaf(h2)
    {
        return Err(GenError::BadAnchors);
    }
    let mut b = Builder::default();
    let root = sew_into(&mut b, m, h1, h2, prefix);
    Ok(SewingTree {
        size: m,
        anchors: (h1, h2),
        labels: b.labels,
        children: b
            .children
            .into_iter()
            .map(|c| c.map(|[a, b]| [a.0, b.0]))
            .collect(),
        host: b.host,
        root: root.0,
    })
}

fn sew_into(b: &mut Builder, m: usize, h1: NodeId, h2: NodeId, prefix: &str) -> NodeId {
    let mut root = b.leaf(format!("{prefix}s0"), h2);
    for k in 0..m {
        let other = if b.host[root.0] == h2 { h1 } else { h2 };
        let twin = b.leaf(format!("{prefix}t{k}"), other);
        root = b.internal(format!("{prefix}s{}", k + 1), other, root, twin);
    }
    root
}

/// Crossings of a tanglegram given leaf positions on both sides.
pub fn tangle_crossings(pairs: &[(usize, usize)]) -> usize {
    let mut n = 0;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let a = pairs[i].0 as i64 - pairs[j].0 as i64;
            let b = pairs[i].1 as i64 - pairs[j].1 as i64;
            if a * b < 0 {
                n += 1;
            }
        }
    }
    n
}

fn leaf_orders(t: &PhyloTree) -> Vec<Vec<NodeId>> {
    let internal: Vec<NodeId> = t.internal_nodes().collect();
    assert!(internal.len() < 20, "too many flips to enumerate");
    (0u32..1 << internal.len())
        .map(|mask| {
            let mut flip = vec![false; t.len()];
            for (i, v) in internal.iter().enumerate() {
                flip[v.0] = mask >> i & 1 == 1;
            }
            let mut out = Vec::new();
            let mut stack = vec![t.root()];
            while let Some(v) = stack.pop() {
                match t.children(v) {
                    Some([a, b]) => {
                        let (l, r) = if flip[v.0] { (b, a) } else { (a, b) };
                        stack.push(r);
                        stack.push(l);
                    }
                    None => out.push(v),
                }
            }
            out
        })
        .collect()
}

/// Minimum tanglegram crossings over all flips of both trees, by
/// exhaustive enumeration. `psi` pairs leaves of `t1` with leaves of `t2`.
pub fn ttcm_min_crossings(t1: &PhyloTree, t2: &PhyloTree, psi: &[(NodeId, NodeId)]) -> usize {
    let o1 = leaf_orders(t1);
    let o2 = leaf_orders(t2);
    let mut best = usize::MAX;
    for a in &o1 {
        let mut pa = vec![0usize; t1.len()];
        for (i, v) in a.iter().enumerate() {
            pa[v.0] = i;
        }
        for b in &o2 {
            let mut pb = vec![0usize; t2.len()];
            for (i, v) in b.iter().enumerate() {
                pb[v.0] = i;
            }
            let pairs: Vec<_> = psi.iter().map(|&(x, y)| (pa[x.0], pb[y.0])).collect();
            best = best.min(tangle_crossings(&pairs));
        }
    }
    best
}

fn complete_height(t: &PhyloTree) -> Option<u32> {
    let h = t.depth(t.leaves().next()?);
    let ok = t.leaves().all(|l| t.depth(l) == h) && t.leaf_count() == 1usize << h;
    ok.then_some(h)
}

/// A reduction instance with its bookkeeping.
#[derive(Clone, Debug)]
pub struct TtcmInstance {
    pub rec: Reconciliation,
    pub height: u32,
    pub k: usize,
    pub k_prime: usize,
    /// Roots of the two sewing trees inside the parasite tree.
    pub sewing_roots: [NodeId; 2],
}

impl TtcmInstance {
    /// Node count of the sewing tree hanging from `sewing_roots[i]`.
    pub fn sewing_size(&self, i: usize) -> usize {
        self.rec
            .parasite()
            .subtree_nodes(self.sewing_roots[i])
            .map_or(0, |v| v.len())
    }
}

/// Builds the drawing instance for two complete trees `t1`, `t2` of equal
/// height `h`, a leaf bijection `psi` and a crossing budget `k`, returning
/// it with `k' = k + 2^h (2^h - 1)`.
pub fn gen_ttcm_reduction(
    t1: &PhyloTree,
    t2: &PhyloTree,
    psi: &[(NodeId, NodeId)],
    k: usize,
) -> Result<TtcmInstance, GenError> {
    let h = complete_height(t1).ok_or(GenError::NotComplete)?;
    if complete_height(t2) != Some(h) {
        return Err(GenError::NotComplete);
    }
    let n = 1usize << h;
    let mut seen1 = vec![false; t1.len()];
    let mut seen2 = vec![false; t2.len()];
    for &(a, b) in psi {
        if a.0 >= t1.len() || b.0 >= t2.len() || !t1.is_leaf(a) || !t2.is_leaf(b) {
            return Err(GenError::NotBijective);
        }
        if std::mem::replace(&mut seen1[a.0], true) || std::mem::replace(&mut seen2[b.0], true) {
            return Err(GenError::NotBijective);
        }
    }
    if psi.len() != n {
        return Err(GenError::NotBijective);
    }

    // host: r(h1(h5 = T1, h6), h2(h3, h4(h7, h8 = T2)))
    let mut hb = Builder::default();
    let dummy = NodeId(0);
    let copy = |hb: &mut Builder, t: &PhyloTree, tag: &str, root_label: &str| {
        let mut map = vec![NodeId(0); t.len()];
        for v in t.postorder() {
            let label = if v == t.root() {
                root_label.to_string()
            } else {
                format!("{tag}_{}", t.label(v))
            };
            map[v.0] = match t.children(v) {
                None => hb.leaf(label, dummy),
                Some([a, b]) => hb.internal(label, dummy, map[a.0], map[b.0]),
            };
        }
        map
    };
    let m1 = copy(&mut hb, t1, "A", "h5");
    let m2 = copy(&mut hb, t2, "B", "h8");
    let h5 = m1[t1.root().0];
    let h8 = m2[t2.root().0];
    let h6 = hb.leaf("h6".into(), dummy);
    let h3 = hb.leaf("h3".into(), dummy);
    let h7 = hb.leaf("h7".into(), dummy);
    let h1 = hb.internal("h1".into(), dummy, h5, h6);
    let h4 = hb.internal("h4".into(), dummy, h7, h8);
    let h2 = hb.internal("h2".into(), dummy, h3, h4);
    let rh = hb.internal("r".into(), dummy, h1, h2);
    let host = Arc::new(hb.finish(rh)?.0);

    let k_prime = k + n * (n - 1);
    let mut pb = Builder::default();
    let sew_a = sew_into(&mut pb, k_prime + 1, h3, h6, "a");
    let sew_b = sew_into(&mut pb, k_prime + 1, h3, h7, "b");
    // T_h under p2: internal nodes on h2, leaves p_e on h3
    let mut counters = (0, 0);
    let p2 = complete_into(&mut pb, h, "e", "T", h2, &mut counters);
    // complete_into puts every node on h2; leaves move to h3
    let mut stack = vec![p2];
    let mut p_es = Vec::new();
    while let Some(v) = stack.pop() {
        match pb.children[v.0] {
            Some([a, b]) => {
                stack.push(b);
                stack.push(a);
            }
            None => {
                pb.host[v.0] = h3;
                p_es.push(v);
            }
        }
    }
    for (idx, &(l1, l2)) in psi.iter().enumerate() {
        let pe = p_es[idx];
        let p1i = pb.leaf(format!("x{idx}"), m1[l1.0]);
        let p2j = pb.leaf(format!("y{idx}"), m2[l2.0]);
        let pee = pb.leaf(format!("z{idx}"), h3);
        let pe1 = pb.internal(format!("w{idx}"), h3, p2j, pee);
        pb.children[pe.0] = Some([p1i, pe1]);
    }
    let p2 = {
        // complete_into labelled the root; rename for readability
        pb.labels[p2.0] = "p2".into();
        p2
    };
    let p1 = pb.internal("p1".into(), rh, sew_b, p2);
    let root = pb.internal("p0".into(), rh, sew_a, p1);
    let (ptree, gamma) = pb.finish(root)?;
    let ptree = Arc::new(ptree);
    let phi = ptree
        .nodes()
        .map(|v| ptree.is_leaf(v).then_some(gamma[v.0]))
        .collect();
    let rec = Reconciliation::new(host, ptree, phi, gamma)?;
    Ok(TtcmInstance {
        rec,
        height: h,
        k,
        k_prime,
        sewing_roots: [sew_a, sew_b],
    })
}

/// Random leaf bijection between two trees with equally many leaves.
pub fn random_bijection(
    t1: &PhyloTree,
    t2: &PhyloTree,
    rng: &mut ChaCha8Rng,
) -> Vec<(NodeId, NodeId)> {
    let a: Vec<NodeId> = t1.leaves().collect();
    let mut b: Vec<NodeId> = t2.leaves().collect();
    b.shuffle(rng);
    a.into_iter().zip(b).collect()
}
