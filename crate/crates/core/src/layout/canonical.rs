//! The coordinate rules shared by every layout producer.
//!
//! A layout in the canonical family is fixed by two choices: the child
//! order of every internal host and the order of the parasite leaves inside
//! each host leaf. Everything else follows:
//!
//! * parasite leaves take consecutive slots along the host leaves (an empty
//!   host leaf takes one slot); slot `s` has `x = 2s + 1`,
//! * an internal parasite copies `x` from its non-switch child, a loss node
//!   from its single child,
//! * `y` comes from a time order of the internal nodes of the expanded
//!   parasite tree, earliest highest; leaves sit at `y = 1`,
//! * host rectangles span their slots horizontally; a rectangle's bottom
//!   lies one unit below its lowest parasite, its top on its parent's
//!   bottom.
//!
//! Only the `x` coordinates depend on the two choices, which lets the
//! oracle re-evaluate a candidate without rebuilding the frame.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::reconcile::{time_order, ExpandedOrigin, ExpandedParasite, Reconciliation, TimeItem};
use crate::tree::{NodeId, PhyloTree};

use super::crossings::{arc_intersection, ArcGeom};
use super::{Crossing, DummyInfo, HPLayout, LayoutError, Point, Rect, Route};

/// Host child orders plus a sort key for parasite leaves inside host leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    pub host_children: Vec<Option<[NodeId; 2]>>,
    /// Indexed by parasite node; only leaf entries are read.
    pub leaf_rank: Vec<usize>,
}

impl Arrangement {
    /// Stored child orders, leaves by label.
    pub fn identity(rec: &Reconciliation) -> Self {
        let h = rec.host();
        let p = rec.parasite();
        let mut leaves: Vec<NodeId> = p.leaves().collect();
        leaves.sort_by(|a, b| p.label(*a).cmp(p.label(*b)));
        let mut leaf_rank = vec![usize::MAX; p.len()];
        for (i, l) in leaves.iter().enumerate() {
            leaf_rank[l.0] = i;
        }
        Arrangement {
            host_children: h.nodes().map(|v| h.children(v)).collect(),
            leaf_rank,
        }
    }
}

/// Result of placing an arrangement.
#[derive(Clone, Debug)]
pub struct Placement {
    /// `x` of every expanded parasite node.
    pub x: Vec<i64>,
    /// `(x_left, x_right)` of every host.
    pub rect_x: Vec<(i64, i64)>,
    pub host_leaves: Vec<NodeId>,
    /// Parasite leaves left to right.
    pub parasite_leaves: Vec<NodeId>,
}

#[derive(Clone, Debug)]
pub struct Frame {
    pub(crate) host: Arc<PhyloTree>,
    pub(crate) parasite: Arc<PhyloTree>,
    pub(crate) expanded: ExpandedParasite,
    /// `y` of every expanded parasite node.
    pub(crate) y: Vec<i64>,
    /// Expanded node whose `x` each node copies (always an original leaf).
    pub(crate) src_leaf: Vec<usize>,
    /// `(y_bottom, y_top)` of every host.
    pub(crate) rect_y: Vec<(i64, i64)>,
    /// Parasite leaves per host leaf.
    pub(crate) leaves_at: Vec<Vec<NodeId>>,
    pub(crate) arcs: Vec<(NodeId, NodeId)>,
    pub(crate) switch: Vec<bool>,
}

impl Frame {
    pub fn new(rec: &Reconciliation, compact_y: bool) -> Result<Frame, LayoutError> {
        rec.ensure_valid()?;
        if rec.check_time_consistency().is_none() {
            return Err(LayoutError::NotTimeConsistent);
        }
        let h = rec.host_arc().clone();
        let p = rec.parasite_arc().clone();
        let ex = rec.expand_losses();
        let n = ex.len();

        // items: internal expanded nodes plus one stand-in per internal
        // host that carries no parasite, so every internal host gets height
        let mut items: Vec<TimeItem> = Vec::new();
        let mut item_of = vec![usize::MAX; n];
        let mut used = vec![false; h.len()];
        for (i, node) in ex.nodes.iter().enumerate() {
            used[node.host.0] = true;
            if !node.children.is_empty() {
                item_of[i] = items.len();
                items.push(TimeItem {
                    host: node.host,
                    key: node.label.clone(),
                });
            }
        }
        for v in h.internal_nodes() {
            if !used[v.0] {
                items.push(TimeItem {
                    host: v,
                    key: format!("\u{10ffff}{}", h.label(v)),
                });
            }
        }
        let mut item_arcs = Vec::new();
        for (i, node) in ex.nodes.iter().enumerate() {
            for &c in &node.children {
                if item_of[c] != usize::MAX {
                    item_arcs.push((item_of[i], item_of[c]));
                }
            }
        }
        let order = time_order(&h, &items, &item_arcs).ok_or(LayoutError::NotTimeConsistent)?;
        let item_y: Vec<i64> = if compact_y {
            longest_path_y(&h, &items, &item_arcs, &order)
        } else {
            let total = order.len() as i64;
            let mut y = vec![0; items.len()];
            for (idx, &it) in order.iter().enumerate() {
                y[it] = 2 * (total - idx as i64) + 1;
            }
            y
        };

        let mut y = vec![1i64; n];
        for i in 0..n {
            if item_of[i] != usize::MAX {
                y[i] = item_y[item_of[i]];
            }
        }

        // lowest item per host
        let mut low = vec![i64::MAX; h.len()];
        for (i, it) in items.iter().enumerate() {
            let v = it.host.0;
            low[v] = low[v].min(item_y[i]);
        }
        let max_y = item_y.iter().copied().max().unwrap_or(1);
        let mut rect_y = vec![(0i64, 0i64); h.len()];
        for &v in h.preorder() {
            let bottom = if h.is_leaf(v) { 0 } else { low[v.0] - 1 };
            let top = match h.parent(v) {
                None => max_y.max(1) + 1,
                Some(u) => rect_y[u.0].0,
            };
            rect_y[v.0] = (bottom, top);
        }

        let mut src_leaf = vec![usize::MAX; n];
        for v in ex.postorder() {
            let node = &ex.nodes[v];
            src_leaf[v] = match node.children.as_slice() {
                [] => v,
                [c] => src_leaf[*c],
                kids => {
                    let pick = kids
                        .iter()
                        .copied()
                        .find(|&c| h.is_ancestor_or_self(node.host, ex.nodes[c].host))
                        .unwrap_or(kids[0]);
                    src_leaf[pick]
                }
            };
        }

        let mut leaves_at = vec![Vec::new(); h.len()];
        for l in p.leaves() {
            leaves_at[rec.phi(l).expect("leaf").0].push(l);
        }
        let arcs: Vec<(NodeId, NodeId)> = p.arcs().collect();
        let switch = arcs.iter().map(|&(a, b)| rec.is_switch(a, b)).collect();
        Ok(Frame {
            host: h,
            parasite: p,
            expanded: ex,
            y,
            src_leaf,
            rect_y,
            leaves_at,
            arcs,
            switch,
        })
    }

    pub fn host(&self) -> &PhyloTree {
        &self.host
    }

    pub fn parasite(&self) -> &PhyloTree {
        &self.parasite
    }

    /// `y` of an original parasite node.
    pub fn y_of(&self, p: NodeId) -> i64 {
        self.y[self.expanded.of_original[p.0]]
    }

    pub fn host_rect_y(&self, h: NodeId) -> (i64, i64) {
        self.rect_y[h.0]
    }

    pub fn leaves_at(&self, h: NodeId) -> &[NodeId] {
        &self.leaves_at[h.0]
    }

    pub fn place(&self, arr: &Arrangement) -> Placement {
        let h = &*self.host;
        let mut host_leaves = Vec::with_capacity(h.leaf_count());
        let mut stack = vec![h.root()];
        while let Some(v) = stack.pop() {
            match arr.host_children[v.0] {
                Some([a, b]) => {
                    stack.push(b);
                    stack.push(a);
                }
                None => host_leaves.push(v),
            }
        }
        let mut x = vec![0i64; self.expanded.len()];
        let mut slot_lo = vec![i64::MAX; h.len()];
        let mut slot_hi = vec![i64::MIN; h.len()];
        let mut parasite_leaves = Vec::with_capacity(self.parasite.leaf_count());
        let mut slot = 0i64;
        for &hl in &host_leaves {
            let mut ls = self.leaves_at[hl.0].clone();
            ls.sort_by_key(|l| (arr.leaf_rank[l.0], l.0));
            slot_lo[hl.0] = slot;
            if ls.is_empty() {
                slot += 1;
            }
            for l in ls {
                x[self.expanded.of_original[l.0]] = 2 * slot + 1;
                parasite_leaves.push(l);
                slot += 1;
            }
            slot_hi[hl.0] = slot;
        }
        for v in h.postorder() {
            if let Some([a, b]) = h.children(v) {
                slot_lo[v.0] = slot_lo[a.0].min(slot_lo[b.0]);
                slot_hi[v.0] = slot_hi[a.0].max(slot_hi[b.0]);
            }
        }
        for i in 0..x.len() {
            x[i] = x[self.src_leaf[i]];
        }
        let rect_x = (0..h.len())
            .map(|v| (2 * slot_lo[v], 2 * slot_hi[v]))
            .collect();
        Placement {
            x,
            rect_x,
            host_leaves,
            parasite_leaves,
        }
    }

    /// Route geometry of every original arc, ids being parasite node ids.
    pub fn arc_geoms(&self, x: &[i64]) -> Vec<ArcGeom> {
        let of = &self.expanded.of_original;
        self.arcs
            .iter()
            .map(|&(a, b)| {
                let (ia, ib) = (of[a.0], of[b.0]);
                ArcGeom {
                    parent: a.0,
                    child: b.0,
                    from: (x[ia], self.y[ia]),
                    to: (x[ib], self.y[ib]),
                }
            })
            .collect()
    }

    pub fn to_layout(&self, placement: &Placement) -> HPLayout {
        let h = &*self.host;
        let p = &*self.parasite;
        let x = &placement.x;
        let mut rects = BTreeMap::new();
        for v in h.nodes() {
            let (x_left, x_right) = placement.rect_x[v.0];
            let (y_bottom, y_top) = self.rect_y[v.0];
            rects.insert(
                h.label(v).to_string(),
                Rect {
                    x_left,
                    x_right,
                    y_bottom,
                    y_top,
                },
            );
        }
        let mut points = BTreeMap::new();
        let mut dummies = BTreeMap::new();
        for (i, node) in self.expanded.nodes.iter().enumerate() {
            points.insert(
                node.label.clone(),
                Point {
                    x: x[i],
                    y: self.y[i],
                },
            );
            if let ExpandedOrigin::Loss {
                parent,
                child,
                index,
            } = node.origin
            {
                dummies.insert(
                    node.label.clone(),
                    DummyInfo {
                        parent: p.label(parent).to_string(),
                        child: p.label(child).to_string(),
                        index,
                        host: h.label(node.host).to_string(),
                    },
                );
            }
        }
        let geoms = self.arc_geoms(x);
        let routes: Vec<Route> = self
            .arcs
            .iter()
            .zip(&geoms)
            .zip(&self.switch)
            .map(|((&(a, b), g), &sw)| Route {
                parent: p.label(a).to_string(),
                child: p.label(b).to_string(),
                switch: sw,
                points: route_points(g),
            })
            .collect();
        let downward = geoms.iter().all(|g| g.from.1 > g.to.1);
        let mut layout = HPLayout {
            rects,
            points,
            dummies,
            routes,
            downward,
            crossings: Vec::new(),
            warnings: Vec::new(),
        };
        layout.recount_crossings();
        layout
    }
}

pub(crate) fn route_points(g: &ArcGeom) -> Vec<Point> {
    let start = Point {
        x: g.from.0,
        y: g.from.1,
    };
    let end = Point {
        x: g.to.0,
        y: g.to.1,
    };
    if g.from.0 == g.to.0 {
        vec![start, end]
    } else {
        vec![
            start,
            Point {
                x: g.to.0,
                y: g.from.1,
            },
            end,
        ]
    }
}

/// Crossings between routes, pairs listed in route order.
pub(crate) fn crossings_of(routes: &[Route]) -> (Vec<Crossing>, Vec<String>) {
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut geoms = Vec::with_capacity(routes.len());
    for r in routes {
        let n = ids.len();
        let a = *ids.entry(r.parent.as_str()).or_insert(n);
        let n = ids.len();
        let b = *ids.entry(r.child.as_str()).or_insert(n);
        let (Some(s), Some(e)) = (r.points.first(), r.points.last()) else {
            geoms.push(None);
            continue;
        };
        geoms.push(Some(ArcGeom {
            parent: a,
            child: b,
            from: (s.x, s.y),
            to: (e.x, e.y),
        }));
    }
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..routes.len() {
        for j in i + 1..routes.len() {
            let (Some(g1), Some(g2)) = (&geoms[i], &geoms[j]) else {
                continue;
            };
            if let Some((at, degenerate)) = arc_intersection(g1, g2) {
                let first = format!("{}->{}", routes[i].parent, routes[i].child);
                let second = format!("{}->{}", routes[j].parent, routes[j].child);
                if degenerate {
                    warnings.push(format!(
                        "arcs {first} and {second} overlap along a segment; counted once"
                    ));
                }
                out.push(Crossing {
                    first,
                    second,
                    at: Point { x: at.0, y: at.1 },
                    degenerate,
                });
            }
        }
    }
    (out, warnings)
}

fn longest_path_y(
    host: &PhyloTree,
    items: &[TimeItem],
    arcs: &[(usize, usize)],
    order: &[usize],
) -> Vec<i64> {
    let n = items.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in arcs {
        succ[a].push(b);
    }
    for a in 0..n {
        for b in 0..n {
            if host.is_proper_ancestor_unchecked(items[a].host, items[b].host) {
                succ[a].push(b);
            }
        }
    }
    let mut layer = vec![1i64; n];
    for &v in order.iter().rev() {
        for &w in &succ[v] {
            layer[v] = layer[v].max(layer[w] + 1);
        }
    }
    layer.iter().map(|l| 2 * l + 1).collect()
}
