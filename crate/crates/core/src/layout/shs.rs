//! Host-switch shortening heuristic: pick host child orders that keep
//! host-switch arcs short, then order parasite leaves inside host leaves by
//! where their parents sit.

use crate::planar::{build_union_graph, leaf_order_from_embedding, test_planarity};
use crate::reconcile::Reconciliation;
use crate::tree::{NodeId, PhyloTree};

use super::canonical::{Arrangement, Frame};
use super::{arrangement_from_order, HPLayout, LayoutError, LayoutOptions};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    None,
    Left,
    Right,
}

enum Task {
    Visit(NodeId),
    Mark(NodeId, Side),
}

pub fn shorten_host_switch(
    rec: &Reconciliation,
    opts: LayoutOptions,
) -> Result<HPLayout, LayoutError> {
    let frame = Frame::new(rec, opts.compact_y)?;
    if opts.planar_shortcut {
        let g = build_union_graph(rec.host_arc(), rec.parasite_arc(), rec.phi_vec())?;
        if let Some(emb) = test_planarity(&g) {
            let order = leaf_order_from_embedding(&emb, &g)?;
            let arr = arrangement_from_order(rec, &order);
            return Ok(frame.to_layout(&frame.place(&arr)));
        }
    }
    let arr = shs_arrangement(rec, &frame);
    Ok(frame.to_layout(&frame.place(&arr)))
}

/// Subtree of every node as a range of a preorder listing.
fn preorder_ranges(h: &PhyloTree) -> (Vec<NodeId>, Vec<(usize, usize)>) {
    let order = h.preorder().to_vec();
    let mut pos = vec![0usize; h.len()];
    for (i, v) in order.iter().enumerate() {
        pos[v.0] = i;
    }
    let mut size = vec![1usize; h.len()];
    for v in h.postorder() {
        if let Some([a, b]) = h.children(v) {
            size[v.0] = 1 + size[a.0] + size[b.0];
        }
    }
    let ranges = (0..h.len()).map(|v| (pos[v], pos[v] + size[v])).collect();
    (order, ranges)
}

/// Host child orders by the switch-count comparison, parasite leaves by
/// the side and height of their parents.
pub fn shs_arrangement(rec: &Reconciliation, frame: &Frame) -> Arrangement {
    let h = rec.host();
    let p = rec.parasite();
    let switches: Vec<(NodeId, NodeId)> = rec
        .switch_arcs()
        .into_iter()
        .map(|(a, b)| (rec.gamma(a), rec.gamma(b)))
        .collect();
    let (pre, range) = preorder_ranges(h);
    let mut side = vec![Side::None; h.len()];
    let mut host_children: Vec<Option<[NodeId; 2]>> = h.nodes().map(|v| h.children(v)).collect();
    let mut tasks = vec![Task::Visit(h.root())];
    while let Some(t) = tasks.pop() {
        match t {
            Task::Mark(u, s) => {
                let (lo, hi) = range[u.0];
                for w in &pre[lo..hi] {
                    side[w.0] = s;
                }
            }
            Task::Visit(v) => {
                let Some([v1, v2]) = h.children(v) else {
                    continue;
                };
                // counts[i][0] = towards the left side, counts[i][1] = right
                let mut counts = [[0usize; 2]; 2];
                for &(ga, gb) in &switches {
                    for (i, vi) in [v1, v2].into_iter().enumerate() {
                        for (k, want) in [Side::Left, Side::Right].into_iter().enumerate() {
                            let hit = (h.is_ancestor_or_self(vi, ga) && side[gb.0] == want)
                                || (h.is_ancestor_or_self(vi, gb) && side[ga.0] == want);
                            if hit {
                                counts[i][k] += 1;
                            }
                        }
                    }
                }
                let (left, right) = if counts[0][1] + counts[1][0] > counts[1][1] + counts[0][0] {
                    (v2, v1)
                } else {
                    (v1, v2)
                };
                host_children[v.0] = Some([left, right]);
                tasks.push(Task::Visit(right));
                tasks.push(Task::Mark(right, Side::None));
                tasks.push(Task::Mark(left, Side::Left));
                tasks.push(Task::Visit(left));
                tasks.push(Task::Mark(right, Side::Right));
            }
        }
    }

    // temporary x: left edge of the host's rectangle, whatever the leaf order
    let provisional = Arrangement {
        host_children: host_children.clone(),
        leaf_rank: vec![0; p.len()],
    };
    let placed = frame.place(&provisional);
    let temp_x = |v: NodeId| placed.rect_x[v.0].0;

    let mut leaf_rank = vec![usize::MAX; p.len()];
    for hl in h.leaves() {
        let here = temp_x(hl);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &l in frame.leaves_at(hl) {
            match p.parent(l) {
                Some(q) if temp_x(rec.gamma(q)) < here => left.push((frame.y_of(q), l)),
                Some(q) => right.push((frame.y_of(q), l)),
                None => right.push((i64::MAX, l)),
            }
        }
        left.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| p.label(a.1).cmp(p.label(b.1))));
        right.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| p.label(a.1).cmp(p.label(b.1))));
        for (i, (_, l)) in left.iter().chain(right.iter()).enumerate() {
            leaf_rank[l.0] = i;
        }
    }
    Arrangement {
        host_children,
        leaf_rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::check_layout;
    use crate::layout::tests::rec;

    #[test]
    fn switch_pulls_target_next_to_source() {
        // q sits on a and sends a switch to d; a's sibling b is irrelevant.
        // At the root the sides are empty; at u, child a has the switch
        // towards the right side (v), so a goes right.
        let r = rec(
            "((a,b)u,(c,d)v)r;",
            "((x,(y,z)q)s,w)t;",
            &[("x", "b"), ("y", "a"), ("z", "d"), ("w", "c")],
            &[("q", "a"), ("s", "u"), ("t", "r")],
        );
        assert!(r.validate().is_valid());
        let frame = Frame::new(&r, false).unwrap();
        let arr = shs_arrangement(&r, &frame);
        let h = r.host();
        let [l, rr] = arr.host_children[h.node("u").unwrap().0].unwrap();
        assert_eq!((h.label(l), h.label(rr)), ("b", "a"));
        // at v the switch source is now on the left side, so d goes left
        let [l, _] = arr.host_children[h.node("v").unwrap().0].unwrap();
        assert_eq!(h.label(l), "d");
        let layout = frame.to_layout(&frame.place(&arr));
        assert!(check_layout(&layout, &r).is_valid());
    }

    #[test]
    fn tie_keeps_input_order() {
        let r = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "r")],
        );
        let frame = Frame::new(&r, false).unwrap();
        let arr = shs_arrangement(&r, &frame);
        let h = r.host();
        assert_eq!(arr.host_children[h.root().0], h.children(h.root()));
    }

    #[test]
    fn literal_heuristic_can_cross_on_planar_input() {
        let r = rec(
            "((a,b)u,c)r;",
            "((x,y)q1,z)q0;",
            &[("x", "a"), ("y", "c"), ("z", "b")],
            &[("q1", "r"), ("q0", "r")],
        );
        let frame = Frame::new(&r, false).unwrap();
        let literal = frame.to_layout(&frame.place(&shs_arrangement(&r, &frame)));
        assert!(literal.crossing_count() >= 1);
        let l = shorten_host_switch(&r, LayoutOptions::default()).unwrap();
        assert_eq!(l.crossing_count(), 0);
    }
}
