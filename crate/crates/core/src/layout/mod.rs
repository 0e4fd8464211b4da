//! HP-drawings: host rectangles tiled as an icicle, parasite nodes on odd
//! grid points inside them, arcs routed horizontally then vertically.

mod canonical;
mod check;
pub mod crossings;
mod shs;
mod tanglegram;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planar::{
    build_union_graph, leaf_order_from_embedding, maximal_planar_subgraph, test_planarity,
    LeafOrder, PlanarError,
};
use crate::reconcile::{ReconError, Reconciliation};

pub use canonical::{Arrangement, Frame, Placement};
pub use check::{check_layout, LayoutViolation, ValidityReport};
pub use shs::{shorten_host_switch, shs_arrangement};
pub use tanglegram::{hp_to_tanglegram, TanglegramDrawing};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error(transparent)]
    Reconciliation(#[from] ReconError),
    #[error(transparent)]
    Planarity(#[from] PlanarError),
    #[error("reconciliation is not time-consistent; no downward drawing exists")]
    NotTimeConsistent,
    #[error("union graph of the instance is not planar, so no planar downward drawing exists")]
    NotPlanar,
    #[error("layout has {0} crossing(s)")]
    HasCrossings(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x_left: i64,
    pub x_right: i64,
    pub y_bottom: i64,
    pub y_top: i64,
}

impl Rect {
    pub fn contains_strictly(&self, p: Point) -> bool {
        self.x_left < p.x && p.x < self.x_right && self.y_bottom < p.y && p.y < self.y_top
    }

    pub fn interiors_overlap(&self, o: &Rect) -> bool {
        self.x_left < o.x_right
            && o.x_left < self.x_right
            && self.y_bottom < o.y_top
            && o.y_bottom < self.y_top
    }
}

/// A loss node inserted on a parasite arc.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DummyInfo {
    pub parent: String,
    pub child: String,
    pub index: usize,
    pub host: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub parent: String,
    pub child: String,
    pub switch: bool,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub first: String,
    pub second: String,
    pub at: Point,
    pub degenerate: bool,
}

/// A drawing keyed by node labels. Loss nodes appear in `points` under
/// labels of the form `parent~child#i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HPLayout {
    pub rects: BTreeMap<String, Rect>,
    pub points: BTreeMap<String, Point>,
    pub dummies: BTreeMap<String, DummyInfo>,
    /// One route per arc of the original parasite tree.
    pub routes: Vec<Route>,
    pub downward: bool,
    pub crossings: Vec<Crossing>,
    pub warnings: Vec<String>,
}

impl HPLayout {
    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    /// Recomputes `crossings` (and the overlap warnings) from the routes.
    pub fn recount_crossings(&mut self) {
        let (c, w) = canonical::crossings_of(&self.routes);
        self.crossings = c;
        self.warnings
            .retain(|s| !s.contains("overlap along a segment"));
        self.warnings.extend(w);
    }

    /// Rectangles sorted left to right, then top to bottom.
    pub fn rects_sorted(&self) -> Vec<(&str, &Rect)> {
        let mut v: Vec<_> = self.rects.iter().map(|(k, r)| (k.as_str(), r)).collect();
        v.sort_by_key(|(k, r)| (r.x_left, -r.y_top, *k));
        v
    }
}

/// Number of crossing arc pairs and the pairs themselves, recomputed from
/// the routes.
pub fn count_crossings(layout: &HPLayout) -> (usize, Vec<(String, String)>) {
    let (c, _) = canonical::crossings_of(&layout.routes);
    let pairs: Vec<_> = c.into_iter().map(|c| (c.first, c.second)).collect();
    (pairs.len(), pairs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayoutOptions {
    /// Longest-path layering of `y` instead of one level per node.
    pub compact_y: bool,
    /// Let the host-switch heuristic hand planar instances to the planar
    /// construction.
    pub planar_shortcut: bool,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        LayoutOptions {
            compact_y: false,
            planar_shortcut: true,
        }
    }
}

pub(crate) fn arrangement_from_order(rec: &Reconciliation, order: &LeafOrder) -> Arrangement {
    Arrangement {
        host_children: order.host_children.clone(),
        leaf_rank: order.sigma_rank(rec.parasite().len()),
    }
}

/// The crossing-free construction for planar instances.
pub fn planar_draw(rec: &Reconciliation, opts: LayoutOptions) -> Result<HPLayout, LayoutError> {
    let frame = Frame::new(rec, opts.compact_y)?;
    let g = build_union_graph(rec.host_arc(), rec.parasite_arc(), rec.phi_vec())?;
    let emb = test_planarity(&g).ok_or(LayoutError::NotPlanar)?;
    let order = leaf_order_from_embedding(&emb, &g)?;
    planar_draw_with(&frame, rec, &order)
}

/// Places `rec` with host child orders and leaf order `order` taken from a
/// planar embedding.
pub fn planar_draw_with(
    frame: &Frame,
    rec: &Reconciliation,
    order: &LeafOrder,
) -> Result<HPLayout, LayoutError> {
    let arr = arrangement_from_order(rec, order);
    Ok(frame.to_layout(&frame.place(&arr)))
}

/// Draws the greedy maximal planar subgraph without crossings, then routes
/// the arcs that did not fit.
pub fn search_maximal_planar(
    rec: &Reconciliation,
    opts: LayoutOptions,
) -> Result<HPLayout, LayoutError> {
    let frame = Frame::new(rec, opts.compact_y)?;
    let mps = maximal_planar_subgraph(rec)?;
    let order = leaf_order_from_embedding(&mps.embedding, &mps.planar_subgraph)?;
    let arr = arrangement_from_order(rec, &order);
    let mut layout = frame.to_layout(&frame.place(&arr));
    if !mps.non_planar_arcs.is_empty() {
        let p = rec.parasite();
        let names: Vec<String> = mps
            .non_planar_arcs
            .iter()
            .map(|&(a, b)| format!("{}->{}", p.label(a), p.label(b)))
            .collect();
        layout.warnings.push(format!(
            "arcs routed after the planar phase: {}",
            names.join(", ")
        ));
    }
    Ok(layout)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Planar,
    Shs,
    Smp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Planar => "planar",
            Algorithm::Shs => "shs",
            Algorithm::Smp => "smp",
        }
    }
}

pub fn run_algorithm(
    algo: Algorithm,
    rec: &Reconciliation,
    opts: LayoutOptions,
) -> Result<HPLayout, LayoutError> {
    match algo {
        Algorithm::Planar => planar_draw(rec, opts),
        Algorithm::Shs => shorten_host_switch(rec, opts),
        Algorithm::Smp => search_maximal_planar(rec, opts),
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::tree::parse_newick;
    use std::sync::Arc;

    pub(crate) fn rec(
        h: &str,
        p: &str,
        phi: &[(&str, &str)],
        gamma: &[(&str, &str)],
    ) -> Reconciliation {
        let host = Arc::new(parse_newick(h).unwrap());
        let par = Arc::new(parse_newick(p).unwrap());
        let s = |v: &[(&str, &str)]| -> Vec<(String, String)> {
            v.iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect()
        };
        Reconciliation::from_labels(host, par, &s(phi), &s(gamma)).unwrap()
    }

    #[test]
    fn single_leaf_instance() {
        let r = rec("a;", "x;", &[("x", "a")], &[]);
        let l = planar_draw(&r, LayoutOptions::default()).unwrap();
        assert_eq!(l.points["x"], Point { x: 1, y: 1 });
        assert_eq!(l.rects.len(), 1);
        assert!(l.routes.is_empty());
        assert!(check_layout(&l, &r).is_valid());
    }

    #[test]
    fn cherry_cospeciation() {
        let r = rec(
            "(a,b)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "b")],
            &[("q", "r")],
        );
        let l = planar_draw(&r, LayoutOptions::default()).unwrap();
        assert_eq!(l.crossing_count(), 0);
        assert!(l.downward);
        let q = l.points["q"];
        assert!(q.y > l.points["x"].y && q.y > l.points["y"].y);
        assert!(l.rects["r"].contains_strictly(q));
        let report = check_layout(&l, &r);
        assert!(report.is_valid(), "{report:?}");
    }

    #[test]
    fn empty_host_gets_one_slot() {
        let r = rec(
            "((a,b)u,c)r;",
            "(x,y)q;",
            &[("x", "a"), ("y", "c")],
            &[("q", "r")],
        );
        let l = planar_draw(&r, LayoutOptions::default()).unwrap();
        let b = l.rects["b"];
        assert_eq!(b.x_right - b.x_left, 2);
        assert!(check_layout(&l, &r).is_valid());
    }

    #[test]
    fn compact_y_keeps_validity() {
        let r = rec(
            "((a,b)u,(c,d)v)r;",
            "(((x1,x2)p1,x3)p2,x4)p3;",
            &[("x1", "a"), ("x2", "b"), ("x3", "c"), ("x4", "d")],
            &[("p1", "u"), ("p2", "r"), ("p3", "r")],
        );
        for compact in [false, true] {
            let opts = LayoutOptions {
                compact_y: compact,
                ..Default::default()
            };
            for algo in [Algorithm::Planar, Algorithm::Shs, Algorithm::Smp] {
                let l = run_algorithm(algo, &r, opts).unwrap();
                let rep = check_layout(&l, &r);
                assert!(rep.is_valid(), "{algo:?} compact={compact}: {rep:?}");
                assert_eq!(l.crossing_count(), 0);
            }
        }
    }

    #[test]
    fn count_crossings_example() {
        let mk = |p: &str, c: &str, pts: &[(i64, i64)]| Route {
            parent: p.into(),
            child: c.into(),
            switch: false,
            points: pts.iter().map(|&(x, y)| Point { x, y }).collect(),
        };
        let layout = HPLayout {
            rects: BTreeMap::new(),
            points: BTreeMap::new(),
            dummies: BTreeMap::new(),
            routes: vec![
                mk("a0", "a1", &[(1, 5), (7, 5), (7, 1)]),
                mk("b0", "b1", &[(5, 7), (3, 7), (3, 1)]),
            ],
            downward: true,
            crossings: vec![],
            warnings: vec![],
        };
        assert_eq!(count_crossings(&layout).0, 1);
    }
}
