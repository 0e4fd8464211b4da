use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::reconcile::Reconciliation;

use super::{HPLayout, LayoutError, Point};

/// Host tree above the bottom line, parasite tree mirrored below it, and
/// straight tangles between leaves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TanglegramDrawing {
    /// Host nodes at the centres of their rectangles.
    pub host_points: BTreeMap<String, Point>,
    /// Parasite nodes reflected across `y = 0`.
    pub parasite_points: BTreeMap<String, Point>,
    /// `(parasite leaf, host leaf)` pairs.
    pub tangles: Vec<(String, String)>,
    pub host_leaf_order: Vec<String>,
    pub parasite_leaf_order: Vec<String>,
    /// Pairs of tangles whose leaf orders are inverted.
    pub crossing_tangles: usize,
}

impl TanglegramDrawing {
    pub fn is_planar(&self) -> bool {
        self.crossing_tangles == 0
    }
}

/// Mirrors a crossing-free HP-drawing into a tanglegram drawing.
pub fn hp_to_tanglegram(
    layout: &HPLayout,
    rec: &Reconciliation,
) -> Result<TanglegramDrawing, LayoutError> {
    if !layout.crossings.is_empty() {
        return Err(LayoutError::HasCrossings(layout.crossings.len()));
    }
    let h = rec.host();
    let p = rec.parasite();
    let mut host_points = BTreeMap::new();
    for (label, r) in &layout.rects {
        host_points.insert(
            label.clone(),
            Point {
                x: (r.x_left + r.x_right) / 2,
                y: (r.y_bottom + r.y_top) / 2,
            },
        );
    }
    let mut parasite_points = BTreeMap::new();
    for v in p.nodes() {
        let label = p.label(v);
        if let Some(pt) = layout.points.get(label) {
            parasite_points.insert(label.to_string(), Point { x: pt.x, y: -pt.y });
        }
    }
    let mut host_leaves: Vec<(i64, String)> = h
        .leaves()
        .map(|l| {
            let label = h.label(l).to_string();
            (layout.rects[&label].x_left, label)
        })
        .collect();
    host_leaves.sort();
    let mut parasite_leaves: Vec<(i64, String)> = p
        .leaves()
        .map(|l| {
            let label = p.label(l).to_string();
            (layout.points[&label].x, label)
        })
        .collect();
    parasite_leaves.sort();
    let host_pos: BTreeMap<&str, usize> = host_leaves
        .iter()
        .enumerate()
        .map(|(i, (_, l))| (l.as_str(), i))
        .collect();
    let mut tangles = Vec::new();
    let mut ends = Vec::new();
    for (i, (_, pl)) in parasite_leaves.iter().enumerate() {
        let v = p.node(pl).expect("leaf");
        let hl = h.label(rec.phi(v).expect("leaf map")).to_string();
        ends.push((host_pos[hl.as_str()] as i64, i as i64));
        tangles.push((pl.clone(), hl));
    }
    let mut crossing_tangles = 0;
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            if (ends[i].0 - ends[j].0) * (ends[i].1 - ends[j].1) < 0 {
                crossing_tangles += 1;
            }
        }
    }
    Ok(TanglegramDrawing {
        host_points,
        parasite_points,
        tangles,
        host_leaf_order: host_leaves.into_iter().map(|(_, l)| l).collect(),
        parasite_leaf_order: parasite_leaves.into_iter().map(|(_, l)| l).collect(),
        crossing_tangles,
    })
}
