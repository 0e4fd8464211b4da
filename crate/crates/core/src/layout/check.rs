use serde::{Deserialize, Serialize};

use crate::reconcile::Reconciliation;

use super::{canonical, HPLayout, Point};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutViolation {
    Missing {
        what: String,
        label: String,
    },
    Parity {
        what: String,
        label: String,
    },
    Containment {
        parasite: String,
        host: String,
    },
    Tiling {
        host: String,
        detail: String,
    },
    RouteShape {
        parent: String,
        child: String,
        detail: String,
    },
    Downward {
        parent: String,
        child: String,
    },
    DownwardFlag {
        claimed: bool,
        actual: bool,
    },
    StaleCrossings {
        stored: usize,
        recounted: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub violations: Vec<LayoutViolation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn odd(v: i64) -> bool {
    v.rem_euclid(2) == 1
}

fn even(v: i64) -> bool {
    v.rem_euclid(2) == 0
}

/// Checks parity, containment, tiling, route shape, the downward flag and
/// the stored crossing list.
pub fn check_layout(layout: &HPLayout, rec: &Reconciliation) -> ValidityReport {
    let h = rec.host();
    let p = rec.parasite();
    let mut out = Vec::new();
    let tiling = |host: &str, detail: String| LayoutViolation::Tiling {
        host: host.to_string(),
        detail,
    };

    for v in h.nodes() {
        let label = h.label(v);
        let Some(r) = layout.rects.get(label) else {
            out.push(LayoutViolation::Missing {
                what: "rectangle".into(),
                label: label.into(),
            });
            continue;
        };
        if ![r.x_left, r.x_right, r.y_bottom, r.y_top]
            .into_iter()
            .all(even)
        {
            out.push(LayoutViolation::Parity {
                what: "rectangle".into(),
                label: label.into(),
            });
        }
        if r.x_right <= r.x_left || r.y_top <= r.y_bottom {
            out.push(tiling(label, "empty rectangle".into()));
        }
        if h.is_leaf(v) && r.y_bottom != 0 {
            out.push(tiling(label, "leaf does not reach the bottom line".into()));
        }
        if let Some([a, b]) = h.children(v) {
            let (Some(ra), Some(rb)) = (layout.rects.get(h.label(a)), layout.rects.get(h.label(b)))
            else {
                continue;
            };
            let (l, rr) = if ra.x_left <= rb.x_left {
                (ra, rb)
            } else {
                (rb, ra)
            };
            if l.x_left != r.x_left || l.x_right != rr.x_left || rr.x_right != r.x_right {
                out.push(tiling(
                    label,
                    "children do not partition the x-interval".into(),
                ));
            }
            if ra.y_top != r.y_bottom || rb.y_top != r.y_bottom {
                out.push(tiling(label, "child top is not on the bottom side".into()));
            }
        }
    }
    let rects: Vec<_> = layout.rects.iter().collect();
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            if rects[i].1.interiors_overlap(rects[j].1) {
                out.push(tiling(
                    rects[i].0,
                    format!("interior overlaps `{}`", rects[j].0),
                ));
            }
        }
    }
    if let Some(root) = layout.rects.get(h.label(h.root())) {
        let top = layout.rects.values().map(|r| r.y_top).max().unwrap_or(0);
        let left = layout.rects.values().map(|r| r.x_left).min().unwrap_or(0);
        let right = layout.rects.values().map(|r| r.x_right).max().unwrap_or(0);
        if root.y_top != top || root.x_left != left || root.x_right != right {
            out.push(tiling(
                h.label(h.root()),
                "root does not span the top".into(),
            ));
        }
    }

    // every parasite point and loss node
    let mut host_of: Vec<(&str, String)> = p
        .nodes()
        .map(|v| (p.label(v), h.label(rec.gamma(v)).to_string()))
        .collect();
    for (label, d) in &layout.dummies {
        host_of.push((label.as_str(), d.host.clone()));
    }
    for (label, host) in &host_of {
        let Some(&pt) = layout.points.get(*label) else {
            out.push(LayoutViolation::Missing {
                what: "point".into(),
                label: label.to_string(),
            });
            continue;
        };
        if !odd(pt.x) || !odd(pt.y) {
            out.push(LayoutViolation::Parity {
                what: "point".into(),
                label: label.to_string(),
            });
        }
        match layout.rects.get(host) {
            Some(r) if r.contains_strictly(pt) => {}
            _ => out.push(LayoutViolation::Containment {
                parasite: label.to_string(),
                host: host.clone(),
            }),
        }
    }

    let mut actual_down = true;
    let mut seen = 0;
    for (a, b) in p.arcs() {
        let (pa, pb) = (p.label(a), p.label(b));
        let Some(route) = layout
            .routes
            .iter()
            .find(|r| r.parent == pa && r.child == pb)
        else {
            out.push(LayoutViolation::Missing {
                what: "route".into(),
                label: format!("{pa}->{pb}"),
            });
            continue;
        };
        seen += 1;
        let (Some(&s), Some(&e)) = (layout.points.get(pa), layout.points.get(pb)) else {
            continue;
        };
        let shape = |detail: &str| LayoutViolation::RouteShape {
            parent: pa.into(),
            child: pb.into(),
            detail: detail.into(),
        };
        let pts = &route.points;
        let ok_ends = pts.first() == Some(&s) && pts.last() == Some(&e);
        if !ok_ends {
            out.push(shape("route does not join its endpoints"));
        } else if s.x == e.x {
            if pts.len() != 2 {
                out.push(shape("aligned endpoints need one vertical segment"));
            }
        } else if pts.len() != 3 || pts[1] != (Point { x: e.x, y: s.y }) {
            out.push(shape("expected horizontal then vertical"));
        }
        if s.y <= e.y {
            actual_down = false;
            if layout.downward {
                out.push(LayoutViolation::Downward {
                    parent: pa.into(),
                    child: pb.into(),
                });
            }
        }
    }
    if seen != layout.routes.len() {
        out.push(LayoutViolation::Missing {
            what: "route".into(),
            label: "<routes for arcs not in the parasite tree>".into(),
        });
    }
    if layout.downward != actual_down {
        out.push(LayoutViolation::DownwardFlag {
            claimed: layout.downward,
            actual: actual_down,
        });
    }
    let (recount, _) = canonical::crossings_of(&layout.routes);
    if recount.len() != layout.crossings.len() {
        out.push(LayoutViolation::StaleCrossings {
            stored: layout.crossings.len(),
            recounted: recount.len(),
        });
    }
    ValidityReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::tests::rec;
    use crate::layout::{planar_draw, LayoutOptions};

    fn sample() -> (HPLayout, Reconciliation) {
        let r = rec(
            "((a,b)u,c)r;",
            "((x,y)q1,z)q0;",
            &[("x", "a"), ("y", "b"), ("z", "c")],
            &[("q1", "u"), ("q0", "r")],
        );
        (planar_draw(&r, LayoutOptions::default()).unwrap(), r)
    }

    #[test]
    fn clean_layout_passes() {
        let (l, r) = sample();
        assert_eq!(check_layout(&l, &r).violations, vec![]);
    }

    #[test]
    fn even_parasite_coordinate_is_flagged() {
        let (mut l, r) = sample();
        l.points.get_mut("x").unwrap().x += 1;
        let rep = check_layout(&l, &r);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, LayoutViolation::Parity { label, .. } if label == "x")));
    }

    #[test]
    fn broken_partition_is_flagged() {
        let (mut l, r) = sample();
        l.rects.get_mut("a").unwrap().x_right += 2;
        let rep = check_layout(&l, &r);
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, LayoutViolation::Tiling { host, .. } if host == "u")));
    }
}
