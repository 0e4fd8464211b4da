//! Intersection tests for axis-aligned arc routes.

/// One parasite arc as drawn: an optional horizontal leg at the parent's
/// height followed by a vertical leg down to the child.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArcGeom {
    pub parent: usize,
    pub child: usize,
    pub from: (i64, i64),
    pub to: (i64, i64),
}

#[derive(Clone, Copy, Debug)]
struct Seg {
    a: (i64, i64),
    b: (i64, i64),
}

enum Meet {
    Point((i64, i64)),
    Overlap((i64, i64)),
}

impl ArcGeom {
    pub fn corner(&self) -> (i64, i64) {
        (self.to.0, self.from.1)
    }

    fn segments(&self) -> ([Seg; 2], usize) {
        let c = self.corner();
        if self.from.0 == self.to.0 {
            (
                [
                    Seg {
                        a: self.from,
                        b: self.to,
                    },
                    Seg {
                        a: self.to,
                        b: self.to,
                    },
                ],
                1,
            )
        } else {
            ([Seg { a: self.from, b: c }, Seg { a: c, b: self.to }], 2)
        }
    }
}

fn span(a: i64, b: i64) -> (i64, i64) {
    (a.min(b), a.max(b))
}

fn meet(s: &Seg, t: &Seg) -> Option<Meet> {
    let (sx, sy) = (span(s.a.0, s.b.0), span(s.a.1, s.b.1));
    let (tx, ty) = (span(t.a.0, t.b.0), span(t.a.1, t.b.1));
    let ox = (sx.0.max(tx.0), sx.1.min(tx.1));
    let oy = (sy.0.max(ty.0), sy.1.min(ty.1));
    if ox.0 > ox.1 || oy.0 > oy.1 {
        return None;
    }
    if ox.0 == ox.1 && oy.0 == oy.1 {
        return Some(Meet::Point((ox.0, oy.0)));
    }
    // a common stretch of positive length: both segments lie on one line
    Some(Meet::Overlap((ox.0, oy.0)))
}

/// Where two arcs meet outside their shared endpoints. Returns the
/// lexicographically smallest such point and whether the arcs overlap
/// along a segment.
pub fn arc_intersection(x: &ArcGeom, y: &ArcGeom) -> Option<((i64, i64), bool)> {
    let mut shared: [Option<(i64, i64)>; 2] = [None, None];
    let mut k = 0;
    for (xi, xp) in [(x.parent, x.from), (x.child, x.to)] {
        if xi == y.parent || xi == y.child {
            shared[k] = Some(xp);
            k += 1;
        }
    }
    let (xs, xn) = x.segments();
    let (ys, yn) = y.segments();
    let mut best: Option<((i64, i64), bool)> = None;
    let mut degenerate = false;
    for s in &xs[..xn] {
        for t in &ys[..yn] {
            match meet(s, t) {
                None => {}
                Some(Meet::Point(p)) => {
                    if shared.contains(&Some(p)) {
                        continue;
                    }
                    if best.is_none_or(|(q, _)| p < q) {
                        best = Some((p, false));
                    }
                }
                Some(Meet::Overlap(p)) => {
                    degenerate = true;
                    if best.is_none_or(|(q, _)| p < q) {
                        best = Some((p, false));
                    }
                }
            }
        }
    }
    best.map(|(p, _)| (p, degenerate))
}

/// Number of crossing arc pairs.
pub fn count_pairs(arcs: &[ArcGeom]) -> usize {
    let mut n = 0;
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            if arc_intersection(&arcs[i], &arcs[j]).is_some() {
                n += 1;
            }
        }
    }
    n
}

/// Like [`count_pairs`] but stops once the count exceeds `limit`.
pub fn count_pairs_bounded(arcs: &[ArcGeom], limit: usize) -> usize {
    let mut n = 0;
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            if arc_intersection(&arcs[i], &arcs[j]).is_some() {
                n += 1;
                if n > limit {
                    return n;
                }
            }
        }
    }
    n
}
