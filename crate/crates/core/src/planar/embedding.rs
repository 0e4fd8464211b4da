use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// A combinatorial embedding: the clockwise cyclic order of neighbours
/// around every vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarEmbedding {
    pub rotation: Vec<Vec<usize>>,
    /// Index into [`PlanarEmbedding::faces`] of the face chosen as outer.
    pub outer_face: usize,
}

impl PlanarEmbedding {
    pub fn vertex_count(&self) -> usize {
        self.rotation.len()
    }

    pub fn edge_count(&self) -> usize {
        self.rotation.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn position(&self, v: usize, u: usize) -> Option<usize> {
        self.rotation[v].iter().position(|&w| w == u)
    }

    /// Neighbour following `u` clockwise around `v`.
    pub fn cw_next(&self, v: usize, u: usize) -> Option<usize> {
        let r = &self.rotation[v];
        let i = self.position(v, u)?;
        Some(r[(i + 1) % r.len()])
    }

    /// Neighbour preceding `u` clockwise around `v`.
    pub fn ccw_next(&self, v: usize, u: usize) -> Option<usize> {
        let r = &self.rotation[v];
        let i = self.position(v, u)?;
        Some(r[(i + r.len() - 1) % r.len()])
    }

    /// Every edge appears in the rotation of both endpoints.
    pub fn is_consistent(&self) -> bool {
        let n = self.rotation.len();
        for (v, r) in self.rotation.iter().enumerate() {
            for &w in r {
                if w >= n || w == v || !self.rotation[w].contains(&v) {
                    return false;
                }
            }
            let mut sorted = r.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != r.len() {
                return false;
            }
        }
        true
    }

    /// Faces as cyclic lists of directed half-edges. The face to the right
    /// of `(u, v)` continues with `(v, ccw_next(v, u))`.
    pub fn faces(&self) -> Vec<Vec<(usize, usize)>> {
        let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
        let mut faces = Vec::new();
        for (v, r) in self.rotation.iter().enumerate() {
            for &w in r {
                if seen.contains_key(&(v, w)) {
                    continue;
                }
                let mut face = Vec::new();
                let (mut a, mut b) = (v, w);
                loop {
                    seen.insert((a, b), ());
                    face.push((a, b));
                    let c = self.ccw_next(b, a).expect("consistent rotation");
                    a = b;
                    b = c;
                    if (a, b) == (v, w) {
                        break;
                    }
                }
                faces.push(face);
            }
        }
        faces
    }

    /// Connected components, counted over vertices with at least one
    /// neighbour plus isolated vertices.
    pub fn component_count(&self) -> usize {
        let n = self.rotation.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &self.rotation[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// Euler's formula summed over components (`V - E + F = 2` each; an
    /// isolated vertex has no face and contributes 1).
    pub fn satisfies_euler(&self) -> bool {
        if !self.is_consistent() {
            return false;
        }
        let v = self.vertex_count() as i64;
        let e = self.edge_count() as i64;
        let f = self.faces().len() as i64;
        let c = self.component_count() as i64;
        let isolated = self.rotation.iter().filter(|r| r.is_empty()).count() as i64;
        // faces are traced per component, so each non-trivial component
        // contributes its own outer face
        v - e + f == 2 * (c - isolated) + isolated
    }

    /// Reverses every rotation.
    pub fn mirrored(&self) -> PlanarEmbedding {
        PlanarEmbedding {
            rotation: self
                .rotation
                .iter()
                .map(|r| r.iter().rev().copied().collect())
                .collect(),
            outer_face: self.outer_face,
        }
    }
}

/// Doubly linked cyclic neighbour lists used while the embedding is built.
pub(crate) struct HalfEdgeRing {
    cw: HashMap<(usize, usize), usize>,
    ccw: HashMap<(usize, usize), usize>,
    first: Vec<Option<usize>>,
}

impl HalfEdgeRing {
    pub fn new(n: usize) -> Self {
        HalfEdgeRing {
            cw: HashMap::new(),
            ccw: HashMap::new(),
            first: vec![None; n],
        }
    }

    /// Inserts `w` clockwise right after `reference` around `v`.
    pub fn add_cw(&mut self, v: usize, w: usize, reference: Option<usize>) {
        match reference {
            None => {
                self.cw.insert((v, w), w);
                self.ccw.insert((v, w), w);
                self.first[v] = Some(w);
            }
            Some(r) => {
                let after = self.cw[&(v, r)];
                self.cw.insert((v, r), w);
                self.cw.insert((v, w), after);
                self.ccw.insert((v, after), w);
                self.ccw.insert((v, w), r);
            }
        }
    }

    /// Inserts `w` counter-clockwise right before `reference` around `v`.
    pub fn add_ccw(&mut self, v: usize, w: usize, reference: Option<usize>) {
        match reference {
            None => self.add_cw(v, w, None),
            Some(r) => {
                let before = self.ccw[&(v, r)];
                self.add_cw(v, w, Some(before));
                if self.first[v] == Some(r) {
                    self.first[v] = Some(w);
                }
            }
        }
    }

    pub fn add_first(&mut self, v: usize, w: usize) {
        let f = self.first[v];
        match f {
            Some(_) => self.add_ccw(v, w, f),
            None => self.add_cw(v, w, None),
        }
    }

    pub fn into_rotation(self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.first.len());
        for (v, f) in self.first.iter().enumerate() {
            let mut r = Vec::new();
            if let Some(start) = *f {
                let mut cur = start;
                loop {
                    r.push(cur);
                    cur = self.cw[&(v, cur)];
                    if cur == start {
                        break;
                    }
                }
            }
            out.push(r);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_has_two_faces() {
        let e = PlanarEmbedding {
            rotation: vec![vec![1, 2], vec![2, 0], vec![0, 1]],
            outer_face: 0,
        };
        assert!(e.is_consistent());
        assert_eq!(e.faces().len(), 2);
        assert!(e.satisfies_euler());
    }

    #[test]
    fn ring_insertions() {
        let mut ring = HalfEdgeRing::new(1);
        ring.add_cw(0, 1, None);
        ring.add_cw(0, 2, Some(1));
        ring.add_ccw(0, 3, Some(1));
        ring.add_first(0, 4);
        let rot = ring.into_rotation();
        // cyclic order 4 -> 1 -> 2 -> 3? 3 was placed before 1, then 4 before 3
        let r = &rot[0];
        let pos = |x| r.iter().position(|&y| y == x).unwrap();
        let n = r.len();
        assert_eq!(r[(pos(1) + 1) % n], 2);
        assert_eq!(r[(pos(3) + 1) % n], 1);
        assert_eq!(r[(pos(4) + 1) % n], 3);
        assert_eq!(r[0], 4);
    }
}
