//! Left-right planarity test with embedding extraction.
//!
//! Follows the Brandes formulation of the de Fraysseix–Rosenstiehl
//! criterion: a DFS orientation computes lowpoints and nesting depths, a
//! second DFS maintains a stack of conflict pairs of return-edge intervals,
//! and a final DFS turns the resolved sides into a rotation system.

use super::embedding::{HalfEdgeRing, PlanarEmbedding};

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Interval {
    low: usize,
    high: usize,
}

impl Interval {
    const EMPTY: Interval = Interval {
        low: NONE,
        high: NONE,
    };

    fn is_empty(&self) -> bool {
        self.low == NONE && self.high == NONE
    }
}

#[derive(Clone, Copy, Debug)]
struct ConflictPair {
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct Lr {
    n: usize,
    /// Undirected adjacency: (neighbour, edge id).
    adj: Vec<Vec<(usize, usize)>>,
    /// Oriented edge endpoints, filled by the orientation pass.
    src: Vec<usize>,
    dst: Vec<usize>,
    oriented: Vec<bool>,
    out: Vec<Vec<usize>>,
    height: Vec<usize>,
    parent_edge: Vec<usize>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting: Vec<i64>,
    lowpt_edge: Vec<usize>,
    refs: Vec<usize>,
    side: Vec<i64>,
    stack_bottom: Vec<usize>,
    stack: Vec<ConflictPair>,
    roots: Vec<usize>,
}

/// Tests `edges` over vertices `0..n` for planarity. Self-loops and
/// parallel edges are ignored. Returns a rotation system on success.
pub fn lr_planarity(n: usize, edges: &[(usize, usize)]) -> Option<PlanarEmbedding> {
    let mut seen = std::collections::HashSet::new();
    let mut simple = Vec::new();
    for &(u, v) in edges {
        assert!(u < n && v < n, "edge endpoint out of range");
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            simple.push((u, v));
        }
    }
    if n > 2 && simple.len() > 3 * n - 6 {
        return None;
    }
    // deep recursion on long paths: give the search its own stack
    if n > 2_000 {
        let owned = simple.clone();
        return std::thread::Builder::new()
            .stack_size(64 * 1024 * 1024 + n * 2048)
            .spawn(move || Lr::new(n, &owned).run())
            .expect("spawn planarity worker")
            .join()
            .expect("planarity worker panicked");
    }
    Lr::new(n, &simple).run()
}

impl Lr {
    fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let m = edges.len();
        let mut adj = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        Lr {
            n,
            adj,
            src: vec![NONE; m],
            dst: vec![NONE; m],
            oriented: vec![false; m],
            out: vec![Vec::new(); n],
            height: vec![NONE; n],
            parent_edge: vec![NONE; n],
            lowpt: vec![0; m],
            lowpt2: vec![0; m],
            nesting: vec![0; m],
            lowpt_edge: vec![NONE; m],
            refs: vec![NONE; m],
            side: vec![1; m],
            stack_bottom: vec![0; m],
            stack: Vec::new(),
            roots: Vec::new(),
        }
    }

    fn run(mut self) -> Option<PlanarEmbedding> {
        for v in 0..self.n {
            if self.height[v] == NONE {
                self.height[v] = 0;
                self.roots.push(v);
                self.orient(v);
            }
        }
        for v in 0..self.n {
            let mut o = std::mem::take(&mut self.out[v]);
            o.sort_by_key(|&e| self.nesting[e]);
            self.out[v] = o;
        }
        for i in 0..self.roots.len() {
            let r = self.roots[i];
            if !self.test(r) {
                return None;
            }
        }
        for e in 0..self.src.len() {
            let s = self.sign(e);
            self.nesting[e] *= s;
        }
        let mut ring = HalfEdgeRing::new(self.n);
        for v in 0..self.n {
            let mut o = std::mem::take(&mut self.out[v]);
            o.sort_by_key(|&e| self.nesting[e]);
            let mut prev = None;
            for &e in &o {
                let w = self.dst[e];
                ring.add_cw(v, w, prev);
                prev = Some(w);
            }
            self.out[v] = o;
        }
        let mut left_ref = vec![NONE; self.n];
        let mut right_ref = vec![NONE; self.n];
        for i in 0..self.roots.len() {
            let r = self.roots[i];
            self.embed(r, &mut ring, &mut left_ref, &mut right_ref);
        }
        Some(PlanarEmbedding {
            rotation: ring.into_rotation(),
            outer_face: 0,
        })
    }

    fn orient(&mut self, v: usize) {
        let e = self.parent_edge[v];
        for i in 0..self.adj[v].len() {
            let (w, id) = self.adj[v][i];
            if self.oriented[id] {
                continue;
            }
            self.oriented[id] = true;
            self.src[id] = v;
            self.dst[id] = w;
            self.out[v].push(id);
            self.lowpt[id] = self.height[v];
            self.lowpt2[id] = self.height[v];
            if self.height[w] == NONE {
                self.parent_edge[w] = id;
                self.height[w] = self.height[v] + 1;
                self.orient(w);
            } else {
                self.lowpt[id] = self.height[w];
            }
            self.nesting[id] = 2 * self.lowpt[id] as i64;
            if self.lowpt2[id] < self.height[v] {
                self.nesting[id] += 1;
            }
            if e != NONE {
                if self.lowpt[id] < self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[id]);
                    self.lowpt[e] = self.lowpt[id];
                } else if self.lowpt[id] > self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[id]);
                } else {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[id]);
                }
            }
        }
    }

    fn conflicting(&self, iv: Interval, b: usize) -> bool {
        !iv.is_empty() && self.lowpt[iv.high] > self.lowpt[b]
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        if p.left.is_empty() {
            return self.lowpt[p.right.low];
        }
        if p.right.is_empty() {
            return self.lowpt[p.left.low];
        }
        self.lowpt[p.left.low].min(self.lowpt[p.right.low])
    }

    fn test(&mut self, v: usize) -> bool {
        let e = self.parent_edge[v];
        let out = self.out[v].clone();
        for (k, &ei) in out.iter().enumerate() {
            let w = self.dst[ei];
            self.stack_bottom[ei] = self.stack.len();
            if ei == self.parent_edge[w] {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[ei] = ei;
                self.stack.push(ConflictPair {
                    left: Interval::EMPTY,
                    right: Interval { low: ei, high: ei },
                });
            }
            if self.lowpt[ei] < self.height[v] {
                if k == 0 {
                    if e != NONE {
                        self.lowpt_edge[e] = self.lowpt_edge[ei];
                    }
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        if e != NONE {
            self.remove_back_edges(e);
        }
        true
    }

    fn add_constraints(&mut self, ei: usize, e: usize) -> bool {
        let mut p = ConflictPair {
            left: Interval::EMPTY,
            right: Interval::EMPTY,
        };
        loop {
            let Some(mut q) = self.stack.pop() else {
                return false;
            };
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            if self.lowpt[q.right.low] > self.lowpt[e] {
                if p.right.is_empty() {
                    p.right = q.right;
                } else {
                    self.refs[p.right.low] = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                self.refs[q.right.low] = self.lowpt_edge[e];
            }
            if self.stack.len() == self.stack_bottom[ei] {
                break;
            }
        }
        while let Some(top) = self.stack.last().copied() {
            if !(self.conflicting(top.left, ei) || self.conflicting(top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().expect("non-empty");
            if self.conflicting(q.right, ei) {
                q.swap();
            }
            if self.conflicting(q.right, ei) {
                return false;
            }
            if p.right.low != NONE {
                self.refs[p.right.low] = q.right.high;
            }
            if q.right.low != NONE {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left = q.left;
            } else {
                self.refs[p.left.low] = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: usize) {
        let u = self.src[e];
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != self.height[u] {
                break;
            }
            let p = self.stack.pop().expect("non-empty");
            if p.left.low != NONE {
                self.side[p.left.low] = -1;
            }
        }
        if let Some(mut p) = self.stack.pop() {
            while p.left.high != NONE && self.dst[p.left.high] == u {
                p.left.high = self.refs[p.left.high];
            }
            if p.left.high == NONE && p.left.low != NONE {
                self.refs[p.left.low] = p.right.low;
                self.side[p.left.low] = -1;
                p.left.low = NONE;
            }
            while p.right.high != NONE && self.dst[p.right.high] == u {
                p.right.high = self.refs[p.right.high];
            }
            if p.right.high == NONE && p.right.low != NONE {
                self.refs[p.right.low] = p.left.high;
                self.side[p.right.low] = -1;
                p.right.low = NONE;
            }
            self.stack.push(p);
        }
        if self.lowpt[e] < self.height[u] {
            if let Some(top) = self.stack.last() {
                let hl = top.left.high;
                let hr = top.right.high;
                self.refs[e] = if hl != NONE && (hr == NONE || self.lowpt[hl] > self.lowpt[hr]) {
                    hl
                } else {
                    hr
                };
            }
        }
    }

    /// Resolves the side of `e` along its reference chain.
    fn sign(&mut self, e: usize) -> i64 {
        let mut chain = Vec::new();
        let mut cur = e;
        while self.refs[cur] != NONE {
            chain.push(cur);
            cur = self.refs[cur];
        }
        // `cur` is resolved; unwind from the far end
        let mut acc = self.side[cur];
        for &c in chain.iter().rev() {
            self.side[c] *= acc;
            self.refs[c] = NONE;
            acc = self.side[c];
        }
        self.side[e]
    }

    fn embed(
        &mut self,
        v: usize,
        ring: &mut HalfEdgeRing,
        left_ref: &mut [usize],
        right_ref: &mut [usize],
    ) {
        let out = self.out[v].clone();
        for &ei in &out {
            let w = self.dst[ei];
            if ei == self.parent_edge[w] {
                ring.add_first(w, v);
                left_ref[v] = w;
                right_ref[v] = w;
                self.embed(w, ring, left_ref, right_ref);
            } else if self.side[ei] == 1 {
                ring.add_cw(w, v, Some(right_ref[w]));
            } else {
                ring.add_ccw(w, v, Some(left_ref[w]));
                left_ref[w] = v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        e
    }

    fn k33() -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for i in 0..3 {
            for j in 3..6 {
                e.push((i, j));
            }
        }
        e
    }

    #[test]
    fn k4_planar_k5_not() {
        let emb = lr_planarity(4, &complete(4)).expect("K4 is planar");
        assert!(emb.satisfies_euler());
        assert!(lr_planarity(5, &complete(5)).is_none());
    }

    #[test]
    fn k33_not_planar() {
        assert!(lr_planarity(6, &k33()).is_none());
        let mut minus = k33();
        minus.pop();
        let emb = lr_planarity(6, &minus).expect("K3,3 minus an edge");
        assert!(emb.satisfies_euler());
    }

    #[test]
    fn disconnected_and_isolated() {
        let emb = lr_planarity(7, &[(0, 1), (1, 2), (2, 0), (4, 5)]).unwrap();
        assert!(emb.satisfies_euler());
        assert_eq!(emb.rotation[3].len(), 0);
    }

    #[test]
    fn grid_is_planar() {
        let k = 12;
        let mut e = Vec::new();
        for i in 0..k {
            for j in 0..k {
                let v = i * k + j;
                if j + 1 < k {
                    e.push((v, v + 1));
                }
                if i + 1 < k {
                    e.push((v, v + k));
                }
            }
        }
        let emb = lr_planarity(k * k, &e).unwrap();
        assert!(emb.satisfies_euler());
    }

    #[test]
    fn long_path_uses_worker_stack() {
        let n = 50_000;
        let e: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let emb = lr_planarity(n, &e).unwrap();
        assert_eq!(emb.edge_count(), n - 1);
    }
}
