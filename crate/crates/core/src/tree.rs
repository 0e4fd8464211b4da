//! Full rooted binary trees, Newick I/O and constant-time ancestry queries.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Index of a node inside one [`PhyloTree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("newick syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("duplicate node label `{0}`")]
    DuplicateLabel(String),
    #[error("node `{0}` has exactly one child")]
    SingleChild(String),
    #[error("node `{label}` has {count} children; only binary trees are supported")]
    NotBinary { label: String, count: usize },
    #[error("internal node at byte {0} has no label (internal labels are required)")]
    MissingLabel(usize),
    #[error("unknown node `{0}`")]
    UnknownLabel(String),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("malformed tree: {0}")]
    Malformed(String),
}

/// A full rooted binary tree with unique node labels.
///
/// Nodes are stored in arena order; the root is not necessarily index 0.
/// Child order is the embedding order of the source and carries no
/// semantic weight beyond being a deterministic initial choice.
#[derive(Clone, Debug)]
pub struct PhyloTree {
    labels: Vec<String>,
    synthetic: Vec<bool>,
    children: Vec<Option<[NodeId; 2]>>,
    parent: Vec<Option<NodeId>>,
    depth: Vec<u32>,
    root: NodeId,
    by_label: HashMap<String, NodeId>,
    preorder: Vec<NodeId>,
    tin: Vec<u32>,
    tout: Vec<u32>,
    lca: EulerLca,
}

impl PartialEq for PhyloTree {
    fn eq(&self, other: &Self) -> bool {
        self.to_newick() == other.to_newick()
    }
}

impl PhyloTree {
    /// Builds a tree from raw arena data. `children[i]` is `None` for leaves.
    pub fn from_parts(
        labels: Vec<String>,
        children: Vec<Option<[NodeId; 2]>>,
        root: NodeId,
    ) -> Result<Self, TreeError> {
        let synthetic = vec![false; labels.len()];
        Self::from_parts_with_synthetic(labels, synthetic, children, root)
    }

    pub(crate) fn from_parts_with_synthetic(
        labels: Vec<String>,
        synthetic: Vec<bool>,
        children: Vec<Option<[NodeId; 2]>>,
        root: NodeId,
    ) -> Result<Self, TreeError> {
        let n = labels.len();
        if n == 0 {
            return Err(TreeError::Malformed("empty tree".into()));
        }
        if children.len() != n || synthetic.len() != n || root.0 >= n {
            return Err(TreeError::Malformed("inconsistent arena sizes".into()));
        }
        let mut by_label = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if by_label.insert(l.clone(), NodeId(i)).is_some() {
                return Err(TreeError::DuplicateLabel(l.clone()));
            }
        }
        let mut parent = vec![None; n];
        for (i, ch) in children.iter().enumerate() {
            if let Some(pair) = ch {
                if pair[0] == pair[1] {
                    return Err(TreeError::Malformed(format!(
                        "node `{}` lists the same child twice",
                        labels[i]
                    )));
                }
                for c in pair {
                    if c.0 >= n {
                        return Err(TreeError::UnknownNode(*c));
                    }
                    if parent[c.0].is_some() || *c == root {
                        return Err(TreeError::Malformed(format!(
                            "node `{}` has more than one parent",
                            labels[c.0]
                        )));
                    }
                    parent[c.0] = Some(NodeId(i));
                }
            }
        }
        let mut depth = vec![0u32; n];
        let mut preorder = Vec::with_capacity(n);
        let mut tin = vec![0u32; n];
        let mut tout = vec![0u32; n];
        // iterative DFS: (node, exiting?)
        let mut stack = vec![(root, false)];
        let mut clock = 0u32;
        while let Some((v, exiting)) = stack.pop() {
            if exiting {
                tout[v.0] = clock;
                continue;
            }
            tin[v.0] = clock;
            clock += 1;
            preorder.push(v);
            stack.push((v, true));
            if let Some([a, b]) = children[v.0] {
                depth[a.0] = depth[v.0] + 1;
                depth[b.0] = depth[v.0] + 1;
                stack.push((b, false));
                stack.push((a, false));
            }
        }
        if preorder.len() != n {
            return Err(TreeError::Malformed(
                "some nodes are not reachable from the root".into(),
            ));
        }
        let lca = EulerLca::build(root, &children, &depth);
        Ok(PhyloTree {
            labels,
            synthetic,
            children,
            parent,
            depth,
            root,
            by_label,
            preorder,
            tin,
            tout,
            lca,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.0]
    }

    /// True when the label was generated rather than read from input.
    pub fn is_synthetic(&self, v: NodeId) -> bool {
        self.synthetic[v.0]
    }

    pub fn node(&self, label: &str) -> Option<NodeId> {
        self.by_label.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<NodeId, TreeError> {
        self.node(label)
            .ok_or_else(|| TreeError::UnknownLabel(label.to_string()))
    }

    pub fn children(&self, v: NodeId) -> Option<[NodeId; 2]> {
        self.children[v.0]
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v.0]
    }

    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v.0]
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children[v.0].is_none()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        (0..self.labels.len()).map(NodeId)
    }

    /// Nodes in preorder, children visited in stored order.
    pub fn preorder(&self) -> &[NodeId] {
        &self.preorder
    }

    /// Nodes in postorder (children before parents).
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                out.push(v);
                continue;
            }
            stack.push((v, true));
            if let Some([a, b]) = self.children[v.0] {
                stack.push((b, false));
                stack.push((a, false));
            }
        }
        out
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.preorder.iter().copied().filter(|&v| self.is_leaf(v))
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.preorder.iter().copied().filter(|&v| !self.is_leaf(v))
    }

    pub fn leaf_count(&self) -> usize {
        self.children.iter().filter(|c| c.is_none()).count()
    }

    /// Arcs `(parent, child)` in preorder of the child.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.preorder
            .iter()
            .filter_map(|&v| self.parent[v.0].map(|p| (p, v)))
    }

    fn check(&self, v: NodeId) -> Result<(), TreeError> {
        if v.0 < self.len() {
            Ok(())
        } else {
            Err(TreeError::UnknownNode(v))
        }
    }

    /// Lowest common ancestor, O(1) after construction.
    pub fn lca(&self, u: NodeId, v: NodeId) -> Result<NodeId, TreeError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.lca_unchecked(u, v))
    }

    #[inline]
    pub(crate) fn lca_unchecked(&self, u: NodeId, v: NodeId) -> NodeId {
        self.lca.query(u, v)
    }

    /// `a` is an ancestor of `b` and `a != b`.
    pub fn is_proper_ancestor(&self, a: NodeId, b: NodeId) -> Result<bool, TreeError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.is_proper_ancestor_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn is_proper_ancestor_unchecked(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.is_ancestor_or_self(a, b)
    }

    /// `a` lies on the root path of `b` (inclusive).
    #[inline]
    pub fn is_ancestor_or_self(&self, a: NodeId, b: NodeId) -> bool {
        self.tin[a.0] <= self.tin[b.0] && self.tout[b.0] <= self.tout[a.0]
    }

    pub fn comparable(&self, u: NodeId, v: NodeId) -> Result<bool, TreeError> {
        let w = self.lca(u, v)?;
        Ok(w == u || w == v)
    }

    /// All descendants of `v`, including `v`, in preorder.
    pub fn subtree_nodes(&self, v: NodeId) -> Result<Vec<NodeId>, TreeError> {
        self.check(v)?;
        let start = self.tin[v.0] as usize;
        let end = self.tout[v.0] as usize;
        Ok(self.preorder[start..end].to_vec())
    }

    /// Host path from `from` down to `to` (inclusive), if `from` is an ancestor.
    pub fn path_down(&self, from: NodeId, to: NodeId) -> Option<Vec<NodeId>> {
        if !self.is_ancestor_or_self(from, to) {
            return None;
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = self.parent[cur.0]?;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_newick(self.root, &mut out);
        out.push(';');
        out
    }

    fn write_newick(&self, v: NodeId, out: &mut String) {
        // explicit stack keeps deep caterpillars off the call stack
        enum Step {
            Enter(NodeId),
            Comma,
            Close(NodeId),
        }
        let mut stack = vec![Step::Enter(v)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Enter(u) => match self.children[u.0] {
                    Some([a, b]) => {
                        out.push('(');
                        stack.push(Step::Close(u));
                        stack.push(Step::Enter(b));
                        stack.push(Step::Comma);
                        stack.push(Step::Enter(a));
                    }
                    None => out.push_str(&self.labels[u.0]),
                },
                Step::Comma => out.push(','),
                Step::Close(u) => {
                    out.push(')');
                    out.push_str(&self.labels[u.0]);
                }
            }
        }
    }
}

/// Euler tour + sparse table range-minimum over depths.
#[derive(Clone, Debug)]
struct EulerLca {
    first: Vec<u32>,
    tour: Vec<u32>,
    depth: Vec<u32>,
    table: Vec<Vec<u32>>,
}

impl EulerLca {
    fn build(root: NodeId, children: &[Option<[NodeId; 2]>], depth: &[u32]) -> Self {
        let n = children.len();
        let mut first = vec![u32::MAX; n];
        let mut tour: Vec<u32> = Vec::with_capacity(2 * n);
        first[root.0] = 0;
        tour.push(root.0 as u32);
        let mut stack: Vec<(usize, usize)> = vec![(root.0, 0)];
        while let Some(top) = stack.last_mut() {
            let (v, k) = *top;
            match children[v] {
                Some(pair) if k < 2 => {
                    top.1 += 1;
                    let c = pair[k].0;
                    first[c] = tour.len() as u32;
                    tour.push(c as u32);
                    stack.push((c, 0));
                }
                _ => {
                    stack.pop();
                    if let Some(&(p, _)) = stack.last() {
                        tour.push(p as u32);
                    }
                }
            }
        }
        let m = tour.len();
        let mut table = vec![tour.clone()];
        let mut len = 1;
        while 2 * len <= m {
            let prev = table.last().unwrap();
            let mut row = Vec::with_capacity(m - 2 * len + 1);
            for i in 0..=(m - 2 * len) {
                let a = prev[i];
                let b = prev[i + len];
                row.push(if depth[a as usize] <= depth[b as usize] {
                    a
                } else {
                    b
                });
            }
            table.push(row);
            len *= 2;
        }
        EulerLca {
            first,
            tour,
            depth: depth.to_vec(),
            table,
        }
    }

    fn query(&self, u: NodeId, v: NodeId) -> NodeId {
        let (mut l, mut r) = (self.first[u.0] as usize, self.first[v.0] as usize);
        if l > r {
            std::mem::swap(&mut l, &mut r);
        }
        let span = r - l + 1;
        let k = (usize::BITS - 1 - span.leading_zeros()) as usize;
        let a = self.table[k][l];
        let b = self.table[k][r + 1 - (1 << k)];
        debug_assert!(self.tour.len() >= span);
        NodeId(if self.depth[a as usize] <= self.depth[b as usize] {
            a
        } else {
            b
        } as usize)
    }
}

/// Options for [`parse_newick_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct NewickOptions {
    /// Generate names for unlabeled internal nodes instead of failing.
    pub auto_label_internal: bool,
}

pub fn parse_newick(text: &str) -> Result<PhyloTree, TreeError> {
    parse_newick_with(text, NewickOptions::default())
}

pub fn parse_newick_with(text: &str, opts: NewickOptions) -> Result<PhyloTree, TreeError> {
    let mut p = NewickParser {
        src: text.as_bytes(),
        pos: 0,
        labels: Vec::new(),
        children: Vec::new(),
        unlabeled: Vec::new(),
    };
    let root = p.parse_tree()?;
    let mut synthetic = vec![false; p.labels.len()];
    let mut labels: Vec<String> = Vec::with_capacity(p.labels.len());
    for (i, l) in p.labels.into_iter().enumerate() {
        match l {
            Some(s) => labels.push(s),
            None => {
                synthetic[i] = true;
                labels.push(String::new());
            }
        }
    }
    if synthetic.iter().any(|&s| s) {
        if !opts.auto_label_internal {
            let (_, pos) = p
                .unlabeled
                .first()
                .copied()
                .expect("unlabeled node recorded");
            return Err(TreeError::MissingLabel(pos));
        }
        let taken: std::collections::HashSet<String> =
            labels.iter().filter(|l| !l.is_empty()).cloned().collect();
        let mut counter = 0usize;
        for (i, l) in labels.iter_mut().enumerate() {
            if synthetic[i] {
                loop {
                    let cand = format!("_n{counter}");
                    counter += 1;
                    if !taken.contains(&cand) {
                        *l = cand;
                        break;
                    }
                }
            }
        }
    }
    PhyloTree::from_parts_with_synthetic(labels, synthetic, p.children, root)
}

struct NewickParser<'a> {
    src: &'a [u8],
    pos: usize,
    labels: Vec<Option<String>>,
    children: Vec<Option<[NodeId; 2]>>,
    unlabeled: Vec<(NodeId, usize)>,
}

fn is_label_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'|' | b'-')
}

impl NewickParser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TreeError> {
        Err(TreeError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse_tree(&mut self) -> Result<NodeId, TreeError> {
        let root = self.parse_subtree()?;
        match self.peek() {
            Some(b';') => self.pos += 1,
            Some(c) => return self.err(format!("expected `;`, found `{}`", c as char)),
            None => return self.err("expected `;` at end of input"),
        }
        if self.peek().is_some() {
            return self.err("trailing characters after `;`");
        }
        Ok(root)
    }

    fn parse_subtree(&mut self) -> Result<NodeId, TreeError> {
        // iterative to survive very deep inputs
        enum Frame {
            Open { start: usize, kids: Vec<NodeId> },
        }
        let mut stack: Vec<Frame> = Vec::new();
        loop {
            // descend through opening parens
            while self.peek() == Some(b'(') {
                stack.push(Frame::Open {
                    start: self.pos,
                    kids: Vec::new(),
                });
                self.pos += 1;
            }
            // a leaf
            let leaf_pos = self.pos;
            let label = self.parse_label();
            self.skip_length()?;
            let mut done = match label {
                Some(l) => self.push_node(Some(l), None, leaf_pos),
                None => return self.err("expected a leaf label or `(`"),
            };
            // climb while subtrees close
            loop {
                let Some(Frame::Open { kids, .. }) = stack.last_mut() else {
                    return Ok(done);
                };
                kids.push(done);
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b')') => {
                        self.pos += 1;
                        let Frame::Open { start, kids } = stack.pop().unwrap();
                        let label_pos = self.pos;
                        let label = self.parse_label();
                        self.skip_length()?;
                        let name = label
                            .clone()
                            .unwrap_or_else(|| format!("<at byte {start}>"));
                        match kids.len() {
                            1 => return Err(TreeError::SingleChild(name)),
                            2 => {}
                            n => {
                                return Err(TreeError::NotBinary {
                                    label: name,
                                    count: n,
                                })
                            }
                        }
                        done = self.push_node(label, Some([kids[0], kids[1]]), label_pos);
                    }
                    Some(c) => return self.err(format!("unexpected `{}`", c as char)),
                    None => return self.err("unexpected end of input"),
                }
            }
        }
    }

    fn push_node(
        &mut self,
        label: Option<String>,
        kids: Option<[NodeId; 2]>,
        pos: usize,
    ) -> NodeId {
        let id = NodeId(self.labels.len());
        if label.is_none() {
            self.unlabeled.push((id, pos));
        }
        self.labels.push(label);
        self.children.push(kids);
        id
    }

    fn parse_label(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && is_label_byte(self.src[self.pos]) {
            self.pos += 1;
        }
        if self.pos > start {
            Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
        } else {
            None
        }
    }

    fn skip_length(&mut self) -> Result<(), TreeError> {
        if self.peek() != Some(b':') {
            return Ok(());
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || matches!(self.src[self.pos], b'.' | b'e' | b'E' | b'+' | b'-'))
        {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a branch length after `:`");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> PhyloTree {
        parse_newick(s).unwrap()
    }

    #[test]
    fn smallest_tree() {
        let tree = t("(a,b)r;");
        assert_eq!(tree.len(), 3);
        assert_eq!(tree.label(tree.root()), "r");
        let leaves: Vec<_> = tree.leaves().map(|v| tree.label(v).to_string()).collect();
        assert_eq!(leaves, ["a", "b"]);
    }

    #[test]
    fn depth_follows_edges() {
        let tree = t("((a,b)x,c)r;");
        assert_eq!(tree.len(), 5);
        assert_eq!(tree.depth(tree.node("a").unwrap()), 2);
        assert_eq!(tree.depth(tree.root()), 0);
        assert_eq!(tree.depth(tree.node("c").unwrap()), 1);
    }

    #[test]
    fn single_child_rejected() {
        assert_eq!(
            parse_newick("((a)x,c)r;").unwrap_err(),
            TreeError::SingleChild("x".into())
        );
    }

    #[test]
    fn multifurcation_rejected() {
        assert!(matches!(
            parse_newick("(a,b,c)r;"),
            Err(TreeError::NotBinary { count: 3, .. })
        ));
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert_eq!(
            parse_newick("(a,a)r;").unwrap_err(),
            TreeError::DuplicateLabel("a".into())
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_newick("(a,b)r").unwrap_err() {
            TreeError::Syntax { pos, .. } => assert_eq!(pos, 6),
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            parse_newick("(a,b)r;x"),
            Err(TreeError::Syntax { .. })
        ));
        assert!(matches!(
            parse_newick("(a,)r;"),
            Err(TreeError::Syntax { .. })
        ));
    }

    #[test]
    fn branch_lengths_ignored() {
        let tree = t("((a:1.5,b:2e-3)x:0.1,c:4)r:0;");
        assert_eq!(tree.to_newick(), "((a,b)x,c)r;");
    }

    #[test]
    fn internal_labels_required_unless_generated() {
        assert!(matches!(
            parse_newick("((a,b),c)r;"),
            Err(TreeError::MissingLabel(_))
        ));
        let tree = parse_newick_with(
            "((a,b),c);",
            NewickOptions {
                auto_label_internal: true,
            },
        )
        .unwrap();
        assert_eq!(tree.len(), 5);
        assert!(tree.is_synthetic(tree.root()));
        assert!(!tree.is_synthetic(tree.node("a").unwrap()));
    }

    #[test]
    fn lca_examples() {
        let tree = t("((a,b)x,c)r;");
        let id = |s| tree.node(s).unwrap();
        assert_eq!(tree.lca(id("a"), id("b")).unwrap(), id("x"));
        assert_eq!(tree.lca(id("a"), id("a")).unwrap(), id("a"));
        assert_eq!(tree.lca(id("a"), id("c")).unwrap(), id("r"));
        assert!(tree.lca(id("a"), NodeId(99)).is_err());
    }

    #[test]
    fn ancestry_predicates() {
        let tree = t("((a,b)x,c)r;");
        let id = |s| tree.node(s).unwrap();
        assert!(tree.is_proper_ancestor(id("r"), id("a")).unwrap());
        assert!(!tree.is_proper_ancestor(id("a"), id("a")).unwrap());
        assert!(!tree.is_proper_ancestor(id("a"), id("c")).unwrap());
        assert!(tree.comparable(id("r"), id("b")).unwrap());
        assert!(!tree.comparable(id("a"), id("b")).unwrap());
        assert!(tree.comparable(id("x"), id("x")).unwrap());
        assert!(tree.is_proper_ancestor(NodeId(42), id("a")).is_err());
    }

    #[test]
    fn subtree_queries() {
        let tree = t("((a,b)x,c)r;");
        let id = |s| tree.node(s).unwrap();
        assert_eq!(tree.subtree_nodes(id("a")).unwrap(), vec![id("a")]);
        assert_eq!(tree.subtree_nodes(tree.root()).unwrap().len(), 5);
        let mut sub = tree.subtree_nodes(id("x")).unwrap();
        sub.sort();
        let mut want = vec![id("x"), id("a"), id("b")];
        want.sort();
        assert_eq!(sub, want);
    }

    #[test]
    fn path_down_lists_hosts() {
        let tree = t("((a,b)x,c)r;");
        let id = |s| tree.node(s).unwrap();
        assert_eq!(
            tree.path_down(id("r"), id("a")).unwrap(),
            vec![id("r"), id("x"), id("a")]
        );
        assert!(tree.path_down(id("a"), id("r")).is_none());
        assert_eq!(tree.path_down(id("c"), id("c")).unwrap(), vec![id("c")]);
    }

    #[test]
    fn deep_caterpillar_does_not_overflow() {
        let mut s = String::from("l0");
        for i in 1..20_000 {
            s = format!("({s},l{i})i{i}");
        }
        s.push(';');
        let tree = t(&s);
        assert_eq!(tree.leaf_count(), 20_000);
        assert_eq!(tree.to_newick(), s);
    }
}
