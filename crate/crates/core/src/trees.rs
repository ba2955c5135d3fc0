//! Rooted planar trees with ordered leaves and the operad they generate.
//!
//! A tree of arity `n` has leaves numbered `1..=n` left to right. Internal
//! vertices have at least two children; the arity-1 tree is a bare leaf with
//! no edges. The partial order is generated by contraction of internal
//! edges, with the corolla (single internal vertex) as the maximum.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("leaf index {index} out of range 1..={arity}")]
    LeafIndex { index: usize, arity: usize },
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("expected codimension {expected}, found {found}")]
    WrongCodimension { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

/// A rooted planar tree. `Leaf` is both a leaf of a larger tree and the
/// arity-1 tree itself; `Node` children are ordered left to right and a
/// node always has at least two of them.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlanarTree {
    Leaf,
    Node(Vec<PlanarTree>),
}

impl fmt::Debug for PlanarTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bracket_string())
    }
}

impl PlanarTree {
    /// The unique arity-1 tree.
    pub fn unit() -> Self {
        PlanarTree::Leaf
    }

    /// The tree with a single internal vertex and `n` leaves, `n >= 2`.
    pub fn corolla(n: usize) -> Self {
        assert!(n >= 2, "corolla needs arity >= 2");
        PlanarTree::Node(vec![PlanarTree::Leaf; n])
    }

    pub fn node(children: Vec<PlanarTree>) -> Self {
        assert!(children.len() >= 2, "internal vertices need >= 2 children");
        PlanarTree::Node(children)
    }

    pub fn arity(&self) -> usize {
        match self {
            PlanarTree::Leaf => 1,
            PlanarTree::Node(cs) => cs.iter().map(|c| c.arity()).sum(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, PlanarTree::Leaf)
    }

    /// Number of internal (non-leaf) vertices.
    pub fn internal_vertices(&self) -> usize {
        match self {
            PlanarTree::Leaf => 0,
            PlanarTree::Node(cs) => 1 + cs.iter().map(|c| c.internal_vertices()).sum::<usize>(),
        }
    }

    /// Number of internal edges (edges whose source is not a leaf).
    pub fn internal_edges(&self) -> usize {
        match self {
            PlanarTree::Leaf => 0,
            PlanarTree::Node(_) => self.internal_vertices() - 1,
        }
    }

    pub fn is_binary(&self) -> bool {
        match self {
            PlanarTree::Leaf => true,
            PlanarTree::Node(cs) => cs.len() == 2 && cs.iter().all(|c| c.is_binary()),
        }
    }

    /// Leaf intervals `[i, j]` (1-based, `i < j`) of all internal vertices.
    /// This laminar family determines the tree together with the arity.
    pub fn intervals(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        self.collect_intervals(1, &mut out);
        out
    }

    fn collect_intervals(&self, first: usize, out: &mut BTreeSet<(usize, usize)>) -> usize {
        match self {
            PlanarTree::Leaf => first + 1,
            PlanarTree::Node(cs) => {
                let mut next = first;
                for c in cs {
                    next = c.collect_intervals(next, out);
                }
                out.insert((first, next - 1));
                next
            }
        }
    }

    /// Grafts `other` onto the `i`-th leaf (1-based). No contraction happens:
    /// arities add as `arity + other.arity - 1`. Unit trees pass through.
    pub fn compose(&self, i: usize, other: &PlanarTree) -> Result<PlanarTree, TreeError> {
        let n = self.arity();
        if i < 1 || i > n {
            return Err(TreeError::LeafIndex { index: i, arity: n });
        }
        Ok(self.graft(i, other).0)
    }

    fn graft(&self, i: usize, other: &PlanarTree) -> (PlanarTree, usize) {
        match self {
            PlanarTree::Leaf => {
                debug_assert_eq!(i, 1);
                (other.clone(), 0)
            }
            PlanarTree::Node(cs) => {
                let mut rest = i;
                let mut out = Vec::with_capacity(cs.len());
                let mut done = false;
                for c in cs {
                    let a = c.arity();
                    if !done && rest >= 1 && rest <= a {
                        let (g, _) = c.graft(rest, other);
                        out.push(g);
                        done = true;
                    } else {
                        out.push(c.clone());
                    }
                    if !done {
                        rest -= a;
                    }
                }
                (PlanarTree::Node(out), 0)
            }
        }
    }

    /// `self <= other` iff `other` is reachable from `self` by contracting
    /// internal edges; equivalently the intervals of `other` are contained
    /// in those of `self`.
    pub fn leq(&self, other: &PlanarTree) -> Result<bool, TreeError> {
        let (a, b) = (self.arity(), other.arity());
        if a != b {
            return Err(TreeError::ArityMismatch(a, b));
        }
        let mine = self.intervals();
        Ok(other.intervals().is_subset(&mine))
    }

    /// Codimension in the face poset: length of the longest chain strictly
    /// above the tree. Closed form: one less than the internal vertex count.
    pub fn codimension(&self) -> usize {
        assert!(self.arity() >= 2, "codimension needs arity >= 2");
        self.internal_vertices() - 1
    }

    /// The first common vertex of the root paths of leaves `i` and `j`,
    /// identified by its leaf interval.
    pub fn join(&self, i: usize, j: usize) -> Result<(usize, usize), TreeError> {
        let n = self.arity();
        if i < 1 || j > n || i >= j {
            return Err(TreeError::LeafIndex { index: j, arity: n });
        }
        // Smallest laminar interval containing both leaves.
        Ok(self
            .intervals()
            .into_iter()
            .filter(|&(a, b)| a <= i && j <= b)
            .min_by_key(|&(a, b)| b - a)
            .expect("root interval always contains both"))
    }

    /// All pairs `(i, j)` whose join is not the join of any strictly wider
    /// pair; the root vertex always contributes `(1, n)`.
    pub fn bunch_set(&self) -> BTreeSet<(usize, usize)> {
        let n = self.arity();
        let mut out = BTreeSet::new();
        if n < 2 {
            return out;
        }
        for i in 1..n {
            for j in (i + 1)..=n {
                let v = self.join(i, j).unwrap();
                let left_grows = i > 1 && self.join(i - 1, j).unwrap() == v;
                let right_grows = j < n && self.join(i, j + 1).unwrap() == v;
                if !left_grows && !right_grows {
                    out.insert((i, j));
                }
            }
        }
        out
    }

    /// The unique decomposition `corolla(n1) ∘_i corolla(n2)` of a
    /// codimension-1 tree.
    pub fn decompose_codim1(&self) -> Result<(PlanarTree, usize, PlanarTree), TreeError> {
        let c = self.codimension();
        if c != 1 {
            return Err(TreeError::WrongCodimension {
                expected: 1,
                found: c,
            });
        }
        let cs = match self {
            PlanarTree::Node(cs) => cs,
            PlanarTree::Leaf => unreachable!(),
        };
        let mut leaf_pos = 1usize;
        for child in cs {
            if let PlanarTree::Node(inner) = child {
                let outer = PlanarTree::corolla(cs.len());
                let inner_c = PlanarTree::corolla(inner.len());
                return Ok((outer, leaf_pos, inner_c));
            }
            leaf_pos += child.arity();
        }
        unreachable!("codim-1 tree has exactly one internal child")
    }

    /// Nested-bracket form, e.g. `"((..).)"` for the left-comb 3-tree.
    pub fn to_bracket_string(&self) -> String {
        match self {
            PlanarTree::Leaf => ".".to_string(),
            PlanarTree::Node(cs) => {
                let mut s = String::from("(");
                for c in cs {
                    s.push_str(&c.to_bracket_string());
                }
                s.push(')');
                s
            }
        }
    }

    pub fn from_bracket_string(s: &str) -> Result<PlanarTree, TreeError> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (t, used) = Self::parse_at(&chars, 0)?;
        if used != chars.len() {
            return Err(TreeError::Parse(format!("trailing input at {used}")));
        }
        Ok(t)
    }

    fn parse_at(chars: &[char], pos: usize) -> Result<(PlanarTree, usize), TreeError> {
        match chars.get(pos) {
            Some('.') => Ok((PlanarTree::Leaf, pos + 1)),
            Some('(') => {
                let mut children = Vec::new();
                let mut p = pos + 1;
                loop {
                    match chars.get(p) {
                        Some(')') => break,
                        Some(_) => {
                            let (c, np) = Self::parse_at(chars, p)?;
                            children.push(c);
                            p = np;
                        }
                        None => return Err(TreeError::Parse("unclosed '('".into())),
                    }
                }
                if children.len() < 2 {
                    return Err(TreeError::Parse("internal vertex needs >= 2 children".into()));
                }
                Ok((PlanarTree::Node(children), p + 1))
            }
            other => Err(TreeError::Parse(format!("unexpected {other:?} at {pos}"))),
        }
    }
}

/// All planar trees of arity `n` in canonical (structural) order.
pub fn enumerate(n: usize) -> Vec<PlanarTree> {
    assert!(n >= 1);
    let mut out = gen_trees(n);
    out.sort();
    out
}

fn gen_trees(n: usize) -> Vec<PlanarTree> {
    if n == 1 {
        return vec![PlanarTree::Leaf];
    }
    let mut out = Vec::new();
    for comp in compositions(n) {
        if comp.len() < 2 {
            continue;
        }
        let mut parts: Vec<Vec<PlanarTree>> = Vec::new();
        for &k in &comp {
            parts.push(gen_trees(k));
        }
        let mut stack: Vec<Vec<PlanarTree>> = vec![Vec::new()];
        for options in &parts {
            let mut next = Vec::new();
            for partial in &stack {
                for opt in options {
                    let mut p = partial.clone();
                    p.push(opt.clone());
                    next.push(p);
                }
            }
            stack = next;
        }
        for children in stack {
            out.push(PlanarTree::Node(children));
        }
    }
    out
}

/// Ordered compositions of `n` into positive parts.
fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for rest in compositions(n - first) {
            let mut c = vec![first];
            c.extend(rest);
            out.push(c);
        }
    }
    out
}

/// All binary trees of arity `n`.
pub fn enumerate_binary(n: usize) -> Vec<PlanarTree> {
    if n == 1 {
        return vec![PlanarTree::Leaf];
    }
    let mut out = Vec::new();
    for split in 1..n {
        for l in enumerate_binary(split) {
            for r in enumerate_binary(n - split) {
                out.push(PlanarTree::Node(vec![l.clone(), r.clone()]));
            }
        }
    }
    out
}

/// DOT rendering of the Hasse diagram of `T(n)` under edge contraction.
pub fn hasse_dot(n: usize) -> String {
    let elems = enumerate(n);
    let mut s = String::from("digraph tposet {\n  rankdir=BT;\n");
    for (idx, t) in elems.iter().enumerate() {
        s.push_str(&format!(
            "  n{idx} [label=\"{}\", shape=box];\n",
            t.to_bracket_string()
        ));
    }
    for (a, ta) in elems.iter().enumerate() {
        for (b, tb) in elems.iter().enumerate() {
            if a == b || !ta.leq(tb).unwrap() {
                continue;
            }
            // Keep only covering relations.
            let covered = elems.iter().enumerate().any(|(c, tc)| {
                c != a && c != b && ta.leq(tc).unwrap() && tc.leq(tb).unwrap()
            });
            if !covered {
                s.push_str(&format!("  n{a} -> n{b};\n"));
            }
        }
    }
    s.push_str("}\n");
    s
}
