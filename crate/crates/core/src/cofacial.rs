//! Cofacial trees: planar trees decorated with coface marks and coherence
//! marks, the partial order generated by the three shift/trade/contract
//! moves, the operad composition, and the slot operators `d_i^j` / `s_i^j`.
//!
//! Marks come in three kinds. `df` ("first coface") may sit on any vertex
//! and on edges that are leftmost among the edges sharing their target;
//! `dl` ("last coface") is the mirror image; `h_i` sits only on the
//! `(i, i+1)`-join vertex. Each connected component of the poset is
//! classified by the counts `m_0, ..., m_n` along designated leaf paths and
//! has a unique maximum.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::assoc::ConePoint;
use crate::trees::PlanarTree;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CofacialError {
    #[error("leaf index {index} out of range 1..={arity}")]
    LeafIndex { index: usize, arity: usize },
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("operator d_{i}^{j} undefined on this component")]
    BadCoface { i: usize, j: usize },
    #[error("operator s_{i}^{j} undefined on this component")]
    BadCodegeneracy { i: usize, j: usize },
    #[error("expected codimension {expected}, found {found}")]
    WrongCodimension { expected: usize, found: usize },
    #[error("invalid marking: {0}")]
    Invalid(String),
}

/// A vertex is addressed by its child-index path from the root; the empty
/// path is the root. An edge is addressed by the path of its source (upper)
/// vertex.
pub type Path = Vec<usize>;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexMarks {
    pub df: u32,
    pub dl: u32,
    pub h: BTreeMap<usize, u32>,
}

impl VertexMarks {
    fn is_empty(&self) -> bool {
        self.df == 0 && self.dl == 0 && self.h.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeMarks {
    pub df: u32,
    pub dl: u32,
}

impl EdgeMarks {
    fn is_empty(&self) -> bool {
        self.df == 0 && self.dl == 0
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CofacialTree {
    base: PlanarTree,
    vmarks: BTreeMap<Path, VertexMarks>,
    emarks: BTreeMap<Path, EdgeMarks>,
}

/// Where a single mark copy lives, in counting-path order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MarkPos {
    VDf(Path),
    VDl(Path),
    H(Path, usize),
    EDf(Path),
    EDl(Path),
}

// -- navigation helpers on the underlying tree ------------------------------

fn subtree_at<'a>(t: &'a PlanarTree, path: &[usize]) -> &'a PlanarTree {
    let mut cur = t;
    for &k in path {
        match cur {
            PlanarTree::Node(cs) => cur = &cs[k],
            PlanarTree::Leaf => panic!("path descends below a leaf"),
        }
    }
    cur
}

fn vertices(t: &PlanarTree) -> Vec<Path> {
    let mut out = Vec::new();
    fn walk(t: &PlanarTree, path: &mut Path, out: &mut Vec<Path>) {
        out.push(path.clone());
        if let PlanarTree::Node(cs) = t {
            for (k, c) in cs.iter().enumerate() {
                path.push(k);
                walk(c, path, out);
                path.pop();
            }
        }
    }
    walk(t, &mut Vec::new(), &mut out);
    out
}

/// Leaf interval `(lo, hi)` of the vertex at `path` (1-based; a leaf vertex
/// has `lo == hi`).
fn interval(t: &PlanarTree, path: &[usize]) -> (usize, usize) {
    fn walk(t: &PlanarTree, path: &[usize], first: usize) -> (usize, usize) {
        match (t, path.split_first()) {
            (_, None) => (first, first + t.arity() - 1),
            (PlanarTree::Node(cs), Some((&k, rest))) => {
                let offset: usize = cs[..k].iter().map(|c| c.arity()).sum();
                walk(&cs[k], rest, first + offset)
            }
            (PlanarTree::Leaf, Some(_)) => panic!("path descends below a leaf"),
        }
    }
    walk(t, path, 1)
}

fn leaf_path(t: &PlanarTree, i: usize) -> Path {
    fn walk(t: &PlanarTree, i: usize, path: &mut Path) -> bool {
        match t {
            PlanarTree::Leaf => i == 1,
            PlanarTree::Node(cs) => {
                let mut rest = i;
                for (k, c) in cs.iter().enumerate() {
                    let a = c.arity();
                    if rest <= a {
                        path.push(k);
                        return walk(c, rest, path);
                    }
                    rest -= a;
                }
                false
            }
        }
    }
    let mut p = Vec::new();
    assert!(walk(t, i, &mut p), "leaf {i} out of range");
    p
}

/// Path of the `(i, i+1)`-join: the longest common prefix of the two leaf
/// paths.
fn join_path(t: &PlanarTree, i: usize) -> Path {
    let a = leaf_path(t, i);
    let b = leaf_path(t, i + 1);
    a.iter()
        .zip(b.iter())
        .take_while(|(x, y)| x == y)
        .map(|(x, _)| *x)
        .collect()
}

fn children_count(t: &PlanarTree, path: &[usize]) -> usize {
    match subtree_at(t, path) {
        PlanarTree::Leaf => 0,
        PlanarTree::Node(cs) => cs.len(),
    }
}

fn siblings(t: &PlanarTree, path: &[usize]) -> usize {
    if path.is_empty() {
        1
    } else {
        children_count(t, &path[..path.len() - 1])
    }
}

fn is_first_child(path: &[usize]) -> bool {
    path.last() == Some(&0)
}

fn is_last_child(t: &PlanarTree, path: &[usize]) -> bool {
    match path.last() {
        None => false,
        Some(&k) => k + 1 == siblings(t, path),
    }
}

impl fmt::Debug for CofacialTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_form())
    }
}

impl CofacialTree {
    /// The unmarked tree on the given base.
    pub fn unmarked(base: PlanarTree) -> Self {
        CofacialTree {
            base,
            vmarks: BTreeMap::new(),
            emarks: BTreeMap::new(),
        }
    }

    /// The operad unit: the 1-tree with no marks.
    pub fn unit() -> Self {
        Self::unmarked(PlanarTree::Leaf)
    }

    /// The arity-1 symbol `df^a dl^b`.
    pub fn one_tree(a: u32, b: u32) -> Self {
        let mut t = Self::unmarked(PlanarTree::Leaf);
        t.add_vdf(&[], a);
        t.add_vdl(&[], b);
        t
    }

    /// The maximum of the component with counts `marks = (m_0, ..., m_n)`:
    /// the corolla with `m_0` first-coface marks on the leftmost edge, `m_n`
    /// last-coface marks on the rightmost edge and `h_i^{m_i}` at the root.
    pub fn maximum(arity: usize, marks: &[u32]) -> Self {
        assert_eq!(marks.len(), arity + 1);
        if arity == 1 {
            return Self::one_tree(marks[0], marks[1]);
        }
        let mut t = Self::unmarked(PlanarTree::corolla(arity));
        t.add_edf(&[0], marks[0]);
        t.add_edl(&[arity - 1], marks[arity]);
        for i in 1..arity {
            t.add_h(&[], i, marks[i]);
        }
        t
    }

    pub fn base(&self) -> &PlanarTree {
        &self.base
    }

    pub fn arity(&self) -> usize {
        self.base.arity()
    }

    fn add_vdf(&mut self, p: &[usize], k: u32) {
        if k > 0 {
            self.vmarks.entry(p.to_vec()).or_default().df += k;
        }
    }

    fn add_vdl(&mut self, p: &[usize], k: u32) {
        if k > 0 {
            self.vmarks.entry(p.to_vec()).or_default().dl += k;
        }
    }

    fn add_h(&mut self, p: &[usize], i: usize, k: u32) {
        if k > 0 {
            *self
                .vmarks
                .entry(p.to_vec())
                .or_default()
                .h
                .entry(i)
                .or_insert(0) += k;
        }
    }

    fn add_edf(&mut self, p: &[usize], k: u32) {
        if k > 0 {
            self.emarks.entry(p.to_vec()).or_default().df += k;
        }
    }

    fn add_edl(&mut self, p: &[usize], k: u32) {
        if k > 0 {
            self.emarks.entry(p.to_vec()).or_default().dl += k;
        }
    }

    fn prune(&mut self) {
        self.vmarks.retain(|_, m| {
            m.h.retain(|_, k| *k > 0);
            !m.is_empty()
        });
        self.emarks.retain(|_, m| !m.is_empty());
    }

    pub fn add_mark(&mut self, pos: &MarkPos, k: u32) {
        match pos {
            MarkPos::VDf(p) => self.add_vdf(p, k),
            MarkPos::VDl(p) => self.add_vdl(p, k),
            MarkPos::H(p, i) => self.add_h(p, *i, k),
            MarkPos::EDf(p) => self.add_edf(p, k),
            MarkPos::EDl(p) => self.add_edl(p, k),
        }
    }

    pub(crate) fn remove_mark(&mut self, pos: &MarkPos, k: u32) {
        if k == 0 {
            return;
        }
        match pos {
            MarkPos::VDf(p) => self.vmarks.get_mut(p).unwrap().df -= k,
            MarkPos::VDl(p) => self.vmarks.get_mut(p).unwrap().dl -= k,
            MarkPos::H(p, i) => {
                *self.vmarks.get_mut(p).unwrap().h.get_mut(i).unwrap() -= k;
            }
            MarkPos::EDf(p) => self.emarks.get_mut(p).unwrap().df -= k,
            MarkPos::EDl(p) => self.emarks.get_mut(p).unwrap().dl -= k,
        }
        self.prune();
    }

    pub fn mark_multiplicity(&self, pos: &MarkPos) -> u32 {
        match pos {
            MarkPos::VDf(p) => self.vmarks.get(p).map(|m| m.df).unwrap_or(0),
            MarkPos::VDl(p) => self.vmarks.get(p).map(|m| m.dl).unwrap_or(0),
            MarkPos::H(p, i) => self
                .vmarks
                .get(p)
                .and_then(|m| m.h.get(i).copied())
                .unwrap_or(0),
            MarkPos::EDf(p) => self.emarks.get(p).map(|m| m.df).unwrap_or(0),
            MarkPos::EDl(p) => self.emarks.get(p).map(|m| m.dl).unwrap_or(0),
        }
    }

    /// Check the attachment rules.
    pub fn validate(&self) -> Result<(), CofacialError> {
        let vs: BTreeSet<Path> = vertices(&self.base).into_iter().collect();
        for (p, m) in &self.vmarks {
            if !vs.contains(p) {
                return Err(CofacialError::Invalid(format!("no vertex at {p:?}")));
            }
            for (&i, &k) in &m.h {
                if k == 0 {
                    continue;
                }
                if self.arity() < 2 || i < 1 || i > self.arity() - 1 {
                    return Err(CofacialError::Invalid(format!("h_{i} out of range")));
                }
                if join_path(&self.base, i) != *p {
                    return Err(CofacialError::Invalid(format!(
                        "h_{i} away from the ({i},{}) join",
                        i + 1
                    )));
                }
            }
        }
        for (p, m) in &self.emarks {
            if p.is_empty() || !vs.contains(p) {
                return Err(CofacialError::Invalid(format!("no edge at {p:?}")));
            }
            if m.df > 0 && !is_first_child(p) {
                return Err(CofacialError::Invalid(format!(
                    "df on non-leftmost edge {p:?}"
                )));
            }
            if m.dl > 0 && !is_last_child(&self.base, p) {
                return Err(CofacialError::Invalid(format!(
                    "dl on non-rightmost edge {p:?}"
                )));
            }
        }
        Ok(())
    }

    /// The positions counted by `m_i`, in counting order. For `i = 0` the
    /// order runs from the root towards the first leaf; for `i = n` from the
    /// last leaf towards the root; otherwise from leaf `i` over the join to
    /// leaf `i + 1`, with only the matching mark kind counted on each side.
    pub fn segment(&self, i: usize) -> Vec<MarkPos> {
        let n = self.arity();
        assert!(i <= n);
        let mut out = Vec::new();
        if i == 0 {
            let leaf = leaf_path(&self.base, 1);
            for d in 0..=leaf.len() {
                out.push(MarkPos::VDf(leaf[..d].to_vec()));
                if d < leaf.len() {
                    out.push(MarkPos::EDf(leaf[..d + 1].to_vec()));
                }
            }
        } else if i == n {
            let leaf = leaf_path(&self.base, n);
            for d in (0..=leaf.len()).rev() {
                out.push(MarkPos::VDl(leaf[..d].to_vec()));
                if d > 0 {
                    out.push(MarkPos::EDl(leaf[..d].to_vec()));
                }
            }
        } else {
            let join = join_path(&self.base, i);
            let li = leaf_path(&self.base, i);
            let lj = leaf_path(&self.base, i + 1);
            // Upward from leaf i, excluding the join; `dl` counts on every
            // vertex but only on legally markable edges.
            for d in (join.len() + 1..=li.len()).rev() {
                out.push(MarkPos::VDl(li[..d].to_vec()));
                if d > join.len() + 1 && is_last_child(&self.base, &li[..d]) {
                    out.push(MarkPos::EDl(li[..d].to_vec()));
                }
            }
            out.push(MarkPos::H(join.clone(), i));
            // Downward from the join towards leaf i + 1.
            for d in join.len() + 1..=lj.len() {
                if d > join.len() + 1 && is_first_child(&lj[..d]) {
                    out.push(MarkPos::EDf(lj[..d].to_vec()));
                }
                out.push(MarkPos::VDf(lj[..d].to_vec()));
            }
        }
        out
    }

    /// The counts `(m_0, ..., m_n)`.
    pub fn m_counts(&self) -> Vec<u32> {
        let n = self.arity();
        (0..=n)
            .map(|i| {
                self.segment(i)
                    .iter()
                    .map(|pos| self.mark_multiplicity(pos))
                    .sum()
            })
            .collect()
    }

    pub fn total_marks(&self) -> u32 {
        let v: u32 = self
            .vmarks
            .values()
            .map(|m| m.df + m.dl + m.h.values().sum::<u32>())
            .sum();
        let e: u32 = self.emarks.values().map(|m| m.df + m.dl).sum();
        v + e
    }

    /// Codimension: mark units on vertices plus internal edges of the base
    /// (zero for arity 1, where the poset is discrete).
    pub fn codim(&self) -> usize {
        if self.arity() < 2 {
            return 0;
        }
        let vunits: u32 = self.vmarks.values().map(|m| m.df + m.dl).sum();
        vunits as usize + self.base.internal_edges()
    }

    // -- order -----------------------------------------------------------

    /// All single-step elements immediately above `self`: one mark unit
    /// shifted from a vertex to a legal incident edge, one first/last coface
    /// unit traded for a coherence mark at the parent join, or one internal
    /// edge contracted with its marks transported.
    pub fn covers(&self) -> Vec<CofacialTree> {
        let mut out = BTreeSet::new();
        let vs = vertices(&self.base);
        for v in &vs {
            let m = match self.vmarks.get(v) {
                Some(m) => m.clone(),
                None => continue,
            };
            let mut df_targets: Vec<Path> = Vec::new();
            let mut dl_targets: Vec<Path> = Vec::new();
            if !v.is_empty() && is_first_child(v) {
                df_targets.push(v.clone());
            }
            if !v.is_empty() && is_last_child(&self.base, v) {
                dl_targets.push(v.clone());
            }
            let cc = children_count(&self.base, v);
            if cc > 0 {
                let mut first = v.clone();
                first.push(0);
                df_targets.push(first);
                let mut last = v.clone();
                last.push(cc - 1);
                dl_targets.push(last);
            }
            if m.df > 0 {
                for e in &df_targets {
                    let mut t = self.clone();
                    t.remove_mark(&MarkPos::VDf(v.clone()), 1);
                    t.add_edf(e, 1);
                    out.insert(t);
                }
                // Trade for a coherence mark: a non-first child vertex pairs
                // its first leaf with the previous sibling's last leaf.
                if !v.is_empty() && !is_first_child(v) {
                    let (lo, _) = interval(&self.base, v);
                    let parent = v[..v.len() - 1].to_vec();
                    let mut t = self.clone();
                    t.remove_mark(&MarkPos::VDf(v.clone()), 1);
                    t.add_h(&parent, lo - 1, 1);
                    out.insert(t);
                }
            }
            if m.dl > 0 {
                for e in &dl_targets {
                    let mut t = self.clone();
                    t.remove_mark(&MarkPos::VDl(v.clone()), 1);
                    t.add_edl(e, 1);
                    out.insert(t);
                }
                if !v.is_empty() && !is_last_child(&self.base, v) {
                    let (_, hi) = interval(&self.base, v);
                    let parent = v[..v.len() - 1].to_vec();
                    let mut t = self.clone();
                    t.remove_mark(&MarkPos::VDl(v.clone()), 1);
                    t.add_h(&parent, hi, 1);
                    out.insert(t);
                }
            }
        }
        for w in &vs {
            if w.is_empty() || children_count(&self.base, w) == 0 {
                continue;
            }
            // A coface mark on the source vertex blocks the contraction:
            // vertex multiplicities only decrease upward.
            let src_units = self.vmarks.get(w).map(|m| m.df + m.dl).unwrap_or(0);
            if src_units > 0 {
                continue;
            }
            out.insert(self.contract(w));
        }
        out.into_iter().collect()
    }

    /// Contract the internal edge above `w`, transporting the edge's marks
    /// to the outer child edges of `w` and converting marks made illegal by
    /// the contraction into coherence marks at the merged vertex.
    fn contract(&self, w: &[usize]) -> CofacialTree {
        let cw = children_count(&self.base, w);
        let k = *w.last().unwrap();
        let parent = &w[..w.len() - 1];
        let mut pre = self.clone();
        if let Some(m) = pre.emarks.remove(&w.to_vec()) {
            let mut first = w.to_vec();
            first.push(0);
            let mut last = w.to_vec();
            last.push(cw - 1);
            pre.add_edf(&first, m.df);
            pre.add_edl(&last, m.dl);
        }
        let new_base = splice(&self.base, w);
        let remap = |p: &Path| -> Path {
            if p.len() >= w.len() && p[..w.len()] == *w {
                let mut q = parent.to_vec();
                q.push(k + p[w.len()]);
                q.extend_from_slice(&p[w.len() + 1..]);
                q
            } else if p.len() > parent.len() && p[..parent.len()] == *parent && p[parent.len()] > k
            {
                let mut q = p.clone();
                q[parent.len()] += cw - 1;
                q
            } else {
                p.clone()
            }
        };
        let mut t = CofacialTree::unmarked(new_base);
        for (p, m) in &pre.vmarks {
            let q = if p == w { parent.to_vec() } else { remap(p) };
            t.add_vdf(&q, m.df);
            t.add_vdl(&q, m.dl);
            for (&i, &c) in &m.h {
                t.add_h(&q, i, c);
            }
        }
        for (p, m) in &pre.emarks {
            let q = remap(p);
            if m.df > 0 {
                if is_first_child(&q) {
                    t.add_edf(&q, m.df);
                } else {
                    let (lo, _) = interval(t.base(), &q);
                    t.add_h(parent, lo - 1, m.df);
                }
            }
            if m.dl > 0 {
                if is_last_child(t.base(), &q) {
                    t.add_edl(&q, m.dl);
                } else {
                    let (_, hi) = interval(t.base(), &q);
                    t.add_h(parent, hi, m.dl);
                }
            }
        }
        t.prune();
        t
    }

    /// `self <= other`: reachability through [`CofacialTree::covers`].
    pub fn leq(&self, other: &CofacialTree) -> Result<bool, CofacialError> {
        if self.arity() != other.arity() {
            return Err(CofacialError::ArityMismatch(self.arity(), other.arity()));
        }
        if self == other {
            return Ok(true);
        }
        // The order is graded by codimension and constant on counts.
        if self.m_counts() != other.m_counts() || self.codim() <= other.codim() {
            return Ok(false);
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        queue.push_back(self.clone());
        while let Some(t) = queue.pop_front() {
            for c in t.covers() {
                if c == *other {
                    return Ok(true);
                }
                if c.codim() > other.codim() && seen.insert(c.clone()) {
                    queue.push_back(c);
                }
            }
        }
        Ok(false)
    }

    // -- operad structure --------------------------------------------------

    /// Graft `other` at leaf `i`, reindexing coherence marks and merging the
    /// marks of the identified vertices.
    pub fn compose(&self, i: usize, other: &CofacialTree) -> Result<CofacialTree, CofacialError> {
        let n = self.arity();
        let m = other.arity();
        if i < 1 || i > n {
            return Err(CofacialError::LeafIndex { index: i, arity: n });
        }
        let base = self.base.compose(i, &other.base).unwrap();
        let graft = if self.base.is_leaf() {
            Vec::new()
        } else {
            leaf_path(&self.base, i)
        };
        let mut t = CofacialTree::unmarked(base);
        for (p, mk) in &self.vmarks {
            t.add_vdf(p, mk.df);
            t.add_vdl(p, mk.dl);
            for (&j, &c) in &mk.h {
                let nj = if j >= i { j + m - 1 } else { j };
                t.add_h(p, nj, c);
            }
        }
        for (p, mk) in &self.emarks {
            t.add_edf(p, mk.df);
            t.add_edl(p, mk.dl);
        }
        for (p, mk) in &other.vmarks {
            let mut q = graft.clone();
            q.extend_from_slice(p);
            t.add_vdf(&q, mk.df);
            t.add_vdl(&q, mk.dl);
            for (&j, &c) in &mk.h {
                t.add_h(&q, j + i - 1, c);
            }
        }
        for (p, mk) in &other.emarks {
            let mut q = graft.clone();
            q.extend_from_slice(p);
            t.add_edf(&q, mk.df);
            t.add_edl(&q, mk.dl);
        }
        t.prune();
        Ok(t)
    }

    /// Strip marks; a morphism of operads onto plain planar trees.
    pub fn forget(&self) -> PlanarTree {
        self.base.clone()
    }

    /// No decomposition with both factors different from the unit.
    pub fn is_irreducible(&self) -> bool {
        if self.arity() == 1 {
            let m = self.m_counts();
            return m[0] + m[1] == 1;
        }
        let vunits: u32 = self.vmarks.values().map(|m| m.df + m.dl).sum();
        vunits == 0 && self.base.internal_edges() == 0
    }

    /// Unique `(T1, i, T2)` with both factors irreducible, defined exactly
    /// on codimension-1 elements.
    pub fn decompose1(&self) -> Result<(CofacialTree, usize, CofacialTree), CofacialError> {
        let c = self.codim();
        if c != 1 {
            return Err(CofacialError::WrongCodimension {
                expected: 1,
                found: c,
            });
        }
        let vunit = self
            .vmarks
            .iter()
            .find(|(_, m)| m.df + m.dl > 0)
            .map(|(p, m)| (p.clone(), m.df > 0));
        if let Some((p, is_df)) = vunit {
            let unit = if is_df {
                CofacialTree::one_tree(1, 0)
            } else {
                CofacialTree::one_tree(0, 1)
            };
            let mut rest = self.clone();
            rest.remove_mark(
                &if is_df {
                    MarkPos::VDf(p.clone())
                } else {
                    MarkPos::VDl(p.clone())
                },
                1,
            );
            if p.is_empty() {
                return Ok((unit, 1, rest));
            }
            let (lo, hi) = interval(&self.base, &p);
            debug_assert_eq!(lo, hi, "vertex unit on a codim-1 element sits at a leaf");
            return Ok((rest, lo, unit));
        }
        let w = vertices(&self.base)
            .into_iter()
            .find(|p| !p.is_empty() && children_count(&self.base, p) > 0)
            .expect("codim-1 without vertex units has an internal edge");
        Ok(self.split_at(&w))
    }

    /// Split off the full subtree above the internal edge at `w`:
    /// `self = outer ∘_{lo(w)} inner`.
    fn split_at(&self, w: &[usize]) -> (CofacialTree, usize, CofacialTree) {
        let (lo, _) = interval(&self.base, w);
        let sub = subtree_at(&self.base, w).clone();
        let m = sub.arity();
        let i = lo;
        let mut inner = CofacialTree::unmarked(sub);
        let mut outer = CofacialTree::unmarked(replace_by_leaf(&self.base, w));
        for (p, mk) in &self.vmarks {
            if p.len() >= w.len() && p[..w.len()] == *w {
                let q = p[w.len()..].to_vec();
                inner.add_vdf(&q, mk.df);
                inner.add_vdl(&q, mk.dl);
                for (&j, &c) in &mk.h {
                    inner.add_h(&q, j - (i - 1), c);
                }
            } else {
                outer.add_vdf(p, mk.df);
                outer.add_vdl(p, mk.dl);
                for (&j, &c) in &mk.h {
                    let nj = if j >= i + m - 1 { j - m + 1 } else { j };
                    outer.add_h(p, nj, c);
                }
            }
        }
        for (p, mk) in &self.emarks {
            if p.len() > w.len() && p[..w.len()] == *w {
                let q = p[w.len()..].to_vec();
                inner.add_edf(&q, mk.df);
                inner.add_edl(&q, mk.dl);
            } else {
                outer.add_edf(p, mk.df);
                outer.add_edl(p, mk.dl);
            }
        }
        inner.prune();
        outer.prune();
        (outer, i, inner)
    }

    /// All normalized presentations `(S1, S2, S3, j, k)` with `j <= k` of a
    /// codimension-2 element as a composition of three irreducibles, plus
    /// the ambiguity class: `'a'` (swap of two distinct arity-1 factors at
    /// one leaf), `'b'` (swap of two distinct arity-1 root factors), or
    /// `'c'` (unique).
    #[allow(clippy::type_complexity)]
    pub fn decompose2(
        &self,
    ) -> Result<
        (
            Vec<(CofacialTree, CofacialTree, CofacialTree, usize, usize)>,
            char,
        ),
        CofacialError,
    > {
        let c = self.codim();
        if c != 2 {
            return Err(CofacialError::WrongCodimension {
                expected: 2,
                found: c,
            });
        }
        let mut tuples = Vec::new();
        for (peeled, k, s3) in self.peel_last_factor() {
            if peeled.arity() == 1 {
                let m = peeled.m_counts();
                let singles = [CofacialTree::one_tree(1, 0), CofacialTree::one_tree(0, 1)];
                for s1 in &singles {
                    for s2 in &singles {
                        let prod = s1.compose(1, s2).unwrap();
                        if prod.m_counts() == m {
                            tuples.push((s1.clone(), s2.clone(), s3.clone(), 1, k));
                        }
                    }
                }
            } else {
                let (s1, j, s2) = peeled.decompose1()?;
                if j <= k {
                    tuples.push((s1, s2, s3.clone(), j, k));
                }
            }
        }
        tuples.sort();
        tuples.dedup();
        let class = match tuples.len() {
            1 => 'c',
            2 => {
                let (a, b) = (&tuples[0], &tuples[1]);
                if a.0 == b.0 && a.1 == b.2 && a.2 == b.1 && a.3 == a.4 {
                    'a'
                } else if a.0 == b.1 && a.1 == b.0 && a.2 == b.2 {
                    'b'
                } else {
                    return Err(CofacialError::Invalid(format!(
                        "unexpected decomposition pair {tuples:?}"
                    )));
                }
            }
            other => {
                return Err(CofacialError::Invalid(format!(
                    "codim-2 element with {other} normalized decompositions"
                )))
            }
        };
        Ok((tuples, class))
    }

    /// All ways to write `self = A ∘_k B` with `B` irreducible.
    fn peel_last_factor(&self) -> Vec<(CofacialTree, usize, CofacialTree)> {
        let mut out = Vec::new();
        for (p, m) in &self.vmarks {
            if p.is_empty() || children_count(&self.base, p) > 0 {
                continue;
            }
            let (lo, _) = interval(&self.base, p);
            if m.df > 0 {
                let mut rest = self.clone();
                rest.remove_mark(&MarkPos::VDf(p.clone()), 1);
                out.push((rest, lo, CofacialTree::one_tree(1, 0)));
            }
            if m.dl > 0 {
                let mut rest = self.clone();
                rest.remove_mark(&MarkPos::VDl(p.clone()), 1);
                out.push((rest, lo, CofacialTree::one_tree(0, 1)));
            }
        }
        for w in vertices(&self.base) {
            if w.is_empty() || children_count(&self.base, &w) == 0 {
                continue;
            }
            let (outer, i, inner) = self.split_at(&w);
            if inner.is_irreducible() {
                out.push((outer, i, inner));
            }
        }
        // Root units over an otherwise irreducible body.
        let root = self.vmarks.get(&Vec::new()).cloned().unwrap_or_default();
        if root.df + root.dl == 2 && self.arity() >= 2 {
            let mut body = self.clone();
            if let Some(m) = body.vmarks.get_mut(&Vec::new()) {
                m.df = 0;
                m.dl = 0;
            }
            body.prune();
            if body.is_irreducible() {
                out.push((CofacialTree::one_tree(root.df, root.dl), 1, body));
            }
        }
        out
    }

    // -- slot operators ------------------------------------------------------

    fn slot_position(&self, i: usize, j: usize) -> Option<MarkPos> {
        let seg = self.segment(i);
        let mut count = 0u32;
        for pos in seg {
            let mult = self.mark_multiplicity(&pos);
            if mult == 0 {
                continue;
            }
            if j as u32 > count && j as u32 <= count + mult {
                return Some(pos);
            }
            count += mult;
        }
        None
    }

    /// The coface `d_i^j`: bump the multiplicity at the j-th counted mark
    /// (`j = 0` for `i = 0` and `j = m_n + 1` for `i = n` bump the root).
    pub fn coface(&self, i: usize, j: usize) -> Result<CofacialTree, CofacialError> {
        let n = self.arity();
        let m = self.m_counts();
        if i > n {
            return Err(CofacialError::BadCoface { i, j });
        }
        let mut t = self.clone();
        if i == 0 && j == 0 {
            t.add_vdf(&[], 1);
            return Ok(t);
        }
        if i == n && j == m[n] as usize + 1 {
            t.add_vdl(&[], 1);
            return Ok(t);
        }
        if j < 1 || j > m[i] as usize {
            return Err(CofacialError::BadCoface { i, j });
        }
        let pos = self
            .slot_position(i, j)
            .ok_or(CofacialError::BadCoface { i, j })?;
        t.add_mark(&pos, 1);
        Ok(t)
    }

    /// The codegeneracy `s_i^j`: remove one copy of the (j+1)-th counted
    /// mark, `0 <= j <= m_i - 1`.
    pub fn codegeneracy(&self, i: usize, j: usize) -> Result<CofacialTree, CofacialError> {
        let n = self.arity();
        let m = self.m_counts();
        if i > n || j + 1 > m[i] as usize {
            return Err(CofacialError::BadCodegeneracy { i, j });
        }
        let pos = self
            .slot_position(i, j + 1)
            .ok_or(CofacialError::BadCodegeneracy { i, j })?;
        let mut t = self.clone();
        t.remove_mark(&pos, 1);
        Ok(t)
    }

    /// Serialization: `tree | vertex marks | edge marks` with dotted paths.
    pub fn to_string_form(&self) -> String {
        let fmt_path = |p: &Path| {
            if p.is_empty() {
                "r".to_string()
            } else {
                format!(
                    "r.{}",
                    p.iter()
                        .map(|k| k.to_string())
                        .collect::<Vec<_>>()
                        .join(".")
                )
            }
        };
        let mut s = self.base.to_bracket_string();
        for (p, m) in &self.vmarks {
            let mut marks = String::new();
            if m.df > 0 {
                marks.push_str(&format!(" df^{}", m.df));
            }
            if m.dl > 0 {
                marks.push_str(&format!(" dl^{}", m.dl));
            }
            for (i, k) in &m.h {
                marks.push_str(&format!(" h{i}^{k}"));
            }
            s.push_str(&format!(" | v {}:{}", fmt_path(p), marks));
        }
        for (p, m) in &self.emarks {
            let mut marks = String::new();
            if m.df > 0 {
                marks.push_str(&format!(" df^{}", m.df));
            }
            if m.dl > 0 {
                marks.push_str(&format!(" dl^{}", m.dl));
            }
            s.push_str(&format!(" | e {}:{}", fmt_path(p), marks));
        }
        s
    }
}

fn splice(t: &PlanarTree, w: &[usize]) -> PlanarTree {
    match t {
        PlanarTree::Node(cs) => {
            if w.len() == 1 {
                let k = w[0];
                let mut out = Vec::new();
                for (idx, c) in cs.iter().enumerate() {
                    if idx == k {
                        match c {
                            PlanarTree::Node(sub) => out.extend(sub.iter().cloned()),
                            PlanarTree::Leaf => panic!("cannot contract a leaf edge"),
                        }
                    } else {
                        out.push(c.clone());
                    }
                }
                PlanarTree::Node(out)
            } else {
                let mut out = cs.clone();
                out[w[0]] = splice(&cs[w[0]], &w[1..]);
                PlanarTree::Node(out)
            }
        }
        PlanarTree::Leaf => panic!("path descends below a leaf"),
    }
}

fn replace_by_leaf(t: &PlanarTree, w: &[usize]) -> PlanarTree {
    if w.is_empty() {
        return PlanarTree::Leaf;
    }
    match t {
        PlanarTree::Node(cs) => {
            let mut out = cs.clone();
            out[w[0]] = replace_by_leaf(&cs[w[0]], &w[1..]);
            PlanarTree::Node(out)
        }
        PlanarTree::Leaf => panic!("path descends below a leaf"),
    }
}

/// All cofacial trees with the given counts: every legal distribution of
/// `marks[i]` units over the `i`-th counting segment, for every base tree.
pub fn enumerate_component(arity: usize, marks: &[u32]) -> Vec<CofacialTree> {
    assert_eq!(marks.len(), arity + 1);
    if arity == 1 {
        return vec![CofacialTree::one_tree(marks[0], marks[1])];
    }
    let mut out = Vec::new();
    for base in crate::trees::enumerate(arity) {
        let skeleton = CofacialTree::unmarked(base);
        let mut partials = vec![skeleton.clone()];
        for i in 0..=arity {
            let seg = skeleton.segment(i);
            let mut next = Vec::new();
            for assignment in distribute(marks[i], seg.len()) {
                for p in &partials {
                    let mut t = p.clone();
                    for (pos, &k) in seg.iter().zip(assignment.iter()) {
                        t.add_mark(pos, k);
                    }
                    next.push(t);
                }
            }
            partials = next;
        }
        out.extend(partials);
    }
    out.sort();
    out.dedup();
    out
}

fn distribute(units: u32, slots: usize) -> Vec<Vec<u32>> {
    if slots == 0 {
        return if units == 0 { vec![vec![]] } else { vec![] };
    }
    if slots == 1 {
        return vec![vec![units]];
    }
    let mut out = Vec::new();
    for first in 0..=units {
        for rest in distribute(units - first, slots - 1) {
            let mut v = vec![first];
            v.extend(rest);
            out.push(v);
        }
    }
    out
}

/// A fully materialized component with its cover graph.
pub struct Component {
    pub elements: Vec<CofacialTree>,
    pub covers: Vec<Vec<usize>>,
}

impl Component {
    pub fn new(arity: usize, marks: &[u32]) -> Self {
        let elements = enumerate_component(arity, marks);
        let index: BTreeMap<&CofacialTree, usize> =
            elements.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let covers = elements
            .iter()
            .map(|t| {
                t.covers()
                    .into_iter()
                    .map(|c| *index.get(&c).expect("cover stays in the component"))
                    .collect()
            })
            .collect();
        Component { elements, covers }
    }

    pub fn maximum_index(&self) -> usize {
        let maxima: Vec<usize> = (0..self.elements.len())
            .filter(|&i| self.covers[i].is_empty())
            .collect();
        assert_eq!(maxima.len(), 1, "component has a unique maximum");
        maxima[0]
    }

    /// Elements below `idx` (inclusive) in the cover graph.
    pub fn down_set(&self, idx: usize) -> BTreeSet<usize> {
        (0..self.elements.len())
            .filter(|&i| self.reachable(i, idx))
            .collect()
    }

    /// Immediate predecessors of `idx` (the inverse of the cover relation).
    pub fn lowers(&self, idx: usize) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&i| self.covers[i].contains(&idx))
            .collect()
    }

    pub fn reachable(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([from]);
        while let Some(i) = queue.pop_front() {
            for &c in &self.covers[i] {
                if c == to {
                    return true;
                }
                if seen.insert(c) {
                    queue.push_back(c);
                }
            }
        }
        false
    }

    pub fn hasse_dot(&self) -> String {
        let mut s = String::from("digraph ctcomponent {\n  rankdir=BT;\n");
        for (i, t) in self.elements.iter().enumerate() {
            s.push_str(&format!(
                "  n{i} [label=\"{}\", shape=box];\n",
                t.to_string_form().replace('"', "'")
            ));
        }
        for (i, cs) in self.covers.iter().enumerate() {
            for c in cs {
                s.push_str(&format!("  n{i} -> n{c};\n"));
            }
        }
        s.push_str("}\n");
        s
    }
}

// -- cone coordinates on component realizations ------------------------------

/// A point of the realization of a component, in recursive cone
/// coordinates. The apex is the barycenter of the component maximum; a
/// boundary chart is indexed by a codimension-1 decomposition into
/// irreducibles, with factors again cone points of their own components.
/// `Point1` is the one-point space of an arity-1 component.
#[derive(Clone, Debug, PartialEq)]
pub enum CkConePoint {
    Point1 {
        df: u32,
        dl: u32,
    },
    Apex {
        arity: usize,
        marks: Vec<u32>,
    },
    Cone {
        t: f64,
        i: usize,
        left: Box<CkConePoint>,
        right: Box<CkConePoint>,
    },
}

impl CkConePoint {
    pub fn arity(&self) -> usize {
        match self {
            CkConePoint::Point1 { .. } => 1,
            CkConePoint::Apex { arity, .. } => *arity,
            CkConePoint::Cone { left, right, .. } => left.arity() + right.arity() - 1,
        }
    }

    /// The counts `(m_0, ..., m_n)` of the component the point lives in.
    pub fn marks(&self) -> Vec<u32> {
        match self {
            CkConePoint::Point1 { df, dl } => vec![*df, *dl],
            CkConePoint::Apex { marks, .. } => marks.clone(),
            CkConePoint::Cone { i, left, right, .. } => {
                merge_marks(&left.marks(), *i, &right.marks())
            }
        }
    }

    /// The maximum of the component (an irreducible cofacial tree when used
    /// as a chart factor).
    pub fn component_max(&self) -> CofacialTree {
        CofacialTree::maximum(self.arity(), &self.marks())
    }

    /// The flat `(i, j)` slot list of the component.
    pub fn slots(&self) -> Vec<(usize, usize)> {
        let marks = self.marks();
        let mut out = Vec::new();
        for (i, &m) in marks.iter().enumerate() {
            for j in 1..=m as usize {
                out.push((i, j));
            }
        }
        out
    }

    /// Image in associahedron cone coordinates under mark forgetting;
    /// arity-1 chart factors scale the cone parameter multiplicatively.
    pub fn forget(&self) -> ConePoint {
        match self {
            CkConePoint::Point1 { .. } => ConePoint::Unit,
            CkConePoint::Apex { arity, .. } => {
                if *arity == 1 {
                    ConePoint::Unit
                } else {
                    ConePoint::Apex { arity: *arity }
                }
            }
            CkConePoint::Cone { t, i, left, right } => {
                if left.arity() == 1 {
                    scale_cone(*t, right.forget())
                } else if right.arity() == 1 {
                    scale_cone(*t, left.forget())
                } else {
                    ConePoint::Cone {
                        t: *t,
                        i: *i,
                        left: Box::new(left.forget()),
                        right: Box::new(right.forget()),
                    }
                }
            }
        }
    }
}

fn scale_cone(t: f64, p: ConePoint) -> ConePoint {
    match p {
        ConePoint::Cone {
            t: t2,
            i,
            left,
            right,
        } => ConePoint::Cone {
            t: t * t2,
            i,
            left,
            right,
        },
        other => other,
    }
}

/// Merged counts of `left ∘_i right`.
pub fn merge_marks(m: &[u32], i: usize, mp: &[u32]) -> Vec<u32> {
    let n2 = mp.len() - 1;
    let mut out = Vec::with_capacity(m.len() + mp.len() - 2);
    out.extend_from_slice(&m[..i - 1]);
    out.push(m[i - 1] + mp[0]);
    out.extend_from_slice(&mp[1..n2]);
    out.push(m[i] + mp[n2]);
    out.extend_from_slice(&m[i + 1..]);
    out
}

/// Composition of component cone points; the unmarked arity-1 point is the
/// operad unit, marked arity-1 pairs combine additively.
pub fn ck_compose(p: &CkConePoint, i: usize, q: &CkConePoint) -> CkConePoint {
    match (p, q) {
        (CkConePoint::Point1 { df: 0, dl: 0 }, _) => q.clone(),
        (_, CkConePoint::Point1 { df: 0, dl: 0 }) => p.clone(),
        (CkConePoint::Point1 { df: a, dl: b }, CkConePoint::Point1 { df: c, dl: d }) => {
            CkConePoint::Point1 {
                df: a + c,
                dl: b + d,
            }
        }
        _ => CkConePoint::Cone {
            t: 1.0,
            i,
            left: Box::new(p.clone()),
            right: Box::new(q.clone()),
        },
    }
}

/// Barycentric canonicalization on component realizations, mirroring the
/// associahedron case; used to certify chart-overlap well-definedness.
pub fn ck_to_barycentric(p: &CkConePoint) -> Vec<(CofacialTree, f64)> {
    match p {
        CkConePoint::Point1 { df, dl } => vec![(CofacialTree::one_tree(*df, *dl), 1.0)],
        CkConePoint::Apex { arity, marks } => {
            vec![(CofacialTree::maximum(*arity, marks), 1.0)]
        }
        CkConePoint::Cone { t, i, left, right } => {
            let stair = |b: Vec<(CofacialTree, f64)>| -> Vec<(f64, CofacialTree)> {
                let mut acc = 0.0;
                let mut out = Vec::new();
                for (tree, w) in b {
                    acc += w;
                    out.push((acc, tree));
                }
                if let Some(last) = out.last_mut() {
                    last.0 = 1.0;
                }
                out
            };
            let sl = stair(ck_to_barycentric(left));
            let sr = stair(ck_to_barycentric(right));
            let mut cuts: Vec<f64> = sl.iter().chain(sr.iter()).map(|(c, _)| *c).collect();
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON);
            let mut weights: Vec<(CofacialTree, f64)> = Vec::new();
            let mut prev = 0.0;
            for c in cuts {
                let mid = 0.5 * (prev + c);
                let a = &sl.iter().find(|(cut, _)| mid <= *cut).unwrap().1;
                let b = &sr.iter().find(|(cut, _)| mid <= *cut).unwrap().1;
                weights.push((a.compose(*i, b).unwrap(), (c - prev) * t));
                prev = c;
            }
            weights.push((p.component_max(), 1.0 - t));
            let mut merged: BTreeMap<CofacialTree, f64> = BTreeMap::new();
            for (tree, w) in weights {
                if w > 1e-12 {
                    *merged.entry(tree).or_insert(0.0) += w;
                }
            }
            merged.into_iter().collect()
        }
    }
}
