//! Discrete (set-level) models of the tree-indexed monads: elements are a
//! cofacial tree together with elements of truncated cosimplicial sets, one
//! per leaf, modulo the relations trading leaf marks for outer cofaces.

use std::collections::BTreeMap;

use crate::cofacial::{CofacialTree, MarkPos, Path};
use crate::trees::PlanarTree;

use super::CosimpError;

/// A truncated cosimplicial set with explicitly tabulated elements and
/// operator tables. Cofaces are expected to be injective (true for all the
/// instances built here), which the box-product normal form relies on.
#[derive(Clone, Debug)]
pub struct CosimplicialSet {
    pub name: String,
    /// `levels[p]` lists the elements of degree `p` as opaque label vectors.
    pub levels: Vec<Vec<Vec<usize>>>,
}

impl CosimplicialSet {
    pub fn n(&self) -> usize {
        self.levels.len() - 1
    }

    /// The cosimplicial set `p -> monotone maps [m] -> [p]`, truncated at
    /// degree `n`; cofaces and codegeneracies act by postcomposition.
    pub fn hom_delta(m: usize, n: usize) -> Self {
        fn monotone(len: usize, max: usize) -> Vec<Vec<usize>> {
            fn rec(len: usize, max: usize, start: usize) -> Vec<Vec<usize>> {
                if len == 0 {
                    return vec![vec![]];
                }
                let mut out = Vec::new();
                for v in start..=max {
                    for rest in rec(len - 1, max, v) {
                        let mut t = vec![v];
                        t.extend(rest);
                        out.push(t);
                    }
                }
                out
            }
            rec(len, max, 0)
        }
        CosimplicialSet {
            name: format!("hom_delta({m})"),
            levels: (0..=n).map(|p| monotone(m + 1, p)).collect(),
        }
    }

    pub fn index_of(&self, p: usize, elem: &[usize]) -> usize {
        self.levels[p]
            .iter()
            .position(|e| e == elem)
            .expect("element present")
    }

    /// Coface `d^i` out of degree `p` (0 <= i <= p+1).
    pub fn d(&self, p: usize, i: usize, idx: usize) -> usize {
        let elem = &self.levels[p][idx];
        let image: Vec<usize> = elem.iter().map(|&x| if x < i { x } else { x + 1 }).collect();
        self.index_of(p + 1, &image)
    }

    /// Codegeneracy `s^j` out of degree `p` (1 <= p, 0 <= j <= p-1).
    pub fn s(&self, p: usize, j: usize, idx: usize) -> usize {
        let elem = &self.levels[p][idx];
        let image: Vec<usize> = elem.iter().map(|&x| if x <= j { x } else { x - 1 }).collect();
        self.index_of(p - 1, &image)
    }

    /// Preimage under the top coface `d^p : X^{p-1} -> X^p`, if any.
    pub fn top_preimage(&self, p: usize, idx: usize) -> Option<usize> {
        if p == 0 {
            return None;
        }
        (0..self.levels[p - 1].len()).find(|&y| self.d(p - 1, p, y) == idx)
    }
}

/// A degree-`p` element of a cosimplicial set, by level and index.
pub type SetElem = (usize, usize);

/// An element of the discrete tree-indexed monad on `(X_1, ..., X_n)`: a
/// cofacial tree of arity `n` and one element per leaf, kept in the normal
/// form with no marks on leaf vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MckElement {
    pub tree: CofacialTree,
    pub xs: Vec<SetElem>,
}

impl MckElement {
    /// Build and normalize.
    pub fn new(tree: CofacialTree, xs: Vec<SetElem>, ctx: &[CosimplicialSet]) -> Self {
        assert_eq!(tree.arity(), xs.len());
        assert_eq!(ctx.len(), xs.len());
        let mut e = MckElement { tree, xs };
        e.normalize(ctx);
        e
    }

    /// Cosimplicial degree: total marks plus the degrees of the entries.
    pub fn degree(&self) -> usize {
        self.tree.total_marks() as usize + self.xs.iter().map(|(p, _)| p).sum::<usize>()
    }

    /// Strip leaf-vertex marks into outer cofaces on the entries: one `dl`
    /// becomes the top coface (applied first), one `df` the zeroth. At
    /// arity 1 the only vertex is a leaf, so all marks strip.
    fn normalize(&mut self, ctx: &[CosimplicialSet]) {
        let n = self.tree.arity();
        for leaf in 1..=n {
            let path = leaf_vertex_path(self.tree.base(), leaf);
            let df = self.tree.mark_multiplicity(&MarkPos::VDf(path.clone()));
            let dl = self.tree.mark_multiplicity(&MarkPos::VDl(path.clone()));
            if df == 0 && dl == 0 {
                continue;
            }
            let (mut p, mut idx) = self.xs[leaf - 1];
            for _ in 0..dl {
                idx = ctx[leaf - 1].d(p, p + 1, idx);
                p += 1;
            }
            for _ in 0..df {
                idx = ctx[leaf - 1].d(p, 0, idx);
                p += 1;
            }
            self.xs[leaf - 1] = (p, idx);
            let mut t = self.tree.clone();
            t.remove_mark(&MarkPos::VDf(path.clone()), df);
            t.remove_mark(&MarkPos::VDl(path.clone()), dl);
            self.tree = t;
        }
    }

    /// The flat block layout: alternating tree segments and entry degrees.
    fn block_bounds(&self) -> (Vec<u32>, Vec<usize>) {
        (
            self.tree.m_counts(),
            self.xs.iter().map(|(p, _)| *p).collect(),
        )
    }

    /// Coface `d^j`, `0 <= j <= degree + 1`: routed to a tree slot operator
    /// or to a coface of one entry, then renormalized.
    pub fn coface(&self, j: usize, ctx: &[CosimplicialSet]) -> Result<MckElement, CosimpError> {
        let (m, ps) = self.block_bounds();
        let n = self.xs.len();
        let l = self.degree();
        if j > l + 1 {
            return Err(CosimpError::Degree(j, l + 1));
        }
        if j == 0 {
            let t = self.tree.coface(0, 0).map_err(coferr)?;
            return Ok(MckElement::new(t, self.xs.clone(), ctx));
        }
        if j == l + 1 {
            let t = self
                .tree
                .coface(n, m[n] as usize + 1)
                .map_err(coferr)?;
            return Ok(MckElement::new(t, self.xs.clone(), ctx));
        }
        // Walk blocks: m_0, p_1, m_1, p_2, ..., p_n, m_n.
        let mut pos = 0usize;
        for i in 0..=n {
            if j <= pos + m[i] as usize {
                let t = self.tree.coface(i, j - pos).map_err(coferr)?;
                return Ok(MckElement::new(t, self.xs.clone(), ctx));
            }
            pos += m[i] as usize;
            if i < n {
                if j <= pos + ps[i] {
                    let j2 = j - pos;
                    let (p, idx) = self.xs[i];
                    let mut xs = self.xs.clone();
                    xs[i] = (p + 1, ctx[i].d(p, j2, idx));
                    return Ok(MckElement::new(self.tree.clone(), xs, ctx));
                }
                pos += ps[i];
            }
        }
        Err(CosimpError::Degree(j, l))
    }

    /// Codegeneracy `s^j`, `0 <= j <= degree - 1`.
    pub fn codegeneracy(&self, j: usize, ctx: &[CosimplicialSet]) -> Result<MckElement, CosimpError> {
        let (m, ps) = self.block_bounds();
        let n = self.xs.len();
        let l = self.degree();
        if l == 0 || j > l - 1 {
            return Err(CosimpError::Degree(j, l));
        }
        let mut pos = 0usize;
        for i in 0..=n {
            if j < pos + m[i] as usize {
                let t = self.tree.codegeneracy(i, j - pos).map_err(coferr)?;
                return Ok(MckElement::new(t, self.xs.clone(), ctx));
            }
            pos += m[i] as usize;
            if i < n {
                if j < pos + ps[i] {
                    let j2 = j - pos;
                    let (p, idx) = self.xs[i];
                    let mut xs = self.xs.clone();
                    xs[i] = (p - 1, ctx[i].s(p, j2, idx));
                    return Ok(MckElement::new(self.tree.clone(), xs, ctx));
                }
                pos += ps[i];
            }
        }
        Err(CosimpError::Degree(j, l))
    }

    /// Monad composition: graft `other` into slot `i`, whose entry is
    /// consumed (the inner element takes the slot's place). The result is
    /// over the spliced context.
    pub fn compose(
        &self,
        i: usize,
        other: &MckElement,
        spliced_ctx: &[CosimplicialSet],
    ) -> MckElement {
        let tree = self.tree.compose(i, &other.tree).expect("index in range");
        let mut xs = Vec::new();
        xs.extend_from_slice(&self.xs[..i - 1]);
        xs.extend_from_slice(&other.xs);
        xs.extend_from_slice(&self.xs[i..]);
        MckElement::new(tree, xs, spliced_ctx)
    }

    /// Forget marks: the underlying tree and the box-product word with the
    /// counted marks pushed into cofaces (`dl`s first, then `df`s).
    pub fn forget(&self, ctx: &[CosimplicialSet]) -> MkElement {
        MkElement::new(self.tree.forget(), self.forget_word_raw(ctx), ctx)
    }

    /// The prefixed entry list before the box-product normal form; entry
    /// `i` carries `df^{m_{i-1}}`, the last one also `dl^{m_n}`.
    pub fn forget_word_raw(&self, ctx: &[CosimplicialSet]) -> Vec<SetElem> {
        let m = self.tree.m_counts();
        let n = self.xs.len();
        let mut word = Vec::with_capacity(n);
        for (i, &(p, idx)) in self.xs.iter().enumerate() {
            let (mut p, mut idx) = (p, idx);
            if i == n - 1 {
                for _ in 0..m[n] {
                    idx = ctx[i].d(p, p + 1, idx);
                    p += 1;
                }
            }
            for _ in 0..m[i] {
                idx = ctx[i].d(p, 0, idx);
                p += 1;
            }
            word.push((p, idx));
        }
        word
    }
}

fn coferr(e: crate::cofacial::CofacialError) -> CosimpError {
    CosimpError::BadInput(e.to_string())
}

fn leaf_vertex_path(base: &PlanarTree, leaf: usize) -> Path {
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
    assert!(walk(base, leaf, &mut p));
    p
}

/// An element of the plain tree-indexed monad: a planar tree and a word in
/// the box product of the `X_i`, in the canonical form that pushes top
/// cofaces rightward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MkElement {
    pub tree: PlanarTree,
    pub word: Vec<SetElem>,
}

impl MkElement {
    pub fn new(tree: PlanarTree, word: Vec<SetElem>, ctx: &[CosimplicialSet]) -> Self {
        let mut e = MkElement { tree, word };
        e.normalize(ctx);
        e
    }

    pub fn degree(&self) -> usize {
        self.word.iter().map(|(p, _)| p).sum()
    }

    fn normalize(&mut self, ctx: &[CosimplicialSet]) {
        let n = self.word.len();
        if n <= 1 {
            return;
        }
        loop {
            let mut moved = false;
            for i in 0..n - 1 {
                let (p, idx) = self.word[i];
                if let Some(pre) = ctx[i].top_preimage(p, idx) {
                    self.word[i] = (p - 1, pre);
                    let (q, jdx) = self.word[i + 1];
                    self.word[i + 1] = (q + 1, ctx[i + 1].d(q, 0, jdx));
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }

    /// Box-product coface: route `d^j` across the word by degree blocks.
    pub fn coface(&self, j: usize, ctx: &[CosimplicialSet]) -> Result<MkElement, CosimpError> {
        let l = self.degree();
        if j > l + 1 {
            return Err(CosimpError::Degree(j, l + 1));
        }
        let n = self.word.len();
        let mut j = j;
        let mut word = self.word.clone();
        for i in 0..n {
            let (p, idx) = word[i];
            let last = i == n - 1;
            let cap = if last { p + 1 } else { p };
            if j <= cap {
                word[i] = (p + 1, ctx[i].d(p, j, idx));
                return Ok(MkElement::new(self.tree.clone(), word, ctx));
            }
            j -= p;
        }
        Err(CosimpError::Degree(j, l))
    }

    pub fn codegeneracy(&self, j: usize, ctx: &[CosimplicialSet]) -> Result<MkElement, CosimpError> {
        let l = self.degree();
        if l == 0 || j > l - 1 {
            return Err(CosimpError::Degree(j, l));
        }
        let n = self.word.len();
        let mut j = j;
        let mut word = self.word.clone();
        for i in 0..n {
            let (p, idx) = word[i];
            if p > 0 && j <= p - 1 {
                word[i] = (p - 1, ctx[i].s(p, j, idx));
                return Ok(MkElement::new(self.tree.clone(), word, ctx));
            }
            j -= p;
        }
        Err(CosimpError::Degree(j, l))
    }

    /// Composition with the slot-`i` word entry consumed by the inner word.
    pub fn compose(&self, i: usize, other: &MkElement, spliced_ctx: &[CosimplicialSet]) -> MkElement {
        let tree = self.tree.compose(i, &other.tree).expect("index in range");
        let mut word = Vec::new();
        word.extend_from_slice(&self.word[..i - 1]);
        word.extend_from_slice(&other.word);
        word.extend_from_slice(&self.word[i..]);
        MkElement::new(tree, word, spliced_ctx)
    }
}

/// Count the degree-`l` elements of the discrete monad on `(X_1..X_n)` over
/// a fixed arity, by brute force over components and degree partitions of
/// normalized elements; used as a dimension oracle in tests.
pub fn mck_count_by_degree(
    arity: usize,
    ctx: &[CosimplicialSet],
    max_marks: u32,
    l: usize,
) -> usize {
    use crate::cofacial::enumerate_component;
    let mut seen: BTreeMap<String, ()> = BTreeMap::new();
    for marks in all_marks(arity, max_marks) {
        let mark_total: u32 = marks.iter().sum();
        if mark_total as usize > l {
            continue;
        }
        for t in enumerate_component(arity, &marks) {
            for xs in degree_tuples(ctx, l - mark_total as usize) {
                let e = MckElement::new(t.clone(), xs, ctx);
                if e.degree() == l {
                    seen.insert(format!("{e:?}"), ());
                }
            }
        }
    }
    seen.len()
}

fn all_marks(arity: usize, max_total: u32) -> Vec<Vec<u32>> {
    fn rec(slots: usize, budget: u32) -> Vec<Vec<u32>> {
        if slots == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for v in 0..=budget {
            for rest in rec(slots - 1, budget - v) {
                let mut m = vec![v];
                m.extend(rest);
                out.push(m);
            }
        }
        out
    }
    rec(arity + 1, max_total)
}

fn degree_tuples(ctx: &[CosimplicialSet], total: usize) -> Vec<Vec<SetElem>> {
    fn rec(ctx: &[CosimplicialSet], total: usize) -> Vec<Vec<SetElem>> {
        if ctx.is_empty() {
            return if total == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        let x = &ctx[0];
        for p in 0..=total.min(x.n()) {
            for idx in 0..x.levels[p].len() {
                for rest in rec(&ctx[1..], total - p) {
                    let mut t = vec![(p, idx)];
                    t.extend(rest);
                    out.push(t);
                }
            }
        }
        out
    }
    rec(ctx, total)
}
