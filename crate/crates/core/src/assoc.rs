//! The associahedron `K(n)` as the realization of the tree poset.
//!
//! Points carry two interchangeable descriptions: recursive cone
//! coordinates (apex at the corolla barycenter, boundary charts indexed by
//! codimension-1 faces) and barycentric weights on a chain of trees. The
//! barycentric form is the canonical one; cone points are compared by
//! converting and matching weights within [`BARY_TOL`].

use std::collections::BTreeMap;

use crate::trees::{self, PlanarTree};

/// Tolerance for equality of barycentric weights.
pub const BARY_TOL: f64 = 1e-12;

/// Dimension of the open cell of `t` inside `K(n)`.
pub fn dim(t: &PlanarTree) -> usize {
    (t.arity() - 1) - t.internal_vertices()
}

/// Face counts of `K(n)` by dimension `0 ..= n-2`.
pub fn fvector(n: usize) -> Vec<usize> {
    assert!(n >= 2);
    let mut counts = vec![0usize; n - 1];
    for t in trees::enumerate(n) {
        counts[dim(&t)] += 1;
    }
    counts
}

/// A point of `K(n)` in recursive cone coordinates.
///
/// `Apex { arity }` is the corolla barycenter (the cone parameter `t = 0`);
/// `Cone { t, i, left, right }` lies at parameter `t` on the ray towards the
/// boundary point of the codim-1 face `corolla(n1) ∘_i corolla(n2)` charted
/// by `(left, right)`; `Unit` is the point of `K(1)`. `K(2)` is `Apex { 2 }`.
#[derive(Clone, Debug, PartialEq)]
pub enum ConePoint {
    Unit,
    Apex {
        arity: usize,
    },
    Cone {
        t: f64,
        i: usize,
        left: Box<ConePoint>,
        right: Box<ConePoint>,
    },
}

impl ConePoint {
    pub fn arity(&self) -> usize {
        match self {
            ConePoint::Unit => 1,
            ConePoint::Apex { arity } => *arity,
            ConePoint::Cone { left, right, .. } => left.arity() + right.arity() - 1,
        }
    }

    /// Validity: cone parameters in `[0, 1]`, chart factors of arity >= 2.
    pub fn is_valid(&self) -> bool {
        match self {
            ConePoint::Unit | ConePoint::Apex { .. } => true,
            ConePoint::Cone { t, left, right, .. } => {
                (0.0..=1.0).contains(t)
                    && left.arity() >= 2
                    && right.arity() >= 2
                    && left.is_valid()
                    && right.is_valid()
            }
        }
    }
}

/// Composition of cone points: the result sits on the boundary face
/// `corolla(n1) ∘_i corolla(n2)` at cone parameter 1. Unit points pass
/// through.
pub fn cone_compose(p: &ConePoint, i: usize, q: &ConePoint) -> ConePoint {
    match (p, q) {
        (ConePoint::Unit, _) => q.clone(),
        (_, ConePoint::Unit) => p.clone(),
        _ => ConePoint::Cone {
            t: 1.0,
            i,
            left: Box::new(p.clone()),
            right: Box::new(q.clone()),
        },
    }
}

/// Barycentric coordinates: positive weights on a chain of trees of one
/// arity, summing to 1. Supports are kept sorted ascending in the order.
#[derive(Clone, Debug)]
pub struct BarycentricPoint {
    pub weights: Vec<(PlanarTree, f64)>,
}

impl BarycentricPoint {
    pub fn vertex(t: PlanarTree) -> Self {
        BarycentricPoint {
            weights: vec![(t, 1.0)],
        }
    }

    fn normalize(mut weights: Vec<(PlanarTree, f64)>) -> Self {
        weights.retain(|(_, w)| *w > BARY_TOL);
        let mut merged: BTreeMap<PlanarTree, f64> = BTreeMap::new();
        for (t, w) in weights {
            *merged.entry(t).or_insert(0.0) += w;
        }
        let mut out: Vec<(PlanarTree, f64)> = merged.into_iter().collect();
        // Chains are totally ordered by contraction; sort ascending.
        out.sort_by(|a, b| {
            let le = a.0.leq(&b.0).unwrap_or(false);
            if a.0 == b.0 {
                std::cmp::Ordering::Equal
            } else if le {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        BarycentricPoint { weights: out }
    }

    /// Support must form a chain and weights sum to 1.
    pub fn is_valid(&self) -> bool {
        let sum: f64 = self.weights.iter().map(|(_, w)| w).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return false;
        }
        for i in 0..self.weights.len() {
            for j in (i + 1)..self.weights.len() {
                let (a, b) = (&self.weights[i].0, &self.weights[j].0);
                if !(a.leq(b).unwrap_or(false) || b.leq(a).unwrap_or(false)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn approx_eq(&self, other: &BarycentricPoint) -> bool {
        self.distance(other) <= BARY_TOL
    }

    /// L-infinity distance over the union of supports.
    pub fn distance(&self, other: &BarycentricPoint) -> f64 {
        let mut keys: Vec<&PlanarTree> = self.weights.iter().map(|(t, _)| t).collect();
        keys.extend(other.weights.iter().map(|(t, _)| t));
        let get = |p: &BarycentricPoint, k: &PlanarTree| {
            p.weights
                .iter()
                .find(|(t, _)| t == k)
                .map(|(_, w)| *w)
                .unwrap_or(0.0)
        };
        keys.iter()
            .map(|k| (get(self, k) - get(other, k)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self
            .weights
            .iter()
            .map(|(t, w)| serde_json::json!({ "tree": t.to_bracket_string(), "weight": w }))
            .collect::<Vec<_>>())
    }
}

/// Cumulative-weight staircase of a barycentric point: breakpoints
/// `0 < c_1 < ... < c_k = 1` with the chain element active on each piece.
fn staircase(p: &BarycentricPoint) -> Vec<(f64, &PlanarTree)> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(p.weights.len());
    for (t, w) in &p.weights {
        acc += w;
        out.push((acc, t));
    }
    if let Some(last) = out.last_mut() {
        last.0 = 1.0;
    }
    out
}

/// The product map `|P| x |Q| -> |P x Q| -> |<T1 ∘_i T2>|`: merge the two
/// cumulative staircases and compose the active pair on each piece.
pub fn shuffle_compose(p: &BarycentricPoint, i: usize, q: &BarycentricPoint) -> BarycentricPoint {
    let sp = staircase(p);
    let sq = staircase(q);
    let mut cuts: Vec<f64> = sp.iter().chain(sq.iter()).map(|(c, _)| *c).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON);
    let mut weights = Vec::new();
    let mut prev = 0.0;
    for c in cuts {
        let mid = 0.5 * (prev + c);
        let a = sp
            .iter()
            .find(|(cut, _)| mid <= *cut)
            .map(|(_, t)| *t)
            .expect("staircase covers [0,1]");
        let b = sq
            .iter()
            .find(|(cut, _)| mid <= *cut)
            .map(|(_, t)| *t)
            .expect("staircase covers [0,1]");
        weights.push((a.compose(i, b).unwrap(), c - prev));
        prev = c;
    }
    BarycentricPoint::normalize(weights)
}

/// Canonical order-complex coordinates of a cone point.
pub fn to_barycentric(p: &ConePoint) -> BarycentricPoint {
    match p {
        ConePoint::Unit => BarycentricPoint::vertex(PlanarTree::unit()),
        ConePoint::Apex { arity } => BarycentricPoint::vertex(PlanarTree::corolla(*arity)),
        ConePoint::Cone { t, i, left, right } => {
            let n = p.arity();
            let boundary = shuffle_compose(&to_barycentric(left), *i, &to_barycentric(right));
            let mut weights: Vec<(PlanarTree, f64)> = boundary
                .weights
                .into_iter()
                .map(|(tree, w)| (tree, w * t))
                .collect();
            weights.push((PlanarTree::corolla(n), 1.0 - t));
            BarycentricPoint::normalize(weights)
        }
    }
}

/// A seeded random cone point, used by sampling suites.
pub fn random_cone_point<R: rand::Rng>(rng: &mut R, n: usize) -> ConePoint {
    if n == 1 {
        return ConePoint::Unit;
    }
    if n == 2 {
        return ConePoint::Apex { arity: 2 };
    }
    if rng.gen_bool(0.3) {
        return ConePoint::Apex { arity: n };
    }
    let n1 = rng.gen_range(2..n);
    let n2 = n + 1 - n1;
    let i = rng.gen_range(1..=n1);
    ConePoint::Cone {
        t: rng.gen_range(0.0..=1.0),
        i,
        left: Box::new(random_cone_point(rng, n1)),
        right: Box::new(random_cone_point(rng, n2)),
    }
}

/// The open cell containing the point: the minimum of the barycentric
/// support.
pub fn face_of(p: &ConePoint) -> PlanarTree {
    to_barycentric(p)
        .weights
        .first()
        .map(|(t, _)| t.clone())
        .expect("barycentric support nonempty")
}
