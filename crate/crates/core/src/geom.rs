//! Numeric tubular-neighborhood engine on the unit circle.
//!
//! The manifold is fixed: the unit circle embedded in the plane, whose
//! closest-point projection has a closed form and reach 1. Points of the
//! circle are angles. An expansion is a linear map of the plane into a
//! bigger Euclidean space scaling all norms by a constant `c >= 1`; tube
//! points are vectors near the image circle. On top of the projection the
//! module builds the inductive radius function and perturbation maps over
//! associahedron cone coordinates, their marked refinements over component
//! cone coordinates, loop concatenation, and the two classical
//! counterexample demos.

use rand::Rng;

use crate::assoc::ConePoint;
use crate::cofacial::CkConePoint;
use crate::surj::MonotoneSurj;
use crate::trees::{enumerate_binary, PlanarTree};

use thiserror::Error;

/// Reach of the base embedding.
pub const REACH: f64 = 1.0;
/// Upper bound for tube radii.
pub const EPS_MAX: f64 = REACH / 16.0;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("point outside the projection's reach")]
    OutsideReach,
    #[error("configuration outside the gated domain: dist {dist} > {gate}")]
    OutsideDomain { dist: f64, gate: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// A point of the circle, stored as an angle in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point(pub f64);

impl Point {
    pub fn embed(&self) -> [f64; 2] {
        [self.0.cos(), self.0.sin()]
    }

    /// Chord distance in the ambient plane.
    pub fn dist(&self, other: &Point) -> f64 {
        let a = self.embed();
        let b = other.embed();
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }
}

/// A linear map of the plane into `R^k` scaling all norms by `c`: the
/// composite of `c` and a `k x 2` frame with orthonormal columns.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub c: f64,
    /// Row-major `k x 2`.
    pub q: Vec<[f64; 2]>,
}

impl Expansion {
    /// The identity-plane embedding into `R^2`.
    pub fn plane() -> Self {
        Expansion {
            c: 1.0,
            q: vec![[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_valid(&self) -> bool {
        if self.c < 1.0 {
            return false;
        }
        let mut gram = [[0.0f64; 2]; 2];
        for row in &self.q {
            for a in 0..2 {
                for b in 0..2 {
                    gram[a][b] += row[a] * row[b];
                }
            }
        }
        (gram[0][0] - 1.0).abs() < 1e-10
            && (gram[1][1] - 1.0).abs() < 1e-10
            && gram[0][1].abs() < 1e-10
    }

    pub fn apply(&self, v: [f64; 2]) -> Vec<f64> {
        self.q
            .iter()
            .map(|row| self.c * (row[0] * v[0] + row[1] * v[1]))
            .collect()
    }

    pub fn apply_point(&self, p: &Point) -> Vec<f64> {
        self.apply(p.embed())
    }

    /// Coordinates of the orthogonal projection onto the frame plane (the
    /// scale is not divided out).
    pub fn coords(&self, v: &[f64]) -> [f64; 2] {
        let mut w = [0.0f64; 2];
        for (row, x) in self.q.iter().zip(v.iter()) {
            w[0] += row[0] * x;
            w[1] += row[1] * x;
        }
        w
    }

    /// Prefix zero coordinates (the sphere-action direction).
    pub fn zero_pad(&self, extra: usize) -> Expansion {
        let mut q = vec![[0.0, 0.0]; extra];
        q.extend(self.q.iter().copied());
        Expansion { c: self.c, q }
    }

    /// Product expansion: stacked blocks, one common scale.
    pub fn product(parts: &[&Expansion]) -> Expansion {
        let c = parts.iter().map(|e| e.c * e.c).sum::<f64>().sqrt();
        let mut q = Vec::new();
        for e in parts {
            for row in &e.q {
                q.push([row[0] * e.c / c, row[1] * e.c / c]);
            }
        }
        Expansion { c, q }
    }
}

/// Closest-point projection onto the image circle.
pub fn pi_phi(phi: &Expansion, v: &[f64]) -> Result<Point, GeomError> {
    let w = phi.coords(v);
    let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if norm < 1e-12 {
        return Err(GeomError::OutsideReach);
    }
    Ok(Point(w[1].atan2(w[0])))
}

/// Euclidean distance from `v` to the image circle.
pub fn dist_to_image(phi: &Expansion, v: &[f64]) -> f64 {
    let w = phi.coords(v);
    let wn = (w[0] * w[0] + w[1] * w[1]).sqrt();
    let vn2: f64 = v.iter().map(|x| x * x).sum();
    (vn2 - 2.0 * phi.c * wn + phi.c * phi.c).max(0.0).sqrt()
}

/// `(phi, eps, v)` with `v` inside the closed `eps`-tube.
#[derive(Clone, Debug)]
pub struct TubePoint {
    pub phi: Expansion,
    pub eps: f64,
    pub v: Vec<f64>,
}

impl TubePoint {
    pub fn validate(&self) -> Result<(), GeomError> {
        if !(self.eps > 0.0 && self.eps < EPS_MAX) {
            return Err(GeomError::Invalid(format!("eps {} out of range", self.eps)));
        }
        if !self.phi.is_valid() {
            return Err(GeomError::Invalid("frame not orthonormal".into()));
        }
        let d = dist_to_image(&self.phi, &self.v);
        if d > self.eps * (1.0 + 1e-9) {
            return Err(GeomError::Invalid(format!(
                "vector at distance {d} leaves the {}-tube",
                self.eps
            )));
        }
        Ok(())
    }

    pub fn basepoint(&self) -> Result<Point, GeomError> {
        pi_phi(&self.phi, &self.v)
    }
}

/// Merge a block of tube points into one: product expansion, concatenated
/// vector, radius given by the inductive radius of the inner cone point.
pub fn merge_block(u_inner: &ConePoint, tubes: &[TubePoint]) -> TubePoint {
    let phis: Vec<&Expansion> = tubes.iter().map(|t| &t.phi).collect();
    let phi = Expansion::product(&phis);
    let eps = if tubes.len() == 1 {
        tubes[0].eps
    } else {
        teps(u_inner, &scales(tubes))
    };
    let mut v = Vec::new();
    for t in tubes {
        v.extend_from_slice(&t.v);
    }
    TubePoint { phi, eps, v }
}

pub fn scales(tubes: &[TubePoint]) -> Vec<(f64, f64)> {
    tubes.iter().map(|t| (t.phi.c, t.eps)).collect()
}

// -- the inductive radius function -------------------------------------------

fn teps_base(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let c = (a.0 * a.0 + b.0 * b.0).sqrt();
    (c, a.1.min(b.1) / 10f64.powf(c * c))
}

fn eval_binary_tree(t: &PlanarTree, data: &[(f64, f64)]) -> (f64, f64) {
    match t {
        PlanarTree::Leaf => data[0],
        PlanarTree::Node(cs) => {
            debug_assert_eq!(cs.len(), 2);
            let n1 = cs[0].arity();
            let a = eval_binary_tree(&cs[0], &data[..n1]);
            let b = eval_binary_tree(&cs[1], &data[n1..]);
            teps_base(a, b)
        }
    }
}

/// Minimum of the radius over the boundary, computed over the binary-tree
/// vertices; the interior recursion is monotone in each radius argument, so
/// the boundary minimum is attained there.
pub fn boundary_min(n: usize, data: &[(f64, f64)]) -> f64 {
    if n == 2 {
        return teps_base(data[0], data[1]).1;
    }
    enumerate_binary(n)
        .iter()
        .map(|t| eval_binary_tree(t, data).1)
        .fold(f64::INFINITY, f64::min)
}

/// The radius function over cone coordinates; `data` pairs the expansion
/// scale and tube radius of each input.
pub fn teps(u: &ConePoint, data: &[(f64, f64)]) -> f64 {
    let n = u.arity();
    assert!(n >= 2, "radius needs arity >= 2");
    assert_eq!(data.len(), n);
    match u {
        ConePoint::Unit => unreachable!(),
        ConePoint::Apex { .. } => boundary_min(n, data),
        ConePoint::Cone { t, i, left, right } => {
            let m = right.arity();
            let block = &data[i - 1..i - 1 + m];
            let merged_scale = block.iter().map(|(c, _)| c * c).sum::<f64>().sqrt();
            let merged_eps = if m == 1 {
                block[0].1
            } else {
                teps(right, block)
            };
            let mut merged: Vec<(f64, f64)> = Vec::with_capacity(data.len() - m + 1);
            merged.extend_from_slice(&data[..i - 1]);
            merged.push((merged_scale, merged_eps));
            merged.extend_from_slice(&data[i - 1 + m..]);
            let at_boundary = if left.arity() == 1 {
                merged_eps
            } else {
                teps(left, &merged)
            };
            (1.0 - t) * boundary_min(n, data) + t * at_boundary
        }
    }
}

// -- the perturbation maps ----------------------------------------------------

fn vec_all(tubes: &[TubePoint]) -> Vec<f64> {
    let mut v = Vec::new();
    for t in tubes {
        v.extend_from_slice(&t.v);
    }
    v
}

fn phi_all(tubes: &[TubePoint]) -> Expansion {
    let phis: Vec<&Expansion> = tubes.iter().map(|t| &t.phi).collect();
    Expansion::product(&phis)
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn scale_vec(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// The perturbation self-map of the circle, evaluated at `y`: straight-line
/// transport towards the joint vector followed by the projection, with
/// boundary values glued from lower arities through the charts.
pub fn psi(
    u: &ConePoint,
    tubes: &[TubePoint],
    i: usize,
    y: &Point,
) -> Result<Point, GeomError> {
    gate(u, tubes)?;
    psi_inner(u, tubes, i, y)
}

/// The gate: the joint vector must be within the inductive radius.
pub fn gate(u: &ConePoint, tubes: &[TubePoint]) -> Result<f64, GeomError> {
    let phi = phi_all(tubes);
    let v = vec_all(tubes);
    let d = dist_to_image(&phi, &v);
    let bound = teps(u, &scales(tubes));
    if d > bound {
        return Err(GeomError::OutsideDomain {
            dist: d,
            gate: bound,
        });
    }
    Ok(bound)
}

fn psi_inner(
    u: &ConePoint,
    tubes: &[TubePoint],
    i: usize,
    y: &Point,
) -> Result<Point, GeomError> {
    let phi = phi_all(tubes);
    let v = vec_all(tubes);
    let transport = |y: &Point| -> Result<Vec<f64>, GeomError> {
        let base = pi_phi(&tubes[i - 1].phi, &tubes[i - 1].v)?;
        let offset = phi.apply(sub2(y.embed(), base.embed()));
        Ok(add(&v, &offset))
    };
    match u {
        ConePoint::Unit => Ok(*y),
        ConePoint::Apex { .. } => pi_phi(&phi, &transport(y)?),
        ConePoint::Cone { t, i: j, left, right } => {
            let boundary = chart_psi(left, *j, right, tubes, i, y)?;
            let hat = add(
                &scale_vec(1.0 - t, &transport(y)?),
                &scale_vec(*t, &phi.apply_point(&boundary)),
            );
            pi_phi(&phi, &hat)
        }
    }
}

/// Boundary value through the chart of the face `left ∘_j right`.
fn chart_psi(
    left: &ConePoint,
    j: usize,
    right: &ConePoint,
    tubes: &[TubePoint],
    i: usize,
    y: &Point,
) -> Result<Point, GeomError> {
    let m = right.arity();
    let sub = &tubes[j - 1..j - 1 + m];
    let merged = merge_block(right, sub);
    let mut outer: Vec<TubePoint> = Vec::with_capacity(tubes.len() - m + 1);
    outer.extend_from_slice(&tubes[..j - 1]);
    outer.push(merged);
    outer.extend_from_slice(&tubes[j - 1 + m..]);
    if i < j {
        psi_inner(left, &outer, i, y)
    } else if i >= j + m {
        psi_inner(left, &outer, i - m + 1, y)
    } else {
        let inner = psi_inner(right, sub, i - j + 1, y)?;
        psi_inner(left, &outer, j, &inner)
    }
}

/// The straightening homotopy: at `s = 0` it is the perturbation map, at
/// `s = 1` the identity. Defined for arity 1 as the identity at all `s`.
pub fn tpsi(
    u: &ConePoint,
    tubes: &[TubePoint],
    i: usize,
    s: f64,
    y: &Point,
) -> Result<Point, GeomError> {
    if u.arity() >= 2 {
        gate(u, tubes)?;
    }
    tpsi_inner(u, tubes, i, s, y)
}

fn tpsi_inner(
    u: &ConePoint,
    tubes: &[TubePoint],
    i: usize,
    s: f64,
    y: &Point,
) -> Result<Point, GeomError> {
    let phi = phi_all(tubes);
    let v = vec_all(tubes);
    let transport = |y: &Point| -> Result<Vec<f64>, GeomError> {
        let base = pi_phi(&tubes[i - 1].phi, &tubes[i - 1].v)?;
        let shifted = add(
            &scale_vec(1.0 - s, &sub2_vec(&v, &phi.apply_point(&base))),
            &phi.apply_point(y),
        );
        Ok(shifted)
    };
    match u {
        ConePoint::Unit => Ok(*y),
        ConePoint::Apex { .. } => pi_phi(&phi, &transport(y)?),
        ConePoint::Cone { t, i: j, left, right } => {
            let boundary = chart_tpsi(left, *j, right, tubes, i, s, y)?;
            let hat = add(
                &scale_vec(1.0 - t, &transport(y)?),
                &scale_vec(*t, &phi.apply_point(&boundary)),
            );
            pi_phi(&phi, &hat)
        }
    }
}

fn sub2_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn chart_tpsi(
    left: &ConePoint,
    j: usize,
    right: &ConePoint,
    tubes: &[TubePoint],
    i: usize,
    s: f64,
    y: &Point,
) -> Result<Point, GeomError> {
    let m = right.arity();
    let sub = &tubes[j - 1..j - 1 + m];
    let merged = merge_block(right, sub);
    let mut outer: Vec<TubePoint> = Vec::with_capacity(tubes.len() - m + 1);
    outer.extend_from_slice(&tubes[..j - 1]);
    outer.push(merged);
    outer.extend_from_slice(&tubes[j - 1 + m..]);
    if i < j {
        tpsi_inner(left, &outer, i, s, y)
    } else if i >= j + m {
        tpsi_inner(left, &outer, i - m + 1, s, y)
    } else {
        let inner = tpsi_inner(right, sub, i - j + 1, s, y)?;
        tpsi_inner(left, &outer, j, s, &inner)
    }
}

// -- the marked maps over component cone coordinates ---------------------------

/// Gate for the marked maps: the radius of the forgotten cone point.
pub fn ck_gate(t: &CkConePoint, tubes: &[TubePoint]) -> Result<f64, GeomError> {
    if t.arity() == 1 {
        return Ok(tubes[0].eps);
    }
    gate(&t.forget(), tubes)
}

/// Routing of a flat slot index of a composite component to its chart
/// factor: left slots below the graft, then all right slots, then the rest.
fn route_slot(
    left: &CkConePoint,
    i: usize,
    right: &CkConePoint,
    slot: usize,
) -> (bool, usize) {
    let ml = left.marks();
    let l1: usize = ml[..i].iter().map(|&x| x as usize).sum();
    let r: usize = right.marks().iter().map(|&x| x as usize).sum();
    if slot < l1 {
        (true, slot)
    } else if slot < l1 + r {
        (false, slot - l1)
    } else {
        (true, slot - r)
    }
}

/// The basepoint-correction points, one per counted mark (flat slot order).
pub fn z_point(
    t: &CkConePoint,
    tubes: &[TubePoint],
    slot: usize,
) -> Result<Point, GeomError> {
    let phi = phi_all(tubes);
    let v = vec_all(tubes);
    match t {
        CkConePoint::Point1 { .. } => pi_phi(&phi, &v),
        CkConePoint::Apex { .. } => pi_phi(&phi, &v),
        CkConePoint::Cone {
            t: tt,
            i,
            left,
            right,
        } => {
            let zb = chart_z(left, *i, right, tubes, slot)?;
            if *tt >= 0.5 {
                Ok(zb)
            } else {
                let hat = add(
                    &scale_vec(1.0 - 2.0 * tt, &v),
                    &scale_vec(2.0 * tt, &phi.apply_point(&zb)),
                );
                pi_phi(&phi, &hat)
            }
        }
    }
}

fn chart_z(
    left: &CkConePoint,
    i: usize,
    right: &CkConePoint,
    tubes: &[TubePoint],
    slot: usize,
) -> Result<Point, GeomError> {
    let m = right.arity();
    let sub = &tubes[i - 1..i - 1 + m];
    let merged = merge_block(&right.forget(), sub);
    let mut outer: Vec<TubePoint> = Vec::with_capacity(tubes.len() - m + 1);
    outer.extend_from_slice(&tubes[..i - 1]);
    outer.push(merged);
    outer.extend_from_slice(&tubes[i - 1 + m..]);
    let (go_left, idx) = route_slot(left, i, right, slot);
    if go_left {
        z_point(left, &outer, idx)
    } else {
        z_point(right, sub, idx)
    }
}

/// The correction self-maps through their linear-space lifts; evaluated at
/// `y`, returning a vector of the joint ambient space.
pub fn omega_hat(
    t: &CkConePoint,
    tubes: &[TubePoint],
    slot: usize,
    s: f64,
    y: &Point,
) -> Result<Vec<f64>, GeomError> {
    let phi = phi_all(tubes);
    let v = vec_all(tubes);
    match t {
        CkConePoint::Point1 { .. } => Ok(phi.apply_point(y)),
        CkConePoint::Apex { .. } => {
            // Cone parameter zero: transport minus the correction point.
            let z0 = pi_phi(&phi, &v)?;
            let lhs = add(&v, &phi.apply(sub2(y.embed(), z0.embed())));
            Ok(add(
                &scale_vec(1.0 - s, &lhs),
                &scale_vec(s, &phi.apply_point(y)),
            ))
        }
        CkConePoint::Cone {
            t: tt,
            i,
            left,
            right,
        } => {
            let zb = chart_z(left, *i, right, tubes, slot)?;
            let ob = chart_omega_hat(left, *i, right, tubes, slot, s, y)?;
            let smooth = add(
                &scale_vec(1.0 - tt, &phi.apply_point(y)),
                &scale_vec(*tt, &ob),
            );
            if *tt <= 0.5 {
                let zt = z_point(t, tubes, slot)?;
                let lhs = add(&v, &phi.apply(sub2(y.embed(), zt.embed())));
                Ok(add(&scale_vec(1.0 - s, &lhs), &scale_vec(s, &smooth)))
            } else {
                let lhs = add(&v, &phi.apply(sub2(y.embed(), zb.embed())));
                let mix = add(
                    &scale_vec(2.0 - 2.0 * tt, &lhs),
                    &scale_vec(2.0 * tt - 1.0, &ob),
                );
                Ok(add(&scale_vec(1.0 - s, &mix), &scale_vec(s, &smooth)))
            }
        }
    }
}

fn chart_omega_hat(
    left: &CkConePoint,
    i: usize,
    right: &CkConePoint,
    tubes: &[TubePoint],
    slot: usize,
    s: f64,
    y: &Point,
) -> Result<Vec<f64>, GeomError> {
    let m = right.arity();
    let sub = &tubes[i - 1..i - 1 + m];
    let merged = merge_block(&right.forget(), sub);
    let mut outer: Vec<TubePoint> = Vec::with_capacity(tubes.len() - m + 1);
    outer.extend_from_slice(&tubes[..i - 1]);
    outer.push(merged);
    outer.extend_from_slice(&tubes[i - 1 + m..]);
    let (go_left, idx) = route_slot(left, i, right, slot);
    if go_left {
        omega_hat(left, &outer, idx, s, y)
    } else if left.arity() == 1 {
        omega_hat(right, sub, idx, s, y)
    } else {
        // Right-factor slots compose with the straightening of the outer
        // chart point before re-embedding.
        let sub_phi = phi_all(sub);
        let inner_hat = omega_hat(right, sub, idx, s, y)?;
        let inner = pi_phi(&sub_phi, &inner_hat)?;
        let moved = tpsi_inner(&left.forget(), &outer, i, s, &inner)?;
        Ok(phi_all(tubes).apply_point(&moved))
    }
}

/// The correction self-map on the circle.
pub fn omega(
    t: &CkConePoint,
    tubes: &[TubePoint],
    slot: usize,
    s: f64,
    y: &Point,
) -> Result<Point, GeomError> {
    let hat = omega_hat(t, tubes, slot, s, y)?;
    pi_phi(&phi_all(tubes), &hat)
}

/// All correction points of a marked cone point, in flat slot order.
pub fn z_values(t: &CkConePoint, tubes: &[TubePoint]) -> Result<Vec<Point>, GeomError> {
    ck_gate(t, tubes)?;
    (0..t.slots().len())
        .map(|slot| z_point(t, tubes, slot))
        .collect()
}

// -- loops and concatenation ---------------------------------------------------

/// A sampled closed loop: strictly increasing grid over `[0, 1]` and
/// unwrapped angle values (the last value equals the first modulo full
/// turns).
#[derive(Clone, Debug)]
pub struct LoopSample {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl LoopSample {
    pub fn validate(&self) -> Result<(), GeomError> {
        if self.grid.len() != self.values.len() || self.grid.len() < 2 {
            return Err(GeomError::Invalid("grid/value mismatch".into()));
        }
        if self.grid[0] != 0.0 || *self.grid.last().unwrap() != 1.0 {
            return Err(GeomError::Invalid("grid must span [0,1]".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GeomError::Invalid("grid not strictly increasing".into()));
        }
        let turn = (self.values.last().unwrap() - self.values[0]) / std::f64::consts::TAU;
        if (turn - turn.round()).abs() > 1e-9 {
            return Err(GeomError::Invalid("loop is not closed".into()));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Point {
        let t = t.clamp(0.0, 1.0);
        let idx = match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&t).unwrap())
        {
            Ok(i) => return Point(self.values[i]),
            Err(i) => i,
        };
        let (g0, g1) = (self.grid[idx - 1], self.grid[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        Point(v0 + (v1 - v0) * (t - g0) / (g1 - g0))
    }

    /// Sample a closed function of the parameter, unwrapping angles.
    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> Point) -> LoopSample {
        let mut values = Vec::with_capacity(grid.len());
        for &t in &grid {
            let raw = f(t).0;
            let v = match values.last() {
                None => raw,
                Some(&prev) => {
                    let mut x = raw;
                    while x - prev > std::f64::consts::PI {
                        x -= std::f64::consts::TAU;
                    }
                    while prev - x > std::f64::consts::PI {
                        x += std::f64::consts::TAU;
                    }
                    x
                }
            };
            values.push(v);
        }
        LoopSample { grid, values }
    }

    /// A circle arc loop used by demos and tests: basepoint `base`, swing
    /// amplitude `amp`.
    pub fn arc(base: Point, amp: f64, samples: usize) -> LoopSample {
        let grid: Vec<f64> = (0..=samples).map(|k| k as f64 / samples as f64).collect();
        LoopSample::from_fn(grid, |t| {
            Point(base.0 + amp * (std::f64::consts::TAU * t).sin())
        })
    }
}

/// Result of a gated concatenation: either a genuine tube point with its
/// loop, or the collapsed basepoint value, which absorbs all further
/// composition.
#[derive(Clone, Debug)]
pub enum Concat {
    Loop(TubePoint, LoopSample),
    Collapsed,
}

impl Concat {
    pub fn is_collapsed(&self) -> bool {
        matches!(self, Concat::Collapsed)
    }
}

/// Evaluate the concatenated loop at parameter `t` without resampling: find
/// the block of `t` under the reparameterization and perturb that factor's
/// loop value.
pub fn concat_eval(
    f: &MonotoneSurj,
    u: &ConePoint,
    inputs: &[(TubePoint, &dyn Fn(f64) -> Point)],
    t: f64,
) -> Result<Point, GeomError> {
    let n = inputs.len();
    let y = f.eval_f64(t);
    let tubes: Vec<TubePoint> = inputs.iter().map(|(tp, _)| tp.clone()).collect();
    // Lowest block containing the value; ties resolve to the lower block,
    // where the two formulas agree through the basepoint identity.
    let mut i = 1usize;
    while (i as f64) / (n as f64) < y && i < n {
        i += 1;
    }
    let local = (n as f64) * y - (i as f64) + 1.0;
    let point = (inputs[i - 1].1)(local.clamp(0.0, 1.0));
    psi_inner(u, &tubes, i, &point)
}

/// Gated concatenation of sampled loops: the output loop is sampled on the
/// union of the reparameterization breakpoints and the pulled-back input
/// grids.
pub fn loop_concat(
    f: &MonotoneSurj,
    u: &ConePoint,
    loops: &[(TubePoint, LoopSample)],
) -> Result<Concat, GeomError> {
    let n = loops.len();
    assert_eq!(u.arity(), n);
    for (tube, sample) in loops {
        tube.validate()?;
        sample.validate()?;
        let base = tube.basepoint()?;
        if base.dist(&sample.eval(0.0)) > 1e-9 {
            return Err(GeomError::Invalid(
                "loop does not start at the tube basepoint".into(),
            ));
        }
    }
    let tubes: Vec<TubePoint> = loops.iter().map(|(tp, _)| tp.clone()).collect();
    if gate(u, &tubes).is_err() {
        return Ok(Concat::Collapsed);
    }
    let out_tube = merge_block(u, &tubes);

    // Union grid: breakpoints of f, block boundary preimages, pulled-back
    // sample grids.
    let mut grid: Vec<f64> = vec![0.0, 1.0];
    let to_f64 = |r: &num_rational::BigRational| -> f64 {
        let num: f64 = r.numer().to_string().parse().unwrap();
        let den: f64 = r.denom().to_string().parse().unwrap();
        num / den
    };
    for (x, _) in f.breakpoints() {
        grid.push(to_f64(x));
    }
    let mut push_preimage = |y: f64, grid: &mut Vec<f64>| {
        let pts = f.breakpoints();
        for w in pts.windows(2) {
            let (x0, y0) = (to_f64(&w[0].0), to_f64(&w[0].1));
            let (x1, y1) = (to_f64(&w[1].0), to_f64(&w[1].1));
            if y < y0 - 1e-12 || y > y1 + 1e-12 {
                continue;
            }
            if (y1 - y0).abs() < 1e-15 {
                grid.push(x0);
                grid.push(x1);
            } else {
                grid.push(x0 + (x1 - x0) * (y - y0) / (y1 - y0));
            }
        }
    };
    for i in 0..=n {
        push_preimage(i as f64 / n as f64, &mut grid);
    }
    for (i, (_, sample)) in loops.iter().enumerate() {
        for &g in &sample.grid {
            let target = (i as f64 + g) / n as f64;
            push_preimage(target, &mut grid);
        }
    }
    grid.retain(|t| (0.0..=1.0).contains(t));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if *grid.last().unwrap() < 1.0 {
        grid.push(1.0);
    }

    let fns: Vec<Box<dyn Fn(f64) -> Point>> = loops
        .iter()
        .map(|(_, s)| {
            let s = s.clone();
            Box::new(move |t: f64| s.eval(t)) as Box<dyn Fn(f64) -> Point>
        })
        .collect();
    let borrowed: Vec<(TubePoint, &dyn Fn(f64) -> Point)> = loops
        .iter()
        .zip(fns.iter())
        .map(|((tp, _), f)| (tp.clone(), f.as_ref() as &dyn Fn(f64) -> Point))
        .collect();
    let sample = LoopSample::from_fn(grid, |t| {
        concat_eval(f, u, &borrowed, t).expect("gated evaluation stays in reach")
    });
    Ok(Concat::Loop(out_tube, sample))
}

// -- counterexample demos -------------------------------------------------------

/// The equivariance failure of the naive slice map: the closest-point
/// preimage of `x` under `phi` versus the one of `(t, x)` under the graph
/// map `y -> (y, phi(y))`. The gap vanishes exactly when `t` is the
/// original preimage.
pub fn cohen_counterexample(
    phi: &Expansion,
    x: &[f64],
    t: [f64; 2],
) -> Result<([f64; 2], [f64; 2], f64), GeomError> {
    let w = phi.coords(x);
    let c = phi.c;
    if (w[0] * w[0] + w[1] * w[1]).sqrt() < 1e-9 {
        return Err(GeomError::Invalid("degenerate configuration".into()));
    }
    let x1 = [w[0] / c, w[1] / c];
    let denom = 1.0 + c * c;
    let ext = [(t[0] + c * w[0]) / denom, (t[1] + c * w[1]) / denom];
    let gap = ((ext[0] - x1[0]).powi(2) + (ext[1] - x1[1]).powi(2)).sqrt();
    Ok((x1, ext, gap))
}

/// The same slice computed after zero-padding instead: the new coordinates
/// never move the preimage.
pub fn cohen_zero_padded(phi: &Expansion, x: &[f64], t0: f64) -> ([f64; 2], [f64; 2], f64) {
    let padded = phi.zero_pad(1);
    let mut xt = vec![t0];
    xt.extend_from_slice(x);
    let w = phi.coords(x);
    let c = phi.c;
    let x1 = [w[0] / c, w[1] / c];
    let wp = padded.coords(&xt);
    let p1 = [wp[0] / c, wp[1] / c];
    let gap = ((p1[0] - x1[0]).powi(2) + (p1[1] - x1[1]).powi(2)).sqrt();
    (x1, p1, gap)
}

/// The product-coface failure of the unperturbed product: the projection of
/// the pair differs from the projection of the first factor unless the two
/// factors project to the same point.
pub fn ms_failure_demo(
    e1: &TubePoint,
    e2: &TubePoint,
) -> Result<(Point, Point, f64), GeomError> {
    let joint = phi_all(&[e1.clone(), e2.clone()]);
    let mut v = e1.v.clone();
    v.extend_from_slice(&e2.v);
    let pair = pi_phi(&joint, &v)?;
    let first = pi_phi(&e1.phi, &e1.v)?;
    Ok((pair, first, pair.dist(&first)))
}

// -- the action on marked-point tuples ------------------------------------------

/// A tuple of marked points with a tube point, mirroring one cosimplicial
/// level of the loop model.
#[derive(Clone, Debug)]
pub struct LElement {
    pub points: Vec<Point>,
    pub tube: TubePoint,
}

impl LElement {
    pub fn coface(&self, i: usize) -> Result<LElement, GeomError> {
        let p = self.points.len();
        let mut points = self.points.clone();
        if i == 0 {
            points.insert(0, self.tube.basepoint()?);
        } else if i == p + 1 {
            points.push(self.tube.basepoint()?);
        } else {
            points.insert(i, self.points[i - 1]);
        }
        Ok(LElement {
            points,
            tube: self.tube.clone(),
        })
    }

    pub fn codegeneracy(&self, i: usize) -> Result<LElement, GeomError> {
        if i + 1 > self.points.len() {
            return Err(GeomError::Invalid("codegeneracy out of range".into()));
        }
        let mut points = self.points.clone();
        points.remove(i);
        Ok(LElement {
            points,
            tube: self.tube.clone(),
        })
    }
}

/// Apply the perturbation maps factorwise and merge the tube data.
pub fn psi_action(u: &ConePoint, factors: &[LElement]) -> Result<LElement, GeomError> {
    let tubes: Vec<TubePoint> = factors.iter().map(|f| f.tube.clone()).collect();
    gate(u, &tubes)?;
    let mut points = Vec::new();
    for (idx, f) in factors.iter().enumerate() {
        for p in &f.points {
            points.push(psi_inner(u, &tubes, idx + 1, p)?);
        }
    }
    Ok(LElement {
        points,
        tube: merge_block(u, &tubes),
    })
}

// -- sampling helpers ------------------------------------------------------------

/// A deterministic random frame of the requested dimension.
pub fn random_expansion<R: Rng>(rng: &mut R, k: usize, cmax: f64) -> Expansion {
    loop {
        // Two random vectors, Gram-Schmidt.
        let mut a: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na < 1e-6 {
            continue;
        }
        a.iter_mut().for_each(|x| *x /= na);
        let mut b: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        b.iter_mut().zip(&a).for_each(|(y, x)| *y -= dot * x);
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nb < 1e-6 {
            continue;
        }
        b.iter_mut().for_each(|x| *x /= nb);
        let c = rng.gen_range(1.0..=cmax);
        return Expansion {
            c,
            q: (0..k).map(|r| [a[r], b[r]]).collect(),
        };
    }
}

/// A tube configuration gated for the given cone point: all factors share a
/// common nearby circle point.
pub fn random_gated_tubes<R: Rng>(
    rng: &mut R,
    u: &ConePoint,
    dims: &[usize],
) -> Vec<TubePoint> {
    let n = u.arity();
    assert_eq!(dims.len(), n);
    let phis: Vec<Expansion> = dims
        .iter()
        .map(|&k| random_expansion(rng, k, 1.4))
        .collect();
    let epss: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..EPS_MAX)).collect();
    let data: Vec<(f64, f64)> = phis.iter().zip(&epss).map(|(p, e)| (p.c, *e)).collect();
    let bound = teps(u, &data);
    let y = Point(rng.gen_range(0.0..std::f64::consts::TAU));
    // Joint offset of norm at most the gate, split over the blocks.
    let total = rng.gen_range(0.0..bound);
    let mut tubes = Vec::with_capacity(n);
    for (phi, eps) in phis.into_iter().zip(epss) {
        let k = phi.dim();
        let mut delta: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = delta.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let r = total / (n as f64).sqrt();
        delta.iter_mut().for_each(|x| *x *= r / norm);
        let v = add(&phi.apply_point(&y), &delta);
        tubes.push(TubePoint { phi, eps, v });
    }
    tubes
}

#[cfg(test)]
mod tests;
