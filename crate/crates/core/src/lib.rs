//! Combinatorial and numeric machinery for operadic string topology.
//!
//! The crate has three layers:
//!
//! * combinatorics — planar trees and the associahedron face poset
//!   ([`trees`], [`assoc`]), marked cofacial trees and their operad
//!   ([`cofacial`]), piecewise-linear monotone surjections ([`surj`]),
//!   and the length operad ([`lenop`]);
//! * cosimplicial algebra — truncated cosimplicial modules over the
//!   rationals, the box product, Hochschild objects with cup product,
//!   and the discrete tree-indexed monads ([`cosimp`]);
//! * numerics — a tubular-neighborhood engine on an embedded circle
//!   implementing the inductive perturbation maps and the resulting
//!   loop concatenation ([`geom`]).
//!
//! Everything outside `geom` is exact (structural or rational
//! arithmetic); `geom` is `f64` with documented tolerances.

pub mod assoc;
pub mod cofacial;
pub mod cosimp;
pub mod geom;
pub mod lenop;
pub mod linalg;
pub mod surj;
pub mod trees;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

/// Shorthand used throughout the exact-arithmetic modules.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
