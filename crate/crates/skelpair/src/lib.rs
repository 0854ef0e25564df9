//! Local intersection pairings on powers of metrized graphs.
//!
//! The crate computes the pairing ⟨f_0,…,f_d⟩ of d+1 real functions on
//! the d-fold power Γ^d of a metrized graph, in two regimes:
//!
//! * exactly, for piecewise-affine grid functions at a subdivision level
//!   n, through the degree map of a combinatorial intersection ring of
//!   the standard d-cube (module [`chow`]) and rational lattice
//!   differences (modules [`func`] and [`pairing`]);
//! * in the limit n → ∞, for piecewise-smooth expression functions,
//!   through a partition formula that integrates generalized
//!   differentials over the diagonals of Γ^d.
//!
//! [`skeleton`] holds the graph, chart, and partition combinatorics the
//! other modules share, and [`rat`] the exact rational scalar type.
//! Closed forms for the d = 2 and d = 3 pairings, a convergence harness,
//! and an oscillating-triple construction with unbounded pairing values
//! live in [`pairing`].

pub mod chow;
pub mod func;
pub mod pairing;
pub mod rat;
pub mod skeleton;
