//! Exact invariants for compact almost-toric integrable systems.
//!
//! The crate works with truncated Taylor data attached to focus-focus fibers
//! and with the planar base diagrams of such systems.  Everything on the
//! symbolic side is exact: coefficients live in the ring generated over the
//! rationals by a formal constant standing for 2*pi, so equality tests mean
//! genuine equality and never float comparison.
//!
//! What is here:
//!
//! * [`jets`]: truncated bivariate series with composition, inversion, and a
//!   substitution solver;
//! * [`labels`]: truncated-series labels of focus-focus fibers, their
//!   axioms, normal forms, and symmetries;
//! * [`base`]: integral-affine base diagrams (polygon, nodes, cut rays) and
//!   their validation, monodromy, and isomorphism search;
//! * [`ingredients`]: the bundled classifying data and its equivalence test;
//! * [`numerics`]: double-precision regularized actions and the finite
//!   difference bridge back to exact series;
//! * [`io`] and [`svg`]: a JSON interchange format and diagram rendering;
//! * [`sampling`]: seeded random generators for all of the above, shared by
//!   tests and benchmarks.
//!
//! Bulk operations (grid evaluation, isomorphism search, batch checking) run
//! data-parallel under the default `parallel` feature and sequentially
//! without it.

pub mod base;
pub mod coeff;
pub mod ingredients;
pub mod io;
pub mod jets;
pub mod labels;
pub mod numerics;
#[doc(hidden)]
pub mod par;
pub mod sampling;
pub mod svg;

pub use coeff::{Coeff, Rational};
pub use jets::{Jet2, JetPair};
