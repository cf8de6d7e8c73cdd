//! Recursive escape strategy for a man chased by lions in the plane.
//!
//! The core is generic over [`Scalar`]; [`Standard`] and [`Extended`] are the
//! two instantiations used by the tools.

// `!(x > 0)` style guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversaries;
pub mod corpus;
pub mod engine;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod params;
pub mod scalar;
pub mod strategy;
pub mod sweep;
pub mod trace;
pub mod verdict;

pub use engine::{run, GameConfig, Horizon};
pub use geometry::Point2;
pub use params::{derive_cascade, Cascade, CascadeOptions, ParameterSet, StartConfiguration};
pub use scalar::Scalar;
pub use strategy::MoveKind;
pub use trace::{CaptureEvent, Trace};
pub use verdict::Verdict;

/// Binary64 arithmetic.
pub type Standard = f64;
/// Double-double arithmetic, about 106 significant bits.
pub type Extended = twofloat::TwoFloat;

pub type StandardTrace = Trace<Standard>;
pub type ExtendedTrace = Trace<Extended>;
