//! Exact rational polyhedral kernel: convex constraints over clocks and
//! parameters, finite unions thereof, and their 1-D interval views.
//!
//! Values are immutable after construction and every operation is a pure
//! function, so concurrent evaluation needs no coordination.

mod atom;
mod env;
mod fm;
mod interval;
mod poly;
mod set;

pub use atom::{Atom, LinearTerm, NormAtom, Relation};
pub use env::{Valuation, VarEnv, VarId, VarKind};
pub use interval::{to_intervals, DurationIntervals, Interval};
pub use poly::{ConstraintError, Polyhedron};
pub use set::ConstraintSet;
