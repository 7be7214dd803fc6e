//! Timed-opacity analysis for (parametric) timed automata.
//!
//! Given a model, a private designation and a final location, the crate
//! computes the execution times — and, in the parametric case, the internal
//! timing-parameter valuations — for which an attacker observing only the
//! total execution time cannot deduce whether the private behavior
//! occurred.

pub mod constraint;
pub mod model;
pub mod opacity;
pub mod oracle;
pub mod pta;
pub mod rational;
pub mod symbolic;
