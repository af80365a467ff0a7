//! Exact simulator and analysis toolkit for a Mach–Zehnder interferometer
//! whose second beam splitter is controlled by an ancilla qubit, with white
//! noise mixed into the preparation.
//!
//! The crate computes the joint (system, ancilla) statistics of the circuit
//! both in closed form and by density-matrix evolution, locates the
//! entanglement boundary of the noisy family (PPT criterion, maximal CHSH
//! value), and mechanically checks whether any hidden-variable assignment of
//! a fixed "wave" or "particle" character can reproduce the observed
//! statistics: analytically, by enumerating and rejecting every solution of
//! the constraint system, and numerically, by a grid-certified minimax
//! search.
//!
//! Module map:
//!
//! * [`linalg`]: complex 2×2/4×4 operators, gates, spectra, partial
//!   transpose.
//! * [`circuit`]: the interferometer, its settings, and Born-rule
//!   statistics.
//! * [`noise`]: white-noise mixtures, separability threshold, CHSH bound.
//! * [`hvm`]: the hidden-variable constraint system, branch enumeration,
//!   classification, and the cross-setting feasibility scan.
//! * [`experiment`]: seeded finite-statistics sampling and fringe
//!   visibility.
//!
//! Everything is a pure function of its inputs; all types are immutable
//! after construction and safe to share across threads.

pub mod circuit;
pub mod error;
pub mod experiment;
pub mod hvm;
pub mod linalg;
pub mod noise;

pub use error::{Error, Result};
