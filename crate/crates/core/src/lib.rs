//! Contractions (1-Lipschitz retractions) on metric graphs and their effect
//! on Vietoris-Rips persistent homology.
//!
//! The crate is organized by subsystem:
//!
//! * [`graph`]: exact metric graphs, geodesics, shortest cycles, minimum
//!   cycle bases, geodesic-circle checks and finite sampling.
//! * [`contraction`]: the combing retraction onto a shortest loop and its
//!   certification (retraction, 1-Lipschitz, r-contraction, simplicial).
//! * [`rips`]: Rips filtrations, persistence over prime fields, the
//!   analytic circle barcode and barcode matching.
//! * [`module`]: persistence modules on finite scale grids, inclusion
//!   morphisms, tightness, and bar multiplicities.
//! * [`obstruction`]: winding-number certificates against the existence of
//!   contractions and an experiment harness for planar graphs.

pub mod contraction;
pub mod error;
pub mod graph;
pub mod module;
pub mod obstruction;
pub mod rational;
pub mod rips;

pub use error::{Error, Result};
pub use rational::Rational;
