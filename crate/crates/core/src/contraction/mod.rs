//! The combing contraction of a metric graph onto a shortest loop, and
//! exact certificates for retraction, Lipschitz and Rips-scale properties.

mod combing;
mod verify;

pub use combing::{build_combing_contraction, choose_basepoint, CombingMap, FnLoopMap, LoopMap};
pub use verify::{
    induced_point_map, verify_lipschitz, verify_piecewise_slopes, verify_r_contraction, verify_retraction,
    verify_simplicial_retraction, ContractionCheck, InducedPointMap, LipschitzReport, LipschitzWitness,
    RetractionReport, SimplicialCheck,
};
