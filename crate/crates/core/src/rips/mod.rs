//! Vietoris-Rips filtrations of finite metric spaces and their barcodes.

mod barcode;
mod filtration;
mod reduce;

pub use barcode::{circle_barcode_oracle, match_barcodes, Bar, Barcode, Death, MatchReport};
pub use filtration::{
    build_rips_filtration, build_rips_filtration_with_budget, complete_simplex_count, Filtration, Simplex,
    DEFAULT_SIMPLEX_BUDGET,
};
pub use reduce::reduce_persistence;
pub(crate) use reduce::{check_field, inv_mod};
