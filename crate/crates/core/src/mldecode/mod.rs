//! Maximum-likelihood decoding of the received lattice.
//!
//! A codeword `X = Σ z_i B_i` seen through `H` becomes the real lattice point
//! `B z` with `B` built by [`vectorize_real`]. After `B = QR`, the decoder
//! searches `argmin ‖Qᵀy − Rz‖²` over `z ∈ J^k`. Zeros in `R` let parts of `z`
//! be decoded independently; [`fd_analyze`] measures how far that goes.

mod fd;
mod lattice;
mod profile;
mod sphere;

pub use fd::{
    analysis_receive_antennas, fd_analyze, hr_cut, hr_pairs, hr_pairs_numeric, mask_by_coefficient, mask_cut, mask_grid,
    zero_mask, Cut, FdReport, CERTIFYING_TOL, MAX_SEARCH_UNITS, MIN_CERTIFYING_TRIALS,
};
pub use lattice::{qr_factor, vectorize_real, RealizedLattice, RANK_TOL};
pub use profile::{complexity_profile, complexity_profile_ordered, profiles_csv, ComplexityProfile};
pub use sphere::{exhaustive_ml, ml_metric, sphere_decode, Decoded, EXHAUSTIVE_BUDGET};
