//! Compactly supported orthonormal wavelets and their dyadic tables.
//!
//! Filters are embedded constants. The scaling function and wavelet are
//! tabulated once on the grid `m * 2^-J` by the cascade (refinement)
//! iteration, and every point evaluation afterwards is a nearest-grid
//! lookup.

mod filter;
mod tables;
mod taps;

pub use filter::{Family, WaveletFilter};
pub use tables::{Kind, WaveletTables, DEFAULT_DEPTH};
