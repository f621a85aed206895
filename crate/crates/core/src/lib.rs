//! Random bases of matroids via the down-up walk, approximate counting built on
//! top of it, and dense numerical certification of the spectral properties of
//! weighted simplicial complexes generated by multiaffine polynomials.
//!
//! The crate is organised bottom-up:
//!
//! * [`matroids`]: independence oracles, minors, duals, truncations.
//! * [`distributions`]: homogeneous weight functions on `d`-subsets.
//! * [`complex_spectra`]: weighted complexes, walk matrices and certificates.
//! * [`sampler`]: the down-up chain and its mixing-time bound.
//! * [`counting`]: telescoping estimators for partition functions.
//! * [`exact_oracle`]: brute-force ground truth.
//! * [`suite`]: the fixed instance suite and the acceptance checks.

pub mod complex_spectra;
pub mod counting;
pub mod distributions;
pub mod error;
pub mod exact_oracle;
pub mod logspace;
pub mod matroids;
pub mod rng;
pub mod sampler;
pub mod subset;
pub mod suite;

pub use error::{Error, Result};
pub use subset::Subset;

/// Default limit on the number of faces in any level that the dense
/// verification routines are willing to materialize.
pub const DEFAULT_DENSE_CAP: usize = 5000;

/// Dense cap, overridable through the `MATROID_WALKS_CAP` environment variable.
pub fn dense_cap() -> usize {
    std::env::var("MATROID_WALKS_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}
