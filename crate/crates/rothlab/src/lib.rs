//! rothlab: exact-arithmetic toolkit for density-increment experiments on
//! 3AP-free sets.
//!
//! Everything the library computes is an exact integer or rational: balanced
//! functions, autocorrelations, energies, trilinear 3AP counts, and window
//! second moments are all carried in scaled integer form (scale factors N,
//! N², N⁴) so that every identity and inequality can be checked with strict
//! equality instead of a floating-point tolerance.
//!
//! Modules:
//! - [`modring`] — prime modulus selection and centered representatives
//! - [`sets`] — 3AP-free set generators, freeness checking, exact extremal search
//! - [`correlation`] — scaled-integer correlation/energy/window kernels
//! - [`certify`] — machine-checked inequality reports with exact rationals
//! - [`increment`] — one density-increment step (modular window → integer progression)
//! - [`iterate`] — the full increment iteration with trajectory bookkeeping
//! - [`oracle`] — independent brute-force references used by tests

pub mod certify;
pub mod correlation;
mod error;
pub mod increment;
pub mod iterate;
pub mod modring;
pub mod oracle;
mod rat;
pub mod sets;

pub use error::Error;
pub use rat::{parse_ratio, ratio_string, Rat};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
