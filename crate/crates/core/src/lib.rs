//! Functional Bethe ansatz machinery for integrable spin-boson models.
//!
//! The quantum space is a truncated bosonic Fock space tensored with a
//! spin-1/2, carrying the rational six-vertex Yang-Baxter structure.  The
//! crate builds twisted and open (double-row) transfer matrices from the
//! boson and spin Lax operators, extracts the operator zeros of the relevant
//! off-diagonal monodromy entries, factorizes quantum determinants, solves
//! TQ/Bethe equations and cross-validates everything against dense
//! non-hermitian diagonalization on the truncated space.

pub mod error;
pub mod fock;
pub mod open;
pub mod poly;
pub mod quasiclassical;
pub mod spectral;
pub mod twisted;
pub mod yang_baxter;

pub use error::{Error, Result};
pub use fock::{edge_leak, make_boson_ops, make_spin_ops, tensor_embed, BosonOps, FockSpinOperator, SpinOps};
pub use poly::{OperatorPolynomial, ScalarPolynomial};
pub use yang_baxter::ModelParams;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Shorthand for a complex number from real/imag parts.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
