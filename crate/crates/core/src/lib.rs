//! p-adic integration on the Bruhat-Tits tree in modular-symbol form:
//! harmonic cocycles attached to p-new eigenforms, ord/log double integrals,
//! L-invariants, two-dimensional monodromy modules, and cycles attached to
//! real quadratic fields.

pub mod bttree;
pub mod exact_linalg;
pub mod harmonic;
pub mod error;
pub mod modsym;
pub mod padic;
pub mod weightmod;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil;
