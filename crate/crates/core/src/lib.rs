//! Universal algebraic geometry over finite one-sorted algebras.
//!
//! Free algebras of varieties generated by finite algebras, closed
//! congruence lattices, word systems and star algebras, and bounded checks
//! of geometric and automorphic equivalence.

pub mod algebra;
pub mod corpus;
pub mod equivalence;
pub mod error;
pub mod free;
pub mod geometry;
pub mod io;
pub mod partition;
pub mod suite;
pub mod terms;
pub mod variety;
pub mod verbal;

pub use algebra::{FiniteAlgebra, Homomorphism};
pub use error::{Error, Result};
pub use free::FreeAlgebra;
pub use partition::Partition;
pub use terms::{Signature, Term};
pub use variety::VarietySpec;
