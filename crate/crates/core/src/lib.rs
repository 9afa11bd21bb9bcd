//! Minimal numbers of generators of separable algebras over finite fields.
//!
//! The counting code is generic over [`counting::Natural`]; the aliases below
//! fix the integer types used across the crate's public results.

pub mod counting;
pub mod field;
pub mod gencalc;
pub mod matrix;
pub mod oracle;
pub mod verify;

/// Exact count, unbounded.
pub type Count = num_bigint::BigUint;
/// Machine-word counts for hot loops that are known to fit.
pub type Count64 = u64;
pub type Count128 = u128;

/// Default cap on the number of tuples an exhaustive enumeration may visit.
pub const DEFAULT_GUARD: u64 = 10_000_000;

pub use counting::{BoundPair, BoundSource, CountError};
pub use field::{ExtensionField, FieldElement, FieldError, PrimePower};
pub use gencalc::{AlgebraSpec, GenResult, IntervalReport, Mode};
pub use matrix::{Matrix, MatrixContext, MatrixError, MatrixTuple};
pub use oracle::{CacheStore, Oracle, OracleError, OracleResult};
