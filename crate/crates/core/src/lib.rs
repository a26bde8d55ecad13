//! Rado numbers of linear equations: SAT-based computation and symbolic
//! verification of colorings that certify lower bounds.

pub mod diophantine;
pub mod oracle;
pub mod process;
pub mod prover;
pub mod sat;
pub mod scalar;
pub mod search;
pub mod smt;
pub mod symcore;
pub mod symset;

pub use scalar::Scalar;
pub use symcore::{AssumptionSet, Bindings, Parity, ProofOutcome, SymExpr, Symbol};

/// Integer type used by the concrete layers.
pub type Int = i128;
/// Symbolic expression over [`Int`].
pub type Expr = SymExpr<Int>;
/// Assumptions over [`Int`].
pub type Assumptions = AssumptionSet<Int>;
