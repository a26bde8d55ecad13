//! Symbolic integer expressions, assumptions and simplification.

pub mod assume;
pub mod expr;
pub mod guard;
pub mod parse;
pub mod poly;
pub mod simplify;

pub use assume::{AssumptionSet, Parity};
pub use expr::{Bindings, EvalError, Fresh, Node, SymExpr, Symbol};
pub use guard::{NoProver, NonnegProver, ProofOutcome, ShiftProver};
pub use parse::{parse_expr, ParseError};
pub use poly::{Atom, Monomial, Poly};
pub use simplify::{expand, FloorOutcome, Simplifier};
