//! SMT-LIB2 encoding of constraint systems and an external solver driver.

pub mod constraint;
pub mod encode;
pub mod solver;
pub mod strengthen;

pub use constraint::{CmpOp, Constraint};
pub use encode::{encode, EncodeError, Problem, Script};
pub use solver::{
    parse_output, replay, SmtProver, SmtSolver, SolverError, SolverVerdict, Validity, Verdict, DEFAULT_SMT_COMMAND,
};
