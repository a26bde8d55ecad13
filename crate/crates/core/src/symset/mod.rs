//! Symbolic subsets of an integer interval.

pub mod membership;
pub mod set;
pub mod size;
pub mod spec;

pub use membership::{membership, Membership};
pub use crate::symcore::Fresh;
pub use set::{
    ColorClass, Exclusion, FormatSet, IndexVar, Injectivity, IntervalSet, ResidueFilter, SetError, SetShape,
    SymbolicSet,
};
pub use size::{size_of, size_poly};
pub use spec::{ColoringSpec, Hint, SpecError, SpecFile, SymEquation};
