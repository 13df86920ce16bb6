//! Relevance-based abductive explanation for discrete belief networks with
//! disjunctive (generalized) value assignments.

pub mod assign;
pub mod cli;
pub mod error;
pub mod hypercube;
pub mod model;
pub mod oracle;
pub mod search;
pub mod semantics;

pub use assign::{CompleteAssignment, GAssignment, ValueSet};
pub use error::{Error, Result};
pub use model::{validate_network, Network, VarId};
pub use search::{gib_map_search, Evidence, Explanation, SearchConfig};
