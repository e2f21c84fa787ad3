//! Clause-set analyses used by the translators: unit propagation, RUP
//! reconstruction, outer clauses, resolution paths and dependency relations.

pub mod outer;
pub mod paths;
pub mod propagate;
pub mod rup;

pub use outer::{outer_clause, outer_clause_exist, outer_clause_univ};
pub use paths::{drrs, marginal_universals, res_paths, restrict_to_drrs, PathResult};
pub use propagate::{unit_propagate, Outcome, PropagationTrace};
pub use rup::{derive_rup, rup_to_resolution, RupError};
