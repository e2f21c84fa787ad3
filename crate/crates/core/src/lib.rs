//! A clausal refutation kernel for dependency quantified Boolean formulas
//! with conditioned extension variables, together with its proof checker,
//! a brute-force truth oracle, clause-set analyses, and translators from
//! expansion, fork-resolution and (D)QRAT proofs.

pub mod analysis;
pub mod cli;
pub mod formula;
pub mod kernel;
pub mod translate;
