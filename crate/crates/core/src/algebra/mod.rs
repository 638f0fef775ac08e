//! Signed-monomial algebra over the positive variables `p_j` and `alpha_k`.

mod condense;
mod expr;
mod sinr;

use thiserror::Error;

pub use condense::{condense, Condensation};
pub use expr::{
    split_signomial, Assignment, Monomial, Posynomial, Signomial, VarId, VarKind, DROP_THRESHOLD,
};
pub use sinr::{
    build_mrc_sinr_fixed_amplification, build_mrc_sinr_signomial, lemma1_check, Lemma1Report,
    MrcSinrExpressions, Quadruple,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("variable {0} has no value")]
    UnboundVariable(VarId),
    #[error("cannot condense an empty posynomial")]
    EmptyPosynomial,
    #[error("posynomial coefficients must be positive, got {0}")]
    NonPositiveCoefficient(f64),
}
