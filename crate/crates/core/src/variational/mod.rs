//! Mean-field variational inference for the SBM: the conjugate Beta updates,
//! the soft update map h, batch (BCAVI) and sequential (CAVI) coordinate
//! ascent, and the ELBO.

mod algorithms;
mod elbo;
mod updates;

pub use algorithms::{
    bcavi, cavi_sequential, default_iterations, BcaviOptions, CaviOptions, CaviOutcome, FitOutcome,
};
pub use elbo::elbo;
pub use updates::{
    h_update, t_lambda_digamma, t_lambda_log, update_beta_params, PairStats, Separation, Variant,
};
pub(crate) use algorithms::score_against;

use crate::model::SoftAssignment;
use crate::numerics::BetaParams;

/// Parameters of the mean-field family plus the (t, λ) they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    pub pi: SoftAssignment,
    pub p_params: BetaParams,
    pub q_params: BetaParams,
    pub t: f64,
    pub lambda: f64,
}
