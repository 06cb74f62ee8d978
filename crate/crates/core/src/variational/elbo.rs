use super::updates::{check_shapes, PairStats};
use super::VariationalState;
use crate::error::Result;
use crate::model::{AdjacencyMatrix, PriorConfig};
use crate::numerics::{kl_beta, kl_categorical};

/// Evidence lower bound E_q[log p(A | Z, p, q)] − KL(q ‖ prior). Higher is
/// better.
///
/// The expected log-likelihood is assembled from pair sums: within-community
/// pairs contribute E log p or E log(1 − p), the rest E log q or E log(1 − q).
/// This equals the t⟨A − λ11ᵀ + λI, ππᵀ⟩ form with t, λ from the digamma
/// formulas but never divides by t, so it stays defined at t = 0.
pub fn elbo(state: &VariationalState, priors: &PriorConfig, a: &AdjacencyMatrix) -> Result<f64> {
    check_shapes(&state.pi, priors, a)?;
    let stats = PairStats::compute(&state.pi, a);
    Ok(expected_log_likelihood(state, &stats) - kl_terms(state, priors)?)
}

pub(crate) fn expected_log_likelihood(state: &VariationalState, stats: &PairStats) -> f64 {
    let (p, q) = (&state.p_params, &state.q_params);
    stats.within_edges * p.expected_ln()
        + (stats.within_pairs - stats.within_edges) * p.expected_ln_complement()
        + (stats.edges - stats.within_edges) * q.expected_ln()
        + (stats.pairs - stats.edges - stats.within_pairs + stats.within_edges) * q.expected_ln_complement()
}

pub(crate) fn kl_terms(state: &VariationalState, priors: &PriorConfig) -> Result<f64> {
    let mut total = kl_beta(&state.p_params, &priors.p_prior()) + kl_beta(&state.q_params, &priors.q_prior());
    for (row, prior) in state.pi.rows().zip(priors.pi_pri().rows()) {
        total += kl_categorical(row, prior)?;
    }
    Ok(total)
}
