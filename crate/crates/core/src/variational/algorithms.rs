use std::time::Instant;

use super::elbo::elbo;
use super::updates::{
    beta_params_from_stats, check_shapes, h_update, normalize_logits, row_logits, update_beta_params, PairStats,
    Separation, Variant,
};
use super::VariationalState;
use crate::error::{Result, SbmError};
use crate::loss::{l1_loss, misclustered_count};
use crate::model::{AdjacencyMatrix, HardAssignment, PriorConfig, SoftAssignment};
use crate::numerics::BetaParams;
use crate::trace::{IterationRecord, IterationTrace};

/// ⌈ln n⌉, at least 1.
pub fn default_iterations(n: usize) -> usize {
    ((n.max(1) as f64).ln().ceil() as usize).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcaviOptions {
    pub iterations: usize,
    pub variant: Variant,
}

impl BcaviOptions {
    pub fn new(iterations: usize, variant: Variant) -> Self {
        BcaviOptions { iterations, variant }
    }

    /// Digamma variant with ⌈ln n⌉ iterations.
    pub fn for_nodes(n: usize) -> Self {
        BcaviOptions { iterations: default_iterations(n), variant: Variant::Digamma }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub state: VariationalState,
    pub trace: IterationTrace,
}

pub(crate) fn score_against(
    pi: &SoftAssignment,
    truth: Option<&HardAssignment>,
    record: &mut IterationRecord,
) -> Result<()> {
    if let Some(z_star) = truth {
        record.loss = Some(l1_loss(pi, z_star)?.loss);
        record.misclustered = Some(misclustered_count(&pi.harden(), z_star)?);
    }
    Ok(())
}

fn check_inputs(
    a: &AdjacencyMatrix,
    priors: &PriorConfig,
    pi0: &SoftAssignment,
    steps: usize,
    truth: Option<&HardAssignment>,
) -> Result<()> {
    if steps == 0 {
        return Err(SbmError::Input("iteration count must be at least 1".into()));
    }
    check_shapes(pi0, priors, a)?;
    if let Some(z) = truth {
        if z.n() != pi0.n() || z.k() != pi0.k() {
            return Err(SbmError::Input("truth dimensions do not match the initializer".into()));
        }
    }
    Ok(())
}

// With fewer than two nodes there are no pair terms and (t, λ) never enter
// the update, so they are reported as zero.
fn separation_for(variant: Variant, n: usize, p: &BetaParams, q: &BetaParams) -> Result<Separation> {
    if n < 2 {
        return Ok(Separation { t: 0.0, lambda: 0.0 });
    }
    variant.separation(p, q)
}

fn fill_state_fields(record: &mut IterationRecord, state: &VariationalState) {
    record.t = Some(state.t);
    record.lambda = Some(state.lambda);
    record.p_estimate = Some(state.p_params.mean());
    record.q_estimate = Some(state.q_params.mean());
    record.anti_assortative = state.t < 0.0;
}

/// Batch coordinate ascent: every iteration updates the Beta factors from
/// π^(s−1), forms (t, λ) with the chosen variant, then sets π^(s) = h(π^(s−1)).
///
/// A negative t does not stop the run; the iteration is flagged in the
/// trace. The ELBO is always evaluated with digamma-based quantities.
pub fn bcavi(
    a: &AdjacencyMatrix,
    priors: &PriorConfig,
    pi0: &SoftAssignment,
    options: &BcaviOptions,
    truth: Option<&HardAssignment>,
) -> Result<FitOutcome> {
    check_inputs(a, priors, pi0, options.iterations, truth)?;
    let mut trace = IterationTrace::new();
    let mut initial = IterationRecord::new(0);
    score_against(pi0, truth, &mut initial)?;
    trace.push(initial);

    let mut pi = pi0.clone();
    let mut state = None;
    for s in 1..=options.iterations {
        let started = Instant::now();
        let (p_params, q_params) = update_beta_params(&pi, a, priors)?;
        let sep = separation_for(options.variant, a.n(), &p_params, &q_params).map_err(|e| e.at_iteration(s))?;
        pi = h_update(&pi, sep.t, sep.lambda, priors, a).map_err(|e| e.at_iteration(s))?;
        let current = VariationalState { pi: pi.clone(), p_params, q_params, t: sep.t, lambda: sep.lambda };

        let mut record = IterationRecord::new(s);
        fill_state_fields(&mut record, &current);
        record.elbo = Some(elbo(&current, priors, a)?);
        score_against(&pi, truth, &mut record)?;
        record.elapsed = started.elapsed();
        trace.push(record);
        state = Some(current);
    }
    Ok(FitOutcome { state: state.expect("at least one iteration"), trace })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaviOptions {
    pub sweeps: usize,
    /// Recompute the full ELBO after every single coordinate update. Costs
    /// O(n · (|E| + n) k) per sweep; meant for verification.
    pub record_coordinate_elbo: bool,
}

impl CaviOptions {
    pub fn new(sweeps: usize) -> Self {
        CaviOptions { sweeps, record_coordinate_elbo: false }
    }
}

#[derive(Debug, Clone)]
pub struct CaviOutcome {
    pub state: VariationalState,
    pub trace: IterationTrace,
    /// ELBO of the initial state (Beta factors at the prior), then after every
    /// coordinate update, when requested.
    pub coordinate_elbo: Vec<f64>,
}

/// Sequential coordinate ascent. Each sweep updates q(p) and q(q) together
/// from the current π, then rows 0..n in order, each from the freshest values
/// of all other rows.
pub fn cavi_sequential(
    a: &AdjacencyMatrix,
    priors: &PriorConfig,
    pi0: &SoftAssignment,
    options: &CaviOptions,
    truth: Option<&HardAssignment>,
) -> Result<CaviOutcome> {
    check_inputs(a, priors, pi0, options.sweeps, truth)?;
    let (n, k) = (pi0.n(), pi0.k());
    let mut trace = IterationTrace::new();
    let mut initial = IterationRecord::new(0);
    score_against(pi0, truth, &mut initial)?;
    trace.push(initial);

    let mut state = VariationalState {
        pi: pi0.clone(),
        p_params: priors.p_prior(),
        q_params: priors.q_prior(),
        t: 0.0,
        lambda: 0.0,
    };
    let mut coordinate_elbo = Vec::new();
    if options.record_coordinate_elbo {
        coordinate_elbo.push(elbo(&state, priors, a)?);
    }
    let mut logits = vec![0.0; k];
    for s in 1..=options.sweeps {
        let started = Instant::now();
        let stats = PairStats::compute(&state.pi, a);
        (state.p_params, state.q_params) = beta_params_from_stats(&stats, priors);
        let sep = separation_for(Variant::Digamma, n, &state.p_params, &state.q_params)
            .map_err(|e| e.at_iteration(s))?;
        state.t = sep.t;
        state.lambda = sep.lambda;
        if options.record_coordinate_elbo {
            coordinate_elbo.push(elbo(&state, priors, a)?);
        }

        let mut col_sums = state.pi.column_sums();
        for i in 0..n {
            row_logits(&state.pi, i, sep.t, sep.lambda, priors.pi_pri().row(i), a, &col_sums, &mut logits);
            normalize_logits(&mut logits).map_err(|e| e.at_iteration(s))?;
            let row = state.pi.row_mut(i);
            for ((sum, old), new) in col_sums.iter_mut().zip(row.iter_mut()).zip(&logits) {
                *sum += new - *old;
                *old = *new;
            }
            if options.record_coordinate_elbo {
                coordinate_elbo.push(elbo(&state, priors, a)?);
            }
        }

        let mut record = IterationRecord::new(s);
        fill_state_fields(&mut record, &state);
        record.elbo = Some(elbo(&state, priors, a)?);
        score_against(&state.pi, truth, &mut record)?;
        record.elapsed = started.elapsed();
        trace.push(record);
    }
    Ok(CaviOutcome { state, trace, coordinate_elbo })
}
