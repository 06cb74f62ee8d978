//! Iterative maximum likelihood with the hard update map h′.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbmError};
use crate::gibbs::log_odds_separation;
use crate::model::{AdjacencyMatrix, HardAssignment};
use crate::trace::{IterationRecord, IterationTrace};
use crate::variational::{score_against, PairStats};

/// `[h′_λ(Z)]_i = e_a` with `a = argmax_b Σ_{j≠i} Z_{j,b}(A_ij − λ)`, ties to
/// the smallest index. Every row is computed from the input `z`.
pub fn h_prime(z: &HardAssignment, lambda: f64, a: &AdjacencyMatrix) -> Result<HardAssignment> {
    if z.n() != a.n() {
        return Err(SbmError::Input(format!("assignment has n = {}, graph has n = {}", z.n(), a.n())));
    }
    let k = z.k();
    let sizes = z.community_sizes();
    let labels: Vec<usize> = (0..z.n())
        .into_par_iter()
        .map_init(
            || vec![0usize; k],
            |counts, i| {
                counts.fill(0);
                for j in a.neighbors(i) {
                    counts[z.label(j)] += 1;
                }
                let score = |b: usize| {
                    let others = sizes[b] - usize::from(z.label(i) == b);
                    counts[b] as f64 - lambda * others as f64
                };
                let mut best = 0;
                let mut best_score = score(0);
                for b in 1..k {
                    let s = score(b);
                    if s > best_score {
                        best = b;
                        best_score = s;
                    }
                }
                best
            },
        )
        .collect();
    HardAssignment::from_labels(labels, k)
}

/// How p̂ and q̂ are formed from edge counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Edges over pairs within (resp. across) communities.
    #[default]
    Proportion,
    /// Edges over non-edges, kept for comparison with the literal update.
    EdgeOdds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MleOptions {
    pub iterations: usize,
    pub estimator: Estimator,
}

impl MleOptions {
    pub fn new(iterations: usize) -> Self {
        MleOptions { iterations, estimator: Estimator::Proportion }
    }
}

#[derive(Debug, Clone)]
pub struct MleOutcome {
    pub z: HardAssignment,
    pub p_hat: f64,
    pub q_hat: f64,
    pub trace: IterationTrace,
}

fn first_empty(z: &HardAssignment) -> Option<usize> {
    z.community_sizes().iter().position(|&s| s == 0)
}

/// Estimates (p̂, q̂) from a hard assignment, clamped to [1/n², 1 − 1/n²].
pub fn estimate_pq(z: &HardAssignment, a: &AdjacencyMatrix, estimator: Estimator) -> (f64, f64) {
    let stats = PairStats::compute(z, a);
    let (within, cross) = match estimator {
        Estimator::Proportion => (
            stats.within_edges / stats.within_pairs,
            stats.cross_edges() / (stats.pairs - stats.within_pairs),
        ),
        Estimator::EdgeOdds => (
            stats.within_edges / stats.within_non_edges(),
            stats.cross_edges() / stats.cross_non_edges(),
        ),
    };
    let n = a.n() as f64;
    let guard = 1.0 / (n * n);
    let clamp = |x: f64| if x.is_nan() { 0.5 } else { x.clamp(guard, 1.0 - guard) };
    (clamp(within), clamp(cross))
}

pub fn iterative_mle(
    a: &AdjacencyMatrix,
    z0: &HardAssignment,
    options: &MleOptions,
    truth: Option<&HardAssignment>,
) -> Result<MleOutcome> {
    if options.iterations == 0 {
        return Err(SbmError::Input("iteration count must be at least 1".into()));
    }
    if z0.n() != a.n() {
        return Err(SbmError::Input(format!("initializer has n = {}, graph has n = {}", z0.n(), a.n())));
    }
    if let Some(community) = first_empty(z0) {
        return Err(SbmError::DegeneratePartition { community, iteration: 0 });
    }
    let mut trace = IterationTrace::new();
    let mut initial = IterationRecord::new(0);
    score_against(&z0.to_soft(), truth, &mut initial)?;
    trace.push(initial);

    let mut z = z0.clone();
    let (mut p_hat, mut q_hat) = (f64::NAN, f64::NAN);
    for s in 1..=options.iterations {
        let started = Instant::now();
        (p_hat, q_hat) = estimate_pq(&z, a, options.estimator);
        let sep = log_odds_separation(p_hat, q_hat).map_err(|e| e.at_iteration(s))?;
        z = h_prime(&z, sep.lambda, a)?;
        if let Some(community) = first_empty(&z) {
            return Err(SbmError::DegeneratePartition { community, iteration: s });
        }
        let mut record = IterationRecord::new(s);
        record.t = Some(sep.t);
        record.lambda = Some(sep.lambda);
        record.p_estimate = Some(p_hat);
        record.q_estimate = Some(q_hat);
        record.anti_assortative = sep.t < 0.0;
        score_against(&z.to_soft(), truth, &mut record)?;
        record.elapsed = started.elapsed();
        trace.push(record);
    }
    Ok(MleOutcome { z, p_hat, q_hat, trace })
}
