//! Batched Gibbs sampler.
//!
//! Each iteration updates the Beta conditionals from Z^(s−1), draws p and q,
//! forms (t, λ) from the plug-in log-odds, computes π^(s) = h(Z^(s−1)) and
//! samples every row of Z^(s) from π^(s). Rows are sampled sequentially in
//! index order from a single ChaCha8 stream, one uniform per row, so a chain
//! depends only on its seed and inputs.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Result, SbmError};
use crate::loss::l1_loss;
use crate::model::{AdjacencyMatrix, HardAssignment, PriorConfig, SoftAssignment};
use crate::numerics::BetaParams;
use crate::rng::{rng_from_seed, SbmRng};
use crate::trace::{IterationRecord, IterationTrace};
use crate::variational::{h_update, score_against, update_beta_params, Separation};

/// One draw from Beta(α, β), via `rand_distr::Beta` (Cheng's BB/BC
/// rejection samplers).
pub fn sample_beta<R: Rng + ?Sized>(params: &BetaParams, rng: &mut R) -> f64 {
    Beta::new(params.alpha(), params.beta())
        .expect("BetaParams are validated positive")
        .sample(rng)
}

/// Inverse-CDF draw from a probability vector using one uniform.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (a, &p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return a;
        }
    }
    // u landed in the rounding gap above the final partial sum.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Plug-in t = ½ log[p(1 − q)/((1 − p)q)], λ = log[(1 − q)/(1 − p)] / (2t).
pub fn log_odds_separation(p: f64, q: f64) -> Result<Separation> {
    let two_t = (p * (1.0 - q) / ((1.0 - p) * q)).ln();
    if two_t == 0.0 {
        return Err(SbmError::DegenerateSeparation { iteration: None });
    }
    let sep = Separation { t: two_t / 2.0, lambda: ((1.0 - q) / (1.0 - p)).ln() / two_t };
    if !(sep.t.is_finite() && sep.lambda.is_finite()) {
        return Err(SbmError::Numerical(format!("non-finite log-odds separation at p = {p}, q = {q}")));
    }
    Ok(sep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsOptions {
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSample {
    pub z: HardAssignment,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone)]
pub struct GibbsOutcome {
    /// Z^(1), ..., Z^(S) with the (p, q) drawn in the same iteration.
    pub chain: Vec<GibbsSample>,
    pub trace: IterationTrace,
}

impl GibbsOutcome {
    pub fn last(&self) -> &GibbsSample {
        self.chain.last().expect("chain has at least one sample")
    }
}

/// Draws one hard assignment with rows sampled independently from `pi`.
pub fn sample_rows(pi: &SoftAssignment, rng: &mut SbmRng) -> HardAssignment {
    let labels = pi.rows().map(|row| sample_categorical(row, rng)).collect();
    HardAssignment::from_labels(labels, pi.k()).expect("sampled labels are in range")
}

// Keeps a draw strictly inside (0, 1) so the log-odds stay finite.
fn open_unit(x: f64) -> f64 {
    x.clamp(f64::EPSILON, 1.0 - f64::EPSILON)
}

pub fn gibbs(
    a: &AdjacencyMatrix,
    priors: &PriorConfig,
    z0: &HardAssignment,
    options: &GibbsOptions,
    truth: Option<&HardAssignment>,
) -> Result<GibbsOutcome> {
    if options.iterations == 0 {
        return Err(SbmError::Input("iteration count must be at least 1".into()));
    }
    if z0.n() != a.n() || priors.n() != a.n() || z0.k() != priors.k() {
        return Err(SbmError::Input("dimension mismatch between graph, initializer and prior".into()));
    }
    let mut rng = rng_from_seed(options.seed);
    let mut trace = IterationTrace::new();
    let mut initial = IterationRecord::new(0);
    score_against(&z0.to_soft(), truth, &mut initial)?;
    initial.sample_loss = initial.loss;
    trace.push(initial);

    let mut chain = Vec::with_capacity(options.iterations);
    let mut z = z0.clone();
    for s in 1..=options.iterations {
        let started = Instant::now();
        let (p_params, q_params) = update_beta_params(&z, a, priors)?;
        let p = open_unit(sample_beta(&p_params, &mut rng));
        let q = open_unit(sample_beta(&q_params, &mut rng));
        let sep = if a.n() < 2 {
            Separation { t: 0.0, lambda: 0.0 }
        } else {
            log_odds_separation(p, q).map_err(|e| e.at_iteration(s))?
        };
        let pi = h_update(&z, sep.t, sep.lambda, priors, a).map_err(|e| e.at_iteration(s))?;
        z = sample_rows(&pi, &mut rng);

        let mut record = IterationRecord::new(s);
        record.t = Some(sep.t);
        record.lambda = Some(sep.lambda);
        record.p_estimate = Some(p);
        record.q_estimate = Some(q);
        record.anti_assortative = sep.t < 0.0;
        if let Some(z_star) = truth {
            record.loss = Some(l1_loss(&pi, z_star)?.loss);
            let hard = l1_loss(&z.to_soft(), z_star)?.loss;
            record.sample_loss = Some(hard);
            record.misclustered = Some((hard / 2.0).round() as usize);
        }
        record.elapsed = started.elapsed();
        trace.push(record);
        chain.push(GibbsSample { z: z.clone(), p, q });
    }
    Ok(GibbsOutcome { chain, trace })
}
