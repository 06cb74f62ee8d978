use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbmError};
use crate::model::{AdjacencyMatrix, Membership, PriorConfig, SoftAssignment};
use crate::numerics::{psi, BetaParams};

/// Pair sums that determine the Beta updates and the expected log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    /// Σ_{i<j} A_ij Σ_a π_ia π_ja
    pub within_edges: f64,
    /// Σ_{i<j} Σ_a π_ia π_ja
    pub within_pairs: f64,
    /// Σ_{i<j} A_ij
    pub edges: f64,
    /// n(n − 1)/2
    pub pairs: f64,
}

impl PairStats {
    pub fn compute<M: Membership>(pi: &M, a: &AdjacencyMatrix) -> Self {
        let n = pi.n();
        let mut within_edges = 0.0;
        for i in 0..n {
            for j in a.neighbors(i).filter(|&j| j > i) {
                within_edges += pi.row_dot(i, j);
            }
        }
        let col_sq: f64 = pi.column_sums().iter().map(|c| c * c).sum();
        let diag: f64 = (0..n).map(|i| pi.row_dot(i, i)).sum();
        let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
        PairStats {
            within_edges,
            within_pairs: (0.5 * (col_sq - diag)).max(0.0),
            edges: a.edge_count() as f64,
            pairs,
        }
    }

    /// Σ_{i<j} (1 − A_ij) Σ_a π_ia π_ja
    pub fn within_non_edges(&self) -> f64 {
        (self.within_pairs - self.within_edges).max(0.0)
    }

    /// Σ_{i<j} A_ij Σ_{a≠b} π_ia π_jb
    pub fn cross_edges(&self) -> f64 {
        (self.edges - self.within_edges).max(0.0)
    }

    /// Σ_{i<j} (1 − A_ij) Σ_{a≠b} π_ia π_jb
    pub fn cross_non_edges(&self) -> f64 {
        (self.pairs - self.edges - self.within_non_edges()).max(0.0)
    }
}

pub(crate) fn check_shapes<M: Membership>(pi: &M, priors: &PriorConfig, a: &AdjacencyMatrix) -> Result<()> {
    if pi.n() != a.n() || priors.n() != a.n() || pi.k() != priors.k() {
        return Err(SbmError::Input(format!(
            "dimension mismatch: graph has n = {}, assignment is {}x{}, prior is {}x{}",
            a.n(),
            pi.n(),
            pi.k(),
            priors.n(),
            priors.k()
        )));
    }
    Ok(())
}

/// Conjugate updates of the Beta factors on p and q given memberships.
pub fn update_beta_params<M: Membership>(
    pi: &M,
    a: &AdjacencyMatrix,
    priors: &PriorConfig,
) -> Result<(BetaParams, BetaParams)> {
    check_shapes(pi, priors, a)?;
    let stats = PairStats::compute(pi, a);
    Ok(beta_params_from_stats(&stats, priors))
}

pub(crate) fn beta_params_from_stats(stats: &PairStats, priors: &PriorConfig) -> (BetaParams, BetaParams) {
    let (pp, qp) = (priors.p_prior(), priors.q_prior());
    let p = BetaParams::new(pp.alpha() + stats.within_edges, pp.beta() + stats.within_non_edges());
    let q = BetaParams::new(qp.alpha() + stats.cross_edges(), qp.beta() + stats.cross_non_edges());
    (p.expect("prior plus non-negative counts"), q.expect("prior plus non-negative counts"))
}

/// How t and λ are formed from the Beta factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Digamma,
    /// ψ(x) replaced by log x.
    Log,
}

/// The pair (t, λ) driving the update map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub t: f64,
    pub lambda: f64,
}

impl Variant {
    pub fn separation(self, p: &BetaParams, q: &BetaParams) -> Result<Separation> {
        match self {
            Variant::Digamma => t_lambda_digamma(p, q),
            Variant::Log => t_lambda_log(p, q),
        }
    }
}

fn from_parts(two_t: f64, two_t_lambda: f64) -> Result<Separation> {
    if two_t == 0.0 {
        return Err(SbmError::DegenerateSeparation { iteration: None });
    }
    let sep = Separation { t: two_t / 2.0, lambda: two_t_lambda / two_t };
    if !(sep.t.is_finite() && sep.lambda.is_finite()) {
        return Err(SbmError::Numerical(format!("non-finite separation t = {}, lambda = {}", sep.t, sep.lambda)));
    }
    Ok(sep)
}

/// t = ½[(ψ(α_p) − ψ(β_p)) − (ψ(α_q) − ψ(β_q))],
/// λ = [(ψ(β_q) − ψ(α_q + β_q)) − (ψ(β_p) − ψ(α_p + β_p))] / (2t).
pub fn t_lambda_digamma(p: &BetaParams, q: &BetaParams) -> Result<Separation> {
    let two_t = (psi(p.alpha()) - psi(p.beta())) - (psi(q.alpha()) - psi(q.beta()));
    let two_t_lambda = q.expected_ln_complement() - p.expected_ln_complement();
    from_parts(two_t, two_t_lambda)
}

/// The same quantities with log in place of ψ.
pub fn t_lambda_log(p: &BetaParams, q: &BetaParams) -> Result<Separation> {
    let two_t = (p.alpha() * q.beta() / (p.beta() * q.alpha())).ln();
    let two_t_lambda = (q.beta() * (p.alpha() + p.beta()) / ((q.alpha() + q.beta()) * p.beta())).ln();
    from_parts(two_t, two_t_lambda)
}

/// Writes the logits ln π^pri_{i,a} + 2t Σ_{j≠i} π_{j,a}(A_ij − λ) of row `i`.
/// `col_sums` are the column sums of `pi`, including row `i` itself.
pub(crate) fn row_logits<M: Membership>(
    pi: &M,
    i: usize,
    t: f64,
    lambda: f64,
    prior_row: &[f64],
    a: &AdjacencyMatrix,
    col_sums: &[f64],
    out: &mut [f64],
) {
    out.fill(0.0);
    for j in a.neighbors(i) {
        pi.add_row(j, out);
    }
    for (col, logit) in out.iter_mut().enumerate() {
        let others = col_sums[col] - pi.weight(i, col);
        *logit = prior_row[col].ln() + 2.0 * t * (*logit - lambda * others);
    }
}

/// In-place softmax with max subtraction.
pub(crate) fn normalize_logits(row: &mut [f64]) -> Result<()> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(SbmError::Numerical(format!("non-finite logits {row:?}")));
    }
    let mut total = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in row.iter_mut() {
        *v /= total;
    }
    Ok(())
}

/// The batch update map: every row of the output is computed from the input
/// memberships, `[h(π)]_{i,a} ∝ π^pri_{i,a} exp(2t Σ_{j≠i} π_{j,a}(A_ij − λ))`.
///
/// Rows are evaluated in parallel; each row's arithmetic is independent of
/// scheduling, so the result is identical to the sequential loop.
pub fn h_update<M: Membership>(
    pi: &M,
    t: f64,
    lambda: f64,
    priors: &PriorConfig,
    a: &AdjacencyMatrix,
) -> Result<SoftAssignment> {
    check_shapes(pi, priors, a)?;
    let (n, k) = (pi.n(), pi.k());
    let col_sums = pi.column_sums();
    let mut values = vec![0.0; n * k];
    values.par_chunks_mut(k).enumerate().try_for_each(|(i, row)| {
        row_logits(pi, i, t, lambda, priors.pi_pri().row(i), a, &col_sums, row);
        normalize_logits(row)
    })?;
    Ok(SoftAssignment::from_raw(n, k, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HardAssignment;
    use approx::assert_abs_diff_eq;

    fn beta(a: f64, b: f64) -> BetaParams {
        BetaParams::new(a, b).unwrap()
    }

    #[test]
    fn beta_update_hand_example() {
        let a = AdjacencyMatrix::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let z = HardAssignment::from_labels(vec![0, 0, 1], 2).unwrap();
        let priors = PriorConfig::uniform(3, 2);
        let (p, q) = update_beta_params(&z.to_soft(), &a, &priors).unwrap();
        assert_eq!((p.alpha(), p.beta(), q.alpha(), q.beta()), (2.0, 1.0, 2.0, 2.0));
        let (p2, q2) = update_beta_params(&z, &a, &priors).unwrap();
        assert_eq!((p, q), (p2, q2));
    }

    #[test]
    fn beta_update_uniform_rows_no_edges() {
        let (n, k) = (9, 3);
        let a = AdjacencyMatrix::empty(n);
        let priors = PriorConfig::uniform(n, k);
        let (p, q) = update_beta_params(&SoftAssignment::uniform(n, k), &a, &priors).unwrap();
        assert_eq!(p.alpha(), 1.0);
        assert_abs_diff_eq!(p.beta(), 1.0 + 36.0 / 3.0, epsilon = 1e-12);
        assert_eq!(q.alpha(), 1.0);
        assert_abs_diff_eq!(q.beta(), 1.0 + 36.0 * 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn separation_examples() {
        let same = beta(3.0, 4.0);
        assert!(matches!(t_lambda_digamma(&same, &same), Err(SbmError::DegenerateSeparation { .. })));
        assert!(matches!(t_lambda_log(&same, &same), Err(SbmError::DegenerateSeparation { .. })));

        let sep = t_lambda_log(&beta(9.0, 1.0), &beta(1.0, 9.0)).unwrap();
        assert_abs_diff_eq!(sep.t, 0.5 * 81f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(sep.t, 2.197_224_577_3, epsilon = 1e-10);

        let (p, q) = (beta(1000.0, 1000.0), beta(1000.0, 9000.0));
        let dg = t_lambda_digamma(&p, &q).unwrap();
        let lg = t_lambda_log(&p, &q).unwrap();
        assert!(dg.t > 0.0);
        assert!((dg.t - lg.t).abs() < 1e-2);

        let swapped = t_lambda_digamma(&q, &p).unwrap();
        assert_abs_diff_eq!(swapped.t, -dg.t, epsilon = 1e-14);
    }

    #[test]
    fn h_update_single_neighbor() {
        let a = AdjacencyMatrix::from_edges(2, [(0, 1)]).unwrap();
        let pi = SoftAssignment::from_rows(&[vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let priors = PriorConfig::uniform(2, 2);
        let out = h_update(&pi, 1.0, 0.5, &priors, &a).unwrap();
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(out.get(0, 0), e / (e + 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(out.get(0, 1), 1.0 / (e + 1.0), epsilon = 1e-15);
    }

    #[test]
    fn h_update_symmetry_and_zero_t() {
        let a = AdjacencyMatrix::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let priors = PriorConfig::uniform(4, 3);
        let out = h_update(&SoftAssignment::uniform(4, 3), 2.0, 0.3, &priors, &a).unwrap();
        for row in out.rows() {
            for v in row {
                assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
            }
        }
        let unit = beta(1.0, 1.0);
        let priors = PriorConfig::with_weights(4, &[1.0, 2.0, 5.0], unit, unit).unwrap();
        let pi = HardAssignment::from_labels(vec![0, 1, 2, 0], 3).unwrap();
        let out = h_update(&pi, 0.0, 0.7, &priors, &a).unwrap();
        for (row, prior) in out.rows().zip(priors.pi_pri().rows()) {
            for (v, w) in row.iter().zip(prior) {
                assert_abs_diff_eq!(*v, *w, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn h_update_survives_huge_logits() {
        let n = 2000;
        let edges: Vec<_> = (0..n).flat_map(|i| ((i + 1)..n).filter(move |j| (i + j) % 2 == 0).map(move |j| (i, j))).collect();
        let a = AdjacencyMatrix::from_edges(n, edges).unwrap();
        let z = HardAssignment::from_labels((0..n).map(|i| i % 2).collect(), 2).unwrap();
        let out = h_update(&z, 5.0, 0.1, &PriorConfig::uniform(n, 2), &a).unwrap();
        assert_eq!(out.harden(), z);
        for row in out.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
