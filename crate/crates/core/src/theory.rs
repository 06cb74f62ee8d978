//! Closed-form rate quantities: the order-½ Rényi divergence I, the oracle
//! threshold (t*, λ*), the minimax reference curve, and the contraction factor
//! and iteration budget of the batch updates.

use serde::Serialize;

use crate::error::{Result, SbmError};
use crate::model::nbar_min_of;

fn check_open_unit(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(SbmError::Domain(format!("p and q must lie in (0, 1), got p = {p}, q = {q}")));
    }
    Ok(())
}

fn check_assortative(p: f64, q: f64) -> Result<()> {
    check_open_unit(p, q)?;
    if q >= p {
        return Err(SbmError::Domain(format!("need q < p, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// I = −2 log[√(pq) + √((1 − p)(1 − q))].
pub fn renyi_i(p: f64, q: f64) -> Result<f64> {
    check_open_unit(p, q)?;
    let affinity = (p * q).sqrt() + ((1.0 - p) * (1.0 - q)).sqrt();
    Ok((-2.0 * affinity.ln()).max(0.0))
}

/// t* = ½ log[p(1 − q)/(q(1 − p))], λ* = log[(1 − q)/(1 − p)] / (2t*).
pub fn t_lambda_star(p: f64, q: f64) -> Result<(f64, f64)> {
    check_assortative(p, q)?;
    let t = 0.5 * (p * (1.0 - q) / (q * (1.0 - p))).ln();
    let lambda = ((1.0 - q) / (1.0 - p)).ln() / (2.0 * t);
    Ok((t, lambda))
}

/// n·exp(−nI/2) for k = 2 and n·exp(−ρnI/k) for k ≥ 3, with the o(1) terms
/// of the exponent dropped. A reference curve, not a certified bound.
pub fn minimax_bound(n: usize, k: usize, rho: f64, i: f64) -> f64 {
    let n = n as f64;
    let exponent = if k <= 2 { n * i / 2.0 } else { rho * n * i / k as f64 };
    n * (-exponent).exp()
}

/// nI / [wk(n/n̄_min)²], which must exceed 1 for the contraction to apply.
pub fn signal_ratio(n: usize, k: usize, i: f64, w: f64, nbar_min: f64) -> f64 {
    let n = n as f64;
    let imbalance = n / nbar_min;
    n * i / (w * k as f64 * imbalance * imbalance)
}

/// Contraction factor c_n = ratio^(−1/2) and iteration budget
/// s₀ = (nI/k) / log(ratio).
pub fn contraction_and_budget(n: usize, k: usize, i: f64, w: f64, nbar_min: f64) -> Result<(f64, f64)> {
    let ratio = signal_ratio(n, k, i, w, nbar_min);
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(SbmError::Regime { ratio });
    }
    let c_n = ratio.powf(-0.5);
    let s0 = (n as f64 * i / k as f64) / ratio.ln();
    Ok((c_n, s0))
}

/// Residuals of the Chernoff identities for X ~ Ber(q), Y ~ Ber(p) at
/// (t*, λ*): e^{tλ} = (E e^{tX} / E e^{−tY})^{1/2} and
/// E e^{tX} · E e^{−tY} = e^{−I}. Returns the larger absolute residual.
pub fn chernoff_identity_check(p: f64, q: f64) -> Result<f64> {
    let (t, lambda) = t_lambda_star(p, q)?;
    let i = renyi_i(p, q)?;
    let mgf_x = 1.0 - q + q * t.exp();
    let mgf_neg_y = 1.0 - p + p * (-t).exp();
    let first = ((t * lambda).exp() - (mgf_x / mgf_neg_y).sqrt()).abs();
    let second = (mgf_x * mgf_neg_y - (-i).exp()).abs();
    Ok(first.max(second))
}

/// Theory diagnostics for one experimental regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub i: f64,
    pub t_star: f64,
    pub lambda_star: f64,
    pub nbar_min: f64,
    pub w: f64,
    pub rho: f64,
    /// Minimax reference curve with o(1) terms set to zero.
    pub minimax_bound: f64,
    pub signal_ratio: f64,
    /// `None` when the signal ratio is at most 1.
    pub contraction: Option<f64>,
    pub iteration_budget: Option<f64>,
}

impl RateReport {
    pub fn new(n: usize, p: f64, q: f64, sizes: &[usize], w: f64) -> Result<Self> {
        let k = sizes.len();
        let nbar_min = nbar_min_of(sizes).ok_or_else(|| SbmError::Domain("need at least two communities".into()))?;
        if sizes.iter().sum::<usize>() != n {
            return Err(SbmError::Input("community sizes must sum to n".into()));
        }
        let i = renyi_i(p, q)?;
        let (t_star, lambda_star) = t_lambda_star(p, q)?;
        let rho = *sizes.iter().min().expect("k >= 2") as f64 * k as f64 / n as f64;
        let budget = contraction_and_budget(n, k, i, w, nbar_min).ok();
        Ok(RateReport {
            i,
            t_star,
            lambda_star,
            nbar_min,
            w,
            rho,
            minimax_bound: minimax_bound(n, k, rho, i),
            signal_ratio: signal_ratio(n, k, i, w, nbar_min),
            contraction: budget.map(|b| b.0),
            iteration_budget: budget.map(|b| b.1),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn renyi_values() {
        assert_eq!(renyi_i(0.4, 0.4).unwrap(), 0.0);
        // 30-digit reference: 0.067257369380875494915...
        assert_abs_diff_eq!(renyi_i(0.3, 0.1).unwrap(), 0.067_257_369_380_875_5, epsilon = 1e-15);
        assert_eq!(renyi_i(0.3, 0.1).unwrap(), renyi_i(0.1, 0.3).unwrap());
        assert!(matches!(renyi_i(0.0, 0.1), Err(SbmError::Domain(_))));
        assert!(renyi_i(0.5, 1.0).is_err());
    }

    #[test]
    fn threshold_values() {
        let (t, _) = t_lambda_star(0.5, 0.1).unwrap();
        assert_abs_diff_eq!(t, 0.5 * 9f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(t, 1.098_612_3, epsilon = 1e-7);
        let (_, lambda) = t_lambda_star(0.7, 0.3).unwrap();
        assert_abs_diff_eq!(lambda, 0.5, epsilon = 1e-15);
        assert!(t_lambda_star(0.1, 0.1).is_err());
        assert!(t_lambda_star(0.1, 0.2).is_err());
    }

    #[test]
    fn minimax_values() {
        assert_eq!(minimax_bound(100, 2, 1.0, 0.0), 100.0);
        assert_abs_diff_eq!(minimax_bound(100, 2, 1.0, 0.1), 0.673_794_699_908_546_7, epsilon = 1e-12);
        assert_abs_diff_eq!(minimax_bound(90, 3, 1.0, 0.1), 90.0 * (-3.0f64).exp(), epsilon = 1e-12);
        let mut prev = f64::INFINITY;
        for step in 0..50 {
            let b = minimax_bound(200, 4, 0.8, step as f64 * 0.01);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn contraction_values() {
        let (c, s0) = contraction_and_budget(800, 2, 0.1, 1.0, 400.0).unwrap();
        assert_abs_diff_eq!(c, 0.316_227_766_016_837_94, epsilon = 1e-15);
        assert_abs_diff_eq!(s0, 40.0 / 10f64.ln(), epsilon = 1e-12);
        let (c2, _) = contraction_and_budget(800, 2, 0.2, 1.0, 400.0).unwrap();
        assert_abs_diff_eq!(c2, c / 2f64.sqrt(), epsilon = 1e-15);
        // ratio = 800 · 0.005 / (2 · 4) = 0.5
        assert!(matches!(
            contraction_and_budget(800, 2, 0.005, 1.0, 400.0),
            Err(SbmError::Regime { ratio }) if (ratio - 0.5).abs() < 1e-12
        ));
    }

    #[test]
    fn chernoff_single_point() {
        assert!(chernoff_identity_check(0.3, 0.1).unwrap() <= 1e-12);
        assert!(chernoff_identity_check(0.1, 0.3).is_err());
    }

    #[test]
    fn report_for_desk_regime() {
        let report = RateReport::new(400, 0.1, 0.02, &[200, 200], 1.0).unwrap();
        assert_abs_diff_eq!(400.0 * report.i, 13.009_276_682_224_011, epsilon = 1e-10);
        assert_eq!(report.nbar_min, 200.0);
        assert_eq!(report.rho, 1.0);
        assert_abs_diff_eq!(report.contraction.unwrap(), 0.784_184_796_866_190_6, epsilon = 1e-12);
        assert_abs_diff_eq!(report.iteration_budget.unwrap(), 13.377_941_932_770_4, epsilon = 1e-9);
    }
}
