//! Special functions and divergences used by the variational updates.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SbmError};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Riemann zeta at 2, 3, ..., 30.
const ZETA: [f64; 29] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_370_0,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308_0,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307_0,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265_0,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_925_9,
    1.000_000_059_608_189_1,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334_0,
    1.000_000_001_862_659_7,
    1.000_000_000_931_327_4,
];

/// Parameters of a Beta distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    alpha: f64,
    beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(SbmError::Domain(format!(
                "Beta parameters must be positive and finite, got ({alpha}, {beta})"
            )));
        }
        Ok(BetaParams { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// E[log X] for X ~ Beta(alpha, beta).
    pub fn expected_ln(&self) -> f64 {
        psi(self.alpha) - psi(self.alpha + self.beta)
    }

    /// E[log(1 - X)] for X ~ Beta(alpha, beta).
    pub fn expected_ln_complement(&self) -> f64 {
        psi(self.beta) - psi(self.alpha + self.beta)
    }
}

/// Digamma function ψ(x) = d/dx log Γ(x), for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SbmError::Domain(format!("digamma requires x > 0, got {x}")));
    }
    Ok(psi(x))
}

/// Natural log of the Gamma function, for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SbmError::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

// Upward recurrence to x >= 6, then the asymptotic series.
pub(crate) fn psi(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 6.0 {
        shift += 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli terms B_2j / (2j x^2j), j = 1..7, Horner in 1/x^2.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    x.ln() - 0.5 * inv - series - shift
}

// log Γ(1 + z) for |z| <= 0.2 by its Taylor series at 1.
fn ln_gamma_1p_small(z: f64) -> f64 {
    let mut acc = 0.0;
    let mut power = -z;
    for (idx, zeta) in ZETA.iter().enumerate() {
        power *= -z;
        acc += zeta * power / (idx + 2) as f64;
    }
    -EULER_GAMMA * z + acc
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    if (x - 1.0).abs() <= 0.2 {
        return ln_gamma_1p_small(x - 1.0);
    }
    if (x - 2.0).abs() <= 0.2 {
        let z = x - 2.0;
        return ln_gamma_1p_small(z) + z.ln_1p();
    }
    let mut y = x;
    let mut ln_prod = 0.0;
    if y < 10.0 {
        let mut prod = 1.0;
        while y < 10.0 {
            prod *= y;
            y += 1.0;
        }
        ln_prod = prod.ln();
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // B_2j / (2j (2j - 1) y^(2j-1)), j = 1..8.
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2
                        * (1.0 / 1260.0
                            - inv2
                                * (1.0 / 1680.0
                                    - inv2
                                        * (1.0 / 1188.0
                                            - inv2
                                                * (691.0 / 360_360.0
                                                    - inv2 * (1.0 / 156.0 - inv2 * 3617.0 / 122_400.0)))))));
    (y - 0.5) * y.ln() - y + HALF_LN_2PI + series - ln_prod
}

fn ln_beta_fn(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// KL(Categorical(p) ‖ Categorical(q)) with the convention 0·log 0 = 0.
pub fn kl_categorical(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(SbmError::Input(format!(
            "kl_categorical length mismatch: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let mut total = 0.0;
    for (index, (&pa, &qa)) in p.iter().zip(q).enumerate() {
        if pa == 0.0 {
            continue;
        }
        if qa == 0.0 {
            return Err(SbmError::InfiniteDivergence { index });
        }
        total += pa * (pa / qa).ln();
    }
    Ok(total.max(0.0))
}

/// Closed-form KL(Beta(a) ‖ Beta(b)).
pub fn kl_beta(a: &BetaParams, b: &BetaParams) -> f64 {
    let sum_a = a.alpha + a.beta;
    let kl = ln_beta_fn(b.alpha, b.beta) - ln_beta_fn(a.alpha, a.beta)
        + (a.alpha - b.alpha) * psi(a.alpha)
        + (a.beta - b.beta) * psi(a.beta)
        + (b.alpha - a.alpha + b.beta - a.beta) * psi(sum_a);
    kl.max(0.0)
}
