use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbmError};
use crate::numerics::BetaParams;
use crate::rng::rng_from_seed;

/// Rows of a [`SoftAssignment`] must sum to one within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A one-hot membership matrix, stored through its label vector.
///
/// Labels are 0-based; `labels[i] = a` encodes row `i` equal to `e_a`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HardAssignment {
    k: usize,
    labels: Vec<usize>,
}

impl HardAssignment {
    /// Inverse of [`HardAssignment::labels`].
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(SbmError::Input("community count k must be at least 1".into()));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(SbmError::Input(format!("label {l} of node {i} is outside 0..{k}")));
        }
        Ok(HardAssignment { k, labels })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Entry (i, a) of the one-hot matrix.
    pub fn get(&self, i: usize, a: usize) -> f64 {
        if self.labels[i] == a {
            1.0
        } else {
            0.0
        }
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// min over a ≠ b of (n_a + n_b) / 2; `None` when k < 2.
    pub fn nbar_min(&self) -> Option<f64> {
        nbar_min_of(&self.community_sizes())
    }

    /// Embedding of Π₀ into Π₁.
    pub fn to_soft(&self) -> SoftAssignment {
        let mut values = vec![0.0; self.n() * self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            values[i * self.k + l] = 1.0;
        }
        SoftAssignment { n: self.n(), k: self.k, values }
    }

    /// Relabel so that old community `a` becomes `perm[a]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.k)?;
        Ok(HardAssignment {
            k: self.k,
            labels: self.labels.iter().map(|&l| perm[l]).collect(),
        })
    }
}

pub(crate) fn nbar_min_of(sizes: &[usize]) -> Option<f64> {
    if sizes.len() < 2 {
        return None;
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    Some((sorted[0] + sorted[1]) as f64 / 2.0)
}

fn check_permutation(perm: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    if perm.len() != k || !perm.iter().all(|&p| p < k && !std::mem::replace(&mut seen[p], true)) {
        return Err(SbmError::Input(format!("{perm:?} is not a permutation of 0..{k}")));
    }
    Ok(())
}

/// Draw an assignment with prescribed community sizes, node order shuffled by
/// `seed`. Also returns n̄_min.
pub fn sample_assignment(n: usize, k: usize, sizes: &[usize], seed: u64) -> Result<(HardAssignment, f64)> {
    if k < 2 {
        return Err(SbmError::Input(format!("need k >= 2 communities, got {k}")));
    }
    if sizes.len() != k {
        return Err(SbmError::Input(format!("expected {k} community sizes, got {}", sizes.len())));
    }
    if sizes.contains(&0) {
        return Err(SbmError::Input("every community size must be at least 1".into()));
    }
    let total: usize = sizes.iter().sum();
    if total != n {
        return Err(SbmError::Input(format!("community sizes sum to {total}, expected n = {n}")));
    }
    let mut labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(a, &size)| std::iter::repeat_n(a, size))
        .collect();
    labels.shuffle(&mut rng_from_seed(seed));
    let nbar = nbar_min_of(sizes).expect("k >= 2");
    Ok((HardAssignment { k, labels }, nbar))
}

/// Community sizes as equal as possible, larger ones first.
pub fn balanced_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|a| n / k + usize::from(a < n % k)).collect()
}

/// A row-stochastic n×k matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftAssignment {
    n: usize,
    k: usize,
    values: Vec<f64>,
}

impl SoftAssignment {
    /// Row-major values; every entry in [0, 1], every row summing to one.
    pub fn new(n: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(SbmError::Input("community count k must be at least 1".into()));
        }
        if values.len() != n * k {
            return Err(SbmError::Input(format!(
                "expected {} entries for a {n}x{k} assignment, got {}",
                n * k,
                values.len()
            )));
        }
        for (i, row) in values.chunks_exact(k).enumerate() {
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(SbmError::Input(format!("row {i} has entry {v} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(SbmError::Input(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(SoftAssignment { n, k, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(SbmError::Input("rows have unequal lengths".into()));
        }
        Self::new(rows.len(), k, rows.concat())
    }

    pub fn uniform(n: usize, k: usize) -> Self {
        assert!(k > 0, "k must be positive");
        SoftAssignment { n, k, values: vec![1.0 / k as f64; n * k] }
    }

    pub(crate) fn from_raw(n: usize, k: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n * k);
        SoftAssignment { n, k, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, a: usize) -> f64 {
        self.values[i * self.k + a]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.k)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k];
        for row in self.rows() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Row-wise argmax, ties to the smallest index.
    pub fn harden(&self) -> HardAssignment {
        let labels = self.rows().map(argmax_first).collect();
        HardAssignment { k: self.k, labels }
    }

    /// Move column `a` to position `perm[a]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.k)?;
        let mut values = vec![0.0; self.values.len()];
        for (src, dst) in self.values.chunks_exact(self.k).zip(values.chunks_exact_mut(self.k)) {
            for (a, &v) in src.iter().enumerate() {
                dst[perm[a]] = v;
            }
        }
        Ok(SoftAssignment { n: self.n, k: self.k, values })
    }
}

impl From<&HardAssignment> for SoftAssignment {
    fn from(z: &HardAssignment) -> Self {
        z.to_soft()
    }
}

pub(crate) fn argmax_first(row: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = a;
        }
    }
    best
}

/// Within- and cross-community edge probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub p: f64,
    pub q: f64,
    pub k: usize,
}

impl BlockParams {
    /// Assortative parameters: 0 < q < p < 1 and k >= 2.
    pub fn new(p: f64, q: f64, k: usize) -> Result<Self> {
        if !(0.0 < q && q < p && p < 1.0) {
            return Err(SbmError::Domain(format!("need 0 < q < p < 1, got p = {p}, q = {q}")));
        }
        if k < 2 {
            return Err(SbmError::Domain(format!("need k >= 2, got {k}")));
        }
        Ok(BlockParams { p, q, k })
    }

    /// Any probabilities in [0, 1], including the degenerate p = 1, q = 0
    /// graphs used in tests. Only for generation; inference needs [`Self::new`].
    pub fn for_sampling(p: f64, q: f64, k: usize) -> Result<Self> {
        if !((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q)) {
            return Err(SbmError::Domain(format!("probabilities must lie in [0, 1], got p = {p}, q = {q}")));
        }
        if k == 0 {
            return Err(SbmError::Domain("k must be positive".into()));
        }
        Ok(BlockParams { p, q, k })
    }
}

/// Hyperparameters of the prior: per-node categorical weights and the two
/// Beta priors on p and q.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    pi_pri: SoftAssignment,
    p_prior: BetaParams,
    q_prior: BetaParams,
}

impl PriorConfig {
    pub fn new(pi_pri: SoftAssignment, p_prior: BetaParams, q_prior: BetaParams) -> Result<Self> {
        if let Some(pos) = pi_pri.as_slice().iter().position(|&v| v <= 0.0) {
            return Err(SbmError::Input(format!(
                "prior weights must be strictly positive; node {} community {} is {}",
                pos / pi_pri.k(),
                pos % pi_pri.k(),
                pi_pri.as_slice()[pos]
            )));
        }
        Ok(PriorConfig { pi_pri, p_prior, q_prior })
    }

    /// Uniform categorical prior and Beta(1, 1) on both p and q.
    pub fn uniform(n: usize, k: usize) -> Self {
        let unit = BetaParams::new(1.0, 1.0).expect("valid");
        PriorConfig { pi_pri: SoftAssignment::uniform(n, k), p_prior: unit, q_prior: unit }
    }

    /// The same categorical weights for every node (normalized here).
    pub fn with_weights(n: usize, weights: &[f64], p_prior: BetaParams, q_prior: BetaParams) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || !total.is_finite() || total <= 0.0 {
            return Err(SbmError::Input("prior weights must be a non-empty positive vector".into()));
        }
        let row: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let k = row.len();
        let values = row.iter().copied().cycle().take(n * k).collect();
        Self::new(SoftAssignment::from_raw(n, k, values), p_prior, q_prior)
    }

    pub fn pi_pri(&self) -> &SoftAssignment {
        &self.pi_pri
    }

    pub fn p_prior(&self) -> BetaParams {
        self.p_prior
    }

    pub fn q_prior(&self) -> BetaParams {
        self.q_prior
    }

    pub fn n(&self) -> usize {
        self.pi_pri.n()
    }

    pub fn k(&self) -> usize {
        self.pi_pri.k()
    }

    /// w = max_i max_{a,b} π^pri_{i,a} / π^pri_{i,b}.
    pub fn w(&self) -> f64 {
        self.pi_pri
            .rows()
            .map(|row| {
                let max = row.iter().copied().fold(f64::MIN, f64::max);
                let min = row.iter().copied().fold(f64::MAX, f64::min);
                max / min
            })
            .fold(1.0, f64::max)
    }

    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        Ok(PriorConfig {
            pi_pri: self.pi_pri.permute_columns(perm)?,
            p_prior: self.p_prior,
            q_prior: self.q_prior,
        })
    }
}

/// Read access to a membership matrix, hard or soft.
pub trait Membership: Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn weight(&self, i: usize, a: usize) -> f64;
    /// acc[a] += weight(i, a) for all a.
    fn add_row(&self, i: usize, acc: &mut [f64]);
    fn column_sums(&self) -> Vec<f64>;
    /// Σ_a weight(i, a) · weight(j, a).
    fn row_dot(&self, i: usize, j: usize) -> f64;
}

impl Membership for SoftAssignment {
    fn n(&self) -> usize {
        self.n
    }
    fn k(&self) -> usize {
        self.k
    }
    fn weight(&self, i: usize, a: usize) -> f64 {
        self.get(i, a)
    }
    fn add_row(&self, i: usize, acc: &mut [f64]) {
        for (s, v) in acc.iter_mut().zip(self.row(i)) {
            *s += v;
        }
    }
    fn column_sums(&self) -> Vec<f64> {
        SoftAssignment::column_sums(self)
    }
    fn row_dot(&self, i: usize, j: usize) -> f64 {
        self.row(i).iter().zip(self.row(j)).map(|(x, y)| x * y).sum()
    }
}

impl Membership for HardAssignment {
    fn n(&self) -> usize {
        self.labels.len()
    }
    fn k(&self) -> usize {
        self.k
    }
    fn weight(&self, i: usize, a: usize) -> f64 {
        self.get(i, a)
    }
    fn add_row(&self, i: usize, acc: &mut [f64]) {
        acc[self.labels[i]] += 1.0;
    }
    fn column_sums(&self) -> Vec<f64> {
        self.community_sizes().into_iter().map(|s| s as f64).collect()
    }
    fn row_dot(&self, i: usize, j: usize) -> f64 {
        if self.labels[i] == self.labels[j] {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sample_assignment_examples() {
        let (z, nbar) = sample_assignment(4, 2, &[2, 2], 0).unwrap();
        assert_eq!(z.community_sizes(), vec![2, 2]);
        assert_eq!(nbar, 2.0);

        let (z, nbar) = sample_assignment(3, 3, &[1, 1, 1], 7).unwrap();
        let mut labels = z.labels().to_vec();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2]);
        assert_eq!(nbar, 1.0);

        assert!(matches!(sample_assignment(5, 2, &[2, 2], 1), Err(SbmError::Input(_))));
        assert!(sample_assignment(2, 2, &[2, 0], 1).is_err());
        assert!(sample_assignment(2, 1, &[2], 1).is_err());
    }

    #[test]
    fn sample_assignment_is_seeded() {
        let a = sample_assignment(50, 3, &[10, 20, 20], 11).unwrap().0;
        let b = sample_assignment(50, 3, &[10, 20, 20], 11).unwrap().0;
        let c = sample_assignment(50, 3, &[10, 20, 20], 12).unwrap().0;
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn nbar_min_uses_two_smallest() {
        let z = HardAssignment::from_labels(vec![0, 0, 0, 0, 1, 1, 2], 3).unwrap();
        assert_eq!(z.nbar_min(), Some(1.5));
    }

    #[test]
    fn labels_round_trip_examples() {
        let z = HardAssignment::from_labels(vec![0, 1], 2).unwrap();
        assert_eq!(z.to_soft().as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        let z = HardAssignment::from_labels(vec![1, 1, 0], 2).unwrap();
        assert_eq!(z.to_soft().as_slice(), &[0.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
        assert!(HardAssignment::from_labels(vec![0, 2], 2).is_err());
    }

    #[test]
    fn harden_examples() {
        let pi = SoftAssignment::from_rows(&[vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap();
        assert_eq!(pi.harden().labels(), &[1, 0]);
    }

    #[test]
    fn soft_assignment_validation() {
        assert!(SoftAssignment::from_rows(&[vec![0.5, 0.6]]).is_err());
        assert!(SoftAssignment::from_rows(&[vec![1.5, -0.5]]).is_err());
        assert!(SoftAssignment::new(2, 2, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn prior_w_and_positivity() {
        let unit = BetaParams::new(1.0, 1.0).unwrap();
        let prior = PriorConfig::with_weights(3, &[1.0, 3.0], unit, unit).unwrap();
        assert!((prior.w() - 3.0).abs() < 1e-12);
        assert_eq!(PriorConfig::uniform(4, 3).w(), 1.0);
        let zero = SoftAssignment::from_rows(&[vec![1.0, 0.0]]).unwrap();
        assert!(PriorConfig::new(zero, unit, unit).is_err());
    }

    #[test]
    fn block_params_validation() {
        assert!(BlockParams::new(0.3, 0.1, 2).is_ok());
        assert!(BlockParams::new(0.1, 0.3, 2).is_err());
        assert!(BlockParams::new(0.3, 0.1, 1).is_err());
        assert!(BlockParams::for_sampling(1.0, 0.0, 2).is_ok());
        assert!(BlockParams::for_sampling(1.2, 0.0, 2).is_err());
    }

    proptest! {
        #[test]
        fn label_round_trip(labels in proptest::collection::vec(0usize..5, 1..100)) {
            let z = HardAssignment::from_labels(labels.clone(), 5).unwrap();
            let back = z.to_soft().harden();
            prop_assert_eq!(back.labels(), &labels[..]);
            prop_assert_eq!(back, z);
        }

        #[test]
        fn relabel_round_trip(labels in proptest::collection::vec(0usize..4, 1..40)) {
            let z = HardAssignment::from_labels(labels, 4).unwrap();
            let perm = [2, 0, 3, 1];
            let inverse = [1, 3, 0, 2];
            prop_assert_eq!(z.relabel(&perm).unwrap().relabel(&inverse).unwrap(), z);
        }
    }
}
