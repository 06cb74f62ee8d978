//! Initializers: adjacency spectral clustering and controlled corruption of
//! a known truth.

mod eigen;
mod kmeans;

pub use eigen::{leading_eigenpairs, DENSE_EIGEN_LIMIT, RESIDUAL_TOL};
pub use kmeans::{kmeans, KMeansOptions, KMeansResult};

use rand::seq::index;
use rand::Rng;

use crate::error::{Result, SbmError};
use crate::model::{AdjacencyMatrix, HardAssignment, SoftAssignment};
use crate::rng::rng_from_seed;

/// Spectral clustering on the unnormalized adjacency matrix: embed nodes by
/// the `k` eigenvectors of largest |eigenvalue|, then run seeded k-means++
/// (10 restarts, at most 100 Lloyd iterations each) on the rows.
pub fn spectral_init(a: &AdjacencyMatrix, k: usize, seed: u64) -> Result<HardAssignment> {
    let n = a.n();
    if k == 0 || n < k {
        return Err(SbmError::Input(format!("spectral initialization needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if k == 1 {
        return HardAssignment::from_labels(vec![0; n], 1);
    }
    let mut rng = rng_from_seed(seed);
    let (_, vectors) = leading_eigenpairs(a, k, &mut rng)?;
    let points: Vec<Vec<f64>> = (0..n).map(|i| vectors.row(i).iter().copied().collect()).collect();
    let result = kmeans(&points, k, &KMeansOptions::default(), &mut rng);
    HardAssignment::from_labels(result.labels, k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corruption {
    pub pi: SoftAssignment,
    /// Number of nodes moved, ⌊fraction · n⌋.
    pub flipped: usize,
    /// 2 · flipped, the ℓ₁ distance to the truth before any relabelling.
    pub initial_loss: f64,
}

/// Moves ⌊fraction · n⌋ uniformly chosen nodes to uniformly chosen wrong
/// communities.
pub fn corrupt_truth(z_star: &HardAssignment, fraction: f64, seed: u64) -> Result<Corruption> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(SbmError::Input(format!("corruption fraction must lie in [0, 1), got {fraction}")));
    }
    let n = z_star.n();
    let k = z_star.k();
    let flipped = (fraction * n as f64).floor() as usize;
    if flipped > 0 && k < 2 {
        return Err(SbmError::Input("cannot corrupt an assignment with a single community".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut labels = z_star.labels().to_vec();
    for node in index::sample(&mut rng, n, flipped) {
        let draw = rng.random_range(0..k - 1);
        let original = labels[node];
        labels[node] = if draw >= original { draw + 1 } else { draw };
    }
    let z = HardAssignment::from_labels(labels, k)?;
    Ok(Corruption { pi: z.to_soft(), flipped, initial_loss: 2.0 * flipped as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{l1_loss, misclustered_count};
    use crate::model::{sample_assignment, sample_sbm, BlockParams};

    #[test]
    fn spectral_exact_on_disjoint_cliques() {
        let (z, _) = sample_assignment(40, 2, &[20, 20], 5).unwrap();
        let a = sample_sbm(&BlockParams::for_sampling(1.0, 0.0, 2).unwrap(), &z, 6).unwrap();
        let est = spectral_init(&a, 2, 7).unwrap();
        assert_eq!(misclustered_count(&est, &z).unwrap(), 0);
    }

    #[test]
    fn single_community() {
        let a = AdjacencyMatrix::from_edges(5, [(0, 1)]).unwrap();
        assert_eq!(spectral_init(&a, 1, 0).unwrap().labels(), &[0; 5]);
        assert!(spectral_init(&a, 6, 0).is_err());
    }

    #[test]
    fn corruption_counts() {
        let (z, _) = sample_assignment(100, 2, &[50, 50], 1).unwrap();
        let none = corrupt_truth(&z, 0.0, 3).unwrap();
        assert_eq!(none.pi, z.to_soft());
        assert_eq!(l1_loss(&none.pi, &z).unwrap().loss, 0.0);

        let some = corrupt_truth(&z, 0.1, 3).unwrap();
        assert_eq!(some.flipped, 10);
        assert_eq!(some.initial_loss, 20.0);
        assert_eq!(misclustered_count(&some.pi.harden(), &z).unwrap(), 10);
        assert_eq!(some, corrupt_truth(&z, 0.1, 3).unwrap());
        assert!(corrupt_truth(&z, 1.0, 3).is_err());
    }

    #[test]
    fn corruption_always_moves_to_a_wrong_community() {
        let (z, _) = sample_assignment(60, 4, &[15, 15, 15, 15], 2).unwrap();
        let c = corrupt_truth(&z, 0.5, 9).unwrap();
        let moved = c.pi.harden().labels().iter().zip(z.labels()).filter(|(a, b)| a != b).count();
        assert_eq!(moved, 30);
    }
}
