use rand::Rng;

use super::{AdjacencyMatrix, BlockParams, HardAssignment};
use crate::error::{Result, SbmError};
use crate::rng::rng_from_seed;

/// Draw a graph from the SBM: each pair i < j, visited in row-major order,
/// gets an edge with probability p if `z_i = z_j` and q otherwise.
pub fn sample_sbm(params: &BlockParams, assignment: &HardAssignment, seed: u64) -> Result<AdjacencyMatrix> {
    if assignment.k() != params.k {
        return Err(SbmError::Input(format!(
            "assignment has k = {} but block parameters have k = {}",
            assignment.k(),
            params.k
        )));
    }
    let n = assignment.n();
    let labels = assignment.labels();
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let prob = if labels[i] == labels[j] { params.p } else { params.q };
            if rng.random::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    AdjacencyMatrix::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{balanced_sizes, sample_assignment};

    fn assert_valid(a: &AdjacencyMatrix) {
        for i in 0..a.n() {
            assert!(!a.has_edge(i, i));
            for j in a.neighbors(i) {
                assert!(a.has_edge(j, i));
            }
        }
    }

    #[test]
    fn degenerate_probabilities() {
        let (z, _) = sample_assignment(30, 3, &[10, 10, 10], 4).unwrap();
        let full = sample_sbm(&BlockParams::for_sampling(1.0, 0.0, 3).unwrap(), &z, 1).unwrap();
        assert_valid(&full);
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(full.has_edge(i, j), i != j && z.label(i) == z.label(j));
            }
        }
        let none = sample_sbm(&BlockParams::for_sampling(0.0, 0.0, 3).unwrap(), &z, 1).unwrap();
        assert_eq!(none.edge_count(), 0);
    }

    #[test]
    fn k_mismatch_is_input_error() {
        let (z, _) = sample_assignment(4, 2, &[2, 2], 0).unwrap();
        let params = BlockParams::new(0.5, 0.1, 3).unwrap();
        assert!(matches!(sample_sbm(&params, &z, 0), Err(SbmError::Input(_))));
    }

    #[test]
    fn seeded_determinism() {
        let (z, _) = sample_assignment(80, 2, &[40, 40], 3).unwrap();
        let params = BlockParams::new(0.3, 0.05, 2).unwrap();
        let a = sample_sbm(&params, &z, 5).unwrap();
        let b = sample_sbm(&params, &z, 5).unwrap();
        let c = sample_sbm(&params, &z, 6).unwrap();
        assert_valid(&a);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn within_block_density_concentrates() {
        let n = 1000;
        let (z, _) = sample_assignment(n, 2, &balanced_sizes(n, 2), 21).unwrap();
        let params = BlockParams::new(0.3, 0.05, 2).unwrap();
        let a = sample_sbm(&params, &z, 22).unwrap();
        let within_edges = a.edges().filter(|&(i, j)| z.label(i) == z.label(j)).count() as f64;
        let within_pairs = 2.0 * (500.0 * 499.0 / 2.0);
        let cross_edges = a.edge_count() as f64 - within_edges;
        let cross_pairs = 500.0 * 500.0;
        for (edges, pairs, prob) in [(within_edges, within_pairs, 0.3f64), (cross_edges, cross_pairs, 0.05)] {
            let sigma = (prob * (1.0 - prob) / pairs).sqrt();
            assert!((edges / pairs - prob).abs() < 3.0 * sigma);
        }
    }
}
