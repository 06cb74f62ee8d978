#![allow(dead_code)]

use rand::Rng;
use sbm_core::model::{balanced_sizes, sample_assignment, sample_sbm, AdjacencyMatrix, BlockParams, HardAssignment, SoftAssignment};

pub fn instance(n: usize, k: usize, p: f64, q: f64, seed: u64) -> (HardAssignment, AdjacencyMatrix) {
    let (truth, _) = sample_assignment(n, k, &balanced_sizes(n, k), seed).unwrap();
    let graph = sample_sbm(&BlockParams::for_sampling(p, q, k).unwrap(), &truth, seed ^ 0x5bd1_e995).unwrap();
    (truth, graph)
}

pub fn random_soft<R: Rng>(n: usize, k: usize, rng: &mut R) -> SoftAssignment {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / total).collect()
        })
        .collect();
    SoftAssignment::from_rows(&rows).unwrap()
}

pub fn random_hard<R: Rng>(n: usize, k: usize, rng: &mut R) -> HardAssignment {
    HardAssignment::from_labels((0..n).map(|_| rng.random_range(0..k)).collect(), k).unwrap()
}

pub fn random_graph<R: Rng>(n: usize, density: f64, rng: &mut R) -> AdjacencyMatrix {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                edges.push((i, j));
            }
        }
    }
    AdjacencyMatrix::from_edges(n, edges).unwrap()
}
