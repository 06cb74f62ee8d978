mod common;

use common::{instance, random_graph, random_hard};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbm_core::gibbs::{gibbs, GibbsOptions};
use sbm_core::init::{corrupt_truth, spectral_init};
use sbm_core::loss::misclustered_count;
use sbm_core::mle::{h_prime, iterative_mle, MleOptions};
use sbm_core::model::PriorConfig;
use sbm_core::variational::h_update;

#[test]
fn mle_recovers_separated_graphs_in_two_iterations() {
    for seed in 0..10 {
        let (truth, a) = instance(60, 2, 1.0, 0.0, 500 + seed);
        let z0 = corrupt_truth(&truth, 0.1, seed).unwrap().pi.harden();
        let out = iterative_mle(&a, &z0, &MleOptions::new(4), Some(&truth)).unwrap();
        assert!(out.trace.iterations_to_exact_recovery().unwrap() <= 2, "seed {seed}");
        let guard = 1.0 / 3600.0;
        assert_eq!((out.p_hat, out.q_hat), (1.0 - guard, guard));
    }
}

#[test]
fn mle_from_truth_stays_exact() {
    let stable = (0..100)
        .filter(|&seed| {
            let (truth, a) = instance(400, 2, 0.1, 0.02, 700 + seed);
            let out = iterative_mle(&a, &truth, &MleOptions::new(6), Some(&truth)).unwrap();
            out.trace.records().iter().all(|r| r.misclustered == Some(0))
        })
        .count();
    assert!(stable >= 95, "{stable}/100");
}

#[test]
fn h_prime_is_the_hardened_soft_update() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let n = rng.random_range(2..40);
        let k = rng.random_range(1..5);
        let a = random_graph(n, rng.random_range(0.05..0.6), &mut rng);
        let z = random_hard(n, k, &mut rng);
        let t = rng.random_range(0.05..3.0);
        let lambda = rng.random_range(-0.5..1.5);
        let soft = h_update(&z, t, lambda, &PriorConfig::uniform(n, k), &a).unwrap();
        assert_eq!(h_prime(&z, lambda, &a).unwrap(), soft.harden());
    }
}

#[test]
fn spectral_recovers_block_structure() {
    for seed in 0..5 {
        let (truth, a) = instance(40, 2, 1.0, 0.0, 900 + seed);
        let z = spectral_init(&a, 2, seed).unwrap();
        assert_eq!(misclustered_count(&z, &truth).unwrap(), 0);
    }
}

#[test]
fn gibbs_stays_at_truth_under_perfect_separation() {
    let (truth, a) = instance(60, 2, 1.0, 0.0, 3);
    let out = gibbs(&a, &PriorConfig::uniform(60, 2), &truth, &GibbsOptions { iterations: 5, seed: 1 }, Some(&truth))
        .unwrap();
    assert!(out.chain.iter().all(|s| misclustered_count(&s.z, &truth).unwrap() == 0));
}
