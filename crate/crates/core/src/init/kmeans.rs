use rand::Rng;

use crate::rng::SbmRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iterations: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions { restarts: 10, max_iterations: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub inertia: f64,
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds(points: &[Vec<f64>], k: usize, rng: &mut SbmRng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let chosen = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            d2.iter()
                .position(|&d| {
                    acc += d;
                    acc > target
                })
                .unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap_or(n - 1))
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[chosen].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iterations: usize) -> KMeansResult {
    let dim = points.first().map_or(0, Vec::len);
    let k = centers.len();
    let mut labels = vec![usize::MAX; points.len()];
    for _ in 0..max_iterations {
        let mut changed = false;
        for (label, p) in labels.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centers);
            changed |= *label != c;
            *label = c;
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&label, p) in labels.iter().zip(points) {
            counts[label] += 1;
            for (s, x) in sums[label].iter_mut().zip(p) {
                *s += x;
            }
        }
        // An emptied cluster keeps its previous center.
        for ((center, sum), &count) in centers.iter_mut().zip(sums).zip(&counts) {
            if count > 0 {
                *center = sum.into_iter().map(|s| s / count as f64).collect();
            }
        }
    }
    let inertia = labels.iter().zip(points).map(|(&l, p)| sq_dist(p, &centers[l])).sum();
    KMeansResult { labels, inertia }
}

/// k-means++ seeding followed by Lloyd iterations, repeated `restarts` times
/// from one RNG stream; the lowest inertia wins, earliest restart on ties.
pub fn kmeans(points: &[Vec<f64>], k: usize, options: &KMeansOptions, rng: &mut SbmRng) -> KMeansResult {
    assert!(k >= 1 && k <= points.len(), "need 1 <= k <= number of points");
    let mut best: Option<KMeansResult> = None;
    for _ in 0..options.restarts.max(1) {
        let seeds = plus_plus_seeds(points, k, rng);
        let result = lloyd(points, seeds, options.max_iterations);
        if best.as_ref().is_none_or(|b| result.inertia < b.inertia) {
            best = Some(result);
        }
    }
    best.expect("at least one restart")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn separates_obvious_clusters() {
        let mut points = Vec::new();
        for i in 0..20 {
            let jitter = i as f64 * 1e-3;
            points.push(vec![jitter, 0.0]);
            points.push(vec![10.0 + jitter, 10.0]);
        }
        let res = kmeans(&points, 2, &KMeansOptions::default(), &mut rng_from_seed(3));
        for pair in res.labels.chunks(2) {
            assert_ne!(pair[0], pair[1]);
        }
        assert!(res.labels.iter().step_by(2).all(|&l| l == res.labels[0]));
        assert!(res.inertia < 1e-2);
    }

    #[test]
    fn deterministic_given_seed() {
        let points: Vec<Vec<f64>> = (0..50).map(|i| vec![(i * 37 % 11) as f64, (i * 13 % 7) as f64]).collect();
        let a = kmeans(&points, 3, &KMeansOptions::default(), &mut rng_from_seed(8));
        let b = kmeans(&points, 3, &KMeansOptions::default(), &mut rng_from_seed(8));
        assert_eq!(a, b);
    }

    #[test]
    fn identical_points() {
        let points = vec![vec![1.0, 1.0]; 5];
        let res = kmeans(&points, 2, &KMeansOptions::default(), &mut rng_from_seed(1));
        assert_eq!(res.inertia, 0.0);
    }
}
