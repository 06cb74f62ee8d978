use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Result, SbmError};
use crate::model::AdjacencyMatrix;
use crate::rng::SbmRng;

/// Graphs with fewer nodes than this use the dense symmetric solver.
pub const DENSE_EIGEN_LIMIT: usize = 2000;
pub const RESIDUAL_TOL: f64 = 1e-8;
const MAX_SUBSPACE_ITERATIONS: usize = 20_000;

/// The `k` eigenpairs of largest |eigenvalue|, as (values, n×k vectors).
pub fn leading_eigenpairs(a: &AdjacencyMatrix, k: usize, rng: &mut SbmRng) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if a.n() < DENSE_EIGEN_LIMIT {
        Ok(dense_leading(a, k))
    } else {
        subspace_leading(a, k, rng)
    }
}

// Indices sorted by decreasing |value|, ties by index.
fn order_by_magnitude(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[y].abs().total_cmp(&values[x].abs()).then(x.cmp(&y)));
    order
}

fn dense_leading(a: &AdjacencyMatrix, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.n();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, j) in a.edges() {
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
    }
    let eig = SymmetricEigen::new(m);
    let order = order_by_magnitude(eig.eigenvalues.as_slice());
    let values = order[..k].iter().map(|&c| eig.eigenvalues[c]).collect();
    let vectors = DMatrix::from_fn(n, k, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn apply(a: &AdjacencyMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut y = DMatrix::<f64>::zeros(x.nrows(), x.ncols());
    let mut out = vec![0.0; x.nrows()];
    for c in 0..x.ncols() {
        a.mul_vec(x.column(c).as_slice(), &mut out);
        y.column_mut(c).copy_from_slice(&out);
    }
    y
}

/// Block subspace iteration with Rayleigh–Ritz extraction. Converges to the
/// dominant |eigenvalue| subspace; stops when every wanted Ritz pair has
/// residual ‖Ax − θx‖ ≤ 1e-8.
fn subspace_leading(a: &AdjacencyMatrix, k: usize, rng: &mut SbmRng) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.n();
    let block = (2 * k).max(k + 8).min(n);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.random::<f64>() - 0.5).qr().q();
    let mut worst = f64::INFINITY;
    for iteration in 1..=MAX_SUBSPACE_ITERATIONS {
        let ax = apply(a, &x);
        if iteration % 10 == 0 {
            let h = x.transpose() * &ax;
            let h = (&h + h.transpose()) * 0.5;
            let eig = SymmetricEigen::new(h);
            let order = order_by_magnitude(eig.eigenvalues.as_slice());
            let rotation = DMatrix::from_fn(block, block, |r, c| eig.eigenvectors[(r, order[c])]);
            let values: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
            x = &x * &rotation;
            let ax_rot = &ax * &rotation;
            worst = (0..k)
                .map(|c| (ax_rot.column(c) - x.column(c) * values[c]).norm())
                .fold(0.0, f64::max);
            if worst <= RESIDUAL_TOL {
                let vectors = x.columns(0, k).into_owned();
                return Ok((values[..k].to_vec(), vectors));
            }
            x = (ax_rot).qr().q();
        } else {
            x = ax.qr().q();
        }
    }
    Err(SbmError::Numerical(format!(
        "subspace iteration did not converge: worst residual {worst:e} after {MAX_SUBSPACE_ITERATIONS} iterations (n = {n}, k = {k}, block = {block})"
    )))
}
