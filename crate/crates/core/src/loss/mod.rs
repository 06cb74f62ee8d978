//! Label-invariant ℓ₁ loss between assignments.
//!
//! Both losses minimize over bijections of community labels. The ℓ₁ distance
//! splits into a sum over matched column pairs, so the minimum is a linear
//! assignment problem on the k×k matrix of column distances and is solved
//! exactly.

mod hungarian;

pub use hungarian::solve_assignment;

use serde::Serialize;

use crate::error::{Result, SbmError};
use crate::model::{HardAssignment, SoftAssignment};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossResult {
    pub loss: f64,
    /// `bijection[a] = b` pairs column `a` of the estimate with column `b` of
    /// the reference.
    pub bijection: Vec<usize>,
}

fn check_dims(n: usize, k: usize, z_star: &HardAssignment) -> Result<()> {
    if n != z_star.n() || k != z_star.k() {
        return Err(SbmError::Input(format!(
            "dimension mismatch: estimate is {n}x{k}, reference is {}x{}",
            z_star.n(),
            z_star.k()
        )));
    }
    Ok(())
}

/// `cost[a][b] = Σ_i |π_{i,a} − Z*_{i,b}|`, each entry summed over i in order.
pub fn column_cost_matrix(pi: &SoftAssignment, z_star: &HardAssignment) -> Result<Vec<Vec<f64>>> {
    check_dims(pi.n(), pi.k(), z_star)?;
    let k = pi.k();
    let mut cost = vec![vec![0.0; k]; k];
    for (i, row) in pi.rows().enumerate() {
        let truth = z_star.label(i);
        for (a, &value) in row.iter().enumerate() {
            for (b, c) in cost[a].iter_mut().enumerate() {
                *c += if b == truth { 1.0 - value } else { value };
            }
        }
    }
    Ok(cost)
}

/// ℓ(π, Z*) = min over label bijections φ of ‖π − φ∘Z*‖₁.
pub fn l1_loss(pi: &SoftAssignment, z_star: &HardAssignment) -> Result<LossResult> {
    let cost = column_cost_matrix(pi, z_star)?;
    let bijection = solve_assignment(&cost);
    let loss = bijection.iter().enumerate().map(|(a, &b)| cost[a][b]).sum();
    Ok(LossResult { loss, bijection })
}

/// `matrix[a][b]` counts nodes labelled `a` in `z` and `b` in `z_star`.
pub fn confusion_matrix(z: &HardAssignment, z_star: &HardAssignment) -> Result<Vec<Vec<usize>>> {
    check_dims(z.n(), z.k(), z_star)?;
    let mut matrix = vec![vec![0; z.k()]; z.k()];
    for (&a, &b) in z.labels().iter().zip(z_star.labels()) {
        matrix[a][b] += 1;
    }
    Ok(matrix)
}

/// Hamming distance between label vectors after the best relabelling; equals
/// `l1_loss / 2` for hard arguments.
pub fn misclustered_count(z: &HardAssignment, z_star: &HardAssignment) -> Result<usize> {
    let confusion = confusion_matrix(z, z_star)?;
    let cost: Vec<Vec<f64>> = confusion
        .iter()
        .map(|row| row.iter().map(|&c| -(c as f64)).collect())
        .collect();
    let matching = solve_assignment(&cost);
    let agree: usize = matching.iter().enumerate().map(|(a, &b)| confusion[a][b]).sum();
    Ok(z.n() - agree)
}
