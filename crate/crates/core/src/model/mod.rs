//! Core SBM data types and seeded generation.

mod adjacency;
mod assignment;
mod generate;

pub use adjacency::{AdjacencyMatrix, Layout, Neighbors, DENSE_LIMIT};
pub(crate) use assignment::nbar_min_of;
pub use assignment::{
    balanced_sizes, sample_assignment, BlockParams, HardAssignment, Membership, PriorConfig, SoftAssignment,
    ROW_SUM_TOL,
};
pub use generate::sample_sbm;

/// Labels of a hard assignment (the bijection r⁻¹), 0-based.
pub fn labels_from_assignment(z: &HardAssignment) -> Vec<usize> {
    z.labels().to_vec()
}

pub fn assignment_from_labels(labels: Vec<usize>, k: usize) -> crate::Result<HardAssignment> {
    HardAssignment::from_labels(labels, k)
}

/// Row-wise argmax of a soft assignment, ties to the smallest index.
pub fn harden(pi: &SoftAssignment) -> HardAssignment {
    pi.harden()
}
