use std::fmt;

use thiserror::Error;

/// A single failed check in an experiment configuration, addressed by its
/// dotted field path (e.g. `init.fraction`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum SbmError {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("KL divergence is infinite: reference has zero mass at index {index} where the argument has mass")]
    InfiniteDivergence { index: usize },

    #[error("degenerate separation: t = 0 so lambda is undefined{}", fmt_iteration(*.iteration))]
    DegenerateSeparation { iteration: Option<usize> },

    #[error("degenerate partition: community {community} is empty at iteration {iteration}")]
    DegeneratePartition { community: usize, iteration: usize },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("regime violated: nI/[wk(n/nbar_min)^2] = {ratio} must exceed 1")]
    Regime { ratio: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {}", fmt_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SbmError {
    /// Attach an iteration index to a separation failure raised inside a loop.
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        match self {
            SbmError::DegenerateSeparation { iteration: None } => SbmError::DegenerateSeparation {
                iteration: Some(iteration),
            },
            other => other,
        }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SbmError::Input(_) | SbmError::Domain(_) | SbmError::Parse { .. } | SbmError::Config(_)
        )
    }
}

fn fmt_iteration(iteration: Option<usize>) -> String {
    iteration.map(|s| format!(" (iteration {s})")).unwrap_or_default()
}

fn fmt_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, SbmError>;
