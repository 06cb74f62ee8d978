//! Per-iteration records shared by every fitting algorithm.

use std::io::{self, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// One iteration of a fitting algorithm. Record 0 describes the initializer.
///
/// Fields an algorithm does not produce are `None` (serialized as `null`).
/// `elapsed` is wall-clock time and is never serialized, so trace files are
/// reproducible byte for byte.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// ℓ₁ loss of the (soft) iterate against the truth.
    pub loss: Option<f64>,
    /// Misclustered nodes after hardening the iterate.
    pub misclustered: Option<usize>,
    /// ℓ₁ loss of the sampled hard iterate (Gibbs only).
    pub sample_loss: Option<f64>,
    pub elbo: Option<f64>,
    pub t: Option<f64>,
    pub lambda: Option<f64>,
    /// Posterior mean, draw or point estimate of p, depending on the algorithm.
    pub p_estimate: Option<f64>,
    pub q_estimate: Option<f64>,
    /// Set when t < 0, i.e. the current fit looks disassortative.
    pub anti_assortative: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

// Equality ignores `elapsed`.
impl PartialEq for IterationRecord {
    fn eq(&self, other: &Self) -> bool {
        self.iteration == other.iteration
            && self.loss == other.loss
            && self.misclustered == other.misclustered
            && self.sample_loss == other.sample_loss
            && self.elbo == other.elbo
            && self.t == other.t
            && self.lambda == other.lambda
            && self.p_estimate == other.p_estimate
            && self.q_estimate == other.q_estimate
            && self.anti_assortative == other.anti_assortative
    }
}

impl IterationRecord {
    pub fn new(iteration: usize) -> Self {
        IterationRecord { iteration, ..Default::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; its index must continue the sequence.
    pub fn push(&mut self, record: IterationRecord) {
        assert_eq!(record.iteration, self.records.len(), "iteration indices must be consecutive from 0");
        self.records.push(record);
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn total_elapsed(&self) -> Duration {
        self.records.iter().map(|r| r.elapsed).sum()
    }

    /// First iteration from which every later iterate has zero misclustered
    /// nodes; `None` if the final iterate is not exact or no truth was given.
    pub fn iterations_to_exact_recovery(&self) -> Option<usize> {
        let mut first = None;
        for r in &self.records {
            match r.misclustered {
                Some(0) => first = first.or(Some(r.iteration)),
                _ => first = None,
            }
        }
        first
    }

    /// Losses ℓ(π^(s), Z*) in iteration order, if the truth was supplied.
    pub fn losses(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.loss).collect()
    }

    /// Newline-delimited JSON, one record per line, optionally tagged with a
    /// replication index.
    pub fn write_ndjson<W: Write>(&self, out: &mut W, replication: Option<usize>) -> io::Result<()> {
        #[derive(Serialize)]
        struct Tagged<'a> {
            #[serde(skip_serializing_if = "Option::is_none")]
            replication: Option<usize>,
            #[serde(flatten)]
            record: &'a IterationRecord,
        }
        for record in &self.records {
            serde_json::to_writer(&mut *out, &Tagged { replication, record })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_misclustered(values: &[Option<usize>]) -> IterationTrace {
        let mut trace = IterationTrace::new();
        for (s, &m) in values.iter().enumerate() {
            trace.push(IterationRecord { misclustered: m, ..IterationRecord::new(s) });
        }
        trace
    }

    #[test]
    fn recovery_index_requires_staying_exact() {
        assert_eq!(with_misclustered(&[Some(5), Some(0), Some(0)]).iterations_to_exact_recovery(), Some(1));
        assert_eq!(with_misclustered(&[Some(0), Some(1), Some(0)]).iterations_to_exact_recovery(), Some(2));
        assert_eq!(with_misclustered(&[Some(0), Some(1)]).iterations_to_exact_recovery(), None);
        assert_eq!(with_misclustered(&[None, None]).iterations_to_exact_recovery(), None);
    }

    #[test]
    #[should_panic]
    fn rejects_gaps() {
        let mut trace = IterationTrace::new();
        trace.push(IterationRecord::new(1));
    }

    #[test]
    fn ndjson_omits_elapsed() {
        let mut trace = IterationTrace::new();
        trace.push(IterationRecord {
            loss: Some(2.0),
            elapsed: Duration::from_millis(3),
            ..IterationRecord::new(0)
        });
        let mut buf = Vec::new();
        trace.write_ndjson(&mut buf, Some(4)).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.starts_with("{\"replication\":4,\"iteration\":0,\"loss\":2.0"));
        assert!(!line.contains("elapsed"));
        assert!(line.ends_with("}\n"));
    }
}
