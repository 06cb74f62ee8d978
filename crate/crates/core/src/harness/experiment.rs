//! Replicated experiments: sample truth and graph, initialize, fit, score.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Algorithm, ExperimentConfig, InitSpec, PriorSpec};
use super::io::read_labels;
use crate::error::{Result, SbmError};
use crate::gibbs::{gibbs, GibbsOptions};
use crate::init::{corrupt_truth, spectral_init};
use crate::loss::{l1_loss, misclustered_count};
use crate::mle::{iterative_mle, Estimator, MleOptions};
use crate::model::{sample_assignment, sample_sbm, AdjacencyMatrix, BlockParams, HardAssignment, PriorConfig, SoftAssignment};
use crate::numerics::BetaParams;
use crate::rng::{derive_seed, Purpose};
use crate::theory::RateReport;
use crate::trace::IterationTrace;
use crate::variational::{bcavi, cavi_sequential, default_iterations, BcaviOptions, CaviOptions, Variant};

/// Everything needed to fit one graph, independent of how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSpec {
    pub k: usize,
    pub algorithm: Algorithm,
    pub iterations: Option<usize>,
    pub prior: PriorSpec,
    pub init: InitSpec,
    pub estimator: Estimator,
}

impl FitSpec {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        FitSpec {
            k: config.k,
            algorithm: config.algorithm,
            iterations: config.iterations,
            prior: config.prior.clone(),
            init: config.init.clone(),
            estimator: config.mle_estimator,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Final hard labels: the hardened variational iterate, the last Gibbs
    /// draw, or the last MLE assignment.
    pub labels: HardAssignment,
    /// Final soft iterate for the variational algorithms.
    pub soft: Option<SoftAssignment>,
    pub trace: IterationTrace,
}

pub fn build_priors(n: usize, k: usize, spec: &PriorSpec) -> Result<PriorConfig> {
    match spec {
        PriorSpec::Uniform => Ok(PriorConfig::uniform(n, k)),
        PriorSpec::Explicit { alpha_p, beta_p, alpha_q, beta_q, weights } => {
            let p_prior = BetaParams::new(*alpha_p, *beta_p)?;
            let q_prior = BetaParams::new(*alpha_q, *beta_q)?;
            let weights = weights.clone().unwrap_or_else(|| vec![1.0; k]);
            PriorConfig::with_weights(n, &weights, p_prior, q_prior)
        }
    }
}

fn build_init(a: &AdjacencyMatrix, spec: &FitSpec, seed: u64, truth: Option<&HardAssignment>) -> Result<HardAssignment> {
    let init_seed = derive_seed(seed, Purpose::Init);
    let z = match &spec.init {
        InitSpec::Spectral => spectral_init(a, spec.k, init_seed)?,
        InitSpec::Corrupt { fraction } => {
            let truth = truth.ok_or_else(|| SbmError::Input("corrupt initializer needs a ground truth".into()))?;
            corrupt_truth(truth, *fraction, init_seed)?.pi.harden()
        }
        InitSpec::File { path } => read_labels(path, Some(spec.k))?,
    };
    if z.n() != a.n() || z.k() != spec.k {
        return Err(SbmError::Input(format!(
            "initializer has n = {}, k = {}; expected n = {}, k = {}",
            z.n(),
            z.k(),
            a.n(),
            spec.k
        )));
    }
    Ok(z)
}

/// Fits one graph. `seed` drives the initializer and, for Gibbs, the chain;
/// `truth`, when given, is used for corruption and per-iteration scoring.
pub fn fit_graph(a: &AdjacencyMatrix, spec: &FitSpec, seed: u64, truth: Option<&HardAssignment>) -> Result<FitResult> {
    let iterations = spec.iterations.unwrap_or_else(|| default_iterations(a.n()));
    let z0 = build_init(a, spec, seed, truth)?;
    let priors = build_priors(a.n(), spec.k, &spec.prior)?;
    let variational = |variant| -> Result<FitResult> {
        let out = bcavi(a, &priors, &z0.to_soft(), &BcaviOptions::new(iterations, variant), truth)?;
        Ok(FitResult { labels: out.state.pi.harden(), soft: Some(out.state.pi), trace: out.trace })
    };
    match spec.algorithm {
        Algorithm::BcaviDigamma => variational(Variant::Digamma),
        Algorithm::BcaviLog => variational(Variant::Log),
        Algorithm::Cavi => {
            let out = cavi_sequential(a, &priors, &z0.to_soft(), &CaviOptions::new(iterations), truth)?;
            Ok(FitResult { labels: out.state.pi.harden(), soft: Some(out.state.pi), trace: out.trace })
        }
        Algorithm::Gibbs => {
            let options = GibbsOptions { iterations, seed: derive_seed(seed, Purpose::Algorithm) };
            let out = gibbs(a, &priors, &z0, &options, truth)?;
            Ok(FitResult { labels: out.last().z.clone(), soft: None, trace: out.trace })
        }
        Algorithm::Mle => {
            let options = MleOptions { iterations, estimator: spec.estimator };
            let out = iterative_mle(a, &z0, &options, truth)?;
            Ok(FitResult { labels: out.z, soft: None, trace: out.trace })
        }
    }
}

/// Truth and graph for one replication seed.
pub fn sample_instance(config: &ExperimentConfig, seed: u64) -> Result<(HardAssignment, AdjacencyMatrix)> {
    let sizes = config.community_sizes();
    let (truth, _) = sample_assignment(config.n, config.k, &sizes, derive_seed(seed, Purpose::Truth))?;
    let params = BlockParams::for_sampling(config.p, config.q, config.k)?;
    let graph = sample_sbm(&params, &truth, derive_seed(seed, Purpose::Graph))?;
    Ok((truth, graph))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRow {
    pub replication: usize,
    pub seed: u64,
    pub final_loss: Option<f64>,
    pub misclustered: Option<usize>,
    /// `None` means the run never settled at exact recovery.
    pub iterations_to_recovery: Option<usize>,
    pub error: Option<String>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl ReplicationRow {
    pub fn exact_recovery(&self) -> bool {
        self.misclustered == Some(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossAggregate {
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q25: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
}

impl LossAggregate {
    /// Linear-interpolation quantiles; `None` for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quantile = |p: f64| {
            let pos = p * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        };
        Some(LossAggregate {
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            median: quantile(0.5),
            q10: quantile(0.1),
            q25: quantile(0.25),
            q75: quantile(0.75),
            q90: quantile(0.9),
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub algorithm: Algorithm,
    pub replications: usize,
    pub completed: usize,
    pub failed: usize,
    pub exact_recoveries: usize,
    pub final_loss: Option<LossAggregate>,
    pub iterations_to_recovery: Option<LossAggregate>,
    /// Present when p and q lie strictly inside (0, 1).
    pub rate: Option<RateReport>,
    pub rows: Vec<ReplicationRow>,
    #[serde(skip)]
    pub traces: Vec<Option<IterationTrace>>,
}

impl ExperimentSummary {
    fn from_runs(config: &ExperimentConfig, runs: Vec<(ReplicationRow, Option<IterationTrace>)>) -> Self {
        let (rows, traces): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
        let losses: Vec<f64> = rows.iter().filter_map(|r| r.final_loss).collect();
        let recovery: Vec<f64> = rows.iter().filter_map(|r| r.iterations_to_recovery.map(|s| s as f64)).collect();
        let failed = rows.iter().filter(|r| r.error.is_some()).count();
        let w = build_priors(config.n, config.k, &config.prior).map(|p| p.w()).unwrap_or(1.0);
        ExperimentSummary {
            algorithm: config.algorithm,
            replications: rows.len(),
            completed: rows.len() - failed,
            failed,
            exact_recoveries: rows.iter().filter(|r| r.exact_recovery()).count(),
            final_loss: LossAggregate::from_values(&losses),
            iterations_to_recovery: LossAggregate::from_values(&recovery),
            rate: RateReport::new(config.n, config.p, config.q, &config.community_sizes(), w).ok(),
            rows,
            traces,
        }
    }

    pub fn total_runtime(&self) -> Duration {
        self.rows.iter().map(|r| r.runtime).sum()
    }

    /// One line per iteration of every successful replication, in
    /// replication order; failed replications contribute a single error line.
    pub fn write_trace<W: Write>(&self, out: &mut W) -> Result<()> {
        for (row, trace) in self.rows.iter().zip(&self.traces) {
            match (trace, &row.error) {
                (Some(trace), _) => trace.write_ndjson(out, Some(row.replication))?,
                (None, Some(error)) => {
                    let line = serde_json::json!({ "replication": row.replication, "error": error });
                    writeln!(out, "{line}")?;
                }
                (None, None) => {}
            }
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "replication,seed,status,final_loss,misclustered,iterations_to_recovery")?;
        for row in &self.rows {
            let status = if row.error.is_some() { "error" } else { "ok" };
            let loss = row.final_loss.map_or(String::new(), |l| l.to_string());
            let mis = row.misclustered.map_or(String::new(), |m| m.to_string());
            let rec = match (&row.error, row.iterations_to_recovery) {
                (Some(_), _) => String::new(),
                (None, Some(s)) => s.to_string(),
                (None, None) => "inf".to_string(),
            };
            writeln!(out, "{},{},{status},{loss},{mis},{rec}", row.replication, row.seed)?;
        }
        Ok(())
    }

    pub fn write_runtimes_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "replication,runtime_ms")?;
        for row in &self.rows {
            writeln!(out, "{},{:.3}", row.replication, row.runtime.as_secs_f64() * 1e3)?;
        }
        Ok(())
    }

    /// Writes `trace.ndjson`, `summary.csv` and `summary.json`, which depend
    /// only on the configuration, plus `runtimes.csv` with wall-clock timings.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let write = |name: &str, f: &dyn Fn(&mut BufWriter<File>) -> Result<()>| -> Result<()> {
            let mut out = BufWriter::new(File::create(dir.join(name))?);
            f(&mut out)?;
            out.flush()?;
            Ok(())
        };
        write("trace.ndjson", &|out| self.write_trace(out))?;
        write("summary.csv", &|out| self.write_summary_csv(out))?;
        write("summary.json", &|out| {
            serde_json::to_writer_pretty(&mut *out, self).map_err(std::io::Error::from)?;
            writeln!(out)?;
            Ok(())
        })?;
        write("runtimes.csv", &|out| self.write_runtimes_csv(out))
    }
}

fn run_replication(config: &ExperimentConfig, spec: &FitSpec, replication: usize) -> (ReplicationRow, Option<IterationTrace>) {
    let seed = config.seed.wrapping_add(replication as u64);
    let started = Instant::now();
    let result = sample_instance(config, seed).and_then(|(truth, graph)| {
        let fit = fit_graph(&graph, spec, seed, Some(&truth))?;
        let final_loss = match &fit.soft {
            Some(pi) => l1_loss(pi, &truth)?.loss,
            None => l1_loss(&fit.labels.to_soft(), &truth)?.loss,
        };
        let misclustered = misclustered_count(&fit.labels, &truth)?;
        Ok((fit, final_loss, misclustered))
    });
    let mut row = ReplicationRow {
        replication,
        seed,
        final_loss: None,
        misclustered: None,
        iterations_to_recovery: None,
        error: None,
        runtime: Duration::ZERO,
    };
    let trace = match result {
        Ok((fit, loss, misclustered)) => {
            row.final_loss = Some(loss);
            row.misclustered = Some(misclustered);
            row.iterations_to_recovery =
                if misclustered == 0 { fit.trace.iterations_to_exact_recovery() } else { None };
            Some(fit.trace)
        }
        Err(e) => {
            row.error = Some(e.to_string());
            None
        }
    };
    row.runtime = started.elapsed();
    (row, trace)
}

/// Validates `config`, runs every replication on a pool of `threads` workers
/// (`None`: available parallelism) and writes outputs when an output
/// directory is configured. Per-replication failures are recorded, not raised.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentSummary> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| SbmError::Numerical(format!("cannot start worker pool: {e}")))?;
    let spec = FitSpec::from_config(config);
    let runs = pool.install(|| {
        (0..config.replications).into_par_iter().map(|r| run_replication(config, &spec, r)).collect::<Vec<_>>()
    });
    let summary = ExperimentSummary::from_runs(config, runs);
    if let Some(dir) = &config.output.dir {
        summary.write_outputs(dir)?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{OutputSpec, SizesSpec, SizesKeyword};

    fn config(algorithm: Algorithm, p: f64, q: f64) -> ExperimentConfig {
        ExperimentConfig {
            n: 60,
            k: 2,
            p,
            q,
            sizes: SizesSpec::Keyword(SizesKeyword::Balanced),
            prior: PriorSpec::Uniform,
            init: InitSpec::Corrupt { fraction: 0.1 },
            algorithm,
            iterations: None,
            replications: 1,
            seed: 7,
            mle_estimator: Estimator::Proportion,
            output: OutputSpec::default(),
        }
    }

    #[test]
    fn maximal_separation_recovers_quickly() {
        let summary = run_experiment(&config(Algorithm::BcaviLog, 1.0, 0.0), Some(1)).unwrap();
        let row = &summary.rows[0];
        assert!(row.final_loss.unwrap() < 1e-100);
        assert_eq!(row.misclustered, Some(0));
        assert!(row.iterations_to_recovery.unwrap() <= 3);
        assert_eq!(summary.exact_recoveries, 1);
        assert!(summary.rate.is_none());
    }

    #[test]
    fn aggregates_match_rows() {
        let mut c = config(Algorithm::BcaviDigamma, 0.5, 0.1);
        c.replications = 7;
        let summary = run_experiment(&c, Some(2)).unwrap();
        let losses: Vec<f64> = summary.rows.iter().map(|r| r.final_loss.unwrap()).collect();
        let agg = summary.final_loss.as_ref().unwrap();
        assert!((agg.mean - losses.iter().sum::<f64>() / 7.0).abs() < 1e-12);
        assert_eq!(summary.completed, 7);
        assert_eq!(summary.rows.iter().map(|r| r.seed).collect::<Vec<_>>(), (7..14).collect::<Vec<_>>());
        assert!(summary.rate.is_some());
    }

    #[test]
    fn replication_errors_are_recorded() {
        let mut c = config(Algorithm::Mle, 0.5, 0.1);
        c.init = InitSpec::Spectral;
        c.k = 2;
        c.n = 2;
        c.replications = 2;
        let summary = run_experiment(&c, Some(1)).unwrap();
        assert_eq!(summary.rows.len(), 2);
        let mut trace = Vec::new();
        summary.write_trace(&mut trace).unwrap();
        assert!(!trace.is_empty());
    }

    #[test]
    fn quantiles_interpolate() {
        let agg = LossAggregate::from_values(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((agg.median, agg.mean, agg.max), (2.5, 2.5, 4.0));
        assert!((agg.q25 - 1.75).abs() < 1e-15);
        assert!(LossAggregate::from_values(&[]).is_none());
    }
}
