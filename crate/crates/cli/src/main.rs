use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sbm_core::harness::{
    fit_graph, read_edgelist, read_labels, run_experiment, sample_instance, write_edgelist, write_labels, Algorithm,
    ExperimentConfig, FitSpec, InitSpec, OutputSpec, PriorSpec, SizesKeyword, SizesSpec,
};
use sbm_core::loss::{l1_loss, misclustered_count};
use sbm_core::mle::Estimator;
use sbm_core::model::balanced_sizes;
use sbm_core::theory::RateReport;
use sbm_core::{Result, SbmError};

#[derive(Parser)]
#[command(name = "sbm-mf", version, about = "Community detection under the stochastic block model")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "SBM_MF_THREADS")]
    threads: Option<usize>,
    /// Suppress progress output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a truth and a graph; writes graph.edgelist and truth.labels.
    Generate(GenerateArgs),
    /// Fit one graph read from an edge-list file.
    Fit(FitArgs),
    /// Run a replicated experiment described by a TOML config.
    Experiment(ExperimentArgs),
    /// Loss and misclustered count between two label files.
    Eval(EvalArgs),
    /// Print rate diagnostics for a regime as JSON.
    Theory(TheoryArgs),
}

#[derive(Args)]
struct Regime {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// `balanced` or comma-separated community sizes.
    #[arg(long)]
    sizes: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Read n, k, p, q and sizes from a config; flags override.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    regime: Regime,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// Take algorithm, prior, initializer and iterations from a config;
    /// flags override.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Label file used as the initializer instead of spectral clustering.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Ground-truth labels; enables per-iteration scoring.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes labels.txt and trace.ndjson here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// Estimated labels.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct TheoryArgs {
    #[command(flatten)]
    regime: Regime,
    /// Prior odds bound w.
    #[arg(long, default_value_t = 1.0)]
    w: f64,
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(SbmError::Input(format!("{what} {} does not exist", path.display())))
    }
}

fn parse_sizes(text: &str) -> Result<SizesSpec> {
    if text == "balanced" {
        return Ok(SizesSpec::Keyword(SizesKeyword::Balanced));
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| SbmError::Input(format!("bad community size `{s}`"))))
        .collect::<Result<Vec<usize>>>()
        .map(SizesSpec::Explicit)
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    require_file(path, "config")?;
    ExperimentConfig::from_path(path)
}

fn regime_config(base: Option<ExperimentConfig>, regime: &Regime) -> Result<ExperimentConfig> {
    let missing = |name: &str| SbmError::Input(format!("--{name} is required without --config"));
    let mut config = match base {
        Some(c) => c,
        None => ExperimentConfig {
            n: regime.n.ok_or_else(|| missing("n"))?,
            k: regime.k.ok_or_else(|| missing("k"))?,
            p: regime.p.ok_or_else(|| missing("p"))?,
            q: regime.q.ok_or_else(|| missing("q"))?,
            sizes: SizesSpec::default(),
            prior: PriorSpec::Uniform,
            init: InitSpec::Spectral,
            algorithm: Algorithm::BcaviDigamma,
            iterations: None,
            replications: 1,
            seed: 0,
            mle_estimator: Estimator::default(),
            output: OutputSpec::default(),
        },
    };
    config.n = regime.n.unwrap_or(config.n);
    config.k = regime.k.unwrap_or(config.k);
    config.p = regime.p.unwrap_or(config.p);
    config.q = regime.q.unwrap_or(config.q);
    if let Some(sizes) = &regime.sizes {
        config.sizes = parse_sizes(sizes)?;
    }
    Ok(config)
}

fn generate(args: &GenerateArgs, global: &Global) -> Result<()> {
    let base = args.config.as_deref().map(load_config).transpose()?;
    let mut config = regime_config(base, &args.regime)?;
    config.init = InitSpec::Spectral;
    config.replications = 1;
    config.validate()?;
    let (truth, graph) = sample_instance(&config, args.seed)?;
    std::fs::create_dir_all(&args.out)?;
    write_edgelist(&args.out.join("graph.edgelist"), &graph, config.k)?;
    write_labels(&args.out.join("truth.labels"), &truth)?;
    if !global.quiet {
        println!("n = {}, k = {}, edges = {}, written to {}", graph.n(), config.k, graph.edge_count(), args.out.display());
    }
    Ok(())
}

fn fit(args: &FitArgs, global: &Global) -> Result<()> {
    require_file(&args.graph, "graph")?;
    let (graph, k) = read_edgelist(&args.graph)?;
    let mut spec = FitSpec {
        k,
        algorithm: Algorithm::BcaviDigamma,
        iterations: None,
        prior: PriorSpec::Uniform,
        init: InitSpec::Spectral,
        estimator: Estimator::default(),
    };
    if let Some(path) = &args.config {
        let config = load_config(path)?;
        spec = FitSpec { k, ..FitSpec::from_config(&config) };
    }
    if let Some(name) = &args.algorithm {
        spec.algorithm = name.parse()?;
    }
    if args.iterations.is_some() {
        spec.iterations = args.iterations;
    }
    if let Some(path) = &args.init {
        require_file(path, "initializer")?;
        spec.init = InitSpec::File { path: path.clone() };
    }
    if spec.iterations == Some(0) {
        return Err(SbmError::Input("--iterations must be at least 1".into()));
    }
    let truth = match &args.truth {
        Some(path) => {
            require_file(path, "truth")?;
            Some(read_labels(path, Some(k))?)
        }
        None => None,
    };
    let result = fit_graph(&graph, &spec, args.seed, truth.as_ref())?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        write_labels(&dir.join("labels.txt"), &result.labels)?;
        let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join("trace.ndjson"))?);
        result.trace.write_ndjson(&mut out, None)?;
    }
    if !global.quiet {
        let last = result.trace.last().expect("trace is never empty");
        let mut line = format!("{}: {} iterations", spec.algorithm, last.iteration);
        if let (Some(loss), Some(mis)) = (last.loss, last.misclustered) {
            line += &format!(", loss {loss:.6}, misclustered {mis}");
        }
        println!("{line}");
    }
    Ok(())
}

fn experiment(args: &ExperimentArgs, global: &Global) -> Result<()> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output.dir = Some(out.clone());
    }
    if let Some(name) = &args.algorithm {
        config.algorithm = name.parse()?;
    }
    if args.iterations.is_some() {
        config.iterations = args.iterations;
    }
    if let Some(r) = args.replications {
        config.replications = r;
    }
    let summary = run_experiment(&config, global.threads)?;
    if !global.quiet {
        println!(
            "{}: {} replications, {} exact recoveries, {} failed, {:.2}s total",
            summary.algorithm,
            summary.replications,
            summary.exact_recoveries,
            summary.failed,
            summary.total_runtime().as_secs_f64()
        );
        if let Some(loss) = &summary.final_loss {
            println!("final loss: mean {:.4}, median {:.4}, q90 {:.4}", loss.mean, loss.median, loss.q90);
        }
    }
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    require_file(&args.labels, "labels")?;
    require_file(&args.truth, "truth")?;
    let truth = read_labels(&args.truth, None)?;
    let labels = read_labels(&args.labels, Some(truth.k()))?;
    let loss = l1_loss(&labels.to_soft(), &truth)?;
    let mis = misclustered_count(&labels, &truth)?;
    let report = serde_json::json!({ "loss": loss.loss, "misclustered": mis, "bijection": loss.bijection });
    println!("{report}");
    Ok(())
}

fn theory(args: &TheoryArgs) -> Result<()> {
    let config = regime_config(None, &args.regime)?;
    let sizes = match &config.sizes {
        SizesSpec::Keyword(SizesKeyword::Balanced) => balanced_sizes(config.n, config.k),
        SizesSpec::Explicit(s) => s.clone(),
    };
    if sizes.len() != config.k {
        return Err(SbmError::Input(format!("expected {} community sizes, got {}", config.k, sizes.len())));
    }
    let report = RateReport::new(config.n, config.p, config.q, &sizes, args.w)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if cli.global.threads == Some(0) {
        return Err(SbmError::Input("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Generate(args) => generate(args, &cli.global),
        Command::Fit(args) => fit(args, &cli.global),
        Command::Experiment(args) => experiment(args, &cli.global),
        Command::Eval(args) => eval(args),
        Command::Theory(args) => theory(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

