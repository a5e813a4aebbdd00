use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rbcm::classifiers::{Method, MethodConfig};
use rbcm::harness::{
    default_grid, load_dataset, run_experiment, sweep_parameters, synthetic_blobs, write_features_binary,
    write_features_csv, write_labels, write_sweep_csv, ExperimentConfig, HarnessError, SynthConfig,
};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "rbcm", version, about = "Representation-based classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the test split with each method and write a JSON report.
    Run(RunArgs),
    /// SCCRC accuracy over a (lambda1, lambda2) grid, as CSV.
    Sweep(SweepArgs),
    /// Write a seeded Gaussian-blob dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct DataArgs {
    /// d×N CSV, or the RBCM binary format.
    #[arg(long)]
    features: PathBuf,
    /// One 0-based label per line.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 3)]
    train_per_class: usize,
    #[arg(long, default_value_t = 0.0)]
    noise_variance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = MethodConfig::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = MethodConfig::DEFAULT_THETA)]
    theta: f64,
    /// Fail with exit code 3 instead of using a solver's last iterate.
    #[arg(long)]
    fatal_nonconvergence: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated method names, e.g. src,crc,sccrc. Defaults to all.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    #[arg(long, default_value_t = MethodConfig::DEFAULT_LAMBDA)]
    lambda1: f64,
    #[arg(long, default_value_t = MethodConfig::DEFAULT_LAMBDA)]
    lambda2: f64,
    #[arg(long)]
    report: PathBuf,
    /// Directory for per-sample coefficient and residual CSVs.
    #[arg(long)]
    dump_coefficients: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// `default`, a CSV file of `lambda1,lambda2` rows, or inline pairs `l1:l2,l1:l2`.
    #[arg(long, default_value = "default")]
    grid: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    classes: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    per_class: usize,
    #[arg(long, default_value_t = 1.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Written as binary for `.bin`/`.rbcm`, CSV otherwise.
    #[arg(long)]
    out_features: PathBuf,
    #[arg(long)]
    out_labels: PathBuf,
}

enum Failure {
    Usage(String),
    Harness(HarnessError),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Harness(e)
    }
}

fn method_config(method: Method, data: &DataArgs, lambda1: f64, lambda2: f64) -> MethodConfig {
    let mut cfg =
        MethodConfig::new(method).with_lambda(data.lambda).with_lambdas(lambda1, lambda2).with_theta(data.theta);
    cfg.fatal_nonconvergence = data.fatal_nonconvergence;
    cfg
}

fn base_config(data: &DataArgs, methods: Vec<MethodConfig>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(data.train_per_class, methods);
    cfg.noise_variance = data.noise_variance;
    cfg.seed = data.seed;
    cfg
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let ds = load_dataset(&args.data.features, &args.data.labels)?;
    let methods = if args.methods.is_empty() { Method::ALL.to_vec() } else { args.methods };
    let methods = methods.into_iter().map(|m| method_config(m, &args.data, args.lambda1, args.lambda2)).collect();
    let mut cfg = base_config(&args.data, methods);
    cfg.report_path = Some(args.report);
    cfg.dump_dir = args.dump_coefficients;
    let report = run_experiment(&cfg, &ds)?;
    for m in &report.methods {
        let sci = m.mean_sci.map_or("-".to_string(), |s| format!("{s:.4}"));
        println!("{:<8} accuracy {:.4}  time {:.3}s  mean SCI {sci}", m.method, m.accuracy, m.total_seconds);
    }
    Ok(())
}

fn parse_pair(s: &str, sep: char) -> Option<(f64, f64)> {
    let (a, b) = s.split_once(sep)?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn parse_grid(spec: &str) -> Result<Vec<(f64, f64)>, Failure> {
    if spec == "default" {
        return Ok(default_grid());
    }
    let bad = |what: &str| Failure::Usage(format!("invalid grid entry {what:?}"));
    let path = Path::new(spec);
    let pairs = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.into(), source: e })?;
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with("lambda1"))
            .map(|l| parse_pair(l, ',').ok_or_else(|| bad(l)))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        spec.split(',').map(|p| parse_pair(p, ':').ok_or_else(|| bad(p))).collect::<Result<Vec<_>, _>>()?
    };
    if pairs.is_empty() {
        return Err(Failure::Usage("empty grid".into()));
    }
    Ok(pairs)
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let grid = parse_grid(&args.grid)?;
    let ds = load_dataset(&args.data.features, &args.data.labels)?;
    let sccrc = method_config(Method::Sccrc, &args.data, MethodConfig::DEFAULT_LAMBDA, MethodConfig::DEFAULT_LAMBDA);
    let mut cfg = base_config(&args.data, vec![sccrc]);
    cfg.parameter_grid = Some(grid);
    cfg.validate()?;
    let cells = sweep_parameters(&cfg, &ds)?;
    write_sweep_csv(&args.out, &cells)?;
    let failed = cells.iter().filter(|c| c.accuracy.is_none()).count();
    println!("{} cells written to {} ({failed} failed)", cells.len(), args.out.display());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let ds = synthetic_blobs(&SynthConfig {
        classes: args.classes,
        dim: args.dim,
        per_class: args.per_class,
        separation: args.separation,
        seed: args.seed,
    })?;
    match args.out_features.extension().and_then(|e| e.to_str()) {
        Some("bin" | "rbcm") => write_features_binary(&args.out_features, &ds.features)?,
        _ => write_features_csv(&args.out_features, &ds.features)?,
    }
    write_labels(&args.out_labels, &ds.labels)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Harness(e)) => {
            eprintln!("error: {e}");
            let code = if e.is_nonconvergence() {
                EXIT_NONCONVERGENCE
            } else if e.is_usage() {
                EXIT_USAGE
            } else {
                EXIT_DATA
            };
            ExitCode::from(code)
        }
    }
}
