use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use maclaurin::bench::{
    run_pipeline, summarize, sweep, synthetic_quadratic, write_report_file, BenchConfig, BenchMode,
    BenchReport, ReportFormat, SweepConfig, SweepMode,
};
use maclaurin::data::{
    mean_pairwise_distance, parse_libsvm, write_libsvm, Dataset, DISTANCE_SAMPLE,
};
use maclaurin::kernel::{catalog, needs_auto_sigma, Validation};
use maclaurin::{
    parse_kernel_spec, parse_oracle, recommended_d, recommended_d_compositional, CompositionalMap,
    Error, FeatureMapSpec, MapDocument, MapMode, Norm, RandomMaclaurinMap, Result, SparseVector,
};

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! out {
    ($($t:tt)*) => {
        writeln!(io::stdout(), $($t)*)?
    };
}

#[derive(Parser)]
#[command(
    name = "maclaurin",
    version,
    about = "Random Maclaurin feature maps for dot product kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Built-in kernel families.
    Kernels {
        #[command(subcommand)]
        action: KernelsAction,
    },
    /// Check that a kernel's Maclaurin coefficients are non-negative.
    Validate {
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 100)]
        n_max: u32,
    },
    /// Recommended embedding dimension from the uniform-approximation bound.
    Bounds(BoundsArgs),
    /// Gram-error sweep over D and map modes.
    Sweep(SweepArgs),
    /// Apply a feature map to a libsvm dataset.
    Transform(TransformArgs),
    /// Train a linear classifier on mapped features and save the model.
    Train(PipelineArgs),
    /// Run the classification pipeline and write a report.
    Bench(BenchArgs),
    /// Write a synthetic quadratic-separable dataset in libsvm format.
    Generate {
        #[arg(long, default_value_t = 4000)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum KernelsAction {
    List,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    d: usize,
    #[arg(long = "R", alias = "radius", default_value_t = 1.0)]
    radius: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Base oracle (`base=linear`, `base=rff:sigma=<v>`) for a compositional kernel.
    #[arg(long)]
    base: Option<String>,
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    d: usize,
    /// Comma-separated list of feature counts.
    #[arg(long = "D", value_delimiter = ',', required = true)]
    num_features: Vec<usize>,
    /// Comma-separated modes: plain, h01, truncated:<k>, compositional.
    #[arg(long, value_delimiter = ',', default_value = "plain")]
    modes: Vec<String>,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Norm of the unit ball the points are drawn from.
    #[arg(long, default_value = "l2")]
    ball: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Base oracle for compositional cells.
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    exclude_diagonal: bool,
    #[arg(long)]
    record_timings: bool,
    /// csv or json; inferred from the output extension when omitted.
    #[arg(long)]
    format: Option<String>,
    /// Also write per-cell mean and standard deviation.
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "D")]
    num_features: Option<usize>,
    #[arg(long, default_value = "plain")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Input dimension; defaults to the dataset's.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    base: Option<String>,
    /// Data radius for the compositional domain check.
    #[arg(long = "R", default_value_t = 1.0)]
    radius: f64,
    /// Divide inputs by this before mapping.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, conflicts_with = "map_in")]
    map_out: Option<PathBuf>,
    #[arg(long)]
    map_in: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    kernel: String,
    #[arg(long = "D", default_value_t = 500)]
    num_features: usize,
    #[arg(long, default_value = "h01")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    base: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.6)]
    train_fraction: f64,
    #[arg(long, default_value = "l2")]
    norm: String,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    no_intercept: bool,
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    kernel: String,
    /// Comma-separated list of feature counts.
    #[arg(long = "D", value_delimiter = ',', default_value = "500")]
    num_features: Vec<usize>,
    /// Comma-separated modes: plain, h01, truncated:<k>, raw.
    #[arg(long, value_delimiter = ',', default_value = "h01")]
    mode: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    base: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.6)]
    train_fraction: f64,
    #[arg(long, default_value = "l2")]
    norm: String,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    no_intercept: bool,
    #[arg(long)]
    record_timings: bool,
    /// Baseline training time for the speedup column (needs --record-timings).
    #[arg(long)]
    baseline_train_seconds: Option<f64>,
    #[arg(long)]
    baseline_test_seconds: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Kernels {
            action: KernelsAction::List,
        } => kernels_list(),
        Command::Validate { kernel, n_max } => validate(&kernel, n_max),
        Command::Bounds(args) => bounds(&args),
        Command::Sweep(args) => run_sweep(&args),
        Command::Transform(args) => transform(&args),
        Command::Train(args) => train_model(&args),
        Command::Bench(args) => bench(&args),
        Command::Generate { n, d, seed, out } => {
            let data = synthetic_quadratic(n, d, seed)?;
            write_libsvm(&data, BufWriter::new(File::create(out)?))
        }
    }
}

fn kernels_list() -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{:<10} {:<16} formula", "name", "example")?;
    for e in catalog() {
        writeln!(out, "{:<10} {:<16} {}", e.name, e.template, e.formula)?;
    }
    writeln!(
        out,
        "{:<10} {:<16} Σ a_n <x,y>^n",
        "coeffs", "coeffs:[1,0.5]"
    )?;
    writeln!(
        out,
        "suffixes: ,c=<scale> for f(t/c); ,trunc=<k> to keep degrees <= k"
    )?;
    Ok(())
}

fn validate(spec: &str, n_max: u32) -> Result<()> {
    let kernel = parse_kernel_spec(spec, None)?;
    match kernel.validate_nonneg(n_max) {
        Validation::Valid { checked_up_to } => {
            out!("{kernel}: coefficients a_0..a_{checked_up_to} are non-negative");
            Ok(())
        }
        Validation::Negative { index, value } => Err(Error::NegativeCoefficient { index, value }),
    }
}

fn bounds(args: &BoundsArgs) -> Result<()> {
    let kernel = parse_kernel_spec(&args.kernel, None)?;
    let report = match &args.base {
        None => recommended_d(&kernel, args.d, args.radius, args.eps, args.delta, args.p)?,
        Some(base) => {
            let oracle = parse_oracle(base, args.d)?;
            recommended_d_compositional(
                &kernel,
                oracle.as_ref(),
                args.radius,
                args.eps,
                args.delta,
                args.p,
            )?
        }
    };
    match args.format.as_str() {
        "json" => out!("{}", serde_json::to_string_pretty(&report)?),
        "text" => {
            out!("kernel        {}", report.kernel);
            if let Some(b) = &report.base {
                out!("base          {b}");
            }
            out!("C             {}", report.c_omega);
            out!("L             {}", report.lipschitz);
            out!("recommended D {}", report.recommended_d);
        }
        other => return Err(Error::invalid(format!("unknown format `{other}`"))),
    }
    Ok(())
}

fn report_format(explicit: &Option<String>, path: &Path) -> Result<ReportFormat> {
    match explicit {
        Some(f) => f.parse(),
        None => Ok(ReportFormat::from_path(path)),
    }
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    let kernel = parse_kernel_spec(&args.kernel, None)?;
    let mut config = SweepConfig::new(kernel, args.d, args.num_features.clone());
    config.modes = args
        .modes
        .iter()
        .map(|m| m.parse::<SweepMode>())
        .collect::<Result<_>>()?;
    config.trials = args.trials;
    config.seed = args.seed;
    config.points = args.points;
    config.ball = args.ball.parse()?;
    config.p = args.p;
    config.include_diagonal = !args.exclude_diagonal;
    config.record_timings = args.record_timings;
    if let Some(base) = &args.base {
        config.oracle = Some(parse_oracle(base, args.d)?);
    }
    let format = report_format(&args.format, &args.out)?;
    let rows = sweep(&config)?;
    write_report_file(&rows, &args.out, format)?;
    if let Some(path) = &args.summary_out {
        write_report_file(&summarize(&rows), path, report_format(&args.format, path)?)?;
    }
    Ok(())
}

fn open(path: &Path) -> Result<File> {
    File::open(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    parse_libsvm(BufReader::new(open(path)?))
}

enum LoadedMap {
    Maclaurin(RandomMaclaurinMap),
    Compositional(CompositionalMap),
}

impl LoadedMap {
    fn from_json(text: &str) -> Result<Self> {
        let doc: MapDocument = serde_json::from_str(text)?;
        Ok(if doc.base.is_some() {
            LoadedMap::Compositional(CompositionalMap::from_document(&doc)?)
        } else {
            LoadedMap::Maclaurin(RandomMaclaurinMap::from_document(&doc)?)
        })
    }

    fn to_json(&self) -> Result<String> {
        match self {
            LoadedMap::Maclaurin(m) => m.to_json(),
            LoadedMap::Compositional(m) => m.to_json(),
        }
    }

    fn input_dim(&self) -> usize {
        match self {
            LoadedMap::Maclaurin(m) => m.spec().input_dim,
            LoadedMap::Compositional(m) => m.spec().input_dim,
        }
    }

    fn apply(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        match self {
            LoadedMap::Maclaurin(m) => m.apply_batch(data.rows()),
            LoadedMap::Compositional(m) => {
                m.apply_batch(&data.clone().with_dim(m.spec().input_dim).dense_rows())
            }
        }
    }
}

fn transform(args: &TransformArgs) -> Result<()> {
    let mut data = read_dataset(&args.data)?;
    if let Some(s) = args.scale {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::invalid(format!("scale must be > 0, got {s}")));
        }
        data = data.divided(s);
    }
    let map = match &args.map_in {
        Some(path) => LoadedMap::from_json(&io::read_to_string(open(path)?)?)?,
        None => {
            let spec_str = args
                .kernel
                .as_deref()
                .ok_or_else(|| Error::invalid("--kernel is required unless --map-in is given"))?;
            let num_features = args
                .num_features
                .ok_or_else(|| Error::invalid("--D is required unless --map-in is given"))?;
            let sigma = if needs_auto_sigma(spec_str) {
                Some(mean_pairwise_distance(
                    data.rows(),
                    DISTANCE_SAMPLE,
                    args.seed,
                )?)
            } else {
                None
            };
            let kernel = parse_kernel_spec(spec_str, sigma)?;
            let d = args.d.unwrap_or(data.dim());
            let spec = FeatureMapSpec::new(d, num_features)
                .with_seed(args.seed)
                .with_mode(args.mode.parse::<MapMode>()?)
                .with_p(args.p);
            match &args.base {
                None => LoadedMap::Maclaurin(RandomMaclaurinMap::build(&kernel, &spec)?),
                Some(base) => LoadedMap::Compositional(CompositionalMap::build(
                    &kernel,
                    parse_oracle(base, d)?,
                    &spec,
                    args.radius,
                )?),
            }
        }
    };
    if data.dim() > map.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: map.input_dim(),
            got: data.dim(),
        });
    }
    if let Some(path) = &args.map_out {
        std::fs::write(path, map.to_json()? + "\n")?;
    }
    let rows = map.apply(&data)?;
    let mapped = Dataset::new(
        data.labels().to_vec(),
        rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
        rows.first().map_or(0, Vec::len),
    )?;
    let mut out = BufWriter::new(File::create(&args.out)?);
    write_libsvm(&mapped, &mut out)?;
    out.flush()?;
    Ok(())
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("data")
        .to_string()
}

#[allow(clippy::too_many_arguments)]
fn bench_config(
    kernel: &str,
    num_features: usize,
    mode: &str,
    seed: u64,
    base: &Option<String>,
    p: f64,
    train_fraction: f64,
    norm: &str,
    lambda: Option<f64>,
    epochs: Option<usize>,
    no_intercept: bool,
) -> Result<BenchConfig> {
    let mut c = BenchConfig::new(kernel, num_features, mode.parse::<BenchMode>()?);
    c.seed = seed;
    c.base = base.clone();
    c.p = p;
    c.train_fraction = train_fraction;
    c.norm = norm.parse::<Norm>()?;
    if let Some(l) = lambda {
        c.lambda = l;
    }
    if let Some(e) = epochs {
        c.epochs = e;
    }
    c.fit_intercept = !no_intercept;
    Ok(c)
}

fn train_model(args: &PipelineArgs) -> Result<()> {
    let data = read_dataset(&args.data)?;
    let config = bench_config(
        &args.kernel,
        args.num_features,
        &args.mode,
        args.seed,
        &args.base,
        args.p,
        args.train_fraction,
        &args.norm,
        args.lambda,
        args.epochs,
        args.no_intercept,
    )?;
    let out = run_pipeline(&data, &dataset_name(&args.data), &config)?;
    if let Some(path) = &args.model_out {
        std::fs::write(path, serde_json::to_string_pretty(&out.model)? + "\n")?;
    }
    let r = &out.report;
    out!(
        "{} N={} d={} D={} mode={} train_accuracy={} test_accuracy={}",
        r.dataset,
        r.n,
        r.d,
        r.num_features,
        r.mode,
        r.train_accuracy,
        r.accuracy
    );
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let data = read_dataset(&args.data)?;
    let name = dataset_name(&args.data);
    let mut reports: Vec<BenchReport> = Vec::new();
    for mode in &args.mode {
        for &nf in &args.num_features {
            let mut config = bench_config(
                &args.kernel,
                nf,
                mode,
                args.seed,
                &args.base,
                args.p,
                args.train_fraction,
                &args.norm,
                args.lambda,
                args.epochs,
                args.no_intercept,
            )?;
            config.record_timings = args.record_timings;
            config.baseline_train_seconds = args.baseline_train_seconds;
            config.baseline_test_seconds = args.baseline_test_seconds;
            reports.push(run_pipeline(&data, &name, &config)?.report);
        }
    }
    write_report_file(&reports, &args.out, report_format(&args.format, &args.out)?)
}
