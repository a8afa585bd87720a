//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{load_dataset, read_labels, Dataset, DatasetError, LabelColumn};
use crate::density::{estimate_density, KernelKind, DEFAULT_GRID_SIZE};
use crate::error::DecwaError;
use crate::evaluation::{adjusted_rand_index, outlier_ratio, OutlierMode};
use crate::format::sig6;
use crate::graph::{build_knn_graph, minimum_spanning_forest};
use crate::metrics::MetricKind;
use crate::partition::AgglomerationMode;
use crate::pipeline::{fit_traced, DecwaParams};
use crate::tuning::{random_search, IntRange, RealRange, SearchOutcome, SearchSpace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

impl From<DecwaError> for CliError {
    fn from(e: DecwaError) -> Self {
        match e {
            DecwaError::Config(_) => CliError::Usage(e.to_string()),
            DecwaError::Data(_) | DecwaError::Pipeline(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn write_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Manhattan,
    Canberra,
    BrayCurtis,
    Cosine,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => MetricKind::Euclidean,
            MetricArg::Manhattan => MetricKind::Manhattan,
            MetricArg::Canberra => MetricKind::Canberra,
            MetricArg::BrayCurtis => MetricKind::BrayCurtis,
            MetricArg::Cosine => MetricKind::Cosine,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Gaussian,
    Uniform,
    Triangular,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Gaussian => KernelKind::Gaussian,
            KernelArg::Uniform => KernelKind::Uniform,
            KernelArg::Triangular => KernelKind::Triangular,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AgglomerationArg {
    SinglePass,
    Fixpoint,
}

impl From<AgglomerationArg> for AgglomerationMode {
    fn from(a: AgglomerationArg) -> Self {
        match a {
            AgglomerationArg::SinglePass => AgglomerationMode::SinglePass,
            AgglomerationArg::Fixpoint => AgglomerationMode::Fixpoint,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutlierModeArg {
    OneCluster,
    Singletons,
}

impl From<OutlierModeArg> for OutlierMode {
    fn from(m: OutlierModeArg) -> Self {
        match m {
            OutlierModeArg::OneCluster => OutlierMode::OneCluster,
            OutlierModeArg::Singletons => OutlierMode::Singletons,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "decwa",
    version,
    about = "Density-based clustering with Wasserstein-guided agglomeration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a dataset and write one label per line (-1 = outlier).
    Fit(FitArgs),
    /// Random search over hyperparameters against a labelled dataset.
    Tune(TuneArgs),
    /// Score a label file against ground truth.
    Eval(EvalArgs),
    /// Write the edge-length density curve of a dataset's spanning forest.
    Density(DensityArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Comma-separated numeric table.
    #[arg(long)]
    input: PathBuf,
    /// Skip the first row.
    #[arg(long)]
    header: bool,
    /// Ground-truth column: 'first', 'last' or a zero-based index.
    #[arg(long = "label-column")]
    label_column: Option<LabelColumn>,
}

#[derive(Debug, Args)]
struct FixedArgs {
    #[arg(long, value_enum, default_value = "euclidean")]
    metric: MetricArg,
    #[arg(long = "grid-size", default_value_t = DEFAULT_GRID_SIZE)]
    grid_size: usize,
    #[arg(long = "min-cluster-size", default_value_t = 3)]
    min_cluster_size: usize,
    #[arg(long, value_enum, default_value = "single-pass")]
    agglomeration: AgglomerationArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value_t = 0.1)]
    bandwidth: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    kernel: KernelArg,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    fixed: FixedArgs,
    /// Labels file to write.
    #[arg(long)]
    output: PathBuf,
    /// Also write the density curve as `position,value` rows.
    #[arg(long = "emit-density")]
    emit_density: Option<PathBuf>,
    /// Convention for ARI when the input carries labels.
    #[arg(long = "outlier-mode", value_enum, default_value = "one-cluster")]
    outlier_mode: OutlierModeArg,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    fixed: FixedArgs,
    #[arg(long = "k-range", default_value = "2:30")]
    k_range: String,
    #[arg(long = "bandwidth-range", default_value = "0.001:10:log")]
    bandwidth_range: String,
    #[arg(long = "lambda-range", default_value = "0.001:100:log")]
    lambda_range: String,
    #[arg(long = "alpha-range", default_value = "0.0001:10:log")]
    alpha_range: String,
    /// Comma-separated kernels to sample from.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gaussian")]
    kernels: Vec<KernelArg>,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long = "outlier-mode", value_enum, default_value = "one-cluster")]
    outlier_mode: OutlierModeArg,
    /// History table (CSV) to write.
    #[arg(long)]
    output: PathBuf,
    /// Best parameters as fit flags; defaults to `<output>.best`.
    #[arg(long = "best-output")]
    best_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Predicted labels, one per line.
    predicted: PathBuf,
    /// Ground-truth labels, one per line.
    truth: PathBuf,
    #[arg(long = "outlier-mode", value_enum, default_value = "one-cluster")]
    outlier_mode: OutlierModeArg,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value_t = 0.1)]
    bandwidth: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    kernel: KernelArg,
    #[arg(long, value_enum, default_value = "euclidean")]
    metric: MetricArg,
    #[arg(long = "grid-size", default_value_t = DEFAULT_GRID_SIZE)]
    grid_size: usize,
    #[arg(long)]
    output: PathBuf,
}

/// Renders parameters as flags accepted by `decwa fit`.
pub fn params_as_flags(p: &DecwaParams) -> String {
    format!(
        "--metric {} --k {} --bandwidth {} --kernel {} --lambda {} --alpha {} --grid-size {} --min-cluster-size {} --agglomeration {} --seed {}",
        p.metric,
        p.k,
        sig6(p.bandwidth),
        p.kernel,
        sig6(p.lambda),
        sig6(p.alpha),
        p.grid_size,
        p.min_cluster_size,
        p.agglomeration,
        p.seed
    )
}

fn load(input: &InputArgs) -> Result<Dataset, CliError> {
    Ok(load_dataset(
        &input.input,
        input.header,
        input.label_column,
    )?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(write_err(path))
}

fn base_params(fixed: &FixedArgs) -> DecwaParams {
    DecwaParams {
        metric: fixed.metric.into(),
        grid_size: fixed.grid_size,
        min_cluster_size: fixed.min_cluster_size,
        agglomeration: fixed.agglomeration.into(),
        seed: fixed.seed,
        ..DecwaParams::default()
    }
}

fn command_fit(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let params = DecwaParams {
        k: args.model.k as usize,
        bandwidth: args.model.bandwidth,
        kernel: args.model.kernel.into(),
        lambda: args.model.lambda,
        alpha: args.model.alpha,
        ..base_params(&args.fixed)
    };
    let _ = writeln!(out, "params: {}", params_as_flags(&params));
    params.validate()?;
    let data = load(&args.input)?;
    let trace = fit_traced(&data.points, &params)?;
    let result = &trace.result;

    let mut w = create(&args.output)?;
    for l in &result.labels {
        writeln!(w, "{l}").map_err(write_err(&args.output))?;
    }
    w.flush().map_err(write_err(&args.output))?;
    if let Some(path) = &args.emit_density {
        let mut w = create(path)?;
        trace
            .curve
            .write_two_column(&mut w)
            .map_err(write_err(path))?;
        w.flush().map_err(write_err(path))?;
    }

    let d = &result.diagnostics;
    let thresholds: Vec<String> = d.thresholds.iter().map(|t| sig6(*t)).collect();
    let _ = writeln!(out, "points: {}", result.labels.len());
    let _ = writeln!(out, "clusters: {}", result.cluster_count);
    let _ = writeln!(out, "outlier_ratio: {}", sig6(result.outlier_ratio));
    let _ = writeln!(out, "thresholds: [{}]", thresholds.join(", "));
    let _ = writeln!(
        out,
        "extrema: {}  forest_components: {}  subclusters: {} -> {}  merges: {}",
        d.extrema_count,
        d.forest_components,
        d.subclusters_before_merge,
        d.subclusters_after_merge,
        d.merge_count
    );
    if let Some(truth) = &data.truth {
        let ari = adjusted_rand_index(&result.labels, truth, args.outlier_mode.into())?;
        let _ = writeln!(out, "ari: {}", sig6(ari));
    }
    Ok(())
}

/// Writes the search history as CSV.
pub fn write_history<W: Write>(outcome: &SearchOutcome, mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "trial_index,k,bandwidth,kernel,lambda,alpha,metric,grid_size,min_cluster_size,agglomeration,seed,ari,outlier_ratio,cluster_count"
    )?;
    for t in &outcome.history {
        let p = &t.params;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.trial_index,
            p.k,
            sig6(p.bandwidth),
            p.kernel,
            sig6(p.lambda),
            sig6(p.alpha),
            p.metric,
            p.grid_size,
            p.min_cluster_size,
            p.agglomeration,
            p.seed,
            sig6(t.ari),
            sig6(t.outlier_ratio),
            t.cluster_count
        )?;
    }
    Ok(())
}

fn command_tune(args: &TuneArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let space = SearchSpace {
        k: args.k_range.parse::<IntRange>()?,
        bandwidth: args.bandwidth_range.parse::<RealRange>()?,
        lambda: args.lambda_range.parse::<RealRange>()?,
        alpha: args.alpha_range.parse::<RealRange>()?,
        kernels: args.kernels.iter().map(|&k| k.into()).collect(),
        base: base_params(&args.fixed),
        outlier_mode: args.outlier_mode.into(),
    };
    let kernels: Vec<&str> = space.kernels.iter().map(|k| k.name()).collect();
    let _ = writeln!(
        out,
        "space: --k-range {} --bandwidth-range {} --lambda-range {} --alpha-range {} --kernels {} --metric {} --grid-size {} --min-cluster-size {} --agglomeration {} --iterations {} --seed {} --outlier-mode {}",
        space.k,
        space.bandwidth,
        space.lambda,
        space.alpha,
        kernels.join(","),
        space.base.metric,
        space.base.grid_size,
        space.base.min_cluster_size,
        space.base.agglomeration,
        args.iterations,
        args.fixed.seed,
        space.outlier_mode
    );
    space.validate()?;
    if args.input.label_column.is_none() {
        return Err(CliError::Usage("tune requires --label-column".into()));
    }
    let data = load(&args.input)?;
    let truth = data.truth.as_deref().unwrap_or_default();
    let outcome = random_search(
        &data.points,
        truth,
        &space,
        args.iterations,
        args.fixed.seed,
    )?;

    let mut w = create(&args.output)?;
    write_history(&outcome, &mut w).map_err(write_err(&args.output))?;
    w.flush().map_err(write_err(&args.output))?;

    let best_path = args.best_output.clone().unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".best");
        PathBuf::from(p)
    });
    let flags = params_as_flags(&outcome.best.params);
    let mut w = create(&best_path)?;
    writeln!(w, "{flags}").map_err(write_err(&best_path))?;
    w.flush().map_err(write_err(&best_path))?;

    let _ = writeln!(out, "best_trial: {}", outcome.best.trial_index);
    let _ = writeln!(out, "best_ari: {}", sig6(outcome.best.ari));
    let _ = writeln!(
        out,
        "best_outlier_ratio: {}",
        sig6(outcome.best.outlier_ratio)
    );
    let _ = writeln!(out, "best_params: {flags}");
    Ok(())
}

fn command_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mode: OutlierMode = args.outlier_mode.into();
    let _ = writeln!(out, "outlier_mode: {mode}");
    let predicted = read_labels(&args.predicted)?;
    let truth = read_labels(&args.truth)?;
    if predicted.len() != truth.len() {
        return Err(CliError::Usage(format!(
            "{} has {} labels but {} has {}",
            args.predicted.display(),
            predicted.len(),
            args.truth.display(),
            truth.len()
        )));
    }
    let ari = adjusted_rand_index(&predicted, &truth, mode)?;
    let _ = writeln!(out, "ari: {}", sig6(ari));
    let _ = writeln!(out, "outlier_ratio: {}", sig6(outlier_ratio(&predicted)));
    Ok(())
}

fn command_density(args: &DensityArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let metric: MetricKind = args.metric.into();
    let kernel: KernelKind = args.kernel.into();
    let _ = writeln!(
        out,
        "params: --metric {metric} --k {} --bandwidth {} --kernel {kernel} --grid-size {}",
        args.k,
        sig6(args.bandwidth),
        args.grid_size
    );
    let data = load(&args.input)?;
    let graph = build_knn_graph(&data.points, args.k as usize, metric)?;
    let forest = minimum_spanning_forest(&graph);
    let curve = estimate_density(&forest.weights(), args.bandwidth, kernel, args.grid_size)?;
    let mut w = create(&args.output)?;
    curve
        .write_two_column(&mut w)
        .map_err(write_err(&args.output))?;
    w.flush().map_err(write_err(&args.output))?;
    let _ = writeln!(out, "samples: {}", curve.sample_count);
    let _ = writeln!(out, "integral: {}", sig6(curve.integral()));
    Ok(())
}

/// Parses `args` (including the program name) and runs the command, writing
/// human-readable output to `out` and errors to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => command_fit(a, out),
        Command::Tune(a) => command_tune(a, out),
        Command::Eval(a) => command_eval(a, out),
        Command::Density(a) => command_density(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}
