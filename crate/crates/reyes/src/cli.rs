//! Command surface: `analyze`, `exact`, `simulate`, `weights`, `plot-data`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::geometry::DeltaPolicy;
use crate::io::{
    analyze, exact_report, plot_report_series, plot_scenario_series, read_compositions,
    read_edge_list, read_records_csv, write_records_csv, AnalysisRequest, ReyesReport,
    WeightsSource, ZeroPolicy,
};
use crate::simulation::{run_scenario, ScenarioAggregates, ScenarioConfig};
use crate::weights::{
    from_edge_list, lattice_weights, row_standardize, weight_summaries, Contiguity, IslandPolicy,
    SpatialWeights,
};

#[derive(Parser)]
#[command(
    name = "reyes",
    version,
    about = "Spatial autocorrelation for compositional data: statistic, permutation inference, and simulation"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores). Results
    /// are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: read compositions, build weights, compute the
    /// statistic with moments, run Monte Carlo inference, emit a JSON report.
    Analyze(AnalyzeArgs),
    /// Enumerate the full n! randomization distribution (small n).
    Exact(ExactArgs),
    /// Run a simulation scenario from a JSON config.
    Simulate(SimulateArgs),
    /// Build and standardize spatial weights, print summaries.
    Weights(WeightsArgs),
    /// Re-shape reports or scenario records into tidy plot CSVs.
    PlotData(PlotDataArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ContiguityArg {
    Queen,
    Rook,
}

impl From<ContiguityArg> for Contiguity {
    fn from(v: ContiguityArg) -> Self {
        match v {
            ContiguityArg::Queen => Contiguity::Queen,
            ContiguityArg::Rook => Contiguity::Rook,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum IslandPolicyArg {
    Error,
    Drop,
}

impl From<IslandPolicyArg> for IslandPolicy {
    fn from(v: IslandPolicyArg) -> Self {
        match v {
            IslandPolicyArg::Error => IslandPolicy::Error,
            IslandPolicyArg::Drop => IslandPolicy::DropUnit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ZeroReplaceArg {
    Off,
    Multiplicative,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeltaPolicyArg {
    FractionOfMin,
    Fixed,
}

impl From<DeltaPolicyArg> for DeltaPolicy {
    fn from(v: DeltaPolicyArg) -> Self {
        match v {
            DeltaPolicyArg::FractionOfMin => DeltaPolicy::FractionOfMin,
            DeltaPolicyArg::Fixed => DeltaPolicy::Fixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimingArg {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Reports,
    Scenario,
}

/// Weight-source flags shared by analyze, exact, and weights.
#[derive(Args)]
struct WeightsFlags {
    /// Lattice rows (with --cols; exclusive with --edges).
    #[arg(long, requires = "cols", conflicts_with = "edges")]
    rows: Option<usize>,
    /// Lattice columns.
    #[arg(long, requires = "rows", conflicts_with = "edges")]
    cols: Option<usize>,
    /// Undirected edge list CSV with header src,dst.
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "queen")]
    contiguity: ContiguityArg,
    #[arg(long, value_enum, default_value = "error")]
    island_policy: IslandPolicyArg,
}

impl WeightsFlags {
    fn source(&self) -> Result<WeightsSource> {
        match (self.rows, self.cols, &self.edges) {
            (Some(rows), Some(cols), None) => Ok(WeightsSource::Lattice { rows, cols }),
            (None, None, Some(path)) => Ok(WeightsSource::EdgeList { path: path.clone() }),
            _ => Err(Error::InvalidParameter(
                "specify exactly one weights source: --rows/--cols or --edges".into(),
            )),
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Composition CSV: header id,<parts...>.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    weights: WeightsFlags,
    /// Monte Carlo permutations.
    #[arg(long, default_value_t = 10_000)]
    permutations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "off")]
    zero_replace: ZeroReplaceArg,
    #[arg(long, value_enum, default_value = "fraction-of-min")]
    delta_policy: DeltaPolicyArg,
    /// Replacement size: fraction of the column minimum, or the absolute
    /// value under --delta-policy fixed.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    weights: WeightsFlags,
    /// Refuse enumeration above this unit count (n! evaluations).
    #[arg(long, default_value_t = crate::inference::DEFAULT_EXACT_CAP)]
    cap: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output prefix: writes <prefix>.records.csv and <prefix>.summary.json.
    #[arg(long)]
    out: PathBuf,
    /// Keep or zero the per-replication wall times; with `off` the outputs
    /// depend only on (config, master seed).
    #[arg(long, value_enum, default_value = "on")]
    timing: TimingArg,
}

#[derive(Args)]
struct WeightsArgs {
    #[command(flatten)]
    weights: WeightsFlags,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotDataArgs {
    /// reports: analysis report JSONs in day order; scenario: one records CSV.
    #[arg(long, value_enum)]
    kind: PlotKind,
    /// Input files.
    #[arg(long, num_args = 0.., required = false)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Parse arguments, execute, and return the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // only effective once per process; the CLI is single-invocation
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Weights(args) => cmd_weights(args),
        Command::PlotData(args) => cmd_plot_data(args),
    }
}

fn emit(text: String, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json_doc<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let request = AnalysisRequest {
        compositions_path: args.input,
        weights_source: args.weights.source()?,
        contiguity: args.weights.contiguity.into(),
        b: args.permutations,
        seed: args.seed,
        alpha: args.alpha,
        zero_policy: ZeroPolicy {
            enabled: matches!(args.zero_replace, ZeroReplaceArg::Multiplicative),
            delta_policy: args.delta_policy.into(),
            delta: args.delta,
        },
        island_policy: args.weights.island_policy.into(),
    };
    let report = analyze(&request)?;
    emit(to_json_doc(&report)?, args.out.as_deref())
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let sample = read_compositions(&args.input)?;
    let request = AnalysisRequest {
        compositions_path: args.input,
        weights_source: args.weights.source()?,
        contiguity: args.weights.contiguity.into(),
        b: 1,
        seed: 0,
        alpha: args.alpha,
        zero_policy: ZeroPolicy::default(),
        island_policy: args.weights.island_policy.into(),
    };
    let (sample, weights, _) = crate::io::build_weights_and_align(&request, sample)?;
    let report = exact_report(&sample, &weights, args.cap, args.alpha)?;
    match args.format {
        FormatArg::Json => emit(to_json_doc(&report)?, args.out.as_deref()),
        FormatArg::Csv => {
            let mut text = String::from("i_a\n");
            for v in &report.values {
                text.push_str(&format!("{v}\n"));
            }
            emit(text, args.out.as_deref())
        }
    }
}

#[derive(serde::Serialize)]
struct ScenarioSummaryDoc<'a> {
    config: &'a ScenarioConfig,
    aggregates: &'a ScenarioAggregates,
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config: ScenarioConfig = serde_json::from_str(&std::fs::read_to_string(&args.config)?)?;
    let mut result = run_scenario(&config)?;
    if matches!(args.timing, TimingArg::Off) {
        result.strip_timings();
    }
    let records_path = args.out.with_extension("records.csv");
    let summary_path = args.out.with_extension("summary.json");
    write_records_csv(&result.records, &records_path)?;
    std::fs::write(
        &summary_path,
        to_json_doc(&ScenarioSummaryDoc {
            config: &result.config,
            aggregates: &result.aggregates,
        })?,
    )?;
    println!(
        "wrote {} and {}",
        records_path.display(),
        summary_path.display()
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct WeightsUnitDoc {
    id: String,
    degree: usize,
    c_i: f64,
}

#[derive(serde::Serialize)]
struct WeightsDoc {
    n: usize,
    s0: f64,
    standardized: bool,
    units: Vec<WeightsUnitDoc>,
}

fn build_weights_from_flags(flags: &WeightsFlags) -> Result<SpatialWeights> {
    let raw = match flags.source()? {
        WeightsSource::Lattice { rows, cols } => {
            lattice_weights(rows, cols, flags.contiguity.into())?
        }
        WeightsSource::EdgeList { path } => {
            let edges = read_edge_list(&path)?;
            let mut ids: Vec<String> = edges
                .iter()
                .flat_map(|(a, b)| [a.clone(), b.clone()])
                .collect();
            ids.sort();
            ids.dedup();
            from_edge_list(&edges, &ids)?
        }
    };
    row_standardize(&raw, flags.island_policy.into())
}

fn cmd_weights(args: WeightsArgs) -> Result<()> {
    let w = build_weights_from_flags(&args.weights)?;
    match args.format {
        FormatArg::Json => {
            let summaries = weight_summaries(&w)?;
            let units = (0..w.n())
                .map(|i| WeightsUnitDoc {
                    id: w.unit_ids()[i].clone(),
                    degree: w.neighbors(i).len(),
                    c_i: summaries.c[i],
                })
                .collect();
            let doc = WeightsDoc {
                n: w.n(),
                s0: summaries.s0,
                standardized: true,
                units,
            };
            emit(to_json_doc(&doc)?, args.out.as_deref())
        }
        FormatArg::Csv => {
            let mut text = String::from("src,dst,weight\n");
            for (i, j, v) in w.entries() {
                text.push_str(&format!("{},{},{v}\n", w.unit_ids()[i], w.unit_ids()[j]));
            }
            emit(text, args.out.as_deref())
        }
    }
}

fn cmd_plot_data(args: PlotDataArgs) -> Result<()> {
    match args.kind {
        PlotKind::Reports => {
            let reports: Vec<ReyesReport> = args
                .inputs
                .iter()
                .map(|path| -> Result<ReyesReport> {
                    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
                })
                .collect::<Result<_>>()?;
            plot_report_series(&reports, &args.out)
        }
        PlotKind::Scenario => {
            let mut records = Vec::new();
            for path in &args.inputs {
                records.extend(read_records_csv(path)?);
            }
            plot_scenario_series(&records, &args.out)
        }
    }
}
