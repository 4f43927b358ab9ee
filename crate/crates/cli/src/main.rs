use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stprofile::benchmark::{self, Featurizer, RFConfig, TaskKind};
use stprofile::capacity::{self, DatasetDims, DimOverride};
use stprofile::data_model::{Dimension, SplitShares, TableName};
use stprofile::profile::{self, ProfileConfig};
use stprofile::scores::{
    io_score, outlier_score, simb_score, stood_score, DatasetSource, OutlierFunction, ScoreConfig, ScoreKind,
    ScoreReport,
};
use stprofile::splitter::{self, Combination, SplitSpec, TemporalMatch};
use stprofile::storage::{open_dataset, Group};

/// Streaming profiler for spatio-temporal ML datasets.
#[derive(Parser, Debug)]
#[command(name = "stprofile", version, about)]
struct Cli {
    /// Worker threads; all outputs are identical for any value.
    #[arg(long, global = true, env = "STPROFILE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All four scores on every split combination plus the capacity row.
    Profile(ProfileArgs),
    /// One score (or all) on chosen splits.
    Score(ScoreArgs),
    /// Interpolation and smooth function thresholds.
    Capacity(CapacityArgs),
    /// Out-of-distribution train/val/test assignment.
    Split(SplitArgs),
    /// Random-forest baseline on the train and test tables.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct ScoreFlags {
    /// Histogram bins per column.
    #[arg(long, default_value_t = 10_000)]
    bins: usize,
    /// Rows sampled for the IO score.
    #[arg(long, default_value_t = 100_000)]
    sample_cap: usize,
    /// Feature-label pairs sampled for the IO score.
    #[arg(long, default_value_t = 10_000)]
    pair_cap: usize,
    /// Values kept exactly per column for quantiles.
    #[arg(long, default_value_t = 1_000_000)]
    quantile_cap: usize,
    /// Per-point outlier scoring function.
    #[arg(long, value_enum, default_value_t = OutlierArg::LinearRamp)]
    outlier_function: OutlierArg,
    /// Rows per streamed batch.
    #[arg(long, default_value_t = 8192)]
    batch_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OutlierArg {
    LinearRamp,
    InnerStep,
    OuterStep,
}

impl ScoreFlags {
    fn config(&self) -> ScoreConfig {
        ScoreConfig {
            bins: self.bins,
            quantile_cap: self.quantile_cap,
            row_cap: self.sample_cap,
            pair_cap: self.pair_cap,
            seed: self.seed,
            outlier_function: match self.outlier_function {
                OutlierArg::LinearRamp => OutlierFunction::LinearRamp,
                OutlierArg::InnerStep => OutlierFunction::InnerStep,
                OutlierArg::OuterStep => OutlierFunction::OuterStep,
            },
        }
    }
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    scores: ScoreFlags,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
enum ScoreArg {
    Simb,
    Stood,
    Io,
    Outlier,
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum GroupArg {
    Features,
    Labels,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = ScoreArg::All)]
    score: ScoreArg,
    /// Comma-separated tables. STood compares the first against the second
    /// (default train,test); other scores run on their concatenation
    /// (default: every table).
    #[arg(long, value_delimiter = ',')]
    splits: Vec<String>,
    #[arg(long, value_enum, default_value_t = GroupArg::Features)]
    group: GroupArg,
    #[command(flatten)]
    scores: ScoreFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    /// Reference dataset preset, e.g. buildings-92.
    #[arg(long, conflicts_with_all = ["manifest", "n"])]
    preset: Option<String>,
    /// Every reference preset.
    #[arg(long, conflicts_with_all = ["preset", "manifest", "n"])]
    all_presets: bool,
    /// Dimensions from a dataset manifest; n is the total row count.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, requires_all = ["shares", "dx", "dy"])]
    n: Option<u64>,
    /// Split shares as train/val/test, e.g. 0.56/0.09/0.35.
    #[arg(long)]
    shares: Option<String>,
    /// Feature dimension: a number or MIN-MAX.
    #[arg(long)]
    dx: Option<String>,
    /// Label dimension: a number or MIN-MAX.
    #[arg(long)]
    dy: Option<String>,
    #[arg(long)]
    name: Option<String>,
    /// Effective feature dimension replacing the largest one.
    #[arg(long)]
    dx_effective: Option<f64>,
    /// Effective label dimension replacing the largest one.
    #[arg(long)]
    dy_effective: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModeArg {
    Union,
    Intersection,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum MatchArg {
    Any,
    All,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    spatial_frac: f64,
    #[arg(long, default_value_t = 0.2)]
    temporal_frac: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Union)]
    mode: ModeArg,
    /// Temporal match: any time component or all of them.
    #[arg(long = "match", value_enum, default_value_t = MatchArg::Any)]
    match_rule: MatchArg,
    /// Share of out-of-distribution points assigned to val.
    #[arg(long, default_value_t = 0.5)]
    val_ratio: f64,
    /// Sample time values in aligned blocks of this many values.
    #[arg(long)]
    block: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the assignment files.
    #[arg(long)]
    out: PathBuf,
    /// Also write the split dataset into OUT/dataset.
    #[arg(long)]
    materialize: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FeaturizerArg {
    Flatten,
    BagOfWords,
    Molecule,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum TaskArg {
    Regression,
    Classification,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = FeaturizerArg::Flatten)]
    featurizer: FeaturizerArg,
    /// Values per atom for the molecule featurizer (element id first).
    #[arg(long, default_value_t = 4)]
    atom_width: usize,
    #[arg(long, value_enum, default_value_t = TaskArg::Regression)]
    task: TaskArg,
    #[arg(long, default_value_t = 1.0)]
    sample_ratio: f64,
    #[arg(long, default_value_t = 20)]
    max_depth: usize,
    #[arg(long, default_value_t = 128)]
    trees: usize,
    /// Features tried per node.
    #[arg(long)]
    max_features: Option<usize>,
    #[arg(long)]
    no_bootstrap: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Common wrapper of every JSON artifact.
#[derive(Serialize)]
struct Artifact<'a, C: Serialize, R: Serialize> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    seed: u64,
    config: C,
    result: R,
}

fn artifact<C: Serialize, R: Serialize>(command: &str, seed: u64, config: C, result: R) -> Result<String> {
    let a = Artifact {
        tool: "stprofile",
        version: stprofile::VERSION,
        command,
        seed,
        config,
        result,
    };
    let mut text = serde_json::to_string_pretty(&a)?;
    text.push('\n');
    Ok(text)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_table(s: &str) -> Result<TableName> {
    TableName::parse(s.trim()).ok_or_else(|| anyhow!("unknown table `{s}` (expected pool, train, val or test)"))
}

fn parse_dimension(s: &str) -> Result<Dimension> {
    let s = s.replace(',', "");
    match s.split_once('-') {
        Some((a, b)) => Ok(Dimension::Range {
            min: a.trim().parse()?,
            max: b.trim().parse()?,
        }),
        None => Ok(Dimension::Fixed(s.trim().parse()?)),
    }
}

fn parse_shares(s: &str) -> Result<SplitShares> {
    let parts: Vec<f64> = s
        .split('/')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("malformed shares `{s}`"))?;
    let [train, val, test] = parts[..] else {
        bail!("shares need three values train/val/test, got `{s}`");
    };
    Ok(SplitShares::new(train, val, test))
}

fn cmd_profile(args: ProfileArgs) -> Result<()> {
    let handle = open_dataset(&args.manifest)?;
    let config = ProfileConfig {
        scores: args.scores.config(),
        batch_size: args.scores.batch_size,
        ..ProfileConfig::default()
    };
    let report = profile::profile(&handle, &config)?;
    let text = artifact("profile", config.scores.seed, &config, &report)?;
    emit(&text, args.out.as_deref())?;
    if args.out.is_some() {
        println!("{}", profile::TABLE_HEADER);
        println!("{}", report.table_row());
        println!("{}", capacity::TABLE_HEADER);
        println!("{}", report.capacity.table_row());
        for n in &report.notes {
            eprintln!("note: {n}");
        }
    }
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let handle = open_dataset(&args.manifest)?;
    let config = args.scores.config();
    let tables: Vec<TableName> = args.splits.iter().map(|s| parse_table(s)).collect::<Result<_>>()?;
    let group = match args.group {
        GroupArg::Features => Group::Features,
        GroupArg::Labels => Group::Labels,
    };
    let batch = args.scores.batch_size;
    let concat = if tables.is_empty() { handle.table_names() } else { tables.clone() };
    let kinds: Vec<ScoreKind> = match args.score {
        ScoreArg::Simb => vec![ScoreKind::Simb],
        ScoreArg::Stood => vec![ScoreKind::Stood],
        ScoreArg::Io => vec![ScoreKind::Io],
        ScoreArg::Outlier => vec![ScoreKind::Outlier],
        ScoreArg::All => ScoreKind::ALL.to_vec(),
    };
    let mut reports: Vec<ScoreReport> = Vec::new();
    for kind in kinds {
        let report = match kind {
            ScoreKind::Simb => simb_score(&DatasetSource::new(&handle, &concat, batch)?, group, &config)?,
            ScoreKind::Outlier => outlier_score(&DatasetSource::new(&handle, &concat, batch)?, group, &config)?,
            ScoreKind::Io => io_score(&DatasetSource::new(&handle, &concat, batch)?, &config)?,
            ScoreKind::Stood => {
                let (a, b) = match tables.as_slice() {
                    [] => (TableName::Train, TableName::Test),
                    [a, b] => (*a, *b),
                    _ if args.score == ScoreArg::All => (TableName::Train, TableName::Test),
                    _ => bail!("STood compares exactly two tables, e.g. --splits train,val"),
                };
                let sa = DatasetSource::new(&handle, &[a], batch)?;
                let sb = DatasetSource::new(&handle, &[b], batch)?;
                stood_score(&sa, &sb, group, &config)?
            }
        };
        println!("{}\t{}\t{}", report.kind, report.group.as_str(), report.overall);
        reports.push(report);
    }
    #[derive(Serialize)]
    struct Cfg<'a> {
        scores: &'a ScoreConfig,
        batch_size: usize,
        splits: &'a [String],
        group: GroupArg,
    }
    let cfg = Cfg {
        scores: &config,
        batch_size: batch,
        splits: &args.splits,
        group: args.group,
    };
    let text = artifact("score", config.seed, cfg, &reports)?;
    match &args.out {
        Some(p) => emit(&text, Some(p)),
        None => Ok(()),
    }
}

fn cmd_capacity(args: CapacityArgs) -> Result<()> {
    let dims: Vec<DatasetDims> = if args.all_presets {
        capacity::reference_presets()
    } else if let Some(name) = &args.preset {
        let known: Vec<String> = capacity::reference_presets().into_iter().map(|d| d.name).collect();
        vec![capacity::preset(name).ok_or_else(|| anyhow!("unknown preset `{name}`; known: {}", known.join(", ")))?]
    } else if let Some(manifest) = &args.manifest {
        let handle = open_dataset(manifest)?;
        let mut n = 0;
        for t in handle.table_names() {
            n += handle.row_count(t).unwrap_or(0);
        }
        vec![DatasetDims::from_schema(handle.schema(), n)?]
    } else if let Some(n) = args.n {
        let shares = parse_shares(args.shares.as_deref().unwrap_or_default())?;
        let dx = parse_dimension(args.dx.as_deref().unwrap_or_default())?;
        let dy = parse_dimension(args.dy.as_deref().unwrap_or_default())?;
        vec![DatasetDims::new(args.name.clone().unwrap_or_else(|| "dataset".into()), n, shares, dx, dy)?]
    } else {
        bail!("give --preset, --all-presets, --manifest or --n with --shares, --dx and --dy");
    };
    let over = DimOverride {
        d_x: args.dx_effective,
        d_y: args.dy_effective,
    };
    let reports = dims
        .iter()
        .map(|d| capacity::capacity_with(d, over))
        .collect::<stprofile::Result<Vec<_>>>()?;
    println!("{}", capacity::TABLE_HEADER);
    for r in &reports {
        println!("{}", r.table_row());
    }
    if let Some(out) = &args.out {
        emit(&artifact("capacity", 0, over, &reports)?, Some(out))?;
    }
    Ok(())
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    let handle = open_dataset(&args.manifest)?;
    let spec = SplitSpec {
        spatial_fraction: args.spatial_frac,
        temporal_fraction: args.temporal_frac,
        combination: match args.mode {
            ModeArg::Union => Combination::Union,
            ModeArg::Intersection => Combination::Intersection,
        },
        temporal_match: match args.match_rule {
            MatchArg::Any => TemporalMatch::AnyComponent,
            MatchArg::All => TemporalMatch::AllComponents,
        },
        val_ratio: args.val_ratio,
        seed: args.seed,
        temporal_block: args.block,
    };
    let assignment = splitter::assign_splits(&handle, &spec)?;
    for w in &assignment.warnings {
        eprintln!("warning: {w}");
    }
    let report = splitter::verify_ood(&assignment, &handle)?;
    let (csv, meta) = splitter::write_assignment(&assignment, &args.out)?;
    let s = report.shares;
    println!("split\trows\tshare");
    println!("train\t{}\t{:.4}", report.counts.train, s.train);
    println!("val\t{}\t{:.4}", report.counts.val, s.val);
    println!("test\t{}\t{:.4}", report.counts.test, s.test);
    println!("assignment: {}", csv.display());
    println!("metadata: {}", meta.display());
    if args.materialize {
        let manifest = splitter::materialize(&handle, &assignment, &args.out.join("dataset"))?;
        println!("dataset: {}", manifest.display());
    }
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<()> {
    let handle = open_dataset(&args.manifest)?;
    let featurizer = match args.featurizer {
        FeaturizerArg::Flatten => Featurizer::Flatten,
        FeaturizerArg::BagOfWords => Featurizer::BagOfWords,
        FeaturizerArg::Molecule => Featurizer::MoleculeAggregate {
            atom_width: args.atom_width,
        },
    };
    let config = RFConfig {
        trees: args.trees,
        max_depth: args.max_depth,
        sample_ratio: args.sample_ratio,
        task: match args.task {
            TaskArg::Regression => TaskKind::Regression,
            TaskArg::Classification => TaskKind::Classification,
        },
        seed: args.seed,
        bootstrap: !args.no_bootstrap,
        max_features: args.max_features,
    };
    let result = benchmark::run_benchmark(&handle, featurizer, &config)?;
    println!("{}", benchmark::TABLE_HEADER);
    println!("{}", result.table_row());
    if let Some(out) = &args.out {
        #[derive(Serialize)]
        struct Cfg<'a> {
            rf: &'a RFConfig,
            featurizer: Featurizer,
        }
        let cfg = Cfg {
            rf: &config,
            featurizer,
        };
        emit(&artifact("benchmark", config.seed, cfg, &result)?, Some(out))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Profile(a) => cmd_profile(a),
        Command::Score(a) => cmd_score(a),
        Command::Capacity(a) => cmd_capacity(a),
        Command::Split(a) => cmd_split(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
