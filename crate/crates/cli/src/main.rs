//! Command-line front end: synthetic data generation, pairwise distance
//! matrices, clustering, and cross-metric pair reports.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use medmetrics::{
    build_frequency_table, build_tree, compute_pairwise, consensus_kmeans, consensus_partition,
    cross_metric_report, embed_2d, generate, load_records, smallest_pairs, summarize_clusters,
    write_embedding_csv, write_partition_csv, write_summary_csv, write_trees, DistanceMatrix,
    Error, MetricSpec, NormalizeMode, PatientDataset, SynthParams,
};

#[derive(Parser)]
#[command(
    name = "medmetrics",
    version,
    about = "Distance metrics and clustering over hierarchical patient-event records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic patient-event CSV with planted groups
    Gen(GenArgs),
    /// Compute a pairwise distance matrix under one metric
    Dist(DistArgs),
    /// Cluster patients; writes partition, summary, and 2-D embedding CSVs
    Cluster(ClusterArgs),
    /// Tabulate normalized distances under every metric for selected pairs
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of patients
    #[arg(long, default_value_t = 60)]
    patients: usize,
    /// Size of the event-code vocabulary
    #[arg(long, default_value_t = 12)]
    codes: usize,
    /// Number of planted similar-patient groups
    #[arg(long, default_value_t = 3)]
    groups: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output records CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DistArgs {
    /// Patient-event records CSV
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    metric: MetricName,
    /// Minkowski order (default 3) or pq-gram stem size (default 1)
    #[arg(long)]
    p: Option<f64>,
    /// pq-gram base size (default 3)
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, value_enum, default_value_t = Normalize::Native)]
    normalize: Normalize,
    /// Output matrix CSV path
    #[arg(long)]
    out: PathBuf,
    /// Also write the patient trees, one bracket serialization per line
    #[arg(long)]
    trees_out: Option<PathBuf>,
    /// Abort on malformed rows instead of skipping them
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct ClusterArgs {
    /// Patient-event records CSV
    #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
    input: Option<PathBuf>,
    #[arg(
        long,
        value_enum,
        required_unless_present = "matrix",
        conflicts_with = "matrix"
    )]
    metric: Option<MetricName>,
    /// Minkowski order (default 3) or pq-gram stem size (default 1)
    #[arg(long, conflicts_with = "matrix")]
    p: Option<f64>,
    /// pq-gram base size (default 3)
    #[arg(long, conflicts_with = "matrix")]
    q: Option<usize>,
    /// Precomputed (normalized) distance-matrix CSV; skips ingestion
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Number of clusters
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Majority vote over this many seeded runs
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Normalize::Native, conflicts_with = "matrix")]
    normalize: Normalize,
    #[arg(long, value_enum, default_value_t = Algo::Kmedoids)]
    algo: Algo,
    /// Output directory for partition.csv, summary.csv, embedding.csv
    #[arg(long)]
    out: PathBuf,
    /// Abort on malformed rows instead of skipping them
    #[arg(long, conflicts_with = "matrix")]
    strict: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Patient-event records CSV
    #[arg(long)]
    input: PathBuf,
    /// Patient-id pair to report; repeat the flag for more pairs
    #[arg(long = "pair", num_args = 2, value_names = ["ID_A", "ID_B"], action = clap::ArgAction::Append)]
    pair: Vec<String>,
    /// Without --pair: report the N closest pairs by normalized Euclidean distance
    #[arg(long, default_value_t = 16, conflicts_with = "pair")]
    smallest: usize,
    #[arg(long, value_enum, default_value_t = Normalize::Native)]
    normalize: Normalize,
    /// Output report CSV path
    #[arg(long)]
    out: PathBuf,
    /// Abort on malformed rows instead of skipping them
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricName {
    Euclidean,
    Minkowski,
    Manhattan,
    Hamming,
    Ted,
    Pqgram,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Normalize {
    Native,
    Minmax,
}

impl From<Normalize> for NormalizeMode {
    fn from(mode: Normalize) -> NormalizeMode {
        match mode {
            Normalize::Native => NormalizeMode::Native,
            Normalize::Minmax => NormalizeMode::MinMax,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Kmedoids,
    Kmeans,
}

/// Failure with the exit code it should map to: 1 for data errors, 2 for
/// usage errors.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::InvalidParameter(_) | Error::UnknownId(_) => 2,
            _ => 1,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Dist(args) => cmd_dist(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|err| {
        CliError::usage(format!("cannot open input file {}: {err}", path.display()))
    })
}

/// Renders a report into memory, then writes the file in one shot so partial
/// output never survives an error.
fn write_file<F>(path: &Path, render: F) -> Result<(), CliError>
where
    F: FnOnce(&mut Vec<u8>) -> medmetrics::Result<()>,
{
    let mut buf = Vec::new();
    render(&mut buf)?;
    fs::write(path, &buf)
        .map_err(|err| CliError::data(format!("cannot write {}: {err}", path.display())))
}

fn load_dataset(path: &Path, strict: bool) -> Result<PatientDataset, CliError> {
    let (dataset, summary) = load_records(open_input(path)?, strict)?;
    if summary.rows_skipped > 0 {
        eprintln!("warning: skipped {} malformed row(s)", summary.rows_skipped);
    }
    Ok(dataset)
}

fn metric_spec(
    name: MetricName,
    p: Option<f64>,
    q: Option<usize>,
) -> Result<MetricSpec, CliError> {
    let spec = match name {
        MetricName::Minkowski => {
            if q.is_some() {
                return Err(CliError::usage("--q only applies to --metric pqgram"));
            }
            MetricSpec::Minkowski { p: p.unwrap_or(3.0) }
        }
        MetricName::Pqgram => {
            let p = p.unwrap_or(1.0);
            if p.fract() != 0.0 || !(1.0..=1e6).contains(&p) {
                return Err(CliError::usage(format!(
                    "--p must be an integer >= 1 for pqgram, got {p}"
                )));
            }
            MetricSpec::PqGram {
                p: p as usize,
                q: q.unwrap_or(3),
            }
        }
        other => {
            if p.is_some() || q.is_some() {
                return Err(CliError::usage(
                    "--p/--q only apply to --metric minkowski and --metric pqgram",
                ));
            }
            match other {
                MetricName::Euclidean => MetricSpec::Euclidean,
                MetricName::Manhattan => MetricSpec::Manhattan,
                MetricName::Hamming => MetricSpec::Hamming,
                MetricName::Ted => MetricSpec::EditDistance,
                MetricName::Minkowski | MetricName::Pqgram => unreachable!(),
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let output = generate(&SynthParams {
        patients: args.patients,
        codes: args.codes,
        groups: args.groups,
        seed: args.seed,
    })?;
    fs::write(&args.out, output.csv.as_bytes())
        .map_err(|err| CliError::data(format!("cannot write {}: {err}", args.out.display())))?;
    let rows = output.csv.lines().count().saturating_sub(1);
    println!(
        "wrote {rows} rows for {} patients to {}",
        args.patients,
        args.out.display()
    );
    Ok(())
}

fn cmd_dist(args: DistArgs) -> Result<(), CliError> {
    let metric = metric_spec(args.metric, args.p, args.q)?;
    let dataset = load_dataset(&args.input, args.strict)?;
    if let Some(trees_path) = &args.trees_out {
        let trees: Vec<_> = dataset.patients().iter().map(build_tree).collect();
        write_file(trees_path, |w| write_trees(w, &trees))?;
    }
    let run = compute_pairwise(&dataset, &metric, args.normalize.into())?;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for d in run.raw.off_diagonal() {
        min = min.min(d);
        max = max.max(d);
    }
    write_file(&args.out, |w| run.normalized.write_csv(w))?;
    println!(
        "n={} metric={} raw_min={min:.6} raw_max={max:.6}",
        dataset.len(),
        metric.tag()
    );
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> Result<(), CliError> {
    let (matrix, dataset) = match (&args.matrix, &args.input) {
        (Some(path), None) => {
            let matrix = DistanceMatrix::read_csv(open_input(path)?, "precomputed")?;
            (matrix, None)
        }
        (None, Some(input)) => {
            let name = args.metric.expect("clap requires --metric with --input");
            let metric = metric_spec(name, args.p, args.q)?;
            let dataset = load_dataset(input, args.strict)?;
            let run = compute_pairwise(&dataset, &metric, args.normalize.into())?;
            (run.normalized, Some(dataset))
        }
        _ => unreachable!("clap requires exactly one of --input/--matrix"),
    };

    let (assignment, cost) = match args.algo {
        Algo::Kmedoids => {
            let partition = consensus_partition(&matrix, args.k, args.restarts, args.seed)?;
            (partition.assignment().to_vec(), partition.cost())
        }
        Algo::Kmeans => {
            let dataset = dataset.as_ref().ok_or_else(|| {
                CliError::usage("--algo kmeans needs --input records, not a precomputed --matrix")
            })?;
            let table = build_frequency_table(dataset)?;
            let run = consensus_kmeans(&table.rows, &table.patient_ids, args.k, args.restarts, args.seed)?;
            (run.assignment().to_vec(), run.cost())
        }
    };

    let summary = summarize_clusters(&assignment, args.k, &matrix)?;
    let coords = embed_2d(&matrix);
    fs::create_dir_all(&args.out)
        .map_err(|err| CliError::data(format!("cannot create {}: {err}", args.out.display())))?;
    write_file(&args.out.join("partition.csv"), |w| {
        write_partition_csv(w, matrix.ids(), &assignment, &summary)
    })?;
    write_file(&args.out.join("summary.csv"), |w| {
        write_summary_csv(w, &summary)
    })?;
    write_file(&args.out.join("embedding.csv"), |w| {
        write_embedding_csv(w, matrix.ids(), &coords, &assignment)
    })?;

    let algo = match args.algo {
        Algo::Kmedoids => "kmedoids",
        Algo::Kmeans => "kmeans",
    };
    println!(
        "n={} k={} restarts={} seed={} algo={algo} cost={cost:.6}",
        matrix.len(),
        args.k,
        args.restarts,
        args.seed
    );
    for stats in &summary.clusters {
        println!(
            "cluster {}: count={} mean_within={:.6} role={}",
            stats.index, stats.count, stats.mean_within, stats.role
        );
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.input, args.strict)?;
    let mode: NormalizeMode = args.normalize.into();
    let specs = [
        MetricSpec::Euclidean,
        MetricSpec::Minkowski { p: 3.0 },
        MetricSpec::Manhattan,
        MetricSpec::Hamming,
        MetricSpec::EditDistance,
        MetricSpec::PqGram { p: 1, q: 3 },
        MetricSpec::PqGram { p: 2, q: 3 },
    ];
    let mut matrices = Vec::with_capacity(specs.len());
    for spec in &specs {
        matrices.push(compute_pairwise(&dataset, spec, mode)?.normalized);
    }
    let pairs: Vec<(String, String)> = if args.pair.is_empty() {
        smallest_pairs(&matrices[0], args.smallest)
            .into_iter()
            .map(|p| (p.a, p.b))
            .collect()
    } else {
        args.pair
            .chunks_exact(2)
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect()
    };
    let refs: Vec<&DistanceMatrix> = matrices.iter().collect();
    let report = cross_metric_report(&refs, &pairs)?;
    write_file(&args.out, |w| report.write_csv(w))?;
    println!("wrote {} pair(s) to {}", report.rows.len(), args.out.display());
    Ok(())
}
