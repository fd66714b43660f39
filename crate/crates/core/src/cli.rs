//! The `nnm` command-line tool.
//!
//! All randomness comes from `--seed`, split into independent streams by
//! component name: `init` (starting states), `split` (held-out ratings),
//! `eval` (sampled negatives), `random-baseline` and `kmedoids`. Results go to
//! stdout or the named files and are identical for identical inputs and
//! flags; timings go to stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bridge::{nmf_to_nnm, reduce_exact_nmf, NonnegFactorization, DEFAULT_BRIDGE_TOL};
use crate::dataset::RatingDataset;
use crate::error::{Error, Result};
use crate::eval::{evaluate_topn, random_scores, split_dataset, toppop_scores, EvalConfig, EvalMode, Scorer};
use crate::formats::{format_instance, read_matrix_csv};
use crate::ingest::{ingest, IngestManifest, SourceFormat};
use crate::model::{read_model, serialize_model, validate_model, NNModel, SIMPLEX_TOL};
use crate::optimizer::{train, TrainConfig};
use crate::rng::derive_seed;
use crate::similarity::{cluster_representatives, item_delta, kmedoids_items, tvd};

#[derive(Parser, Debug)]
#[command(name = "nnm", version, about = "Normalized nonnegative models for item recommendation")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log per-sweep objectives and other progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a ratings file and report its size; optionally save the ID maps.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        /// Write the manifest (ID maps and counts) as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a binary-mode model.
    Train(TrainArgs),
    /// Top-N recall/precision of a model and baselines on the held-out split.
    Evaluate(EvaluateArgs),
    /// Nearest users or items by total variational distance.
    Similar(SimilarArgs),
    /// Group items by k-medoids under the item distance.
    Cluster(ClusterArgs),
    /// Convert between factorizations and models.
    #[command(subcommand)]
    Convert(ConvertCommand),
    /// Print a model's header and validation report.
    Inspect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = SIMPLEX_TOL)]
        tol: f64,
    },
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Ratings file, or a directory containing ratings.dat, u.data or ratings.csv.
    #[arg(long)]
    data: PathBuf,
    /// Input format (guessed from the file name if omitted).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Number of rating levels Z.
    #[arg(long, default_value_t = 5)]
    levels: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Movielens1m,
    Movielens100k,
    CsvTriples,
}

impl From<FormatArg> for SourceFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Movielens1m => SourceFormat::Movielens1m,
            FormatArg::Movielens100k => SourceFormat::Movielens100k,
            FormatArg::CsvTriples => SourceFormat::CsvTriples,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SplitArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of ratings held out for testing.
    #[arg(long, default_value_t = 0.014)]
    test_fraction: f64,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Train on every rating instead of holding out a test split.
    #[arg(long)]
    no_split: bool,
    /// Model dimension D.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    dim: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    sweeps: u64,
    #[arg(long, default_value_t = 200)]
    subproblem_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    subproblem_tol: f64,
    /// Stop once a sweep improves the objective by less than this fraction.
    #[arg(long)]
    early_stop: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Write one `sweep=.. half=.. objective=..` line per half-sweep.
    #[arg(long)]
    objective_log: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum ModeArg {
    All,
    LongTail,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Baseline {
    Toppop,
    Random,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    split: SplitArgs,
    #[arg(long, default_value_t = 20)]
    max_n: usize,
    /// Unrated items sampled per test case.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Share of most-rated items dropped in long-tail mode.
    #[arg(long, default_value_t = 0.06)]
    head_fraction: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    /// Also evaluate these baselines on the same sampled items.
    #[arg(long, value_enum)]
    baseline: Vec<Baseline>,
    /// Write `<scorer>-<mode>.json`, `.csv` and `-cases.csv` here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimilarArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, conflicts_with = "item", required_unless_present = "item")]
    user: Option<String>,
    #[arg(long)]
    item: Option<String>,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Ratings the model was trained on; enables raw IDs.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    levels: usize,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    k: usize,
    /// Representative items listed per cluster.
    #[arg(long, default_value_t = 3)]
    representatives: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    /// Ratings for raw IDs and popularity.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    levels: usize,
    /// Write the `item,cluster` assignment here.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum ConvertCommand {
    /// Rescale a nonnegative factorization A^T B into a categorical model.
    NmfToNnm {
        /// D x U matrix CSV.
        #[arg(long)]
        a: PathBuf,
        /// D x (I*Z) matrix CSV, columns grouped by item.
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        items: usize,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = DEFAULT_BRIDGE_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Row-normalize a nonnegative matrix into a one-item probability table.
    Reduce {
        #[arg(long)]
        m: PathBuf,
        /// Target dimension (default: numerical rank of M).
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses the process arguments and runs the command.
pub fn run() -> ExitCode {
    run_with(std::env::args_os())
}

pub fn run_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let start = Instant::now();
    match dispatch(cli.command, cli.verbose) {
        Ok(()) => {
            eprintln!("elapsed {:.2?}", start.elapsed());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command, verbose: bool) -> Result<()> {
    match command {
        Command::Ingest { data, out } => cmd_ingest(&data, out.as_deref()),
        Command::Train(args) => cmd_train(&args, verbose),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Similar(args) => cmd_similar(&args),
        Command::Cluster(args) => cmd_cluster(&args),
        Command::Convert(c) => cmd_convert(&c),
        Command::Inspect { model, tol } => cmd_inspect(&model, tol),
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn load(data: &DataArgs) -> Result<(RatingDataset, IngestManifest)> {
    ingest(&data.data, data.format.map(Into::into), data.levels)
}

fn cmd_ingest(data: &DataArgs, out: Option<&Path>) -> Result<()> {
    let (_, manifest) = load(data)?;
    println!("source = {}", manifest.source.display());
    println!("format = {}", manifest.format);
    println!("users = {}", manifest.num_users());
    println!("items = {}", manifest.num_items());
    println!("ratings = {}", manifest.num_ratings);
    println!("rating_levels = {}", manifest.rating_levels);
    println!("duplicates = {}", manifest.duplicates);
    if let Some(out) = out {
        write_file(out, manifest.to_json())?;
    }
    Ok(())
}

fn split(dataset: RatingDataset, split: &SplitArgs) -> Result<RatingDataset> {
    split_dataset(dataset, split.test_fraction, derive_seed(split.seed, "split"))
}

fn cmd_train(args: &TrainArgs, verbose: bool) -> Result<()> {
    let (dataset, manifest) = load(&args.data)?;
    let dataset = if args.no_split { dataset } else { split(dataset, &args.split)? };
    let config = TrainConfig {
        dim: args.dim as usize,
        max_sweeps: args.sweeps as usize,
        subproblem_max_iters: args.subproblem_iters,
        subproblem_tol: args.subproblem_tol,
        seed: derive_seed(args.split.seed, "init"),
        objective_log: verbose,
        early_stop: args.early_stop,
    };
    println!("data = {} ({})", manifest.source.display(), manifest.format);
    println!(
        "config: dim={} sweeps={} subproblem_iters={} subproblem_tol={} seed={} test_fraction={} split={} early_stop={:?}",
        config.dim,
        config.max_sweeps,
        config.subproblem_max_iters,
        config.subproblem_tol,
        args.split.seed,
        args.split.test_fraction,
        !args.no_split,
        config.early_stop
    );
    println!(
        "train ratings = {} test ratings = {}",
        dataset.train_indices().len(),
        dataset.test_indices().len()
    );
    let start = Instant::now();
    let out = train(&dataset, &config)?;
    eprintln!("training took {:.2?}", start.elapsed());
    write_file(&args.out, serialize_model(&out.model))?;
    if let Some(path) = &args.objective_log {
        let mut log = format!("initial objective={}\n", out.initial_objective);
        for t in &out.trace {
            writeln!(log, "{t}").unwrap();
        }
        write_file(path, log)?;
    }
    println!("initial objective = {}", out.initial_objective);
    println!("final objective = {}", out.final_objective());
    println!("model = {}", args.out.display());
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let (dataset, _) = load(&args.data)?;
    let dataset = split(dataset, &args.split)?;
    if model.num_users() != dataset.num_users() || model.num_items() != dataset.num_items() {
        return Err(Error::invalid(format!(
            "model has {} users and {} items but the dataset has {} and {}",
            model.num_users(),
            model.num_items(),
            dataset.num_users(),
            dataset.num_items()
        )));
    }
    let base = EvalConfig {
        n_sampled_unrated: args.samples,
        max_n: args.max_n,
        test_fraction: args.split.test_fraction,
        longtail_head_fraction: args.head_fraction,
        seed: derive_seed(args.split.seed, "eval"),
        mode: EvalMode::AllItems,
    };
    base.validate()?;
    println!(
        "config: seed={} test_fraction={} samples={} max_n={} head_fraction={} mode={:?}",
        args.split.seed, args.split.test_fraction, args.samples, args.max_n, args.head_fraction, args.mode
    );
    let modes: &[(EvalMode, &str)] = match args.mode {
        ModeArg::All => &[(EvalMode::AllItems, "all")],
        ModeArg::LongTail => &[(EvalMode::LongTail, "long-tail")],
        ModeArg::Both => &[(EvalMode::AllItems, "all"), (EvalMode::LongTail, "long-tail")],
    };
    let toppop = toppop_scores(&dataset);
    let random = random_scores(derive_seed(args.split.seed, "random-baseline"));
    let mut scorers: Vec<&dyn Scorer> = vec![&model];
    for b in &args.baseline {
        scorers.push(match b {
            Baseline::Toppop => &toppop,
            Baseline::Random => &random,
        });
    }
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    println!("scorer,mode,eligible,recall@{n},precision@{n},rmse,mae", n = args.max_n);
    for &(mode, label) in modes {
        for scorer in &scorers {
            let report = evaluate_topn(*scorer, &dataset, &EvalConfig { mode, ..base.clone() })?;
            let show = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
            println!(
                "{},{label},{},{},{},{},{}",
                report.scorer,
                report.eligible_test_cases,
                report.recall[args.max_n - 1],
                report.precision[args.max_n - 1],
                show(report.rmse),
                show(report.mae)
            );
            match &args.out_dir {
                Some(dir) => {
                    let stem = format!("{}-{label}", report.scorer);
                    write_file(&dir.join(format!("{stem}.json")), report.to_json())?;
                    write_file(&dir.join(format!("{stem}.csv")), report.curve_csv())?;
                    write_file(&dir.join(format!("{stem}-cases.csv")), report.cases_csv())?;
                }
                None => {
                    println!("# {} {label}", report.scorer);
                    print!("{}", report.curve_csv());
                }
            }
        }
    }
    Ok(())
}

struct Ids {
    users: Vec<String>,
    items: Vec<String>,
}

impl Ids {
    fn for_model(model: &NNModel, data: Option<&Path>, levels: usize) -> Result<Self> {
        match data {
            Some(path) => {
                let (_, m) = ingest(path, None, levels)?;
                if m.num_users() != model.num_users() || m.num_items() != model.num_items() {
                    return Err(Error::invalid("model does not match the dataset's users and items"));
                }
                Ok(Ids {
                    users: m.user_ids,
                    items: m.item_ids,
                })
            }
            None => Ok(Ids {
                users: (0..model.num_users()).map(|u| u.to_string()).collect(),
                items: (0..model.num_items()).map(|i| i.to_string()).collect(),
            }),
        }
    }

    fn find(ids: &[String], raw: &str, kind: &str) -> Result<usize> {
        ids.iter()
            .position(|id| id == raw)
            .ok_or_else(|| Error::invalid(format!("unknown {kind} ID {raw:?}")))
    }
}

fn cmd_similar(args: &SimilarArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let ids = Ids::for_model(&model, args.data.as_deref(), args.levels)?;
    let (names, deltas, target) = if let Some(raw) = &args.user {
        let u = Ids::find(&ids.users, raw, "user")?;
        let p = &model.users()[u];
        let d = model
            .users()
            .iter()
            .map(|q| tvd(p, q))
            .collect::<Result<Vec<_>>>()?;
        (&ids.users, d, u)
    } else {
        let raw = args.item.as_deref().expect("clap requires --user or --item");
        let i = Ids::find(&ids.items, raw, "item")?;
        let e = model.item_outcomes(i)?;
        let d = (0..model.num_items())
            .map(|j| item_delta(&e, &model.item_outcomes(j)?))
            .collect::<Result<Vec<_>>>()?;
        (&ids.items, d, i)
    };
    let mut order: Vec<usize> = (0..deltas.len()).filter(|&j| j != target).collect();
    order.sort_by(|&a, &b| deltas[a].total_cmp(&deltas[b]).then(a.cmp(&b)));
    println!("id,similarity,delta");
    for &j in order.iter().take(args.top) {
        println!("{},{},{}", names[j], 1.0 - deltas[j], deltas[j]);
    }
    Ok(())
}

fn cmd_cluster(args: &ClusterArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let (ids, popularity) = match &args.data {
        Some(path) => {
            let (dataset, m) = ingest(path, None, args.levels)?;
            if m.num_items() != model.num_items() {
                return Err(Error::invalid("model does not match the dataset's items"));
            }
            (m.item_ids, dataset.item_popularity())
        }
        None => (
            (0..model.num_items()).map(|i| i.to_string()).collect(),
            vec![0; model.num_items()],
        ),
    };
    if args.k < 1 || args.k > model.num_items() {
        return Err(Error::invalid(format!(
            "k must be between 1 and the number of items ({}), got {}",
            model.num_items(),
            args.k
        )));
    }
    println!(
        "config: k={} representatives={} seed={} max_rounds={}",
        args.k, args.representatives, args.seed, args.max_rounds
    );
    let clustering = kmedoids_items(&model, args.k, derive_seed(args.seed, "kmedoids"), args.max_rounds)?;
    let reps = cluster_representatives(&clustering, &popularity, args.representatives)?;
    let mut csv = String::from("item,cluster\n");
    for (i, c) in clustering.assignment.iter().enumerate() {
        writeln!(csv, "{},{c}", ids[i]).unwrap();
    }
    write_file(&args.out, csv)?;
    println!("total_cost = {}", clustering.total_cost);
    println!("rounds = {}", clustering.cost_history.len() - 1);
    for (c, list) in reps.iter().enumerate() {
        let size = clustering.assignment.iter().filter(|&&a| a == c).count();
        let names: Vec<&str> = list.iter().map(|&i| ids[i].as_str()).collect();
        println!("cluster {c}: size={size} representatives={}", names.join(" "));
    }
    Ok(())
}

fn cmd_convert(command: &ConvertCommand) -> Result<()> {
    match command {
        ConvertCommand::NmfToNnm {
            a,
            b,
            items,
            levels,
            tol,
            out,
        } => {
            let a = read_matrix_csv(a)?;
            let b = read_matrix_csv(b)?;
            if b.ncols() != items * levels {
                return Err(Error::invalid(format!(
                    "B has {} columns, expected items * levels = {}",
                    b.ncols(),
                    items * levels
                )));
            }
            let fact = NonnegFactorization::new(a, b, *levels)?;
            let model = nmf_to_nnm(&fact, *tol)?;
            write_file(out, serialize_model(&model))?;
            println!(
                "model = {} (D={} U={} I={} Z={})",
                out.display(),
                model.dim(),
                model.num_users(),
                model.num_items(),
                model.levels()
            );
        }
        ConvertCommand::Reduce { m, rank, out } => {
            let m = read_matrix_csv(m)?;
            let instance = reduce_exact_nmf(&m, *rank)?;
            write_file(out, format_instance(&instance))?;
            println!(
                "instance = {} (U={} I=1 Z={} D={})",
                out.display(),
                instance.table.num_users(),
                instance.table.levels(),
                instance.target_dimension
            );
        }
    }
    Ok(())
}

fn cmd_inspect(path: &Path, tol: f64) -> Result<()> {
    let model = read_model(path)?;
    println!("mode = {}", model.mode());
    println!("dim = {}", model.dim());
    println!("users = {}", model.num_users());
    println!("items = {}", model.num_items());
    println!("levels = {}", model.levels());
    let violations = validate_model(&model, tol);
    if violations.is_empty() {
        println!("valid (tol {tol})");
    } else {
        println!("{} violations (tol {tol})", violations.len());
        for v in violations.iter().take(20) {
            println!("  {v}");
        }
    }
    Ok(())
}
