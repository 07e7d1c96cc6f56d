//! Command-line front end: generate instances, build codebooks from dense
//! matrices, score queries, verify method equivalence and run the scaling
//! benchmark. Exit codes: 0 success, 1 validation or user error, 2 internal
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use pqtopk::bench::{
    emit_plot_script, emit_report, run_scaling_benchmark, BenchConfig, BenchReport, Method,
    ReportFormat,
};
use pqtopk::io::{
    read_dense_matrix, read_instance, read_query_embedding, write_instance,
};
use pqtopk::quantize::{build_pq_codebook, compression_ratio};
use pqtopk::scoring::{
    compute_sub_id_scores, matmul_topk, pq_topk, recjpq_score, DenseEmbeddingMatrix, ItemSubset,
    TopKResult,
};
use pqtopk::synthetic::{default_memory_budget, generate_synthetic_with_budget};
use pqtopk::verify::verify_equivalence;
use pqtopk::PQConfig;

#[derive(Parser)]
#[command(name = "pqtopk", version, about = "Product-quantised top-K item scoring")]
struct Cli {
    /// Seed for all randomised steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for the item-major scan (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Allocation guard, e.g. 8G, 512M or a byte count
    /// (default: 75% of physical memory).
    #[arg(long, global = true, value_name = "SIZE")]
    memory_budget: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Generate(GenerateArgs),
    /// Quantise a dense embedding matrix into an instance file.
    BuildCodebook(BuildCodebookArgs),
    /// Rank items for one query and print "rank item_id score" lines.
    Score(ScoreArgs),
    /// Check that all scoring methods agree on random queries.
    Verify(VerifyArgs),
    /// Measure median scoring latency across catalogue sizes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Catalogue size |I|; accepts scientific notation such as 1e6.
    #[arg(long)]
    items: String,
    /// Number of splits m.
    #[arg(long, default_value_t = 8)]
    splits: usize,
    /// Sub-ids per split b.
    #[arg(long, default_value_t = 256)]
    sub_ids: usize,
    /// Embedding dimension d.
    #[arg(long, default_value_t = 512)]
    dim: usize,
    /// Output instance file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildCodebookArgs {
    /// Input dense matrix file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 8)]
    splits: usize,
    #[arg(long, default_value_t = 256)]
    sub_ids: usize,
    /// Lloyd iteration cap per split.
    #[arg(long, default_value_t = 25)]
    max_iters: usize,
    /// Output instance file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Instance file to score against.
    #[arg(long)]
    instance: PathBuf,
    /// Derive the query embedding from this seed.
    #[arg(long, conflicts_with = "phi_file")]
    phi_seed: Option<u64>,
    /// Read the query embedding from a raw little-endian f32 file.
    #[arg(long)]
    phi_file: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// One of: pqtopk, recjpq, dense.
    #[arg(long)]
    method: String,
    /// Optional text file with one item id per line, sorted ascending.
    #[arg(long)]
    subset_file: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Score deviation tolerance for the dense comparison.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated catalogue sizes, e.g. 1e3,1e4,1e5.
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value_t = 8)]
    splits: usize,
    #[arg(long, default_value_t = 256)]
    sub_ids: usize,
    #[arg(long, default_value_t = 512)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Measured queries per cell.
    #[arg(long, default_value_t = 30)]
    queries: usize,
    /// Discarded warmup queries per cell.
    #[arg(long, default_value_t = 5)]
    warmup: usize,
    /// Comma-separated subset of: dense, recjpq, pqtopk.
    #[arg(long, default_value = "dense,recjpq,pqtopk")]
    methods: String,
    /// Report file to write.
    #[arg(long)]
    out: PathBuf,
    /// Report encoding: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Also write a gnuplot script to this path.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    User(String),
    Internal(String),
}

impl From<pqtopk::Error> for CliError {
    fn from(e: pqtopk::Error) -> Self {
        CliError::User(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

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

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::User(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(message)) => {
            eprintln!("internal error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::User("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }
    let budget = match &cli.memory_budget {
        Some(text) => parse_bytes(text)?,
        None => default_memory_budget(),
    };

    match cli.command {
        Command::Generate(args) => cmd_generate(args, cli.seed, budget),
        Command::BuildCodebook(args) => cmd_build_codebook(args, cli.seed, budget),
        Command::Score(args) => cmd_score(args, cli.seed, budget),
        Command::Verify(args) => cmd_verify(args, cli.seed, budget),
        Command::Bench(args) => cmd_bench(args, cli.seed, budget),
    }
}

fn cmd_generate(args: GenerateArgs, seed: u64, budget: u64) -> CliResult<()> {
    let items = parse_count(&args.items)?;
    let config = PQConfig::new(items, args.splits, args.sub_ids, args.dim)?;
    let (codebook, embeddings, _) = generate_synthetic_with_budget(&config, seed, budget)?;
    write_instance(&args.out, &codebook, &embeddings)?;
    println!(
        "items={} splits={} sub_ids={} dim={} seed={seed}",
        config.num_items, config.num_splits, config.num_sub_ids, config.embed_dim
    );
    println!("code table:      {} bytes", config.code_table_bytes());
    println!("sub-item table:  {} bytes", config.sub_embedding_bytes());
    println!(
        "dense equivalent: {} bytes ({:.1}x compression)",
        config.dense_bytes(),
        compression_ratio(&config)
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_build_codebook(args: BuildCodebookArgs, seed: u64, budget: u64) -> CliResult<()> {
    let matrix = read_dense_matrix(&args.input, budget)?;
    let (codebook, embeddings, report) =
        build_pq_codebook(&matrix, args.splits, args.sub_ids, args.max_iters, seed)?;
    write_instance(&args.out, &codebook, &embeddings)?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    println!(
        "quantised {} items of dim {} into {} splits x {} sub-ids",
        matrix.num_items(),
        matrix.dim(),
        args.splits,
        args.sub_ids
    );
    for (split, (mse, iters)) in report
        .per_split_mse
        .iter()
        .zip(&report.iterations)
        .enumerate()
    {
        println!("split {split}: mse={mse:.6} iterations={iters}");
    }
    println!("total mse: {:.6}", report.total_mse);
    println!(
        "compression: {:.1}x",
        compression_ratio(codebook.config())
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_score(args: ScoreArgs, seed: u64, budget: u64) -> CliResult<()> {
    let (codebook, embeddings) = read_instance(&args.instance, budget)?;
    let config = *codebook.config();

    let phi = match (&args.phi_seed, &args.phi_file) {
        (Some(phi_seed), None) => {
            pqtopk::synthetic::random_sequence_embedding(config.embed_dim, *phi_seed)?
        }
        (None, Some(path)) => read_query_embedding(path, config.embed_dim)?,
        (None, None) => pqtopk::synthetic::random_sequence_embedding(config.embed_dim, seed)?,
        (Some(_), Some(_)) => unreachable!("clap rejects conflicting flags"),
    };

    let subset = match &args.subset_file {
        Some(path) => ItemSubset::Explicit(read_subset_file(path)?),
        None => ItemSubset::All,
    };

    let result: TopKResult = match args.method.as_str() {
        "pqtopk" => {
            let scores = compute_sub_id_scores(&embeddings, &phi)?;
            pq_topk(&codebook, &scores, args.k, &subset)?
        }
        "recjpq" => {
            let scores = compute_sub_id_scores(&embeddings, &phi)?;
            recjpq_score(&codebook, &scores, args.k, &subset)?
        }
        "dense" => {
            let matrix = DenseEmbeddingMatrix::from_reconstruction(&codebook, &embeddings, budget)?;
            matmul_topk(&matrix, &phi, args.k, &subset)?
        }
        other => return Err(pqtopk::Error::UnknownMethod(other.to_string()).into()),
    };

    for (rank, &(item, score)) in result.entries().iter().enumerate() {
        println!("{} {} {}", rank + 1, item, score);
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs, seed: u64, budget: u64) -> CliResult<()> {
    let (codebook, embeddings) = read_instance(&args.instance, budget)?;
    let report = verify_equivalence(
        &codebook,
        &embeddings,
        args.queries,
        args.k,
        args.tolerance,
        seed,
        budget,
    )?;
    println!(
        "{}/{} queries pass (tolerance {:e}, max deviation {:.3e})",
        report.passed, report.queries, args.tolerance, report.max_deviation
    );
    if report.all_passed() {
        Ok(())
    } else {
        for failure in &report.failures {
            eprintln!(
                "mismatch at query {} item {}: {}",
                failure.query, failure.item, failure.detail
            );
        }
        Err(CliError::User(format!(
            "{} of {} queries failed",
            report.queries - report.passed,
            report.queries
        )))
    }
}

fn cmd_bench(args: BenchArgs, seed: u64, budget: u64) -> CliResult<()> {
    let sizes = args
        .sizes
        .split(',')
        .map(parse_count)
        .collect::<CliResult<Vec<u64>>>()?;
    let methods = args
        .methods
        .split(',')
        .map(|name| name.trim().parse::<Method>().map_err(CliError::from))
        .collect::<CliResult<Vec<Method>>>()?;
    let format: ReportFormat = args.format.parse()?;

    let config = BenchConfig {
        sizes,
        num_splits: args.splits,
        num_sub_ids: args.sub_ids,
        embed_dim: args.dim,
        k: args.k,
        queries: args.queries,
        warmup: args.warmup,
        seed,
        methods,
        memory_budget_bytes: budget,
    };
    let report = run_scaling_benchmark(&config)?;

    std::fs::write(&args.out, emit_report(&report, format)?)
        .map_err(|e| CliError::User(format!("writing {}: {e}", args.out.display())))?;
    if let Some(plot_path) = &args.plot {
        std::fs::write(plot_path, emit_plot_script(&report))
            .map_err(|e| CliError::User(format!("writing {}: {e}", plot_path.display())))?;
    }

    print_report_table(&report);
    println!("wrote {}", args.out.display());
    if let Some(plot_path) = &args.plot {
        println!("wrote {}", plot_path.display());
    }
    Ok(())
}

fn print_report_table(report: &BenchReport) {
    println!(
        "m={} b={} d={} K={} queries={} threads={}",
        report.num_splits,
        report.num_sub_ids,
        report.embed_dim,
        report.k,
        report.queries,
        report.threads
    );
    println!(
        "{:<8} {:>12} {:>12} {:>12} {:>12} {:>12}  note",
        "method", "items", "median_ms", "p10_ms", "p90_ms", "est_MB"
    );
    for entry in &report.entries {
        let fmt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.3}"),
            None => "-".to_string(),
        };
        println!(
            "{:<8} {:>12} {:>12} {:>12} {:>12} {:>12.1}  {}",
            entry.method.name(),
            entry.num_items,
            fmt(entry.median_ms),
            fmt(entry.p10_ms),
            fmt(entry.p90_ms),
            entry.est_bytes as f64 / 1e6,
            entry.reason.as_deref().unwrap_or("")
        );
    }
}

fn read_subset_file(path: &PathBuf) -> CliResult<Vec<u64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("reading {}: {e}", path.display())))?;
    let mut ids = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let id: u64 = line.parse().map_err(|_| {
            CliError::User(format!(
                "{}:{}: '{line}' is not an item id",
                path.display(),
                line_no + 1
            ))
        })?;
        ids.push(id);
    }
    Ok(ids)
}

/// Parse a count that may use scientific notation (1e6) or plain digits.
fn parse_count(text: &str) -> CliResult<u64> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CliError::User("empty count".into()));
    }
    if let Ok(v) = text.parse::<u64>() {
        return Ok(v);
    }
    let value: f64 = text
        .parse()
        .map_err(|_| CliError::User(format!("'{text}' is not a count")))?;
    if !value.is_finite() || value < 1.0 || value.fract() != 0.0 || value > 1e18 {
        return Err(CliError::User(format!(
            "'{text}' is not a positive integer count"
        )));
    }
    Ok(value as u64)
}

/// Parse a byte budget: plain bytes or K/M/G suffix (binary units).
fn parse_bytes(text: &str) -> CliResult<u64> {
    let text = text.trim();
    let (digits, multiplier) = match text.chars().last() {
        Some('K' | 'k') => (&text[..text.len() - 1], 1u64 << 10),
        Some('M' | 'm') => (&text[..text.len() - 1], 1u64 << 20),
        Some('G' | 'g') => (&text[..text.len() - 1], 1u64 << 30),
        _ => (text, 1),
    };
    let value: u64 = digits
        .trim()
        .parse()
        .map_err(|_| CliError::User(format!("'{text}' is not a byte size")))?;
    Ok(value.saturating_mul(multiplier))
}
