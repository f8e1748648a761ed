//! Command-line front end. All real work lives in the library; this binary
//! parses arguments, wires files to library calls, and maps errors to exit
//! codes (0 success, 1 input error, 2 internal invariant violation).

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use tripart::bench::{run_bench, shape_tag_of, BenchError, BenchQuery};
use tripart::executor::write_tsv;
use tripart::oracle::nested_loop_eval;
use tripart::workload::{generate, write_to_dir, GeneratorConfig, QueryShape};
use tripart::{explain, parse_ntriples, parse_query, Dataset, Strategy};

#[derive(Parser)]
#[command(
    name = "tripart",
    version,
    about = "RDF store with mixed VP / property-table layout"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an N-Triples file and build a dataset directory.
    Load {
        /// N-Triples input file
        input: PathBuf,
        /// Directory to create
        out_dir: PathBuf,
        /// Property-table partition count
        #[arg(long, default_value_t = tripart::dataset::DEFAULT_PARTITIONS)]
        partitions: usize,
    },
    /// Evaluate a query against a dataset; results go to stdout as TSV.
    Query {
        /// Dataset directory written by `load`
        dir: PathBuf,
        /// Query file, or `-` for stdin
        query_file: PathBuf,
        /// mixed | vp | oracle
        #[arg(long, default_value = "mixed")]
        strategy: String,
        /// Print the join tree to stderr before executing
        #[arg(long)]
        explain: bool,
        /// Emit at most N result rows
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Generate a synthetic dataset plus queries of one shape.
    Generate {
        /// star | linear | snowflake | complex
        shape: String,
        /// Directory for data.nt and queries/
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1000)]
        subjects: usize,
        #[arg(long, default_value_t = 8)]
        predicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Time strategies over a directory of .rq files.
    Bench {
        /// Dataset directory written by `load`
        dir: PathBuf,
        /// Directory of query files
        queries_dir: PathBuf,
        /// Comma-separated list: mixed,vp
        #[arg(long, default_value = "mixed,vp")]
        strategies: String,
        /// Runs per query and strategy; the first is warm-up when > 1
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        /// Write the per-query CSV report here
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

macro_rules! from_input_error {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> CliError {
                CliError::input(e.to_string())
            }
        }
    )*};
}
from_input_error!(
    io::Error,
    tripart::ParseError,
    tripart::StorageError,
    tripart::QueryParseError
);

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> CliError {
        CliError {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Load {
            input,
            out_dir,
            partitions,
        } => cmd_load(&input, &out_dir, partitions),
        Command::Query {
            dir,
            query_file,
            strategy,
            explain,
            limit,
        } => cmd_query(&dir, &query_file, &strategy, explain, limit),
        Command::Generate {
            shape,
            out_dir,
            subjects,
            predicates,
            seed,
        } => cmd_generate(&shape, &out_dir, subjects, predicates, seed),
        Command::Bench {
            dir,
            queries_dir,
            strategies,
            repeat,
            report,
        } => cmd_bench(&dir, &queries_dir, &strategies, repeat, report.as_deref()),
    }
}

fn cmd_load(input: &Path, out_dir: &Path, partitions: usize) -> Result<(), CliError> {
    let started = Instant::now();
    let file = fs::File::open(input)?;
    let (triples, dict) = parse_ntriples(io::BufReader::new(file))?;
    let triple_count = triples.len();
    let dict_size = dict.len();
    let dataset = Dataset::build(triples, dict, partitions)?;
    dataset.save(out_dir)?;
    println!("triples:      {triple_count}");
    println!("terms:        {dict_size}");
    println!("on-disk:      {} bytes", dir_size(out_dir)?);
    println!("elapsed:      {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_query(
    dir: &Path,
    query_file: &Path,
    strategy: &str,
    want_explain: bool,
    limit: Option<usize>,
) -> Result<(), CliError> {
    let text = if query_file == Path::new("-") {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        fs::read_to_string(query_file)?
    };
    let query = parse_query(&text)?;
    let dataset = Dataset::load(dir)?;

    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    match strategy {
        "mixed" | "vp" => {
            let strategy = if strategy == "mixed" {
                Strategy::Mixed
            } else {
                Strategy::VpOnly
            };
            // plan first so --explain prints before any execution happens
            let plan = tripart::plan_query(&query, &dataset.dict, &dataset.stats, strategy);
            if want_explain {
                match &plan {
                    Ok(tree) => eprint!("{}", explain(tree)),
                    Err(tripart::PlanError::UnknownPredicate(iri)) => {
                        eprintln!("EMPTY (predicate without data: <{iri}>)")
                    }
                }
            }
            let table = match plan {
                Ok(tree) => tripart::executor::execute(&tree, &query, &dataset).0,
                Err(_) => tripart::BindingTable::new(query.projected_variables()),
            };
            write_tsv(&table, &dataset.dict, limit, &mut out)?;
        }
        "oracle" => {
            if want_explain {
                eprintln!("ORACLE nested-loop evaluation (no plan)");
            }
            let triples = dataset.triples();
            let table = nested_loop_eval(&query, &triples, &dataset.dict);
            write_tsv(&table, &dataset.dict, limit, &mut out)?;
        }
        other => return Err(CliError::input(format!("unknown strategy '{other}'"))),
    }
    out.flush()?;
    Ok(())
}

fn cmd_generate(
    shape: &str,
    out_dir: &Path,
    subjects: usize,
    predicates: usize,
    seed: u64,
) -> Result<(), CliError> {
    let shape = QueryShape::parse(shape).ok_or_else(|| {
        CliError::input(format!(
            "unknown shape '{shape}' (star|linear|snowflake|complex)"
        ))
    })?;
    if subjects == 0 || predicates == 0 {
        return Err(CliError::input(
            "subjects and predicates must be at least 1",
        ));
    }
    let workload = generate(&GeneratorConfig::new(shape, subjects, predicates, seed));
    write_to_dir(&workload, out_dir)?;
    println!(
        "dataset:  {} triples -> {}",
        workload.triples.len(),
        out_dir.join("data.nt").display()
    );
    println!(
        "queries:  {} -> {}",
        workload.queries.len(),
        out_dir.join("queries").display()
    );
    Ok(())
}

fn cmd_bench(
    dir: &Path,
    queries_dir: &Path,
    strategies: &str,
    repeat: usize,
    report_path: Option<&Path>,
) -> Result<(), CliError> {
    let strategies: Vec<Strategy> = strategies
        .split(',')
        .map(|s| match s.trim() {
            "mixed" => Ok(Strategy::Mixed),
            "vp" => Ok(Strategy::VpOnly),
            other => Err(CliError::input(format!("unknown strategy '{other}'"))),
        })
        .collect::<Result<_, _>>()?;
    if strategies.is_empty() {
        return Err(CliError::input("no strategies given"));
    }

    let mut query_files: Vec<PathBuf> = fs::read_dir(queries_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "rq"))
        .collect();
    query_files.sort();
    if query_files.is_empty() {
        return Err(CliError::input(format!(
            "no .rq files in {}",
            queries_dir.display()
        )));
    }
    let mut queries = Vec::with_capacity(query_files.len());
    for path in &query_files {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let query = parse_query(&fs::read_to_string(path)?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        queries.push(BenchQuery {
            shape: shape_tag_of(&id),
            id,
            query,
        });
    }

    let dataset = Dataset::load(dir)?;
    let report = run_bench(&dataset, &queries, &strategies, repeat)?;

    if let Some(path) = report_path {
        fs::write(path, report.to_csv())?;
        println!("report: {}", path.display());
    }
    println!("shape  strategy  mean_ms  queries");
    for (shape, strategy, mean) in report.shape_summary() {
        let count = report
            .entries
            .iter()
            .filter(|e| e.shape == shape && e.strategy == strategy)
            .count();
        println!("{shape:<6} {strategy:<9} {mean:>8.2} {count:>6}");
    }
    Ok(())
}

fn dir_size(dir: &Path) -> io::Result<u64> {
    let mut total = 0;
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let meta = entry.metadata()?;
        total += if meta.is_dir() {
            dir_size(&entry.path())?
        } else {
            meta.len()
        };
    }
    Ok(total)
}
