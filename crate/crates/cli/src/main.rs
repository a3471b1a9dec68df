use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};
use rayon::prelude::*;
use serde::Serialize;

use vsc::analysis::{evaluate, summarize, taylor_inequality_check, EvalOptions, CSV_HEADER};
use vsc::baseline::{classic_greedy, imbalance_report};
use vsc::exact::{exact_solve, OracleLimits};
use vsc::generate::{
    corpus_random_spec, corpus_traceroute_spec, generate, imbalance_family, GenKind, GenSpec,
    GraphModel, RandomParams, TracerouteParams,
};
use vsc::greedy::{greedy_solve, GreedyConfig};
use vsc::model::{load_instance, load_solution, save_instance, save_solution, verify_solution};
use vsc::{Error, Instance};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "vsc", version, about = "Validation set cover solver and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the round-based greedy; prints the solution JSON.
    Solve {
        instance: PathBuf,
        /// Write the per-round trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Solve exactly; prints {"opt", "witness"} or exits 3 when the oracle gives up.
    Exact {
        instance: PathBuf,
        #[arg(long, default_value_t = OracleLimits::default().max_sets)]
        max_sets: usize,
        #[arg(long, default_value_t = OracleLimits::default().max_nodes)]
        max_nodes: u64,
    },
    /// Compare ownership-blind set cover with the round-based greedy.
    Baseline {
        instance: PathBuf,
        #[arg(long, default_value_t = OracleLimits::default().max_sets)]
        max_sets: usize,
        #[arg(long, default_value_t = OracleLimits::default().max_nodes)]
        max_nodes: u64,
    },
    /// Generate a seeded instance.
    Gen(GenArgs),
    /// Check a solution against an instance; exit 0 iff every check passes.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Evaluate bounds over a seeded corpus; CSV on stdout.
    Bench {
        /// Inclusive seed range `A..B`.
        #[arg(long, value_parser = parse_seed_range)]
        corpus_seeds: (u64, u64),
        #[arg(long, value_enum, default_value_t = CorpusKind::Random)]
        kind: CorpusKind,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Largest universe for the random corpus.
        #[arg(long, default_value_t = 30)]
        max_n: usize,
        /// Largest set count for the random corpus.
        #[arg(long, default_value_t = 16)]
        max_k: usize,
        /// Skip the per-round residual optima.
        #[arg(long)]
        no_claim: bool,
        /// Write the JSON summary here instead of stderr.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Directory for instances with findings or violations.
        #[arg(long)]
        archive: Option<PathBuf>,
        #[arg(long, default_value_t = OracleLimits::default().max_nodes)]
        max_nodes: u64,
    },
    /// Check 1 + 1/(x-1) >= e^{1/x} for x = 2..=max.
    CheckTaylor {
        #[arg(long)]
        max: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Random,
    Traceroute,
    Imbalance,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusKind {
    Random,
    Traceroute,
}

#[derive(Clone, Copy, ValueEnum)]
enum Graph {
    ErdosRenyi,
    Preferential,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Universe size (random).
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Number of sets (random).
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Number of agents.
    #[arg(long, short = 'm', default_value_t = 2)]
    agents: usize,
    #[arg(long, default_value_t = 1)]
    size_min: usize,
    #[arg(long, default_value_t = 5)]
    size_max: usize,
    #[arg(long, default_value_t = 1)]
    weight_min: u32,
    #[arg(long, default_value_t = 1)]
    weight_max: u32,
    /// Graph nodes (traceroute).
    #[arg(long, default_value_t = 20)]
    nodes: usize,
    #[arg(long, value_enum, default_value_t = Graph::ErdosRenyi)]
    graph: Graph,
    /// Edge probability for G(V, p).
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    /// Links per new node for preferential attachment.
    #[arg(long, default_value_t = 2)]
    attach: usize,
    /// Destinations per agent (traceroute).
    #[arg(long, short = 'd', default_value_t = 5)]
    destinations: usize,
}

fn parse_seed_range(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Oracle(_) => EXIT_UNKNOWN,
            Error::Internal(_) => EXIT_INTERNAL,
            Error::Io(_) => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_USAGE, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::new(EXIT_INTERNAL, e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(EXIT_USAGE, e.to_string())
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    load_instance(open(path)?)
        .map_err(|e| Failure::new(EXIT_VALIDATION, format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn limits(max_sets: usize, max_nodes: u64) -> OracleLimits {
    OracleLimits {
        max_sets,
        max_nodes,
    }
}

fn gen_spec(a: &GenArgs) -> GenSpec {
    let kind = match a.kind {
        Kind::Random | Kind::Imbalance => GenKind::Random(RandomParams {
            n: a.n,
            k: a.k,
            m: a.agents,
            set_size: (a.size_min, a.size_max),
            weight: (a.weight_min, a.weight_max),
        }),
        Kind::Traceroute => GenKind::Traceroute(TracerouteParams {
            nodes: a.nodes,
            graph: match a.graph {
                Graph::ErdosRenyi => GraphModel::ErdosRenyi { p: a.p },
                Graph::Preferential => GraphModel::PreferentialAttachment { attach: a.attach },
            },
            agents: a.agents,
            destinations: a.destinations,
            weight: (a.weight_min, a.weight_max),
        }),
    };
    GenSpec { seed: a.seed, kind }
}

#[allow(clippy::too_many_arguments)]
fn bench(
    (first, last): (u64, u64),
    kind: CorpusKind,
    jobs: usize,
    max_n: usize,
    max_k: usize,
    claim: bool,
    summary_path: Option<PathBuf>,
    archive: Option<PathBuf>,
    max_nodes: u64,
) -> Result<(), Failure> {
    if jobs == 0 {
        return Err(Failure::new(EXIT_USAGE, "--jobs must be at least 1"));
    }
    let opts = EvalOptions {
        limits: OracleLimits {
            max_nodes,
            ..Default::default()
        },
        claim,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::new(EXIT_INTERNAL, e.to_string()))?;
    let seeds: Vec<u64> = (first..=last).collect();
    // par_iter + collect keeps seed order regardless of completion order
    let results: Vec<Result<(Instance, _), Error>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let spec = match kind {
                    CorpusKind::Random => corpus_random_spec(seed, max_n, max_k),
                    CorpusKind::Traceroute => corpus_traceroute_spec(seed),
                };
                let inst = generate(&spec)?;
                let rec = evaluate(&inst, seed, &opts)?;
                Ok((inst, rec))
            })
            .collect()
    });

    let mut records = Vec::with_capacity(results.len());
    let mut csv = csv::Writer::from_writer(io::stdout().lock());
    csv.write_record(CSV_HEADER)?;
    if let Some(dir) = &archive {
        fs::create_dir_all(dir)?;
    }
    for r in results {
        let (inst, rec) = r?;
        csv.write_record(rec.csv_fields())?;
        let hard = rec.hard_violations();
        let findings = rec.bound_findings();
        for h in &hard {
            log::error!("seed {}: hard violation: {h}", rec.seed);
        }
        for f in &findings {
            info!("seed {}: finding: {f}", rec.seed);
        }
        if let (Some(dir), false) = (&archive, hard.is_empty() && findings.is_empty()) {
            let path = dir.join(format!("seed-{}.json", rec.seed));
            save_instance(&inst, BufWriter::new(File::create(path)?))?;
        }
        records.push(rec);
    }
    csv.flush()?;

    let summary = summarize(&records);
    let text = serde_json::to_string(&summary)?;
    match summary_path {
        Some(p) => fs::write(p, text + "\n")?,
        None => eprintln!("{text}"),
    }
    if summary.hard_violations > 0 {
        return Err(Failure::new(
            EXIT_INTERNAL,
            format!("{} instances with hard violations", summary.hard_violations),
        ));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { instance, trace } => {
            let inst = read_instance(&instance)?;
            let cfg = GreedyConfig {
                trace: trace.is_some(),
                ..Default::default()
            };
            let (sol, tr) = greedy_solve(&inst, &cfg)?;
            if let (Some(path), Some(tr)) = (trace, tr) {
                tr.write_jsonl(BufWriter::new(File::create(path)?))?;
            }
            let mut out = io::stdout().lock();
            save_solution(&sol, &mut out)?;
            writeln!(out)?;
        }
        Command::Exact {
            instance,
            max_sets,
            max_nodes,
        } => {
            let inst = read_instance(&instance)?;
            let r = exact_solve(&inst, &limits(max_sets, max_nodes))?;
            print_json(&r)?;
        }
        Command::Baseline {
            instance,
            max_sets,
            max_nodes,
        } => {
            let inst = read_instance(&instance)?;
            let cover = classic_greedy(&inst);
            let report = imbalance_report(&inst, &cover, Some(&limits(max_sets, max_nodes)))?;
            print_json(&report)?;
        }
        Command::Gen(args) => {
            let inst = match args.kind {
                Kind::Imbalance => imbalance_family(args.agents)?,
                _ => generate(&gen_spec(&args))?,
            };
            let mut out = io::stdout().lock();
            save_instance(&inst, &mut out)?;
            writeln!(out)?;
        }
        Command::Verify { instance, solution } => {
            let inst = read_instance(&instance)?;
            let sol = load_solution(open(&solution)?)
                .map_err(|e| Failure::new(EXIT_VALIDATION, format!("{}: {e}", solution.display())))?;
            let report = verify_solution(&inst, &sol);
            print_json(&report)?;
            if !report.ok {
                return Err(Failure::new(EXIT_VALIDATION, "solution failed verification"));
            }
        }
        Command::Bench {
            corpus_seeds,
            kind,
            jobs,
            max_n,
            max_k,
            no_claim,
            summary,
            archive,
            max_nodes,
        } => bench(
            corpus_seeds,
            kind,
            jobs,
            max_n,
            max_k,
            !no_claim,
            summary,
            archive,
            max_nodes,
        )?,
        Command::CheckTaylor { max } => {
            if max < 2 {
                return Err(Failure::new(EXIT_USAGE, "--max must be at least 2"));
            }
            let ok = taylor_inequality_check(max);
            print_json(&ok)?;
            if !ok {
                return Err(Failure::new(EXIT_INTERNAL, "inequality failed"));
            }
        }
    }
    Ok(())
}

fn init_logging() {
    let level = match std::env::var("VSC_LOG").as_deref() {
        Ok("quiet") => LevelFilter::Off,
        Ok("debug") => LevelFilter::Debug,
        Ok("info") => LevelFilter::Info,
        _ => LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("vsc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
