use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lipgo::diagonal::{run_multidim_diagonal, write_partition_trace, DiagonalParams};
use lipgo::gkls::{preset_delta, read_manifest, write_manifest, GklsClass, GklsClassSpec, GklsFunction, Preset};
use lipgo::harness::{
    emit_report, parse_methods, render_csv, run_benchmark, summarize, BenchmarkConfig, Method, ReportFormat,
    DEFAULT_CAP,
};
use lipgo::testfns::builtin;
use lipgo::{Error, Objective, Result, SolverResult, StoppingCriteria};

#[derive(Parser)]
#[command(name = "lipgo", version, about = "Lipschitz global optimization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark runs over a class manifest.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// GKLS class generation.
    #[command(subcommand)]
    Gkls(GklsCommand),
    /// Minimize one problem and print the outcome.
    Solve(SolveArgs),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run methods on every function of a class and write table.csv,
    /// records.json and operating-characteristic files.
    Run(BenchArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated method names, e.g. direct,direct-l,diag-new.
    #[arg(long)]
    methods: String,
    /// Class manifest written by `gkls dump`.
    #[arg(long)]
    class: PathBuf,
    /// Accuracy coefficient; defaults to the preset for the class dimension.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum GklsCommand {
    /// Generate a class and print its manifest.
    Dump(DumpArgs),
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long)]
    n: usize,
    /// Number of minima, counting the paraboloid vertex.
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, value_parser = parse_preset)]
    preset: Preset,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// A builtin name (sine1d, sphere2d, branin, six-hump) or `manifest:<index>`.
    #[arg(long)]
    problem: String,
    /// Manifest read for `manifest:<index>` problems.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    budget: usize,
    /// Write the final diagonal partition here (diag-new only).
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_class(path: &Path) -> Result<GklsClass> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_manifest(BufReader::new(file))
}

fn bench(args: BenchArgs) -> Result<()> {
    let methods = parse_methods(&args.methods)?;
    let class = load_class(&args.class)?;
    let n = class.spec.dim;
    let delta = match args.delta.or_else(|| preset_delta(n)) {
        Some(d) => d,
        None => return Err(Error::Input(format!("no preset accuracy for dimension {n}; pass --delta"))),
    };
    let mut config = BenchmarkConfig::new(delta, args.cap);
    if let Some(jobs) = args.jobs {
        config = config.with_jobs(jobs);
    }
    let records = run_benchmark(&methods, &class, &config)?;
    for r in records.iter().filter(|r| r.error.is_some()) {
        eprintln!("warning: {} on function {} failed: {}", r.method, r.function, r.error.as_deref().unwrap_or(""));
    }
    let files = emit_report(&records, &args.out, &ReportFormat::ALL)?;
    print!("{}", render_csv(&summarize(&records)?));
    eprintln!("wrote {} files to {}", files.len(), args.out.display());
    Ok(())
}

fn dump(args: DumpArgs) -> Result<()> {
    let spec = GklsClassSpec::preset(args.n, args.preset, args.seed)?.with_minima(args.m)?;
    let class = GklsClass::generate(spec)?;
    match args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(&path)?);
            write_manifest(&mut w, &class)?;
            w.flush()?;
        }
        None => write_manifest(&mut io::stdout().lock(), &class)?,
    }
    Ok(())
}

fn report(result: &SolverResult, known: f64) {
    println!("best_value {:?}", result.best_value);
    println!("best_point {:?}", result.best_point);
    println!("known_minimum {known:?}");
    println!("gap {:e}", result.best_value - known);
    println!("trials {}", result.trials_used);
    println!("hyperintervals {}", result.hyperintervals_generated);
    println!("iterations {}", result.iterations);
    println!("termination {:?}", result.termination);
}

fn solve(args: SolveArgs) -> Result<()> {
    let stop = StoppingCriteria::trials(args.budget);
    let (domain, f, known): (_, Box<dyn Fn(&[f64]) -> f64>, f64) = match args.problem.strip_prefix("manifest:") {
        Some(idx) => {
            let path = args.manifest.as_ref().ok_or_else(|| Error::Input("manifest problems need --manifest".into()))?;
            let class = load_class(path)?;
            let idx: usize = idx.parse().map_err(|_| Error::Input(format!("bad function index `{idx}`")))?;
            let g: GklsFunction = class
                .functions
                .get(idx.wrapping_sub(1))
                .cloned()
                .ok_or_else(|| Error::Input(format!("function index {idx} outside 1..={}", class.functions.len())))?;
            let known = g.global().value;
            (g.domain.clone(), Box::new(move |x: &[f64]| g.value(x)), known)
        }
        None => {
            let b = builtin(&args.problem)?;
            (b.domain, Box::new(b.f), b.global_value)
        }
    };
    let mut objective = Objective::new(domain.clone(), |x| f(x));
    match (&args.trace, args.method) {
        (Some(path), Method::DiagNew) => {
            let run = run_multidim_diagonal(&mut objective, DiagonalParams::default(), &stop)?;
            let mut w = BufWriter::new(File::create(path)?);
            write_partition_trace(&mut w, &run.state, &domain)?;
            w.flush()?;
            report(&run.result, known);
        }
        (Some(_), m) => return Err(Error::Input(format!("--trace is only available for diag-new, not {m}"))),
        (None, m) => report(&m.solve(&mut objective, &stop)?, known),
    }
    Ok(())
}

fn main() -> ExitCode {
    let outcome = match Cli::parse().command {
        Command::Bench(BenchCommand::Run(args)) => bench(args),
        Command::Gkls(GklsCommand::Dump(args)) => dump(args),
        Command::Solve(args) => solve(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
