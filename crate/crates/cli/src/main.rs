use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hypermono::function::{instantiate, to_truth_table, FamilySpec, TruthTable};
use hypermono::harness::{analyze, run_sweep, verify, ExperimentConfig, Level, VerifyOptions};
use hypermono::hypercube::{Edge, Point, StepRule};
use hypermono::oracles::influence_report;
use hypermono::tester::{pilot_repetitions, run_amplified, run_dispatched, AmplifyConfig, DispatchConfig, Outcome};
use hypermono::{Error, Result};

const EXIT_REJECT: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_VERIFY_FAILED: u8 = 3;

/// Adaptive monotonicity testing of Boolean functions on the hypercube.
#[derive(Parser, Debug)]
#[command(name = "hypermono", version)]
struct Cli {
    /// Master seed for all randomness (64-bit unsigned, decimal).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the truth table of a family member.
    Gen(GenArgs),
    /// Print the exact oracle report of a truth-table file.
    Analyze(AnalyzeArgs),
    /// Run the amplified tester on a truth-table file.
    Test(TestArgs),
    /// Run a Monte Carlo sweep and write its CSV.
    Bench(BenchArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Family spec, e.g. `antidictator`, `majority`, `bernoulli(0.3,7)`.
    #[arg(long)]
    family: FamilySpec,
    #[arg(long)]
    n: usize,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Label for the family column; defaults to the file name.
    #[arg(long)]
    family: Option<String>,
    /// Also check one edge, written `LOWER -> UPPER` as `test` prints it.
    #[arg(long)]
    edge: Option<String>,
}

#[derive(Args, Debug)]
struct TestArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Upper bound on the total influence; defaults to the exact value.
    #[arg(long)]
    influence_bound: Option<f64>,
    #[arg(long, default_value_t = AmplifyConfig::DEFAULT_CONSTANT)]
    constant: f64,
    #[arg(long, default_value_t = AmplifyConfig::DEFAULT_MAX_REPETITIONS)]
    max_repetitions: u64,
    /// Fixed repetition count.
    #[arg(long, conflicts_with = "pilot_trials")]
    repetitions: Option<u64>,
    /// Set the repetition count to 5 / p, p measured on an anti-dictator of
    /// the same dimension over this many runs.
    #[arg(long)]
    pilot_trials: Option<u64>,
    /// Estimate the influence first and use the edge sampler above 6 sqrt(n).
    #[arg(long)]
    dispatch: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Config file in `key = value` form; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<FamilySpec>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    stratify: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "quick")]
    level: Level,
    /// Write the machine-readable report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Comma-separated check identifiers; partial runs fail the coverage check.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
    /// Replace the walk by a lazy one (mutation test; expected to fail).
    #[arg(long)]
    lazy_walk: bool,
    /// List the check identifiers and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let seed = cli.seed;
    match cli.command {
        Command::Gen(args) => gen(args),
        Command::Analyze(args) => analyze_cmd(args),
        Command::Test(args) => test(args, seed.unwrap_or(0)),
        Command::Bench(args) => bench(args, seed),
        Command::Verify(args) => verify_cmd(args, seed.unwrap_or(0)),
    }
}

fn gen(args: GenArgs) -> Result<u8> {
    let table = to_truth_table(&instantiate(&args.family, args.n)?)?;
    match args.output {
        Some(path) => table.save(path)?,
        None => io::stdout().write_all(table.to_string().as_bytes())?,
    }
    Ok(0)
}

/// Parses `LOWER -> UPPER`, ignoring a trailing `(coordinate i)`.
fn parse_edge(text: &str) -> Result<Edge> {
    let text = text.split('(').next().unwrap_or("");
    let (a, b) = text
        .split_once("->")
        .ok_or_else(|| Error::InvalidParameter(format!("edge {text:?} is not of the form LOWER -> UPPER")))?;
    let (a, b): (Point, Point) = (a.trim().parse()?, b.trim().parse()?);
    Edge::between(&a, &b)
}

fn analyze_cmd(args: AnalyzeArgs) -> Result<u8> {
    let table = TruthTable::load(&args.file)?;
    let label = args
        .family
        .clone()
        .unwrap_or_else(|| args.file.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned()));
    let report = analyze(&table, &label)?;
    let mut out = io::stdout().lock();
    match args.format {
        Format::Json => writeln!(out, "{}", report.to_json()?)?,
        Format::Csv => report.write_csv(&mut out)?,
        Format::Text => {
            writeln!(out, "n = {}", report.n)?;
            writeln!(out, "influential edges = {}", report.influential_count)?;
            writeln!(out, "violating edges = {}", report.violating_count)?;
            writeln!(out, "total influence = {}", report.total_influence)?;
            match (&report.distance, report.flips) {
                (Some(d), Some(flips)) => writeln!(out, "distance to monotonicity = {d} ({flips} flips)")?,
                _ => writeln!(out, "distance to monotonicity = not computed for n = {}", report.n)?,
            }
            for c in &report.f_ell {
                writeln!(out, "|F_{}| = {} ({} boundary vertices)", c.ell, c.size, c.boundary)?;
            }
        }
    }
    if let Some(text) = &args.edge {
        let edge = parse_edge(text)?;
        if edge.dim() != table.dim() {
            return Err(Error::DimensionMismatch { expected: table.dim(), found: edge.dim() });
        }
        let (lo, hi) = (table.get(index(edge.lower())), table.get(index(&edge.upper())));
        let verdict = if lo && !hi { "violating" } else { "not violating" };
        writeln!(out, "edge {edge}: f = {} -> {}, {verdict}", u8::from(lo), u8::from(hi))?;
    }
    Ok(0)
}

fn index(p: &Point) -> u64 {
    p.index().expect("truth tables have at most 30 variables")
}

fn test(args: TestArgs, seed: u64) -> Result<u8> {
    let table = TruthTable::load(&args.file)?;
    let n = table.dim();
    let influence = match args.influence_bound {
        Some(i) => i,
        None => {
            let r = influence_report(&table)?.total_influence;
            *r.numer() as f64 / *r.denom() as f64
        }
    };
    let mut config = AmplifyConfig::new(args.epsilon, influence)?;
    config.constant_c = args.constant;
    config.max_repetitions = args.max_repetitions;
    if let Some(trials) = args.pilot_trials {
        let reference = instantiate(&FamilySpec::AntiDictator(1), n)?;
        config = config.with_repetitions(pilot_repetitions(&reference, trials, seed, 5.0)?);
    }
    if let Some(r) = args.repetitions {
        config = config.with_repetitions(r);
    }
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome: Outcome = if args.dispatch {
        let d = run_dispatched(&table, &DispatchConfig::new(config.clone()), &mut rng)?;
        println!("regime = {:?} (estimated influence {:.3})", d.regime, d.estimate.estimate);
        d.outcome
    } else {
        run_amplified(&table, &config, &mut rng)?
    };
    println!("{}", outcome.verdict);
    println!(
        "runs = {} of {}, queries = {} ({} distinct)",
        outcome.runs,
        config.repetitions(n),
        outcome.stats.total,
        outcome.stats.distinct
    );
    Ok(if outcome.is_reject() { EXIT_REJECT } else { 0 })
}

fn bench(args: BenchArgs, seed: Option<u64>) -> Result<u8> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let need = |what: &str| Error::Config(format!("--{what} is required without --config"));
            ExperimentConfig {
                family: args.family.clone().ok_or_else(|| need("family"))?,
                n_values: args.n_values.clone().ok_or_else(|| need("n-values"))?,
                trials: args.trials.ok_or_else(|| need("trials"))?,
                seed: 0,
                stratify_by_ell: args.stratify,
                output: args.output.clone().ok_or_else(|| need("output"))?,
            }
        }
    };
    if let Some(f) = args.family {
        config.family = f;
    }
    if let Some(ns) = args.n_values {
        config.n_values = ns;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(o) = args.output {
        config.output = o;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config.stratify_by_ell |= args.stratify;
    let rows = run_sweep(&config)?;
    println!("{} rows written to {}", rows.len(), config.output.display());
    Ok(0)
}

fn verify_cmd(args: VerifyArgs, seed: u64) -> Result<u8> {
    if args.list {
        for id in hypermono::harness::INVARIANTS {
            println!("{id}");
        }
        return Ok(0);
    }
    let options = VerifyOptions {
        level: args.level,
        seed,
        rule: if args.lazy_walk { StepRule::Lazy } else { StepRule::Simple },
        only: args.only,
    };
    let report = verify(&options)?;
    println!("{report}");
    if let Some(path) = args.json {
        fs::write(path, report.to_json()?)?;
    }
    Ok(if report.passed { 0 } else { EXIT_VERIFY_FAILED })
}
