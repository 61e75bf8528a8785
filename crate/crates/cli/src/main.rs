use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tdesign::catalog::{Catalog, CatalogError};
use tdesign::constructor::{assemble, ConstructError};
use tdesign::design::{
    sample_t_design, verify_resolution, verify_t_design_with, CountingMethod, DesignError, ResolutionError, TVerdict,
};
use tdesign::generators::{backtrack_large_set, complete_design, round_robin_one_factorization, GenError};
use tdesign::io::{self, DesignMeta, IoError};
use tdesign::solver::{
    dedup_symmetric, enumerate_solutions, evaluate_l, filter_by_existence, summarize, Constructible, DedupMode,
    ProblemSpec, SolveOptions, SolverError,
};

#[derive(Parser)]
#[command(name = "tdesign", version, about = "Recursive constructions of simple t-designs")]
struct Cli {
    /// Verification budget in counter updates.
    #[arg(long, global = true, env = "TDESIGN_BUDGET", default_value_t = tdesign::design::DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "TDESIGN_WORKERS", default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the solutions of a problem spec.
    Solve(SolveArgs),
    /// Assemble and verify the design of one solution.
    Construct(ConstructArgs),
    /// Verify a design or a resolution.
    Verify(VerifyArgs),
    /// Generate ingredient designs and resolutions.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Query the large-set and known-design catalogs.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Recheck a solution file and print its summary and table.
    Report(ReportArgs),
}

#[derive(Args)]
struct CatalogFiles {
    /// Large-set catalog replacing the built-in one.
    #[arg(long, requires = "known_designs")]
    large_sets: Option<PathBuf>,
    /// Known-design catalog replacing the built-in one.
    #[arg(long, requires = "large_sets")]
    known_designs: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Output directory for solutions.jsonl, raw.jsonl, table.csv,
    /// constructible.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    dedup: Option<Dedup>,
    #[arg(long)]
    max_m: Option<BigInt>,
    /// Search node limit.
    #[arg(long, env = "TDESIGN_NODE_LIMIT", default_value_t = tdesign::solver::DEFAULT_NODE_LIMIT)]
    node_limit: u64,
    #[command(flatten)]
    catalog: CatalogFiles,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dedup {
    Symmetric,
    None,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    problem: PathBuf,
    /// A JSON Lines solution file.
    #[arg(long)]
    solution: PathBuf,
    /// 1-based line of the solution file to build.
    #[arg(long, default_value_t = 1)]
    line: usize,
    #[arg(long)]
    bundle: PathBuf,
    /// Output directory for design.json and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "resolution", required_unless_present = "resolution")]
    design: Option<PathBuf>,
    #[arg(long)]
    resolution: Option<PathBuf>,
    /// Strength to verify a design at; defaults to the declared `t`.
    #[arg(long)]
    t: Option<u32>,
    #[arg(long, value_enum, default_value_t = Method::Sweep)]
    method: Method,
    /// Check this many random t-subsets instead of all of them.
    #[arg(long)]
    sample: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Sweep,
    Enumerate,
}

#[derive(Subcommand)]
enum GenCommand {
    /// All k-subsets of v points.
    Complete {
        #[arg(long)]
        v: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The circle-method 1-factorization of K_v.
    RoundRobin {
        #[arg(long)]
        v: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Backtracking search for LS[n](s, k, v).
    LargeSet {
        #[arg(long)]
        s: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        v: u32,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 10_000_000)]
        node_limit: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// Large sets, optionally filtered by (s, k, v).
    LargeSets {
        #[arg(long, requires_all = ["k", "v"])]
        s: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        v: Option<u32>,
    },
    /// Whether a simple t-(v, k, lambda) design is known.
    Known {
        #[arg(long)]
        t: u32,
        #[arg(long)]
        v: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        lambda: BigInt,
    },
    /// Check catalog files.
    Check {
        #[command(flatten)]
        files: CatalogFiles,
    },
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    problem: PathBuf,
    /// A JSON Lines solution file.
    #[arg(long)]
    solutions: PathBuf,
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
enum Failure {
    Parse(String),
    Contract(String),
    Verification(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Contract(_) => 3,
            Failure::Verification(_) => 4,
            Failure::Budget(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Contract(m) | Failure::Verification(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Solver(e) => e.into(),
            IoError::Generator(e) => e.into(),
            IoError::Resolution(ResolutionError::Design(DesignError::BudgetExceeded { .. }))
            | IoError::Design(DesignError::BudgetExceeded { .. }) => Failure::Budget(e.to_string()),
            other => Failure::Parse(other.to_string()),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Budget(_) => Failure::Budget(e.to_string()),
            other => Failure::Contract(other.to_string()),
        }
    }
}

impl From<DesignError> for Failure {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            other => Failure::Contract(other.to_string()),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::TooLarge { .. } | GenError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            GenError::Design(d) => d.into(),
            GenError::Exhausted { .. } | GenError::Verification(_) | GenError::Resolution(_) => {
                Failure::Verification(e.to_string())
            }
            other => Failure::Contract(other.to_string()),
        }
    }
}

impl From<ConstructError> for Failure {
    fn from(e: ConstructError) -> Self {
        match e {
            ConstructError::Solver(s) => s.into(),
            ConstructError::Design(d) => d.into(),
            ConstructError::Generator(g) => g.into(),
            ConstructError::Resolution(ResolutionError::Design(d)) => d.into(),
            other => Failure::Verification(other.to_string()),
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        Failure::Parse(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn write_or_print(out: Option<&Path>, name: &str, text: &str) -> Outcome {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::Parse(format!("{}: {e}", dir.display())))?;
            io::write_file(&dir.join(name), text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_problem(path: &Path) -> Result<ProblemSpec, Failure> {
    Ok(io::problem_from_json(&io::read_file(path)?)?)
}

fn load_catalog(files: &CatalogFiles) -> Result<Catalog, Failure> {
    match (&files.large_sets, &files.known_designs) {
        (Some(ls), Some(kd)) => Ok(Catalog::from_json(&io::read_file(ls)?, &io::read_file(kd)?)?),
        _ => Ok(Catalog::builtin()),
    }
}

fn solve(a: &SolveArgs) -> Outcome {
    let mut spec = load_problem(&a.problem)?;
    if let Some(d) = a.dedup {
        spec.dedup = match d {
            Dedup::Symmetric => DedupMode::Symmetric,
            Dedup::None => DedupMode::None,
        };
    }
    if a.max_m.is_some() {
        spec.max_m = a.max_m.clone();
        spec.validate()?;
    }
    let catalog = load_catalog(&a.catalog)?;
    let opts = SolveOptions {
        node_limit: a.node_limit,
        parallel: true,
    };
    let raw = enumerate_solutions(&spec, &opts)?;
    let mut kept = match spec.dedup {
        DedupMode::Symmetric => dedup_symmetric(&spec, raw.clone()),
        DedupMode::None => raw.clone(),
    };
    filter_by_existence(&spec, &mut kept, &catalog);
    let summary = summarize(&spec, &raw, &kept);
    let lim = spec.lim();
    let built: Vec<_> = kept
        .iter()
        .filter(|r| r.m <= lim && r.constructible == Some(Constructible::Yes))
        .cloned()
        .collect();
    let summary_json = serde_json::to_string_pretty(&summary).expect("summaries serialize") + "\n";
    match a.out.as_deref() {
        Some(dir) => {
            write_or_print(Some(dir), "raw.jsonl", &io::solutions_to_jsonl(&raw))?;
            write_or_print(Some(dir), "solutions.jsonl", &io::solutions_to_jsonl(&kept))?;
            write_or_print(Some(dir), "table.csv", &io::emit_table(&spec, &kept))?;
            write_or_print(Some(dir), "constructible.csv", &io::emit_table(&spec, &built))?;
            write_or_print(Some(dir), "summary.json", &summary_json)?;
            print!("{summary_json}");
        }
        None => print!("{}", io::emit_table(&spec, &kept)),
    }
    Ok(())
}

fn construct(a: &ConstructArgs, budget: u64) -> Outcome {
    let spec = load_problem(&a.problem)?;
    let text = io::read_file(&a.solution)?;
    let line = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .nth(a.line.saturating_sub(1))
        .ok_or_else(|| Failure::Parse(format!("{} has no solution on line {}", a.solution.display(), a.line)))?;
    let rec = io::solution_from_json(line)?;
    let base = a.bundle.parent().unwrap_or(Path::new("."));
    let mut bundle = io::bundle_from_json(&io::read_file(&a.bundle)?, &spec, base, budget)?;
    bundle.fill_complete(&spec, &rec, budget)?;
    let build = assemble(&spec, &rec, &bundle, budget)?;
    let meta = DesignMeta {
        t: Some(spec.t()),
        lambda: Some(rec.lambda.clone()),
    };
    let report = serde_json::to_string_pretty(&build.report).expect("reports serialize") + "\n";
    match a.out.as_deref() {
        Some(dir) => {
            write_or_print(Some(dir), "design.json", &io::design_to_json(&build.design, &meta))?;
            write_or_print(Some(dir), "report.json", &report)?;
            println!(
                "simple {}-({},{},{}) design with {} blocks",
                spec.t(),
                spec.v(),
                spec.k(),
                rec.lambda,
                build.design.len()
            );
        }
        None => print!("{report}"),
    }
    Ok(())
}

fn verify(a: &VerifyArgs, budget: u64) -> Outcome {
    if let Some(path) = &a.resolution {
        let r = io::resolution_from_json(&io::read_file(path)?)?;
        return match verify_resolution(&r, budget) {
            Ok((s, tau)) => {
                println!("resolution verified: {} classes, s = {s}, tau = {tau}", r.class_count());
                Ok(())
            }
            Err(ResolutionError::Design(d)) => Err(d.into()),
            Err(e) => Err(Failure::Verification(e.to_string())),
        };
    }
    let path = a.design.as_ref().expect("clap requires a design or a resolution");
    let (d, meta) = io::design_from_json(&io::read_file(path)?)?;
    let t = a
        .t
        .or(meta.t)
        .ok_or_else(|| Failure::Contract("no strength given and none declared".into()))?;
    let verdict = match a.sample {
        Some(samples) => sample_t_design(&d, t, samples, a.seed)?,
        None => {
            let method = match a.method {
                Method::Sweep => CountingMethod::Sweep,
                Method::Enumerate => CountingMethod::Enumerate,
            };
            verify_t_design_with(&d, t, method, budget)?
        }
    };
    let scope = match a.sample {
        Some(n) => format!(" on {n} sampled {t}-subsets (seed {})", a.seed),
        None => String::new(),
    };
    match verdict {
        TVerdict::Regular { lambda } => {
            if let Some(declared) = meta.lambda.filter(|l| *l != BigInt::from(lambda)) {
                return Err(Failure::Verification(format!("index {lambda}, declared {declared}")));
            }
            let simple = if tdesign::design::is_simple(&d) { "simple" } else { "non-simple" };
            println!("{simple} {t}-({},{},{lambda}) design, {} blocks{scope}", d.v(), d.k(), d.len());
            Ok(())
        }
        TVerdict::Irregular {
            witness,
            count,
            reference,
        } => Err(Failure::Verification(format!(
            "not a {t}-design{scope}: {witness:?} lies in {count} blocks, the first {t}-subset in {reference}"
        ))),
    }
}

fn generate(c: &GenCommand, budget: u64) -> Outcome {
    match c {
        GenCommand::Complete { v, k, out } => {
            let d = complete_design(*v, *k, budget)?;
            let meta = DesignMeta {
                t: Some(*k),
                lambda: Some(BigInt::from(1)),
            };
            save(out.as_deref(), &io::design_to_json(&d, &meta))
        }
        GenCommand::RoundRobin { v, out } => {
            save(out.as_deref(), &io::resolution_to_json(&round_robin_one_factorization(*v)?))
        }
        GenCommand::LargeSet {
            s,
            k,
            v,
            n,
            node_limit,
            out,
        } => save(out.as_deref(), &io::resolution_to_json(&backtrack_large_set(*s, *k, *v, *n, *node_limit)?)),
    }
}

fn save(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => Ok(io::write_file(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn catalog(c: &CatalogCommand) -> Outcome {
    match c {
        CatalogCommand::LargeSets { s, k, v } => {
            let cat = Catalog::builtin();
            let records: Vec<_> = match (s, k, v) {
                (Some(s), Some(k), Some(v)) => cat.large_sets(*s, *k, *v).into_iter().cloned().collect(),
                _ => cat.large_sets.clone(),
            };
            for r in records {
                println!("LS[{}]({},{},{}) tau={} explicit={} source={}", r.n, r.s, r.k, r.v, r.tau(), r.explicit, r.source);
            }
            Ok(())
        }
        CatalogCommand::Known { t, v, k, lambda } => {
            let known = Catalog::builtin().design_known(*t, *v, *k, lambda);
            println!("{}-({},{},{lambda}): {}", t, v, k, if known { "known" } else { "unknown" });
            Ok(())
        }
        CatalogCommand::Check { files } => {
            let cat = load_catalog(files)?;
            println!("{} large sets, {} known-design records", cat.large_sets.len(), cat.known_designs.len());
            Ok(())
        }
    }
}

fn report(a: &ReportArgs) -> Outcome {
    let spec = load_problem(&a.problem)?;
    let records = io::solutions_from_jsonl(&io::read_file(&a.solutions)?)?;
    for (n, rec) in records.iter().enumerate() {
        let l = evaluate_l(&spec, rec)?;
        if l.iter().any(|x| *x != rec.lambda) || rec.m.clone() * spec.lambda_min() != rec.lambda {
            return Err(Failure::Verification(format!("line {}: L values {l:?}, Lambda {}", n + 1, rec.lambda)));
        }
    }
    let lim = spec.lim();
    let up_to_lim = records.iter().filter(|r| r.m <= lim).count();
    println!("{}: {} records, {} with m <= LIM = {lim}, all L values rechecked", spec.name, records.len(), up_to_lim);
    print!("{}", io::emit_table(&spec, &records));
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .map_err(|e| Failure::Contract(e.to_string()))?;
    }
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Construct(a) => construct(a, cli.budget),
        Command::Verify(a) => verify(a, cli.budget),
        Command::Gen(c) => generate(c, cli.budget),
        Command::Catalog(c) => catalog(c),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
