//! Command-line front end for the intersection-pairing library.
//!
//! Subcommands:
//!
//! * `chow table --d D` prints the F-degree table of the d-cube ring.
//! * `chow vanishing --d D` scans the vanishing condition; the exit code
//!   is the verdict (0 iff no violations).
//! * `pair exact --graph G --d D --n N f0.json .. fd.json` pairs grid
//!   functions at subdivision level n exactly; expression inputs are
//!   replaced by their level-n standard approximations.
//! * `pair limit --graph G --d D f0.json .. fd.json` evaluates the
//!   partition-formula limit for piecewise-smooth expression functions.
//! * `pair zhang2 ..` and `pair cube3 ..` evaluate the closed forms on
//!   Gamma^2 triples and cube-smooth Gamma^3 quadruples.
//! * `converge --levels 2,4,8,16 ..` tabulates exact pairings of
//!   standard approximations against the limit value.
//! * `demo counterexample --n N` and `demo d1-fakt` reproduce built-in
//!   worked examples with no input files.
//!
//! Exit codes: 0 success, 2 usage error, 3 input validation error,
//! 4 computation error. Failures print a one-line error JSON to stderr.
//! Exact rationals print as "p/q" in lowest terms; outputs are
//! byte-identical across runs on identical inputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use skelpair::chow::{build_degree_table, check_vanishing, f_table_csv, f_table_json, DegreeTable};
use skelpair::func::{standard_approximation, AnyFunction, ExprFunction, GridFunction};
use skelpair::pairing::{
    convergence_csv, convergence_table, counterexample_triple, pair_cube3, pair_exact, pair_limit,
    pair_zhang2,
};
use skelpair::rat::{format_rat, rat, Rat};
use skelpair::skeleton::Graph;

/// Local intersection pairings on powers of a metrized graph.
#[derive(Parser)]
#[command(name = "skelpair", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Degree tables and vanishing scans of the cube intersection ring.
    #[command(subcommand)]
    Chow(ChowCommand),
    /// Pairings of d+1 functions: exact, limit, or closed-form routes.
    #[command(subcommand)]
    Pair(PairCommand),
    /// Exact pairings of standard approximations against the limit value.
    Converge(ConvergeArgs),
    /// Built-in worked examples that need no input files.
    #[command(subcommand)]
    Demo(DemoCommand),
}

#[derive(Subcommand)]
enum ChowCommand {
    /// Print the degree of every multiset of d+1 Fourier classes.
    Table(TableArgs),
    /// Scan the vanishing condition; exit 0 iff no violations.
    Vanishing(VanishingArgs),
}

#[derive(Args)]
struct TableArgs {
    /// Dimension of the ambient power Gamma^d.
    #[arg(long)]
    d: usize,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VanishingArgs {
    /// Dimension of the ambient power Gamma^d.
    #[arg(long)]
    d: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PairCommand {
    /// Exact pairing of level-n grid functions.
    Exact(ExactArgs),
    /// Partition-formula limit pairing of expression functions.
    Limit(LimitArgs),
    /// Closed form on Gamma^2: smooth and diagonal parts of a triple.
    Zhang2(Zhang2Args),
    /// Closed form on Gamma^3 for cube-smooth quadruples.
    Cube3(Cube3Args),
}

#[derive(Args)]
struct ExactArgs {
    /// Graph JSON file.
    #[arg(long)]
    graph: PathBuf,
    /// Dimension of the ambient power Gamma^d.
    #[arg(long)]
    d: usize,
    /// Subdivision level of the lattice.
    #[arg(long)]
    n: u32,
    /// d+1 function JSON files.
    #[arg(required = true)]
    functions: Vec<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    /// Graph JSON file.
    #[arg(long)]
    graph: PathBuf,
    /// Dimension of the ambient power Gamma^d.
    #[arg(long)]
    d: usize,
    /// Quadrature nodes per axis.
    #[arg(long, default_value_t = 64)]
    m: u32,
    /// d+1 function JSON files.
    #[arg(required = true)]
    functions: Vec<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Zhang2Args {
    /// Graph JSON file.
    #[arg(long)]
    graph: PathBuf,
    /// Quadrature nodes per axis.
    #[arg(long, default_value_t = 64)]
    m: u32,
    /// Three function JSON files on Gamma^2.
    #[arg(required = true)]
    functions: Vec<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Cube3Args {
    /// Graph JSON file.
    #[arg(long)]
    graph: PathBuf,
    /// Quadrature nodes per axis.
    #[arg(long, default_value_t = 16)]
    m: u32,
    /// Four function JSON files on Gamma^3.
    #[arg(required = true)]
    functions: Vec<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Graph JSON file.
    #[arg(long)]
    graph: PathBuf,
    /// Dimension of the ambient power Gamma^d.
    #[arg(long)]
    d: usize,
    /// Strictly ascending subdivision levels, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<u32>,
    /// Quadrature nodes per axis for the limit value.
    #[arg(long, default_value_t = 64)]
    m: u32,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// d+1 function JSON files.
    #[arg(required = true)]
    functions: Vec<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DemoCommand {
    /// The oscillating triple whose exact pairing grows with the level.
    Counterexample {
        /// Subdivision level of the triple.
        #[arg(long)]
        n: u32,
    },
    /// d=1 factorization of the pairing through the discrete energy form.
    #[command(name = "d1-fakt")]
    D1Fakt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// A failure with its exit code, a short machine-readable kind, and a
/// human-readable detail; printed as one JSON line on stderr.
struct Failure {
    exit: u8,
    kind: &'static str,
    detail: String,
}

impl Failure {
    fn usage(detail: impl Into<String>) -> Failure {
        Failure {
            exit: 2,
            kind: "usage",
            detail: detail.into(),
        }
    }

    fn input(kind: &'static str, detail: impl Into<String>) -> Failure {
        Failure {
            exit: 3,
            kind,
            detail: detail.into(),
        }
    }

    fn compute(kind: &'static str, detail: impl Into<String>) -> Failure {
        Failure {
            exit: 4,
            kind,
            detail: detail.into(),
        }
    }

    fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "detail": self.detail, "kind": self.kind }
        })
        .to_string()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let failure = Failure::usage(e.to_string());
            eprintln!("{}", failure.to_json());
            return ExitCode::from(failure.exit);
        }
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.to_json());
            ExitCode::from(failure.exit)
        }
    }
}

/// Caps the internal thread pool when SKELPAIR_THREADS is set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SKELPAIR_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.parse().ok().filter(|&k| k >= 1).ok_or_else(|| {
        Failure::usage(format!(
            "SKELPAIR_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool setup failed: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Chow(ChowCommand::Table(args)) => chow_table(args),
        Command::Chow(ChowCommand::Vanishing(args)) => chow_vanishing(args),
        Command::Pair(PairCommand::Exact(args)) => pair_exact_cmd(args),
        Command::Pair(PairCommand::Limit(args)) => pair_limit_cmd(args),
        Command::Pair(PairCommand::Zhang2(args)) => pair_zhang2_cmd(args),
        Command::Pair(PairCommand::Cube3(args)) => pair_cube3_cmd(args),
        Command::Converge(args) => converge_cmd(args),
        Command::Demo(DemoCommand::Counterexample { n }) => demo_counterexample(n),
        Command::Demo(DemoCommand::D1Fakt) => demo_d1_fakt(),
    }
}

fn check_dimension(d: usize) -> Result<(), Failure> {
    if d == 0 {
        return Err(Failure::input("dimension", "d must be at least 1"));
    }
    Ok(())
}

fn build_table(d: usize) -> Result<DegreeTable, Failure> {
    build_degree_table(d).map_err(|e| Failure::compute("chow", e.to_string()))
}

/// Builds the degree table and proves the vanishing condition on it, the
/// precondition of the limit pairing.
fn verified_table(d: usize) -> Result<DegreeTable, Failure> {
    let t = build_table(d)?;
    let report = check_vanishing(&t);
    if !report.violations.is_empty() {
        return Err(Failure::compute(
            "vanishing",
            format!(
                "{} vanishing violations at d = {d}; the limit formula does not apply",
                report.violations.len()
            ),
        ));
    }
    Ok(t)
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input("io", format!("reading {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, Failure> {
    let text = read_file(path)?;
    Graph::from_json(&text).map_err(|e| Failure::input("graph", e.to_string()))
}

/// Loads exactly `count` function files against a shared graph.
fn load_functions(
    graph: &Graph,
    d: usize,
    paths: &[PathBuf],
    count: usize,
) -> Result<Vec<AnyFunction>, Failure> {
    if paths.len() != count {
        return Err(Failure::input(
            "arguments",
            format!("expected {count} function files for d = {d}, got {}", paths.len()),
        ));
    }
    paths
        .iter()
        .map(|path| {
            let text = read_file(path)?;
            AnyFunction::from_json(graph, d, &text)
                .map_err(|e| Failure::input("function", format!("{}: {e}", path.display())))
        })
        .collect()
}

/// Expression functions only: the limit and closed-form routes
/// differentiate their inputs, which grid samples cannot support.
fn expect_expressions(fs: Vec<AnyFunction>) -> Result<Vec<ExprFunction>, Failure> {
    fs.into_iter()
        .enumerate()
        .map(|(i, f)| match f {
            AnyFunction::Expr(e) => Ok(e),
            AnyFunction::Grid(_) => Err(Failure::input(
                "function",
                format!("function {i} is a grid sample; this route needs expression functions"),
            )),
        })
        .collect()
}

/// Grid functions at level n: grid inputs are refined to n, expression
/// inputs are replaced by their level-n standard approximations.
fn grids_at_level(fs: Vec<AnyFunction>, n: u32) -> Result<Vec<GridFunction>, Failure> {
    fs.into_iter()
        .enumerate()
        .map(|(i, f)| match f {
            AnyFunction::Grid(g) if g.n() == n => Ok(g),
            AnyFunction::Grid(g) if n % g.n() == 0 => g
                .refine(n)
                .map_err(|e| Failure::compute("function", e.to_string())),
            AnyFunction::Grid(g) => Err(Failure::input(
                "function",
                format!(
                    "function {i} lives at level {}, which does not divide the requested level {n}",
                    g.n()
                ),
            )),
            AnyFunction::Expr(e) => standard_approximation(&e, n)
                .map_err(|err| Failure::compute("function", err.to_string())),
        })
        .collect()
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Failure> {
    let mut payload = text.to_string();
    if !payload.ends_with('\n') {
        payload.push('\n');
    }
    match output {
        Some(path) => fs::write(path, payload)
            .map_err(|e| Failure::compute("io", format!("writing {}: {e}", path.display()))),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn chow_table(args: TableArgs) -> Result<(), Failure> {
    check_dimension(args.d)?;
    let t = build_table(args.d)?;
    let text = match args.format {
        Format::Csv => f_table_csv(&t),
        Format::Json => f_table_json(&t),
    };
    emit(&text, args.output.as_ref())
}

fn chow_vanishing(args: VanishingArgs) -> Result<(), Failure> {
    check_dimension(args.d)?;
    let t = build_table(args.d)?;
    let report = check_vanishing(&t);
    emit(&report.to_json(), args.output.as_ref())?;
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::compute(
            "vanishing",
            format!(
                "{} vanishing violations at d = {}",
                report.violations.len(),
                report.d
            ),
        ))
    }
}

fn pair_exact_cmd(args: ExactArgs) -> Result<(), Failure> {
    check_dimension(args.d)?;
    if args.n == 0 {
        return Err(Failure::input("level", "the subdivision level n must be at least 1"));
    }
    let graph = load_graph(&args.graph)?;
    let fs = load_functions(&graph, args.d, &args.functions, args.d + 1)?;
    let grids = grids_at_level(fs, args.n)?;
    let t = build_table(args.d)?;
    let refs: Vec<&GridFunction> = grids.iter().collect();
    let report = pair_exact(&refs, &t).map_err(|e| Failure::compute("pairing", e.to_string()))?;
    emit(&report.to_json(), args.output.as_ref())
}

fn pair_limit_cmd(args: LimitArgs) -> Result<(), Failure> {
    check_dimension(args.d)?;
    let graph = load_graph(&args.graph)?;
    let fs = expect_expressions(load_functions(&graph, args.d, &args.functions, args.d + 1)?)?;
    let t = verified_table(args.d)?;
    let refs: Vec<&ExprFunction> = fs.iter().collect();
    let report =
        pair_limit(&refs, &t, args.m).map_err(|e| Failure::compute("pairing", e.to_string()))?;
    emit(&report.to_json(), args.output.as_ref())
}

fn pair_zhang2_cmd(args: Zhang2Args) -> Result<(), Failure> {
    let graph = load_graph(&args.graph)?;
    let fs = expect_expressions(load_functions(&graph, 2, &args.functions, 3)?)?;
    let (smooth, singular, total) = pair_zhang2(&fs[0], &fs[1], &fs[2], args.m)
        .map_err(|e| Failure::compute("pairing", e.to_string()))?;
    let text = serde_json::json!({
        "kind": "zhang2",
        "m": args.m,
        "singular": singular,
        "smooth": smooth,
        "total": total,
    })
    .to_string();
    emit(&text, args.output.as_ref())
}

fn pair_cube3_cmd(args: Cube3Args) -> Result<(), Failure> {
    let graph = load_graph(&args.graph)?;
    let fs = expect_expressions(load_functions(&graph, 3, &args.functions, 4)?)?;
    let refs: Vec<&ExprFunction> = fs.iter().collect();
    let value =
        pair_cube3(&refs, args.m).map_err(|e| Failure::compute("pairing", e.to_string()))?;
    let text = serde_json::json!({
        "kind": "cube3",
        "m": args.m,
        "value": value,
    })
    .to_string();
    emit(&text, args.output.as_ref())
}

fn converge_cmd(args: ConvergeArgs) -> Result<(), Failure> {
    check_dimension(args.d)?;
    if args.levels.windows(2).any(|w| w[0] >= w[1]) || args.levels.first() == Some(&0) {
        return Err(Failure::input(
            "levels",
            "levels must be a strictly ascending list of positive integers",
        ));
    }
    let graph = load_graph(&args.graph)?;
    let fs = expect_expressions(load_functions(&graph, args.d, &args.functions, args.d + 1)?)?;
    let t = verified_table(args.d)?;
    let refs: Vec<&ExprFunction> = fs.iter().collect();
    let rows = convergence_table(&refs, &args.levels, &t, args.m)
        .map_err(|e| Failure::compute("pairing", e.to_string()))?;
    let text = match args.format {
        Format::Csv => convergence_csv(&rows),
        Format::Json => {
            let entries: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    serde_json::json!({
                        "exact": format_rat(&row.exact),
                        "gap": row.gap,
                        "limit": row.limit,
                        "n": row.n,
                    })
                })
                .collect();
            serde_json::json!({ "rows": entries }).to_string()
        }
    };
    emit(&text, args.output.as_ref())
}

fn demo_counterexample(n: u32) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::input("level", "the subdivision level n must be at least 1"));
    }
    let (_, value) =
        counterexample_triple(n).map_err(|e| Failure::compute("pairing", e.to_string()))?;
    emit(&format_rat(&value), None)
}

/// A fixed d=1 instance of the factorization ⟨f0, f1⟩ = -n · Σ Δf0 Δf1:
/// the slope function against its square at level 4, both sides exact.
fn demo_d1_fakt() -> Result<(), Failure> {
    let n = 4u32;
    let graph = Graph::interval();
    let slope: Vec<Rat> = (0..=n).map(|i| rat(i as i64, n as i64)).collect();
    let square: Vec<Rat> = (0..=n)
        .map(|i| rat((i * i) as i64, (n * n) as i64))
        .collect();
    let f0 = GridFunction::new(graph.clone(), 1, n, vec![slope.clone()])
        .map_err(|e| Failure::compute("function", e.to_string()))?;
    let f1 = GridFunction::new(graph, 1, n, vec![square.clone()])
        .map_err(|e| Failure::compute("function", e.to_string()))?;
    let t = build_table(1)?;
    let report =
        pair_exact(&[&f0, &f1], &t).map_err(|e| Failure::compute("pairing", e.to_string()))?;
    let pairing = report
        .exact_value()
        .expect("the exact route yields a rational")
        .clone();

    let mut energy = Rat::default();
    for i in 0..n as usize {
        energy += (&slope[i + 1] - &slope[i]) * (&square[i + 1] - &square[i]);
    }
    let energy_form = -energy * rat(n as i64, 1);
    let text = serde_json::json!({
        "energy_form": format_rat(&energy_form),
        "equal": pairing == energy_form,
        "level": n,
        "pairing": format_rat(&pairing),
    })
    .to_string();
    emit(&text, None)
}
