//! The `coverage` command: solve, lloyd, compare and plot.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use coverage_core::lloyd::{lloyd_run, LloydTrace};
use coverage_core::optimizer::{find_candidates, Candidate, GlobalResult, Method};
use coverage_core::parallel::ordered_map;
use coverage_core::CoverageProblem;
use serde::Deserialize;

use config::{ConfigError, Format, RunConfig, Start};
use report::{CandidatesDoc, LloydDoc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_STRICT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "coverage", version, about = "Certified global optima for 1-D polynomial coverage control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Homotopy used for the stationarity systems.
    #[arg(long, global = true, value_name = "total-degree|regeneration")]
    pub method: Option<Method>,
    /// Solver seed; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads; 0 picks automatically.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Exit with status 3 when any solution path fails.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Print the assembled stationarity systems.
    #[arg(long, global = true)]
    pub dump_system: bool,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Find every stationary configuration and certify the global minimum.
    Solve,
    /// Run the Lloyd descent baseline from the configured starts.
    Lloyd,
    /// Solve, run Lloyd, and compare each endpoint with the global minimum.
    Compare,
    /// Draw figure.svg from results already in the output directory.
    Plot,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    MissingInput(String),
    #[error("{0}")]
    Strict(String),
    #[error("{0}")]
    Run(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingInput(_) => EXIT_CONFIG,
            CliError::Strict(_) => EXIT_STRICT,
            CliError::Run(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

/// Parses `args` (including the program name) and runs the command;
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

struct Session {
    config: RunConfig,
    problem: CoverageProblem,
    out: PathBuf,
}

fn load(cli: &Cli) -> Result<Session, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::MissingInput("--config PATH is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(m) = cli.method {
        config.solver.method = m;
    }
    if let Some(s) = cli.seed {
        config.solver.tracker.seed = s;
    }
    if let Some(t) = cli.threads {
        config.solver.tracker.threads = t;
    }
    if let Some(o) = &cli.out {
        config.output.directory = o.clone();
    }
    config.validate()?;
    let problem = config.build_problem()?;
    for w in problem.assumption_warnings() {
        eprintln!("warning: {w}");
    }
    let out = config.output.directory.clone();
    Ok(Session { config, problem, out })
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let s = load(cli)?;
    if cli.dump_system {
        dump_systems(&s.problem)?;
    }
    match cli.command {
        Command::Solve => {
            let (_, doc) = solve(&s, cli.strict)?;
            print!("{}", report::solve_summary(&doc));
        }
        Command::Lloyd => {
            let (starts, traces) = run_lloyd(&s)?;
            let doc = report::lloyd_doc(&starts, &traces);
            write_lloyd(&s, &starts, &traces, &doc)?;
            if s.config.wants(Format::Svg) {
                let rows = report::figure_rows(None, Some(&doc));
                report::write(&s.out, "figure.svg", &report::figure_svg(&s.problem, &rows))?;
            }
            for r in &doc.runs {
                println!(
                    "{}: {:?} -> {:?} objective {:.12e} after {} iterations ({})",
                    r.label,
                    r.initial,
                    r.final_positions,
                    r.objective,
                    r.iterations,
                    r.terminated_by.label()
                );
            }
        }
        Command::Compare => {
            let (result, doc) = solve(&s, cli.strict)?;
            print!("{}", report::solve_summary(&doc));
            let (starts, traces) = run_lloyd(&s)?;
            let ldoc = report::lloyd_doc(&starts, &traces);
            write_lloyd(&s, &starts, &traces, &ldoc)?;
            let rows = report::comparison_rows(&result.winner, &ldoc);
            report::write(&s.out, "comparison.csv", &report::comparison_csv(&result.winner, &rows)?)?;
            if s.config.wants(Format::Svg) {
                let fig = report::figure_rows(Some(&result.winner), Some(&ldoc));
                report::write(&s.out, "figure.svg", &report::figure_svg(&s.problem, &fig))?;
            }
            println!();
            print!("{}", report::comparison_table(&result.winner, &rows));
            for r in &rows {
                println!("verdict {}: {}", r.label, r.verdict);
            }
        }
        Command::Plot => plot(&s)?,
    }
    Ok(())
}

fn dump_systems(problem: &CoverageProblem) -> Result<(), CliError> {
    let instances = problem
        .enumerate_instances()
        .map_err(|e| CliError::Run(e.to_string()))?;
    for inst in instances {
        println!("# {} pattern", inst.pin.label());
        print!("{}", inst.system.render());
    }
    Ok(())
}

fn solve(s: &Session, strict: bool) -> Result<(GlobalResult, CandidatesDoc), CliError> {
    let opts = &s.config.solver.tracker;
    let search = find_candidates(&s.problem, s.config.solver.method, opts).map_err(|e| CliError::Run(e.to_string()))?;
    let doc = report::candidates_doc(&s.config.problem, &search, search.candidates.first(), opts);
    if s.config.wants(Format::Json) {
        let json = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
        report::write(&s.out, "candidates.json", &json)?;
    }
    if s.config.wants(Format::Csv) {
        report::write(
            &s.out,
            "candidates.csv",
            &report::candidates_csv(&doc.candidates, s.problem.vehicles())?,
        )?;
    }
    let failed = search.failed_paths();
    if failed > 0 {
        let msg = format!("{failed} solution path(s) failed; rerun with another --seed");
        if strict {
            print!("{}", report::solve_summary(&doc));
            return Err(CliError::Strict(msg));
        }
        eprintln!("warning: {msg}");
    }
    match GlobalResult::from_search(search, opts) {
        Ok(result) => Ok((result, doc)),
        Err(e) => {
            print!("{}", report::solve_summary(&doc));
            Err(CliError::Run(e.to_string()))
        }
    }
}

fn run_lloyd(s: &Session) -> Result<(Vec<Start>, Vec<LloydTrace>), CliError> {
    let starts = s.config.starts(&s.problem)?;
    let opts = &s.config.lloyd.options;
    let traces: Result<Vec<LloydTrace>, _> =
        ordered_map(&starts, s.config.solver.tracker.threads, |st| lloyd_run(&s.problem, &st.positions, opts))
            .into_iter()
            .collect();
    let traces = traces.map_err(|e| CliError::Run(e.to_string()))?;
    Ok((starts, traces))
}

fn write_lloyd(s: &Session, starts: &[Start], traces: &[LloydTrace], doc: &LloydDoc) -> Result<(), CliError> {
    if s.config.wants(Format::Json) {
        let json = serde_json::to_string_pretty(doc).expect("serializable") + "\n";
        report::write(&s.out, "lloyd.json", &json)?;
    }
    if s.config.wants(Format::Csv) {
        report::write(&s.out, "trace.csv", &report::trace_csv(starts, traces, s.problem.vehicles())?)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct PlotCandidates {
    winner: Option<Candidate>,
    candidates: Vec<Candidate>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Option<T>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::MissingInput(format!("unreadable results file {}: {e}", path.display())))
}

fn plot(s: &Session) -> Result<(), CliError> {
    let cand: Option<PlotCandidates> = read_json(&s.out.join("candidates.json"))?;
    let lloyd: Option<LloydDoc> = read_json(&s.out.join("lloyd.json"))?;
    if cand.is_none() && lloyd.is_none() {
        return Err(CliError::MissingInput(format!(
            "no results in {}: run solve, lloyd or compare first",
            s.out.display()
        )));
    }
    let winner = cand.as_ref().and_then(|c| c.winner.clone());
    if cand.as_ref().is_some_and(|c| c.candidates.is_empty()) {
        eprintln!("warning: candidate list is empty; plotting the density only");
    }
    let winner = winner.filter(|_| cand.as_ref().is_some_and(|c| !c.candidates.is_empty()));
    let rows = report::figure_rows(winner.as_ref(), lloyd.as_ref());
    let path = s.out.join("figure.svg");
    report::write(&s.out, "figure.svg", &report::figure_svg(&s.problem, &rows))?;
    println!("wrote {}", path.display());
    Ok(())
}
