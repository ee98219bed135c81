use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use waysim::Execution;
use waysim_cli::commands::{
    run_path, solver_options_from_env, Command, ModeChoice, RunOptions, SolverOverrides, DEFAULT_PREDICATE_TOL,
};
use waysim_cli::report::{combined_exit_code, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Text,
    Machine,
}

/// Symmetric simulation of asymmetric measurements over finite groups.
///
/// Exit status is 0 on success, 2 on a no-go verdict and 1 on errors or a
/// failed duality check. When PATH is a directory every `*.json` file in it
/// is processed and the most severe status wins.
#[derive(Debug, Parser)]
#[command(name = "waysim", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file, or a directory of scenario files.
    path: PathBuf,
    /// Optimization mode for `simulate`; without it the exact construction
    /// is preferred and the symmetric optimizer is the fallback.
    #[arg(long, value_enum)]
    mode: Option<ModeChoice>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Certified duality-gap tolerance of the solver.
    #[arg(long, value_parser = positive)]
    tol: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Tolerance of the boolean checks (symmetry, orthogonality, distinctness).
    #[arg(long, value_parser = positive, default_value_t = DEFAULT_PREDICATE_TOL)]
    predicate_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write reports here instead of stdout; a directory in batch mode.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn render(r: &Report, format: Format) -> String {
    match format {
        Format::Text => r.to_text(),
        Format::Machine => r.to_machine(),
    }
}

fn scenario_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

#[cfg(feature = "parallel")]
fn run_all(command: Command, files: &[PathBuf], opts: &RunOptions) -> Vec<Report> {
    use rayon::prelude::*;
    files.par_iter().map(|f| run_path(command, f, opts)).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_all(command: Command, files: &[PathBuf], opts: &RunOptions) -> Vec<Report> {
    files.iter().map(|f| run_path(command, f, opts)).collect()
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("waysim: {message}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let base_solver = match solver_options_from_env() {
        Ok(b) => b,
        Err(v) => return fail(v),
    };
    let opts = RunOptions {
        mode: cli.mode,
        predicate_tol: cli.predicate_tol,
        base_solver,
        overrides: SolverOverrides { seed: cli.seed, max_iter: cli.max_iter, gap_tol: cli.tol, restarts: cli.restarts },
        exec: if cli.sequential { Execution::Sequential } else { Execution::Parallel },
        timings: cli.timings,
    };

    let batch = cli.path.is_dir();
    let (files, reports) = if batch {
        let files = match scenario_files(&cli.path) {
            Ok(f) if f.is_empty() => return fail(format!("no *.json scenarios in {}", cli.path.display())),
            Ok(f) => f,
            Err(e) => return fail(format!("{}: {e}", cli.path.display())),
        };
        let reports = run_all(cli.command, &files, &opts);
        (files, reports)
    } else {
        let report = run_path(cli.command, &cli.path, &opts);
        (vec![cli.path.clone()], vec![report])
    };

    let written = match (&cli.out, batch) {
        (Some(dir), true) => std::fs::create_dir_all(dir).and_then(|_| {
            let ext = if cli.format == Format::Machine { "json" } else { "txt" };
            for (f, r) in files.iter().zip(&reports) {
                let stem = f.file_stem().unwrap_or_default().to_string_lossy();
                std::fs::write(dir.join(format!("{stem}.{}.{ext}", cli.command.as_str())), render(r, cli.format))?;
            }
            Ok(())
        }),
        (Some(file), false) => std::fs::write(file, render(&reports[0], cli.format)),
        (None, _) => {
            let text = if batch && cli.format == Format::Machine {
                let mut s = serde_json::to_string_pretty(&reports).expect("reports serialize");
                s.push('\n');
                s
            } else {
                reports.iter().map(|r| render(r, cli.format)).collect::<Vec<_>>().join("\n")
            };
            std::io::stdout().write_all(text.as_bytes())
        }
    };
    if let Err(e) = written {
        return fail(e);
    }
    ExitCode::from(combined_exit_code(reports.iter().map(|r| r.status)) as u8)
}
