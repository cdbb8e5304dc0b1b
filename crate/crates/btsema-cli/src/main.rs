//! `btsema` — validate, run, and conformance-check behavior trees.
//!
//! Exit codes: 0 ok (and: traces equal), 1 validation failure, 2 runtime
//! semantic error, 3 I/O or parse error, 4 trace divergence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use btsema::{
    export_dot, oracle_run, parse_scenario, parse_tree, run_simulation, trace_diff, RunConfig,
    RunOutcome, RunReport, ScenarioSpec, Trace, WellFormedTree,
};

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_IO_PARSE: u8 = 3;
const EXIT_DIVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(name = "btsema", about = "Behavior tree runtime, simulator, and conformance tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a tree file is well formed.
    Validate {
        #[arg(long)]
        tree: PathBuf,
    },
    /// Run a tree under a scenario and emit the trace as JSON Lines.
    Run(RunArgs),
    /// Run the reference interpreter instead of the engine (same flags).
    Oracle(RunArgs),
    /// Compare two trace files; reports the first divergence.
    Diff { a: PathBuf, b: PathBuf },
    /// Emit the tree as a Graphviz DOT graph on stdout.
    ExportDot {
        #[arg(long)]
        tree: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's tick budget.
    #[arg(long)]
    max_ticks: Option<u64>,
    /// Stop at the first terminal root response.
    #[arg(long)]
    stop_on_terminal: bool,
    /// Write the trace here instead of stdout.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { tree } => validate(&tree),
        Command::Run(args) => run(&args, false),
        Command::Oracle(args) => run(&args, true),
        Command::Diff { a, b } => diff(&a, &b),
        Command::ExportDot { tree } => export(&tree),
    };
    ExitCode::from(code)
}

fn read_file(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_IO_PARSE
    })
}

fn load_tree(path: &Path) -> Result<WellFormedTree, u8> {
    let text = read_file(path)?;
    let spec = parse_tree(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_IO_PARSE
    })?;
    WellFormedTree::validate(spec).map_err(|errors| {
        eprintln!("error: {} is not a well-formed tree:", path.display());
        for e in errors {
            eprintln!("  {e}");
        }
        EXIT_VALIDATION
    })
}

fn load_scenario(path: &Path) -> Result<ScenarioSpec, u8> {
    let text = read_file(path)?;
    parse_scenario(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_IO_PARSE
    })
}

fn validate(tree: &Path) -> u8 {
    match load_tree(tree) {
        Ok(valid) => {
            println!("ok: well-formed tree with {} nodes", valid.spec().node_count());
            EXIT_OK
        }
        Err(code) => code,
    }
}

fn run(args: &RunArgs, use_oracle: bool) -> u8 {
    let tree = match load_tree(&args.tree) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let scenario = match load_scenario(&args.scenario) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let mut config = RunConfig::for_scenario(&scenario);
    if let Some(max_ticks) = args.max_ticks {
        config.max_ticks = max_ticks.max(1);
    }
    config.stop_on_terminal = args.stop_on_terminal;

    let report: RunReport = match if use_oracle {
        oracle_run(&tree, &scenario, &config)
    } else {
        run_simulation(&tree, &scenario, &config)
    } {
        Ok(report) => report,
        Err(mismatch) => {
            eprintln!("error: {mismatch}");
            return EXIT_VALIDATION;
        }
    };

    let jsonl = report.trace.to_jsonl();
    if let Some(out) = &args.trace {
        if let Err(e) = fs::write(out, jsonl) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return EXIT_IO_PARSE;
        }
    } else if std::io::stdout().write_all(jsonl.as_bytes()).is_err() {
        return EXIT_IO_PARSE;
    }
    eprintln!("run {} after {} cycle(s)", report.outcome, report.cycles);
    if matches!(report.outcome, RunOutcome::Faulted(_)) {
        EXIT_RUNTIME
    } else {
        EXIT_OK
    }
}

fn diff(a: &Path, b: &Path) -> u8 {
    let load = |path: &Path| -> Result<Trace, u8> {
        let text = read_file(path)?;
        Trace::from_jsonl(&text).map_err(|e| {
            eprintln!("error: {}: {e}", path.display());
            EXIT_IO_PARSE
        })
    };
    let left = match load(a) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let right = match load(b) {
        Ok(t) => t,
        Err(code) => return code,
    };
    match trace_diff(&left, &right) {
        None => {
            println!("traces equal ({} events)", left.len());
            EXIT_OK
        }
        Some(divergence) => {
            println!("{divergence}");
            EXIT_DIVERGENCE
        }
    }
}

fn export(tree: &Path) -> u8 {
    match load_tree(tree) {
        Ok(valid) => {
            print!("{}", export_dot(valid.spec()));
            EXIT_OK
        }
        Err(code) => code,
    }
}
