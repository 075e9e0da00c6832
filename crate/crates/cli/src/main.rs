use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use log::LevelFilter;
use multiregen_core::persist::{self, COMPLETED_DIR};
use multiregen_core::{load_inputs, run, MultidegreeTable, RegenConfig, Strategy, VariableGroups};

const RUN_DIR: &str = "run";

const HEADER: [&str; 2] = [
    "| # smooth isolated solutions  | # of general linear equations |",
    "| found                        | added with variables in group |",
];

/// Computes multidegrees of multiprojective varieties by multiregeneration.
///
/// Reads inputFile, bertiniInput_variables, bertiniInput_equations and the
/// optional bertiniInput_trackingOptions from the working directory and
/// writes the witness points under run/.
#[derive(Parser, Debug)]
#[command(name = "multiregen", version)]
struct Args {
    /// Working directory holding the input files.
    #[arg(long, default_value = ".")]
    dir: PathBuf,
    /// Master seed; drawn from system entropy when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Explore breadth first instead of depth first.
    #[arg(long)]
    bfs: bool,
    /// Number of worker threads tracking paths.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_processes: Option<u64>,
    /// Print the solution counts of an existing run directory and exit.
    #[arg(long)]
    status: bool,
}

fn render_table(table: &MultidegreeTable) -> String {
    let mut out = String::new();
    for line in HEADER {
        out.push_str(line);
        out.push('\n');
    }
    for row in &table.rows {
        out.push_str(&format!("  {:<31}", row.count));
        for e in row.e.entries() {
            out.push_str(&format!("{e}  "));
        }
        out.push('\n');
    }
    out
}

fn multidegree_line(table: &MultidegreeTable, groups: &VariableGroups) -> String {
    format!("multidegree: {}\n", table.polynomial(groups))
}

/// The directory passed to `--status` may be the working directory or the
/// run directory itself.
fn status_root(dir: &Path) -> PathBuf {
    if dir.join(COMPLETED_DIR).is_dir() {
        dir.to_path_buf()
    } else {
        dir.join(RUN_DIR)
    }
}

fn execute(args: Args) -> Result<ExitCode, String> {
    if args.status {
        let st = persist::status(&status_root(&args.dir)).map_err(|e| e.to_string())?;
        print!("{st}");
        return Ok(ExitCode::SUCCESS);
    }
    let (sys, input, track) = load_inputs(&args.dir).map_err(|e| e.to_string())?;
    let seed = args.seed.or(input.seed).unwrap_or_else(rand::random);
    eprintln!("seed: {seed}");

    let mut config = RegenConfig::for_system(&sys, seed);
    config.degrees = input.degrees.clone();
    config.torus_groups = input.algebraic_torus_variable_groups.clone();
    config.strategy = if args.bfs || !input.depth_first {
        Strategy::BreadthFirst
    } else {
        Strategy::DepthFirst
    };
    config.max_processes = args.max_processes.map_or(input.max_processes, |n| n as usize);
    config.track = track;
    config.run_dir = Some(args.dir.join(RUN_DIR));

    let out = run(&sys, config).map_err(|e| e.to_string())?;
    if input.verbose > 0 {
        let mut stdout = io::stdout().lock();
        let text = render_table(&out.table) + &multidegree_line(&out.table, sys.groups());
        stdout.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    }
    if out.partial {
        eprintln!("some paths failed; the table is a partial multidegree");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(LevelFilter::Warn)
        .parse_default_env()
        .init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
