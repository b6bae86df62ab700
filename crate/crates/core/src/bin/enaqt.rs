use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use enaqt::scenario::{parse_scenario, run_scenario, ExperimentKind};

/// Run a transport scenario and write its CSV and metadata files.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// Scenario file to run.
    #[arg(long, required_unless_present = "list_experiments")]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores); overrides the file.
    #[arg(long)]
    workers: Option<usize>,
    /// RNG seed; overrides the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the experiment kinds and their CSV columns.
    #[arg(long)]
    list_experiments: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();

    if args.list_experiments {
        for kind in ExperimentKind::ALL {
            println!("{:<16} {}", kind.name(), kind.description());
        }
        return ExitCode::SUCCESS;
    }

    let path = args.scenario.expect("clap enforces --scenario");
    let mut scenario = match parse_scenario(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    if let Some(w) = args.workers {
        scenario.workers = w;
    }
    if let Some(s) = args.seed {
        scenario.seed = s;
    }

    match run_scenario(&scenario, &args.out) {
        Ok(out) => {
            println!("{} ({} rows)", out.csv.display(), out.rows);
            for p in &out.extra_csv {
                println!("{}", p.display());
            }
            println!("{}", out.meta.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
