//! Runs a scenario file and writes its CSV and metadata next to it, the same
//! way the `enaqt` binary does.
//!
//! ```text
//! cargo run --release --example run_scenario -- crates/core/examples/scenarios/fig3a_transfer.scn out/
//! ```

use std::path::PathBuf;

use enaqt::scenario::{parse_scenario, run_scenario};

fn main() -> enaqt::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/fig3c_long_time.scn")
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);

    let scenario = parse_scenario(&path)?;
    println!(
        "{} with {} parameter points",
        scenario.experiment.name(),
        scenario.runs().len()
    );
    let written = run_scenario(&scenario, &out)?;
    println!("{} rows -> {}", written.rows, written.csv.display());
    print!("{}", std::fs::read_to_string(&written.meta)?);
    Ok(())
}
