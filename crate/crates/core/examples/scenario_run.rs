//! The full pipeline on a scenario file, as the `run` subcommand does it:
//! `cargo run --release --example scenario_run -- scenarios/standard_ring.cfg out`.

use std::path::PathBuf;

use axibouss::cli::{execute_run, load_config};
use axibouss::diagnostics::summarize;

fn main() -> axibouss::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg_path = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("scenarios/standard_ring.cfg"));
    let cfg = load_config(&cfg_path)?;
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let summary = execute_run(&cfg, &dir)?;
    println!("{} steps ({} rejected), output in {}", summary.steps, summary.rejected_steps, dir.display());
    for line in summarize(&summary.checks) {
        println!("{line}");
    }
    if summary.failed() {
        std::process::exit(1);
    }
    Ok(())
}
