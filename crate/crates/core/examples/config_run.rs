//! Runs a TOML config through the same path as the `run` command and reads
//! the ledger back.
//!
//! `cargo run --release --example config_run -- [config.toml] [out_dir]`

use std::path::PathBuf;

use active_doi::app::{execute_run, RunOverrides};
use active_doi::config::parse_config;
use active_doi::output::{read_ledger, LEDGER_FILE};

fn main() -> active_doi::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/benchmark.toml")), PathBuf::from);
    let out = args.next().map_or_else(|| std::env::temp_dir().join("active-doi-example"), PathBuf::from);
    let cfg = parse_config(&path)?;
    let summary = execute_run(&cfg, &RunOverrides { out_dir: Some(out), steps: None })?;
    println!("{} steps into {}", summary.steps, summary.out_dir.display());
    for row in read_ledger(summary.out_dir.join(LEDGER_FILE))? {
        println!("step {:>3}  E = {:.10e}  mass = {:.12e}", row.step, row.total_energy, row.mass);
    }
    Ok(())
}
