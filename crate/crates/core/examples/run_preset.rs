//! Runs a shipped preset with fewer trajectories and prints its CSV.
//!
//! `cargo run --release --example run_preset -- fig6`

use ddkit::harness::{load_preset, run_experiment};

fn main() -> ddkit::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "fig3a".into());
    let mut cfg = load_preset(&name)?;
    cfg.trajectories = 2_000;
    let table = run_experiment(&cfg)?;
    print!("{}", table.to_csv());
    Ok(())
}
