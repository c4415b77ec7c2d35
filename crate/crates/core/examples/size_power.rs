//! Runs a size/power sweep from a TOML config.
//!
//! `cargo run --release --example size_power -- [config.toml] [n_seeds]`

use std::env;
use std::fs;

use tailgc::experiments::{run_size_power, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let path = args.next().unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/configs/size_power_lr.toml"
        )
        .into()
    });
    let mut cfg = ExperimentConfig::from_toml(&fs::read_to_string(path)?)?;
    if let Some(n) = args.next() {
        cfg.n_seeds = n.parse()?;
    }
    let report = run_size_power(&cfg)?;
    println!(
        "{} with {}, {} seeds",
        report.name, report.detector, cfg.n_seeds
    );
    print!("{}", report.to_csv());
    Ok(())
}
