//! `cargo run --release --example roc -- [config.toml] [n_sims]`

use std::env;
use std::fs;

use tailgc::experiments::{run_roc, RocConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let path = args.next().unwrap_or_else(|| {
        concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/configs/roc_copula.toml"
        )
        .into()
    });
    let mut cfg = RocConfig::from_toml(&fs::read_to_string(path)?)?;
    if let Some(n) = args.next() {
        cfg.n_sims = n.parse()?;
    }
    let report = run_roc(&cfg)?;
    for (name, curve) in report.detectors.iter().zip(&report.curves) {
        println!(
            "{name:<12} AUC {:.4} ({} points)",
            curve.auc,
            curve.points.len()
        );
    }
    if report.failures > 0 {
        println!("{} simulations failed", report.failures);
    }
    Ok(())
}
