//! Simulating DAR, bivariate VDAR and star-network panels.

use tailgc::dgp::{simulate_dar, simulate_vdar1, simulate_vdar_bivariate, star_coupling, StarKind};
use tailgc::series::sample_mean;
use tailgc::{BiEquation, BiVdarParams, DarParams};

fn main() -> tailgc::Result<()> {
    let dar = DarParams::new(0.6, vec![0.7, 0.3], 0.05)?;
    let x = simulate_dar(&dar, 5000, 1)?;
    println!("DAR(2): {} hits in {} steps", x.count_ones(), x.len());

    // Y drives X; Y is autonomous.
    let pair = BiVdarParams::new(
        BiEquation::uniform(0.5, 0.6, 0.05, 1),
        BiEquation::uniform(0.5, 0.0, 0.05, 1),
    )?;
    for rho in [None, Some(0.75)] {
        let (x, y) = simulate_vdar_bivariate(&pair, 20_000, 2, rho)?;
        let both = x
            .values()
            .iter()
            .zip(y.values())
            .filter(|&(a, b)| a & b == 1)
            .count();
        println!(
            "VDAR(1) pair, copula {rho:?}: mean X {:.4}, mean Y {:.4}, joint hits {both}",
            sample_mean(&x)?,
            sample_mean(&y)?
        );
    }

    let star = star_coupling(6, StarKind::Mixed, 3)?;
    let panel = simulate_vdar1(&star, 10_000, 4)?;
    println!(
        "mixed star edges (source, target): {:?}",
        star.causal_edges()
    );
    for i in 0..panel.n_series() {
        println!("  node {i}: mean {:.4}", sample_mean(panel.get(i))?);
    }
    Ok(())
}
