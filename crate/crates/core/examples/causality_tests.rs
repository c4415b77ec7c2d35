//! Likelihood-ratio and Hong tests in both directions of a one-way coupling.

use tailgc::causality::{hong_test, lr_tail_test};
use tailgc::dgp::simulate_vdar_bivariate;
use tailgc::{BiEquation, BiVdarParams};

fn main() -> tailgc::Result<()> {
    let pair = BiVdarParams::new(
        BiEquation::uniform(0.5, 0.4, 0.05, 1),
        BiEquation::uniform(0.5, 0.0, 0.05, 1),
    )?;
    let (x, y) = simulate_vdar_bivariate(&pair, 5000, 7, None)?;
    let x = x.with_label("X");
    let y = y.with_label("Y");

    println!(
        "{:<6} {:<8} {:>10} {:>10}",
        "test", "edge", "statistic", "p-value"
    );
    for (target, source) in [(&x, &y), (&y, &x)] {
        let lr = lr_tail_test(target, source, 3)?;
        let hong = hong_test(target, source, 5)?;
        for r in [lr, hong] {
            println!(
                "{:<6} {:<8} {:>10.3} {:>10.2e}",
                format!("{:?}", r.method),
                format!("{}->{}", r.source, r.target),
                r.statistic,
                r.p_value
            );
        }
    }
    Ok(())
}
