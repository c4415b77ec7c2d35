//! From intraday returns to hits, and the GARCH VaR filter.

use rand_distr::{Distribution, StudentT};
use tailgc::dgp::{simulate_ar_garch, ArGarch};
use tailgc::preprocess::{
    garch_var_filter, run_pipeline, IntradayGrid, IntradayPanel, PipelineConfig,
};
use tailgc::random::rng_from_seed;

fn main() -> tailgc::Result<()> {
    // 20 days of 390 heavy-tailed one-minute returns with a U-shaped profile.
    let mut rng = rng_from_seed(1);
    let noise = StudentT::new(3.0).unwrap();
    let grids = ["AAA", "BBB"]
        .iter()
        .map(|sym| {
            let days = (0..20)
                .map(|_| {
                    (0..390)
                        .map(|s| {
                            let u = 1.0 + 2.0 * ((s as f64 - 195.0) / 195.0).powi(2);
                            let z: f64 = noise.sample(&mut rng);
                            1e-4 * u * z
                        })
                        .collect()
                })
                .collect();
            IntradayGrid::new(*sym, days)
        })
        .collect::<tailgc::Result<Vec<_>>>()?;
    let out = run_pipeline(&IntradayPanel { grids }, &PipelineConfig::default())?;
    println!(
        "panel {} x {}; hit frequencies {:?}",
        out.panel.n_series(),
        out.panel.len(),
        out.summary.hit_frequency
    );

    let model = ArGarch {
        beta: 0.3,
        omega: 0.1,
        persistence: 0.6,
        arch: 0.2,
    };
    let x = simulate_ar_garch(&model, 5000, 2)?;
    let f = garch_var_filter(&x)?;
    println!("\nGARCH truth {model:?}");
    println!("GARCH fit   {:?}", f.model);
    println!(
        "VaR exceedances: {} of {} ({:.3})",
        f.hits.count_ones(),
        f.hits.len(),
        f.hits.count_ones() as f64 / f.hits.len() as f64
    );
    Ok(())
}
