use tailgc::dgp::{simulate_dar, simulate_vdar_bivariate};
use tailgc::estimation::{
    mle_dar, mle_vdar_bivariate, select_order_bic, yule_walker_bivariate, yule_walker_dar,
};
use tailgc::{BiEquation, BiVdarParams, DarParams};

fn main() -> tailgc::Result<()> {
    let truth = DarParams::new(0.7, vec![0.6, 0.4], 0.1)?;
    let x = simulate_dar(&truth, 20_000, 11)?;
    let yw = yule_walker_dar(&x, 2)?;
    let mle = mle_dar(&x, 2)?;
    println!("truth       {truth:?}");
    println!("Yule-Walker {:?}", yw.params);
    println!(
        "MLE         {:?} (loglik {:.2}, converged {})",
        mle.params, mle.loglik, mle.converged
    );

    let pair = BiVdarParams::new(
        BiEquation {
            nu: 0.6,
            lambda: 0.5,
            chi: 0.05,
            gamma_own: vec![0.5, 0.5],
            gamma_cross: vec![0.2, 0.8],
        },
        BiEquation::uniform(0.5, 0.0, 0.05, 2),
    )?;
    let (x, y) = simulate_vdar_bivariate(&pair, 20_000, 12, None)?;
    let p = select_order_bic(&x, &y, 4)?;
    println!("\nBIC order for the pair: {p}");
    let start = yule_walker_bivariate(&x, &y, p)?;
    let fit = mle_vdar_bivariate(&x, &y, p)?;
    println!("Yule-Walker X equation {:?}", start.params.x);
    println!("MLE X equation         {:?}", fit.params.x);
    println!("MLE Y equation         {:?}", fit.params.y);
    Ok(())
}
