//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//!
//! Runs at full scale; expect several minutes on one core.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use tailgc::causality::{bh_fdr, decimate_vdar1, lr_tail_test_fixed_p};
use tailgc::dgp::{
    simulate_dar, simulate_vdar1, simulate_vdar_bivariate, star_coupling, GarchScenario, StarKind,
};
use tailgc::estimation::{mle_vdar_bivariate, yule_walker_bivariate};
use tailgc::experiments::{
    run_roc, run_size_power, BivariateDgp, Detector, DgpSpec, Direction, ExperimentConfig,
    ParamDraw, RocConfig, Sweep, SweepPoint, SweepVariable,
};
use tailgc::random::{derive_seed, rng_from_seed};
use tailgc::series::sample_mean;
use tailgc::{BiEquation, BiVdarParams, BinaryPanel, DarParams, Result};

type Verdict = Result<(bool, String)>;

fn experiment(
    seed: u64,
    n_seeds: usize,
    t: usize,
    dgp: DgpSpec,
    detector: Detector,
) -> ExperimentConfig {
    ExperimentConfig {
        name: String::new(),
        master_seed: seed,
        n_seeds,
        t_len: t,
        level: 0.05,
        dgp,
        detector,
        direction: Direction::Forward,
        sweep: None,
    }
}

fn single(cfg: &ExperimentConfig) -> Result<SweepPoint> {
    let r = run_size_power(cfg)?;
    Ok(r.points[0].clone())
}

fn lr3() -> Detector {
    Detector::Lr { p_max: 3 }
}

fn hong5() -> Detector {
    Detector::Hong { m: 5 }
}

fn lr_size_power() -> Verdict {
    let cell = |seed, lambda1, t| -> Result<SweepPoint> {
        single(&experiment(
            seed,
            500,
            t,
            DgpSpec::Bivariate(BivariateDgp::symmetric(lambda1)),
            lr3(),
        ))
    };
    let size = cell(101, 0.0, 2000)?.fpr.unwrap_or(f64::NAN);
    let power = cell(102, 0.25, 1000)?.tpr.unwrap_or(f64::NAN);
    let strong = cell(103, 0.5, 2000)?.tpr.unwrap_or(f64::NAN);
    let ok = size <= 0.05 && (power - 0.89).abs() <= 0.06 && strong >= 0.99;
    Ok((
        ok,
        format!(
            "FPR(0, 2000) = {size:.3}, TPR(0.25, 1000) = {power:.3}, TPR(0.5, 2000) = {strong:.3}"
        ),
    ))
}

fn hong_over_rejection() -> Verdict {
    let fpr = single(&experiment(
        201,
        500,
        1000,
        DgpSpec::Bivariate(BivariateDgp::symmetric(0.0)),
        hong5(),
    ))?
    .fpr
    .unwrap_or(f64::NAN);
    Ok((
        (fpr - 0.20).abs() <= 0.06,
        format!("Hong FPR(M=5, T=1000) = {fpr:.3}"),
    ))
}

fn directionality() -> Verdict {
    let run = |det| -> Result<Vec<f64>> {
        let mut cfg = experiment(
            301,
            200,
            10_000,
            DgpSpec::Bivariate(BivariateDgp::symmetric(0.5)),
            det,
        );
        cfg.direction = Direction::Reverse;
        cfg.sweep = Some(Sweep {
            variable: SweepVariable::NuBoth,
            values: vec![0.0, 0.25, 0.5],
        });
        Ok(run_size_power(&cfg)?
            .points
            .iter()
            .map(|p| p.fpr.unwrap_or(f64::NAN))
            .collect())
    };
    let hong = run(hong5())?;
    let lr = run(lr3())?;
    let monotone = hong.windows(2).all(|w| w[0] < w[1]);
    let ok = monotone && hong[2] >= 0.95 && lr.iter().all(|&f| f <= 0.05);
    Ok((
        ok,
        format!("reverse FPR over nu = 0, 0.25, 0.5: Hong {hong:.3?}, LR {lr:.3?}"),
    ))
}

fn garch_null() -> Verdict {
    let dgp = DgpSpec::Garch {
        scenario: GarchScenario::Null,
    };
    let hong = single(&experiment(401, 500, 1000, dgp.clone(), hong5()))?
        .fpr
        .unwrap_or(f64::NAN);
    let lr = single(&experiment(401, 500, 1000, dgp, lr3()))?
        .fpr
        .unwrap_or(f64::NAN);
    let ok = (0.02..=0.10).contains(&hong) && lr <= 0.05;
    Ok((
        ok,
        format!("GARCH NULL: Hong FPR = {hong:.3}, LR FPR = {lr:.3}"),
    ))
}

fn star_networks() -> Verdict {
    let dgp = DgpSpec::Star {
        n: 10,
        kind: StarKind::Out,
        chi: 0.1,
    };
    let dec = single(&experiment(
        501,
        100,
        10_000,
        dgp.clone(),
        Detector::Decimation,
    ))?;
    let pair = single(&experiment(
        501,
        100,
        10_000,
        dgp,
        Detector::Lr { p_max: 1 },
    ))?;
    let (dfpr, dtpr) = (dec.fpr.unwrap_or(f64::NAN), dec.tpr.unwrap_or(f64::NAN));
    let pfpr = pair.fpr.unwrap_or(f64::NAN);
    let ok = dfpr < 0.05 && dtpr > 0.9 && pfpr > 0.2;
    Ok((
        ok,
        format!("decimation FPR = {dfpr:.3}, TPR = {dtpr:.3}; pairwise LR FPR = {pfpr:.3}"),
    ))
}

fn roc_ordering() -> Verdict {
    let detectors = vec![Detector::Lr { p_max: 1 }, hong5()];
    let mut plain = BivariateDgp::symmetric(0.0);
    (plain.nu1, plain.nu2) = (0.1.into(), 0.0.into());
    let fig1 = RocConfig {
        master_seed: 601,
        n_sims: 1000,
        t_len: 10_000,
        dgp: plain.clone(),
        alternative_lambda1: ParamDraw::Uniform {
            uniform: [0.25, 0.75],
        },
        detectors: detectors.clone(),
    };
    let mut copula = plain;
    copula.nu1 = 0.05.into();
    copula.copula_rho = Some(0.75);
    let cop = RocConfig {
        master_seed: 602,
        dgp: copula,
        alternative_lambda1: ParamDraw::Uniform {
            uniform: [0.0, 1.0],
        },
        ..fig1.clone()
    };
    let a = run_roc(&fig1)?;
    let b = run_roc(&cop)?;
    let (d1, d2) = (
        a.curves[0].auc - a.curves[1].auc,
        b.curves[0].auc - b.curves[1].auc,
    );
    Ok((
        d1 >= 0.01 && d2 >= 0.05,
        format!(
            "AUC LR/Hong: plain {:.4}/{:.4} (diff {d1:.4}), copula {:.4}/{:.4} (diff {d2:.4})",
            a.curves[0].auc, a.curves[1].auc, b.curves[0].auc, b.curves[1].auc
        ),
    ))
}

fn property_suite() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut rng = rng_from_seed(701);

    let mut worst = [0.0f64; 3];
    for k in 0..100 {
        let p = 1 + k % 3;
        let x = common::random_series(&mut rng, 120);
        let y = common::random_series(&mut rng, 120);
        worst[0] = worst[0].max(common::dar_gradient_error(&mut rng, &x, p));
        worst[1] = worst[1].max(common::bivariate_gradient_error(&mut rng, &x, &y, p));
        let panel = common::random_panel(&mut rng, 2 + k % 3, 120);
        worst[2] = worst[2].max(common::vdar1_gradient_error(&mut rng, &panel));
    }
    ok &= worst.iter().all(|&w| w <= 1e-5);
    notes.push(format!(
        "gradient rel err {:.1e}/{:.1e}/{:.1e}",
        worst[0], worst[1], worst[2]
    ));

    let mut min_lambda = f64::INFINITY;
    for _ in 0..1000 {
        let t = rng.random_range(20..200);
        let x = common::random_series(&mut rng, t);
        let y = common::random_series(&mut rng, t);
        let r = lr_tail_test_fixed_p(&x, &y, rng.random_range(1..=3))?;
        min_lambda = min_lambda.min(r.statistic);
    }
    ok &= min_lambda >= 0.0;
    notes.push(format!("min Lambda {min_lambda:.2e}"));

    let mut mean_ok = true;
    let t = 20_000;
    let bound = |chi: f64| 3.0 * (chi * (1.0 - chi) / (t as f64 / 20.0)).sqrt();
    let dar = DarParams::new(0.7, vec![0.5, 0.3, 0.2], 0.1)?;
    mean_ok &= (sample_mean(&simulate_dar(&dar, t, 702)?)? - 0.1).abs() <= bound(0.1);
    let bi = BiVdarParams::new(
        BiEquation::uniform(0.6, 0.4, 0.05, 2),
        BiEquation::uniform(0.5, 0.2, 0.05, 2),
    )?;
    let (x, y) = simulate_vdar_bivariate(&bi, t, 703, None)?;
    mean_ok &= (sample_mean(&x)? - 0.05).abs() <= bound(0.05)
        && (sample_mean(&y)? - 0.05).abs() <= bound(0.05);
    let star = star_coupling(6, StarKind::Mixed, 704)?;
    let panel = simulate_vdar1(&star, t, 705)?;
    for i in 0..6 {
        mean_ok &= (sample_mean(panel.get(i))? - star.chi[i]).abs() <= bound(star.chi[i]);
    }
    ok &= mean_ok;
    notes.push(format!(
        "stationary means {}",
        if mean_ok { "ok" } else { "off" }
    ));

    let truth = BiVdarParams::new(
        BiEquation::uniform(0.5, 0.4, 0.1, 1),
        BiEquation::uniform(0.5, 0.0, 0.1, 1),
    )?;
    let mut errs = Vec::new();
    for (k, &t) in [1_000usize, 10_000, 100_000].iter().enumerate() {
        let (mut yw, mut ml) = (0.0, 0.0);
        for s in 0..20u64 {
            let (x, y) = simulate_vdar_bivariate(&truth, t, derive_seed(706, k as u64, s), None)?;
            let e = |eq: &BiEquation| {
                (eq.nu - 0.5).abs() + (eq.lambda - 0.4).abs() + (eq.chi - 0.1).abs()
            };
            yw += e(&yule_walker_bivariate(&x, &y, 1)?.params.x);
            ml += e(&mle_vdar_bivariate(&x, &y, 1)?.params.x);
        }
        errs.push((yw / 20.0, ml / 20.0));
    }
    let decreasing = errs.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1);
    ok &= decreasing;
    notes.push(format!("YW/MLE error over T {:.3?}", errs));

    let bh_ok = bh_fdr(
        &[0.001, 0.008, 0.039, 0.041, 0.042, 0.06, 0.074, 0.205],
        0.05,
    )? == vec![0, 1]
        && bh_fdr(&[0.01, 0.02, 0.03, 0.04], 0.05)? == vec![0, 1, 2, 3]
        && bh_fdr(&[0.9, 0.8], 0.05)?.is_empty();
    ok &= bh_ok;
    notes.push(format!("BH {}", if bh_ok { "exact" } else { "wrong" }));

    let panel = simulate_vdar1(&star_coupling(5, StarKind::Out, 707)?, 5_000, 708)?;
    let d = decimate_vdar1(&panel)?;
    let (first, last) = (d.tilted_path[0], d.tilted_path[d.tilted_path.len() - 1]);
    let ends = first.0 == 0.0 && last.0 == 1.0 && first.1.abs() <= 1e-6 && last.1.abs() <= 1e-6;
    ok &= ends;
    notes.push(format!("tilted endpoints {:.1e}/{:.1e}", first.1, last.1));

    let (markov_ok, worst_z) = markov_oracle()?;
    ok &= markov_ok;
    notes.push(format!("Markov oracle max |z| {worst_z:.2}"));
    Ok((ok, notes.join("; ")))
}

/// Empirical one-step conditionals of a 4-node out-star against the exact
/// chain; every `(state, node)` cell with enough visits must lie within 3 s.e.
fn markov_oracle() -> Result<(bool, f64)> {
    let params = star_coupling(4, StarKind::Out, 0)?.with_chi(0.1);
    let panel: BinaryPanel = simulate_vdar1(&params, 400_000, 709)?;
    let n = 4;
    let mut visits = vec![0usize; 1 << n];
    let mut ones = vec![vec![0usize; n]; 1 << n];
    for t in 1..panel.len() {
        let s = common::state_code(&panel, t - 1);
        visits[s] += 1;
        for (i, c) in ones[s].iter_mut().enumerate() {
            *c += usize::from(panel.at(i, t));
        }
    }
    let mut worst = 0.0f64;
    for s in 0..1 << n {
        if visits[s] < 50 {
            continue;
        }
        let from = common::state_bits(s, n);
        for i in 0..n {
            let p: f64 = (0..1usize << n)
                .map(|c| common::state_bits(c, n))
                .filter(|to| to[i] == 1)
                .map(|to| common::vdar1_transition(&params, &from, &to))
                .sum();
            let se = (p * (1.0 - p) / visits[s] as f64).sqrt().max(1e-12);
            let z = (ones[s][i] as f64 / visits[s] as f64 - p).abs() / se;
            worst = worst.max(z);
        }
    }
    Ok((worst <= 3.0, worst))
}

fn low_chi_smoke() -> Verdict {
    let u = ParamDraw::Uniform {
        uniform: [0.0, 1.0],
    };
    let dgp = |lambda1| BivariateDgp {
        p: 1,
        nu1: u,
        nu2: u,
        lambda1,
        lambda2: 0.0.into(),
        chi1: 2.6e-3.into(),
        chi2: 2.6e-3.into(),
        copula_rho: None,
    };
    let h0 = single(&experiment(
        801,
        100,
        49_000,
        DgpSpec::Bivariate(dgp(0.0.into())),
        lr3(),
    ))?
    .fpr
    .unwrap_or(f64::NAN);
    let ha = single(&experiment(
        802,
        100,
        49_000,
        DgpSpec::Bivariate(dgp(u)),
        lr3(),
    ))?
    .tpr
    .unwrap_or(f64::NAN);
    Ok((
        h0 <= 0.05 && ha >= 0.8,
        format!("chi = 2.6e-3, T = 49000: H0 rejection = {h0:.3}, HA rejection = {ha:.3}"),
    ))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 LR size and power", lr_size_power),
        ("2 Hong over-rejection", hong_over_rejection),
        ("3 directionality", directionality),
        ("4 GARCH null", garch_null),
        ("5 star networks", star_networks),
        ("6 ROC ordering", roc_ordering),
        ("7 property suite", property_suite),
        ("8 low-chi smoke run", low_chi_smoke),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
