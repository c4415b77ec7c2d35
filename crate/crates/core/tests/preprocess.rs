use rand_distr::{Distribution, Normal};
use tailgc::dgp::{simulate_ar_garch, ArGarch};
use tailgc::preprocess::{
    garch_var_filter, read_intraday_csv, run_pipeline, spot_volatility, PipelineConfig,
    VolatilityConfig,
};
use tailgc::random::rng_from_seed;
use tailgc::RealSeries;

#[test]
fn garch_filter_recovers_parameters() {
    let truth = ArGarch {
        beta: 0.3,
        omega: 0.1,
        persistence: 0.6,
        arch: 0.2,
    };
    let x = simulate_ar_garch(&truth, 20_000, 3).unwrap();
    let fit = garch_var_filter(&x).unwrap();
    let m = fit.model;
    for (name, a, b) in [
        ("beta", m.beta, truth.beta),
        ("omega", m.omega, truth.omega),
        ("persistence", m.persistence, truth.persistence),
        ("arch", m.arch, truth.arch),
    ] {
        assert!((a - b).abs() <= 0.1, "{name}: {a} vs {b}");
    }
    assert_eq!(fit.sigma.len(), x.len());
}

#[test]
fn garch_var_hits_have_nominal_rate() {
    let model = ArGarch {
        beta: 0.0,
        omega: 0.2,
        persistence: 0.5,
        arch: 0.3,
    };
    let x = simulate_ar_garch(&model, 20_000, 8).unwrap();
    let fit = garch_var_filter(&x).unwrap();
    let rate = fit.hits.count_ones() as f64 / fit.hits.len() as f64;
    assert!((rate - 0.05).abs() <= 0.01, "hit rate {rate}");
}

#[test]
fn spot_volatility_tracks_gaussian_scale() {
    let mut rng = rng_from_seed(12);
    let normal = Normal::new(0.0f64, 0.01).unwrap();
    let r = RealSeries::new((0..20_000).map(|_| normal.sample(&mut rng)).collect()).unwrap();
    let vol = spot_volatility(&r, &VolatilityConfig::default()).unwrap();
    let s = &vol.sigma.values()[1000..];
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    assert!((mean - 0.01).abs() <= 0.0005, "mean sigma {mean}");
}

#[test]
fn csv_pipeline_end_to_end() {
    let (days, slots) = (5usize, 80usize);
    let mut rng = rng_from_seed(4);
    let normal = Normal::new(0.0f64, 0.001).unwrap();
    let mut csv = String::from("day,slot,symbol,price\n");
    for sym in ["AAA", "BBB"] {
        for d in 0..days {
            let mut p = 100.0f64;
            for s in 0..slots {
                csv.push_str(&format!("{d},{s},{sym},{p}\n"));
                p *= normal.sample(&mut rng).exp();
            }
        }
    }
    let panel = read_intraday_csv(csv.as_bytes()).unwrap();
    let cfg = PipelineConfig {
        volatility: VolatilityConfig {
            theta: 1.5,
            ..Default::default()
        },
        ..Default::default()
    };
    let out = run_pipeline(&panel, &cfg).unwrap();
    assert_eq!(out.panel.n_series(), 2);
    assert_eq!(out.panel.len(), days * (slots - 1) - cfg.warmup);
    for (i, (sym, &f)) in out.summary.hit_frequency.iter().enumerate() {
        let s = out.panel.get(i);
        assert_eq!(s.label(), Some(sym.as_str()));
        assert_eq!(f, s.count_ones() as f64 / s.len() as f64);
        assert!(f > 0.0);
    }
    assert!(out.summary.chi_min <= out.summary.chi_max);
}
