mod common;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use tailgc::dgp::{simulate_dar, simulate_vdar1, star_coupling, StarKind};
use tailgc::random::rng_from_seed;
use tailgc::series::{lagged_cross_correlation, sample_mean};
use tailgc::{DarParams, Vdar1Params};

/// `m = diag(ν) Λ m + (1 - ν) χ`.
fn stationary_mean(p: &Vdar1Params) -> Vec<f64> {
    let n = p.n();
    let a = DMatrix::from_fn(n, n, |i, j| {
        f64::from(u8::from(i == j)) - p.nu[i] * p.lambda[i][j]
    });
    let b = DVector::from_fn(n, |i, _| (1.0 - p.nu[i]) * p.chi[i]);
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

#[test]
fn stationary_mean_with_unequal_chi() {
    let params = Vdar1Params::new(
        vec![0.6, 0.5, 0.4],
        vec![
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.7, 0.3],
            vec![0.2, 0.2, 0.6],
        ],
        vec![0.05, 0.2, 0.1],
    )
    .unwrap();
    let m = stationary_mean(&params);
    let t = 200_000;
    let panel = simulate_vdar1(&params, t, 17).unwrap();
    for (i, &mi) in m.iter().enumerate() {
        let tol = 3.0 * (mi * (1.0 - mi) / (t as f64 / 20.0)).sqrt();
        assert!(
            (sample_mean(panel.get(i)).unwrap() - mi).abs() <= tol,
            "component {i}"
        );
    }
    assert!((m[0] - 0.05).abs() > 0.01);
}

#[test]
fn dar1_autocorrelation_is_geometric() {
    let nu = 0.6;
    let x = simulate_dar(&DarParams::new(nu, vec![1.0], 0.2).unwrap(), 200_000, 5).unwrap();
    for k in 1..=3 {
        let r = lagged_cross_correlation(&x, &x, k).unwrap();
        assert!((r - nu.powi(k as i32)).abs() < 0.02, "lag {k}: {r}");
    }
}

/// Joint one-step transition frequencies of random 3-node chains against the
/// exact 8-state kernel.
#[test]
fn vdar1_matches_exact_markov_kernel() {
    let mut rng = rng_from_seed(99);
    let n = 3;
    for case in 0..4 {
        let params = if case == 0 {
            star_coupling(3, StarKind::Out, 0).unwrap().with_chi(0.3)
        } else {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
                    let s: f64 = w.iter().sum();
                    w.iter().map(|v| v / s).collect()
                })
                .collect();
            Vdar1Params::new(
                (0..n).map(|_| rng.random_range(0.1..0.9)).collect(),
                rows,
                (0..n).map(|_| rng.random_range(0.1..0.5)).collect(),
            )
            .unwrap()
        };
        let panel = simulate_vdar1(&params, 300_000, 1000 + case).unwrap();
        let mut counts = vec![vec![0usize; 1 << n]; 1 << n];
        for t in 1..panel.len() {
            counts[common::state_code(&panel, t - 1)][common::state_code(&panel, t)] += 1;
        }
        for (s, row) in counts.iter().enumerate() {
            let visits: usize = row.iter().sum();
            if visits < 200 {
                continue;
            }
            let from = common::state_bits(s, n);
            let total: f64 = (0..1 << n)
                .map(|c| common::vdar1_transition(&params, &from, &common::state_bits(c, n)))
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
            for (c, &k) in row.iter().enumerate() {
                let p = common::vdar1_transition(&params, &from, &common::state_bits(c, n));
                let se = (p * (1.0 - p) / visits as f64).sqrt().max(1e-9);
                let z = (k as f64 / visits as f64 - p).abs() / se;
                assert!(z <= 4.0, "case {case}, {s} -> {c}: z = {z:.2}");
            }
        }
    }
}
