//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use tailgc::estimation::{
    loglik_dar, loglik_dar_gradient, loglik_vdar1, loglik_vdar1_gradient, loglik_vdar_bivariate,
    loglik_vdar_bivariate_gradient,
};
use tailgc::random::SimRng;
use tailgc::{BiEquation, BinaryPanel, BinarySeries, DarParams, Vdar1Params};

/// `P(X_t = s' | X_{t-1} = s)` for a VDAR(1) by direct enumeration: given the
/// previous state every component copies independently.
pub fn vdar1_transition(params: &Vdar1Params, from: &[u8], to: &[u8]) -> f64 {
    (0..params.n())
        .map(|i| {
            let copy: f64 = (0..params.n())
                .map(|j| params.lambda[i][j] * f64::from(from[j]))
                .sum();
            let p1 = params.nu[i] * copy + (1.0 - params.nu[i]) * params.chi[i];
            if to[i] == 1 {
                p1
            } else {
                1.0 - p1
            }
        })
        .product()
}

pub fn state_bits(code: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((code >> i) & 1) as u8).collect()
}

pub fn state_code(panel: &BinaryPanel, t: usize) -> usize {
    (0..panel.n_series())
        .map(|i| usize::from(panel.at(i, t)) << i)
        .sum()
}

/// Central difference of `f` along `dir`.
pub fn directional(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn random_series(rng: &mut SimRng, t: usize) -> BinarySeries {
    let q = rng.random_range(0.1..0.6);
    let mut v: Vec<u8> = (0..t).map(|_| u8::from(rng.random::<f64>() < q)).collect();
    v[0] = 0;
    v[1] = 1;
    BinarySeries::new(v).unwrap()
}

fn interior(rng: &mut SimRng) -> f64 {
    rng.random_range(0.05..0.95)
}

fn simplex(rng: &mut SimRng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Moves mass `h` from simplex entry `b` to entry `a`.
fn shift(w: &[f64], a: usize, b: usize, h: f64) -> Vec<f64> {
    let mut w = w.to_vec();
    w[a] += h;
    w[b] -= h;
    w
}

const H: f64 = 1e-6;

/// Worst relative error between the analytic gradient and central
/// differences of the DAR(p) likelihood at a random interior point.
pub fn dar_gradient_error(rng: &mut SimRng, x: &BinarySeries, p: usize) -> f64 {
    let d = DarParams::new(interior(rng), simplex(rng, p), interior(rng)).unwrap();
    let (_, g) = loglik_dar_gradient(x, &d).unwrap();
    let ll = |d: DarParams| loglik_dar(x, &d).unwrap();
    let mut worst = rel_err(
        g.nu,
        directional(
            |h| {
                ll(DarParams {
                    nu: d.nu + h,
                    ..d.clone()
                })
            },
            H,
        ),
    );
    worst = worst.max(rel_err(
        g.chi,
        directional(
            |h| {
                ll(DarParams {
                    chi: d.chi + h,
                    ..d.clone()
                })
            },
            H,
        ),
    ));
    for k in 1..p {
        let fd = directional(
            |h| {
                ll(DarParams {
                    gamma: shift(&d.gamma, k, 0, h),
                    ..d.clone()
                })
            },
            H,
        );
        worst = worst.max(rel_err(g.gamma[k] - g.gamma[0], fd));
    }
    worst
}

pub fn bivariate_gradient_error(
    rng: &mut SimRng,
    x: &BinarySeries,
    y: &BinarySeries,
    p: usize,
) -> f64 {
    let e = BiEquation {
        nu: interior(rng),
        lambda: interior(rng),
        chi: interior(rng),
        gamma_own: simplex(rng, p),
        gamma_cross: simplex(rng, p),
    };
    let (_, g) = loglik_vdar_bivariate_gradient(x, y, &e).unwrap();
    let ll = |e: BiEquation| loglik_vdar_bivariate(x, y, &e).unwrap();
    let mut worst = 0.0f64;
    for (an, fd) in [
        (
            g.nu,
            directional(
                |h| {
                    ll(BiEquation {
                        nu: e.nu + h,
                        ..e.clone()
                    })
                },
                H,
            ),
        ),
        (
            g.lambda,
            directional(
                |h| {
                    ll(BiEquation {
                        lambda: e.lambda + h,
                        ..e.clone()
                    })
                },
                H,
            ),
        ),
        (
            g.chi,
            directional(
                |h| {
                    ll(BiEquation {
                        chi: e.chi + h,
                        ..e.clone()
                    })
                },
                H,
            ),
        ),
    ] {
        worst = worst.max(rel_err(an, fd));
    }
    for k in 1..p {
        let fd = directional(
            |h| {
                ll(BiEquation {
                    gamma_own: shift(&e.gamma_own, k, 0, h),
                    ..e.clone()
                })
            },
            H,
        );
        worst = worst.max(rel_err(g.gamma_own[k] - g.gamma_own[0], fd));
        let fd = directional(
            |h| {
                ll(BiEquation {
                    gamma_cross: shift(&e.gamma_cross, k, 0, h),
                    ..e.clone()
                })
            },
            H,
        );
        worst = worst.max(rel_err(g.gamma_cross[k] - g.gamma_cross[0], fd));
    }
    worst
}

pub fn vdar1_gradient_error(rng: &mut SimRng, panel: &BinaryPanel) -> f64 {
    let n = panel.n_series();
    let v = Vdar1Params::new(
        (0..n).map(|_| interior(rng)).collect(),
        (0..n).map(|_| simplex(rng, n)).collect(),
        (0..n).map(|_| interior(rng)).collect(),
    )
    .unwrap();
    let (_, g) = loglik_vdar1_gradient(panel, &v).unwrap();
    let ll = |v: Vdar1Params| loglik_vdar1(panel, &v).unwrap();
    let mut worst = 0.0f64;
    for i in 0..n {
        let fd = directional(
            |h| {
                let mut w = v.clone();
                w.nu[i] += h;
                ll(w)
            },
            H,
        );
        worst = worst.max(rel_err(g.nu[i], fd));
        let fd = directional(
            |h| {
                let mut w = v.clone();
                w.chi[i] += h;
                ll(w)
            },
            H,
        );
        worst = worst.max(rel_err(g.chi[i], fd));
        for j in 1..n {
            let fd = directional(
                |h| {
                    let mut w = v.clone();
                    w.lambda[i] = shift(&v.lambda[i], j, 0, h);
                    ll(w)
                },
                H,
            );
            worst = worst.max(rel_err(g.lambda[i][j] - g.lambda[i][0], fd));
        }
    }
    worst
}

pub fn random_panel(rng: &mut SimRng, n: usize, t: usize) -> BinaryPanel {
    BinaryPanel::new((0..n).map(|_| random_series(rng, t)).collect()).unwrap()
}
