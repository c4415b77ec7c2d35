//! Maximum-likelihood fits and BIC order selection.

use serde::{Deserialize, Serialize};

use super::likelihood::{LagPatterns, RowPatterns};
use super::mixture::Mixture;
use super::transform::{
    prob, prob_inv, shrink_prob, shrink_simplex, simplex, simplex_grad, simplex_inv,
};
use super::yule_walker::{yule_walker_bivariate, yule_walker_dar, yule_walker_vdar1};
use crate::error::{Error, Result};
use crate::optim::{maximize, OptimOptions};
use crate::params::{BiEquation, BiVdarParams, DarParams, Vdar1Params};
use crate::series::{BinaryPanel, BinarySeries};

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<P> {
    pub params: P,
    pub loglik: f64,
    /// Log-likelihood of each equation (one per series), summing to `loglik`.
    pub equation_logliks: Vec<f64>,
    pub p: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// Fit of a single equation.
#[derive(Debug, Clone)]
pub(crate) struct EqFit<P> {
    pub params: P,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl<P> EqFit<P> {
    fn better(self, other: Self) -> Self {
        if other.loglik > self.loglik {
            other
        } else {
            self
        }
    }
}

fn uniform(p: usize) -> Vec<f64> {
    vec![1.0 / p as f64; p]
}

fn mean_of(x: &[u8]) -> f64 {
    x.iter().map(|&v| f64::from(v)).sum::<f64>() / x.len() as f64
}

/// Writes the simplex encoded at `z[..]` (empty when it has one entry).
fn decode_simplex(z: &[f64], w: &mut [f64]) {
    if w.len() == 1 {
        w[0] = 1.0;
    } else {
        simplex(z, w);
    }
}

fn encode_simplex(w: &[f64], out: &mut Vec<f64>) {
    if w.len() > 1 {
        out.extend(simplex_inv(&shrink_simplex(w)));
    }
}

fn simplex_dim(m: usize) -> usize {
    if m > 1 {
        m
    } else {
        0
    }
}

/// DAR(p) fit on the own-lag part of `data` (cross patterns are ignored).
pub(crate) fn fit_dar_patterns(
    data: &LagPatterns,
    start: &DarParams,
    opts: &OptimOptions,
) -> EqFit<DarParams> {
    let p = data.p;
    let k = simplex_dim(p);
    let mut z0 = vec![
        prob_inv(shrink_prob(start.nu)),
        prob_inv(shrink_prob(start.chi)),
    ];
    encode_simplex(&start.gamma, &mut z0);
    let mut eq = BiEquation::uniform(0.5, 0.0, 0.5, p);
    let mut g = vec![0.0; 3 + 2 * p];
    let decode = |z: &[f64], eq: &mut BiEquation| -> (f64, f64) {
        let (nu, dnu) = prob(z[0]);
        let (chi, dchi) = prob(z[1]);
        eq.nu = nu;
        eq.chi = chi;
        eq.lambda = 0.0;
        decode_simplex(&z[2..], &mut eq.gamma_own);
        (dnu, dchi)
    };
    let out = maximize(
        |z, dz| {
            let (dnu, dchi) = decode(z, &mut eq);
            let ll = data.loglik(&eq, Some(&mut g));
            dz[0] = g[0] * dnu;
            dz[1] = g[2] * dchi;
            if k > 0 {
                simplex_grad(&eq.gamma_own, &g[3..3 + p], &mut dz[2..]);
            }
            ll
        },
        z0,
        opts,
    );
    let mut eq = BiEquation::uniform(0.5, 0.0, 0.5, p);
    decode(&out.x, &mut eq);
    let fitted = EqFit {
        params: eq.restricted(),
        loglik: out.value,
        iterations: out.iterations,
        converged: out.converged,
    };
    let at_start = EqFit {
        params: start.clone(),
        loglik: data.loglik(&BiEquation::from_dar(start), None),
        iterations: out.iterations,
        converged: out.converged,
    };
    fitted.better(at_start)
}

/// Full bivariate equation fit.
pub(crate) fn fit_equation_patterns(
    data: &LagPatterns,
    start: &BiEquation,
    opts: &OptimOptions,
) -> EqFit<BiEquation> {
    let p = data.p;
    let k = simplex_dim(p);
    let mut z0 = vec![
        prob_inv(shrink_prob(start.nu)),
        prob_inv(shrink_prob(start.lambda)),
        prob_inv(shrink_prob(start.chi)),
    ];
    encode_simplex(&start.gamma_own, &mut z0);
    encode_simplex(&start.gamma_cross, &mut z0);
    let mut eq = BiEquation::uniform(0.5, 0.5, 0.5, p);
    let mut g = vec![0.0; 3 + 2 * p];
    let decode = |z: &[f64], eq: &mut BiEquation| -> [f64; 3] {
        let (nu, dnu) = prob(z[0]);
        let (lambda, dl) = prob(z[1]);
        let (chi, dchi) = prob(z[2]);
        eq.nu = nu;
        eq.lambda = lambda;
        eq.chi = chi;
        decode_simplex(&z[3..3 + k], &mut eq.gamma_own);
        decode_simplex(&z[3 + k..], &mut eq.gamma_cross);
        [dnu, dl, dchi]
    };
    let out = maximize(
        |z, dz| {
            let d = decode(z, &mut eq);
            let ll = data.loglik(&eq, Some(&mut g));
            for c in 0..3 {
                dz[c] = g[c] * d[c];
            }
            if k > 0 {
                simplex_grad(&eq.gamma_own, &g[3..3 + p], &mut dz[3..3 + k]);
                simplex_grad(&eq.gamma_cross, &g[3 + p..], &mut dz[3 + k..]);
            }
            ll
        },
        z0,
        opts,
    );
    let mut eq = BiEquation::uniform(0.5, 0.5, 0.5, p);
    decode(&out.x, &mut eq);
    EqFit {
        params: eq,
        loglik: out.value,
        iterations: out.iterations,
        converged: out.converged,
    }
}

fn check_order(len: usize, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidParameters("order must be at least 1".into()));
    }
    if len < p + 2 {
        return Err(Error::InsufficientLength {
            needed: p + 2,
            got: len,
        });
    }
    Ok(())
}

fn boundary_dar(x: &BinarySeries, p: usize) -> EqFit<DarParams> {
    EqFit {
        params: DarParams {
            nu: 0.0,
            gamma: uniform(p),
            chi: f64::from(x.values()[0]),
        },
        loglik: 0.0,
        iterations: 0,
        converged: false,
    }
}

fn dar_on_patterns(
    x: &BinarySeries,
    data: &LagPatterns,
    p: usize,
    opts: &OptimOptions,
) -> EqFit<DarParams> {
    if x.is_constant() {
        return boundary_dar(x, p);
    }
    let default = DarParams {
        nu: 0.5,
        gamma: uniform(p),
        chi: mean_of(x.values()),
    };
    let mut best = fit_dar_patterns(data, &default, opts);
    if let Ok(yw) = yule_walker_dar(x, p) {
        best = fit_dar_patterns(data, &yw.params, opts).better(best);
    }
    best
}

/// Maximum-likelihood DAR(p), warm-started at Yule–Walker. A constant series
/// yields the boundary fit (`nu = 0`, `chi` equal to the constant) with
/// `converged = false`.
pub fn mle_dar(x: &BinarySeries, p: usize) -> Result<FitResult<DarParams>> {
    check_order(x.len(), p)?;
    let data = LagPatterns::build(x.values(), None, p)?;
    let fit = dar_on_patterns(x, &data, p, &OptimOptions::default());
    Ok(FitResult {
        params: fit.params,
        loglik: fit.loglik,
        equation_logliks: vec![fit.loglik],
        p,
        converged: fit.converged,
        iterations: fit.iterations,
    })
}

/// Full and restricted fits of the equation of `x` given `y`.
pub(crate) struct EquationPair {
    pub full: EqFit<BiEquation>,
    pub restricted: EqFit<DarParams>,
}

/// Fits the `x` equation of a bivariate VDAR(p) together with the nested
/// DAR(p) on `x`. `yw` is the Yule–Walker start for the equation, if any.
pub(crate) fn fit_equation_pair(
    x: &BinarySeries,
    y: &BinarySeries,
    p: usize,
    yw: Option<&BiEquation>,
) -> Result<EquationPair> {
    let data = LagPatterns::build(x.values(), Some(y.values()), p)?;
    let opts = OptimOptions::default();
    let restricted = dar_on_patterns(x, &data, p, &opts);
    if x.is_constant() {
        let full = EqFit {
            params: BiEquation::from_dar(&restricted.params),
            loglik: restricted.loglik,
            iterations: 0,
            converged: false,
        };
        return Ok(EquationPair { full, restricted });
    }
    let embedded = BiEquation::from_dar(&restricted.params);
    let mut best = EqFit {
        params: embedded.clone(),
        loglik: restricted.loglik,
        iterations: restricted.iterations,
        converged: restricted.converged,
    };
    let mut nudged = embedded;
    nudged.lambda = 0.05;
    best = best.better(fit_equation_patterns(&data, &nudged, &opts));
    if let Some(start) = yw {
        let at_start = EqFit {
            params: start.clone(),
            loglik: data.loglik(start, None),
            iterations: 0,
            converged: false,
        };
        let from_yw = fit_equation_patterns(&data, start, &opts);
        let iters = from_yw.iterations;
        let conv = from_yw.converged;
        let mut cand = from_yw.better(at_start);
        cand.iterations = iters;
        cand.converged = conv;
        best = best.better(cand);
    }
    Ok(EquationPair {
        full: best,
        restricted,
    })
}

/// Fits both equations of a bivariate VDAR(p) and the nested DAR(p) models.
pub(crate) fn fit_bivariate_pairs(
    x: &BinarySeries,
    y: &BinarySeries,
    p: usize,
) -> Result<[EquationPair; 2]> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    check_order(x.len(), p)?;
    let yw = yule_walker_bivariate(x, y, p).ok();
    let ex = fit_equation_pair(x, y, p, yw.as_ref().map(|w| &w.params.x))?;
    let ey = fit_equation_pair(y, x, p, yw.as_ref().map(|w| &w.params.y))?;
    Ok([ex, ey])
}

fn bivariate_result(pairs: &[EquationPair; 2], p: usize) -> FitResult<BiVdarParams> {
    let [ex, ey] = pairs;
    FitResult {
        params: BiVdarParams {
            x: ex.full.params.clone(),
            y: ey.full.params.clone(),
        },
        loglik: ex.full.loglik + ey.full.loglik,
        equation_logliks: vec![ex.full.loglik, ey.full.loglik],
        p,
        converged: ex.full.converged && ey.full.converged,
        iterations: ex.full.iterations + ey.full.iterations,
    }
}

/// Maximum-likelihood bivariate VDAR(p). Each equation is fitted from the
/// Yule–Walker start and from the nested DAR(p) optimum, so the fitted
/// likelihood of each equation is never below that of DAR(p).
pub fn mle_vdar_bivariate(
    x: &BinarySeries,
    y: &BinarySeries,
    p: usize,
) -> Result<FitResult<BiVdarParams>> {
    let pairs = fit_bivariate_pairs(x, y, p)?;
    Ok(bivariate_result(&pairs, p))
}

/// `2(2p+1) ln T - 2 (l(X|Y) + l(Y|X))`.
pub fn bic(loglik: f64, p: usize, t_len: usize) -> f64 {
    2.0 * (2 * p + 1) as f64 * (t_len as f64).ln() - 2.0 * loglik
}

/// Fits for every order `1..=p_max` and the index of the BIC minimiser
/// (first minimum wins).
pub(crate) fn fit_orders(
    x: &BinarySeries,
    y: &BinarySeries,
    p_max: usize,
) -> Result<(Vec<[EquationPair; 2]>, usize)> {
    if p_max == 0 {
        return Err(Error::InvalidParameters("p_max must be at least 1".into()));
    }
    check_order(x.len(), p_max)?;
    let mut fits = Vec::with_capacity(p_max);
    let mut best = 0;
    let mut best_bic = f64::INFINITY;
    for p in 1..=p_max {
        let pairs = fit_bivariate_pairs(x, y, p)?;
        let b = bic(pairs[0].full.loglik + pairs[1].full.loglik, p, x.len());
        if b < best_bic {
            best_bic = b;
            best = p - 1;
        }
        fits.push(pairs);
    }
    Ok((fits, best + 1))
}

/// BIC-optimal order of a bivariate VDAR(p) over `1..=p_max`.
pub fn select_order_bic(x: &BinarySeries, y: &BinarySeries, p_max: usize) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if p_max == 1 {
        check_order(x.len(), 1)?;
        return Ok(1);
    }
    Ok(fit_orders(x, y, p_max)?.1)
}

/// Row fit of a VDAR(1): `lambda` is zero outside `active`.
#[derive(Debug, Clone)]
pub(crate) struct RowFit {
    pub nu: f64,
    pub chi: f64,
    pub lambda: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Fits one VDAR(1) row with coupling restricted to the `active` columns.
/// The returned fit is never worse than `start` (restricted to `active`).
pub(crate) fn fit_row(
    data: &RowPatterns,
    active: &[usize],
    start_nu: f64,
    start_chi: f64,
    start_lambda: &[f64],
    opts: &OptimOptions,
) -> RowFit {
    let n = data.n;
    let m = active.len();
    let k = simplex_dim(m);
    let mut start_w: Vec<f64> = active.iter().map(|&j| start_lambda[j].max(0.0)).collect();
    crate::params::normalize(&mut start_w);
    let mut start_full = vec![0.0; n];
    for (&j, &w) in active.iter().zip(&start_w) {
        start_full[j] = w;
    }
    let start_ll = data.loglik(start_nu, start_chi, &start_full, None);

    let mut z0 = vec![
        prob_inv(shrink_prob(start_nu)),
        prob_inv(shrink_prob(start_chi)),
    ];
    encode_simplex(&start_w, &mut z0);
    let mut lam = vec![0.0; n];
    let mut w = vec![0.0; m];
    let mut g = vec![0.0; n + 2];
    let mut gw = vec![0.0; m];
    let mut objective = |z: &[f64], dz: &mut [f64]| {
        let (nu, dnu) = prob(z[0]);
        let (chi, dchi) = prob(z[1]);
        decode_simplex(&z[2..], &mut w);
        for (&j, &v) in active.iter().zip(&w) {
            lam[j] = v;
        }
        let ll = data.loglik(nu, chi, &lam, Some(&mut g));
        dz[0] = g[0] * dnu;
        dz[1] = g[1] * dchi;
        if k > 0 {
            for (c, &j) in active.iter().enumerate() {
                gw[c] = g[2 + j];
            }
            simplex_grad(&w, &gw, &mut dz[2..]);
        }
        ll
    };
    let out = maximize(&mut objective, z0, opts);
    let mut fit = if out.value > start_ll {
        let nu = prob(out.x[0]).0;
        let chi = prob(out.x[1]).0;
        decode_simplex(&out.x[2..], &mut w);
        let mut lambda = vec![0.0; n];
        for (&j, &v) in active.iter().zip(&w) {
            lambda[j] = v;
        }
        RowFit {
            nu,
            chi,
            lambda,
            loglik: out.value,
            iterations: out.iterations,
            converged: out.converged,
        }
    } else {
        RowFit {
            nu: start_nu,
            chi: start_chi,
            lambda: start_full,
            loglik: start_ll,
            iterations: out.iterations,
            converged: out.converged,
        }
    };
    polish_row(data, active, &mut fit);
    fit
}

/// Refines a row fit on the mixture simplex `(ν λ_j, (1-ν) χ, (1-ν)(1-χ))`,
/// where the row likelihood is concave, so boundary optima are reached exactly.
fn polish_row(data: &RowPatterns, active: &[usize], fit: &mut RowFit) {
    let n = data.n;
    let m = active.len();
    let k = m + 2;
    let mut design = Vec::with_capacity(data.counts.len() * k);
    for (r, &hit) in data.hits.iter().enumerate() {
        let ag = &data.agree[r * n..(r + 1) * n];
        design.extend(active.iter().map(|&j| f64::from(ag[j])));
        design.push(f64::from(u8::from(hit)));
        design.push(f64::from(u8::from(!hit)));
    }
    let mut w0: Vec<f64> = active.iter().map(|&j| fit.nu * fit.lambda[j]).collect();
    w0.push((1.0 - fit.nu) * fit.chi);
    w0.push((1.0 - fit.nu) * (1.0 - fit.chi));
    let mixture = Mixture {
        design: &design,
        counts: &data.counts,
        k,
    };
    let (w, iterations) = mixture.maximize(&w0, &vec![true; k]);
    let nu = w[..m].iter().sum::<f64>().clamp(0.0, 1.0);
    let rest = w[m] + w[m + 1];
    let chi = if rest > 0.0 { w[m] / rest } else { fit.chi };
    let mut lambda = vec![0.0; n];
    if nu > 0.0 {
        for (c, &j) in active.iter().enumerate() {
            lambda[j] = w[c] / nu;
        }
    } else {
        lambda.clone_from(&fit.lambda);
    }
    let ll = data.loglik(nu, chi, &lambda, None);
    if ll > fit.loglik {
        fit.nu = nu;
        fit.chi = chi;
        fit.lambda = lambda;
        fit.loglik = ll;
        fit.converged = true;
    }
    fit.iterations += iterations;
}

/// Boundary fit of a constant row: no copying, `chi` equal to the constant.
pub(crate) fn boundary_row(panel: &BinaryPanel, i: usize) -> RowFit {
    let mut lambda = vec![0.0; panel.n_series()];
    lambda[i] = 1.0;
    RowFit {
        nu: 0.0,
        chi: f64::from(panel.at(i, 0)),
        lambda,
        loglik: 0.0,
        iterations: 0,
        converged: false,
    }
}

/// Warm start for every row: Yule–Walker if solvable, otherwise a neutral point.
pub(crate) fn vdar1_start(panel: &BinaryPanel) -> Vdar1Params {
    match yule_walker_vdar1(panel) {
        Ok(yw) => yw.params,
        Err(_) => {
            let n = panel.n_series();
            Vdar1Params {
                nu: vec![0.5; n],
                lambda: vec![uniform(n); n],
                chi: (0..n).map(|i| mean_of(panel.get(i).values())).collect(),
            }
        }
    }
}

pub(crate) fn assemble_vdar1(rows: Vec<RowFit>) -> FitResult<Vdar1Params> {
    let equation_logliks: Vec<f64> = rows.iter().map(|r| r.loglik).collect();
    let converged = rows.iter().all(|r| r.converged);
    let iterations = rows.iter().map(|r| r.iterations).sum();
    let mut params = Vdar1Params {
        nu: vec![],
        lambda: vec![],
        chi: vec![],
    };
    for r in rows {
        params.nu.push(r.nu);
        params.chi.push(r.chi);
        params.lambda.push(r.lambda);
    }
    FitResult {
        params,
        loglik: equation_logliks.iter().sum(),
        equation_logliks,
        p: 1,
        converged,
        iterations,
    }
}

/// Maximum-likelihood VDAR(1). The likelihood separates across rows, so each
/// row is fitted on its own from the Yule–Walker start.
pub fn mle_vdar1(panel: &BinaryPanel) -> Result<FitResult<Vdar1Params>> {
    check_order(panel.len(), 1)?;
    let n = panel.n_series();
    let start = vdar1_start(panel);
    let all: Vec<usize> = (0..n).collect();
    let opts = OptimOptions::default();
    let rows = (0..n)
        .map(|i| {
            if panel.get(i).is_constant() {
                boundary_row(panel, i)
            } else {
                let data = RowPatterns::build(panel, i);
                fit_row(
                    &data,
                    &all,
                    start.nu[i],
                    start.chi[i],
                    &start.lambda[i],
                    &opts,
                )
            }
        })
        .collect();
    Ok(assemble_vdar1(rows))
}
