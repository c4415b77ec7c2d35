//! Tests of Granger causality in the tail.
//!
//! The likelihood-ratio test compares a DAR(p) fit of the target with the
//! bivariate VDAR(p) fit that also lets the target copy lagged values of the
//! source. The kernel test of Hong et al. is provided as a baseline.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::likelihood::RowPatterns;
use crate::estimation::mle::{
    assemble_vdar1, boundary_row, fit_equation_pair, fit_orders, fit_row, vdar1_start, RowFit,
};
use crate::estimation::yule_walker_bivariate;
use crate::optim::OptimOptions;
use crate::random::{chi_squared_sf, normal_sf};
use crate::series::{BinaryPanel, BinarySeries};

/// Negative likelihood ratios above this are rounding and clamp to zero.
pub const LR_CLAMP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestMethod {
    Lr,
    Hong,
}

impl std::str::FromStr for TestMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(Self::Lr),
            "hong" => Ok(Self::Hong),
            other => Err(Error::Parse(format!("unknown test method '{other}'"))),
        }
    }
}

/// Outcome of a test of `source -> target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcTestResult {
    pub source: String,
    pub target: String,
    pub method: TestMethod,
    /// `Λ` for the likelihood ratio, standardised `Q` for Hong.
    pub statistic: f64,
    /// Degrees of freedom `p` (lr) or bandwidth `M` (hong).
    pub dof_or_bandwidth: usize,
    pub p_value: f64,
    /// BIC-selected order (lr only).
    pub selected_p: Option<usize>,
    /// The target series is constant, so nothing can be tested.
    pub degenerate: bool,
}

fn label(s: &BinarySeries, fallback: &str) -> String {
    s.label().unwrap_or(fallback).to_string()
}

fn lr_from_pair(
    x: &BinarySeries,
    y: &BinarySeries,
    p: usize,
    full: f64,
    restricted: f64,
) -> GcTestResult {
    let raw = 2.0 * (full - restricted);
    let statistic = if raw < 0.0 && raw > -LR_CLAMP_TOL {
        0.0
    } else {
        raw.max(0.0)
    };
    GcTestResult {
        source: label(y, "Y"),
        target: label(x, "X"),
        method: TestMethod::Lr,
        statistic,
        dof_or_bandwidth: p,
        p_value: chi_squared_sf(statistic, p),
        selected_p: Some(p),
        degenerate: x.is_constant(),
    }
}

fn degenerate_lr(x: &BinarySeries, y: &BinarySeries, p: usize) -> GcTestResult {
    GcTestResult {
        source: label(y, "Y"),
        target: label(x, "X"),
        method: TestMethod::Lr,
        statistic: 0.0,
        dof_or_bandwidth: p,
        p_value: 1.0,
        selected_p: Some(p),
        degenerate: true,
    }
}

fn check_pair(x: &BinarySeries, y: &BinarySeries, p: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if p == 0 {
        return Err(Error::InvalidParameters("order must be at least 1".into()));
    }
    if x.len() < p + 2 {
        return Err(Error::InsufficientLength {
            needed: p + 2,
            got: x.len(),
        });
    }
    Ok(())
}

/// Likelihood-ratio test of `y_source -> x_target`. The order is selected
/// once by BIC on the pair; the restricted DAR(p) is fitted at that order, so
/// `Λ ~ χ²(p)` under the null.
pub fn lr_tail_test(
    x_target: &BinarySeries,
    y_source: &BinarySeries,
    p_max: usize,
) -> Result<GcTestResult> {
    check_pair(x_target, y_source, p_max)?;
    if x_target.is_constant() {
        return Ok(degenerate_lr(x_target, y_source, 1));
    }
    let (fits, p) = fit_orders(x_target, y_source, p_max)?;
    let eq = &fits[p - 1][0];
    Ok(lr_from_pair(
        x_target,
        y_source,
        p,
        eq.full.loglik,
        eq.restricted.loglik,
    ))
}

/// Likelihood-ratio test at a fixed order `p`.
pub fn lr_tail_test_fixed_p(
    x_target: &BinarySeries,
    y_source: &BinarySeries,
    p: usize,
) -> Result<GcTestResult> {
    check_pair(x_target, y_source, p)?;
    if x_target.is_constant() {
        return Ok(degenerate_lr(x_target, y_source, p));
    }
    let yw = yule_walker_bivariate(x_target, y_source, p).ok();
    let eq = fit_equation_pair(x_target, y_source, p, yw.as_ref().map(|w| &w.params.x))?;
    Ok(lr_from_pair(
        x_target,
        y_source,
        p,
        eq.full.loglik,
        eq.restricted.loglik,
    ))
}

/// Daniell kernel `sin(πz)/(πz)`, equal to 1 at 0.
pub fn daniell_weight(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        (PI * z).sin() / (PI * z)
    }
}

/// Sample cross-correlations `ρ(j) = Corr(X_t, Y_{t-j})` for `j = 0..T-1`,
/// normalised over the full sample (sums over the overlap divided by `T`).
pub fn cross_correlations(x: &BinarySeries, y: &BinarySeries) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.is_constant() || y.is_constant() {
        return Err(Error::ZeroVariance);
    }
    let t = x.len();
    let centred = |s: &BinarySeries| -> (Vec<f64>, f64) {
        let m = s.count_ones() as f64 / t as f64;
        (
            s.values().iter().map(|&v| f64::from(v) - m).collect(),
            (m * (1.0 - m)).sqrt(),
        )
    };
    let (xc, sx) = centred(x);
    let (yc, sy) = centred(y);
    let size = (2 * t).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let pad = |v: &[f64]| -> Vec<Complex<f64>> {
        let mut out = vec![Complex::new(0.0, 0.0); size];
        for (o, &a) in out.iter_mut().zip(v) {
            o.re = a;
        }
        out
    };
    let mut fx = pad(&xc);
    let mut fy = pad(&yc);
    fwd.process(&mut fx);
    fwd.process(&mut fy);
    for (a, b) in fx.iter_mut().zip(&fy) {
        *a *= b.conj();
    }
    inv.process(&mut fx);
    let norm = size as f64 * t as f64 * sx * sy;
    Ok(fx[..t].iter().map(|c| c.re / norm).collect())
}

/// One-sided kernel test of `y_source -> x_target` with Daniell kernel and
/// bandwidth `m`:
/// `Q = (T Σ_j k²(j/M) ρ²(j) - C_T) / sqrt(2 D_T)`, with
/// `C_T = Σ_j (1 - j/T) k²(j/M)` and `D_T = Σ_j (1 - j/T)(1 - (j+1)/T) k⁴(j/M)`.
pub fn hong_test(
    x_target: &BinarySeries,
    y_source: &BinarySeries,
    m: usize,
) -> Result<GcTestResult> {
    let t = x_target.len();
    if m == 0 || m >= t.max(1) {
        return Err(Error::InvalidParameters(format!(
            "bandwidth {m} outside 1..T"
        )));
    }
    let rho = cross_correlations(x_target, y_source)?;
    let tf = t as f64;
    let mut num = 0.0;
    let mut c_t = 0.0;
    let mut d_t = 0.0;
    for (j, r) in rho.iter().enumerate().take(t).skip(1) {
        let jf = j as f64;
        let k2 = daniell_weight(jf / m as f64).powi(2);
        num += k2 * r * r;
        c_t += (1.0 - jf / tf) * k2;
        if j <= t - 2 {
            d_t += (1.0 - jf / tf) * (1.0 - (jf + 1.0) / tf) * k2 * k2;
        }
    }
    if !(d_t > 0.0) {
        return Err(Error::InsufficientLength { needed: 3, got: t });
    }
    let q = (tf * num - c_t) / (2.0 * d_t).sqrt();
    Ok(GcTestResult {
        source: label(y_source, "Y"),
        target: label(x_target, "X"),
        method: TestMethod::Hong,
        statistic: q,
        dof_or_bandwidth: m,
        p_value: normal_sf(q).clamp(0.0, 1.0),
        selected_p: None,
        degenerate: false,
    })
}

/// Benjamini–Hochberg step-up procedure; returns the rejected indices in
/// ascending order.
pub fn bh_fdr(p_values: &[f64], q: f64) -> Result<Vec<usize>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidValue(format!("FDR level {q} outside (0, 1)")));
    }
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidValue(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let cutoff = (1..=m)
        .rev()
        .find(|&k| p_values[order[k - 1]] <= k as f64 * q / m as f64);
    let Some(k) = cutoff else {
        return Ok(Vec::new());
    };
    let threshold = p_values[order[k - 1]];
    Ok((0..m).filter(|&i| p_values[i] <= threshold).collect())
}

/// One point of the decimation path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecimationStep {
    /// Fraction of off-diagonal couplings pruned.
    pub q: f64,
    pub loglik: f64,
    pub tilted: f64,
    /// Coupling `(row, col)` removed at this step.
    pub removed: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecimationResult {
    /// Coupling matrix of the refitted model at `q_star`; pruned entries are 0.
    pub lambda_validated: Vec<Vec<f64>>,
    pub q_star: f64,
    /// `(q, tilted log-likelihood)` along the path.
    pub tilted_path: Vec<(f64, f64)>,
    pub steps: Vec<DecimationStep>,
    pub loglik_max: f64,
    pub loglik_null: f64,
}

/// Decimation of a VDAR(1) fit: off-diagonal couplings are removed one at a
/// time, weakest first (ties by `(row, col)`), refitting the affected row
/// each time. The selected model maximises the tilted likelihood
/// `ℓ(q) - [(1-q) ℓ_max + q ℓ_0]`, where `ℓ_0` is the fully pruned model of
/// independent DAR(1) chains. Diagonal couplings are never pruned.
pub fn decimate_vdar1(panel: &BinaryPanel) -> Result<DecimationResult> {
    let n = panel.n_series();
    if n < 2 {
        return Err(Error::InvalidParameters(
            "decimation needs at least two series".into(),
        ));
    }
    if panel.len() < 3 {
        return Err(Error::InsufficientLength {
            needed: 3,
            got: panel.len(),
        });
    }
    let opts = OptimOptions::default();
    let start = vdar1_start(panel);
    let data: Vec<Option<RowPatterns>> = (0..n)
        .map(|i| (!panel.get(i).is_constant()).then(|| RowPatterns::build(panel, i)))
        .collect();
    let mut active: Vec<Vec<usize>> = vec![(0..n).collect(); n];
    let mut rows: Vec<RowFit> = (0..n)
        .map(|i| match &data[i] {
            Some(d) => fit_row(
                d,
                &active[i],
                start.nu[i],
                start.chi[i],
                &start.lambda[i],
                &opts,
            ),
            None => boundary_row(panel, i),
        })
        .collect();
    let full = assemble_vdar1(rows.clone());
    let total = n * (n - 1);
    let mut logliks = Vec::with_capacity(total + 1);
    logliks.push(full.loglik);
    let mut removed = Vec::with_capacity(total);
    // (row, new row fit) after each step, to replay up to the chosen q
    let mut history: Vec<(usize, Vec<f64>)> = Vec::with_capacity(total);
    for step in 1..=total {
        let mut weakest: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for &j in &active[i] {
                if j == i {
                    continue;
                }
                let v = rows[i].lambda[j];
                if weakest.is_none_or(|(w, _, _)| v < w) {
                    weakest = Some((v, i, j));
                }
            }
        }
        let (_, i, j) = weakest
            .ok_or_else(|| Error::Convergence(format!("no coupling left at step {step}")))?;
        active[i].retain(|&c| c != j);
        rows[i] = match &data[i] {
            Some(d) => {
                let prev = rows[i].clone();
                fit_row(d, &active[i], prev.nu, prev.chi, &prev.lambda, &opts)
            }
            None => boundary_row(panel, i),
        };
        if !rows[i].loglik.is_finite() {
            return Err(Error::Convergence(format!(
                "refit failed at q = {}",
                step as f64 / total as f64
            )));
        }
        removed.push((i, j));
        history.push((i, rows[i].lambda.clone()));
        logliks.push(rows.iter().map(|r| r.loglik).sum());
    }
    let l_max = logliks[0];
    let l_null = logliks[total];
    let mut steps = Vec::with_capacity(total + 1);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (k, &ll) in logliks.iter().enumerate() {
        let q = k as f64 / total as f64;
        let tilted = if k == 0 || k == total {
            0.0
        } else {
            ll - ((1.0 - q) * l_max + q * l_null)
        };
        if tilted > best.0 {
            best = (tilted, k);
        }
        steps.push(DecimationStep {
            q,
            loglik: ll,
            tilted,
            removed: if k == 0 { None } else { Some(removed[k - 1]) },
        });
    }
    let mut lambda = full.params.lambda.clone();
    for (i, row) in history.iter().take(best.1) {
        lambda[*i] = row.clone();
    }
    Ok(DecimationResult {
        lambda_validated: lambda,
        q_star: best.1 as f64 / total as f64,
        tilted_path: steps.iter().map(|s| (s.q, s.tilted)).collect(),
        steps,
        loglik_max: l_max,
        loglik_null: l_null,
    })
}
