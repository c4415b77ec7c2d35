//! From intraday prices to binary extreme-event series.
//!
//! Returns are deseasonalised slot by slot, standardised by a jump-robust
//! spot volatility, and thresholded. The GARCH VaR filter used for
//! simulated benchmarks lives here too.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::dgp::ArGarch;
use crate::error::{Error, Result};
use crate::optim::{maximize, OptimOptions};
use crate::series::{BinaryPanel, BinarySeries, RealSeries};

/// One-minute returns of one symbol, `returns[day][slot]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntradayGrid {
    pub symbol: String,
    pub returns: Vec<Vec<f64>>,
}

impl IntradayGrid {
    pub fn new(symbol: impl Into<String>, returns: Vec<Vec<f64>>) -> Result<Self> {
        let slots = returns.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        if slots == 0 || returns.iter().any(|d| d.len() != slots) {
            return Err(Error::InvalidValue(
                "intraday grid is not rectangular".into(),
            ));
        }
        if returns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("non-finite return".into()));
        }
        Ok(Self {
            symbol: symbol.into(),
            returns,
        })
    }

    pub fn n_days(&self) -> usize {
        self.returns.len()
    }

    pub fn n_slots(&self) -> usize {
        self.returns[0].len()
    }

    /// Day-major concatenation.
    pub fn flatten(&self) -> Vec<f64> {
        self.returns.iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntradayPanel {
    pub grids: Vec<IntradayGrid>,
}

fn population_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt()
}

/// Normalised absolute returns `|r_{d,t}| / s_d`; `None` for days with `s_d = 0`.
fn day_profiles(grid: &IntradayGrid) -> Vec<Option<Vec<f64>>> {
    grid.returns
        .iter()
        .map(|day| {
            let abs: Vec<f64> = day.iter().map(|r| r.abs()).collect();
            let s = population_sd(&abs);
            (s > 0.0).then(|| abs.iter().map(|a| a / s).collect())
        })
        .collect()
}

fn average_profile(profiles: &[Option<Vec<f64>>], slots: usize) -> Option<Vec<f64>> {
    let used: Vec<&Vec<f64>> = profiles.iter().flatten().collect();
    if used.is_empty() {
        return None;
    }
    let mut u = vec![0.0; slots];
    for p in &used {
        for (a, b) in u.iter_mut().zip(p.iter()) {
            *a += b;
        }
    }
    u.iter_mut().for_each(|v| *v /= used.len() as f64);
    Some(u)
}

fn divide_day(
    day: &[f64],
    u: &[f64],
    symbol: &str,
    d: usize,
    warnings: &mut Vec<String>,
) -> Vec<f64> {
    day.iter()
        .zip(u)
        .enumerate()
        .map(|(t, (&r, &w))| {
            if w > 0.0 {
                r / w
            } else {
                warnings.push(format!(
                    "{symbol}: u = 0 at day {d} slot {t}, passed through"
                ));
                r
            }
        })
        .collect()
}

/// Removes the intraday seasonality: `u_t = mean_d |r_{d,t}| / s_d` over all
/// days, with `s_d` the population standard deviation of the day's absolute
/// returns, and every return divided by its slot's `u_t`. Days with `s_d = 0`
/// are left out of the average; slots with `u_t = 0` pass through.
pub fn intraday_rescale(panel: &IntradayPanel) -> Result<(IntradayPanel, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut grids = Vec::with_capacity(panel.grids.len());
    for g in &panel.grids {
        let profiles = day_profiles(g);
        for (d, p) in profiles.iter().enumerate() {
            if p.is_none() {
                warnings.push(format!(
                    "{}: day {d} has constant absolute returns, excluded from u",
                    g.symbol
                ));
            }
        }
        let u = average_profile(&profiles, g.n_slots()).unwrap_or_else(|| vec![0.0; g.n_slots()]);
        let returns = g
            .returns
            .iter()
            .enumerate()
            .map(|(d, day)| divide_day(day, &u, &g.symbol, d, &mut warnings))
            .collect();
        grids.push(IntradayGrid {
            symbol: g.symbol.clone(),
            returns,
        });
    }
    Ok((IntradayPanel { grids }, warnings))
}

/// Look-ahead-free variant: day `d` is rescaled with `u` averaged over days
/// before `d`; the first day passes through.
pub fn intraday_rescale_causal(panel: &IntradayPanel) -> Result<(IntradayPanel, Vec<String>)> {
    let mut warnings = Vec::new();
    let mut grids = Vec::with_capacity(panel.grids.len());
    for g in &panel.grids {
        let profiles = day_profiles(g);
        let mut returns = Vec::with_capacity(g.n_days());
        for (d, day) in g.returns.iter().enumerate() {
            match average_profile(&profiles[..d], g.n_slots()) {
                Some(u) => returns.push(divide_day(day, &u, &g.symbol, d, &mut warnings)),
                None => {
                    warnings.push(format!(
                        "{}: no past days for day {d}, passed through",
                        g.symbol
                    ));
                    returns.push(day.clone());
                }
            }
        }
        grids.push(IntradayGrid {
            symbol: g.symbol.clone(),
            returns,
        });
    }
    Ok((IntradayPanel { grids }, warnings))
}

/// Parameters of the threshold bipower spot-volatility recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityConfig {
    pub alpha: f64,
    pub theta: f64,
    pub mu1: f64,
    /// Initial volatility; derived from the first returns when `None`.
    pub sigma0: Option<f64>,
}

impl Default for VolatilityConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0 / 61.0,
            theta: 4.0,
            mu1: (2.0 / PI).sqrt(),
            sigma0: None,
        }
    }
}

impl VolatilityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "alpha = {} outside (0, 1)",
                self.alpha
            )));
        }
        if !(self.theta > 0.0) || !(self.mu1 > 0.0) {
            return Err(Error::InvalidParameters(
                "theta and mu1 must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Number of leading returns used to initialise the spot volatility.
pub const INIT_WINDOW: usize = 30;

/// Spot volatility path and the times at which fewer than two non-jump
/// returns were available (volatility carried over).
#[derive(Debug, Clone, PartialEq)]
pub struct SpotVolatility {
    pub sigma: RealSeries,
    pub carried: Vec<usize>,
}

/// Threshold bipower EWMA:
/// `σ²_t = α μ₁⁻² |r_{t''}| |r_{t'}| + (1 - α) σ²_{t-1}`, where `t'' < t' ≤ t-1`
/// are the two most recent returns with `|r_s / σ_s| ≤ θ`. The start value is
/// `μ₁⁻²` times the mean of `|r_t| |r_{t+1}|` over the first 30 returns.
pub fn spot_volatility(returns: &RealSeries, cfg: &VolatilityConfig) -> Result<SpotVolatility> {
    cfg.validate()?;
    let r = returns.values();
    let n = r.len();
    if n < 3 {
        return Err(Error::InsufficientLength { needed: 3, got: n });
    }
    let scale = cfg.mu1.powi(-2);
    let var0 = match cfg.sigma0 {
        Some(s) if s > 0.0 => s * s,
        Some(s) => {
            return Err(Error::InvalidParameters(format!(
                "sigma0 = {s} must be positive"
            )))
        }
        None => {
            let m = INIT_WINDOW.min(n - 1);
            scale * (0..m).map(|t| r[t].abs() * r[t + 1].abs()).sum::<f64>() / m as f64
        }
    };
    if !(var0 > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let mut var = Vec::with_capacity(n);
    var.push(var0);
    let mut carried = Vec::new();
    // two most recent non-jump indices, older first
    let mut last: [Option<usize>; 2] = [None, None];
    for t in 1..n {
        let s = t - 1;
        if r[s].abs() <= cfg.theta * var[s].sqrt() {
            last = [last[1], Some(s)];
        }
        let next = match last {
            [Some(a), Some(b)] => {
                cfg.alpha * scale * r[a].abs() * r[b].abs() + (1.0 - cfg.alpha) * var[s]
            }
            _ => {
                carried.push(t);
                var[s]
            }
        };
        var.push(next);
    }
    let sigma = RealSeries::new(var.into_iter().map(f64::sqrt).collect())?;
    Ok(SpotVolatility { sigma, carried })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Self::Left),
            "right" => Ok(Self::Right),
            other => Err(Error::Parse(format!("unknown side '{other}'"))),
        }
    }
}

/// `X_t = 1` iff `r_t / σ_t < -θ` (left) or `> θ` (right).
pub fn extract_extremes(
    returns: &RealSeries,
    sigma: &RealSeries,
    theta: f64,
    side: Side,
) -> Result<BinarySeries> {
    if returns.len() != sigma.len() {
        return Err(Error::LengthMismatch(returns.len(), sigma.len()));
    }
    if sigma.values().iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidValue(
            "volatility must be strictly positive".into(),
        ));
    }
    BinarySeries::from_bools(returns.values().iter().zip(sigma.values()).map(|(&r, &s)| {
        let z = r / s;
        match side {
            Side::Left => z < -theta,
            Side::Right => z > theta,
        }
    }))
}

/// Left-tail multiplier of the 5% Gaussian VaR.
pub const VAR_MULTIPLIER: f64 = 1.64;
const VARIANCE_FLOOR: f64 = 1e-12;

/// Quasi-MLE AR(1)+GARCH(1,1) fit and its 5% VaR exceedances.
#[derive(Debug, Clone, PartialEq)]
pub struct GarchFilter {
    pub model: ArGarch,
    /// Conditional standard deviations `σ̂_t`.
    pub sigma: Vec<f64>,
    pub hits: BinarySeries,
    pub loglik: f64,
    pub iterations: usize,
}

struct GarchCoords {
    model: ArGarch,
    /// d(beta, omega, persistence, arch) / dz, row per parameter
    jac: [[f64; 4]; 4],
}

fn decode_garch(z: &[f64]) -> GarchCoords {
    let th = z[0].tanh();
    let beta = 0.999 * th;
    let omega = z[1].exp();
    let m = z[2].max(z[3]).max(0.0);
    let (e2, e3, e0) = ((z[2] - m).exp(), (z[3] - m).exp(), (-m).exp());
    let s = e2 + e3 + e0;
    let (a, b) = (e2 / s, e3 / s);
    let mut jac = [[0.0; 4]; 4];
    jac[0][0] = 0.999 * (1.0 - th * th);
    jac[1][1] = omega;
    jac[2][2] = a * (1.0 - a);
    jac[2][3] = -a * b;
    jac[3][2] = -a * b;
    jac[3][3] = b * (1.0 - b);
    GarchCoords {
        model: ArGarch {
            beta,
            omega,
            persistence: a,
            arch: b,
        },
        jac,
    }
}

fn encode_garch(m: &ArGarch) -> Vec<f64> {
    let slack = 1.0 - m.persistence - m.arch;
    vec![
        (m.beta / 0.999).clamp(-0.999, 0.999).atanh(),
        m.omega.ln(),
        (m.persistence / slack).ln(),
        (m.arch / slack).ln(),
    ]
}

/// Gaussian quasi log-likelihood (constants dropped) over `t = 1..T-1`, with
/// `σ²_1` fixed at `h0`, and its gradient in `(beta, omega, persistence, arch)`.
fn garch_loglik(
    x: &[f64],
    m: &ArGarch,
    h0: f64,
    grad: &mut [f64; 4],
    path: Option<&mut Vec<f64>>,
) -> f64 {
    let mut ll = 0.0;
    *grad = [0.0; 4];
    let mut h = h0;
    let mut dh = [0.0; 4];
    let mut u_prev = 0.0;
    let mut du_prev = 0.0;
    let mut out = path;
    if let Some(p) = out.as_deref_mut() {
        p.clear();
        p.push(h0);
    }
    for t in 1..x.len() {
        if t >= 2 {
            let nh = m.omega + m.persistence * h + m.arch * u_prev * u_prev;
            let ndh = [
                m.persistence * dh[0] + 2.0 * m.arch * u_prev * du_prev,
                1.0 + m.persistence * dh[1],
                h + m.persistence * dh[2],
                u_prev * u_prev + m.persistence * dh[3],
            ];
            if nh > VARIANCE_FLOOR {
                h = nh;
                dh = ndh;
            } else {
                h = VARIANCE_FLOOR;
                dh = [0.0; 4];
            }
        }
        let u = x[t] - m.beta * x[t - 1];
        let du = -x[t - 1];
        ll -= 0.5 * (h.ln() + u * u / h);
        let c = 0.5 * (u * u / (h * h) - 1.0 / h);
        for k in 0..4 {
            grad[k] += c * dh[k];
        }
        grad[0] -= u * du / h;
        if let Some(p) = out.as_deref_mut() {
            p.push(h);
        }
        u_prev = u;
        du_prev = du;
    }
    ll
}

/// Fits `x_t = β x_{t-1} + u_t`, `σ²_t = ω + a σ²_{t-1} + b u²_{t-1}` by
/// Gaussian quasi-MLE and marks `x_t < -1.64 σ̂_t`.
pub fn garch_var_filter(x: &RealSeries) -> Result<GarchFilter> {
    let v = x.values();
    let n = v.len();
    if n < 100 {
        return Err(Error::InsufficientLength {
            needed: 100,
            got: n,
        });
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let sxy: f64 = v.windows(2).map(|w| w[0] * w[1]).sum();
    let sxx: f64 = v[..n - 1].iter().map(|a| a * a).sum();
    let beta0 = (sxy / sxx).clamp(-0.9, 0.9);
    let h0 = var * (1.0 - beta0 * beta0);
    let opts = OptimOptions::default();
    let objective = |z: &[f64], dz: &mut [f64]| {
        let c = decode_garch(z);
        let mut g = [0.0; 4];
        let ll = garch_loglik(v, &c.model, h0, &mut g, None);
        for (j, d) in dz.iter_mut().enumerate() {
            *d = (0..4).map(|k| g[k] * c.jac[k][j]).sum();
        }
        ll
    };
    let starts = [(0.6, 0.2), (0.1, 0.1)];
    let mut best: Option<crate::optim::OptimOutcome> = None;
    for (a, b) in starts {
        let start = ArGarch {
            beta: beta0,
            omega: h0 * (1.0 - a - b),
            persistence: a,
            arch: b,
        };
        let out = maximize(objective, encode_garch(&start), &opts);
        if best.as_ref().is_none_or(|o| out.value > o.value) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    if !best.converged || !best.value.is_finite() {
        return Err(Error::Convergence(format!(
            "GARCH quasi-MLE stopped after {} iterations at loglik {}",
            best.iterations, best.value
        )));
    }
    let model = decode_garch(&best.x).model;
    let mut path = Vec::with_capacity(n);
    let mut g = [0.0; 4];
    garch_loglik(v, &model, h0, &mut g, Some(&mut path));
    let sigma: Vec<f64> = path.iter().map(|h| h.sqrt()).collect();
    let hits =
        BinarySeries::from_bools(v.iter().zip(&sigma).map(|(&a, &s)| a < -VAR_MULTIPLIER * s))?;
    Ok(GarchFilter {
        model,
        sigma,
        hits,
        loglik: best.value,
        iterations: best.iterations,
    })
}

/// Settings of the price-to-hits pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub volatility: VolatilityConfig,
    pub side: Side,
    pub causal_rescale: bool,
    /// Leading observations dropped after volatility initialisation.
    pub warmup: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            volatility: VolatilityConfig::default(),
            side: Side::Left,
            causal_rescale: false,
            warmup: INIT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub hit_frequency: BTreeMap<String, f64>,
    pub chi_min: f64,
    pub chi_max: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub panel: BinaryPanel,
    pub summary: PipelineSummary,
}

#[derive(Debug, Deserialize)]
struct IntradayRow {
    day: i64,
    slot: i64,
    symbol: String,
    #[serde(default)]
    price: Option<f64>,
    #[serde(rename = "return", default)]
    ret: Option<f64>,
}

/// Reads `day,slot,symbol,price` or `day,slot,symbol,return` CSV. Prices are
/// turned into within-day log returns, so each day loses its first slot.
pub fn read_intraday_csv<R: Read>(reader: R) -> Result<IntradayPanel> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let has = |h: &str| headers.iter().any(|c| c == h);
    let prices = has("price");
    if !prices && !has("return") {
        return Err(Error::Parse("expected a 'price' or 'return' column".into()));
    }
    let mut data: BTreeMap<String, BTreeMap<i64, BTreeMap<i64, f64>>> = BTreeMap::new();
    for row in rdr.deserialize() {
        let row: IntradayRow = row?;
        let value = if prices { row.price } else { row.ret }
            .ok_or_else(|| Error::Parse("missing value".into()))?;
        if prices && !(value > 0.0) {
            return Err(Error::InvalidValue(format!("non-positive price {value}")));
        }
        if data
            .entry(row.symbol.clone())
            .or_default()
            .entry(row.day)
            .or_default()
            .insert(row.slot, value)
            .is_some()
        {
            return Err(Error::InvalidValue(format!(
                "duplicate entry {} day {} slot {}",
                row.symbol, row.day, row.slot
            )));
        }
    }
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let grids = data
        .into_iter()
        .map(|(symbol, days)| {
            let returns = days
                .into_values()
                .map(|slots| {
                    let v: Vec<f64> = slots.into_values().collect();
                    if prices {
                        v.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
                    } else {
                        v
                    }
                })
                .collect();
            IntradayGrid::new(symbol, returns)
        })
        .collect::<Result<Vec<_>>>()?;
    let len = grids[0].n_days() * grids[0].n_slots();
    if grids.iter().any(|g| g.n_days() * g.n_slots() != len) {
        return Err(Error::InvalidValue("symbols cover different grids".into()));
    }
    Ok(IntradayPanel { grids })
}

/// Rescale, estimate spot volatility, threshold, drop the warm-up.
pub fn run_pipeline(panel: &IntradayPanel, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let (rescaled, mut warnings) = if cfg.causal_rescale {
        intraday_rescale_causal(panel)?
    } else {
        intraday_rescale(panel)?
    };
    let mut series = Vec::with_capacity(rescaled.grids.len());
    let mut freq = BTreeMap::new();
    for g in &rescaled.grids {
        let r = RealSeries::new(g.flatten())?;
        let vol = spot_volatility(&r, &cfg.volatility)?;
        if !vol.carried.is_empty() {
            warnings.push(format!(
                "{}: volatility carried at {} steps",
                g.symbol,
                vol.carried.len()
            ));
        }
        let hits = extract_extremes(&r, &vol.sigma, cfg.volatility.theta, cfg.side)?;
        let hits = hits.skip(cfg.warmup)?.with_label(g.symbol.clone());
        freq.insert(
            g.symbol.clone(),
            hits.count_ones() as f64 / hits.len() as f64,
        );
        series.push(hits);
    }
    let chi_min = freq.values().copied().fold(f64::INFINITY, f64::min);
    let chi_max = freq.values().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PipelineOutput {
        panel: BinaryPanel::new(series)?,
        summary: PipelineSummary {
            hit_frequency: freq,
            chi_min,
            chi_max,
            warnings,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(days: Vec<Vec<f64>>) -> IntradayPanel {
        IntradayPanel {
            grids: vec![IntradayGrid::new("A", days).unwrap()],
        }
    }

    #[test]
    fn rescale_hand_case() {
        let (out, w) = intraday_rescale(&grid(vec![vec![0.01, -0.02, 0.01]])).unwrap();
        assert!(w.is_empty());
        let r = &out.grids[0].returns[0];
        // r / u = r s / |r| = ±s with s = 0.01 sqrt(2/9)
        let expected = 0.01 * (2.0f64 / 9.0).sqrt();
        assert!(
            (r[0] - 0.004714).abs() < 1e-6
                && (r[1] + 0.004714).abs() < 1e-6
                && (r[2] - 0.004714).abs() < 1e-6
        );
        assert!((r[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn rescale_identical_days_and_signs() {
        let day = vec![0.003, -0.001, 0.002, -0.004];
        let (out, _) = intraday_rescale(&grid(vec![day.clone(), day.clone()])).unwrap();
        assert_eq!(out.grids[0].returns[0], out.grids[0].returns[1]);
        for (a, b) in out.grids[0].returns[0].iter().zip(&day) {
            assert_eq!(a.signum(), b.signum());
        }
    }

    #[test]
    fn rescale_flags_flat_days_and_causal_first_day() {
        let p = grid(vec![vec![0.01, 0.01, -0.01], vec![0.01, -0.03, 0.02]]);
        let (_, w) = intraday_rescale(&p).unwrap();
        assert_eq!(w.len(), 1);
        let (c, w) = intraday_rescale_causal(&p).unwrap();
        assert_eq!(c.grids[0].returns[0], p.grids[0].returns[0]);
        assert!(w.iter().any(|m| m.contains("no past days")));
    }

    #[test]
    fn constant_stream_fixed_point() {
        let r = RealSeries::new(vec![0.01; 3000]).unwrap();
        let cfg = VolatilityConfig {
            sigma0: Some(0.05),
            ..Default::default()
        };
        let s = spot_volatility(&r, &cfg).unwrap();
        let last = *s.sigma.values().last().unwrap();
        assert!((last - (PI / 2.0).sqrt() * 0.01).abs() < 1e-9);
        assert!((last / 0.01 - 1.2533).abs() < 1e-4);
    }

    #[test]
    fn jump_is_excluded() {
        let mut v = vec![0.01; 200];
        v[100] = 1.0;
        let r = RealSeries::new(v).unwrap();
        let s = spot_volatility(&r, &VolatilityConfig::default()).unwrap();
        let sig = s.sigma.values();
        // the start value is already the fixed point and the jump never
        // enters a bipower product, so the path stays flat
        let fixed = (PI / 2.0).sqrt() * 0.01;
        assert!(sig.iter().all(|&x| (x - fixed).abs() < 1e-12));
    }

    #[test]
    fn extremes_threshold_and_scale_invariance() {
        let r = RealSeries::new(vec![-4.5, -3.9, 4.5, 0.0]).unwrap();
        let s = RealSeries::new(vec![1.0; 4]).unwrap();
        assert_eq!(
            extract_extremes(&r, &s, 4.0, Side::Left).unwrap().values(),
            &[1, 0, 0, 0]
        );
        assert_eq!(
            extract_extremes(&r, &s, 4.0, Side::Right).unwrap().values(),
            &[0, 0, 1, 0]
        );
        let r2 = RealSeries::new(r.values().iter().map(|v| v * 3.7).collect()).unwrap();
        let s2 = RealSeries::new(vec![3.7; 4]).unwrap();
        assert_eq!(
            extract_extremes(&r2, &s2, 4.0, Side::Left).unwrap(),
            extract_extremes(&r, &s, 4.0, Side::Left).unwrap()
        );
        assert!(extract_extremes(
            &r,
            &RealSeries::new(vec![1.0, 0.0, 1.0, 1.0]).unwrap(),
            4.0,
            Side::Left
        )
        .is_err());
    }

    #[test]
    fn garch_gradient_matches_differences() {
        let x: Vec<f64> = (0..300)
            .map(|t| ((t as f64) * 0.7).sin() * (1.0 + 0.3 * ((t as f64) * 0.05).cos()))
            .collect();
        let m = ArGarch {
            beta: 0.3,
            omega: 0.2,
            persistence: 0.5,
            arch: 0.2,
        };
        let mut g = [0.0; 4];
        garch_loglik(&x, &m, 0.5, &mut g, None);
        let f = |m: &ArGarch| garch_loglik(&x, m, 0.5, &mut [0.0; 4], None);
        let h = 1e-6;
        let bump = |k: usize, d: f64| {
            let mut c = m;
            match k {
                0 => c.beta += d,
                1 => c.omega += d,
                2 => c.persistence += d,
                _ => c.arch += d,
            }
            c
        };
        for (k, gk) in g.iter().enumerate() {
            let num = (f(&bump(k, h)) - f(&bump(k, -h))) / (2.0 * h);
            assert!(
                (num - gk).abs() < 1e-5 * num.abs().max(1.0),
                "{k}: {num} vs {gk}"
            );
        }
    }

    #[test]
    fn csv_prices_to_returns() {
        let csv = "day,slot,symbol,price\n0,0,A,100\n0,1,A,101\n0,2,A,100\n1,0,A,100\n1,1,A,99\n1,2,A,100\n";
        let p = read_intraday_csv(csv.as_bytes()).unwrap();
        assert_eq!(p.grids[0].returns.len(), 2);
        assert!((p.grids[0].returns[0][0] - (1.01f64).ln()).abs() < 1e-12);
        assert!(read_intraday_csv("day,slot,symbol,x\n0,0,A,1\n".as_bytes()).is_err());
    }
}
