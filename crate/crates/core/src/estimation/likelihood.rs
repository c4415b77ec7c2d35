//! Conditional log-likelihoods of DAR(p), bivariate VDAR(p) and VDAR(1).
//!
//! Every likelihood term depends on the data only through the target bit and
//! the pattern of agreements between the target and the lagged values it may
//! copy. The data are reduced once to counted patterns, so evaluating the
//! likelihood or its gradient costs O(#patterns) rather than O(T).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::params::{BiEquation, DarParams, Vdar1Params};
use crate::series::{BinaryPanel, BinarySeries};

/// Largest supported autoregressive order (agreement masks are `u32`).
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LagPattern {
    pub hit: bool,
    /// bit `k-1` set iff `X_t == X_{t-k}`
    pub own: u32,
    /// bit `k-1` set iff `X_t == Y_{t-k}`
    pub cross: u32,
    pub count: f64,
}

/// Counted agreement patterns of one bivariate equation (target `x`,
/// source `y`) over `t = p+1..T`.
#[derive(Debug, Clone)]
pub(crate) struct LagPatterns {
    pub p: usize,
    pub patterns: Vec<LagPattern>,
}

impl LagPatterns {
    pub fn build(x: &[u8], y: Option<&[u8]>, p: usize) -> Result<Self> {
        if p == 0 || p > MAX_ORDER {
            return Err(Error::InvalidParameters(format!(
                "order {p} outside 1..={MAX_ORDER}"
            )));
        }
        if let Some(y) = y {
            if y.len() != x.len() {
                return Err(Error::LengthMismatch(x.len(), y.len()));
            }
        }
        if x.len() < p + 1 {
            return Err(Error::InsufficientLength {
                needed: p + 1,
                got: x.len(),
            });
        }
        let mut counts: HashMap<u64, f64> = HashMap::new();
        for t in p..x.len() {
            let xt = x[t];
            let mut own = 0u32;
            let mut cross = 0u32;
            for k in 1..=p {
                own |= u32::from(x[t - k] == xt) << (k - 1);
                if let Some(y) = y {
                    cross |= u32::from(y[t - k] == xt) << (k - 1);
                }
            }
            let key = u64::from(xt) | (u64::from(own) << 1) | (u64::from(cross) << 33);
            *counts.entry(key).or_insert(0.0) += 1.0;
        }
        let mut keys: Vec<(u64, f64)> = counts.into_iter().collect();
        keys.sort_unstable_by_key(|&(k, _)| k);
        let patterns = keys
            .into_iter()
            .map(|(k, count)| LagPattern {
                hit: k & 1 == 1,
                own: ((k >> 1) & 0xFFFF_FFFF) as u32,
                cross: (k >> 33) as u32,
                count,
            })
            .collect();
        Ok(Self { p, patterns })
    }

    /// Log-likelihood of one bivariate equation; with `grad` it also fills
    /// the gradient in the layout `[nu, lambda, chi, gamma_own.., gamma_cross..]`.
    pub fn loglik(&self, eq: &BiEquation, mut grad: Option<&mut [f64]>) -> f64 {
        let p = self.p;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut ll = 0.0;
        for pat in &self.patterns {
            let mut so = 0.0;
            let mut sc = 0.0;
            for k in 0..p {
                if pat.own >> k & 1 == 1 {
                    so += eq.gamma_own[k];
                }
                if pat.cross >> k & 1 == 1 {
                    sc += eq.gamma_cross[k];
                }
            }
            let marginal = if pat.hit { eq.chi } else { 1.0 - eq.chi };
            let copy = (1.0 - eq.lambda) * so + eq.lambda * sc;
            let prob = eq.nu * copy + (1.0 - eq.nu) * marginal;
            if !(prob > 0.0) {
                return f64::NEG_INFINITY;
            }
            ll += pat.count * prob.ln();
            if let Some(g) = grad.as_deref_mut() {
                let w = pat.count / prob;
                g[0] += w * (copy - marginal);
                g[1] += w * eq.nu * (sc - so);
                g[2] += w * (1.0 - eq.nu) * if pat.hit { 1.0 } else { -1.0 };
                for k in 0..p {
                    if pat.own >> k & 1 == 1 {
                        g[3 + k] += w * eq.nu * (1.0 - eq.lambda);
                    }
                    if pat.cross >> k & 1 == 1 {
                        g[3 + p + k] += w * eq.nu * eq.lambda;
                    }
                }
            }
        }
        ll
    }
}

/// Counted agreement patterns for row `i` of a VDAR(1) panel.
#[derive(Debug, Clone)]
pub(crate) struct RowPatterns {
    pub n: usize,
    pub hits: Vec<bool>,
    pub counts: Vec<f64>,
    /// row-major `patterns × n`: 1 iff `X^i_t == X^j_{t-1}`
    pub agree: Vec<u8>,
}

impl RowPatterns {
    pub fn build(panel: &BinaryPanel, i: usize) -> Self {
        let n = panel.n_series();
        let t_len = panel.len();
        let words = n.div_ceil(63);
        let mut counts: HashMap<Vec<u64>, f64> = HashMap::new();
        let mut key = vec![0u64; words + 1];
        for t in 1..t_len {
            let xt = panel.at(i, t);
            key.iter_mut().for_each(|w| *w = 0);
            key[0] = u64::from(xt);
            for j in 0..n {
                if panel.at(j, t - 1) == xt {
                    key[1 + j / 63] |= 1 << (j % 63);
                }
            }
            match counts.get_mut(&key) {
                Some(c) => *c += 1.0,
                None => {
                    counts.insert(key.clone(), 1.0);
                }
            }
        }
        let mut entries: Vec<(Vec<u64>, f64)> = counts.into_iter().collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut hits = Vec::with_capacity(entries.len());
        let mut cnts = Vec::with_capacity(entries.len());
        let mut agree = Vec::with_capacity(entries.len() * n);
        for (k, c) in entries {
            hits.push(k[0] == 1);
            cnts.push(c);
            agree.extend((0..n).map(|j| ((k[1 + j / 63] >> (j % 63)) & 1) as u8));
        }
        Self {
            n,
            hits,
            counts: cnts,
            agree,
        }
    }

    /// Row log-likelihood; gradient layout `[nu, chi, lambda_0..lambda_{n-1}]`.
    pub fn loglik(&self, nu: f64, chi: f64, lambda: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let n = self.n;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut ll = 0.0;
        for (r, (&hit, &count)) in self.hits.iter().zip(&self.counts).enumerate() {
            let ag = &self.agree[r * n..(r + 1) * n];
            let copy: f64 = ag
                .iter()
                .zip(lambda)
                .map(|(&a, &l)| if a == 1 { l } else { 0.0 })
                .sum();
            let marginal = if hit { chi } else { 1.0 - chi };
            let prob = nu * copy + (1.0 - nu) * marginal;
            if !(prob > 0.0) {
                return f64::NEG_INFINITY;
            }
            ll += count * prob.ln();
            if let Some(g) = grad.as_deref_mut() {
                let w = count / prob;
                g[0] += w * (copy - marginal);
                g[1] += w * (1.0 - nu) * if hit { 1.0 } else { -1.0 };
                for j in 0..n {
                    if ag[j] == 1 {
                        g[2 + j] += w * nu;
                    }
                }
            }
        }
        ll
    }
}

/// DAR(p) conditional log-likelihood given the first `p` observations.
/// Returns `-∞` when some conditional probability is zero (degenerate
/// likelihood).
pub fn loglik_dar(x: &BinarySeries, params: &DarParams) -> Result<f64> {
    params.validate()?;
    let data = LagPatterns::build(x.values(), None, params.order())?;
    Ok(data.loglik(&BiEquation::from_dar(params), None))
}

/// Gradient of [`loglik_dar`] with respect to `(nu, gamma, chi)`, each entry
/// treated as a free coordinate. Returned in a `DarParams`-shaped container.
pub fn loglik_dar_gradient(x: &BinarySeries, params: &DarParams) -> Result<(f64, DarParams)> {
    let p = params.order();
    let data = LagPatterns::build(x.values(), None, p)?;
    let mut g = vec![0.0; 3 + 2 * p];
    let ll = data.loglik(&BiEquation::from_dar(params), Some(&mut g));
    Ok((
        ll,
        DarParams {
            nu: g[0],
            chi: g[2],
            gamma: g[3..3 + p].to_vec(),
        },
    ))
}

/// Conditional log-likelihood of the `x` equation of a bivariate VDAR(p),
/// given `y` and the first `p` observations. Call with the arguments (and
/// the `y` equation) swapped for the other direction.
pub fn loglik_vdar_bivariate(x: &BinarySeries, y: &BinarySeries, eq: &BiEquation) -> Result<f64> {
    eq.validate()?;
    let data = LagPatterns::build(x.values(), Some(y.values()), eq.order())?;
    Ok(data.loglik(eq, None))
}

/// Gradient of [`loglik_vdar_bivariate`] in a `BiEquation`-shaped container.
pub fn loglik_vdar_bivariate_gradient(
    x: &BinarySeries,
    y: &BinarySeries,
    eq: &BiEquation,
) -> Result<(f64, BiEquation)> {
    let p = eq.order();
    let data = LagPatterns::build(x.values(), Some(y.values()), p)?;
    let mut g = vec![0.0; 3 + 2 * p];
    let ll = data.loglik(eq, Some(&mut g));
    Ok((
        ll,
        BiEquation {
            nu: g[0],
            lambda: g[1],
            chi: g[2],
            gamma_own: g[3..3 + p].to_vec(),
            gamma_cross: g[3 + p..].to_vec(),
        },
    ))
}

fn check_vdar1_dims(panel: &BinaryPanel, params: &Vdar1Params) -> Result<()> {
    if panel.n_series() != params.n() {
        return Err(Error::LengthMismatch(panel.n_series(), params.n()));
    }
    if panel.len() < 2 {
        return Err(Error::InsufficientLength {
            needed: 2,
            got: panel.len(),
        });
    }
    Ok(())
}

/// VDAR(1) log-likelihood conditional on the first observation.
pub fn loglik_vdar1(panel: &BinaryPanel, params: &Vdar1Params) -> Result<f64> {
    params.validate()?;
    check_vdar1_dims(panel, params)?;
    Ok(per_row_loglik(panel, params).iter().sum())
}

pub(crate) fn per_row_loglik(panel: &BinaryPanel, params: &Vdar1Params) -> Vec<f64> {
    (0..params.n())
        .map(|i| {
            RowPatterns::build(panel, i).loglik(
                params.nu[i],
                params.chi[i],
                &params.lambda[i],
                None,
            )
        })
        .collect()
}

/// Gradient of [`loglik_vdar1`] in a `Vdar1Params`-shaped container.
pub fn loglik_vdar1_gradient(
    panel: &BinaryPanel,
    params: &Vdar1Params,
) -> Result<(f64, Vdar1Params)> {
    check_vdar1_dims(panel, params)?;
    let n = params.n();
    let mut out = Vdar1Params {
        nu: vec![0.0; n],
        chi: vec![0.0; n],
        lambda: vec![vec![0.0; n]; n],
    };
    let mut total = 0.0;
    let mut g = vec![0.0; n + 2];
    for i in 0..n {
        total += RowPatterns::build(panel, i).loglik(
            params.nu[i],
            params.chi[i],
            &params.lambda[i],
            Some(&mut g),
        );
        out.nu[i] = g[0];
        out.chi[i] = g[1];
        out.lambda[i].copy_from_slice(&g[2..]);
    }
    Ok((total, out))
}
