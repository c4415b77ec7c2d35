//! Parameter sets of the DAR / VDAR family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SIMPLEX_TOL: f64 = 1e-12;

fn check_prob(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "{name} = {v} outside [0, 1]"
        )));
    }
    Ok(())
}

fn check_simplex(name: &str, w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidParameters(format!("{name} is empty")));
    }
    if w.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "{name} has negative entries"
        )));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidParameters(format!(
            "{name} sums to {s}, not 1"
        )));
    }
    Ok(())
}

/// Rescales a nonnegative vector onto the simplex; uniform if it sums to 0.
pub(crate) fn normalize(w: &mut [f64]) {
    for v in w.iter_mut() {
        if *v < 0.0 || !v.is_finite() {
            *v = 0.0;
        }
    }
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter_mut().for_each(|v| *v /= s);
    } else {
        let u = 1.0 / w.len() as f64;
        w.iter_mut().for_each(|v| *v = u);
    }
}

/// Univariate DAR(p): copy probability `nu`, lag weights `gamma`, marginal `chi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DarParams {
    pub nu: f64,
    pub gamma: Vec<f64>,
    pub chi: f64,
}

impl DarParams {
    pub fn new(nu: f64, gamma: Vec<f64>, chi: f64) -> Result<Self> {
        let p = Self { nu, gamma, chi };
        p.validate()?;
        Ok(p)
    }

    /// DAR(p) with uniform lag weights.
    pub fn uniform(nu: f64, chi: f64, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameters("order must be at least 1".into()));
        }
        Self::new(nu, vec![1.0 / p as f64; p], chi)
    }

    pub fn order(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("nu", self.nu)?;
        check_prob("chi", self.chi)?;
        check_simplex("gamma", &self.gamma)
    }
}

/// One equation of the bivariate VDAR(p).
///
/// For the `X` equation `own` lags refer to `X` and `cross` lags to `Y`;
/// `lambda` is the probability of copying from the other series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiEquation {
    pub nu: f64,
    pub lambda: f64,
    pub chi: f64,
    pub gamma_own: Vec<f64>,
    pub gamma_cross: Vec<f64>,
}

impl BiEquation {
    pub fn uniform(nu: f64, lambda: f64, chi: f64, p: usize) -> Self {
        let g = vec![1.0 / p.max(1) as f64; p.max(1)];
        Self {
            nu,
            lambda,
            chi,
            gamma_own: g.clone(),
            gamma_cross: g,
        }
    }

    pub fn order(&self) -> usize {
        self.gamma_own.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("nu", self.nu)?;
        check_prob("lambda", self.lambda)?;
        check_prob("chi", self.chi)?;
        check_simplex("gamma_own", &self.gamma_own)?;
        check_simplex("gamma_cross", &self.gamma_cross)?;
        if self.gamma_own.len() != self.gamma_cross.len() {
            return Err(Error::InvalidParameters("gamma orders differ".into()));
        }
        Ok(())
    }

    /// The nested DAR(p) obtained by dropping the cross terms.
    pub fn restricted(&self) -> DarParams {
        DarParams {
            nu: self.nu,
            gamma: self.gamma_own.clone(),
            chi: self.chi,
        }
    }

    /// Embeds a DAR(p) as an equation with `lambda = 0`.
    pub fn from_dar(d: &DarParams) -> Self {
        let p = d.order();
        Self {
            nu: d.nu,
            lambda: 0.0,
            chi: d.chi,
            gamma_own: d.gamma.clone(),
            gamma_cross: vec![1.0 / p as f64; p],
        }
    }
}

/// Bivariate VDAR(p): equation `x` (index 1) and equation `y` (index 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiVdarParams {
    pub x: BiEquation,
    pub y: BiEquation,
}

impl BiVdarParams {
    pub fn new(x: BiEquation, y: BiEquation) -> Result<Self> {
        let p = Self { x, y };
        p.validate()?;
        Ok(p)
    }

    pub fn order(&self) -> usize {
        self.x.order()
    }

    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()?;
        if self.x.order() != self.y.order() {
            return Err(Error::InvalidParameters("equation orders differ".into()));
        }
        Ok(())
    }
}

/// Multivariate Markov VDAR(1) with row-stochastic coupling matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vdar1Params {
    pub nu: Vec<f64>,
    /// `lambda[i][j]`: probability that series `i` copies series `j`.
    pub lambda: Vec<Vec<f64>>,
    pub chi: Vec<f64>,
}

impl Vdar1Params {
    pub fn new(nu: Vec<f64>, lambda: Vec<Vec<f64>>, chi: Vec<f64>) -> Result<Self> {
        let p = Self { nu, lambda, chi };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.nu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nu.len();
        if n == 0
            || self.chi.len() != n
            || self.lambda.len() != n
            || self.lambda.iter().any(|r| r.len() != n)
        {
            return Err(Error::InvalidParameters("inconsistent dimensions".into()));
        }
        for i in 0..n {
            check_prob("nu", self.nu[i])?;
            check_prob("chi", self.chi[i])?;
            check_simplex(&format!("lambda row {i}"), &self.lambda[i])?;
        }
        Ok(())
    }

    /// Same coupling with every marginal set to `chi`.
    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi.iter_mut().for_each(|c| *c = chi);
        self
    }

    /// Same coupling with every copy probability set to `nu`.
    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu.iter_mut().for_each(|c| *c = nu);
        self
    }

    /// Relabels nodes: node `k` of the result is node `order[k]` here.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            nu: order.iter().map(|&i| self.nu[i]).collect(),
            chi: order.iter().map(|&i| self.chi[i]).collect(),
            lambda: order
                .iter()
                .map(|&i| order.iter().map(|&j| self.lambda[i][j]).collect())
                .collect(),
        }
    }

    /// Directed edges `j -> i` for nonzero off-diagonal `lambda[i][j]`.
    pub fn causal_edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut e = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.lambda[i][j] > 0.0 {
                    e.push((j, i));
                }
            }
        }
        e.sort_unstable();
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_checks() {
        assert!(DarParams::new(0.5, vec![0.5, 0.5], 0.1).is_ok());
        assert!(DarParams::new(0.5, vec![0.5, 0.6], 0.1).is_err());
        assert!(DarParams::new(1.5, vec![1.0], 0.1).is_err());
        assert!(DarParams::new(0.5, vec![1.2, -0.2], 0.1).is_err());
        assert!(Vdar1Params::new(
            vec![0.5; 2],
            vec![vec![0.5, 0.5], vec![0.0, 1.0]],
            vec![0.1; 2]
        )
        .is_ok());
        assert!(Vdar1Params::new(
            vec![0.5; 2],
            vec![vec![0.5, 0.4], vec![0.0, 1.0]],
            vec![0.1; 2]
        )
        .is_err());
    }

    #[test]
    fn normalize_handles_zero_rows() {
        let mut w = vec![0.0, 0.0];
        normalize(&mut w);
        assert_eq!(w, vec![0.5, 0.5]);
        let mut w = vec![-1.0, 3.0];
        normalize(&mut w);
        assert_eq!(w, vec![0.0, 1.0]);
    }

    #[test]
    fn permutation_and_edges() {
        let p = Vdar1Params::new(
            vec![0.5; 3],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.5, 0.5, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            vec![0.1; 3],
        )
        .unwrap();
        assert_eq!(p.causal_edges(), vec![(0, 1)]);
        let q = p.permuted(&[1, 0, 2]);
        assert_eq!(q.causal_edges(), vec![(1, 0)]);
    }
}
