//! Data-generating processes.
//!
//! Binary models start from `p` i.i.d. Bernoulli(χ) draws with no burn-in;
//! the stationary mean equals χ regardless of the start. The GARCH-type
//! benchmark discards a 1000-step burn-in.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{BiEquation, BiVdarParams, DarParams, Vdar1Params};
use crate::random::{normal_quantile, rng_from_seed, SimRng};
use crate::series::{BinaryPanel, BinarySeries, RealSeries};

pub const GARCH_BURN_IN: usize = 1000;

#[inline]
fn bernoulli(rng: &mut SimRng, p: f64) -> u8 {
    u8::from(rng.random::<f64>() < p)
}

/// Index drawn from the discrete distribution `w` (assumed to sum to 1).
#[inline]
fn categorical(rng: &mut SimRng, w: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in w.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left a sliver above the cumulative sum
    w.iter().rposition(|&p| p > 0.0).unwrap_or(w.len() - 1)
}

pub fn simulate_dar(params: &DarParams, t_len: usize, seed: u64) -> Result<BinarySeries> {
    params.validate()?;
    let p = params.order();
    if t_len < p + 1 {
        return Err(Error::InsufficientLength {
            needed: p + 1,
            got: t_len,
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut x = Vec::with_capacity(t_len);
    for _ in 0..p {
        x.push(bernoulli(&mut rng, params.chi));
    }
    for t in p..t_len {
        let v = if rng.random::<f64>() < params.nu {
            let k = categorical(&mut rng, &params.gamma) + 1;
            x[t - k]
        } else {
            bernoulli(&mut rng, params.chi)
        };
        x.push(v);
    }
    BinarySeries::new(x)
}

/// Latent-normal thresholds for a Gaussian copula with Bernoulli marginals.
struct Copula {
    rho: f64,
    thresholds: [f64; 2],
}

impl Copula {
    fn draw(&self, rng: &mut SimRng) -> [u8; 2] {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let b = self.rho * a + (1.0 - self.rho * self.rho).sqrt() * b;
        [
            u8::from(a < self.thresholds[0]),
            u8::from(b < self.thresholds[1]),
        ]
    }
}

/// Joint simulation of the bivariate VDAR(p). With `copula_rho` the pair of
/// innovations `(Z¹_t, Z²_t)` is drawn each step from a Gaussian copula with
/// that correlation; otherwise the innovations are independent.
pub fn simulate_vdar_bivariate(
    params: &BiVdarParams,
    t_len: usize,
    seed: u64,
    copula_rho: Option<f64>,
) -> Result<(BinarySeries, BinarySeries)> {
    params.validate()?;
    let copula = match copula_rho {
        Some(rho) if !(rho > -1.0 && rho < 1.0) => return Err(Error::CopulaOutOfRange),
        Some(rho) => Some(Copula {
            rho,
            thresholds: [normal_quantile(params.x.chi), normal_quantile(params.y.chi)],
        }),
        None => None,
    };
    let p = params.order();
    if t_len < p + 1 {
        return Err(Error::InsufficientLength {
            needed: p + 1,
            got: t_len,
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut x = Vec::with_capacity(t_len);
    let mut y = Vec::with_capacity(t_len);
    for _ in 0..p {
        x.push(bernoulli(&mut rng, params.x.chi));
        y.push(bernoulli(&mut rng, params.y.chi));
    }

    // Copy step for one equation; `None` means "draw the innovation".
    fn copy_step(
        rng: &mut SimRng,
        eq: &BiEquation,
        own: &[u8],
        cross: &[u8],
        t: usize,
    ) -> Option<u8> {
        if rng.random::<f64>() >= eq.nu {
            return None;
        }
        if rng.random::<f64>() < eq.lambda {
            let k = categorical(rng, &eq.gamma_cross) + 1;
            Some(cross[t - k])
        } else {
            let k = categorical(rng, &eq.gamma_own) + 1;
            Some(own[t - k])
        }
    }

    for t in p..t_len {
        let cx = copy_step(&mut rng, &params.x, &x, &y, t);
        let cy = copy_step(&mut rng, &params.y, &y, &x, t);
        let (zx, zy) = match &copula {
            Some(c) => {
                let z = c.draw(&mut rng);
                (z[0], z[1])
            }
            None => {
                let zx = if cx.is_none() {
                    bernoulli(&mut rng, params.x.chi)
                } else {
                    0
                };
                let zy = if cy.is_none() {
                    bernoulli(&mut rng, params.y.chi)
                } else {
                    0
                };
                (zx, zy)
            }
        };
        x.push(cx.unwrap_or(zx));
        y.push(cy.unwrap_or(zy));
    }
    Ok((
        BinarySeries::new(x)?.with_label("X"),
        BinarySeries::new(y)?.with_label("Y"),
    ))
}

/// N-variate Markov VDAR(1) simulation.
pub fn simulate_vdar1(params: &Vdar1Params, t_len: usize, seed: u64) -> Result<BinaryPanel> {
    params.validate()?;
    if t_len < 2 {
        return Err(Error::InsufficientLength {
            needed: 2,
            got: t_len,
        });
    }
    let n = params.n();
    let mut rng = rng_from_seed(seed);
    let mut cols: Vec<Vec<u8>> = vec![Vec::with_capacity(t_len); n];
    let mut prev: Vec<u8> = (0..n).map(|i| bernoulli(&mut rng, params.chi[i])).collect();
    for (c, &v) in cols.iter_mut().zip(&prev) {
        c.push(v);
    }
    let mut next = vec![0u8; n];
    for _ in 1..t_len {
        for i in 0..n {
            next[i] = if rng.random::<f64>() < params.nu[i] {
                prev[categorical(&mut rng, &params.lambda[i])]
            } else {
                bernoulli(&mut rng, params.chi[i])
            };
        }
        for (c, &v) in cols.iter_mut().zip(&next) {
            c.push(v);
        }
        std::mem::swap(&mut prev, &mut next);
    }
    BinaryPanel::new(
        cols.into_iter()
            .map(BinarySeries::new)
            .collect::<Result<Vec<_>>>()?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StarKind {
    /// The center causes every leaf.
    Out,
    /// A random half of the leaves cause the center, the rest are caused by it.
    Mixed,
}

impl std::str::FromStr for StarKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "out" => Ok(Self::Out),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::Parse(format!("unknown star kind {other:?}"))),
        }
    }
}

/// Copy probability used for every node of a star network.
pub const STAR_NU: f64 = 0.5;
/// Default marginal for star networks; override with [`Vdar1Params::with_chi`].
pub const STAR_DEFAULT_CHI: f64 = 0.1;

/// Star-shaped coupling with node 0 as the center.
///
/// `Out`: the center only copies itself and every leaf copies the center or
/// itself with probability 1/2 each. `Mixed`: each leaf flips a fair coin
/// (seeded); heads puts it in the causing set `u`, whose members the center
/// copies, tails in the caused set, whose members copy the center.
pub fn star_coupling(n: usize, kind: StarKind, seed: u64) -> Result<Vdar1Params> {
    if n < 3 {
        return Err(Error::DegenerateStar(n));
    }
    match kind {
        StarKind::Out => mixed_star(&vec![false; n - 1]),
        StarKind::Mixed => {
            let mut rng = rng_from_seed(seed);
            let causing: Vec<bool> = (0..n - 1).map(|_| rng.random::<f64>() < 0.5).collect();
            mixed_star(&causing)
        }
    }
}

/// Star coupling from an explicit causing mask over leaves `1..N`.
/// `causing[k]` is the `u` entry of leaf `k + 1`; all-false is the out-star.
pub fn mixed_star(causing: &[bool]) -> Result<Vdar1Params> {
    let n = causing.len() + 1;
    if n < 3 {
        return Err(Error::DegenerateStar(n));
    }
    let n_causing = causing.iter().filter(|&&c| c).count();
    let lambda_in = 1.0 / (1 + n_causing) as f64;
    let mut lambda = vec![vec![0.0; n]; n];
    lambda[0][0] = lambda_in;
    for (k, &c) in causing.iter().enumerate() {
        let leaf = k + 1;
        if c {
            lambda[0][leaf] = lambda_in;
            lambda[leaf][leaf] = 1.0;
        } else {
            lambda[leaf][0] = 0.5;
            lambda[leaf][leaf] = 0.5;
        }
    }
    Vdar1Params::new(vec![STAR_NU; n], lambda, vec![STAR_DEFAULT_CHI; n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GarchScenario {
    Null,
    Alter1,
    Alter2,
}

impl std::str::FromStr for GarchScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NULL" => Ok(Self::Null),
            "ALTER1" => Ok(Self::Alter1),
            "ALTER2" => Ok(Self::Alter2),
            other => Err(Error::Parse(format!("unknown GARCH scenario {other:?}"))),
        }
    }
}

/// Coefficients of one equation of the bivariate AR(1)+GARCH(1,1) with
/// spillover: mean loadings on `(x1, x2)` lags, then constant, variance
/// persistence and loadings on `(u1², u2²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchEquation {
    pub beta: [f64; 2],
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma_u: [f64; 2],
}

impl GarchScenario {
    /// `(b, c)`: mean and variance spillover from `x2` into `x1`.
    pub fn spillover(self) -> (f64, f64) {
        match self {
            Self::Null => (0.0, 0.0),
            Self::Alter1 => (2.0, 0.0),
            Self::Alter2 => (0.0, 0.7),
        }
    }

    pub fn equations(self) -> [GarchEquation; 2] {
        let (b, c) = self.spillover();
        [
            GarchEquation {
                beta: [0.5, b],
                gamma0: 0.1,
                gamma1: 0.6,
                gamma_u: [0.2, c],
            },
            GarchEquation {
                beta: [0.0, 0.5],
                gamma0: 0.1,
                gamma1: 0.6,
                gamma_u: [0.0, 0.2],
            },
        ]
    }

    /// Whether `x2` Granger-causes `x1` in this scenario.
    pub fn has_causality(self) -> bool {
        self != Self::Null
    }
}

/// Initial conditional variance: the unconditional variance of the `x2` innovation.
pub const GARCH_INITIAL_VARIANCE: f64 = 0.5;

pub fn simulate_garch(
    scenario: GarchScenario,
    t_len: usize,
    seed: u64,
) -> Result<(RealSeries, RealSeries)> {
    if t_len < 2 {
        return Err(Error::InsufficientLength {
            needed: 2,
            got: t_len,
        });
    }
    let eqs = scenario.equations();
    let mut rng = rng_from_seed(seed);
    let mut x = [0.0f64; 2];
    let mut u = [0.0f64; 2];
    let mut h = [GARCH_INITIAL_VARIANCE; 2];
    let mut out = [Vec::with_capacity(t_len), Vec::with_capacity(t_len)];
    for step in 0..GARCH_BURN_IN + t_len {
        let mut nx = [0.0; 2];
        let mut nu = [0.0; 2];
        let mut nh = [0.0; 2];
        for i in 0..2 {
            let e = &eqs[i];
            nh[i] = e.gamma0
                + e.gamma1 * h[i]
                + e.gamma_u[0] * u[0] * u[0]
                + e.gamma_u[1] * u[1] * u[1];
            let eps: f64 = rng.sample(StandardNormal);
            nu[i] = nh[i].sqrt() * eps;
            nx[i] = e.beta[0] * x[0] + e.beta[1] * x[1] + nu[i];
        }
        x = nx;
        u = nu;
        h = nh;
        if step >= GARCH_BURN_IN {
            out[0].push(x[0]);
            out[1].push(x[1]);
        }
    }
    let [a, b] = out;
    Ok((
        RealSeries::new(a)?.with_label("x1"),
        RealSeries::new(b)?.with_label("x2"),
    ))
}

/// Coefficients of the univariate AR(1)+GARCH(1,1)
/// `x_t = beta x_{t-1} + u_t`, `σ²_t = omega + persistence σ²_{t-1} + arch u²_{t-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArGarch {
    pub beta: f64,
    pub omega: f64,
    pub persistence: f64,
    pub arch: f64,
}

impl ArGarch {
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.persistence - self.arch)
    }
}

/// Simulates the univariate AR(1)+GARCH(1,1) with the same burn-in.
pub fn simulate_ar_garch(model: &ArGarch, t_len: usize, seed: u64) -> Result<RealSeries> {
    if model.persistence + model.arch >= 1.0 || model.omega <= 0.0 {
        return Err(Error::InvalidParameters(
            "GARCH coefficients not covariance-stationary".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let (mut x, mut u, mut h) = (0.0f64, 0.0f64, model.unconditional_variance());
    let mut out = Vec::with_capacity(t_len);
    for step in 0..GARCH_BURN_IN + t_len {
        h = model.omega + model.persistence * h + model.arch * u * u;
        let eps: f64 = rng.sample(StandardNormal);
        u = h.sqrt() * eps;
        x = model.beta * x + u;
        if step >= GARCH_BURN_IN {
            out.push(x);
        }
    }
    RealSeries::new(out)
}
