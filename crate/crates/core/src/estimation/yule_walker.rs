//! Method-of-moments estimates through the VAR representation of VDAR.
//!
//! A VDAR(p) process has the second-order structure of a VAR(p) with
//! nonnegative coefficients `Phi_k`. Solving the sample Yule–Walker system and
//! inverting the coefficient mapping gives feasible starting points for
//! maximum likelihood.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{normalize, BiEquation, BiVdarParams, DarParams, Vdar1Params};
use crate::series::{BinaryPanel, BinarySeries};

/// Bound beyond which a mapped quantity is flagged as far outside its domain.
const WILD_LO: f64 = -0.5;
const WILD_HI: f64 = 1.5;

/// A clipped Yule–Walker estimate and its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YuleWalker<P> {
    pub params: P,
    /// Some mapped quantity fell outside `[-0.5, 1.5]` before clipping.
    pub out_of_domain: bool,
    /// Equations whose estimated copy probability was zero; their coupling
    /// weights were set to uniform.
    pub zero_copy_rows: Vec<usize>,
}

/// Sample VAR(p) coefficients: intercept `phi0` and `phi[l]` for lag `l+1`.
struct VarFit {
    phi0: Vec<f64>,
    phi: Vec<DMatrix<f64>>,
}

fn var_yule_walker(cols: &[&[u8]], p: usize) -> Result<VarFit> {
    let d = cols.len();
    let t_len = cols[0].len();
    if t_len < p + 2 {
        return Err(Error::InsufficientLength {
            needed: p + 2,
            got: t_len,
        });
    }
    let mu: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|&v| f64::from(v)).sum::<f64>() / t_len as f64)
        .collect();
    if mu.iter().any(|&m| m == 0.0 || m == 1.0) {
        return Err(Error::SingularYuleWalker);
    }
    // gamma[k][(a, b)] = cov(Z_a(t), Z_b(t-k))
    let centered: Vec<Vec<f64>> = cols
        .iter()
        .zip(&mu)
        .map(|(c, &m)| c.iter().map(|&v| f64::from(v) - m).collect())
        .collect();
    let gamma: Vec<DMatrix<f64>> = (0..=p)
        .map(|k| {
            DMatrix::from_fn(d, d, |a, b| {
                let xa = &centered[a][k..];
                let xb = &centered[b][..t_len - k];
                xa.iter().zip(xb).map(|(u, v)| u * v).sum::<f64>() / t_len as f64
            })
        })
        .collect();
    let lag = |m: isize| -> DMatrix<f64> {
        if m >= 0 {
            gamma[m as usize].clone()
        } else {
            gamma[(-m) as usize].transpose()
        }
    };
    // Phi R = G with Phi = [Phi_1 .. Phi_p], R block (l, k) = Gamma(k - l)
    let mut r = DMatrix::zeros(d * p, d * p);
    let mut g = DMatrix::zeros(d, d * p);
    for k in 0..p {
        g.view_mut((0, k * d), (d, d)).copy_from(&gamma[k + 1]);
        for l in 0..p {
            r.view_mut((l * d, k * d), (d, d))
                .copy_from(&lag(k as isize - l as isize));
        }
    }
    let sv = r.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin < 1e-10 * smax {
        return Err(Error::SingularYuleWalker);
    }
    let phi_t = r
        .transpose()
        .lu()
        .solve(&g.transpose())
        .ok_or(Error::SingularYuleWalker)?;
    let phi_all = phi_t.transpose();
    let phi: Vec<DMatrix<f64>> = (0..p)
        .map(|l| phi_all.columns(l * d, d).into_owned())
        .collect();
    let phi0 = (0..d)
        .map(|a| {
            mu[a]
                - (0..p)
                    .map(|l| (0..d).map(|b| phi[l][(a, b)] * mu[b]).sum::<f64>())
                    .sum::<f64>()
        })
        .collect();
    Ok(VarFit { phi0, phi })
}

fn wild(v: f64) -> bool {
    !(WILD_LO..=WILD_HI).contains(&v)
}

/// `chi = phi0 / (1 - nu)` clipped into `[0, 1]`; `fallback` when `nu ≈ 1`.
fn map_chi(phi0: f64, nu_raw: f64, fallback: f64, flag: &mut bool) -> f64 {
    if (1.0 - nu_raw).abs() < 1e-9 {
        return fallback.clamp(0.0, 1.0);
    }
    let chi = phi0 / (1.0 - nu_raw);
    *flag |= wild(chi);
    chi.clamp(0.0, 1.0)
}

/// Maps one bivariate equation from its VAR coefficients (own and cross lag
/// coefficients, intercept). Returns the equation and whether `nu` was zero.
fn map_bi_equation(
    own: &[f64],
    cross: &[f64],
    phi0: f64,
    mean: f64,
    flag: &mut bool,
) -> (BiEquation, bool) {
    let raw_nu: f64 = own.iter().chain(cross).sum();
    *flag |= wild(raw_nu) || own.iter().chain(cross).any(|&v| wild(v));
    if raw_nu.abs() > 1e-12 {
        *flag |= wild(cross.iter().sum::<f64>() / raw_nu);
    }
    let mut own_c: Vec<f64> = own.iter().map(|&v| v.max(0.0)).collect();
    let mut cross_c: Vec<f64> = cross.iter().map(|&v| v.max(0.0)).collect();
    let so: f64 = own_c.iter().sum();
    let sc: f64 = cross_c.iter().sum();
    let total = so + sc;
    let zero = total <= 0.0;
    let lambda = if zero { 0.0 } else { sc / total };
    normalize(&mut own_c);
    normalize(&mut cross_c);
    let chi = map_chi(phi0, raw_nu, mean, flag);
    (
        BiEquation {
            nu: total.min(1.0),
            lambda,
            chi,
            gamma_own: own_c,
            gamma_cross: cross_c,
        },
        zero,
    )
}

fn mean_of(x: &[u8]) -> f64 {
    x.iter().map(|&v| f64::from(v)).sum::<f64>() / x.len() as f64
}

/// Yule–Walker estimate of a bivariate VDAR(p).
pub fn yule_walker_bivariate(
    x: &BinarySeries,
    y: &BinarySeries,
    p: usize,
) -> Result<YuleWalker<BiVdarParams>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if p == 0 {
        return Err(Error::InvalidParameters("order must be at least 1".into()));
    }
    let fit = var_yule_walker(&[x.values(), y.values()], p)?;
    let mut flag = false;
    let mut zero_rows = Vec::new();
    let mut eqs = Vec::with_capacity(2);
    for a in 0..2 {
        let b = 1 - a;
        let own: Vec<f64> = fit.phi.iter().map(|m| m[(a, a)]).collect();
        let cross: Vec<f64> = fit.phi.iter().map(|m| m[(a, b)]).collect();
        let mean = mean_of(if a == 0 { x.values() } else { y.values() });
        let (eq, zero) = map_bi_equation(&own, &cross, fit.phi0[a], mean, &mut flag);
        if zero {
            zero_rows.push(a);
        }
        eqs.push(eq);
    }
    let ye = eqs.pop().expect("two equations");
    let xe = eqs.pop().expect("two equations");
    Ok(YuleWalker {
        params: BiVdarParams { x: xe, y: ye },
        out_of_domain: flag,
        zero_copy_rows: zero_rows,
    })
}

/// Yule–Walker estimate of a univariate DAR(p).
pub fn yule_walker_dar(x: &BinarySeries, p: usize) -> Result<YuleWalker<DarParams>> {
    if p == 0 {
        return Err(Error::InvalidParameters("order must be at least 1".into()));
    }
    let fit = var_yule_walker(&[x.values()], p)?;
    let mut flag = false;
    let coef: Vec<f64> = fit.phi.iter().map(|m| m[(0, 0)]).collect();
    let (eq, zero) = map_bi_equation(
        &coef,
        &vec![0.0; p],
        fit.phi0[0],
        mean_of(x.values()),
        &mut flag,
    );
    Ok(YuleWalker {
        params: eq.restricted(),
        out_of_domain: flag,
        zero_copy_rows: if zero { vec![0] } else { vec![] },
    })
}

/// Inverts the VAR(1) coefficient mapping of a VDAR(1):
/// `nu_i = sum_j Phi_ij`, `lambda_ij = Phi_ij / nu_i`, `chi_i = phi0_i / (1 - nu_i)`,
/// after clipping negative coefficients to zero.
pub fn map_var1_to_vdar1(phi0: &[f64], phi1: &[Vec<f64>]) -> Result<YuleWalker<Vdar1Params>> {
    let n = phi0.len();
    if n == 0 || phi1.len() != n || phi1.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameters(
            "inconsistent VAR dimensions".into(),
        ));
    }
    let mut flag = false;
    let mut zero_rows = Vec::new();
    let mut nu = Vec::with_capacity(n);
    let mut lambda = Vec::with_capacity(n);
    let mut chi = Vec::with_capacity(n);
    for i in 0..n {
        let raw_nu: f64 = phi1[i].iter().sum();
        flag |= wild(raw_nu) || phi1[i].iter().any(|&v| wild(v));
        let mut row: Vec<f64> = phi1[i].iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = row.iter().sum();
        if total <= 0.0 {
            zero_rows.push(i);
        } else {
            flag |= phi1[i].iter().any(|&v| wild(v / raw_nu));
        }
        normalize(&mut row);
        // the process mean is unknown here; fall back to the intercept
        chi.push(map_chi(phi0[i], raw_nu, phi0[i], &mut flag));
        nu.push(total.min(1.0));
        lambda.push(row);
    }
    Ok(YuleWalker {
        params: Vdar1Params { nu, lambda, chi },
        out_of_domain: flag,
        zero_copy_rows: zero_rows,
    })
}

/// Yule–Walker estimate of a multivariate VDAR(1).
pub fn yule_walker_vdar1(panel: &BinaryPanel) -> Result<YuleWalker<Vdar1Params>> {
    let cols: Vec<&[u8]> = (0..panel.n_series())
        .map(|i| panel.get(i).values())
        .collect();
    let fit = var_yule_walker(&cols, 1)?;
    let n = cols.len();
    let phi1: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| fit.phi[0][(i, j)]).collect())
        .collect();
    let mut out = map_var1_to_vdar1(&fit.phi0, &phi1)?;
    for i in 0..n {
        let raw_nu: f64 = phi1[i].iter().sum();
        if (1.0 - raw_nu).abs() < 1e-9 {
            out.params.chi[i] = mean_of(cols[i]);
        }
    }
    Ok(out)
}
