//! Monte Carlo size/power studies and ROC curves.
//!
//! Every run `(sweep point k, seed s)` draws from a stream seeded with
//! `derive_seed(master_seed, k, s)`, so a report depends only on its config.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::causality::{hong_test, lr_tail_test, lr_tail_test_fixed_p, TestMethod};
use crate::dgp::{
    simulate_dar, simulate_garch, simulate_vdar1, simulate_vdar_bivariate, star_coupling,
    GarchScenario, StarKind,
};
use crate::error::{Error, Result};
use crate::network::{build_multivariate_network, build_pairwise_network, CausalityNetwork};
use crate::params::{BiEquation, BiVdarParams, DarParams, Vdar1Params};
use crate::preprocess::garch_var_filter;
use crate::random::{derive_seed, rng_from_seed, SimRng};
use crate::series::{BinaryPanel, BinarySeries};

/// A parameter that is either fixed or drawn per run from `U(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamDraw {
    Fixed(f64),
    Uniform { uniform: [f64; 2] },
}

impl ParamDraw {
    pub fn draw(&self, rng: &mut SimRng) -> f64 {
        match *self {
            Self::Fixed(v) => v,
            Self::Uniform { uniform: [lo, hi] } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            Self::Fixed(v) => (0.0..=1.0).contains(&v),
            Self::Uniform { uniform: [lo, hi] } => 0.0 <= lo && lo <= hi && hi <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!(
                "{name} must lie in [0, 1]"
            )))
        }
    }
}

impl From<f64> for ParamDraw {
    fn from(v: f64) -> Self {
        Self::Fixed(v)
    }
}

/// Bivariate VDAR(p) generator; `lambda1` couples `y -> x`, `lambda2` `x -> y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateDgp {
    #[serde(default = "one")]
    pub p: usize,
    pub nu1: ParamDraw,
    pub nu2: ParamDraw,
    pub lambda1: ParamDraw,
    pub lambda2: ParamDraw,
    pub chi1: ParamDraw,
    pub chi2: ParamDraw,
    /// Lag-0 Gaussian copula between the innovations.
    #[serde(default)]
    pub copula_rho: Option<f64>,
}

fn one() -> usize {
    1
}

impl BivariateDgp {
    /// Both series with `ν = 0.5`, `χ = 0.05`, no coupling.
    pub fn symmetric(lambda1: f64) -> Self {
        Self {
            p: 1,
            nu1: 0.5.into(),
            nu2: 0.5.into(),
            lambda1: lambda1.into(),
            lambda2: 0.0.into(),
            chi1: 0.05.into(),
            chi2: 0.05.into(),
            copula_rho: None,
        }
    }

    fn draw(&self, rng: &mut SimRng) -> Result<BiVdarParams> {
        let x = BiEquation::uniform(
            self.nu1.draw(rng),
            self.lambda1.draw(rng),
            self.chi1.draw(rng),
            self.p,
        );
        let y = BiEquation::uniform(
            self.nu2.draw(rng),
            self.lambda2.draw(rng),
            self.chi2.draw(rng),
            self.p,
        );
        BiVdarParams::new(x, y)
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidParameters("order must be at least 1".into()));
        }
        for (name, d) in [
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("chi1", self.chi1),
            ("chi2", self.chi2),
        ] {
            d.validate(name)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum DgpSpec {
    Bivariate(BivariateDgp),
    /// Bivariate AR+GARCH returns turned into hits by the VaR filter.
    Garch {
        scenario: GarchScenario,
    },
    /// VDAR(1) star network with node 0 as the center.
    Star {
        n: usize,
        kind: StarKind,
        #[serde(default = "star_chi")]
        chi: f64,
    },
    /// Single DAR(p) series.
    Dar(DarParams),
    /// VDAR(1) panel with explicit parameters.
    Vdar1(Vdar1Params),
}

impl DgpSpec {
    pub fn from_toml(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Bivariate(b) => b.validate(),
            Self::Garch { .. } => Ok(()),
            Self::Star { n, chi, .. } => {
                if *n < 3 {
                    return Err(Error::DegenerateStar(*n));
                }
                if !(0.0..=1.0).contains(chi) {
                    return Err(Error::InvalidParameters("chi must lie in [0, 1]".into()));
                }
                Ok(())
            }
            Self::Dar(d) => d.validate(),
            Self::Vdar1(v) => v.validate(),
        }
    }

    /// VDAR(1) parameters of a network generator; `None` for bivariate ones.
    fn network_params(&self, rng: &mut SimRng) -> Result<Option<Vdar1Params>> {
        match self {
            Self::Star { n, kind, chi } => Ok(Some(
                star_coupling(*n, *kind, rng.random::<u64>())?.with_chi(*chi),
            )),
            Self::Vdar1(v) => Ok(Some(v.clone())),
            _ => Ok(None),
        }
    }
}

/// One simulated panel of `t_len` observations. Bivariate generators give
/// columns `X, Y`; GARCH generators give the VaR hits of `x1, x2`.
pub fn simulate_panel(spec: &DgpSpec, t_len: usize, seed: u64) -> Result<BinaryPanel> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    if let Some(params) = spec.network_params(&mut rng)? {
        return simulate_vdar1(&params, t_len, rng.random::<u64>());
    }
    match spec {
        DgpSpec::Dar(d) => BinaryPanel::new(vec![
            simulate_dar(d, t_len, rng.random::<u64>())?.with_label("X")
        ]),
        DgpSpec::Garch { scenario } => {
            let (x1, x2) = simulate_garch(*scenario, t_len, rng.random::<u64>())?;
            let h1 = garch_var_filter(&x1)?.hits.with_label("x1");
            let h2 = garch_var_filter(&x2)?.hits.with_label("x2");
            BinaryPanel::new(vec![h1, h2])
        }
        _ => {
            let (x, y, _) = simulate_pair(spec, t_len, Direction::Forward, &mut rng)?;
            BinaryPanel::new(vec![x, y])
        }
    }
}

fn star_chi() -> f64 {
    crate::dgp::STAR_DEFAULT_CHI
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detector {
    Lr {
        p_max: usize,
    },
    LrFixedP {
        p: usize,
    },
    Hong {
        m: usize,
    },
    /// Multivariate decimation (star experiments only).
    Decimation,
}

impl Detector {
    pub fn name(&self) -> String {
        match self {
            Self::Lr { p_max } => format!("lr(p_max={p_max})"),
            Self::LrFixedP { p } => format!("lr(p={p})"),
            Self::Hong { m } => format!("hong(M={m})"),
            Self::Decimation => "decimation".into(),
        }
    }

    /// p-value of `source -> target`.
    pub fn p_value(&self, target: &BinarySeries, source: &BinarySeries) -> Result<f64> {
        match *self {
            Self::Lr { p_max } => Ok(lr_tail_test(target, source, p_max)?.p_value),
            Self::LrFixedP { p } => Ok(lr_tail_test_fixed_p(target, source, p)?.p_value),
            Self::Hong { m } => Ok(hong_test(target, source, m)?.p_value),
            Self::Decimation => Err(Error::InvalidParameters(
                "decimation is a network detector".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Lambda1,
    Lambda2,
    Nu1,
    Nu2,
    /// `nu1` and `nu2` set together.
    NuBoth,
    /// `chi1` and `chi2` set together.
    Chi,
    T,
    CopulaRho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// Which ordered pair is tested on bivariate data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `y -> x`, coupled through `lambda1`.
    #[default]
    Forward,
    /// `x -> y`, coupled through `lambda2`.
    Reverse,
}

fn default_level() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub master_seed: u64,
    pub n_seeds: usize,
    #[serde(rename = "t")]
    pub t_len: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    pub dgp: DgpSpec,
    pub detector: Detector,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub sweep: Option<Sweep>,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_seeds == 0 {
            return Err(Error::InvalidParameters(
                "n_seeds must be at least 1".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "level {} outside (0, 1)",
                self.level
            )));
        }
        self.dgp.validate()?;
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::InvalidParameters("empty sweep".into()));
            }
        }
        Ok(())
    }

    /// The config at one sweep value.
    fn at(&self, value: Option<f64>) -> Result<(DgpSpec, usize)> {
        let (Some(v), Some(sweep)) = (value, &self.sweep) else {
            return Ok((self.dgp.clone(), self.t_len));
        };
        if sweep.variable == SweepVariable::T {
            if v < 1.0 || v.fract() != 0.0 {
                return Err(Error::InvalidParameters(format!(
                    "T = {v} is not a positive integer"
                )));
            }
            return Ok((self.dgp.clone(), v as usize));
        }
        let DgpSpec::Bivariate(mut b) = self.dgp.clone() else {
            return Err(Error::InvalidParameters(
                "only bivariate generators support this sweep".into(),
            ));
        };
        let f = ParamDraw::Fixed(v);
        match sweep.variable {
            SweepVariable::Lambda1 => b.lambda1 = f,
            SweepVariable::Lambda2 => b.lambda2 = f,
            SweepVariable::Nu1 => b.nu1 = f,
            SweepVariable::Nu2 => b.nu2 = f,
            SweepVariable::NuBoth => (b.nu1, b.nu2) = (f, f),
            SweepVariable::Chi => (b.chi1, b.chi2) = (f, f),
            SweepVariable::CopulaRho => b.copula_rho = Some(v),
            SweepVariable::T => unreachable!("handled above"),
        }
        b.validate()?;
        Ok((DgpSpec::Bivariate(b), self.t_len))
    }
}

/// Rates at one sweep point with binomial standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sweep_value: Option<f64>,
    /// Runs that completed.
    pub n: usize,
    pub failures: usize,
    pub fpr: Option<f64>,
    pub fpr_se: Option<f64>,
    pub tpr: Option<f64>,
    pub tpr_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub detector: String,
    pub points: Vec<SweepPoint>,
}

fn rate(hits: usize, trials: usize) -> (Option<f64>, Option<f64>) {
    if trials == 0 {
        return (None, None);
    }
    let r = hits as f64 / trials as f64;
    (Some(r), Some((r * (1.0 - r) / trials as f64).sqrt()))
}

impl ExperimentReport {
    /// CSV with columns `sweep_value,n,fpr,tpr,se`; `se` belongs to whichever
    /// rate is present (the TPR when both are).
    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        let mut out = String::from("sweep_value,n,fpr,tpr,se\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt(p.sweep_value),
                p.n,
                fmt(p.fpr),
                fmt(p.tpr),
                fmt(p.tpr_se.or(p.fpr_se))
            ));
        }
        out
    }
}

/// Outcome of one run: rejection counts among null and causal hypotheses.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    null_rej: usize,
    null_n: usize,
    alt_rej: usize,
    alt_n: usize,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.null_rej += o.null_rej;
        self.null_n += o.null_n;
        self.alt_rej += o.alt_rej;
        self.alt_n += o.alt_n;
    }

    fn single(truth: bool, rejected: bool) -> Self {
        let r = usize::from(rejected);
        if truth {
            Self {
                alt_rej: r,
                alt_n: 1,
                ..Self::default()
            }
        } else {
            Self {
                null_rej: r,
                null_n: 1,
                ..Self::default()
            }
        }
    }
}

/// Simulated bivariate hit series `(target, source, causal truth)`.
fn simulate_pair(
    dgp: &DgpSpec,
    t_len: usize,
    direction: Direction,
    rng: &mut SimRng,
) -> Result<(BinarySeries, BinarySeries, bool)> {
    match dgp {
        DgpSpec::Bivariate(b) => {
            let params = b.draw(rng)?;
            let seed = rng.random::<u64>();
            let (x, y) = simulate_vdar_bivariate(&params, t_len, seed, b.copula_rho)?;
            Ok(match direction {
                Direction::Forward => (x, y, params.x.lambda > 0.0),
                Direction::Reverse => (y, x, params.y.lambda > 0.0),
            })
        }
        DgpSpec::Garch { scenario } => {
            let (x1, x2) = simulate_garch(*scenario, t_len, rng.random::<u64>())?;
            let h1 = garch_var_filter(&x1)?.hits;
            let h2 = garch_var_filter(&x2)?.hits;
            Ok(match direction {
                Direction::Forward => (h1, h2, scenario.has_causality()),
                Direction::Reverse => (h2, h1, false),
            })
        }
        _ => Err(Error::InvalidParameters("not a bivariate generator".into())),
    }
}

/// Edge-level tally of an estimated network against the true edges.
fn edge_tally(truth: &[(usize, usize)], est: &CausalityNetwork) -> Tally {
    let n = est.n_nodes();
    let mut t = Tally::default();
    for s in 0..n {
        for d in 0..n {
            if s != d {
                t.add(&Tally::single(truth.contains(&(s, d)), est.has_edge(s, d)));
            }
        }
    }
    t
}

fn run_network(
    params: Vdar1Params,
    t_len: usize,
    detector: Detector,
    level: f64,
    rng: &mut SimRng,
) -> Result<Tally> {
    let panel = simulate_vdar1(&params, t_len, rng.random::<u64>())?;
    let net = match detector {
        Detector::Decimation => build_multivariate_network(&panel)?,
        Detector::Lr { p_max } => build_pairwise_network(&panel, TestMethod::Lr, level, p_max)?,
        Detector::Hong { m } => build_pairwise_network(&panel, TestMethod::Hong, level, m)?,
        Detector::LrFixedP { .. } => {
            return Err(Error::InvalidParameters(
                "fixed-order lr is not a network detector".into(),
            ));
        }
    };
    Ok(edge_tally(&params.causal_edges(), &net))
}

/// Size/power study with a custom pairwise detector returning a p-value for
/// `(target, source)`. Failed runs are counted and excluded from the rates.
pub fn run_size_power_with<F>(
    cfg: &ExperimentConfig,
    detector_name: &str,
    detect: F,
) -> Result<ExperimentReport>
where
    F: Fn(&BinarySeries, &BinarySeries) -> Result<f64> + Sync,
{
    run_inner(cfg, detector_name, |dgp, t_len, rng| {
        let (target, source, truth) = simulate_pair(dgp, t_len, cfg.direction, rng)?;
        Ok(Tally::single(truth, detect(&target, &source)? < cfg.level))
    })
}

fn run_inner<F>(cfg: &ExperimentConfig, detector_name: &str, one_run: F) -> Result<ExperimentReport>
where
    F: Fn(&DgpSpec, usize, &mut SimRng) -> Result<Tally> + Sync,
{
    cfg.validate()?;
    let values: Vec<Option<f64>> = match &cfg.sweep {
        Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    let mut points = Vec::with_capacity(values.len());
    for (k, value) in values.into_iter().enumerate() {
        let (dgp, t_len) = cfg.at(value)?;
        let runs: Vec<Result<Tally>> = (0..cfg.n_seeds)
            .into_par_iter()
            .map(|s| {
                let mut rng = rng_from_seed(derive_seed(cfg.master_seed, k as u64, s as u64));
                one_run(&dgp, t_len, &mut rng)
            })
            .collect();
        let mut total = Tally::default();
        let mut failures = 0;
        for r in &runs {
            match r {
                Ok(t) => total.add(t),
                Err(_) => failures += 1,
            }
        }
        let (fpr, fpr_se) = rate(total.null_rej, total.null_n);
        let (tpr, tpr_se) = rate(total.alt_rej, total.alt_n);
        points.push(SweepPoint {
            sweep_value: value,
            n: cfg.n_seeds - failures,
            failures,
            fpr,
            fpr_se,
            tpr,
            tpr_se,
        });
    }
    Ok(ExperimentReport {
        name: cfg.name.clone(),
        detector: detector_name.to_string(),
        points,
    })
}

/// Size/power study of `cfg.detector` on `cfg.dgp`. For network generators
/// (star, VDAR(1)) the rates are edge-level, pooled over seeds.
pub fn run_size_power(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let name = cfg.detector.name();
    match cfg.dgp {
        DgpSpec::Star { .. } | DgpSpec::Vdar1(_) => run_inner(cfg, &name, |dgp, t_len, rng| {
            let params = dgp.network_params(rng)?.expect("network generator");
            run_network(params, t_len, cfg.detector, cfg.level, rng)
        }),
        DgpSpec::Dar(_) => Err(Error::InvalidParameters(
            "a single DAR series has no causal pair".into(),
        )),
        _ => {
            let det = cfg.detector;
            run_size_power_with(cfg, &name, move |x, y| det.p_value(x, y))
        }
    }
}

/// ROC points sorted by FPR and the trapezoidal area under them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (f, t) in &self.points {
            out.push_str(&format!("{f},{t}\n"));
        }
        out
    }
}

/// ROC of p-values used as scores (small p means "causal"): every distinct
/// p-value is a threshold, a case is flagged when its p-value is at most the
/// threshold.
pub fn roc_curve(scores: &[(f64, bool)]) -> Result<RocCurve> {
    let pos = scores.iter().filter(|s| s.1).count();
    let neg = scores.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidValue("ROC needs both classes".into()));
    }
    if scores.iter().any(|s| s.0.is_nan()) {
        return Err(Error::InvalidValue("NaN score".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let thr = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == thr {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

/// Mixture protocol for ROC curves: each simulation is null (`lambda1 = 0`)
/// or causal (`lambda1` drawn from `alternative_lambda1`) with probability
/// 1/2, and every detector scores the same data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocConfig {
    #[serde(default)]
    pub master_seed: u64,
    pub n_sims: usize,
    #[serde(rename = "t")]
    pub t_len: usize,
    pub dgp: BivariateDgp,
    pub alternative_lambda1: ParamDraw,
    pub detectors: Vec<Detector>,
}

impl RocConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if cfg.n_sims == 0 || cfg.detectors.is_empty() {
            return Err(Error::InvalidParameters(
                "need at least one simulation and one detector".into(),
            ));
        }
        cfg.dgp.validate()?;
        cfg.alternative_lambda1.validate("alternative_lambda1")?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    pub detectors: Vec<String>,
    pub curves: Vec<RocCurve>,
    pub failures: usize,
}

pub fn run_roc(cfg: &RocConfig) -> Result<RocReport> {
    let runs: Vec<Result<(bool, Vec<f64>)>> = (0..cfg.n_sims)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng_from_seed(derive_seed(cfg.master_seed, 0, s as u64));
            let causal = rng.random::<bool>();
            let mut dgp = cfg.dgp.clone();
            dgp.lambda1 = if causal {
                ParamDraw::Fixed(cfg.alternative_lambda1.draw(&mut rng))
            } else {
                ParamDraw::Fixed(0.0)
            };
            let (target, source, _) = simulate_pair(
                &DgpSpec::Bivariate(dgp),
                cfg.t_len,
                Direction::Forward,
                &mut rng,
            )?;
            let ps = cfg
                .detectors
                .iter()
                .map(|d| d.p_value(&target, &source))
                .collect::<Result<Vec<_>>>()?;
            Ok((causal, ps))
        })
        .collect();
    let ok: Vec<&(bool, Vec<f64>)> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failures = runs.len() - ok.len();
    let curves = (0..cfg.detectors.len())
        .map(|k| roc_curve(&ok.iter().map(|(c, ps)| (ps[k], *c)).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(RocReport {
        detectors: cfg.detectors.iter().map(Detector::name).collect(),
        curves,
        failures,
    })
}
