//! `tailgc`: tail Granger-causality tools for binary extreme-event panels.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on data or convergence
//! errors. Tabular data go to `--out` (default stdout), JSON side outputs to
//! `--json-out` (default stdout, after the table).

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use tailgc::causality::{decimate_vdar1, hong_test, lr_tail_test, TestMethod};
use tailgc::dgp::{GarchScenario, StarKind};
use tailgc::estimation::{mle_dar, mle_vdar1, mle_vdar_bivariate, select_order_bic};
use tailgc::experiments::{
    run_roc, run_size_power, simulate_panel, BivariateDgp, DgpSpec, ExperimentConfig, RocConfig,
};
use tailgc::network::{build_multivariate_network, build_pairwise_network, metrics};
use tailgc::params::DarParams;
use tailgc::preprocess::{read_intraday_csv, run_pipeline, PipelineConfig, Side, VolatilityConfig};
use tailgc::BinaryPanel;

#[derive(Parser)]
#[command(
    name = "tailgc",
    version,
    about = "Granger causality in tail for binary extreme-event series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a panel and write it as CSV
    Simulate(SimulateArgs),
    /// Fit a DAR, bivariate VDAR or VDAR(1) model by maximum likelihood
    Fit(FitArgs),
    /// Test SOURCE -> TARGET causality in tail between two columns
    GcTest(GcTestArgs),
    /// Decimate a VDAR(1) fit: validated coupling matrix (CSV) and tilted path (JSON)
    Decimate(DecimateArgs),
    /// Build a causality network: edge list (TSV) and metrics (JSON)
    Network(NetworkArgs),
    /// Turn intraday prices or returns into a binary extreme-event panel
    Preprocess(PreprocessArgs),
    /// Run a Monte Carlo size/power experiment from a TOML config
    McExperiment(ExperimentArgs),
    /// Run a ROC mixture experiment from a TOML config
    Roc(ExperimentArgs),
}

#[derive(Args)]
struct Output {
    /// Output file for the main table (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct JsonOutput {
    /// Output file for the JSON block (stdout if omitted)
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimModel {
    Dar,
    Vdar2,
    Star,
    Garch,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML generator config; overrides the model flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "vdar2")]
    model: SimModel,
    #[arg(long)]
    seed: u64,
    /// Number of observations
    #[arg(long, short = 't', default_value_t = 1000)]
    t: usize,
    /// Order p (dar, vdar2)
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Copy probability of every series
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    /// Marginal hit probability of every series
    #[arg(long, default_value_t = 0.05)]
    chi: f64,
    /// Coupling Y -> X (vdar2)
    #[arg(long, default_value_t = 0.0)]
    lambda1: f64,
    /// Coupling X -> Y (vdar2)
    #[arg(long, default_value_t = 0.0)]
    lambda2: f64,
    /// Gaussian copula correlation of the innovations (vdar2)
    #[arg(long)]
    rho: Option<f64>,
    /// Number of nodes (star)
    #[arg(long, default_value_t = 10)]
    nodes: usize,
    #[arg(long, default_value = "out")]
    star: StarKind,
    #[arg(long, default_value = "NULL")]
    scenario: GarchScenario,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitModel {
    Dar,
    Vdar2,
    Vdar1,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    model: FitModel,
    /// Columns to use (default: first one for dar, first two for vdar2, all for vdar1)
    #[arg(long, value_delimiter = ',')]
    cols: Vec<String>,
    /// Fixed order
    #[arg(long, conflicts_with = "p_max")]
    p: Option<usize>,
    /// Largest order for BIC selection (vdar2)
    #[arg(long)]
    p_max: Option<usize>,
}

#[derive(Args)]
struct GcTestArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// SOURCE,TARGET column labels
    #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
    cols: Vec<String>,
    #[arg(long, default_value = "lr")]
    method: TestMethod,
    /// Largest order for BIC selection (lr)
    #[arg(long, default_value_t = 3)]
    p_max: usize,
    /// Kernel bandwidth M (hong)
    #[arg(long, default_value_t = 5)]
    bandwidth: usize,
}

#[derive(Args)]
struct DecimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    json: JsonOutput,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetworkMethod {
    Lr,
    Hong,
    Decimation,
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "lr")]
    method: NetworkMethod,
    /// False discovery rate for the pairwise tests
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    #[arg(long, default_value_t = 3)]
    p_max: usize,
    #[arg(long, default_value_t = 5)]
    bandwidth: usize,
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    json: JsonOutput,
}

#[derive(Args)]
struct PreprocessArgs {
    /// CSV with columns day,slot,symbol,price or day,slot,symbol,return
    #[arg(long = "in")]
    input: PathBuf,
    /// Hit threshold in units of spot volatility
    #[arg(long, default_value_t = 4.0)]
    theta: f64,
    /// Smoothing weight of the volatility recursion, as a number or fraction
    #[arg(long, default_value = "2/61", value_parser = parse_fraction)]
    alpha: f64,
    #[arg(long, default_value = "left")]
    side: Side,
    /// Intraday pattern from past days only
    #[arg(long)]
    causal_rescale: bool,
    /// Observations dropped after volatility initialisation
    #[arg(long, default_value_t = 30)]
    warmup: usize,
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    json: JsonOutput,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Master seed; every run derives its own stream from it
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    json: JsonOutput,
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (
                a.trim().parse().map_err(|_| s.to_string())?,
                b.trim().parse().map_err(|_| s.to_string())?,
            );
            a / b
        }
        None => s.parse().map_err(|_| format!("not a number: {s}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s}"))
    }
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<tailgc::Error> for Failure {
    fn from(e: tailgc::Error) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::Data(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

fn read_panel(path: &Path) -> Result<BinaryPanel, Failure> {
    Ok(BinaryPanel::read_csv(open(path)?)?)
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(path: Option<&PathBuf>, text: &str) -> CliResult {
    let mut w = sink(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn emit_json(path: Option<&PathBuf>, value: &serde_json::Value) -> CliResult {
    emit(path, &format!("{}\n", serde_json::to_string(value)?))
}

fn column(panel: &BinaryPanel, label: &str) -> Result<usize, Failure> {
    panel.index_of(label).ok_or_else(|| {
        Failure::Usage(format!(
            "no column {label:?}; have {}",
            panel.labels().join(",")
        ))
    })
}

fn simulate(a: SimulateArgs) -> CliResult {
    let spec = match &a.config {
        Some(path) => DgpSpec::from_toml(&read_text(path)?)?,
        None => match a.model {
            SimModel::Dar => DgpSpec::Dar(DarParams::uniform(a.nu, a.chi, a.p)?),
            SimModel::Vdar2 => {
                let mut b = BivariateDgp::symmetric(a.lambda1);
                b.p = a.p;
                (b.nu1, b.nu2, b.chi1, b.chi2) =
                    (a.nu.into(), a.nu.into(), a.chi.into(), a.chi.into());
                b.lambda2 = a.lambda2.into();
                b.copula_rho = a.rho;
                DgpSpec::Bivariate(b)
            }
            SimModel::Star => DgpSpec::Star {
                n: a.nodes,
                kind: a.star,
                chi: a.chi,
            },
            SimModel::Garch => DgpSpec::Garch {
                scenario: a.scenario,
            },
        },
    };
    let panel = simulate_panel(&spec, a.t, a.seed)?;
    let mut w = sink(a.output.out.as_ref())?;
    panel.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn fit(a: FitArgs) -> CliResult {
    let panel = read_panel(&a.input)?;
    let cols = if a.cols.is_empty() {
        let k = match a.model {
            FitModel::Dar => 1,
            FitModel::Vdar2 => 2,
            FitModel::Vdar1 => panel.n_series(),
        };
        if panel.n_series() < k {
            return Err(Failure::Usage(format!(
                "need {k} columns, panel has {}",
                panel.n_series()
            )));
        }
        (0..k).collect()
    } else {
        a.cols
            .iter()
            .map(|c| column(&panel, c))
            .collect::<Result<Vec<_>, _>>()?
    };
    let wrong = |n: usize| Failure::Usage(format!("--cols needs {n} column(s)"));
    let out = match a.model {
        FitModel::Dar => {
            let [i] = cols[..] else { return Err(wrong(1)) };
            let r = mle_dar(panel.get(i), a.p.unwrap_or(1))?;
            json!({"model": "dar", "p": r.p, "params": r.params, "loglik": r.loglik, "converged": r.converged})
        }
        FitModel::Vdar2 => {
            let [i, j] = cols[..] else {
                return Err(wrong(2));
            };
            let (x, y) = (panel.get(i), panel.get(j));
            let p = match (a.p, a.p_max) {
                (Some(p), _) => p,
                (None, Some(p_max)) => select_order_bic(x, y, p_max)?,
                (None, None) => 1,
            };
            let r = mle_vdar_bivariate(x, y, p)?;
            json!({"model": "vdar2", "p": r.p, "params": r.params, "loglik": r.loglik, "converged": r.converged})
        }
        FitModel::Vdar1 => {
            let sub = BinaryPanel::new(cols.iter().map(|&i| panel.get(i).clone()).collect())?;
            let r = mle_vdar1(&sub)?;
            json!({"model": "vdar1", "p": 1, "params": r.params, "loglik": r.loglik, "converged": r.converged, "labels": sub.labels()})
        }
    };
    emit_json(None, &out)
}

fn gc_test(a: GcTestArgs) -> CliResult {
    let panel = read_panel(&a.input)?;
    let [source, target] = &a.cols[..] else {
        return Err(Failure::Usage("--cols takes SOURCE,TARGET".into()));
    };
    let (s, t) = (column(&panel, source)?, column(&panel, target)?);
    if s == t {
        return Err(Failure::Usage("source and target must differ".into()));
    }
    let r = match a.method {
        TestMethod::Lr => lr_tail_test(panel.get(t), panel.get(s), a.p_max)?,
        TestMethod::Hong => hong_test(panel.get(t), panel.get(s), a.bandwidth)?,
    };
    emit_json(None, &serde_json::to_value(r)?)
}

fn decimate(a: DecimateArgs) -> CliResult {
    let panel = read_panel(&a.input)?;
    let d = decimate_vdar1(&panel)?;
    let labels = panel.labels();
    let mut csv = format!("target,{}\n", labels.join(","));
    for (label, row) in labels.iter().zip(&d.lambda_validated) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        csv.push_str(&format!("{label},{}\n", cells.join(",")));
    }
    emit(a.output.out.as_ref(), &csv)?;
    let path: Vec<_> = d
        .tilted_path
        .iter()
        .map(|&(q, l)| json!({"q": q, "tilted": l}))
        .collect();
    emit_json(
        a.json.json_out.as_ref(),
        &json!({"q_star": d.q_star, "loglik_max": d.loglik_max, "loglik_null": d.loglik_null, "tilted_path": path}),
    )
}

fn network(a: NetworkArgs) -> CliResult {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(Failure::Usage(format!(
            "--level {} outside (0, 1)",
            a.level
        )));
    }
    let panel = read_panel(&a.input)?;
    let g = match a.method {
        NetworkMethod::Lr => build_pairwise_network(&panel, TestMethod::Lr, a.level, a.p_max)?,
        NetworkMethod::Hong => {
            build_pairwise_network(&panel, TestMethod::Hong, a.level, a.bandwidth)?
        }
        NetworkMethod::Decimation => build_multivariate_network(&panel)?,
    };
    for d in &g.diagnostics {
        eprintln!("warning: {d}");
    }
    let mut tsv = String::from("source\ttarget\n");
    for (s, t) in g.labelled_edges() {
        tsv.push_str(&format!("{s}\t{t}\n"));
    }
    emit(a.output.out.as_ref(), &tsv)?;
    emit_json(
        a.json.json_out.as_ref(),
        &serde_json::to_value(metrics(&g))?,
    )
}

fn preprocess(a: PreprocessArgs) -> CliResult {
    let intraday = read_intraday_csv(open(&a.input)?)?;
    let cfg = PipelineConfig {
        volatility: VolatilityConfig {
            alpha: a.alpha,
            theta: a.theta,
            ..VolatilityConfig::default()
        },
        side: a.side,
        causal_rescale: a.causal_rescale,
        warmup: a.warmup,
    };
    let out = run_pipeline(&intraday, &cfg)?;
    for w in &out.summary.warnings {
        eprintln!("warning: {w}");
    }
    let mut w = sink(a.output.out.as_ref())?;
    out.panel.write_csv(&mut w)?;
    w.flush()?;
    drop(w);
    emit_json(
        a.json.json_out.as_ref(),
        &serde_json::to_value(&out.summary)?,
    )
}

fn mc_experiment(a: ExperimentArgs) -> CliResult {
    let mut cfg = ExperimentConfig::from_toml(&read_text(&a.config)?)?;
    cfg.master_seed = a.seed;
    let r = run_size_power(&cfg)?;
    let failures: usize = r.points.iter().map(|p| p.failures).sum();
    if failures > 0 {
        eprintln!("warning: {failures} run(s) failed and were excluded");
    }
    emit(a.output.out.as_ref(), &r.to_csv())?;
    emit_json(a.json.json_out.as_ref(), &serde_json::to_value(&r)?)
}

fn roc(a: ExperimentArgs) -> CliResult {
    let mut cfg = RocConfig::from_toml(&read_text(&a.config)?)?;
    cfg.master_seed = a.seed;
    let r = run_roc(&cfg)?;
    if r.failures > 0 {
        eprintln!(
            "warning: {} simulation(s) failed and were excluded",
            r.failures
        );
    }
    let mut csv = String::from("detector,fpr,tpr\n");
    for (name, c) in r.detectors.iter().zip(&r.curves) {
        for (f, t) in &c.points {
            csv.push_str(&format!("{name},{f},{t}\n"));
        }
    }
    emit(a.output.out.as_ref(), &csv)?;
    let auc: serde_json::Map<_, _> = r
        .detectors
        .iter()
        .zip(&r.curves)
        .map(|(n, c)| (n.clone(), json!(c.auc)))
        .collect();
    emit_json(
        a.json.json_out.as_ref(),
        &json!({ "auc": auc, "failures": r.failures }),
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::GcTest(a) => gc_test(a),
        Command::Decimate(a) => decimate(a),
        Command::Network(a) => network(a),
        Command::Preprocess(a) => preprocess(a),
        Command::McExperiment(a) => mc_experiment(a),
        Command::Roc(a) => roc(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
