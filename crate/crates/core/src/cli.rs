//! Command-line front end.
//!
//! Settings are resolved from built-in defaults, then an optional
//! `key=value` config file, then flags. The resolved set is written to
//! `config_effective.txt` in the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric error,
//! 4 iteration budget exhausted (outputs are still written).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiments::{
    covariance_trial, empirical_cov, metrics, precision_trial, raw_estimator, BlockSpec, Dataset, Method,
    Metrics, RNG_NAME,
};
use crate::io;
use crate::mm_glasso::{default_start, dr_noisy_baseline, glasso_solve, mm_solve, MMConfig, NoisyGlassoProblem};
use crate::scalarprox::{parse_kernel, Divergence, Penalty};
use crate::spectralprox::{prox_objective, prox_spectral, SpectralProxRequest};
use crate::splitting::{dr_solve, DRConfig, ObjectiveSpec, StopReason};
use crate::symlin::{spd_inverse, SymMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_MAX_ITER: i32 = 4;

pub const DEFAULT_COV_BLOCKS: &str = "14,36,18,10,22";

#[derive(Debug, Parser)]
#[command(name = "matprox", version, about = "Spectral proximal solvers for symmetric matrix estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral prox of a matrix under a kernel.
    Prox(Opts),
    /// Low-rank sparse covariance estimate by Douglas–Rachford.
    SolveCov(Opts),
    /// Noisy graphical lasso by majorize–minimize.
    SolveGlasso(Opts),
    /// Replicated comparison of precision estimators over a noise sweep.
    Bench(Opts),
    /// Write a synthetic dataset.
    Gen(Opts),
}

#[derive(Debug, Args, Default)]
struct Opts {
    /// key=value file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    out: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    seed: Option<String>,
    /// Comma-separated noise standard deviations.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    reps: Option<String>,
    /// Comma-separated subset of mm, glasso, dr-noisy.
    #[arg(long, allow_negative_numbers = true)]
    method: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    n: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    mu0: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    mu1: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<String>,
    #[arg(long = "max-iter", allow_negative_numbers = true)]
    max_iter: Option<String>,
    #[arg(long = "outer-eps", allow_negative_numbers = true)]
    outer_eps: Option<String>,
    #[arg(long = "outer-max", allow_negative_numbers = true)]
    outer_max: Option<String>,
    /// Dataset directory written by `gen`.
    #[arg(long, allow_negative_numbers = true)]
    data: Option<String>,
    /// Off-diagonal density of the sparse precision model.
    #[arg(long, allow_negative_numbers = true)]
    density: Option<String>,
    /// Number of observations.
    #[arg(long, allow_negative_numbers = true)]
    samples: Option<String>,
    /// Comma-separated block sizes of the covariance model.
    #[arg(long, allow_negative_numbers = true)]
    blocks: Option<String>,
    /// cov or precision.
    #[arg(long, allow_negative_numbers = true)]
    scenario: Option<String>,
    /// on or off; off writes zero seconds so reports are reproducible.
    #[arg(long, allow_negative_numbers = true)]
    timing: Option<String>,
    /// Input matrix CSV.
    #[arg(long, allow_negative_numbers = true)]
    input: Option<String>,
    /// Linear term matrix CSV.
    #[arg(long, allow_negative_numbers = true)]
    t: Option<String>,
    /// Kernel spec, e.g. "divergence=burg penalty=nuclear mu=0.5".
    #[arg(long, allow_negative_numbers = true)]
    kernel: Option<String>,
    /// Constrain the result to be positive semidefinite.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    psd: Option<String>,
    #[arg(long = "support-tol", allow_negative_numbers = true)]
    support_tol: Option<String>,
}

const KNOWN_KEYS: &[&str] = &[
    "out", "seed", "sigma", "reps", "method", "n", "mu0", "mu1", "gamma", "alpha", "eps", "max_iter",
    "outer_eps", "outer_max", "data", "density", "samples", "blocks", "scenario", "timing", "input", "t",
    "kernel", "psd", "support_tol",
];

impl Opts {
    fn flags(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("out", &self.out),
            ("seed", &self.seed),
            ("sigma", &self.sigma),
            ("reps", &self.reps),
            ("method", &self.method),
            ("n", &self.n),
            ("mu0", &self.mu0),
            ("mu1", &self.mu1),
            ("gamma", &self.gamma),
            ("alpha", &self.alpha),
            ("eps", &self.eps),
            ("max_iter", &self.max_iter),
            ("outer_eps", &self.outer_eps),
            ("outer_max", &self.outer_max),
            ("data", &self.data),
            ("density", &self.density),
            ("samples", &self.samples),
            ("blocks", &self.blocks),
            ("scenario", &self.scenario),
            ("timing", &self.timing),
            ("input", &self.input),
            ("t", &self.t),
            ("kernel", &self.kernel),
            ("psd", &self.psd),
            ("support_tol", &self.support_tol),
        ]
    }
}

/// Resolved `key=value` settings.
#[derive(Debug, Clone, Default)]
struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    fn resolve(defaults: &[(&str, &str)], opts: &Opts) -> Result<Self> {
        let mut map: BTreeMap<String, String> =
            defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = &opts.config {
            for (k, v) in io::read_key_values(path)? {
                let key = k.replace('-', "_");
                if !KNOWN_KEYS.contains(&key.as_str()) {
                    return Err(Error::config(key, "unknown key in config file"));
                }
                map.insert(key, v);
            }
        }
        for (k, v) in opts.flags() {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        Ok(Settings { map })
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.map
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::config(key, "missing"))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.trim()
            .parse()
            .map_err(|_| Error::config(key, format!("cannot parse `{raw}`")))
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let raw = self.raw(key)?;
        let items = raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::config(key, format!("cannot parse `{}`", s.trim())))
            })
            .collect::<Result<Vec<T>>>()?;
        if items.is_empty() {
            return Err(Error::config(key, "empty list"));
        }
        Ok(items)
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key)?.trim() {
            "true" | "on" | "1" | "yes" => Ok(true),
            "false" | "off" | "0" | "no" => Ok(false),
            other => Err(Error::config(key, format!("expected on/off, got `{other}`"))),
        }
    }

    fn nonneg(&self, key: &str) -> Result<f64> {
        let v: f64 = self.get(key)?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::config(key, format!("must be finite and ≥ 0, got {v}")));
        }
        Ok(v)
    }

    fn positive_count(&self, key: &str) -> Result<usize> {
        let v: usize = self.get(key)?;
        if v == 0 {
            return Err(Error::config(key, "must be ≥ 1"));
        }
        Ok(v)
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = PathBuf::from(self.raw("out")?);
        fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn echo(&self, dir: &Path) -> Result<()> {
        io::write_atomic(
            &dir.join("config_effective.txt"),
            io::format_key_values(&self.map).as_bytes(),
        )
    }

    fn single_sigma(&self) -> Result<f64> {
        let sigmas = self.list::<f64>("sigma")?;
        match sigmas.as_slice() {
            [s] if *s >= 0.0 && s.is_finite() => Ok(*s),
            [s] => Err(Error::config("sigma", format!("must be finite and ≥ 0, got {s}"))),
            _ => Err(Error::config("sigma", "this command takes a single value")),
        }
    }

    fn sigmas(&self) -> Result<Vec<f64>> {
        let sigmas = self.list::<f64>("sigma")?;
        if let Some(s) = sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::config("sigma", format!("must be finite and ≥ 0, got {s}")));
        }
        Ok(sigmas)
    }

    fn dr_config(&self) -> Result<DRConfig> {
        let cfg = DRConfig {
            gamma: self.get("gamma")?,
            alpha: self.get("alpha")?,
            eps: self.get("eps")?,
            max_iter: self.get("max_iter")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn mm_config(&self) -> Result<MMConfig> {
        let cfg = MMConfig {
            inner: self.dr_config()?,
            outer_eps: self.get("outer_eps")?,
            outer_max: self.get("outer_max")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn block_spec(&self) -> Result<BlockSpec> {
        if self.has("blocks") {
            let spec = BlockSpec::new(self.list("blocks")?)?;
            if self.has("n") && self.positive_count("n")? != spec.n() {
                return Err(Error::config("n", format!("blocks sum to {}", spec.n())));
            }
            Ok(spec)
        } else if self.has("n") {
            let n = self.positive_count("n")?;
            BlockSpec::even(n, n.min(4))
        } else {
            BlockSpec::new(DEFAULT_COV_BLOCKS.split(',').map(|s| s.parse().unwrap()).collect())
        }
    }
}

const SOLVER_DEFAULTS: &[(&str, &str)] = &[("out", "out"), ("seed", "0"), ("support_tol", "1e-8")];

const COV_DEFAULTS: &[(&str, &str)] = &[
    ("scenario", "cov"),
    ("sigma", "0.1"),
    ("mu0", "0.2"),
    ("mu1", "0.1"),
    ("gamma", "1"),
    ("alpha", "1.5"),
    ("eps", "1e-10"),
    ("max_iter", "2000"),
];

/// Defaults of the precision scenario; the weights are our own choice.
pub const PRECISION_MU0: f64 = 0.001;
pub const PRECISION_MU1: f64 = 0.03;

fn precision_defaults() -> Vec<(&'static str, String)> {
    vec![
        ("scenario", "precision".into()),
        ("n", "100".into()),
        ("density", "1e-3".into()),
        ("samples", "1000".into()),
        ("sigma", "0.3".into()),
        ("mu0", PRECISION_MU0.to_string()),
        ("mu1", PRECISION_MU1.to_string()),
        ("gamma", "1".into()),
        ("alpha", "1".into()),
        ("eps", "1e-10".into()),
        ("max_iter", "2000".into()),
        ("outer_eps", "1e-8".into()),
        ("outer_max", "20".into()),
    ]
}

fn defaults_for(command: &Command) -> Vec<(String, String)> {
    let own = |xs: &[(&str, &str)]| xs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<Vec<_>>();
    let mut d = own(SOLVER_DEFAULTS);
    match command {
        Command::Prox(_) => {
            d.push(("gamma".into(), "1".into()));
            d.push(("psd".into(), "false".into()));
        }
        Command::SolveCov(_) => d.extend(own(COV_DEFAULTS)),
        Command::SolveGlasso(_) => d.extend(precision_defaults().into_iter().map(|(k, v)| (k.into(), v))),
        Command::Bench(_) => {
            d.extend(precision_defaults().into_iter().map(|(k, v)| (k.into(), v)));
            d.push(("n".into(), "30".into()));
            d.push(("density".into(), "0.02".into()));
            d.push(("sigma".into(), "0.05,0.1,0.2,0.3,0.4".into()));
            d.push(("reps".into(), "10".into()));
            d.push(("method".into(), "mm,glasso,dr-noisy".into()));
            d.push(("timing".into(), "on".into()));
        }
        Command::Gen(_) => d.push(("scenario".into(), "cov".into())),
    }
    // later entries win
    let mut map = BTreeMap::new();
    for (k, v) in d {
        map.insert(k, v);
    }
    map.into_iter().collect()
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERIC
            }
        }
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    let defaults = defaults_for(command);
    let defaults: Vec<(&str, &str)> = defaults.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    match command {
        Command::Prox(o) => cmd_prox(&Settings::resolve(&defaults, o)?),
        Command::SolveCov(o) => cmd_solve_cov(&with_dataset_layer(&defaults, o)?),
        Command::SolveGlasso(o) => cmd_solve_glasso(&with_dataset_layer(&defaults, o)?),
        Command::Bench(o) => cmd_bench(&Settings::resolve(&defaults, o)?),
        Command::Gen(o) => cmd_gen(&Settings::resolve(&defaults, o)?),
    }
}

/// When `--data` is given, the dataset's own metadata sits between the
/// built-in defaults and the config file.
fn with_dataset_layer(defaults: &[(&str, &str)], opts: &Opts) -> Result<Settings> {
    let first = Settings::resolve(defaults, opts)?;
    if !first.has("data") {
        return Ok(first);
    }
    let meta = io::read_key_values(&Path::new(first.raw("data")?).join("meta.txt"))?;
    let mut layered: Vec<(&str, &str)> = defaults.to_vec();
    for key in ["sigma", "seed", "scenario"] {
        if let Some(v) = meta.get(key) {
            layered.push((key, v));
        }
    }
    let s = Settings::resolve(&layered, opts)?;
    if meta.get("scenario") != Some(&first.raw("scenario")?.to_string()) {
        return Err(Error::config(
            "data",
            format!("dataset scenario does not match `{}`", first.raw("scenario")?),
        ));
    }
    Ok(s)
}

fn cmd_prox(s: &Settings) -> Result<i32> {
    let c_bar = io::read_matrix(Path::new(s.raw("input")?))?;
    let t = if s.has("t") {
        io::read_matrix(Path::new(s.raw("t")?))?
    } else {
        SymMatrix::zeros(c_bar.n())
    };
    let kernel = parse_kernel(s.raw("kernel")?)?;
    let gamma: f64 = s.get("gamma")?;
    let req = SpectralProxRequest {
        kernel,
        gamma,
        t: &t,
        c_bar: &c_bar,
        psd: s.flag("psd")?,
    };
    let p = prox_spectral(&req)?;
    let obj = prox_objective(&req, &p)?;
    let dir = s.out_dir()?;
    s.echo(&dir)?;
    io::write_matrix(&dir.join("prox.csv"), &p)?;
    println!("objective={obj:.16e}");
    Ok(EXIT_OK)
}

fn load_or_generate(s: &Settings, cov: bool) -> Result<Dataset> {
    let seed: u64 = s.get("seed")?;
    let sigma = s.single_sigma()?;
    if s.has("data") {
        let dir = PathBuf::from(s.raw("data")?);
        let y_star = io::read_matrix(&dir.join("truth.csv"))?;
        let samples = io::read_rows(&dir.join("samples.csv"))?;
        if samples.is_empty() || samples.iter().any(|r| r.len() != y_star.n()) {
            return Err(Error::config("data", "samples do not match the truth dimension"));
        }
        return Ok(Dataset {
            y_star,
            samples,
            seed,
            sigma,
        });
    }
    if cov {
        let spec = s.block_spec()?;
        let n_samples = if s.has("samples") {
            s.positive_count("samples")?
        } else {
            spec.n()
        };
        covariance_trial(&spec, sigma, n_samples, seed)
    } else {
        precision_trial(
            s.positive_count("n")?,
            s.get("density")?,
            sigma,
            s.positive_count("samples")?,
            seed,
        )
    }
}

fn metrics_text(m: &Metrics, extra: &[(&str, String)]) -> String {
    let mut out = format!("tpr={:.16e}\nfpr={:.16e}\nrmse={:.16e}\n", m.tpr, m.fpr, m.rmse);
    for (k, v) in extra {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

/// Covariance model fit: `½‖C‖² − ⟨S − σ²I, C⟩ + μ0‖C‖_* + μ1‖C‖₁` over PSD `C`.
pub fn covariance_spec(s: &SymMatrix, sigma: f64, mu0: f64, mu1: f64) -> Result<ObjectiveSpec> {
    let g0 = if mu0 > 0.0 { Penalty::Nuclear { mu: mu0 } } else { Penalty::None };
    ObjectiveSpec::new(Divergence::HalfSquare, s.add_identity(-sigma * sigma), g0, mu1, true)
}

fn cmd_solve_cov(s: &Settings) -> Result<i32> {
    let ds = load_or_generate(s, true)?;
    let emp = empirical_cov(&ds);
    let spec = covariance_spec(&emp, ds.sigma, s.nonneg("mu0")?, s.nonneg("mu1")?)?;
    let cfg = s.dr_config()?;
    let tol: f64 = s.get("support_tol")?;
    let dir = s.out_dir()?;
    s.echo(&dir)?;
    let rep = dr_solve(&spec, &cfg, &emp.add_identity(1.0))?;
    let m = metrics(&rep.c_sparse, &ds.y_star, tol)?;
    let raw = metrics(&raw_estimator(&emp, ds.sigma)?, &ds.y_star, tol)?;
    io::write_matrix(&dir.join("estimate.csv"), &rep.c_sparse)?;
    io::write_atomic(&dir.join("trace.csv"), rep.trace_csv().as_bytes())?;
    let text = metrics_text(
        &m,
        &[
            ("raw_rmse", format!("{:.16e}", raw.rmse)),
            ("objective", format!("{:.16e}", rep.final_objective())),
            ("iterations", rep.iterations.to_string()),
            ("stop_reason", rep.stop_reason.to_string()),
        ],
    );
    io::write_atomic(&dir.join("metrics.txt"), text.as_bytes())?;
    println!(
        "tpr={:.4} fpr={:.4} rmse={:.6e} iterations={} stop={}",
        m.tpr, m.fpr, m.rmse, rep.iterations, rep.stop_reason
    );
    Ok(exit_for(rep.stop_reason == StopReason::MaxIter))
}

fn exit_for(hit_max: bool) -> i32 {
    if hit_max {
        EXIT_MAX_ITER
    } else {
        EXIT_OK
    }
}

/// Result of one precision estimator on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionFit {
    /// Sparse iterate, used for support recovery.
    pub precision: SymMatrix,
    /// Inverse of the smooth iterate, compared against the true covariance.
    pub covariance: SymMatrix,
    pub iterations: usize,
    pub hit_max: bool,
    pub seconds: f64,
}

/// Precision-trial parameters shared by every method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionParams {
    pub mu0: f64,
    pub mu1: f64,
    pub mm: MMConfig,
}

/// Runs `method` on empirical covariance `s` with noise level `sigma`.
pub fn fit_precision(method: Method, s: &SymMatrix, sigma: f64, p: &PrecisionParams) -> Result<PrecisionFit> {
    match method {
        Method::Mm => {
            let prob = NoisyGlassoProblem::new(s.clone(), sigma * sigma, p.mu0, p.mu1)?;
            let rep = mm_solve(&prob, &p.mm, &default_start(&prob)?)?;
            Ok(PrecisionFit {
                covariance: spd_inverse(&rep.c_final)?,
                precision: rep.c_sparse,
                iterations: rep.inner_iterations.iter().sum(),
                hit_max: rep.stop_reason == StopReason::MaxIter || rep.inner_hit_max,
                seconds: rep.elapsed.as_secs_f64(),
            })
        }
        Method::Glasso | Method::DrNoisy => {
            let rep = if method == Method::Glasso {
                glasso_solve(s, p.mu1, &p.mm.inner)?
            } else {
                dr_noisy_baseline(s, p.mu0, p.mu1, &p.mm.inner)?
            };
            Ok(PrecisionFit {
                covariance: spd_inverse(&rep.c_final)?,
                precision: rep.c_sparse,
                iterations: rep.iterations,
                hit_max: rep.stop_reason == StopReason::MaxIter,
                seconds: rep.elapsed.as_secs_f64(),
            })
        }
    }
}

/// Support metrics on the precision, `rmse` on the covariance.
pub fn precision_metrics(fit: &PrecisionFit, truth_precision: &SymMatrix, tol: f64) -> Result<Metrics> {
    let support = metrics(&fit.precision, truth_precision, tol)?;
    let cov = metrics(&fit.covariance, &spd_inverse(truth_precision)?, tol)?;
    Ok(Metrics {
        rmse: cov.rmse,
        ..support
    })
}

fn precision_params(s: &Settings) -> Result<PrecisionParams> {
    Ok(PrecisionParams {
        mu0: s.nonneg("mu0")?,
        mu1: s.nonneg("mu1")?,
        mm: s.mm_config()?,
    })
}

fn cmd_solve_glasso(s: &Settings) -> Result<i32> {
    let ds = load_or_generate(s, false)?;
    let emp = empirical_cov(&ds);
    let params = precision_params(s)?;
    let tol: f64 = s.get("support_tol")?;
    let dir = s.out_dir()?;
    s.echo(&dir)?;
    let prob = NoisyGlassoProblem::new(emp, ds.sigma * ds.sigma, params.mu0, params.mu1)?;
    let rep = mm_solve(&prob, &params.mm, &default_start(&prob)?)?;
    let fit = PrecisionFit {
        covariance: spd_inverse(&rep.c_final)?,
        precision: rep.c_sparse.clone(),
        iterations: rep.total_inner_iterations(),
        hit_max: rep.stop_reason == StopReason::MaxIter || rep.inner_hit_max,
        seconds: rep.elapsed.as_secs_f64(),
    };
    let m = precision_metrics(&fit, &ds.y_star, tol)?;
    io::write_matrix(&dir.join("estimate.csv"), &fit.precision)?;
    io::write_atomic(&dir.join("trace.csv"), rep.trace_csv().as_bytes())?;
    let text = metrics_text(
        &m,
        &[
            ("objective", format!("{:.16e}", rep.outer_objective.last().copied().unwrap_or(f64::NAN))),
            ("outer_iterations", rep.outer_iterations.to_string()),
            ("inner_iterations", fit.iterations.to_string()),
            ("stop_reason", rep.stop_reason.to_string()),
        ],
    );
    io::write_atomic(&dir.join("metrics.txt"), text.as_bytes())?;
    println!(
        "tpr={:.4} fpr={:.4} rmse={:.6e} outer={} inner={} stop={}",
        m.tpr, m.fpr, m.rmse, rep.outer_iterations, fit.iterations, rep.stop_reason
    );
    Ok(exit_for(fit.hit_max))
}

struct BenchRow {
    method: Method,
    sigma: f64,
    seed: u64,
    metrics: Metrics,
    iterations: usize,
    seconds: f64,
    hit_max: bool,
}

fn cmd_bench(s: &Settings) -> Result<i32> {
    let methods: Vec<Method> = s.list("method")?;
    let sigmas = s.sigmas()?;
    let reps = s.positive_count("reps")?;
    let seed: u64 = s.get("seed")?;
    let n = s.positive_count("n")?;
    let density: f64 = s.get("density")?;
    let n_samples = s.positive_count("samples")?;
    let params = precision_params(s)?;
    let timing = s.flag("timing")?;
    let tol: f64 = s.get("support_tol")?;
    let dir = s.out_dir()?;
    s.echo(&dir)?;

    let mut tasks = Vec::new();
    for &method in &methods {
        for &sigma in &sigmas {
            for r in 0..reps as u64 {
                tasks.push((method, sigma, seed.wrapping_add(r)));
            }
        }
    }
    let rows = tasks
        .par_iter()
        .map(|&(method, sigma, seed)| -> Result<BenchRow> {
            let ds = precision_trial(n, density, sigma, n_samples, seed)?;
            let fit = fit_precision(method, &empirical_cov(&ds), sigma, &params)?;
            Ok(BenchRow {
                method,
                sigma,
                seed,
                metrics: precision_metrics(&fit, &ds.y_star, tol)?,
                iterations: fit.iterations,
                seconds: if timing { fit.seconds } else { 0.0 },
                hit_max: fit.hit_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv = String::from("method,sigma,seed,rmse,tpr,fpr,iterations,seconds\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{:.16e},{},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            r.method, r.sigma, r.seed, r.metrics.rmse, r.metrics.tpr, r.metrics.fpr, r.iterations, r.seconds
        );
    }
    let mut agg = String::from("method,sigma,runs,rmse,tpr,fpr,iterations,seconds\n");
    for &method in &methods {
        for &sigma in &sigmas {
            let group: Vec<&BenchRow> = rows.iter().filter(|r| r.method == method && r.sigma == sigma).collect();
            let k = group.len() as f64;
            let mean = |f: &dyn Fn(&BenchRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / k;
            let _ = writeln!(
                agg,
                "{},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                method,
                sigma,
                group.len(),
                mean(&|r| r.metrics.rmse),
                mean(&|r| r.metrics.tpr),
                mean(&|r| r.metrics.fpr),
                mean(&|r| r.iterations as f64),
                mean(&|r| r.seconds)
            );
        }
    }
    io::write_atomic(&dir.join("bench.csv"), csv.as_bytes())?;
    io::write_atomic(&dir.join("bench_aggregate.csv"), agg.as_bytes())?;
    print!("{agg}");
    Ok(exit_for(rows.iter().any(|r| r.hit_max)))
}

fn cmd_gen(s: &Settings) -> Result<i32> {
    let seed: u64 = s.get("seed")?;
    let sigma = if s.has("sigma") {
        s.single_sigma()?
    } else if s.raw("scenario")?.trim() == "precision" {
        0.3
    } else {
        0.1
    };
    let mut meta = BTreeMap::new();
    let ds = match s.raw("scenario")?.trim() {
        "cov" => {
            let spec = s.block_spec()?;
            let n_samples = if s.has("samples") {
                s.positive_count("samples")?
            } else {
                spec.n()
            };
            let blocks: Vec<String> = spec.block_sizes().iter().map(|b| b.to_string()).collect();
            meta.insert("generator", "block_lowrank_cov".to_string());
            meta.insert("blocks", blocks.join(","));
            covariance_trial(&spec, sigma, n_samples, seed)?
        }
        "precision" => {
            let n = if s.has("n") { s.positive_count("n")? } else { 100 };
            let density: f64 = if s.has("density") { s.get("density")? } else { 1e-3 };
            let n_samples = if s.has("samples") {
                s.positive_count("samples")?
            } else {
                1000
            };
            meta.insert("generator", "sparse_precision".to_string());
            meta.insert("density", format!("{density}"));
            precision_trial(n, density, sigma, n_samples, seed)?
        }
        other => return Err(Error::config("scenario", format!("expected cov or precision, got `{other}`"))),
    };
    meta.insert("scenario", s.raw("scenario")?.trim().to_string());
    meta.insert("seed", seed.to_string());
    meta.insert("sigma", format!("{sigma}"));
    meta.insert("N", ds.samples.len().to_string());
    meta.insert("n", ds.n().to_string());
    meta.insert("rng", RNG_NAME.to_string());
    let meta: BTreeMap<String, String> = meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect();

    let dir = s.out_dir()?;
    s.echo(&dir)?;
    io::write_matrix(&dir.join("truth.csv"), &ds.y_star)?;
    io::write_rows(&dir.join("samples.csv"), &ds.samples)?;
    io::write_atomic(&dir.join("meta.txt"), io::format_key_values(&meta).as_bytes())?;
    println!("wrote {} samples of dimension {} to {}", ds.samples.len(), ds.n(), dir.display());
    Ok(EXIT_OK)
}
