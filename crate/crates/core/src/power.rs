//! Power study: simulated scenarios with one or several relevant markers,
//! comparing the U(r) tests against marginal t-tests with Bonferroni and
//! Benjamini–Hochberg corrections.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::baselines::{bh_global, bonferroni_global, marginal_t_tests};
use crate::calibration::{
    calibrate, effective_lambda, CalibrationSettings, CalibrationTable, ResponseScaling, DEFAULT_R_VALUES,
};
use crate::data::{standardize, Dataset, Matrix, SpectralFactor};
use crate::error::{Error, Result};
use crate::global_test::fingerprint;
use crate::lasso::{counts_at, Design, SolverOptions};
use crate::rng::{standard_normal, RngSpec};
use crate::scalar::Scalar;

/// Test procedure whose rejection rate is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    U(usize),
    TBonferroni,
    TBh,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::U(r) => write!(f, "U({r})"),
            Method::TBonferroni => f.write_str("t-Bonferroni"),
            Method::TBh => f.write_str("t-BH"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// `β₁` takes each grid value, all other coefficients are zero.
    OnePredictor { beta_grid: Vec<f64> },
    /// For each `k`, `β₁..β_k` are redrawn per replicate from
    /// `Normal(μ, sd = 0.5μ)`; the rest are zero.
    MultiPredictor { k_values: Vec<usize>, mu: f64 },
}

impl Scenario {
    fn id(&self) -> u64 {
        match self {
            Scenario::OnePredictor { .. } => 1,
            Scenario::MultiPredictor { .. } => 2,
        }
    }

    fn x_axis(&self) -> Vec<f64> {
        match self {
            Scenario::OnePredictor { beta_grid } => beta_grid.clone(),
            Scenario::MultiPredictor { k_values, .. } => k_values.iter().map(|&k| k as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub sigma_noise: f64,
    pub runs: usize,
    pub r_values: Vec<usize>,
    pub scenario: Scenario,
    pub rng: RngSpec,
}

impl ScenarioConfig {
    /// n = 40, p = 200, σ = 1, 10000 runs, r ∈ {0, 1, 2, 5, 10, 20}.
    pub fn new(scenario: Scenario, rng: RngSpec) -> Self {
        Self {
            n: 40,
            p: 200,
            sigma_noise: 1.0,
            runs: 10_000,
            r_values: DEFAULT_R_VALUES.to_vec(),
            scenario,
            rng,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs < 100 {
            return Err(Error::invalid(format!("runs must be at least 100, got {}", self.runs)));
        }
        if !(self.sigma_noise >= 0.0) {
            return Err(Error::invalid("sigma_noise must be non-negative"));
        }
        if self.r_values.is_empty() {
            return Err(Error::invalid("no r values configured"));
        }
        match &self.scenario {
            Scenario::OnePredictor { beta_grid } => {
                if beta_grid.is_empty() || beta_grid.iter().any(|b| !(*b >= 0.0)) {
                    return Err(Error::invalid("beta grid must be non-empty and non-negative"));
                }
            }
            Scenario::MultiPredictor { k_values, mu } => {
                if k_values.is_empty() || k_values.iter().any(|&k| k > self.p) {
                    return Err(Error::invalid("k values must be non-empty and at most p"));
                }
                if !mu.is_finite() {
                    return Err(Error::invalid("mu must be finite"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub method: Method,
    pub x_axis: Vec<f64>,
    pub power: Vec<f64>,
    pub mc_se: Vec<f64>,
}

impl PowerCurve {
    pub fn at(&self, x: f64) -> Option<(f64, f64)> {
        self.x_axis
            .iter()
            .position(|&v| v == x)
            .map(|i| (self.power[i], self.mc_se[i]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerStudy {
    pub curves: Vec<PowerCurve>,
    /// Simulated datasets (runs × parameter points).
    pub replicates: usize,
    /// LASSO fits at calibrated λ_r values.
    pub lasso_fits: usize,
}

impl PowerStudy {
    pub fn curve(&self, method: Method) -> Option<&PowerCurve> {
        self.curves.iter().find(|c| c.method == method)
    }
}

/// `sqrt(p(1 − p)/runs)`.
pub fn mc_se(power: f64, runs: usize) -> f64 {
    (power * (1.0 - power) / runs as f64).sqrt()
}

fn check_table<T: Scalar>(config: &ScenarioConfig, table: &CalibrationTable<T>) -> Result<()> {
    config.validate()?;
    if table.n != config.n || table.p != config.p {
        return Err(Error::invalid(format!(
            "table calibrated for n = {}, p = {} but scenario uses n = {}, p = {}",
            table.n, table.p, config.n, config.p
        )));
    }
    let expected = fingerprint(&SpectralFactor::<T>::identity(config.p), config.n);
    if table.factor_fingerprint != expected {
        return Err(Error::FingerprintMismatch {
            table: table.factor_fingerprint,
            data: expected,
        });
    }
    if !table.validated {
        return Err(Error::UnvalidatedTable);
    }
    for &r in &config.r_values {
        table.entry(r)?;
    }
    Ok(())
}

fn stream_id(scenario: u64, point: usize, replicate: usize) -> u64 {
    (scenario << 56) | ((point as u64) << 40) | replicate as u64
}

/// Rejection decisions of every method for one standardized dataset, in the
/// order U(r) for each `r_values` entry, then Bonferroni, then BH.
fn decisions<T: Scalar>(data: &Dataset<T>, table: &CalibrationTable<T>, r_values: &[usize]) -> Result<Vec<bool>> {
    let design = Design::new(data)?;
    let attainable: Vec<usize> = r_values.iter().copied().filter(|&r| table.attainable(r)).collect();
    let lambdas: Vec<T> = attainable
        .iter()
        .map(|&r| table.entry(r).map(|e| effective_lambda(&design, e.lambda_r)))
        .collect::<Result<_>>()?;
    let counts = counts_at(&design, &lambdas, &SolverOptions::default())?;
    let mut out: Vec<bool> = r_values
        .iter()
        .map(|r| match attainable.iter().position(|a| a == r) {
            Some(i) => counts[i] > *r,
            None => false,
        })
        .collect();
    let marginal = marginal_t_tests(data)?;
    let alpha = T::of(table.alpha);
    out.push(bonferroni_global(&marginal.p_values, alpha));
    out.push(bh_global(&marginal.p_values, alpha));
    Ok(out)
}

/// Simulates `y = Xβ + ε` with iid standard normal markers.
fn simulate_dataset<T: Scalar, R: rand::Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    p: usize,
    beta: &[(usize, f64)],
    sigma: f64,
) -> Result<Dataset<T>> {
    let mut x = Matrix::<T>::zeros(n, p);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let row = x.row_mut(i);
        for v in row.iter_mut() {
            *v = standard_normal(rng);
        }
        let noise: f64 = standard_normal(rng);
        let signal: f64 = beta.iter().map(|&(j, b)| b * row[j].as_f64()).sum();
        y.push(T::of(signal + sigma * noise));
    }
    Dataset::new(y, x)
}

fn run_scenario<T: Scalar>(config: &ScenarioConfig, table: &CalibrationTable<T>) -> Result<PowerStudy> {
    check_table(config, table)?;
    let x_axis = config.scenario.x_axis();
    let methods: Vec<Method> = config
        .r_values
        .iter()
        .map(|&r| Method::U(r))
        .chain([Method::TBonferroni, Method::TBh])
        .collect();
    let (n, p, sigma) = (config.n, config.p, config.sigma_noise);
    let scenario_id = config.scenario.id();

    let mut power = vec![Vec::with_capacity(x_axis.len()); methods.len()];
    for point in 0..x_axis.len() {
        let hits: Vec<Vec<bool>> = (0..config.runs)
            .into_par_iter()
            .map(|rep| {
                let run = || -> Result<Vec<bool>> {
                    let mut gen = config.rng.substream(stream_id(scenario_id, point, rep)).generator();
                    let beta: Vec<(usize, f64)> = match &config.scenario {
                        Scenario::OnePredictor { beta_grid } => vec![(0, beta_grid[point])],
                        Scenario::MultiPredictor { k_values, mu } => (0..k_values[point])
                            .map(|j| {
                                let z: f64 = standard_normal(&mut gen);
                                (j, mu + 0.5 * mu * z)
                            })
                            .collect(),
                    };
                    let raw = simulate_dataset::<T, _>(&mut gen, n, p, &beta, sigma)?;
                    decisions(&standardize(&raw)?, table, &config.r_values)
                };
                run().map_err(|e| {
                    Error::invalid(format!("point x = {}, replicate {rep}: {e}", x_axis[point]))
                })
            })
            .collect::<Result<_>>()?;
        for (m, series) in power.iter_mut().enumerate() {
            let count = hits.iter().filter(|h| h[m]).count();
            series.push(count as f64 / config.runs as f64);
        }
    }

    let curves = methods
        .into_iter()
        .zip(power)
        .map(|(method, power)| PowerCurve {
            method,
            x_axis: x_axis.clone(),
            mc_se: power.iter().map(|&v| mc_se(v, config.runs)).collect(),
            power,
        })
        .collect();
    let replicates = config.runs * x_axis.len();
    Ok(PowerStudy {
        curves,
        replicates,
        lasso_fits: replicates * config.r_values.iter().filter(|&&r| table.attainable(r)).count(),
    })
}

/// One relevant marker with effect `β₁` on the configured grid.
pub fn simulate_scenario1<T: Scalar>(config: &ScenarioConfig, table: &CalibrationTable<T>) -> Result<PowerStudy> {
    if !matches!(config.scenario, Scenario::OnePredictor { .. }) {
        return Err(Error::invalid("scenario 1 needs a beta grid"));
    }
    run_scenario(config, table)
}

/// `k` relevant markers with effects drawn per replicate.
pub fn simulate_scenario2<T: Scalar>(config: &ScenarioConfig, table: &CalibrationTable<T>) -> Result<PowerStudy> {
    if !matches!(config.scenario, Scenario::MultiPredictor { .. }) {
        return Err(Error::invalid("scenario 2 needs k values and mu"));
    }
    run_scenario(config, table)
}

/// Writes `x,method,power,mc_se` rows sorted by method then x, preceded by
/// `comments` as `#` lines.
pub fn export_power_tables(curves: &[PowerCurve], path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
    let first = curves
        .first()
        .ok_or_else(|| Error::invalid("no power curves to export"))?;
    if curves.iter().any(|c| c.x_axis != first.x_axis) {
        return Err(Error::invalid("power curves do not share an x axis"));
    }
    let mut rows: Vec<(Method, f64, f64, f64)> = curves
        .iter()
        .flat_map(|c| {
            c.x_axis
                .iter()
                .zip(&c.power)
                .zip(&c.mc_se)
                .map(move |((&x, &pw), &se)| (c.method, x, pw, se))
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for line in comments {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "x,method,power,mc_se")?;
    for (method, x, pw, se) in rows {
        writeln!(out, "{x},{method},{pw},{se}")?;
    }
    out.flush()?;
    Ok(())
}

/// Power-study settings read from a `key = value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerConfig {
    pub n: usize,
    pub p: usize,
    pub sigma_noise: f64,
    pub runs: usize,
    pub r_values: Vec<usize>,
    pub alpha: f64,
    pub seed: u64,
    pub calibration_replicates: usize,
    pub validation_replicates: usize,
    pub allow_downgrade: bool,
    pub calibration_response: ResponseScaling,
    pub scenarios: BTreeSet<u8>,
    pub beta_grid: Vec<f64>,
    pub k_values: Vec<usize>,
    pub mu_values: Vec<f64>,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            n: 40,
            p: 200,
            sigma_noise: 1.0,
            runs: 10_000,
            r_values: DEFAULT_R_VALUES.to_vec(),
            alpha: 0.05,
            seed: 1,
            calibration_replicates: 10_000,
            validation_replicates: 2_000,
            allow_downgrade: false,
            calibration_response: ResponseScaling::Standardized,
            scenarios: [1, 2].into(),
            beta_grid: (1..=10).map(|i| i as f64 / 10.0).collect(),
            k_values: vec![1, 2, 5, 10, 20, 50],
            mu_values: vec![0.2, 0.4],
        }
    }
}

fn parse_list<V: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<V>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::invalid(format!("`{key}`: cannot parse `{s}`")))
        })
        .collect()
}

fn parse_one<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("`{key}`: cannot parse `{value}`")))
}

impl PowerConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults, unknown keys are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => cfg.n = parse_one(key, value)?,
                "p" => cfg.p = parse_one(key, value)?,
                "sigma_noise" => cfg.sigma_noise = parse_one(key, value)?,
                "runs" => cfg.runs = parse_one(key, value)?,
                "r_values" => cfg.r_values = parse_list(key, value)?,
                "alpha" => cfg.alpha = parse_one(key, value)?,
                "seed" => cfg.seed = parse_one(key, value)?,
                "calibration_replicates" => cfg.calibration_replicates = parse_one(key, value)?,
                "validation_replicates" => cfg.validation_replicates = parse_one(key, value)?,
                "allow_downgrade" => cfg.allow_downgrade = parse_one(key, value)?,
                "calibration_response" => cfg.calibration_response = value.parse()?,
                "scenarios" => cfg.scenarios = parse_list::<u8>(key, value)?.into_iter().collect(),
                "beta_grid" => cfg.beta_grid = parse_list(key, value)?,
                "k_values" => cfg.k_values = parse_list(key, value)?,
                "mu_values" => cfg.mu_values = parse_list(key, value)?,
                other => {
                    return Err(Error::invalid(format!("line {}: unknown key `{other}`", lineno + 1)));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1)"));
        }
        if self.scenarios.is_empty() || self.scenarios.iter().any(|s| !(1..=2).contains(s)) {
            return Err(Error::invalid("scenarios must be a subset of {1, 2}"));
        }
        if self.scenarios.contains(&2) && self.mu_values.is_empty() {
            return Err(Error::invalid("scenario 2 needs at least one mu value"));
        }
        for cfg in self.scenario_configs() {
            cfg.1.validate()?;
        }
        Ok(())
    }

    pub fn calibration_settings(&self) -> CalibrationSettings {
        CalibrationSettings {
            alpha: self.alpha,
            replicates: self.calibration_replicates,
            validation_replicates: self.validation_replicates,
            allow_downgrade: self.allow_downgrade,
            response: self.calibration_response,
        }
    }

    /// Output file name and scenario settings for every configured run.
    pub fn scenario_configs(&self) -> Vec<(String, ScenarioConfig)> {
        let base = |scenario| ScenarioConfig {
            n: self.n,
            p: self.p,
            sigma_noise: self.sigma_noise,
            runs: self.runs,
            r_values: self.r_values.clone(),
            scenario,
            rng: RngSpec::new(self.seed, 0),
        };
        let mut out = Vec::new();
        if self.scenarios.contains(&1) {
            out.push((
                "scenario1.csv".to_string(),
                base(Scenario::OnePredictor {
                    beta_grid: self.beta_grid.clone(),
                }),
            ));
        }
        if self.scenarios.contains(&2) {
            for (i, &mu) in self.mu_values.iter().enumerate() {
                let mut cfg = base(Scenario::MultiPredictor {
                    k_values: self.k_values.clone(),
                    mu,
                });
                // distinct mu values must not share random streams
                cfg.rng = cfg.rng.substream((i as u64) << 52);
                out.push((format!("scenario2_mu{}.csv", mu.to_string().replace(['.', '-'], "")), cfg));
            }
        }
        out
    }

    /// `key=value` lines describing this configuration.
    pub fn echo(&self) -> Vec<String> {
        let join = |v: Vec<String>| v.join(",");
        vec![
            format!("n={}", self.n),
            format!("p={}", self.p),
            format!("sigma_noise={}", self.sigma_noise),
            format!("runs={}", self.runs),
            format!("r_values={}", join(self.r_values.iter().map(|v| v.to_string()).collect())),
            format!("alpha={}", self.alpha),
            format!("seed={}", self.seed),
            format!("calibration_replicates={}", self.calibration_replicates),
            format!("validation_replicates={}", self.validation_replicates),
            format!("allow_downgrade={}", self.allow_downgrade),
            format!("calibration_response={}", self.calibration_response),
            format!("scenarios={}", join(self.scenarios.iter().map(|v| v.to_string()).collect())),
            format!("beta_grid={}", join(self.beta_grid.iter().map(|v| v.to_string()).collect())),
            format!("k_values={}", join(self.k_values.iter().map(|v| v.to_string()).collect())),
            format!("mu_values={}", join(self.mu_values.iter().map(|v| v.to_string()).collect())),
        ]
    }
}

/// Results of a configured power study.
#[derive(Debug, Clone)]
pub struct PowerReport<T> {
    pub table: CalibrationTable<T>,
    /// (output file name, study) per configured scenario.
    pub studies: Vec<(String, PowerStudy)>,
}

/// Calibrates once under the identity covariance and runs every configured
/// scenario against that table.
pub fn run_power_study<T: Scalar>(config: &PowerConfig) -> Result<PowerReport<T>> {
    config.validate()?;
    let factor = SpectralFactor::<T>::identity(config.p);
    let table = calibrate(
        &factor,
        config.n,
        &config.r_values,
        &config.calibration_settings(),
        RngSpec::new(config.seed, 0).fork(0x6361_6c69_6272_6174),
    )?;
    if !table.validated {
        return Err(Error::UnvalidatedTable);
    }
    let mut studies = Vec::new();
    for (name, scenario) in config.scenario_configs() {
        let study = match scenario.scenario {
            Scenario::OnePredictor { .. } => simulate_scenario1(&scenario, &table)?,
            Scenario::MultiPredictor { .. } => simulate_scenario2(&scenario, &table)?,
        };
        studies.push((name, study));
    }
    Ok(PowerReport { table, studies })
}
