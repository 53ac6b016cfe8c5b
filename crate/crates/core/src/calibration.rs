//! Monte Carlo calibration of `λ_r` under the global null.
//!
//! For every replicate a null dataset is simulated with the target marker
//! covariance, standardized, and its entry threshold λ̃_r (the largest λ with
//! more than `r` non-zero coefficients) is located on a descending path.
//! `λ_r` is the `⌈(1 − α)(M + 1)⌉`-th order statistic of the replicate
//! thresholds, so `P(U_{λ_r} > r) ≈ α`. A fresh validation batch then
//! measures the realized rejection rate at each `λ_r`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::data::{correlated_normals_with, standardize, Dataset, SpectralFactor};
use crate::error::{Error, Result};
use crate::global_test::fingerprint;
use crate::lasso::{
    counts_at, lambda_grid, scan_entry_thresholds, Design, SolverOptions, GRID_LEN, GRID_MIN_RATIO,
};
use crate::rng::{standard_normals, RngSpec};
use crate::scalar::Scalar;

/// Replicate count below which a table counts as downgraded.
pub const PRODUCTION_REPLICATES: usize = 10_000;
pub const MIN_REPLICATES: usize = 100;
/// r values used in the power study: U(0), U(1), U(2), U(5), U(10), U(20).
pub const DEFAULT_R_VALUES: [usize; 6] = [0, 1, 2, 5, 10, 20];

const VALIDATION_TAG: u64 = 0x7661_6c69_6461_7465;

/// How the simulated response enters the replicate fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResponseScaling {
    /// Centered and scaled like the markers, as the test does with observed data.
    #[default]
    Standardized,
    /// Left as drawn, iid standard normal. Only the markers are standardized.
    Raw,
}

impl std::fmt::Display for ResponseScaling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Standardized => "standardized",
            Self::Raw => "raw",
        })
    }
}

impl std::str::FromStr for ResponseScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standardized" => Ok(Self::Standardized),
            "raw" => Ok(Self::Raw),
            other => Err(Error::invalid(format!(
                "response scaling must be `standardized` or `raw`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CalibrationSettings {
    pub alpha: f64,
    pub replicates: usize,
    pub validation_replicates: usize,
    /// Permits fewer than [`PRODUCTION_REPLICATES`] replicates.
    pub allow_downgrade: bool,
    pub response: ResponseScaling,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            replicates: PRODUCTION_REPLICATES,
            validation_replicates: 2_000,
            allow_downgrade: false,
            response: ResponseScaling::Standardized,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationEntry<T> {
    pub r: usize,
    pub lambda_r: T,
    /// Rejection rate `P(U > r)` at `lambda_r` measured on the validation batch.
    pub exceedance_rate: f64,
    /// Replicates whose path dropped back to `u ≤ r` below their threshold.
    pub nonmonotone: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable<T> {
    pub alpha: f64,
    pub replicates: usize,
    pub validation_replicates: usize,
    pub rng: RngSpec,
    pub n: usize,
    pub p: usize,
    pub factor_fingerprint: u64,
    pub response: ResponseScaling,
    pub entries: Vec<CalibrationEntry<T>>,
    /// Every validated rate lies within `α ± 3·sqrt(α(1 − α)/V)`.
    pub validated: bool,
    pub downgraded: bool,
}

impl<T: Scalar> CalibrationTable<T> {
    /// Whether `U(r) > r` can occur at all for this table's shape.
    pub fn attainable(&self, r: usize) -> bool {
        r < max_support(self.n, self.p)
    }

    pub fn entry(&self, r: usize) -> Result<&CalibrationEntry<T>> {
        self.entries
            .iter()
            .find(|e| e.r == r)
            .ok_or(Error::MissingEntry(r))
    }

    /// Half-width of the accepted band around α for the validation batch.
    pub fn validation_band(&self) -> f64 {
        size_band(self.alpha, self.validation_replicates)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, extra_comments: &[String]) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# lasso-gate calibration table")?;
        writeln!(out, "# version={}", env!("CARGO_PKG_VERSION"))?;
        for line in extra_comments {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "# alpha={}", self.alpha)?;
        writeln!(out, "# replicates={}", self.replicates)?;
        writeln!(out, "# validation_replicates={}", self.validation_replicates)?;
        writeln!(out, "# seed={}", self.rng.seed)?;
        writeln!(out, "# stream={}", self.rng.stream)?;
        writeln!(out, "# n={}", self.n)?;
        writeln!(out, "# p={}", self.p)?;
        writeln!(out, "# factor_fingerprint={:016x}", self.factor_fingerprint)?;
        writeln!(out, "# response={}", self.response)?;
        writeln!(out, "# validated={}", self.validated)?;
        writeln!(out, "# downgraded={}", self.downgraded)?;
        let nonmono: Vec<String> = self
            .entries
            .iter()
            .map(|e| format!("{}:{}", e.r, e.nonmonotone))
            .collect();
        writeln!(out, "# nonmonotone={}", nonmono.join(";"))?;
        writeln!(out, "r,lambda_r,exceedance_rate")?;
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.r, e.lambda_r, e.exceedance_rate)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let text = std::fs::read_to_string(path)?;
        let mut meta = BTreeMap::new();
        let mut rows = Vec::new();
        let mut header_seen = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if !header_seen {
                if line != "r,lambda_r,exceedance_rate" {
                    return Err(err(format!("unexpected header `{line}`")));
                }
                header_seen = true;
                continue;
            }
            rows.push(line.to_string());
        }
        if !header_seen {
            return Err(err("missing header `r,lambda_r,exceedance_rate`".into()));
        }

        let get = |key: &str| meta.get(key).ok_or_else(|| err(format!("missing `# {key}=` line")));
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse::<f64>()
                .map_err(|_| err(format!("`{key}` is not a number")))
        };
        let int = |key: &str| -> Result<u64> {
            get(key)?
                .parse::<u64>()
                .map_err(|_| err(format!("`{key}` is not an integer")))
        };
        let flag = |key: &str| -> Result<bool> {
            get(key)?
                .parse::<bool>()
                .map_err(|_| err(format!("`{key}` is not a boolean")))
        };
        let factor_fingerprint = u64::from_str_radix(get("factor_fingerprint")?, 16)
            .map_err(|_| err("`factor_fingerprint` is not hexadecimal".into()))?;

        let mut nonmono = BTreeMap::new();
        if let Some(list) = meta.get("nonmonotone") {
            for item in list.split(';').filter(|s| !s.is_empty()) {
                let (r, c) = item
                    .split_once(':')
                    .ok_or_else(|| err(format!("bad nonmonotone item `{item}`")))?;
                let r: usize = r.parse().map_err(|_| err(format!("bad nonmonotone item `{item}`")))?;
                let c: usize = c.parse().map_err(|_| err(format!("bad nonmonotone item `{item}`")))?;
                nonmono.insert(r, c);
            }
        }

        let mut entries = Vec::new();
        for row in rows {
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(err(format!("row `{row}` does not have 3 fields")));
            }
            let bad = || err(format!("row `{row}` is malformed"));
            let r: usize = fields[0].parse().map_err(|_| bad())?;
            let lambda_r: f64 = fields[1].parse().map_err(|_| bad())?;
            let exceedance_rate: f64 = fields[2].parse().map_err(|_| bad())?;
            entries.push(CalibrationEntry {
                r,
                lambda_r: T::of(lambda_r),
                exceedance_rate,
                nonmonotone: nonmono.get(&r).copied().unwrap_or(0),
            });
        }

        Ok(Self {
            alpha: num("alpha")?,
            replicates: int("replicates")? as usize,
            validation_replicates: int("validation_replicates")? as usize,
            rng: RngSpec::new(int("seed")?, int("stream")?),
            n: int("n")? as usize,
            p: int("p")? as usize,
            factor_fingerprint,
            response: get("response")?.parse().map_err(|e: Error| err(e.to_string()))?,
            entries,
            validated: flag("validated")?,
            downgraded: flag("downgraded")?,
        })
    }
}

/// Largest possible number of non-zero coefficients with `n` centered
/// samples and `p` markers. `U(r)` can never exceed `r` at or above this.
pub fn max_support(n: usize, p: usize) -> usize {
    p.min(n.saturating_sub(1))
}

/// `3 · sqrt(α(1 − α)/m)`.
pub fn size_band(alpha: f64, m: usize) -> f64 {
    3.0 * (alpha * (1.0 - alpha) / m as f64).sqrt()
}

/// Rank (1-based) of the order statistic used as the critical value.
pub fn quantile_rank(alpha: f64, replicates: usize) -> usize {
    // the epsilon absorbs representation error in products like 0.95 · 20
    ((1.0 - alpha) * (replicates + 1) as f64 - 1e-9).ceil() as usize
}

/// Simulates one null dataset: `y` iid standard normal, markers `O D Z`.
pub fn simulate_null<T: Scalar>(factor: &SpectralFactor<T>, n: usize, rng: RngSpec) -> Result<Dataset<T>> {
    let mut gen = rng.generator();
    let y = standard_normals(&mut gen, n);
    let x = correlated_normals_with(factor, n, &mut gen);
    Dataset::new(y, x)
}

/// Simulates a null dataset and prepares it for fitting.
pub fn null_design<T: Scalar>(
    factor: &SpectralFactor<T>,
    n: usize,
    response: ResponseScaling,
    rng: RngSpec,
) -> Result<Design<T>> {
    let raw = simulate_null(factor, n, rng)?;
    let data = standardize(&raw)?;
    Ok(match response {
        ResponseScaling::Standardized => Design::new(&data)?,
        ResponseScaling::Raw => Design::from_columns(data.x().columns(), raw.y().to_vec()),
    })
}

/// λ at which `u` is evaluated for a calibrated `lambda_r`. A zero threshold
/// means no exceedance down to the grid floor, so it maps to the floor.
pub(crate) fn effective_lambda<T: Scalar>(design: &Design<T>, lambda_r: T) -> T {
    if lambda_r > T::zero() {
        lambda_r
    } else if design.p() < design.n() {
        T::zero()
    } else {
        design.lambda_max() * T::of(GRID_MIN_RATIO)
    }
}

/// Per-replicate entry thresholds for the requested `r_values`.
pub fn replicate_thresholds<T: Scalar>(
    factor: &SpectralFactor<T>,
    n: usize,
    r_values: &[usize],
    response: ResponseScaling,
    rng: RngSpec,
) -> Result<(Vec<T>, Vec<bool>)> {
    let design = null_design(factor, n, response, rng)?;
    let p = design.p();
    // unattainable r values are passed as p, which the scan skips
    let scanned: Vec<usize> = r_values
        .iter()
        .map(|&r| if r < max_support(n, p) { r } else { p })
        .collect();
    let grid = lambda_grid(design.lambda_max(), GRID_LEN, GRID_MIN_RATIO);
    let scan = scan_entry_thresholds(&design, &scanned, &grid, true, &SolverOptions::default())?;
    Ok((scan.thresholds, scan.nonmonotone))
}

pub fn calibrate<T: Scalar>(
    factor: &SpectralFactor<T>,
    n: usize,
    r_values: &[usize],
    settings: &CalibrationSettings,
    rng: RngSpec,
) -> Result<CalibrationTable<T>> {
    let alpha = settings.alpha;
    let m = settings.replicates;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if m < MIN_REPLICATES {
        return Err(Error::invalid(format!("need at least {MIN_REPLICATES} replicates, got {m}")));
    }
    if m < PRODUCTION_REPLICATES && !settings.allow_downgrade {
        return Err(Error::invalid(format!(
            "critical values require at least {PRODUCTION_REPLICATES} replicates (got {m}); \
             pass the downgrade flag to accept fewer"
        )));
    }
    if settings.validation_replicates == 0 {
        return Err(Error::invalid("validation batch must not be empty"));
    }
    if r_values.is_empty() {
        return Err(Error::invalid("no r values requested"));
    }
    let rank = quantile_rank(alpha, m);
    if rank > m || rank == 0 {
        return Err(Error::InsufficientReplicates {
            replicates: m,
            alpha,
            quantile: rank,
        });
    }
    let p = factor.p();

    let per_replicate: Vec<(Vec<T>, Vec<bool>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            replicate_thresholds(factor, n, r_values, settings.response, rng.substream(i as u64)).map_err(|e| e.at_replicate(i))
        })
        .collect::<Result<_>>()?;

    let mut entries = Vec::with_capacity(r_values.len());
    for (slot, &r) in r_values.iter().enumerate() {
        let mut thresholds: Vec<T> = per_replicate.iter().map(|(t, _)| t[slot]).collect();
        let nonmonotone = per_replicate.iter().filter(|(_, f)| f[slot]).count();
        let lambda_r = if r >= max_support(n, p) {
            T::zero()
        } else {
            thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite threshold"));
            thresholds[rank - 1]
        };
        entries.push(CalibrationEntry {
            r,
            lambda_r,
            exceedance_rate: 0.0,
            nonmonotone,
        });
    }

    let mut table = CalibrationTable {
        alpha,
        replicates: m,
        validation_replicates: settings.validation_replicates,
        rng,
        n,
        p,
        factor_fingerprint: fingerprint(factor, n),
        response: settings.response,
        entries,
        validated: false,
        downgraded: m < PRODUCTION_REPLICATES,
    };

    let rates = validate_size(&table, factor, n, settings.validation_replicates, validation_stream(rng))?;
    let band = table.validation_band();
    let mut validated = true;
    for (entry, (_, rate)) in table.entries.iter_mut().zip(rates) {
        entry.exceedance_rate = rate;
        if entry.r < max_support(n, p) && (rate - alpha).abs() > band {
            validated = false;
        }
    }
    table.validated = validated;
    Ok(table)
}

/// Stream used for the validation batch of a calibration run with `rng`.
pub fn validation_stream(rng: RngSpec) -> RngSpec {
    rng.fork(VALIDATION_TAG)
}

/// Fraction of fresh null datasets with `u(λ_r) > r`, per table entry.
pub fn validate_size<T: Scalar>(
    table: &CalibrationTable<T>,
    factor: &SpectralFactor<T>,
    n: usize,
    replicates: usize,
    rng: RngSpec,
) -> Result<Vec<(usize, f64)>> {
    if replicates == 0 {
        return Err(Error::invalid("validation needs at least one replicate"));
    }
    if factor.p() != table.p || n != table.n {
        return Err(Error::invalid(format!(
            "table calibrated for n = {}, p = {} but validation uses n = {n}, p = {}",
            table.n,
            table.p,
            factor.p()
        )));
    }
    let per_replicate: Vec<Vec<bool>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<Vec<bool>> {
                let design = null_design(factor, n, table.response, rng.substream(i as u64))?;
                let lambdas: Vec<T> = table
                    .entries
                    .iter()
                    .map(|e| effective_lambda(&design, e.lambda_r))
                    .collect();
                let counts = counts_at(&design, &lambdas, &SolverOptions::default())?;
                Ok(table
                    .entries
                    .iter()
                    .zip(counts)
                    .map(|(e, u)| table.attainable(e.r) && u > e.r)
                    .collect())
            };
            run().map_err(|e| e.at_replicate(i))
        })
        .collect::<Result<_>>()?;

    Ok(table
        .entries
        .iter()
        .enumerate()
        .map(|(slot, e)| {
            let hits = per_replicate.iter().filter(|v| v[slot]).count();
            (e.r, hits as f64 / replicates as f64)
        })
        .collect())
}
