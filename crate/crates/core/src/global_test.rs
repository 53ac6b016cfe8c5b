//! End-to-end global test: standardize, decompose the marker covariance,
//! calibrate `λ_r`, fit the LASSO at `λ_r` and reject when `U(r) > r`.
//!
//! The procedure yields a decision at a fixed α, not a p-value; a p-value
//! would need `λ` calibrated over a continuum of levels.

use sha2::{Digest, Sha256};

use crate::calibration::{calibrate, effective_lambda, CalibrationSettings, CalibrationTable};
use crate::data::{sample_covariance, spectral_decompose, standardize, Dataset, SpectralFactor};
use crate::error::{Error, Result};
use crate::lasso::{Design, LassoFit, SolverOptions};
use crate::rng::RngSpec;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome<T> {
    pub r: usize,
    pub lambda_r: T,
    pub u_observed: usize,
    pub reject: bool,
    pub alpha: f64,
    pub calibration_fingerprint: u64,
    pub fit: LassoFit<T>,
}

impl<T: Scalar> TestOutcome<T> {
    pub const CSV_HEADER: &'static str = "r,lambda_r,u_observed,reject,alpha";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.r, self.lambda_r, self.u_observed, self.reject, self.alpha
        )
    }

    pub fn summary(&self) -> String {
        let verdict = if self.reject {
            "reject H0: at least one marker is linearly related to the response"
        } else {
            "do not reject H0"
        };
        format!(
            "U({r}) = {u} at lambda_{r} = {l:.6} (alpha = {a}): {verdict}",
            r = self.r,
            u = self.u_observed,
            l = self.lambda_r,
            a = self.alpha
        )
    }
}

/// The rejection rule.
#[inline]
pub fn decide(u_observed: usize, r: usize) -> bool {
    u_observed > r
}

/// Stable 64-bit digest of `(n, p, eigenvalues rounded to 1e-6)`.
pub fn fingerprint<T: Scalar>(factor: &SpectralFactor<T>, n: usize) -> u64 {
    let mut eig: Vec<f64> = factor.eigenvalues().iter().map(|v| v.as_f64()).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let mut hasher = Sha256::new();
    hasher.update(b"lasso-gate/factor/v1");
    hasher.update((n as u64).to_le_bytes());
    hasher.update((factor.p() as u64).to_le_bytes());
    for v in eig {
        let q = (v / 1e-6).round() as i64;
        hasher.update(q.to_le_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has at least 8 bytes"))
}

/// Standardizes `raw` and returns it together with the spectral factor of
/// its marker covariance.
pub fn prepare<T: Scalar>(raw: &Dataset<T>) -> Result<(Dataset<T>, SpectralFactor<T>)> {
    let data = if raw.is_standardized() {
        raw.clone()
    } else {
        standardize(raw)?
    };
    let factor = spectral_decompose(&sample_covariance(&data)?)?;
    Ok((data, factor))
}

/// Fits at the table's `λ_r` and applies the decision rule. `data` must be
/// standardized; no fingerprint check is made here.
pub fn evaluate<T: Scalar>(data: &Dataset<T>, table: &CalibrationTable<T>, r: usize) -> Result<TestOutcome<T>> {
    let entry = table.entry(r)?;
    let design = Design::new(data)?;
    let fit = design.fit(
        effective_lambda(&design, entry.lambda_r),
        None,
        &SolverOptions::default(),
    )?;
    let u_observed = if r >= data.p() { 0 } else { fit.u };
    Ok(TestOutcome {
        r,
        lambda_r: entry.lambda_r,
        u_observed,
        reject: decide(u_observed, r),
        alpha: table.alpha,
        calibration_fingerprint: table.factor_fingerprint,
        fit,
    })
}

/// Runs the full test on a raw dataset. A supplied table is used only if it
/// was calibrated for the same correlation structure; otherwise `λ_r` is
/// calibrated here from the estimated covariance.
pub fn run_global_test<T: Scalar>(
    raw: &Dataset<T>,
    r: usize,
    settings: &CalibrationSettings,
    rng: RngSpec,
    table: Option<&CalibrationTable<T>>,
) -> Result<TestOutcome<T>> {
    let (data, factor) = prepare(raw)?;
    let fp = fingerprint(&factor, data.n());
    let calibrated;
    let table = match table {
        Some(t) => {
            if t.factor_fingerprint != fp {
                return Err(Error::FingerprintMismatch {
                    table: t.factor_fingerprint,
                    data: fp,
                });
            }
            t
        }
        None => {
            calibrated = calibrate(&factor, data.n(), &[r], settings, rng)?;
            &calibrated
        }
    };
    if !table.validated {
        return Err(Error::UnvalidatedTable);
    }
    evaluate(&data, table, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::simulate_null;
    use crate::data::Matrix;

    fn small_settings() -> CalibrationSettings {
        CalibrationSettings {
            alpha: 0.05,
            replicates: 500,
            validation_replicates: 500,
            allow_downgrade: true,
            ..Default::default()
        }
    }

    fn null_raw(n: usize, p: usize, seed: u64) -> Dataset<f64> {
        simulate_null(&SpectralFactor::identity(p), n, RngSpec::new(seed, 99)).unwrap()
    }

    #[test]
    fn decision_rule() {
        assert!(!decide(3, 5));
        assert!(!decide(5, 5));
        assert!(decide(6, 5));
        assert!(decide(1, 0));
        assert!(!decide(0, 0));
    }

    #[test]
    fn fingerprint_properties() {
        let raw = null_raw(20, 30, 1);
        let (_, f1) = prepare(&raw).unwrap();
        let (_, f2) = prepare(&raw).unwrap();
        assert_eq!(fingerprint(&f1, 20), fingerprint(&f2, 20));
        assert_ne!(fingerprint(&f1, 20), fingerprint(&f1, 21));

        let a = SpectralFactor::<f64>::identity(200);
        let b = SpectralFactor::<f64>::identity(199);
        assert_ne!(fingerprint(&a, 40), fingerprint(&b, 40));

        let mut sigma = Matrix::<f64>::identity(5);
        let base = fingerprint(&spectral_decompose(&sigma).unwrap(), 10);
        sigma[(2, 2)] += 1e-3;
        assert_ne!(base, fingerprint(&spectral_decompose(&sigma).unwrap(), 10));
    }

    #[test]
    fn supplied_table_must_match() {
        let raw = null_raw(20, 30, 2);
        let other = null_raw(20, 30, 3);
        let (_, factor) = prepare(&other).unwrap();
        let table = calibrate(&factor, 20, &[0], &small_settings(), RngSpec::new(4, 0)).unwrap();
        let res = run_global_test(&raw, 0, &small_settings(), RngSpec::new(5, 0), Some(&table));
        assert!(matches!(res, Err(Error::FingerprintMismatch { .. })));
        let ok = run_global_test(&other, 0, &small_settings(), RngSpec::new(5, 0), Some(&table)).unwrap();
        assert_eq!(ok.lambda_r, table.entry(0).unwrap().lambda_r);
        assert_eq!(ok.reject, ok.u_observed > 0);
    }

    #[test]
    fn unvalidated_table_is_refused() {
        let raw = null_raw(20, 30, 6);
        let (_, factor) = prepare(&raw).unwrap();
        let mut table = calibrate(&factor, 20, &[0], &small_settings(), RngSpec::new(7, 0)).unwrap();
        table.validated = false;
        let res = run_global_test(&raw, 0, &small_settings(), RngSpec::new(5, 0), Some(&table));
        assert!(matches!(res, Err(Error::UnvalidatedTable)));
    }

    #[test]
    fn u0_shortcut_agrees() {
        let f = SpectralFactor::<f64>::identity(40);
        let table = calibrate(&f, 20, &[0], &small_settings(), RngSpec::new(8, 0)).unwrap();
        let lambda0 = table.entry(0).unwrap().lambda_r;
        for seed in 0..60 {
            let mut raw = null_raw(20, 40, 100 + seed);
            if seed % 2 == 0 {
                // inject signal into half the datasets
                let y: Vec<f64> = raw.y().iter().enumerate().map(|(i, v)| v + 0.8 * raw.x()[(i, 0)]).collect();
                raw = Dataset::new(y, raw.x().clone()).unwrap();
            }
            let data = standardize(&raw).unwrap();
            let out = evaluate(&data, &table, 0).unwrap();
            let any_nonzero = out.fit.beta.iter().any(|b| *b != 0.0);
            let lmax = Design::new(&data).unwrap().lambda_max();
            assert_eq!(out.reject, any_nonzero);
            assert_eq!(out.reject, lambda0 < lmax);
        }
    }

    #[test]
    fn marker_permutation_leaves_decision_unchanged() {
        let raw = null_raw(25, 60, 9);
        let y: Vec<f64> = raw.y().iter().enumerate().map(|(i, v)| v + 0.5 * raw.x()[(i, 3)]).collect();
        let raw = Dataset::new(y, raw.x().clone()).unwrap();
        let (_, factor) = prepare(&raw).unwrap();
        let table = calibrate(&factor, 25, &[0, 2], &small_settings(), RngSpec::new(10, 0)).unwrap();
        let order: Vec<usize> = (0..60).rev().collect();
        let permuted = raw.permute_markers(&order);
        let (_, pf) = prepare(&permuted).unwrap();
        assert_eq!(fingerprint(&pf, 25), table.factor_fingerprint);
        for r in [0, 2] {
            let a = run_global_test(&raw, r, &small_settings(), RngSpec::new(0, 0), Some(&table)).unwrap();
            let b = run_global_test(&permuted, r, &small_settings(), RngSpec::new(0, 0), Some(&table)).unwrap();
            assert_eq!(a.u_observed, b.u_observed);
            assert_eq!(a.reject, b.reject);
        }
    }

    #[test]
    fn outcome_record() {
        let out = TestOutcome {
            r: 5,
            lambda_r: 12.5,
            u_observed: 3,
            reject: false,
            alpha: 0.05,
            calibration_fingerprint: 1,
            fit: LassoFit {
                beta: vec![],
                lambda: 12.5,
                objective: 1.0,
                u: 3,
                iterations: 1,
                converged: true,
            },
        };
        assert_eq!(out.csv_row(), "5,12.5,3,false,0.05");
        assert!(out.summary().contains("do not reject"));
    }
}
