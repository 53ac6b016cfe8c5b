//! Marginal t-tests with Bonferroni and Benjamini–Hochberg global decisions.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};
use crate::tdist::two_sided_p;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTestResult<T> {
    pub t_stats: Vec<T>,
    pub p_values: Vec<T>,
    pub df: usize,
}

impl<T: Scalar> MarginalTestResult<T> {
    pub fn write_csv(&self, mut out: impl std::io::Write) -> Result<()> {
        writeln!(out, "t,p")?;
        for (t, p) in self.t_stats.iter().zip(&self.p_values) {
            writeln!(out, "{t},{p}")?;
        }
        Ok(())
    }
}

/// Simple regression of `y` on each marker (with intercept) and the two-sided
/// t-test of its slope, `df = n − 2`.
pub fn marginal_t_tests<T: Scalar>(data: &Dataset<T>) -> Result<MarginalTestResult<T>> {
    data.require_standardized()?;
    let n = data.n();
    if n < 4 {
        return Err(Error::invalid("marginal t-tests need n >= 4"));
    }
    let df = n - 2;
    let df_t = T::of_usize(df);
    let nf = T::of_usize(n);
    let y = data.y();
    let y_mean = y.iter().copied().sum::<T>() / nf;
    let yc: Vec<T> = y.iter().map(|&v| v - y_mean).collect();
    let syy = dot(&yc, &yc);

    let mut t_stats = Vec::with_capacity(data.p());
    let mut p_values = Vec::with_capacity(data.p());
    for (j, col) in data.x().columns().into_iter().enumerate() {
        let x_mean = col.iter().copied().sum::<T>() / nf;
        let xc: Vec<T> = col.iter().map(|&v| v - x_mean).collect();
        let sxx = dot(&xc, &xc);
        let sxy = dot(&xc, &yc);
        let slope = sxy / sxx;
        let rss = syy - slope * sxy;
        if !(rss > T::epsilon() * T::of(64.0) * syy) {
            return Err(Error::DegenerateFit(j));
        }
        let se = (rss / df_t / sxx).sqrt();
        let t = slope / se;
        t_stats.push(t);
        p_values.push(two_sided_p(t, df_t));
    }
    Ok(MarginalTestResult { t_stats, p_values, df })
}

/// Rejects the global null iff `min p ≤ alpha / m`.
pub fn bonferroni_global<T: Scalar>(p_values: &[T], alpha: T) -> bool {
    let threshold = alpha / T::of_usize(p_values.len());
    p_values.iter().any(|&p| p <= threshold)
}

/// Rejects the global null iff the Benjamini–Hochberg step-up procedure makes
/// at least one discovery: `p_(i) ≤ (i / m) · alpha` for some `i`.
pub fn bh_global<T: Scalar>(p_values: &[T], alpha: T) -> bool {
    let mut sorted = p_values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("p-values are not NaN"));
    let m = T::of_usize(sorted.len());
    sorted
        .iter()
        .enumerate()
        .any(|(i, &p)| p <= T::of_usize(i + 1) / m * alpha)
}
