//! Coordinate-descent solver for `‖y − Xβ‖₂² + λ‖β‖₁`.
//!
//! The functional carries no `1/(2n)` factor, so a λ here equals `2n` times
//! the λ of glmnet-style `1/(2n)‖y − Xβ‖₂² + λ‖β‖₁` parameterizations.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Grid length used for entry-threshold scans.
pub const GRID_LEN: usize = 200;
/// Smallest grid value as a fraction of `lambda_max`.
pub const GRID_MIN_RATIO: f64 = 1e-3;
/// Bisection steps used to refine a grid bracket.
pub const REFINE_STEPS: usize = 16;
/// Step ratio of the continuation path used for cold starts at small λ.
const CONTINUATION_RATIO: f64 = 0.7;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub tol: T,
    /// Tolerance of the KKT certificate checked before returning.
    pub kkt_tol: T,
    pub max_sweeps: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        let eps = T::epsilon().as_f64();
        Self {
            tol: T::of(1e-8f64.max(100.0 * eps)),
            kkt_tol: T::of(1e-6f64.max(1e4 * eps)),
            max_sweeps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit<T> {
    pub beta: Vec<T>,
    pub lambda: T,
    pub objective: T,
    /// Number of coefficients that are exactly non-zero.
    pub u: usize,
    /// Full coordinate-descent sweeps performed.
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> LassoFit<T> {
    pub const CSV_HEADER: &'static str = "lambda,u,objective,converged";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.lambda, self.u, self.objective, self.converged)
    }
}

/// `sign(z) · max(|z| − gamma, 0)`.
#[inline]
pub fn soft_threshold<T: Scalar>(z: T, gamma: T) -> T {
    debug_assert!(gamma >= T::zero());
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        T::zero()
    }
}

/// Column-major copy of a standardized dataset prepared for repeated fits.
#[derive(Debug, Clone)]
pub struct Design<T> {
    cols: Vec<Vec<T>>,
    sq_norms: Vec<T>,
    y: Vec<T>,
}

impl<T: Scalar> Design<T> {
    pub fn new(data: &Dataset<T>) -> Result<Self> {
        data.require_standardized()?;
        Ok(Self::from_columns(data.x().columns(), data.y().to_vec()))
    }

    /// Design from arbitrary marker columns. Nothing is standardized.
    pub fn from_columns(cols: Vec<Vec<T>>, y: Vec<T>) -> Self {
        let sq_norms = cols.iter().map(|c| dot(c, c)).collect();
        Self { cols, sq_norms, y }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.cols[j]
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    /// `2 · max_j |x_jᵀ y|`, the smallest λ whose solution is all zeros.
    pub fn lambda_max(&self) -> T {
        let two = T::of(2.0);
        self.cols
            .iter()
            .map(|c| dot(c, &self.y).abs())
            .fold(T::zero(), T::max)
            * two
    }

    pub fn residual(&self, beta: &[T]) -> Vec<T> {
        let mut r = self.y.clone();
        for (col, &b) in self.cols.iter().zip(beta) {
            if b != T::zero() {
                for (ri, &x) in r.iter_mut().zip(col) {
                    *ri = *ri - x * b;
                }
            }
        }
        r
    }

    pub fn objective(&self, beta: &[T], lambda: T) -> T {
        let r = self.residual(beta);
        dot(&r, &r) + lambda * beta.iter().map(|b| b.abs()).sum::<T>()
    }

    /// Largest violation of the LASSO optimality conditions at `beta`.
    pub fn kkt_violation(&self, beta: &[T], lambda: T) -> T {
        let r = self.residual(beta);
        self.kkt_violation_with(beta, lambda, &r)
    }

    fn kkt_violation_with(&self, beta: &[T], lambda: T, residual: &[T]) -> T {
        let two = T::of(2.0);
        self.cols
            .iter()
            .zip(beta)
            .map(|(col, &b)| {
                let g = two * dot(col, residual);
                if b > T::zero() {
                    (g - lambda).abs()
                } else if b < T::zero() {
                    (g + lambda).abs()
                } else {
                    (g.abs() - lambda).max(T::zero())
                }
            })
            .fold(T::zero(), T::max)
    }

    pub fn fit(&self, lambda: T, warm_start: Option<&[T]>, opts: &SolverOptions<T>) -> Result<LassoFit<T>> {
        self.check_lambda(lambda)?;
        match warm_start {
            Some(b) => self.solve(lambda, Some(b), opts),
            None if lambda > T::zero() && lambda < self.lambda_max() * T::of(CONTINUATION_RATIO) => {
                let zeros = vec![T::zero(); self.p()];
                self.fit_continued(lambda, &zeros, self.lambda_max(), opts)
            }
            None => self.solve(lambda, None, opts),
        }
    }

    fn check_lambda(&self, lambda: T) -> Result<()> {
        if !(lambda >= T::zero()) {
            return Err(Error::invalid(format!("lambda must be non-negative, got {lambda}")));
        }
        if lambda == T::zero() && self.p() >= self.n() {
            return Err(Error::UnderdeterminedUnpenalized {
                n: self.n(),
                p: self.p(),
            });
        }
        Ok(())
    }

    /// Fit at `lambda` starting from the solution `warm` at `warm_lambda`.
    /// Large drops in λ are bridged by approximate solutions along
    /// `warm_lambda · ratio^k`; a single warm start far above `lambda`
    /// can take very long to converge when `p > n`.
    pub fn fit_continued(&self, lambda: T, warm: &[T], warm_lambda: T, opts: &SolverOptions<T>) -> Result<LassoFit<T>> {
        self.check_lambda(lambda)?;
        let ratio = T::of(CONTINUATION_RATIO);
        let loose = SolverOptions {
            tol: opts.tol * T::of(1e3),
            kkt_tol: opts.kkt_tol * T::of(1e3),
            max_sweeps: opts.max_sweeps,
        };
        let mut beta = warm.to_vec();
        let mut step = warm_lambda * ratio;
        while lambda > T::zero() && step > lambda {
            let mut cd = CoordinateDescent::new(self, step, Some(&beta))?;
            cd.run(&loose)?;
            beta = cd.beta;
            step = step * ratio;
        }
        self.solve(lambda, Some(&beta), opts)
    }

    fn solve(&self, lambda: T, start: Option<&[T]>, opts: &SolverOptions<T>) -> Result<LassoFit<T>> {
        let mut cd = CoordinateDescent::new(self, lambda, start)?;
        cd.run(opts)?;
        Ok(cd.into_fit())
    }
}

/// Mutable solver state for one λ.
pub(crate) struct CoordinateDescent<'d, T> {
    design: &'d Design<T>,
    half_lambda: T,
    lambda: T,
    beta: Vec<T>,
    residual: Vec<T>,
    sweeps: usize,
}

impl<'d, T: Scalar> CoordinateDescent<'d, T> {
    pub(crate) fn new(design: &'d Design<T>, lambda: T, warm_start: Option<&[T]>) -> Result<Self> {
        let beta = match warm_start {
            Some(b) if b.len() != design.p() => {
                return Err(Error::invalid("warm start has the wrong length"));
            }
            Some(b) => b.to_vec(),
            None => vec![T::zero(); design.p()],
        };
        let residual = design.residual(&beta);
        Ok(Self {
            design,
            half_lambda: lambda / T::of(2.0),
            lambda,
            beta,
            residual,
            sweeps: 0,
        })
    }

    /// One pass of exact coordinate minimization; returns the largest change.
    pub(crate) fn sweep(&mut self, active_only: bool) -> T {
        let mut max_change = T::zero();
        for j in 0..self.design.p() {
            let old = self.beta[j];
            if active_only && old == T::zero() {
                continue;
            }
            let norm = self.design.sq_norms[j];
            if norm == T::zero() {
                continue;
            }
            let col = &self.design.cols[j];
            let z = dot(col, &self.residual) + norm * old;
            let new = soft_threshold(z, self.half_lambda) / norm;
            let delta = new - old;
            if delta != T::zero() {
                for (r, &x) in self.residual.iter_mut().zip(col) {
                    *r = *r - x * delta;
                }
                self.beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    }

    #[cfg(test)]
    pub(crate) fn objective(&self) -> T {
        self.design.objective(&self.beta, self.lambda)
    }

    /// Alternates full sweeps with passes over the non-zero coefficients
    /// until a full sweep moves no coefficient by `tol` or more and the KKT
    /// certificate holds. Only full sweeps count against `max_sweeps`.
    pub(crate) fn run(&mut self, opts: &SolverOptions<T>) -> Result<()> {
        let active_limit = opts.max_sweeps.saturating_mul(100);
        let mut active_passes = 0usize;
        loop {
            if self.sweeps >= opts.max_sweeps || active_passes >= active_limit {
                return Err(Error::NoConvergence {
                    max_iterations: opts.max_sweeps,
                });
            }
            self.sweeps += 1;
            if self.sweep(false) < opts.tol {
                // refresh the incrementally updated residual before certifying
                self.residual = self.design.residual(&self.beta);
                let violation = self
                    .design
                    .kkt_violation_with(&self.beta, self.lambda, &self.residual);
                if violation <= opts.kkt_tol {
                    return Ok(());
                }
                continue;
            }
            while active_passes < active_limit {
                active_passes += 1;
                if self.sweep(true) < opts.tol {
                    break;
                }
            }
        }
    }

    pub(crate) fn into_fit(self) -> LassoFit<T> {
        let objective = self.design.objective(&self.beta, self.lambda);
        let u = self.beta.iter().filter(|&&b| b != T::zero()).count();
        LassoFit {
            beta: self.beta,
            lambda: self.lambda,
            objective,
            u,
            iterations: self.sweeps,
            converged: true,
        }
    }
}

/// Fits the LASSO on a standardized dataset with default solver options.
pub fn fit_lasso<T: Scalar>(data: &Dataset<T>, lambda: T, warm_start: Option<&[T]>) -> Result<LassoFit<T>> {
    Design::new(data)?.fit(lambda, warm_start, &SolverOptions::default())
}

/// `2 · max_j |x_jᵀ y|` on a standardized dataset.
pub fn lambda_max<T: Scalar>(data: &Dataset<T>) -> Result<T> {
    Ok(Design::new(data)?.lambda_max())
}

/// `len` log-spaced values from `lambda_max` down to `lambda_max · min_ratio`.
pub fn lambda_grid<T: Scalar>(lambda_max: T, len: usize, min_ratio: f64) -> Vec<T> {
    if len == 1 {
        return vec![lambda_max];
    }
    let step = min_ratio.ln() / (len - 1) as f64;
    (0..len)
        .map(|i| {
            if i == 0 {
                lambda_max
            } else {
                lambda_max * T::of((step * i as f64).exp())
            }
        })
        .collect()
}

/// Entry thresholds λ̃_r for several `r` from a single descending path.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdScan<T> {
    pub r_values: Vec<usize>,
    /// λ̃_r: largest λ on the scanned path with `u(λ) > r`, or 0.
    pub thresholds: Vec<T>,
    /// Set when `u(λ) ≤ r` was observed at some scanned λ below λ̃_r.
    pub nonmonotone: Vec<bool>,
    pub fits: usize,
}

/// Walks `grid` (descending) with warm starts until every `r` has been
/// exceeded. With `refine`, each first-exceedance bracket is narrowed by
/// bisection in log λ, so λ̃_r is located well inside one grid step.
pub fn scan_entry_thresholds<T: Scalar>(
    design: &Design<T>,
    r_values: &[usize],
    grid: &[T],
    refine: bool,
    opts: &SolverOptions<T>,
) -> Result<ThresholdScan<T>> {
    let k = r_values.len();
    let mut scan = ThresholdScan {
        r_values: r_values.to_vec(),
        thresholds: vec![T::zero(); k],
        nonmonotone: vec![false; k],
        fits: 0,
    };
    // first grid index with u > r, and the solution there
    let mut hit: Vec<Option<(usize, Vec<T>)>> = vec![None; k];
    let reachable = |r: usize| r < design.p();
    let mut pending = r_values.iter().filter(|&&r| reachable(r)).count();

    let mut beta: Option<Vec<T>> = None;
    for (i, &lambda) in grid.iter().enumerate() {
        if pending == 0 {
            break;
        }
        if lambda <= T::zero() {
            break;
        }
        let fit = design.fit(lambda, beta.as_deref(), opts)?;
        scan.fits += 1;
        for (slot, &r) in r_values.iter().enumerate() {
            match hit[slot] {
                None if reachable(r) && fit.u > r => {
                    hit[slot] = Some((i, fit.beta.clone()));
                    pending -= 1;
                }
                Some(_) if fit.u <= r => scan.nonmonotone[slot] = true,
                _ => {}
            }
        }
        beta = Some(fit.beta);
    }

    for (slot, &r) in r_values.iter().enumerate() {
        let Some((i, beta_lo)) = &hit[slot] else {
            continue;
        };
        let mut lo = grid[*i];
        if refine && *i > 0 {
            let mut hi = grid[*i - 1];
            let mut warm = beta_lo.clone();
            for _ in 0..REFINE_STEPS {
                let mid = (lo * hi).sqrt();
                if !(mid > lo && mid < hi) {
                    break;
                }
                let fit = design.fit(mid, Some(&warm), opts)?;
                scan.fits += 1;
                if fit.u > r {
                    lo = mid;
                    warm = fit.beta;
                } else {
                    hi = mid;
                }
            }
        }
        scan.thresholds[slot] = lo;
    }
    Ok(scan)
}

/// λ̃_r: the largest value of `grid` (descending) at which the fit has more
/// than `r` non-zero coefficients, or 0 if there is none.
pub fn entry_threshold<T: Scalar>(data: &Dataset<T>, r: usize, grid: &[T]) -> Result<T> {
    let design = Design::new(data)?;
    let scan = scan_entry_thresholds(&design, &[r], grid, false, &SolverOptions::default())?;
    Ok(scan.thresholds[0])
}

/// Non-zero counts at each λ in `lambdas`, fitted in descending order with
/// warm starts. Returned in the order of `lambdas`.
pub fn counts_at<T: Scalar>(design: &Design<T>, lambdas: &[T], opts: &SolverOptions<T>) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].partial_cmp(&lambdas[a]).expect("finite lambda"));
    let mut counts = vec![0; lambdas.len()];
    let mut prev: Option<(Vec<T>, T)> = None;
    for idx in order {
        let lambda = lambdas[idx];
        let fit = match &prev {
            Some((beta, from)) => design.fit_continued(lambda, beta, *from, opts)?,
            None => design.fit(lambda, None, opts)?,
        };
        counts[idx] = fit.u;
        prev = Some((fit.beta, lambda));
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{standardize, Matrix};
    use crate::rng::{standard_normals, RngSpec};

    fn null_dataset(n: usize, p: usize, seed: u64) -> Dataset<f64> {
        let mut rng = RngSpec::new(seed, 0).generator();
        let y = standard_normals(&mut rng, n);
        let x = Matrix::from_vec(n, p, standard_normals(&mut rng, n * p)).unwrap();
        standardize(&Dataset::new(y, x).unwrap()).unwrap()
    }

    #[test]
    fn soft_threshold_values() {
        assert_eq!(soft_threshold(2.0, 1.0), 1.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(1.0, 1.0), 0.0);
    }

    #[test]
    fn above_lambda_max_everything_is_zero() {
        let d = null_dataset(40, 200, 1);
        let lmax = lambda_max(&d).unwrap();
        let fit = fit_lasso(&d, lmax, None).unwrap();
        assert_eq!(fit.u, 0);
        let yy: f64 = d.y().iter().map(|v| v * v).sum();
        assert!((fit.objective - yy).abs() < 1e-12);
        assert_eq!(fit_lasso(&d, lmax * 1.001, None).unwrap().u, 0);
        assert!(fit_lasso(&d, lmax * 0.99, None).unwrap().u >= 1);
        assert!(fit_lasso(&d, lmax * 0.999, None).unwrap().u >= 1);
    }

    #[test]
    fn lambda_max_formula() {
        // y orthogonal to every column
        let x = Matrix::from_rows(&[vec![1.0, 1.0], vec![-1.0, 1.0], vec![0.0, -2.0], vec![0.0, 0.0]]).unwrap();
        let design = Design::from_columns(x.columns(), vec![1.0, 1.0, 1.0, -3.0]);
        assert_eq!(design.lambda_max(), 0.0);
        let design = Design::from_columns(vec![vec![1.0, 0.5, 0.0]], vec![1.0, 1.0, 7.0]);
        assert_eq!(design.lambda_max(), 3.0);
    }

    #[test]
    fn unpenalized_needs_p_below_n() {
        let d = null_dataset(5, 8, 2);
        assert!(matches!(
            fit_lasso(&d, 0.0, None),
            Err(Error::UnderdeterminedUnpenalized { n: 5, p: 8 })
        ));
        let d = null_dataset(12, 3, 2);
        let fit = fit_lasso(&d, 0.0, None).unwrap();
        assert_eq!(fit.u, 3);
        assert!(fit_lasso(&d, -1.0, None).is_err());
    }

    #[test]
    fn objective_never_increases_across_sweeps() {
        let d = null_dataset(40, 200, 3);
        let design = Design::new(&d).unwrap();
        let lambda = design.lambda_max() * 0.2;
        let mut cd = CoordinateDescent::new(&design, lambda, None).unwrap();
        let mut last = cd.objective();
        for i in 0..200 {
            let change = cd.sweep(i % 3 != 0);
            let obj = cd.objective();
            assert!(obj <= last + 1e-12 * last.abs(), "sweep {i}: {obj} > {last}");
            last = obj;
            if change == 0.0 {
                break;
            }
        }
    }

    #[test]
    fn fits_are_kkt_certified() {
        let d = null_dataset(40, 200, 4);
        let design = Design::new(&d).unwrap();
        for frac in [0.9, 0.5, 0.2, 0.05, 0.01] {
            let lambda = design.lambda_max() * frac;
            let fit = design.fit(lambda, None, &SolverOptions::default()).unwrap();
            assert!(fit.converged);
            assert!(design.kkt_violation(&fit.beta, lambda) <= 1e-6);
            let recomputed = design.objective(&fit.beta, lambda);
            assert!((fit.objective - recomputed).abs() <= 1e-9 * recomputed);
            assert_eq!(fit.u, fit.beta.iter().filter(|b| **b != 0.0).count());
        }
    }

    #[test]
    fn warm_start_does_not_change_solution() {
        let d = null_dataset(40, 200, 5);
        let design = Design::new(&d).unwrap();
        let opts = SolverOptions::default();
        let lmax = design.lambda_max();
        let warm = design.fit(lmax * 0.4, None, &opts).unwrap();
        let cold = design.fit(lmax * 0.3, None, &opts).unwrap();
        let hot = design.fit(lmax * 0.3, Some(&warm.beta), &opts).unwrap();
        assert!((cold.objective - hot.objective).abs() <= 1e-8 * cold.objective);
        assert_eq!(cold.u, hot.u);
    }

    #[test]
    fn continued_fit_bridges_large_drops() {
        for seed in 0..20 {
            let d = null_dataset(20, 40, seed);
            let design = Design::new(&d).unwrap();
            let opts = SolverOptions::default();
            let lmax = design.lambda_max();
            let high = design.fit(lmax * 0.3, None, &opts).unwrap();
            let low = lmax * GRID_MIN_RATIO;
            let cold = design.fit(low, None, &opts).unwrap();
            let down = design.fit_continued(low, &high.beta, lmax * 0.3, &opts).unwrap();
            assert!((cold.objective - down.objective).abs() <= 1e-8 * cold.objective);
            assert!(design.kkt_violation(&down.beta, low) <= 1e-6);
        }
        let d = null_dataset(20, 10, 1);
        let design = Design::new(&d).unwrap();
        let start = design.fit(1.0, None, &SolverOptions::default()).unwrap();
        let ols = design.fit_continued(0.0, &start.beta, 1.0, &SolverOptions::default()).unwrap();
        assert_eq!(ols.u, 10);
    }

    #[test]
    fn grid_shape() {
        let g = lambda_grid(10.0f64, GRID_LEN, GRID_MIN_RATIO);
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 10.0);
        assert!((g[199] - 0.01).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn entry_threshold_edges() {
        let d = null_dataset(40, 200, 6);
        let lmax = lambda_max(&d).unwrap();
        let grid = lambda_grid(lmax, GRID_LEN, GRID_MIN_RATIO);
        let t0 = entry_threshold(&d, 0, &grid).unwrap();
        assert_eq!(t0, grid[1]);
        assert_eq!(entry_threshold(&d, 200, &grid).unwrap(), 0.0);
        let t1 = entry_threshold(&d, 1, &grid).unwrap();
        assert!(t1 <= t0);
    }

    #[test]
    fn refined_thresholds_bracket_grid_values() {
        let d = null_dataset(40, 200, 7);
        let design = Design::new(&d).unwrap();
        let lmax = design.lambda_max();
        let grid = lambda_grid(lmax, GRID_LEN, GRID_MIN_RATIO);
        let opts = SolverOptions::default();
        let rs = [0, 1, 2, 5, 10, 20];
        let coarse = scan_entry_thresholds(&design, &rs, &grid, false, &opts).unwrap();
        let fine = scan_entry_thresholds(&design, &rs, &grid, true, &opts).unwrap();
        let step = grid[0] / grid[1];
        for s in 0..rs.len() {
            assert!(fine.thresholds[s] >= coarse.thresholds[s]);
            assert!(fine.thresholds[s] <= coarse.thresholds[s] * step);
            let fit = design.fit(fine.thresholds[s], None, &opts).unwrap();
            assert!(fit.u > rs[s]);
        }
        assert!((fine.thresholds[0] - lmax).abs() < 1e-5 * lmax);
        assert!(fine.thresholds.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn counts_follow_input_order() {
        let d = null_dataset(30, 60, 8);
        let design = Design::new(&d).unwrap();
        let lmax = design.lambda_max();
        let lambdas = [lmax * 0.3, lmax * 1.1, lmax * 0.6];
        let counts = counts_at(&design, &lambdas, &SolverOptions::default()).unwrap();
        assert_eq!(counts[1], 0);
        for (&l, &c) in lambdas.iter().zip(&counts) {
            assert_eq!(design.fit(l, None, &SolverOptions::default()).unwrap().u, c);
        }
    }

    #[test]
    fn single_precision_solver() {
        let d = null_dataset(20, 30, 9);
        let y: Vec<f32> = d.y().iter().map(|&v| v as f32).collect();
        let x = Matrix::from_fn(20, 30, |i, j| d.x()[(i, j)] as f32);
        let d32 = standardize(&Dataset::new(y, x).unwrap()).unwrap();
        let design = Design::new(&d32).unwrap();
        let lambda = design.lambda_max() * 0.3;
        let fit = design.fit(lambda, None, &SolverOptions::default()).unwrap();
        assert!(fit.u >= 1);
        let fit64 = fit_lasso(&d, lambda as f64, None).unwrap();
        assert!((fit.objective as f64 - fit64.objective).abs() < 1e-3 * fit64.objective);
    }

    #[test]
    fn fit_csv_row() {
        let fit = LassoFit {
            beta: vec![0.0, 1.5],
            lambda: 2.5,
            objective: 3.25,
            u: 1,
            iterations: 4,
            converged: true,
        };
        assert_eq!(fit.csv_row(), "2.5,1,3.25,true");
    }
}
