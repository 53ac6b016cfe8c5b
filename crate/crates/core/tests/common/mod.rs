//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `ln Γ(k/2)` for a positive integer `k`, by the recurrence
/// `Γ(z + 1) = z Γ(z)` from `Γ(1) = 1` and `Γ(1/2) = √π`.
pub fn ln_gamma_half(k: u32) -> f64 {
    assert!(k > 0);
    if k % 2 == 0 {
        (1..k / 2).map(|i| (i as f64).ln()).sum()
    } else {
        0.5 * PI.ln() + (0..(k - 1) / 2).map(|i| (i as f64 + 0.5).ln()).sum::<f64>()
    }
}

pub fn t_density(t: f64, df: u32) -> f64 {
    let v = df as f64;
    let log_c = ln_gamma_half(df + 1) - ln_gamma_half(df) - 0.5 * (v * PI).ln();
    (log_c - 0.5 * (v + 1.0) * (1.0 + t * t / v).ln()).exp()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Student t CDF by integrating the density from 0.
pub fn t_cdf_oracle(x: f64, df: u32) -> f64 {
    let half = integrate(&|t| t_density(t, df), 0.0, x.abs(), 1e-13);
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// LASSO objective `‖y − Xβ‖² + λ‖β‖₁` with `x` given column by column.
pub fn lasso_objective(cols: &[Vec<f64>], y: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let mut rss = 0.0;
    for i in 0..y.len() {
        let fitted: f64 = cols.iter().zip(beta).map(|(c, b)| c[i] * b).sum();
        rss += (y[i] - fitted).powi(2);
    }
    rss + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Minimum of the LASSO objective over the lattice `center + step·k`,
/// `|k| ≤ half_width`, in every coordinate.
pub fn lattice_min(cols: &[Vec<f64>], y: &[f64], lambda: f64, center: &[f64], step: f64, half_width: i64) -> (f64, Vec<f64>) {
    let p = cols.len();
    let side = 2 * half_width + 1;
    let total = side.pow(p as u32);
    let mut best = (f64::INFINITY, center.to_vec());
    let mut beta = vec![0.0; p];
    for idx in 0..total {
        let mut rest = idx;
        for j in 0..p {
            beta[j] = center[j] + step * ((rest % side) - half_width) as f64;
            rest /= side;
        }
        if beta.iter().any(|b| b.abs() > 3.0 + 1e-12) {
            continue;
        }
        let obj = lasso_objective(cols, y, &beta, lambda);
        if obj < best.0 {
            best = (obj, beta.clone());
        }
    }
    best
}

/// Grid search over `[−3, 3]^p` at step `1e-3`, coarse to fine. The
/// objective is convex, so each level only needs to search around the
/// previous level's minimizer.
pub fn grid_oracle(cols: &[Vec<f64>], y: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let p = cols.len();
    let (_, coarse) = lattice_min(cols, y, lambda, &vec![0.0; p], 0.1, 30);
    let (_, mid) = lattice_min(cols, y, lambda, &coarse, 0.01, 20);
    lattice_min(cols, y, lambda, &mid, 0.001, 20)
}

/// `2 · max_j |x_jᵀ y|`.
pub fn max_correlation_statistic(cols: &[Vec<f64>], y: &[f64]) -> f64 {
    cols.iter()
        .map(|c| c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
        * 2.0
}

/// Order statistic of rank `⌈q (m + 1)⌉` (1-based).
pub fn upper_order_statistic(mut values: Vec<f64>, q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let rank = (q * (values.len() + 1) as f64 - 1e-9).ceil() as usize;
    values[rank - 1]
}
