//! Datasets, standardization, covariance and correlated Gaussian generation.

use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{standard_normal, RngSpec};
use crate::scalar::{dot, Scalar};

/// Column sd below which a marker (or the response) counts as constant.
pub const CONSTANT_SD: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row-major `data`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Columns as contiguous vectors (column-major copy).
    pub fn columns(&self) -> Vec<Vec<T>> {
        let mut cols = vec![Vec::with_capacity(self.rows); self.cols];
        for i in 0..self.rows {
            for (col, &v) in cols.iter_mut().zip(self.row(i)) {
                col.push(v);
            }
        }
        cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Returns a copy with columns reordered so that column `j` of the result
    /// is column `order[j]` of `self`.
    pub fn select_columns(&self, order: &[usize]) -> Self {
        Self::from_fn(self.rows, order.len(), |i, j| self[(i, order[j])])
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Response vector and marker matrix for `n` samples and `p` markers.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    y: Vec<T>,
    x: Matrix<T>,
    marker_names: Vec<String>,
    standardized: bool,
}

impl<T: Scalar> Dataset<T> {
    /// Raw (unstandardized) dataset. Markers are named `x1..xp`.
    pub fn new(y: Vec<T>, x: Matrix<T>) -> Result<Self> {
        let names = (1..=x.cols()).map(|j| format!("x{j}")).collect();
        Self::with_names(y, x, names)
    }

    pub fn with_names(y: Vec<T>, x: Matrix<T>, marker_names: Vec<String>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::invalid(format!(
                "response has {} values but marker matrix has {} rows",
                y.len(),
                x.rows()
            )));
        }
        if y.len() < 3 {
            return Err(Error::invalid(format!("need n >= 3 samples, got {}", y.len())));
        }
        if x.cols() == 0 {
            return Err(Error::invalid("need at least one marker"));
        }
        if marker_names.len() != x.cols() {
            return Err(Error::invalid("one name per marker column required"));
        }
        if y.iter().chain(x.as_slice()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains missing or non-finite values"));
        }
        Ok(Self {
            y,
            x,
            marker_names,
            standardized: false,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn marker_names(&self) -> &[String] {
        &self.marker_names
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub(crate) fn require_standardized(&self) -> Result<()> {
        if self.standardized {
            Ok(())
        } else {
            Err(Error::invalid("dataset must be standardized first"))
        }
    }

    /// Same dataset with marker columns reordered (`order[j]` becomes column `j`).
    pub fn permute_markers(&self, order: &[usize]) -> Self {
        Self {
            y: self.y.clone(),
            x: self.x.select_columns(order),
            marker_names: order.iter().map(|&j| self.marker_names[j].clone()).collect(),
            standardized: self.standardized,
        }
    }

    /// Reads the dataset CSV format: a header whose first column is `y`,
    /// followed by one column per marker, one row per sample.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let header = reader.headers()?.clone();
        if header.get(0) != Some("y") {
            return Err(parse_err("first column must be named `y`".into()));
        }
        let marker_names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let p = marker_names.len();
        let mut y = Vec::new();
        let mut x = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != p + 1 {
                return Err(parse_err(format!(
                    "row {} has {} fields, expected {}",
                    line + 1,
                    record.len(),
                    p + 1
                )));
            }
            for (col, field) in record.iter().enumerate() {
                let value: f64 = field.parse().map_err(|_| {
                    parse_err(format!("row {}, column {}: `{field}` is not a number", line + 1, col + 1))
                })?;
                if col == 0 {
                    y.push(T::of(value));
                } else {
                    x.push(T::of(value));
                }
            }
        }
        let x = Matrix::from_vec(y.len(), p, x)?;
        Self::with_names(y, x, marker_names).map_err(|e| parse_err(e.to_string()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = vec!["y".to_string()];
        header.extend(self.marker_names.iter().cloned());
        writer.write_record(&header)?;
        for i in 0..self.n() {
            let mut row = vec![self.y[i].to_string()];
            row.extend(self.x.row(i).iter().map(|v| v.to_string()));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Sample mean and sample standard deviation (n - 1 divisor).
pub fn mean_sd<T: Scalar>(values: &[T]) -> (T, T) {
    let n = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let ss = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<T>();
    (mean, (ss / (n - T::one())).sqrt())
}

/// Centers every marker column and the response and scales them to unit
/// sample standard deviation (n - 1 divisor).
pub fn standardize<T: Scalar>(raw: &Dataset<T>) -> Result<Dataset<T>> {
    let floor = T::of(CONSTANT_SD);
    let (y_mean, y_sd) = mean_sd(&raw.y);
    if !(y_sd >= floor) {
        return Err(Error::DegenerateResponse);
    }
    let mut x = raw.x.clone();
    for j in 0..raw.p() {
        let (mean, sd) = mean_sd(&raw.x.column(j));
        if !(sd >= floor) {
            return Err(Error::ConstantColumn(j));
        }
        for i in 0..raw.n() {
            x[(i, j)] = (x[(i, j)] - mean) / sd;
        }
    }
    Ok(Dataset {
        y: raw.y.iter().map(|&v| (v - y_mean) / y_sd).collect(),
        x,
        marker_names: raw.marker_names.clone(),
        standardized: true,
    })
}

/// `XᵀX / (n - 1)` for a standardized dataset.
pub fn sample_covariance<T: Scalar>(data: &Dataset<T>) -> Result<Matrix<T>> {
    data.require_standardized()?;
    let p = data.p();
    let scale = T::one() / T::of_usize(data.n() - 1);
    let cols = data.x.columns();
    let mut sigma = Matrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let v = dot(&cols[a], &cols[b]) * scale;
            sigma[(a, b)] = v;
            sigma[(b, a)] = v;
        }
    }
    Ok(sigma)
}

/// Orthogonal `O` and non-negative diagonal `D` with `Σ = O D² Oᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFactor<T> {
    o: Matrix<T>,
    d: Vec<T>,
    source_rank: usize,
    identity: bool,
}

impl<T: Scalar> SpectralFactor<T> {
    pub fn identity(p: usize) -> Self {
        Self {
            o: Matrix::identity(p),
            d: vec![T::one(); p],
            source_rank: p,
            identity: true,
        }
    }

    pub fn p(&self) -> usize {
        self.d.len()
    }

    pub fn o(&self) -> &Matrix<T> {
        &self.o
    }

    pub fn d(&self) -> &[T] {
        &self.d
    }

    /// Eigenvalues of the factored covariance, `d²`, in descending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        self.d.iter().map(|&v| v * v).collect()
    }

    /// Number of eigenvalues above `1e-10` times the largest one.
    pub fn source_rank(&self) -> usize {
        self.source_rank
    }

    /// `O D² Oᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let p = self.p();
        let mut scaled = self.o.clone();
        for i in 0..p {
            for (v, &d) in scaled.row_mut(i).iter_mut().zip(&self.d) {
                *v = *v * d * d;
            }
        }
        scaled.matmul(&self.o.transpose())
    }
}

/// Eigendecomposition of a symmetric covariance matrix, with negative
/// round-off eigenvalues clipped to zero.
pub fn spectral_decompose<T: Scalar>(sigma: &Matrix<T>) -> Result<SpectralFactor<T>> {
    let p = sigma.rows();
    if sigma.cols() != p || p == 0 {
        return Err(Error::invalid("covariance must be a non-empty square matrix"));
    }
    let mut asymmetry = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            asymmetry = asymmetry.max((sigma[(i, j)] - sigma[(j, i)]).abs().as_f64());
            scale = scale.max(sigma[(i, j)].abs().as_f64());
        }
    }
    let tol = 1e-10f64.max(100.0 * T::epsilon().as_f64() * scale);
    if !(asymmetry <= tol) {
        return Err(Error::NotSymmetric { asymmetry });
    }

    let sym = DMatrix::<f64>::from_fn(p, p, |i, j| {
        0.5 * (sigma[(i, j)].as_f64() + sigma[(j, i)].as_f64())
    });
    let eigen = sym
        .try_symmetric_eigen(f64::EPSILON, 10_000 + 100 * p)
        .ok_or(Error::NoConvergence {
            max_iterations: 10_000 + 100 * p,
        })?;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let clipped: Vec<f64> = order.iter().map(|&k| eigen.eigenvalues[k].max(0.0)).collect();
    let top = clipped.first().copied().unwrap_or(0.0);
    let source_rank = clipped.iter().filter(|&&v| v > 1e-10 * top && v > 0.0).count();

    let o = Matrix::from_fn(p, p, |i, k| T::of(eigen.eigenvectors[(i, order[k])]));
    Ok(SpectralFactor {
        o,
        d: clipped.iter().map(|&v| T::of(v.sqrt())).collect(),
        source_rank,
        identity: false,
    })
}

/// Draws `n` rows `O D Z_i` with `Z_i` iid standard normal vectors.
pub fn correlated_normals<T: Scalar>(factor: &SpectralFactor<T>, n: usize, rng: RngSpec) -> Matrix<T> {
    correlated_normals_with(factor, n, &mut rng.generator())
}

pub(crate) fn correlated_normals_with<T: Scalar, R: Rng + ?Sized>(
    factor: &SpectralFactor<T>,
    n: usize,
    rng: &mut R,
) -> Matrix<T> {
    let p = factor.p();
    let mut out = Matrix::zeros(n, p);
    let active: Vec<usize> = (0..p).filter(|&k| factor.d[k] > T::zero()).collect();
    let mut w = vec![T::zero(); p];
    for i in 0..n {
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = factor.d[k] * standard_normal::<T, _>(rng);
        }
        let row = out.row_mut(i);
        if factor.identity {
            row.copy_from_slice(&w);
            continue;
        }
        for (j, x) in row.iter_mut().enumerate() {
            let o_row = factor.o.row(j);
            *x = active.iter().fold(T::zero(), |acc, &k| acc + o_row[k] * w[k]);
        }
    }
    out
}
