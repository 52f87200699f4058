//! Dense row-major matrices over the two scalar layers, exact rank and SVD.

use nalgebra::{DMatrix, SVD};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{ExactComplex, FloatComplex, GaussInt};

/// Iteration cap handed to the SVD kernel.
pub const SVD_MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type ExactMatrix = Matrix<ExactComplex>;
pub type FloatMatrix = Matrix<FloatComplex>;

impl<T> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T: Clone> Matrix<T> {
    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn column(&self, col: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, col).clone()).collect()
    }

    /// Horizontal concatenation.
    pub fn hstack(blocks: &[Matrix<T>]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::DimMismatch("hstack of no blocks".into()));
        };
        let rows = first.rows;
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::DimMismatch("hstack blocks differ in row count".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for b in blocks {
                data.extend_from_slice(b.row(i));
            }
        }
        Ok(Matrix { rows, cols, data })
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

impl ExactMatrix {
    pub fn matmul(&self, rhs: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = ExactComplex::zero();
            for l in 0..self.cols {
                acc = &acc + &(self.get(i, l) * rhs.get(l, j));
            }
            acc
        }))
    }

    pub fn scale(&self, c: &ExactComplex) -> ExactMatrix {
        self.map(|z| z * c)
    }
}

impl FloatMatrix {
    pub fn matmul(&self, rhs: &FloatMatrix) -> Result<FloatMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|l| self.get(i, l) * rhs.get(l, j)).sum()
        }))
    }

    pub fn mul_vec(&self, v: &[FloatComplex]) -> Vec<FloatComplex> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn adjoint(&self) -> FloatMatrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `A* A - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let gram = self.adjoint().matmul(self).expect("A* A is always conformable");
        let mut worst = 0.0f64;
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram.get(i, j) - FloatComplex::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn to_nalgebra(&self) -> DMatrix<FloatComplex> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<FloatComplex>) -> FloatMatrix {
        Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// Entrywise conversion of an exact matrix to binary64, with the worst
/// relative rounding error seen.
#[derive(Clone, Debug)]
pub struct FloatImage {
    pub matrix: FloatMatrix,
    pub max_relative_error: f64,
}

pub fn to_float(m: &ExactMatrix) -> Result<FloatImage> {
    let mut worst = 0.0f64;
    let mut data = Vec::with_capacity(m.data.len());
    for z in &m.data {
        let (f, err) = z.to_float()?;
        worst = worst.max(err);
        data.push(f);
    }
    Ok(FloatImage { matrix: Matrix { rows: m.rows, cols: m.cols, data }, max_relative_error: worst })
}

fn lcm_of_denominators(row: &[ExactComplex]) -> BigInt {
    row.iter()
        .flat_map(|z| [z.re.denom(), z.im.denom()])
        .fold(BigInt::one(), |acc, d| acc.lcm(d))
}

/// Rank over the complex field by fraction-free (Bareiss) elimination.
///
/// Rows are first scaled to Gaussian integers; every intermediate entry is then
/// a minor of the scaled matrix, so each division by the previous pivot is exact.
pub fn exact_rank(m: &ExactMatrix) -> usize {
    let (rows, cols) = (m.rows, m.cols);
    if rows == 0 || cols == 0 {
        return 0;
    }
    let mut a: Vec<Vec<GaussInt>> = (0..rows)
        .map(|i| {
            let row = m.row(i);
            let scale = lcm_of_denominators(row);
            row.iter()
                .map(|z| GaussInt {
                    re: (&z.re * &scale).to_integer(),
                    im: (&z.im * &scale).to_integer(),
                })
                .collect()
        })
        .collect();

    let mut prev = GaussInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        // smallest pivot keeps intermediate growth down
        let pivot = (rank..rows)
            .filter(|&i| !a[i][col].is_zero())
            .min_by_key(|&i| a[i][col].magnitude_bits());
        let Some(p) = pivot else { continue };
        a.swap(rank, p);
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            let lead = row[col].clone();
            for j in col + 1..cols {
                let v = pivot_row[col].mul(&row[j]).sub(&lead.mul(&pivot_row[j]));
                row[j] = v.div_exact(&prev);
            }
            row[col] = GaussInt { re: BigInt::zero(), im: BigInt::zero() };
        }
        prev = pivot_row[col].clone();
        rank += 1;
    }
    rank
}

/// Thin SVD `m = u · diag(sigma) · v` with `sigma` descending.
///
/// `u` is `rows × p`, `v` is `p × cols` with `p = min(rows, cols)`; the
/// columns of `u` and the rows of `v` are orthonormal.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: FloatMatrix,
    pub sigma: Vec<f64>,
    pub v: FloatMatrix,
}

impl Svd {
    /// Singular values strictly above `max(rows, cols) · ε · σ_max`.
    pub fn numerical_rank(&self) -> usize {
        let threshold = self.zero_threshold();
        self.sigma.iter().filter(|&&s| s > threshold).count()
    }

    pub fn zero_threshold(&self) -> f64 {
        let dim = self.u.rows().max(self.v.cols()) as f64;
        let top = self.sigma.first().copied().unwrap_or(0.0);
        dim * f64::EPSILON * top
    }

    pub fn reconstruct(&self) -> FloatMatrix {
        let scaled = Matrix::from_fn(self.u.rows(), self.u.cols(), |i, j| {
            self.u.get(i, j) * self.sigma[j]
        });
        scaled.matmul(&self.v).expect("factor shapes agree")
    }
}

pub fn svd(m: &FloatMatrix) -> Result<Svd> {
    svd_with_cap(m, SVD_MAX_ITERATIONS)
}

pub fn svd_with_cap(m: &FloatMatrix, max_iterations: usize) -> Result<Svd> {
    if !m.is_finite() {
        return Err(Error::Overflow("matrix has non-finite entries".into()));
    }
    if m.rows == 0 || m.cols == 0 {
        return Err(Error::DimMismatch("SVD of an empty matrix".into()));
    }
    let dec = SVD::try_new(m.to_nalgebra(), true, true, f64::EPSILON, max_iterations)
        .ok_or(Error::ConvergenceFailure(max_iterations))?;
    let u = dec.u.as_ref().expect("u requested");
    let v_t = dec.v_t.as_ref().expect("v requested");
    Ok(Svd {
        u: FloatMatrix::from_nalgebra(u),
        sigma: dec.singular_values.iter().copied().collect(),
        v: FloatMatrix::from_nalgebra(v_t),
    })
}
