//! Sparse matrix–vector products and small dense eigenvalue helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};

const PAR_ROWS: usize = 4096;

/// Compressed sparse rows. Row `u` lists the columns `v` with a nonzero
/// entry `M[u][v]`.
#[derive(Clone, Debug)]
pub struct Csr<T> {
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<T>,
}

impl<T> Csr<T>
where
    T: Copy + Zero + std::ops::Mul<Output = T> + std::ops::AddAssign + Send + Sync,
{
    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let row = |u: usize| {
            let mut acc = T::zero();
            for e in self.row_ptr[u]..self.row_ptr[u + 1] {
                acc += self.val[e] * x[self.col[e]];
            }
            acc
        };
        if self.dim() >= PAR_ROWS {
            (0..self.dim()).into_par_iter().map(row).collect()
        } else {
            (0..self.dim()).map(row).collect()
        }
    }

    /// `yᵀ M` as a column vector.
    pub fn vec_mul(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        for u in 0..self.dim() {
            for e in self.row_ptr[u]..self.row_ptr[u + 1] {
                out[self.col[e]] += y[u] * self.val[e];
            }
        }
        out
    }

    pub fn map<S>(&self, f: impl Fn(T) -> S) -> Csr<S> {
        Csr { row_ptr: self.row_ptr.clone(), col: self.col.clone(), val: self.val.iter().map(|&v| f(v)).collect() }
    }
}

impl Csr<f64> {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for u in 0..n {
            for e in self.row_ptr[u]..self.row_ptr[u + 1] {
                m[(u, self.col[e])] += self.val[e];
            }
        }
        m
    }
}

impl Csr<Complex64> {
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for u in 0..n {
            for e in self.row_ptr[u]..self.row_ptr[u + 1] {
                m[(u, self.col[e])] += self.val[e];
            }
        }
        m
    }
}

/// All eigenvalues of a dense complex matrix.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    m.clone().schur().eigenvalues().expect("complex Schur form is triangular").iter().copied().collect()
}

pub fn spectral_radius(m: &DMatrix<Complex64>) -> f64 {
    eigenvalues(m).iter().fold(0.0, |r, l| r.max(l.norm()))
}

/// Right and left eigenvectors for the eigenvalue nearest `mu`, by inverse
/// iteration, with the eigenvalue as the two-sided Rayleigh quotient.
pub struct EigenPair {
    pub value: Complex64,
    pub right: DVector<Complex64>,
    pub left: DVector<Complex64>,
}

pub fn inverse_iteration(m: &DMatrix<Complex64>, mu: Complex64) -> Result<EigenPair> {
    let n = m.nrows();
    let shift = mu + Complex64::new(1e-13, 1e-13) * (1.0 + mu.norm());
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let lu = a.clone().lu();
    let lu_t = a.transpose().lu();
    let solve = |lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>| -> Result<DVector<Complex64>> {
        let mut x = DVector::from_element(n, Complex64::new(1.0, 0.3));
        for _ in 0..8 {
            let y = lu.solve(&x).ok_or(Error::NoConvergence { iterations: 0, residual: f64::INFINITY })?;
            let norm = y.norm();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::NoConvergence { iterations: 0, residual: f64::INFINITY });
            }
            x = y / Complex64::new(norm, 0.0);
        }
        Ok(x)
    };
    let right = solve(&lu)?;
    let left = solve(&lu_t)?;
    let value = left.dot(&(m * &right)) / left.dot(&right);
    let residual = (m * &right - &right * value).norm();
    if residual > 1e-9 * (1.0 + value.norm()) {
        return Err(Error::NoConvergence { iterations: 8, residual });
    }
    Ok(EigenPair { value, right, left })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_eigenvalues() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 1.0, 1.0, 0.0].map(|v| Complex64::new(v, 0.0)),
        );
        let mut ev: Vec<f64> = eigenvalues(&m).iter().map(|l| l.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((ev[1] - phi).abs() < 1e-14);
        let pair = inverse_iteration(&m, Complex64::new(1.6, 0.0)).unwrap();
        assert!((pair.value.re - phi).abs() < 1e-14);
    }

    #[test]
    fn csr_products() {
        let m = Csr { row_ptr: vec![0, 2, 3], col: vec![0, 1, 0], val: vec![1.0, 1.0, 1.0] };
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![2.0, 1.0]);
        assert_eq!(m.vec_mul(&[1.0, 0.0]), vec![1.0, 1.0]);
    }
}
