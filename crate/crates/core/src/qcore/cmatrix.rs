//! Dense complex matrices over small Hilbert spaces.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

/// Dense complex matrix with row-major accessors.
///
/// Backed by `nalgebra::DMatrix<Complex64>`; the wrapper pins the predicates
/// and tolerances the rest of the crate relies on.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    mat: DMatrix<Complex64>,
}

impl CMatrix {
    pub fn from_dmatrix(mat: DMatrix<Complex64>) -> Self {
        Self { mat }
    }

    /// Build from entries listed row by row.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        assert_eq!(rows * cols, entries.len(), "entry count must be rows*cols");
        Self {
            mat: DMatrix::from_row_slice(rows, cols, entries),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self {
            mat: DMatrix::from_fn(rows, cols, f),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            mat: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { Complex64::ZERO })
    }

    /// Rank-one matrix |u⟩⟨v| from two column vectors.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose(),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            mat: self.mat.map(|z| z.conj()),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            mat: self.mat.map(|z| z * s),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Kronecker product; dimensions multiply, `self` owns the slow index.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.rows(), other.rows());
        assert_eq!(self.cols(), other.cols());
        (&self.mat - &other.mat)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let svd = SVD::new(self.mat.clone(), false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.unitarity_residual() <= tol
    }

    pub fn unitarity_residual(&self) -> f64 {
        let prod = self * &self.dagger();
        prod.max_abs_diff(&Self::identity(self.rows()))
    }

    /// Positive semidefinite within `tol`: Hermitian and eigenvalues ≥ −tol.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol.max(1e-9)) {
            return false;
        }
        self.herm_eigenvalues().into_iter().all(|e| e >= -tol)
    }

    /// Eigenvalues of a Hermitian matrix, ascending. The caller is expected
    /// to have checked Hermiticity; the decomposition uses only one triangle.
    pub fn herm_eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.mat.clone());
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Hermitian eigendecomposition: (eigenvalues, unitary of column eigenvectors).
    pub fn herm_eigen(&self) -> (Vec<f64>, CMatrix) {
        let eig = SymmetricEigen::new(self.mat.clone());
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        (vals, CMatrix::from_dmatrix(eig.eigenvectors))
    }

    /// Column of the matrix as a plain vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows()).map(|i| self.get(i, j)).collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.mat[idx]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            mat: &self.mat * &rhs.mat,
        }
    }
}

/// U = exp(−i·t·H) for Hermitian H, via the spectral decomposition.
pub fn evolution(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let res = h.hermiticity_residual();
    if res > crate::consts::INVOLUTION_TOL {
        return Err(Error::NotHermitian(res));
    }
    let (vals, vecs) = h.herm_eigen();
    let phases: Vec<Complex64> = vals
        .iter()
        .map(|&e| Complex64::new(0.0, -t * e).exp())
        .collect();
    let d = CMatrix::from_diagonal(&phases);
    Ok(&(&vecs * &d) * &vecs.dagger())
}
