//! Multi-qubit density matrices.
//!
//! Index convention: qubit 0 is the leftmost tensor factor and the leftmost
//! character of outcome bitstrings, i.e. the most significant bit of a basis
//! index.

use num_complex::Complex64;

use super::cmatrix::CMatrix;
use crate::consts;
use crate::error::{Error, Result};

/// Density matrix of an `n_qubits` register.
#[derive(Clone, Debug)]
pub struct DensityState {
    n_qubits: usize,
    mat: CMatrix,
}

/// Bit of `index` for `qubit` in an `n`-qubit register (qubit 0 = MSB).
pub fn bit_of(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > consts::MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    Ok(())
}

impl DensityState {
    /// |0…0⟩⟨0…0| on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1 << n;
        let mut amps = vec![Complex64::ZERO; dim];
        amps[0] = Complex64::ONE;
        Self::from_pure(n, &amps)
    }

    /// Pure state from amplitudes in the computational basis.
    pub fn from_pure(n: usize, amps: &[Complex64]) -> Result<Self> {
        check_qubit_count(n)?;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "need {} amplitudes for {} qubits, got {}",
                1usize << n,
                n,
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("amplitude norm² = {norm}")));
        }
        Ok(Self {
            n_qubits: n,
            mat: CMatrix::outer(amps, amps),
        })
    }

    /// Validated construction from an explicit matrix.
    pub fn from_matrix(n: usize, mat: CMatrix) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        if mat.rows() != dim || mat.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, want {dim}x{dim}",
                mat.rows(),
                mat.cols()
            )));
        }
        let herm = mat.hermiticity_residual();
        if herm > consts::HERM_TOL {
            return Err(Error::InvalidState(format!(
                "hermiticity residual {herm:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > consts::TRACE_ONE_TOL || tr.im.abs() > consts::TRACE_ONE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min_eig = mat
            .herm_eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < consts::PSD_EIG_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { n_qubits: n, mat })
    }

    /// Tensor product, `self` on the left (lower qubit indices).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        check_qubit_count(self.n_qubits + other.n_qubits)?;
        Ok(Self {
            n_qubits: self.n_qubits + other.n_qubits,
            mat: self.mat.kron(&other.mat),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Diagonal of the density matrix: outcome probabilities of a
    /// computational-basis measurement.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat.get(i, i).re).collect()
    }

    /// Tr(op·ρ).
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (op * &self.mat).trace()
    }

    /// Apply a unitary on the listed target qubits; the first listed target
    /// matches the leftmost factor of `u`.
    pub fn apply_unitary(&self, u: &CMatrix, targets: &[usize]) -> Result<Self> {
        let res = u.unitarity_residual();
        if res > consts::UNITARY_TOL {
            return Err(Error::NotUnitary(res));
        }
        let full = embed_on_targets(u, targets, self.n_qubits)?;
        let mat = &(&full * &self.mat) * &full.dagger();
        Ok(Self {
            n_qubits: self.n_qubits,
            mat,
        })
    }

    /// Trace out every qubit not in `keep`; kept qubits retain the relative
    /// order they are listed in.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        validate_targets(keep, self.n_qubits)?;
        let n = self.n_qubits;
        let k = keep.len();
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let t = traced.len();
        let out_dim = 1usize << k;
        let mut acc = vec![Complex64::ZERO; out_dim * out_dim];
        for ik in 0..out_dim {
            for jk in 0..out_dim {
                let mut sum = Complex64::ZERO;
                for s in 0..(1usize << t) {
                    let mut fi = 0usize;
                    let mut fj = 0usize;
                    for (pos, &q) in keep.iter().enumerate() {
                        let shift = n - 1 - q;
                        fi |= bit_of(ik, pos, k) << shift;
                        fj |= bit_of(jk, pos, k) << shift;
                    }
                    for (pos, &q) in traced.iter().enumerate() {
                        let b = bit_of(s, pos, t) << (n - 1 - q);
                        fi |= b;
                        fj |= b;
                    }
                    sum += self.mat.get(fi, fj);
                }
                acc[ik * out_dim + jk] = sum;
            }
        }
        let out = CMatrix::from_row_slice(out_dim, out_dim, &acc);
        Ok(Self {
            n_qubits: k,
            mat: out,
        })
    }
}

fn validate_targets(targets: &[usize], n: usize) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::BadTargets("empty target list".into()));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::BadTargets(format!(
                "qubit {t} out of range for {n} qubits"
            )));
        }
        if targets[..i].contains(&t) {
            return Err(Error::BadTargets(format!("qubit {t} listed twice")));
        }
    }
    Ok(())
}

/// Embed a k-qubit operator acting on `targets` into the full 2^n space.
/// The first listed target corresponds to the leftmost factor of `u`.
pub fn embed_on_targets(u: &CMatrix, targets: &[usize], n: usize) -> Result<CMatrix> {
    validate_targets(targets, n)?;
    let k = targets.len();
    if u.rows() != 1 << k || u.cols() != 1 << k {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but {} targets need {}x{}",
            u.rows(),
            u.cols(),
            k,
            1usize << k,
            1usize << k
        )));
    }
    let dim = 1usize << n;
    let non_target_mask: usize = {
        let mut m = 0usize;
        for q in 0..n {
            if !targets.contains(&q) {
                m |= 1 << (n - 1 - q);
            }
        }
        m
    };
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        if (i & non_target_mask) != (j & non_target_mask) {
            return Complex64::ZERO;
        }
        let mut si = 0usize;
        let mut sj = 0usize;
        for (pos, &q) in targets.iter().enumerate() {
            si |= bit_of(i, q, n) << (k - 1 - pos);
            sj |= bit_of(j, q, n) << (k - 1 - pos);
        }
        u.get(si, sj)
    }))
}
