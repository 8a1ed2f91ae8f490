//! The fixed gate set: Pauli matrices, axis rotations, phase and ZZ gates.
//!
//! Rotation convention: `rotation(V, θ) = exp(θ·V/2i) = cos(θ/2)·1 − i·sin(θ/2)·V`
//! for any involution V² = 1.  `rzz(θ)` is pinned to
//! diag(e^{iθ/2}, e^{−iθ/2}, e^{−iθ/2}, e^{iθ/2}), which is the adjoint of
//! `rotation(Z⊗Z, θ)`; circuits that need the rotation-convention coupling
//! use `rotation(&zz(), θ)` directly.

use num_complex::Complex64;

use super::cmatrix::CMatrix;
use crate::consts;
use crate::error::{Error, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn eye2() -> CMatrix {
    CMatrix::identity(2)
}

/// Pauli matrix by name, one of `I`, `X`, `Y`, `Z`.
pub fn pauli(name: &str) -> Result<CMatrix> {
    match name {
        "I" => Ok(eye2()),
        "X" => Ok(sigma_x()),
        "Y" => Ok(sigma_y()),
        "Z" => Ok(sigma_z()),
        other => Err(Error::UnknownPauli(other.to_string())),
    }
}

/// Z⊗Z on two qubits.
pub fn zz() -> CMatrix {
    sigma_z().kron(&sigma_z())
}

/// `cos(θ/2)·1 − i·sin(θ/2)·V` for a Hermitian involution V.
pub fn rotation(v: &CMatrix, theta: f64) -> Result<CMatrix> {
    let herm = v.hermiticity_residual();
    if herm > consts::INVOLUTION_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let sq = (v * v).max_abs_diff(&CMatrix::identity(v.rows()));
    if sq > consts::INVOLUTION_TOL {
        return Err(Error::NotInvolution(sq));
    }
    let half = theta / 2.0;
    let cos_term = CMatrix::identity(v.rows()).scale(c(half.cos(), 0.0));
    let sin_term = v.scale(c(0.0, -half.sin()));
    Ok(&cos_term + &sin_term)
}

/// Virtual phase gate diag(e^{−iθ/2}, e^{iθ/2}).
pub fn z_phase(theta: f64) -> CMatrix {
    CMatrix::from_diagonal(&[c(0.0, -theta / 2.0).exp(), c(0.0, theta / 2.0).exp()])
}

/// Two-qubit ZZ phase gate diag(e^{iθ/2}, e^{−iθ/2}, e^{−iθ/2}, e^{iθ/2})
/// in the basis |00⟩, |01⟩, |10⟩, |11⟩.
pub fn rzz(theta: f64) -> CMatrix {
    let plus = c(0.0, theta / 2.0).exp();
    let minus = c(0.0, -theta / 2.0).exp();
    CMatrix::from_diagonal(&[plus, minus, minus, plus])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn pauli_matrices_are_exact() {
        let z = pauli("Z").unwrap();
        assert_eq!(z.get(0, 0), c(1., 0.));
        assert_eq!(z.get(1, 1), c(-1., 0.));
        assert_eq!(z.get(0, 1), c(0., 0.));
        let i = pauli("I").unwrap();
        assert_eq!(i.max_abs_diff(&CMatrix::identity(2)), 0.0);
        assert!(pauli("Q").is_err());
    }

    #[test]
    fn pauli_products_close_the_algebra() {
        // X·Y = iZ, entrywise.
        let xy = &sigma_x() * &sigma_y();
        let iz = sigma_z().scale(c(0., 1.));
        assert_eq!(xy.max_abs_diff(&iz), 0.0);
        for name in ["X", "Y", "Z"] {
            let p = pauli(name).unwrap();
            assert_eq!((&p * &p).max_abs_diff(&eye2()), 0.0);
            assert_eq!(p.trace(), c(0., 0.));
        }
    }

    #[test]
    fn rotation_matches_the_half_angle_form() {
        let rx = rotation(&sigma_x(), PI / 2.0).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(FRAC_1_SQRT_2, 0.),
                c(0., -FRAC_1_SQRT_2),
                c(0., -FRAC_1_SQRT_2),
                c(FRAC_1_SQRT_2, 0.),
            ],
        );
        assert!(rx.max_abs_diff(&expected) < 1e-15);
        assert!(rx.is_unitary(1e-14));

        let rz0 = rotation(&sigma_z(), 0.0).unwrap();
        assert!(rz0.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn rotation_conjugation_turns_z_into_x() {
        // Y_{π/2} · Z · Y_{−π/2} = X
        let yp = rotation(&sigma_y(), PI / 2.0).unwrap();
        let ym = rotation(&sigma_y(), -PI / 2.0).unwrap();
        let conj = &(&yp * &sigma_z()) * &ym;
        assert!(conj.max_abs_diff(&sigma_x()) < 1e-15);
    }

    #[test]
    fn rotation_rejects_non_involution() {
        let not_inv = sigma_z().scale(c(0.5, 0.0));
        assert!(matches!(
            rotation(&not_inv, 1.0),
            Err(Error::NotInvolution(_))
        ));
    }

    #[test]
    fn rotation_angles_add() {
        let mut rng_state = 0x9E3779B97F4A7C15u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 6.0 - 3.0
        };
        for _ in 0..20 {
            let (t1, t2) = (next(), next());
            let lhs = &rotation(&sigma_y(), t1).unwrap() * &rotation(&sigma_y(), t2).unwrap();
            let rhs = rotation(&sigma_y(), t1 + t2).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn rzz_matches_its_pinned_diagonal() {
        let id = rzz(0.0);
        assert!(id.max_abs_diff(&CMatrix::identity(4)) < 1e-15);

        let half_turn = rzz(PI);
        let expected = CMatrix::from_diagonal(&[c(0., 1.), c(0., -1.), c(0., -1.), c(0., 1.)]);
        assert!(half_turn.max_abs_diff(&expected) < 1e-15);

        let small = rzz(0.1);
        assert!((small.get(0, 0) - c(0.0, 0.05).exp()).norm() < 1e-15);
        assert!((small.get(1, 1) - c(0.0, -0.05).exp()).norm() < 1e-15);
    }

    #[test]
    fn rzz_is_the_adjoint_of_the_zz_rotation() {
        let theta = 0.317;
        let rot = rotation(&zz(), theta).unwrap();
        assert!(rot.max_abs_diff(&rzz(theta).dagger()) < 1e-15);
        assert!(rot.max_abs_diff(&rzz(-theta)) < 1e-15);
    }

    #[test]
    fn native_gate_decomposition_of_y_rotation() {
        // Y_± = Z_± X_+ Z_∓ in terms of the native phase and X gates.
        let xp = rotation(&sigma_x(), PI / 2.0).unwrap();
        for s in [1.0f64, -1.0] {
            let lhs = &(&z_phase(s * PI / 2.0) * &xp) * &z_phase(-s * PI / 2.0);
            let rhs = rotation(&sigma_y(), s * PI / 2.0).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        }
    }
}
