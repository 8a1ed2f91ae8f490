//! Detector-imperfection model: biased meter preparation, over-rotated
//! single-qubit gates and offset/contrast readout errors, with closed-form
//! corrections verified against the full dilation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::{meter_dilation, Instrument};
use crate::qcore::{rotation, sigma_x, z_phase, zz, CMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Meter noise parameters.
///
/// `epsilon` flips the initial meter state with that probability, `alpha`
/// and `beta` over-rotate the X gates inside the preparation and before the
/// readout, and the readout effect for bit 0 is `eta + (1−omega)|0⟩⟨0|`.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct NoiseParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub omega: f64,
}

impl NoiseParams {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Eigenvalue check: the bit-0 effect and its complement must both be
    /// positive and bounded by the identity.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.epsilon) {
            return Err(Error::InvalidNoise(format!(
                "epsilon {} outside [0, 1/2]",
                self.epsilon
            )));
        }
        if self.eta < 0.0 {
            return Err(Error::InvalidNoise(format!("eta {} negative", self.eta)));
        }
        let eigs = [self.eta, self.eta + 1.0 - self.omega];
        for e in eigs {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidNoise(format!(
                    "bit-0 effect eigenvalue {e} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Readout effect for meter bit 0 (outcome value +1), before the
    /// pre-measurement rotation.
    pub fn bit0_effect(&self) -> CMatrix {
        let zero = CMatrix::from_diagonal(&[c(1., 0.), c(0., 0.)]);
        &CMatrix::identity(2).scale_re(self.eta) + &zero.scale_re(1.0 - self.omega)
    }
}

/// Disturbance and contrast coefficients of one imperfect detector.
///
/// `f` is the coefficient of the i[Z,ρ] term in the (doubled) post-coupling
/// state and `g` the dephasing weight: f = (1−2ε)·sin α·sin θ,
/// g = (1−cos θ)/4.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FGParams {
    pub f: f64,
    pub g: f64,
}

impl FGParams {
    pub fn from_noise(params: &NoiseParams, theta: f64) -> Self {
        Self {
            f: (1.0 - 2.0 * params.epsilon) * params.alpha.sin() * theta.sin(),
            g: (1.0 - theta.cos()) / 4.0,
        }
    }

    pub fn ideal(theta: f64) -> Self {
        Self::from_noise(&NoiseParams::zero(), theta)
    }
}

/// Physical pieces of one weak-measurement meter: the prepared state, the
/// pre-measurement rotation and the two readout effects (value, effect).
#[derive(Clone, Debug)]
pub struct MeterComponents {
    pub prep: CMatrix,
    pub readout_rotation: CMatrix,
    pub effects: [(f64, CMatrix); 2],
}

/// Build the meter for a given contrast sign (`±1`), optionally imperfect.
///
/// The preparation applies Z_{±π/2}·X_{π/2+α}·Z_{∓π/2} to a state flipped
/// with probability ε; with zero noise this is exactly the ±x preparation.
pub fn meter_components(sign: i8, noise: Option<&NoiseParams>) -> Result<MeterComponents> {
    if sign != 1 && sign != -1 {
        return Err(Error::BadSign(sign));
    }
    let p = noise.copied().unwrap_or_default();
    p.validate()?;
    let s = f64::from(sign);
    let half_pi = std::f64::consts::FRAC_PI_2;

    let init = CMatrix::from_diagonal(&[c(1.0 - p.epsilon, 0.0), c(p.epsilon, 0.0)]);
    let y_gate = &(&z_phase(s * half_pi) * &rotation(&sigma_x(), half_pi + p.alpha)?)
        * &z_phase(-s * half_pi);
    let prep = &(&y_gate * &init) * &y_gate.dagger();

    let readout_rotation = rotation(&sigma_x(), half_pi + p.beta)?;

    let e0 = p.bit0_effect();
    let e1 = &CMatrix::identity(2) - &e0;
    Ok(MeterComponents {
        prep,
        readout_rotation,
        effects: [(1.0, e0), (-1.0, e1)],
    })
}

/// Imperfect dichotomic weak measurement of Z by explicit meter dilation.
pub fn noisy_instrument(theta: f64, sign: i8, params: &NoiseParams) -> Result<Instrument> {
    params.validate()?;
    let meter = meter_components(sign, Some(params))?;
    let coupling = rotation(&zz(), theta)?;
    let u = &CMatrix::identity(2).kron(&meter.readout_rotation) * &coupling;
    meter_dilation(2, &meter.prep, &u, &meter.effects)
}

/// Scalar multiplying the anticommutator map in the contrast-averaged
/// measurement map of an imperfect detector:
/// (1−2ε)(1−ω)·cos α·cos β·sin θ.
pub fn rescale_factor(params: &NoiseParams, theta: f64) -> f64 {
    (1.0 - 2.0 * params.epsilon)
        * (1.0 - params.omega)
        * params.alpha.cos()
        * params.beta.cos()
        * theta.sin()
}

/// One row of a device calibration snapshot: qubit indices, two-qubit
/// gate errors between the system and each meter, and readout errors.
/// Error fields are probabilities (not percentages).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DeviceCalibrationRow {
    pub system: u32,
    pub meter_a: u32,
    pub meter_b: u32,
    pub gate_error_a: f64,
    pub gate_error_b: f64,
    pub readout_system: f64,
    pub readout_a: f64,
    pub readout_b: f64,
}

impl DeviceCalibrationRow {
    /// Heuristic, non-normative mapping of device numbers onto meter noise.
    ///
    /// A symmetric readout misassignment e is exactly the effect
    /// e + (1−2e)·|0⟩⟨0| for bit 0, i.e. η = e, ω = 2e.  The two-qubit
    /// gate error has no unique counterpart in this model; half of it is
    /// charged to the preparation flip ε.  Real devices need their own
    /// characterization; this is a starting point for what-if runs only.
    pub fn meter_noise(&self) -> (Result<NoiseParams>, Result<NoiseParams>) {
        let build = |readout: f64, gate: f64| -> Result<NoiseParams> {
            let p = NoiseParams {
                epsilon: gate / 2.0,
                alpha: 0.0,
                beta: 0.0,
                eta: readout,
                omega: 2.0 * readout,
            };
            p.validate()?;
            Ok(p)
        };
        (
            build(self.readout_a, self.gate_error_a),
            build(self.readout_b, self.gate_error_b),
        )
    }
}

/// Conditioning probability of the three-qubit protocol with two imperfect
/// detectors, exact in the (f, g) parameters:
/// cos²ψ + 2(g_A + g_B − 4·g_A·g_B)·sin²ψ + f_A·f_B·sin²ψ/2.
///
/// The cross term carries the coefficient of the exactly evaluated dilation
/// (each detector's first-order kick enters with f/2).
pub fn corrected_c(psi: f64, fg_a: &FGParams, fg_b: &FGParams) -> f64 {
    let s2 = psi.sin().powi(2);
    psi.cos().powi(2)
        + 2.0 * (fg_a.g + fg_b.g - 4.0 * fg_a.g * fg_b.g) * s2
        + fg_a.f * fg_b.f * s2 / 2.0
}
