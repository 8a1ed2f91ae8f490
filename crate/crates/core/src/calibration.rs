// Index loops here mirror the ε_{kjn} contraction formulas; iterator
// chains would only obscure them.
#![allow(clippy::needless_range_loop)]

//! Constructive calibration of an informative weak measurement on the
//! Bloch sphere.
//!
//! From the outcome probabilities of three detector preparations under a
//! single four-outcome measurement — once undriven (w) and once weakly
//! driven (v) — the chain below finds outcome weights m̄ and preparation
//! weights p̄ such that the combined operators M̄ = Σ m̄ₖMₖ and
//! P̄ = Σ p̄ⱼPⱼ anticommute, i.e. form an informative weak measurement,
//! without knowing the measurement directions or the drive.  The weights
//! are unique up to one overall constant per operator.

use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::consts;
use crate::error::{Error, Result};
use crate::qcore::{eye2, sigma_x, sigma_y, sigma_z, CMatrix};

/// Real three-vector on (or in) the Bloch sphere.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn e1() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub fn e2() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    pub fn e3() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    /// Fully antisymmetric mixed product [self, v, w].
    pub fn mixed(&self, v: &Self, w: &Self) -> f64 {
        self.dot(&v.cross(w))
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    /// μ₀·1 + v⃗·σ⃗ as a 2×2 matrix.
    pub fn to_operator(&self, mu0: f64) -> CMatrix {
        let mut m = eye2().scale_re(mu0);
        m = &m + &sigma_x().scale_re(self.x);
        m = &m + &sigma_y().scale_re(self.y);
        &m + &sigma_z().scale_re(self.z)
    }
}

/// One effect Mₖ = μ₀ₖ·1 + μ⃗ₖ·σ⃗ of a four-outcome measurement.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct POVMElement {
    pub mu0: f64,
    pub mu: BlochVector,
}

/// A valid four-outcome measurement: positive effects that sum to the
/// identity.
pub fn validate_povm(povm: &[POVMElement; 4]) -> Result<()> {
    let mut mu0_sum = 0.0;
    let mut mu_sum = BlochVector::zero();
    for (k, e) in povm.iter().enumerate() {
        if e.mu0 < e.mu.norm() - 1e-12 {
            return Err(Error::InvalidPovm(format!(
                "element {k}: μ₀ = {} < |μ⃗| = {}",
                e.mu0,
                e.mu.norm()
            )));
        }
        mu0_sum += e.mu0;
        mu_sum = mu_sum.add(&e.mu);
    }
    if (mu0_sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPovm(format!("Σ μ₀ = {mu0_sum} ≠ 1")));
    }
    if mu_sum.norm() > 1e-12 {
        return Err(Error::InvalidPovm(format!(
            "Σ μ⃗ has norm {}",
            mu_sum.norm()
        )));
    }
    Ok(())
}

/// Scaled projections pointing at the vertices of a regular tetrahedron.
pub fn tetrahedron_povm() -> [POVMElement; 4] {
    let s = 1.0 / (4.0 * 3f64.sqrt());
    [
        POVMElement {
            mu0: 0.25,
            mu: BlochVector::new(s, -s, -s),
        },
        POVMElement {
            mu0: 0.25,
            mu: BlochVector::new(-s, s, -s),
        },
        POVMElement {
            mu0: 0.25,
            mu: BlochVector::new(-s, -s, s),
        },
        POVMElement {
            mu0: 0.25,
            mu: BlochVector::new(s, s, s),
        },
    ]
}

/// The two probability matrices of the calibration protocol:
/// wₖⱼ = μ₀ₖ + μ⃗ₖ·ρ⃗ⱼ (undriven) and vₖⱼ = 2λ[μ⃗ₖ, q⃗, ρ⃗ⱼ] (first-order
/// response to the drive along q⃗).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbMatrices {
    pub w: [[f64; 3]; 4],
    pub v: [[f64; 3]; 4],
}

impl ProbMatrices {
    /// Column sums: Σₖ wₖⱼ = 1 and Σₖ vₖⱼ = 0 for every preparation j.
    pub fn column_sum_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..3 {
            let ws: f64 = (0..4).map(|k| self.w[k][j]).sum();
            let vs: f64 = (0..4).map(|k| self.v[k][j]).sum();
            worst = worst.max((ws - 1.0).abs()).max(vs.abs());
        }
        worst
    }

    /// Singular values of v (3 values, descending).
    pub fn v_singular_values(&self) -> [f64; 3] {
        let flat: Vec<num_complex::Complex64> = self
            .v
            .iter()
            .flatten()
            .map(|&x| num_complex::Complex64::new(x, 0.0))
            .collect();
        let m = CMatrix::from_row_slice(4, 3, &flat);
        let sv = m.singular_values();
        [sv[0], sv[1], sv[2]]
    }
}

/// Build the probability matrices for known preparations, measurement and
/// drive; the test-side oracle for the calibration chain.
pub fn prob_matrices(
    preparations: &[BlochVector; 3],
    povm: &[POVMElement; 4],
    q: &BlochVector,
    lambda: f64,
) -> Result<ProbMatrices> {
    validate_povm(povm)?;
    for (j, r) in preparations.iter().enumerate() {
        if r.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidArg(format!(
                "preparation {j} has Bloch norm {} > 1",
                r.norm()
            )));
        }
    }
    let mut w = [[0.0; 3]; 4];
    let mut v = [[0.0; 3]; 4];
    for k in 0..4 {
        for j in 0..3 {
            w[k][j] = povm[k].mu0 + povm[k].mu.dot(&preparations[j]);
            v[k][j] = 2.0 * lambda * povm[k].mu.mixed(q, &preparations[j]);
        }
    }
    Ok(ProbMatrices { w, v })
}

/// Constant auxiliary vectors entering the kernel constructions; redrawn
/// automatically when an intermediate becomes degenerate.
#[derive(Clone, Copy, Debug)]
pub struct AuxVectors {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
}

impl Default for AuxVectors {
    fn default() -> Self {
        Self {
            a: [1.0, 0.0, 0.0],
            b: [0.0, 1.0, 0.0],
            c: [1.0, 0.0, 0.0],
            d: [0.0, 0.0, 1.0],
        }
    }
}

/// All intermediate vectors of the calibration chain, for auditing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationTrace {
    pub m_parallel: [f64; 4],
    pub p_parallel: [f64; 3],
    pub rho_parallel0: f64,
    pub m_perp: [f64; 4],
    pub p_perp: [f64; 3],
    pub m_prime: [f64; 3],
    pub aux_redraws: u32,
}

/// Result of the constructive calibration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub pbar: [f64; 3],
    pub mbar: [f64; 4],
    pub mu0prime: f64,
    pub trace: CalibrationTrace,
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// u × (1,1,1): the contraction Σₙ ε_{jln} uₗ of a covector over the three
/// preparations (or reduced outcomes).
fn cross_ones(u: [f64; 3]) -> [f64; 3] {
    cross3(u, [1.0, 1.0, 1.0])
}

struct Reduced {
    w3: [[f64; 3]; 3],
    v3: [[f64; 3]; 3],
}

fn reduce(pm: &ProbMatrices) -> Reduced {
    let mut w3 = [[0.0; 3]; 3];
    let mut v3 = [[0.0; 3]; 3];
    w3.copy_from_slice(&pm.w[..3]);
    v3.copy_from_slice(&pm.v[..3]);
    Reduced { w3, v3 }
}

fn mat_vec(m: &[[f64; 3]; 3], x: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = m[k][0] * x[0] + m[k][1] * x[1] + m[k][2] * x[2];
    }
    out
}

fn vec_mat(x: [f64; 3], m: &[[f64; 3]; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for j in 0..3 {
        out[j] = x[0] * m[0][j] + x[1] * m[1][j] + x[2] * m[2][j];
    }
    out
}

fn attempt(red: &Reduced, pm: &ProbMatrices, aux: &AuxVectors) -> Option<CalibrationResult> {
    // Degeneracy gate: a cross product shorter than AUX_REDRAW_TOL times
    // the scale of its factors means the aux draw was unlucky.
    let healthy = |prod: [f64; 3], f1: [f64; 3], f2: [f64; 3]| -> Option<[f64; 3]> {
        let scale = norm3(f1) * norm3(f2);
        if norm3(prod) <= consts::AUX_REDRAW_TOL * scale.max(f64::MIN_POSITIVE) {
            None
        } else {
            Some(prod)
        }
    };

    // m∥ ∈ ker vᵀ: (v·a) × (v·b) over the reduced outcome index.
    let va = mat_vec(&red.v3, aux.a);
    let vb = mat_vec(&red.v3, aux.b);
    let m_par3 = healthy(cross3(va, vb), va, vb)?;

    // p∥ ∈ ker v: (c·v) × (d·v) over preparations.
    let cv = vec_mat(aux.c, &red.v3);
    let dv = vec_mat(aux.d, &red.v3);
    let p_par = healthy(cross3(cv, dv), cv, dv)?;

    // m⊥ from the undriven columns: w₁×w₂ + w₂×w₃ + w₃×w₁.
    let wcol = |j: usize| [red.w3[0][j], red.w3[1][j], red.w3[2][j]];
    let (w1, w2, w3c) = (wcol(0), wcol(1), wcol(2));
    let mut m_perp3 = [0.0; 3];
    let parts = [cross3(w1, w2), cross3(w2, w3c), cross3(w3c, w1)];
    for p in parts {
        for i in 0..3 {
            m_perp3[i] += p[i];
        }
    }

    // Preparation weights: p̄ = (m⊥ᵀ v) × (1,1,1), using all four rows.
    let m_perp = [m_perp3[0], m_perp3[1], m_perp3[2], 0.0];
    let mut mtv = [0.0; 3];
    for j in 0..3 {
        for k in 0..4 {
            mtv[j] += m_perp[k] * pm.v[k][j];
        }
    }
    let pbar = healthy(cross_ones(mtv), mtv, [1.0, 1.0, 1.0])?;

    // p⊥ = (m∥ᵀ w) × (1,1,1).
    let m_par = [m_par3[0], m_par3[1], m_par3[2], 0.0];
    let mut mpw = [0.0; 3];
    for j in 0..3 {
        for k in 0..4 {
            mpw[j] += m_par[k] * pm.w[k][j];
        }
    }
    let p_perp = healthy(cross_ones(mpw), mpw, [1.0, 1.0, 1.0])?;

    // Outcome weights before the identity shift: m′ = (v·p⊥) × (w·p̄).
    let vp = mat_vec(&red.v3, p_perp);
    let wp = mat_vec(&red.w3, pbar);
    let m_prime = healthy(cross3(vp, wp), vp, wp)?;

    // μ′₀ from the driven-kernel preparation combination.
    let rho_par0: f64 = p_par.iter().sum();
    if rho_par0.abs() <= consts::AUX_REDRAW_TOL * norm3(p_par).max(f64::MIN_POSITIVE) {
        return None;
    }
    let mut mw = [0.0; 3];
    for j in 0..3 {
        for k in 0..3 {
            mw[j] += m_prime[k] * pm.w[k][j];
        }
    }
    let mu0prime = (mw[0] * p_par[0] + mw[1] * p_par[1] + mw[2] * p_par[2]) / rho_par0;

    // m̄ₖ = m′ₖ − μ′₀ (k = 1..3), −μ′₀ for the dependent fourth outcome.
    let mbar = [
        m_prime[0] - mu0prime,
        m_prime[1] - mu0prime,
        m_prime[2] - mu0prime,
        -mu0prime,
    ];

    Some(CalibrationResult {
        pbar,
        mbar,
        mu0prime,
        trace: CalibrationTrace {
            m_parallel: m_par,
            p_parallel: p_par,
            rho_parallel0: rho_par0,
            m_perp,
            p_perp,
            m_prime,
            aux_redraws: 0,
        },
    })
}

/// Run the calibration chain on measured probability matrices.
///
/// Fails when v does not have numerical rank 2 (drive absent, or
/// preparations/measurement degenerate with the drive axis).  Unlucky
/// auxiliary vectors are redrawn from a fixed pseudo-random sequence.
pub fn calibrate(pm: &ProbMatrices, aux: &AuxVectors) -> Result<CalibrationResult> {
    let sv = pm.v_singular_values();
    let rank = sv
        .iter()
        .filter(|&&s| s > consts::RANK_RATIO_TOL * sv[0].max(f64::MIN_POSITIVE))
        .count();
    if sv[0] == 0.0 || rank != 2 {
        return Err(Error::BadCalibrationRank {
            rank,
            s1: sv[0],
            s2: sv[1],
            s3: sv[2],
        });
    }
    let red = reduce(pm);
    if let Some(result) = attempt(&red, pm, aux) {
        return Ok(result);
    }
    const MAX_REDRAWS: u32 = 32;
    let mut rng = ChaCha12Rng::seed_from_u64(0xCA11B);
    for redraw in 1..=MAX_REDRAWS {
        let mut draw = || {
            let mut v = [0.0; 3];
            for x in v.iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
            v
        };
        let fresh = AuxVectors {
            a: draw(),
            b: draw(),
            c: draw(),
            d: draw(),
        };
        if let Some(mut result) = attempt(&red, pm, &fresh) {
            result.trace.aux_redraws = redraw;
            return Ok(result);
        }
    }
    Err(Error::AuxRetryExhausted(MAX_REDRAWS as usize))
}

/// Interval bounds on the Bloch-vector magnitudes reachable from the
/// probability matrices alone.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MagnitudeBounds {
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub mu_lower: f64,
    pub mu_upper: f64,
}

/// maxₖ|Σⱼ wₖⱼ p̄ⱼ| ≤ |ρ̄⃗| ≤ Σⱼ|p̄ⱼ| and maxⱼ|Σₖ m̄ₖ wₖⱼ| ≤ |μ̄⃗| ≤ Σₖ|m̄ₖ|.
pub fn magnitude_bounds(result: &CalibrationResult, w: &[[f64; 3]; 4]) -> MagnitudeBounds {
    let mut rho_lower: f64 = 0.0;
    for row in w.iter() {
        let dot: f64 = (0..3).map(|j| row[j] * result.pbar[j]).sum();
        rho_lower = rho_lower.max(dot.abs());
    }
    let rho_upper: f64 = result.pbar.iter().map(|p| p.abs()).sum();
    let mut mu_lower: f64 = 0.0;
    for j in 0..3 {
        let dot: f64 = (0..4).map(|k| result.mbar[k] * w[k][j]).sum();
        mu_lower = mu_lower.max(dot.abs());
    }
    let mu_upper: f64 = result.mbar.iter().map(|m| m.abs()).sum();
    MagnitudeBounds {
        rho_lower,
        rho_upper,
        mu_lower,
        mu_upper,
    }
}

/// Combined effect M̄ = Σ m̄ₖMₖ as (μ̄₀, μ̄⃗), given the true measurement.
pub fn combine_effects(povm: &[POVMElement; 4], mbar: &[f64; 4]) -> (f64, BlochVector) {
    let mut mu0 = 0.0;
    let mut mu = BlochVector::zero();
    for k in 0..4 {
        mu0 += mbar[k] * povm[k].mu0;
        mu = mu.add(&povm[k].mu.scale(mbar[k]));
    }
    (mu0, mu)
}

/// Combined preparation P̄ = Σ p̄ⱼPⱼ as (ρ̄₀, ρ̄⃗), given the true states;
/// each Pⱼ = (1 + ρ⃗ⱼ·σ⃗)/2.
pub fn combine_preparations(preps: &[BlochVector; 3], pbar: &[f64; 3]) -> (f64, BlochVector) {
    let rho0: f64 = pbar.iter().sum();
    let mut rho = BlochVector::zero();
    for j in 0..3 {
        rho = rho.add(&preps[j].scale(pbar[j]));
    }
    (rho0, rho)
}

/// Anticommutation residual ‖{M̄, P̄}‖ of the reconstructed pair, after
/// normalizing both operators to unit spectral scale.
pub fn anticommutation_residual(
    povm: &[POVMElement; 4],
    preps: &[BlochVector; 3],
    result: &CalibrationResult,
) -> f64 {
    let (mu0, mu) = combine_effects(povm, &result.mbar);
    let (rho0, rho) = combine_preparations(preps, &result.pbar);
    let mbar_op = mu.to_operator(mu0);
    let pbar_op = rho.to_operator(rho0).scale_re(0.5);
    let m_scale = mbar_op.spectral_norm().max(f64::MIN_POSITIVE);
    let p_scale = pbar_op.spectral_norm().max(f64::MIN_POSITIVE);
    mbar_op
        .scale_re(1.0 / m_scale)
        .anticommutator(&pbar_op.scale_re(1.0 / p_scale))
        .spectral_norm()
}
