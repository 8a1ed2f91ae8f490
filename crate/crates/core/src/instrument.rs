//! Quantum instruments, superoperator maps and the informative/responsive
//! decomposition of weak measurements.
//!
//! Superoperators are stored as d²×d² matrices acting on column-stacked
//! density matrices: vec(AρB) = (Bᵀ⊗A)·vec(ρ).

use num_complex::Complex64;

use crate::consts;
use crate::error::{Error, Result};
use crate::qcore::{evolution, rotation, sigma_x, sigma_y, sigma_z, zz, CMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Linear map on d×d operators, stored as a d²×d² matrix over
/// column-stacked operands.
#[derive(Clone, Debug)]
pub struct SuperOp {
    dim: usize,
    mat: CMatrix,
}

fn vec_columns(a: &CMatrix) -> Vec<Complex64> {
    let (r, cdim) = (a.rows(), a.cols());
    let mut v = Vec::with_capacity(r * cdim);
    for j in 0..cdim {
        for i in 0..r {
            v.push(a.get(i, j));
        }
    }
    v
}

fn unvec_columns(v: &[Complex64], dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| v[j * dim + i])
}

impl SuperOp {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::identity(dim * dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            mat: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// The map ρ ↦ L·ρ·R.
    pub fn from_left_right(l: &CMatrix, r: &CMatrix) -> Self {
        assert_eq!(l.rows(), l.cols());
        assert_eq!(l.rows(), r.rows());
        Self {
            dim: l.rows(),
            mat: r.transpose().kron(l),
        }
    }

    /// The completely positive map ρ ↦ Σ K·ρ·K†.
    pub fn from_kraus(kraus: &[CMatrix]) -> Self {
        assert!(!kraus.is_empty());
        let dim = kraus[0].rows();
        let mut mat = CMatrix::zeros(dim * dim, dim * dim);
        for k in kraus {
            mat = &mat + &k.conjugate().kron(k);
        }
        Self { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        assert_eq!(rho.rows(), self.dim);
        assert_eq!(rho.cols(), self.dim);
        let v = vec_columns(rho);
        let d2 = self.dim * self.dim;
        let mut out = vec![Complex64::ZERO; d2];
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = Complex64::ZERO;
            for (j, vj) in v.iter().enumerate() {
                s += self.mat.get(i, j) * vj;
            }
            *o = s;
        }
        unvec_columns(&out, self.dim)
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            mat: self.mat.scale_re(s),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mat.max_abs_diff(&other.mat)
    }
}

/// Â: ρ ↦ (Aρ + ρA)/2 for Hermitian A.
pub fn anticommutator_map(a: &CMatrix) -> Result<SuperOp> {
    let res = a.hermiticity_residual();
    if res > consts::INVOLUTION_TOL {
        return Err(Error::NotHermitian(res));
    }
    let id = CMatrix::identity(a.rows());
    Ok(SuperOp::from_left_right(a, &id)
        .add(&SuperOp::from_left_right(&id, a))
        .scale(0.5))
}

/// Ã: ρ ↦ i[ρ, A] = i(ρA − Aρ) for Hermitian A.
pub fn commutator_map(a: &CMatrix) -> Result<SuperOp> {
    let res = a.hermiticity_residual();
    if res > consts::INVOLUTION_TOL {
        return Err(Error::NotHermitian(res));
    }
    let id = CMatrix::identity(a.rows());
    let right = SuperOp::from_left_right(&id, a); // ρA
    let left = SuperOp::from_left_right(a, &id); // Aρ
    let mut m = right.sub(&left);
    m.mat = m.mat.scale(c(0.0, 1.0));
    Ok(m)
}

/// The map ρ ↦ Tr′[(1⊗M̄)·U·(ρ⊗P̄)·U†] as an explicit superoperator,
/// built column by column over the operator basis.  M̄ and P̄ need not be
/// positive (contrast combinations are traceless), only Hermitian.
pub fn averaged_map_superop(mbar: &CMatrix, pbar: &CMatrix, u: &CMatrix) -> Result<SuperOp> {
    let meter_dim = mbar.rows();
    if pbar.rows() != meter_dim {
        return Err(Error::DimensionMismatch("M̄ and P̄ live on the same meter".into()));
    }
    if !u.rows().is_multiple_of(meter_dim) {
        return Err(Error::DimensionMismatch(format!(
            "joint dim {} not divisible by meter dim {meter_dim}",
            u.rows()
        )));
    }
    let system_dim = u.rows() / meter_dim;
    let d2 = system_dim * system_dim;
    let mut cols: Vec<CMatrix> = Vec::with_capacity(d2);
    for basis in 0..d2 {
        let (i, j) = (basis % system_dim, basis / system_dim);
        let e = CMatrix::from_fn(system_dim, system_dim, |r, s| {
            if r == i && s == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        });
        let joint = e.kron(pbar);
        let evolved = &(u * &joint) * &u.dagger();
        cols.push(contract_meter(mbar, &evolved, system_dim, meter_dim));
    }
    let mat = CMatrix::from_fn(d2, d2, |r, col| cols[col].get(r % system_dim, r / system_dim));
    Ok(SuperOp { dim: system_dim, mat })
}

/// Averaging scheme over meter preparations and readout outcomes: real
/// weights p̄ⱼ over preparations Pⱼ and m̄ₖ over the effects of a fixed
/// readout.  A scheme whose preparation weights sum to zero is a contrast
/// scheme (Tr P̄ = 0), which cancels detector bias.
#[derive(Clone, Debug)]
pub struct ContrastScheme {
    pub preparations: Vec<CMatrix>,
    pub prep_weights: Vec<f64>,
    pub effect_weights: Vec<f64>,
}

impl ContrastScheme {
    pub fn validate(&self) -> Result<()> {
        if self.preparations.len() != self.prep_weights.len() || self.preparations.is_empty() {
            return Err(Error::DimensionMismatch("one weight per preparation".into()));
        }
        if self
            .prep_weights
            .iter()
            .chain(self.effect_weights.iter())
            .any(|w| !w.is_finite())
        {
            return Err(Error::InvalidArg("scheme weights must be finite".into()));
        }
        let dim = self.preparations[0].rows();
        for (j, p) in self.preparations.iter().enumerate() {
            if p.rows() != dim || !p.is_hermitian(1e-10) {
                return Err(Error::InvalidState(format!("preparation {j} is not a state")));
            }
            if (p.trace().re - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidState(format!(
                    "preparation {j} has trace {}",
                    p.trace().re
                )));
            }
        }
        Ok(())
    }

    /// True when the preparation weights sum to zero (Tr P̄ = 0).
    pub fn is_contrast(&self) -> bool {
        self.prep_weights.iter().sum::<f64>().abs() < 1e-12
    }

    /// P̄ = Σⱼ p̄ⱼ·Pⱼ.
    pub fn combined_preparation(&self) -> CMatrix {
        let dim = self.preparations[0].rows();
        let mut out = CMatrix::zeros(dim, dim);
        for (p, &w) in self.preparations.iter().zip(&self.prep_weights) {
            out = &out + &p.scale_re(w);
        }
        out
    }

    /// M̄ = Σₖ m̄ₖ·Eₖ for the given readout effects.
    pub fn combined_effect(&self, effects: &[CMatrix]) -> Result<CMatrix> {
        if effects.len() != self.effect_weights.len() {
            return Err(Error::DimensionMismatch("one weight per effect".into()));
        }
        let dim = effects[0].rows();
        let mut out = CMatrix::zeros(dim, dim);
        for (e, &w) in effects.iter().zip(&self.effect_weights) {
            out = &out + &e.scale_re(w);
        }
        Ok(out)
    }

    /// The averaging map K̄ρ = Tr′[(1⊗M̄)·U·(ρ⊗P̄)·U†] of the scheme under
    /// the joint coupling `u` and readout `effects`.
    pub fn averaged_map(&self, u: &CMatrix, effects: &[CMatrix]) -> Result<SuperOp> {
        self.validate()?;
        let mbar = self.combined_effect(effects)?;
        averaged_map_superop(&mbar, &self.combined_preparation(), u)
    }
}

/// Outcome-indexed collection of completely positive maps in Kraus form.
/// Summed over outcomes the maps form a trace-preserving channel.
#[derive(Clone, Debug)]
pub struct Instrument {
    outcomes: Vec<f64>,
    maps: Vec<Vec<CMatrix>>,
}

impl Instrument {
    pub fn new(outcomes: Vec<f64>, maps: Vec<Vec<CMatrix>>) -> Result<Self> {
        if outcomes.len() != maps.len() || outcomes.is_empty() {
            return Err(Error::DimensionMismatch(
                "one Kraus list per outcome".into(),
            ));
        }
        let inst = Self { outcomes, maps };
        let res = inst.completeness_residual();
        if res > consts::KRAUS_TOTALITY_TOL {
            return Err(Error::InvalidState(format!(
                "summed Kraus operators miss the identity by {res:.3e}"
            )));
        }
        Ok(inst)
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn kraus(&self, outcome_idx: usize) -> &[CMatrix] {
        &self.maps[outcome_idx]
    }

    pub fn dim(&self) -> usize {
        self.maps[0][0].rows()
    }

    /// Max-abs deviation of Σ_a Σ_k K†K from the identity.
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.dim();
        let mut total = CMatrix::zeros(dim, dim);
        for kraus in &self.maps {
            for k in kraus {
                total = &total + &(&k.dagger() * k);
            }
        }
        total.max_abs_diff(&CMatrix::identity(dim))
    }

    pub fn outcome_superop(&self, outcome_idx: usize) -> SuperOp {
        SuperOp::from_kraus(&self.maps[outcome_idx])
    }

    /// Channel with the outcome discarded: Σ_a K(a).
    pub fn total_superop(&self) -> SuperOp {
        let mut s = SuperOp::zero(self.dim());
        for i in 0..self.maps.len() {
            s = s.add(&self.outcome_superop(i));
        }
        s
    }

    /// Outcome-weighted map Σ_a a·K(a).
    pub fn mean_superop(&self) -> SuperOp {
        let mut s = SuperOp::zero(self.dim());
        for (i, &a) in self.outcomes.iter().enumerate() {
            s = s.add(&self.outcome_superop(i).scale(a));
        }
        s
    }

    /// Outcome probabilities Tr K(a)ρ.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        (0..self.outcomes.len())
            .map(|i| self.outcome_superop(i).apply(rho).trace().re)
            .collect()
    }
}

/// Instrument from a meter dilation: couple the system to a meter prepared
/// in `prep` with the joint unitary `u` (system ⊗ meter ordering), then read
/// the meter with the given effects and trace it out.
#[allow(clippy::needless_range_loop)]
pub fn meter_dilation(
    system_dim: usize,
    prep: &CMatrix,
    u: &CMatrix,
    effects: &[(f64, CMatrix)],
) -> Result<Instrument> {
    let meter_dim = prep.rows();
    if u.rows() != system_dim * meter_dim {
        return Err(Error::DimensionMismatch(format!(
            "joint unitary is {}x{}, want {}",
            u.rows(),
            u.cols(),
            system_dim * meter_dim
        )));
    }
    let (prep_eigs, prep_vecs) = prep.herm_eigen();
    let mut outcomes = Vec::new();
    let mut maps = Vec::new();
    for (value, effect) in effects {
        let (eff_eigs, eff_vecs) = effect.herm_eigen();
        let mut kraus = Vec::new();
        for (ki, &p) in prep_eigs.iter().enumerate() {
            if p < 1e-15 {
                continue;
            }
            let phi = prep_vecs.column(ki);
            for (li, &s) in eff_eigs.iter().enumerate() {
                if s < 1e-15 {
                    continue;
                }
                let v = eff_vecs.column(li);
                let weight = (s * p).sqrt();
                // K[i][j] = √(s·p) Σ_{m,m'} v*_m U[(i,m),(j,m')] φ_{m'}
                let k = CMatrix::from_fn(system_dim, system_dim, |i, j| {
                    let mut acc = Complex64::ZERO;
                    for m in 0..meter_dim {
                        for mp in 0..meter_dim {
                            acc += v[m].conj()
                                * u.get(i * meter_dim + m, j * meter_dim + mp)
                                * phi[mp];
                        }
                    }
                    acc * c(weight, 0.0)
                });
                kraus.push(k);
            }
        }
        outcomes.push(*value);
        maps.push(kraus);
    }
    Instrument::new(outcomes, maps)
}

/// Dichotomic weak measurement of Z with strength λ = sin θ, built from the
/// meter dilation: prepare the meter along ±x (by the sign), couple with the
/// ZZ rotation, rotate by X_{π/2} and read the meter in the computational
/// basis (bit 0 ↦ outcome +1).
pub fn weak_z_instrument(lambda: f64, sign: i8) -> Result<Instrument> {
    if !(-1.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda, "[-1, 1]"));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::BadSign(sign));
    }
    let theta = lambda.asin();
    let prep = {
        let y = rotation(&sigma_y(), f64::from(sign) * std::f64::consts::FRAC_PI_2)?;
        let zero = CMatrix::from_diagonal(&[c(1., 0.), c(0., 0.)]);
        &(&y * &zero) * &y.dagger()
    };
    // Coupling exp(−iθ(Z⊗Z)/2): with the meter along +x and a y-basis
    // readout this gives mean meter value +λ·⟨Z⟩.
    let coupling = rotation(&zz(), theta)?;
    let xp = rotation(&sigma_x(), std::f64::consts::FRAC_PI_2)?;
    let u = &CMatrix::identity(2).kron(&xp) * &coupling;
    let p0 = CMatrix::from_diagonal(&[c(1., 0.), c(0., 0.)]);
    let p1 = CMatrix::from_diagonal(&[c(0., 0.), c(1., 0.)]);
    meter_dilation(2, &prep, &u, &[(1.0, p0), (-1.0, p1)])
}

/// Closed form of one outcome map of the dichotomic Z instrument:
/// 2·K_s(z) = z·s·λ·Ẑ + 1 + (1 − √(1−λ²))·Z̃²/4.
pub fn weak_z_outcome_superop(lambda: f64, sign: i8, z: f64) -> SuperOp {
    let zhat = anticommutator_map(&sigma_z()).expect("Z is Hermitian");
    let ztilde = commutator_map(&sigma_z()).expect("Z is Hermitian");
    let disturbance = ztilde
        .compose(&ztilde)
        .scale((1.0 - (1.0 - lambda * lambda).sqrt()) / 4.0);
    SuperOp::identity(2)
        .add(&disturbance)
        .add(&zhat.scale(z * f64::from(sign) * lambda))
        .scale(0.5)
}

/// Contrast-averaged measurement map of the dichotomic Z instrument,
/// exactly λ·Ẑ at every strength.
pub fn contrast_kbar(lambda: f64) -> SuperOp {
    anticommutator_map(&sigma_z())
        .expect("Z is Hermitian")
        .scale(lambda)
}

/// Tr′[(1⊗G)·H]: contraction of the meter factor (the second, faster index)
/// of a system⊗meter operator with a meter operator G.
pub fn contract_meter(g: &CMatrix, h: &CMatrix, system_dim: usize, meter_dim: usize) -> CMatrix {
    assert_eq!(h.rows(), system_dim * meter_dim);
    assert_eq!(g.rows(), meter_dim);
    CMatrix::from_fn(system_dim, system_dim, |i, j| {
        let mut acc = Complex64::ZERO;
        for m in 0..meter_dim {
            for mp in 0..meter_dim {
                acc += g.get(m, mp) * h.get(i * meter_dim + mp, j * meter_dim + m);
            }
        }
        acc
    })
}

/// Extract the informative and responsive generators of a weak measurement
/// from the contrast operators (M̄, P̄ on the meter) and the coupling H on
/// system⊗meter: A = i·Tr′([M̄,P̄]·H), A′ = Tr′({M̄,P̄}·H)/2.
pub fn decompose_weak(mbar: &CMatrix, pbar: &CMatrix, h: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    for (name, m) in [("M", mbar), ("P", pbar), ("H", h)] {
        let res = m.hermiticity_residual();
        if res > consts::INVOLUTION_TOL {
            return Err(Error::InvalidArg(format!(
                "{name} operator not Hermitian (residual {res:.3e})"
            )));
        }
    }
    let meter_dim = mbar.rows();
    if pbar.rows() != meter_dim || !h.rows().is_multiple_of(meter_dim) {
        return Err(Error::DimensionMismatch(format!(
            "meter dim {meter_dim} does not divide joint dim {}",
            h.rows()
        )));
    }
    let system_dim = h.rows() / meter_dim;
    let comm = mbar.commutator(pbar);
    let anti = mbar.anticommutator(pbar);
    let a = contract_meter(&comm, h, system_dim, meter_dim).scale(c(0.0, 1.0));
    let aprime = contract_meter(&anti, h, system_dim, meter_dim).scale_re(0.5);
    Ok((a, aprime))
}

/// Classification of a weak measurement from its contrast operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementClass {
    Informative,
    Responsive,
    Mixed,
    Null,
}

/// Informative iff the anticommutator of the contrast operators vanishes
/// (while the commutator does not); responsive in the opposite case.
/// The norm is the largest singular value.
pub fn classify_measurement(mbar: &CMatrix, pbar: &CMatrix, tol: f64) -> MeasurementClass {
    let anti = mbar.anticommutator(pbar).spectral_norm();
    let comm = mbar.commutator(pbar).scale(c(0.0, 1.0)).spectral_norm();
    match (anti < tol, comm < tol) {
        (true, true) => MeasurementClass::Null,
        (true, false) => MeasurementClass::Informative,
        (false, true) => MeasurementClass::Responsive,
        (false, false) => MeasurementClass::Mixed,
    }
}

/// Weak-limit slopes of the averages and the cross-correlation of two
/// meters coupled by H.
#[derive(Clone, Copy, Debug)]
pub struct WeakSlopes {
    pub da: f64,
    pub db: f64,
    pub dab: f64,
}

/// Numerically extrapolated limits ⟨a⟩/λ, ⟨b⟩/λ, ⟨ab⟩/λ as λ→0 under the
/// joint evolution exp(−iλH) of two subsystems prepared in P̄_A⊗P̄_B and
/// read by M̄_A, M̄_B.  Two-point Richardson over the two smallest couplings.
pub fn theorem1_limits(
    mbar_a: &CMatrix,
    pbar_a: &CMatrix,
    mbar_b: &CMatrix,
    pbar_b: &CMatrix,
    h: &CMatrix,
    lambdas: &[f64],
) -> Result<WeakSlopes> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArg("need at least one coupling value".into()));
    }
    for &l in lambdas {
        if l <= 0.0 || l > consts::WEAK_LAMBDA_MAX {
            return Err(Error::LambdaOutOfRange(l, "(0, 0.3]"));
        }
    }
    let da = mbar_a.rows();
    let db_dim = mbar_b.rows();
    if h.rows() != da * db_dim {
        return Err(Error::DimensionMismatch(format!(
            "H is {}x{}, want {}",
            h.rows(),
            h.cols(),
            da * db_dim
        )));
    }
    let joint_p = pbar_a.kron(pbar_b);
    let obs_a = mbar_a.kron(&CMatrix::identity(db_dim));
    let obs_b = CMatrix::identity(da).kron(mbar_b);
    let obs_ab = mbar_a.kron(mbar_b);

    let bias = |obs: &CMatrix| (obs * &joint_p).trace().re;
    let value = |obs: &CMatrix, l: f64| -> Result<f64> {
        let u = evolution(h, l)?;
        let evolved = &(&u * &joint_p) * &u.dagger();
        Ok((obs * &evolved).trace().re)
    };

    let mut sorted: Vec<f64> = lambdas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let slope = |obs: &CMatrix| -> Result<f64> {
        let b0 = bias(obs);
        if sorted.len() == 1 {
            let l = sorted[0];
            return Ok((value(obs, l)? - b0) / l);
        }
        // General-spacing two-point Richardson, cancels the O(λ) term of f(λ) = ⟨·⟩_λ/λ.
        let (l2, l1) = (sorted[0], sorted[1]);
        let f1 = (value(obs, l1)? - b0) / l1;
        let f2 = (value(obs, l2)? - b0) / l2;
        Ok((l1 * f2 - l2 * f1) / (l1 - l2))
    };

    Ok(WeakSlopes {
        da: slope(&obs_a)?,
        db: slope(&obs_b)?,
        dab: slope(&obs_ab)?,
    })
}
