//! The three-qubit protocol: two weak meters reading Z on the same system
//! qubit followed by a conditioning measurement, its exact evaluation, the
//! inequality ratio and (ψ, λ) sweeps.
//!
//! Register layout: qubit 0 = meter a, qubit 1 = meter b, qubit 2 = system,
//! matching the a,b,c order of outcome bitstrings.  Meter bit 0 maps to
//! outcome +1, system bit 0 means the condition was met (c = 1).

mod classical;

pub use classical::{
    classical_baseline, random_scenario, BaselineEstimate, ClassicalScenario, Condition, NoiseDist,
    ZDist,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consts;
use crate::error::{Error, Result};
use crate::imperfect::{meter_components, NoiseParams};
use crate::qcore::{rotation, sigma_y, zz, CMatrix, DensityState};

/// Time order of the two weak measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    AB,
    BA,
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Order::AB => "AB",
            Order::BA => "BA",
        })
    }
}

/// One circuit of the protocol: angles, measurement order and the contrast
/// signs of the two meter preparations.
#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub psi: f64,
    pub theta: f64,
    pub order: Order,
    pub sign_a: i8,
    pub sign_b: i8,
    /// The coupling is always realized by the fractional ZZ gate.
    pub use_fractional_zz: bool,
    pub noise_a: Option<NoiseParams>,
    pub noise_b: Option<NoiseParams>,
}

impl ProtocolConfig {
    pub fn ideal(psi: f64, theta: f64, order: Order, sign_a: i8, sign_b: i8) -> Self {
        Self {
            psi,
            theta,
            order,
            sign_a,
            sign_b,
            use_fractional_zz: true,
            noise_a: None,
            noise_b: None,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.theta.sin()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..std::f64::consts::PI).contains(&self.psi) {
            return Err(Error::InvalidConfig(format!(
                "psi {} outside [0, π)",
                self.psi
            )));
        }
        if self.theta.abs() > std::f64::consts::FRAC_PI_2 + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "|theta| {} exceeds π/2",
                self.theta
            )));
        }
        if !self.use_fractional_zz {
            return Err(Error::InvalidConfig(
                "only the fractional ZZ coupling is supported".into(),
            ));
        }
        if self.sign_a.abs() != 1 || self.sign_b.abs() != 1 {
            return Err(Error::InvalidConfig("signs must be ±1".into()));
        }
        if let Some(n) = &self.noise_a {
            n.validate()?;
        }
        if let Some(n) = &self.noise_b {
            n.validate()?;
        }
        Ok(())
    }
}

/// Joint outcome distribution p(a, b, c) of one circuit, indexed by the
/// bits a,b,c from most to least significant.
#[derive(Clone, Copy, Debug)]
pub struct OutcomeDistribution {
    p: [f64; 8],
}

impl OutcomeDistribution {
    pub fn from_probs(p: [f64; 8]) -> Self {
        Self { p }
    }

    pub fn probs(&self) -> &[f64; 8] {
        &self.p
    }

    pub fn prob(&self, a_bit: usize, b_bit: usize, c_bit: usize) -> f64 {
        self.p[(a_bit << 2) | (b_bit << 1) | c_bit]
    }

    /// Plain per-setting expectation values with a,b ∈ {±1} (bit 0 ↦ +1)
    /// and c ∈ {0, 1} (bit 0 ↦ 1).
    pub fn moments(&self) -> SettingMoments {
        let mut m = SettingMoments::default();
        for idx in 0..8 {
            let p = self.p[idx];
            let za = if idx & 4 == 0 { 1.0 } else { -1.0 };
            let zb = if idx & 2 == 0 { 1.0 } else { -1.0 };
            let cv = if idx & 1 == 0 { 1.0 } else { 0.0 };
            m.c += p * cv;
            m.a += p * za;
            m.b += p * zb;
            m.ab += p * za * zb;
            m.ac += p * za * cv;
            m.bc += p * zb * cv;
            m.abc += p * za * zb * cv;
        }
        m
    }
}

/// Per-setting expectation values of one circuit.
#[derive(Clone, Copy, Debug, Default)]
pub struct SettingMoments {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub ab: f64,
    pub ac: f64,
    pub bc: f64,
    pub abc: f64,
}

/// Contrast-combined correlation values over the four sign settings.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExpectationSet {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub ac: f64,
    pub bc: f64,
    pub ab: f64,
    pub abc: f64,
}

/// Exactly evaluate one circuit of the protocol as a three-qubit density
/// simulation.
pub fn exact_expectations(cfg: &ProtocolConfig) -> Result<OutcomeDistribution> {
    cfg.validate()?;
    let meter_a = meter_components(cfg.sign_a, cfg.noise_a.as_ref())?;
    let meter_b = meter_components(cfg.sign_b, cfg.noise_b.as_ref())?;

    // System prepared in cos(ψ/2)|1⟩ + sin(ψ/2)|0⟩ by a Y rotation; the
    // same rotation applied again before readout maps the conditioning
    // state onto bit 0.
    let sys_gate = rotation(&sigma_y(), std::f64::consts::PI - cfg.psi)?;
    let zero = CMatrix::from_diagonal(&[Complex64::ONE, Complex64::ZERO]);
    let sys_prep = &(&sys_gate * &zero) * &sys_gate.dagger();

    let rho_a = DensityState::from_matrix(1, meter_a.prep.clone())
        .map_err(|e| Error::InvalidState(format!("meter a preparation: {e}")))?;
    let rho_b = DensityState::from_matrix(1, meter_b.prep.clone())?;
    let rho_s = DensityState::from_matrix(1, sys_prep)?;
    let mut rho = rho_a.tensor(&rho_b)?.tensor(&rho_s)?;

    let coupling = rotation(&zz(), cfg.theta)?;
    let couple_a = |state: DensityState| -> Result<DensityState> {
        let s = state.apply_unitary(&coupling, &[2, 0])?;
        s.apply_unitary(&meter_a.readout_rotation, &[0])
    };
    let couple_b = |state: DensityState| -> Result<DensityState> {
        let s = state.apply_unitary(&coupling, &[2, 1])?;
        s.apply_unitary(&meter_b.readout_rotation, &[1])
    };
    rho = match cfg.order {
        Order::AB => couple_b(couple_a(rho)?)?,
        Order::BA => couple_a(couple_b(rho)?)?,
    };
    rho = rho.apply_unitary(&sys_gate, &[2])?;

    let p0 = CMatrix::from_diagonal(&[Complex64::ONE, Complex64::ZERO]);
    let p1 = CMatrix::from_diagonal(&[Complex64::ZERO, Complex64::ONE]);
    let sys_effects = [p0, p1];
    let mut probs = [0.0f64; 8];
    for (idx, p) in probs.iter_mut().enumerate() {
        let ea = &meter_a.effects[(idx >> 2) & 1].1;
        let eb = &meter_b.effects[(idx >> 1) & 1].1;
        let ec = &sys_effects[idx & 1];
        let effect = ea.kron(eb).kron(ec);
        *p = rho.expectation(&effect).re;
    }
    let total: f64 = probs.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-12, "probabilities sum to {total}");
    debug_assert!(probs.iter().all(|&p| p > -1e-12));
    Ok(OutcomeDistribution::from_probs(probs))
}

/// The protocol family over the four sign settings.
#[derive(Clone, Debug)]
pub struct ContrastConfig {
    pub psi: f64,
    pub theta: f64,
    pub order: Order,
    pub noise_a: Option<NoiseParams>,
    pub noise_b: Option<NoiseParams>,
}

impl ContrastConfig {
    pub fn ideal(psi: f64, theta: f64, order: Order) -> Self {
        Self {
            psi,
            theta,
            order,
            noise_a: None,
            noise_b: None,
        }
    }

    pub fn setting(&self, sign_a: i8, sign_b: i8) -> ProtocolConfig {
        ProtocolConfig {
            psi: self.psi,
            theta: self.theta,
            order: self.order,
            sign_a,
            sign_b,
            use_fractional_zz: true,
            noise_a: self.noise_a,
            noise_b: self.noise_b,
        }
    }

    pub fn settings(&self) -> [ProtocolConfig; 4] {
        [
            self.setting(1, 1),
            self.setting(1, -1),
            self.setting(-1, 1),
            self.setting(-1, -1),
        ]
    }
}

/// Combine per-setting moments into contrast expectations: quantities
/// involving a (b) carry weight s_a (s_b), everything is averaged with
/// weight 1/4 over the four settings.
pub fn contrast_combine(settings: &[(i8, i8, SettingMoments)]) -> Result<ExpectationSet> {
    let mut seen = [false; 4];
    for &(sa, sb, _) in settings {
        if sa.abs() != 1 || sb.abs() != 1 {
            return Err(Error::InvalidConfig("signs must be ±1".into()));
        }
        let idx = ((sa < 0) as usize) << 1 | (sb < 0) as usize;
        if seen[idx] {
            return Err(Error::InconsistentMeta(format!(
                "sign setting ({sa:+}, {sb:+}) appears twice"
            )));
        }
        seen[idx] = true;
    }
    for (idx, &present) in seen.iter().enumerate() {
        if !present {
            return Err(Error::MissingSetting {
                sign_a: if idx & 2 == 0 { 1 } else { -1 },
                sign_b: if idx & 1 == 0 { 1 } else { -1 },
            });
        }
    }
    let mut e = ExpectationSet {
        c: 0.0,
        a: 0.0,
        b: 0.0,
        ac: 0.0,
        bc: 0.0,
        ab: 0.0,
        abc: 0.0,
    };
    for &(sa, sb, m) in settings {
        let (wa, wb) = (f64::from(sa), f64::from(sb));
        e.c += m.c / 4.0;
        e.a += wa * m.a / 4.0;
        e.b += wb * m.b / 4.0;
        e.ac += wa * m.ac / 4.0;
        e.bc += wb * m.bc / 4.0;
        e.ab += wa * wb * m.ab / 4.0;
        e.abc += wa * wb * m.abc / 4.0;
    }
    Ok(e)
}

/// Contrast expectations of the protocol from four exact circuit
/// evaluations.
pub fn contrast_expectations(cfg: &ContrastConfig) -> Result<ExpectationSet> {
    let mut per_setting = Vec::with_capacity(4);
    for setting in cfg.settings() {
        let dist = exact_expectations(&setting)?;
        per_setting.push((setting.sign_a, setting.sign_b, dist.moments()));
    }
    contrast_combine(&per_setting)
}

/// Leading-order expectations as λ→0, with a, b, ac, bc given per unit λ
/// and ab, abc per unit λ².
pub fn ideal_limit_expectations(psi: f64) -> ExpectationSet {
    let cp = psi.cos();
    ExpectationSet {
        c: cp * cp,
        a: -cp,
        b: -cp,
        ac: -cp,
        bc: -cp,
        ab: 1.0,
        abc: (1.0 + cp * cp) / 2.0,
    }
}

/// The inequality ratio and its ingredients.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ViolationReport {
    pub lhs: Option<f64>,
    pub indeterminate: bool,
    pub components: ExpectationSet,
    pub classical_bound: f64,
}

/// (ac + bc)² / (4·abc·c); flagged indeterminate when the denominator is
/// below tolerance or the conditioning probability vanishes.
pub fn violation_lhs(e: &ExpectationSet) -> ViolationReport {
    let denom = 4.0 * e.abc * e.c;
    let indeterminate = e.c <= 0.0 || denom.abs() < consts::INDETERMINATE_DENOM_TOL;
    let lhs = if indeterminate {
        None
    } else {
        Some((e.ac + e.bc).powi(2) / denom)
    };
    ViolationReport {
        lhs,
        indeterminate,
        components: *e,
        classical_bound: 1.0,
    }
}

/// One cell of a (ψ, λ) sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepRow {
    pub psi: f64,
    pub lambda: f64,
    pub lhs: Option<f64>,
    pub indeterminate: bool,
}

/// Evaluate the inequality ratio on a (ψ, λ) grid.  λ = 0 cells use the
/// analytic weak limit; others the exact three-qubit evaluation with
/// θ = asin λ.
pub fn sweep(psi_grid: &[f64], lambda_grid: &[f64]) -> Result<Vec<SweepRow>> {
    if psi_grid.is_empty() || lambda_grid.is_empty() {
        return Err(Error::InvalidArg("sweep grids must be nonempty".into()));
    }
    let cells: Vec<(f64, f64)> = psi_grid
        .iter()
        .flat_map(|&psi| lambda_grid.iter().map(move |&l| (psi, l)))
        .collect();
    cells
        .into_par_iter()
        .map(|(psi, lambda)| {
            let report = if lambda.abs() < 1e-15 {
                violation_lhs(&ideal_limit_expectations(psi))
            } else {
                if !(0.0..=1.0).contains(&lambda) {
                    return Err(Error::LambdaOutOfRange(lambda, "[0, 1]"));
                }
                let cfg = ContrastConfig::ideal(psi, lambda.asin(), Order::AB);
                violation_lhs(&contrast_expectations(&cfg)?)
            };
            Ok(SweepRow {
                psi,
                lambda,
                lhs: report.lhs,
                indeterminate: report.indeterminate,
            })
        })
        .collect()
}
