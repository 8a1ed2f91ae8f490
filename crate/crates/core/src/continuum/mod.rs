//! Continuum counterparts: conditioned position/momentum moments of a 1-D
//! wavefunction, the two-Gaussian superposition, its phase-space
//! quasiprobability, and the oscillator-eigenstate non-violation check.
//!
//! Dimensionless units with ħ = 1 throughout.

mod classical;

pub use classical::{
    classical_decompose, classical_noninvasive_demo, classical_responsive_ratio,
    responsive_meter_mc, MeterFunction, PhaseGrid, ResponsiveMcResult,
};

use num_complex::Complex64;

use crate::consts;
use crate::error::{Error, Result};

/// Uniformly sampled complex wavefunction on [−L, L].
#[derive(Clone, Debug)]
pub struct WaveFunction1D {
    xs: Vec<f64>,
    values: Vec<Complex64>,
    dx: f64,
}

/// Default position grid: 4096 points on [−12, 12].
pub fn default_grid() -> Vec<f64> {
    grid(consts::GRID_HALF_WIDTH, consts::GRID_POINTS)
}

pub fn grid(half_width: f64, points: usize) -> Vec<f64> {
    let dx = 2.0 * half_width / (points - 1) as f64;
    (0..points).map(|i| -half_width + dx * i as f64).collect()
}

impl WaveFunction1D {
    /// Sample a function on the grid and normalize by the trapezoid rule.
    pub fn from_fn(xs: Vec<f64>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if xs.len() < 16 {
            return Err(Error::Grid("need at least 16 grid points".into()));
        }
        let dx = xs[1] - xs[0];
        let mut values: Vec<Complex64> = xs.iter().map(|&x| f(x)).collect();
        let norm2 = trapezoid(&values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>(), dx);
        if norm2 <= 0.0 {
            return Err(Error::Grid("wavefunction has zero norm".into()));
        }
        let scale = Complex64::new(1.0 / norm2.sqrt(), 0.0);
        for v in values.iter_mut() {
            *v *= scale;
        }
        Ok(Self { xs, values, dx })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn norm_squared(&self) -> f64 {
        trapezoid(
            &self.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>(),
            self.dx,
        )
    }

    /// Index of the grid node nearest to `z`; error when `z` is outside
    /// the interior needed for five-point stencils.
    pub fn interior_index(&self, z: f64) -> Result<usize> {
        let (lo, hi) = (self.xs[0], *self.xs.last().unwrap());
        if z < lo || z > hi {
            return Err(Error::Grid(format!(
                "z = {z} outside the grid [{lo}, {hi}]"
            )));
        }
        let idx = ((z - lo) / self.dx).round() as usize;
        let idx = idx.min(self.xs.len() - 1);
        if idx < 2 || idx + 2 >= self.xs.len() {
            return Err(Error::Grid(format!("z = {z} too close to the grid edge")));
        }
        Ok(idx)
    }

    /// Polar decomposition ψ = e^{α+iβ} with the phase unwrapped along the
    /// grid; α is −∞-like (ln of a tiny floor) where |ψ| underflows.
    pub fn log_amplitude(&self) -> LogAmplitude {
        let mut alpha = Vec::with_capacity(self.values.len());
        let mut beta = Vec::with_capacity(self.values.len());
        let mut prev_phase = 0.0f64;
        for v in &self.values {
            let r = v.norm();
            alpha.push(r.max(1e-300).ln());
            let mut phase = if r > 1e-12 { v.arg() } else { prev_phase };
            while phase - prev_phase > std::f64::consts::PI {
                phase -= 2.0 * std::f64::consts::PI;
            }
            while prev_phase - phase > std::f64::consts::PI {
                phase += 2.0 * std::f64::consts::PI;
            }
            beta.push(phase);
            prev_phase = phase;
        }
        LogAmplitude { alpha, beta }
    }
}

/// Log-amplitude and unwrapped phase of a wavefunction on its grid.
#[derive(Clone, Debug)]
pub struct LogAmplitude {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    dx * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Five-point first derivative at index i (fourth-order accurate).
pub fn stencil_first(values: &[f64], i: usize, dx: f64) -> f64 {
    (-values[i + 2] + 8.0 * values[i + 1] - 8.0 * values[i - 1] + values[i - 2]) / (12.0 * dx)
}

/// Five-point second derivative at index i (fourth-order accurate).
pub fn stencil_second(values: &[f64], i: usize, dx: f64) -> f64 {
    (-values[i + 2] + 16.0 * values[i + 1] - 30.0 * values[i] + 16.0 * values[i - 1]
        - values[i - 2])
        / (12.0 * dx * dx)
}

/// Conditioned moments of the momentum readouts at the point x = z:
/// ⟨C⟩, ⟨C·Q̂⟩ and ⟨C·Q̂²⟩ for C the position projection at z.
#[derive(Clone, Copy, Debug)]
pub struct PointMoments {
    pub c: f64,
    pub cq: f64,
    pub cq2: f64,
}

/// Moments through the polar form: ⟨C⟩ = e^{2α}, ⟨CQ̂⟩ = β′e^{2α},
/// ⟨CQ̂²⟩ = (β′² − α″/2)·e^{2α}, with five-point stencils at z.
pub fn quantum_pm_moments(psi: &WaveFunction1D, z: f64) -> Result<PointMoments> {
    let i = psi.interior_index(z)?;
    let la = psi.log_amplitude();
    let alpha = la.alpha[i];
    let beta_p = stencil_first(&la.beta, i, psi.dx);
    let alpha_pp = stencil_second(&la.alpha, i, psi.dx);
    let c = (2.0 * alpha).exp();
    Ok(PointMoments {
        c,
        cq: beta_p * c,
        cq2: (beta_p * beta_p - alpha_pp / 2.0) * c,
    })
}

/// The same moments from derivatives of the complex wavefunction:
/// ⟨C⟩ = |ψ|², ⟨CQ̂⟩ = Im(ψ′ψ̄), ⟨CQ̂²⟩ = (|ψ′|² − Re(ψ″ψ̄))/2.
pub fn quantum_pm_moments_direct(psi: &WaveFunction1D, z: f64) -> Result<PointMoments> {
    let i = psi.interior_index(z)?;
    let re: Vec<f64> = psi.values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = psi.values.iter().map(|v| v.im).collect();
    let v = psi.values[i];
    let d1 = Complex64::new(stencil_first(&re, i, psi.dx), stencil_first(&im, i, psi.dx));
    let d2 = Complex64::new(
        stencil_second(&re, i, psi.dx),
        stencil_second(&im, i, psi.dx),
    );
    Ok(PointMoments {
        c: v.norm_sqr(),
        cq: (d1 * v.conj()).im,
        cq2: (d1.norm_sqr() - (d2 * v.conj()).re) / 2.0,
    })
}

/// Normalized superposition of two Gaussians displaced by ±a.
pub fn cat_wavefunction(a: f64, xs: Vec<f64>) -> Result<WaveFunction1D> {
    WaveFunction1D::from_fn(xs, move |x| {
        let val = (-(x - a).powi(2) / 2.0).exp() + (-(x + a).powi(2) / 2.0).exp();
        Complex64::new(val, 0.0)
    })
}

/// Closed-form α″(x) = a²·sech²(ax) − 1 of the two-Gaussian state.
pub fn cat_alpha_second(a: f64, x: f64) -> f64 {
    let sech = 1.0 / (a * x).cosh();
    a * a * sech * sech - 1.0
}

/// Closed-form phase-space quasiprobability of the two-Gaussian state:
/// π·W(x,q) = e^{−x²−q²}·(e^{−a²}cosh(2ax) + cos(2aq))/(1 + e^{−a²}).
pub fn wigner_cat(x: f64, q: f64, a: f64) -> f64 {
    let ea = (-a * a).exp();
    (-(x * x) - q * q).exp() * (ea * (2.0 * a * x).cosh() + (2.0 * a * q).cos())
        / (std::f64::consts::PI * (1.0 + ea))
}

/// Conditional second momentum moment at x = 0 of the quasiprobability:
/// ⟨δ(x)q²⟩/⟨δ(x)⟩ = (1 − a²)/2 = −α″(0)/2.
pub fn wigner_conditional_ratio(a: f64) -> f64 {
    (1.0 - a * a) / 2.0
}

/// Value of the (physicists') Hermite polynomial by the three-term
/// recurrence H₀ = 1, H₁ = 2x, Hₙ₊₁ = 2xHₙ − 2nHₙ₋₁.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut h_prev = 1.0;
    if n == 0 {
        return h_prev;
    }
    let mut h = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * h - 2.0 * k as f64 * h_prev;
        h_prev = h;
        h = next;
    }
    h
}

/// Result of the oscillator-eigenstate scan.
#[derive(Clone, Copy, Debug)]
pub struct FockCheck {
    pub max_alpha_second: f64,
    pub violates: bool,
    pub points_used: usize,
}

/// Scan α″ = H″ₙ/Hₙ − (H′ₙ/Hₙ)² − 1 of the n-th oscillator eigenstate
/// over the grid, skipping points within 1e-6 of a polynomial zero
/// (detected as |Hₙ| < 1e-6·|H′ₙ|).  The amplitude is log-concave, so the
/// flag stays false for every n.
pub fn fock_check(n: usize, xs: &[f64]) -> Result<FockCheck> {
    if n > 12 {
        return Err(Error::InvalidArg(format!(
            "oscillator index {n} exceeds 12"
        )));
    }
    let mut max_as = f64::NEG_INFINITY;
    let mut used = 0usize;
    for &x in xs {
        let h = hermite(n, x);
        let h1 = if n >= 1 {
            2.0 * n as f64 * hermite(n - 1, x)
        } else {
            0.0
        };
        let h2 = if n >= 2 {
            4.0 * (n * (n - 1)) as f64 * hermite(n - 2, x)
        } else {
            0.0
        };
        if h.abs() < 1e-6 * h1.abs().max(1.0) {
            continue;
        }
        let alpha_second = h2 / h - (h1 / h).powi(2) - 1.0;
        max_as = max_as.max(alpha_second);
        used += 1;
    }
    if used == 0 {
        return Err(Error::Grid(
            "every grid point sat on a polynomial zero".into(),
        ));
    }
    Ok(FockCheck {
        max_alpha_second: max_as,
        violates: max_as > 1e-9,
        points_used: used,
    })
}

/// The conditioned-moment inequality is violated quantum mechanically when
/// the log-amplitude is convex at the conditioning point.
pub fn quantum_violation(alpha_second: f64) -> bool {
    alpha_second > 1e-9
}

/// The classical responsive scheme violates the bound when the
/// log-density is concave at the conditioning point.
pub fn classical_responsive_violation(alpha_second: f64) -> bool {
    alpha_second < -1e-9
}
