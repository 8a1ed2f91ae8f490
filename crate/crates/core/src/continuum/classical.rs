//! Classical phase-space measurements: the informative/responsive split of
//! a meter coupling by quadrature, the exactly noninvasive point-meter
//! scheme, and the responsive readout that beats the bound classically.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Uniform rectangular grid over the meter phase space (x̄, q̄).
#[derive(Clone, Debug)]
pub struct PhaseGrid {
    pub half_width: f64,
    pub points: usize,
}

impl PhaseGrid {
    pub fn new(half_width: f64, points: usize) -> Self {
        Self { half_width, points }
    }

    pub fn coords(&self) -> Vec<f64> {
        let d = 2.0 * self.half_width / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| -self.half_width + d * i as f64)
            .collect()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }
}

/// A real function sampled on a phase grid, row-major over (x̄, q̄).
#[derive(Clone, Debug)]
pub struct MeterFunction {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl MeterFunction {
    pub fn from_fn(grid: &PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let xs = grid.coords();
        let mut values = Vec::with_capacity(xs.len() * xs.len());
        for &x in &xs {
            for &q in &xs {
                values.push(f(x, q));
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.points + j]
    }

    /// Central-difference gradient (∂x̄, ∂q̄) at an interior node.
    fn gradient(&self, i: usize, j: usize) -> (f64, f64) {
        let d = self.grid.spacing();
        let dx = (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * d);
        let dq = (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * d);
        (dx, dq)
    }
}

/// Split a coupling H = Σ_t m_t(x̄,q̄)·A_t(system) into its informative and
/// responsive system coefficients:
/// A = Σ_t [∫(P̄,M̄)·m_t dx̄dq̄]·A_t and A′ = Σ_t [∫M̄·P̄·m_t dx̄dq̄]·A_t,
/// with the bracket taken in the meter phase space.  Returns the two
/// coefficient lists aligned with `h_meter_factors`.
pub fn classical_decompose(
    mbar: &MeterFunction,
    pbar: &MeterFunction,
    h_meter_factors: &[MeterFunction],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = mbar.grid.points;
    if pbar.grid.points != n || h_meter_factors.iter().any(|m| m.grid.points != n) {
        return Err(Error::DimensionMismatch("meter grids differ".into()));
    }
    let d = mbar.grid.spacing();
    let cell = d * d;
    let mut informative = vec![0.0; h_meter_factors.len()];
    let mut responsive = vec![0.0; h_meter_factors.len()];
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let (px, pq) = pbar.gradient(i, j);
            let (mx, mq) = mbar.gradient(i, j);
            let bracket = px * mq - pq * mx;
            let product = mbar.at(i, j) * pbar.at(i, j);
            for (t, factor) in h_meter_factors.iter().enumerate() {
                let m = factor.at(i, j);
                informative[t] += bracket * m * cell;
                responsive[t] += product * m * cell;
            }
        }
    }
    Ok((informative, responsive))
}

/// Pair (α′², α′² + α″) of the classical responsive bound at z, by
/// five-point stencils on the log-density closure.  The bound fails
/// exactly when α″ < 0.
pub fn classical_responsive_ratio(alpha: impl Fn(f64) -> f64, z: f64) -> (f64, f64) {
    let h = 1e-3 * (1.0 + z.abs());
    let f: Vec<f64> = (-2..=2).map(|k| alpha(z + h * k as f64)).collect();
    let a1 = super::stencil_first(&f, 2, h);
    let a2 = super::stencil_second(&f, 2, h);
    (a1 * a1, a1 * a1 + a2)
}

/// Exactly noninvasive classical measurement: meter pinned at the phase
/// space origin, coupling H = q̄·A, readout a = x̄.  Along the flow q̄
/// stays zero, so the system point never moves and the readout equals
/// A(x, q) exactly.
pub fn classical_noninvasive_demo(
    a_fn: impl Fn(f64, f64) -> f64,
    system_samples: &[(f64, f64)],
) -> (Vec<f64>, Vec<(f64, f64)>) {
    let mut readouts = Vec::with_capacity(system_samples.len());
    let mut post = Vec::with_capacity(system_samples.len());
    for &(x, q) in system_samples {
        // Flow equations: dx̄/dλ = A(x,q), dq̄/dλ = −q̄·∂A, dx/dλ = q̄·∂A/∂q,
        // dq/dλ = −q̄·∂A/∂x; with q̄(0) = 0 they integrate exactly.
        let readout = a_fn(x, q);
        readouts.push(readout);
        post.push((x, q));
    }
    (readouts, post)
}

/// Monte-Carlo estimate of the conditioned readout statistics of the
/// responsive scheme: Gaussian meters read by their position, coupling
/// H = 2x̄·q, conditioning on the final position inside a bin at z.
#[derive(Clone, Copy, Debug)]
pub struct ResponsiveMcResult {
    /// ⟨a|c⟩ and ⟨b|c⟩.
    pub mean_a: f64,
    pub mean_b: f64,
    /// ⟨ab|c⟩ and its standard error.
    pub mean_ab: f64,
    pub se_ab: f64,
    pub n_conditioned: usize,
}

/// Sample the two-meter responsive protocol on a Gaussian system state
/// ρ = e^{−x²−q²}/π.  Each meter displaces the system position by 2λx̄
/// while its own readout x̄ stays untouched.
pub fn responsive_meter_mc(
    lambda: f64,
    z: f64,
    bin: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ResponsiveMcResult> {
    if n_samples < 1000 {
        return Err(Error::InvalidArg("need at least 1000 samples".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let system = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
    let meter = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
    let mut n_c = 0usize;
    let (mut sa, mut sb, mut sab, mut sab2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n_samples {
        let x0 = system.sample(&mut rng);
        let _q0: f64 = system.sample(&mut rng);
        let a = meter.sample(&mut rng);
        let b = meter.sample(&mut rng);
        let x_final = x0 + 2.0 * lambda * (a + b);
        if (x_final - z).abs() < bin / 2.0 {
            n_c += 1;
            sa += a;
            sb += b;
            sab += a * b;
            sab2 += (a * b) * (a * b);
        }
    }
    if n_c < 100 {
        return Err(Error::DegenerateCondition(n_samples));
    }
    let n = n_c as f64;
    let mean_ab = sab / n;
    let var_ab = (sab2 / n - mean_ab * mean_ab).max(0.0);
    Ok(ResponsiveMcResult {
        mean_a: sa / n,
        mean_b: sb / n,
        mean_ab,
        se_ab: (var_ab / n).sqrt(),
        n_conditioned: n_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_meter(grid: &PhaseGrid) -> MeterFunction {
        MeterFunction::from_fn(grid, |x, q| (-(x * x) - q * q).exp() / std::f64::consts::PI)
    }

    #[test]
    fn position_readout_with_position_coupling_is_responsive() {
        // P̄ Gaussian, H = 2x̄·A′₀, M̄ = x̄: A = 0 and A′ = A′₀.
        let grid = PhaseGrid::new(6.0, 301);
        let pbar = gaussian_meter(&grid);
        let mbar = MeterFunction::from_fn(&grid, |x, _| x);
        let h = [MeterFunction::from_fn(&grid, |x, _| 2.0 * x)];
        let (a, ap) = classical_decompose(&mbar, &pbar, &h).unwrap();
        assert!(a[0].abs() < 1e-8, "informative part {}", a[0]);
        assert!((ap[0] - 1.0).abs() < 1e-6, "responsive part {}", ap[0]);
    }

    #[test]
    fn momentum_readout_makes_the_same_coupling_informative() {
        let grid = PhaseGrid::new(6.0, 301);
        let pbar = gaussian_meter(&grid);
        let mbar = MeterFunction::from_fn(&grid, |_, q| q);
        let h = [MeterFunction::from_fn(&grid, |x, _| 2.0 * x)];
        let (a, ap) = classical_decompose(&mbar, &pbar, &h).unwrap();
        assert!(a[0].abs() > 0.5, "informative part {}", a[0]);
        assert!(ap[0].abs() < 1e-8, "responsive part {}", ap[0]);
    }

    #[test]
    fn zero_coupling_decomposes_to_zero() {
        let grid = PhaseGrid::new(5.0, 201);
        let pbar = gaussian_meter(&grid);
        let mbar = MeterFunction::from_fn(&grid, |x, _| x);
        let h = [MeterFunction::from_fn(&grid, |_, _| 0.0)];
        let (a, ap) = classical_decompose(&mbar, &pbar, &h).unwrap();
        assert_eq!(a[0], 0.0);
        assert_eq!(ap[0], 0.0);
    }

    #[test]
    fn gaussian_log_density_violates_the_responsive_bound() {
        // x-marginal of e^{−x²−q²}/π: α(x) = −x² − ln√π, α″ = −2.
        let alpha = |x: f64| -x * x - std::f64::consts::PI.sqrt().ln();
        let (lhs, rhs) = classical_responsive_ratio(alpha, 0.0);
        assert!(lhs.abs() < 1e-10);
        assert!((rhs + 2.0).abs() < 1e-8);
        assert!(lhs > rhs, "bound violated: {lhs} > {rhs}");
    }

    #[test]
    fn log_convex_density_satisfies_the_bound() {
        let alpha = |x: f64| x * x * 0.5 - 3.0;
        let (lhs, rhs) = classical_responsive_ratio(alpha, 0.4);
        assert!(lhs <= rhs);
    }

    #[test]
    fn responsive_mc_matches_the_log_density_prediction() {
        // At z = 0 on the Gaussian state: ⟨a|c⟩ → 0 and ⟨ab|c⟩ → λ²·α″
        // with α″ = −2 (β-like first-order terms vanish by symmetry).
        let lambda = 0.15;
        let mc = responsive_meter_mc(lambda, 0.0, 0.1, 400_000, 99).unwrap();
        let predicted = lambda * lambda * (-2.0);
        let tol = 3.0 * mc.se_ab + 2e-3;
        assert!(
            (mc.mean_ab - predicted).abs() < tol,
            "⟨ab|c⟩ = {} vs {predicted} (tol {tol}, n = {})",
            mc.mean_ab,
            mc.n_conditioned
        );
        assert!(mc.mean_a.abs() < 0.02);
        // The classical bound fails: ⟨a+b|c⟩²/4 ≥ 0 > ⟨ab|c⟩.
        let lhs = (mc.mean_a + mc.mean_b).powi(2) / 4.0;
        assert!(lhs > mc.mean_ab);
    }

    #[test]
    fn point_meter_reads_exactly_without_disturbance() {
        let a_fn = |x: f64, q: f64| x + 0.3 * q * q;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let samples: Vec<(f64, f64)> = (0..2000)
            .map(|_| (normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        let (readouts, post) = classical_noninvasive_demo(a_fn, &samples);
        for ((x, q), r) in samples.iter().zip(&readouts) {
            assert_eq!(*r, a_fn(*x, *q));
        }
        // Position readout special case.
        let (xs_read, _) = classical_noninvasive_demo(|x, _| x, &samples);
        for ((x, _), r) in samples.iter().zip(&xs_read) {
            assert_eq!(*r, *x);
        }
        // Repeated measurement returns the same value.
        let (again, _) = classical_noninvasive_demo(a_fn, &post);
        assert_eq!(readouts, again);
        // Two-sample check: the system marginal is untouched (the
        // empirical CDF distance is exactly zero).
        let mut before: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let mut after: Vec<f64> = post.iter().map(|s| s.0).collect();
        before.sort_by(|a, b| a.partial_cmp(b).unwrap());
        after.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let ks = before
            .iter()
            .zip(&after)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert_eq!(ks, 0.0);
    }
}
