//! Deterministic synthetic counts built from target moments, with optional
//! per-repetition wander of the signal.  Used to reconstruct published
//! hardware statistics as analysis fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::protocol::Order;
use crate::sampler::{CountsMeta, CountsRun, CountsTable};
use crate::FORMAT_VERSION;

/// Target contrast moments (absolute values, not λ-scaled ratios).
#[derive(Clone, Copy, Debug, Default)]
pub struct MomentTargets {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub ab: f64,
    pub ac: f64,
    pub bc: f64,
    pub abc: f64,
}

/// Standard deviation of the pooled estimate contributed by per-circuit
/// wander of each moment; zero disables the wander for that quantity.
pub type DriftSpec = MomentTargets;

#[allow(clippy::needless_range_loop)]
pub(crate) fn joint_from_moments(m: &MomentTargets) -> Result<[f64; 8]> {
    let mut p = [0.0f64; 8];
    for idx in 0..8 {
        let za = if idx & 4 == 0 { 1.0 } else { -1.0 };
        let zb = if idx & 2 == 0 { 1.0 } else { -1.0 };
        let cv = idx & 1 == 0;
        p[idx] = if cv {
            (m.c + za * m.ac + zb * m.bc + za * zb * m.abc) / 4.0
        } else {
            ((1.0 - m.c) + za * (m.a - m.ac) + zb * (m.b - m.bc) + za * zb * (m.ab - m.abc)) / 4.0
        };
        if p[idx] < 0.0 {
            return Err(Error::InvalidArg(format!(
                "moment targets give a negative probability ({}) at cell {idx}",
                p[idx]
            )));
        }
    }
    Ok(p)
}

/// Largest-remainder rounding of S·p to integers summing exactly to S.
fn rounded_counts(p: &[f64; 8], shots: u64) -> [u64; 8] {
    let mut out = [0u64; 8];
    let mut fractional: Vec<(usize, f64)> = Vec::with_capacity(8);
    let mut assigned = 0u64;
    for i in 0..8 {
        let exact = p[i] * shots as f64;
        let floor = exact.floor();
        out[i] = floor as u64;
        assigned += out[i];
        fractional.push((i, exact - floor));
    }
    // Distribute the remainder to the largest fractional parts.
    let mut rem = shots - assigned;
    fractional.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut k = 0;
    while rem > 0 {
        out[fractional[k % 8].0] += 1;
        rem -= 1;
        k += 1;
    }
    out
}

/// Normal draws recentred to exact zero mean and rescaled to an exact
/// sample standard deviation.
fn centered_drifts(rng: &mut ChaCha12Rng, n: usize, sd: f64) -> Vec<f64> {
    if sd == 0.0 || n < 2 {
        return vec![0.0; n];
    }
    let mut d: Vec<f64> = (0..n)
        .map(|_| {
            // Box–Muller from two uniform draws.
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    for v in d.iter_mut() {
        *v -= mean;
    }
    let var = d.iter().map(|v| v * v).sum::<f64>() / (n as f64 - 1.0);
    let scale = sd / var.sqrt();
    for v in d.iter_mut() {
        *v *= scale;
    }
    d
}

/// Build a counts table whose pooled contrast estimates equal `targets`
/// (up to 1/shots rounding) and whose run-to-run scatter contributes the
/// requested `drift` standard deviations to the pooled estimates.
///
/// The wander sits inside the signed part of each setting's moments, so it
/// survives the contrast combination exactly like a physical drift of the
/// signal; the per-circuit standard deviation is drift·√(4R) because the
/// pooled estimate averages 4R independent circuits.
#[allow(clippy::too_many_arguments)]
pub fn drifted_counts(
    psi: f64,
    theta: f64,
    order: Order,
    shots: u64,
    reps: u32,
    seed: u64,
    targets: &MomentTargets,
    drift: &DriftSpec,
) -> Result<CountsTable> {
    if shots == 0 || reps == 0 {
        return Err(Error::ZeroShots);
    }
    let settings: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
    let n_circ = reps as usize * 4;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let per_circuit_sd = |pooled_sd: f64| pooled_sd * (n_circ as f64).sqrt();
    let d_c = centered_drifts(&mut rng, n_circ, per_circuit_sd(drift.c));
    let d_a = centered_drifts(&mut rng, n_circ, per_circuit_sd(drift.a));
    let d_b = centered_drifts(&mut rng, n_circ, per_circuit_sd(drift.b));
    let d_ab = centered_drifts(&mut rng, n_circ, per_circuit_sd(drift.ab));
    let d_ac = centered_drifts(&mut rng, n_circ, per_circuit_sd(drift.ac));
    let d_bc = centered_drifts(&mut rng, n_circ, per_circuit_sd(drift.bc));
    let d_abc = centered_drifts(&mut rng, n_circ, per_circuit_sd(drift.abc));

    let mut runs = Vec::with_capacity(n_circ);
    for rep in 0..reps as usize {
        for (si, &(sa, sb)) in settings.iter().enumerate() {
            let k = rep * 4 + si;
            let (wa, wb) = (f64::from(sa), f64::from(sb));
            let m = MomentTargets {
                c: targets.c + d_c[k],
                a: wa * (targets.a + d_a[k]),
                b: wb * (targets.b + d_b[k]),
                ab: wa * wb * (targets.ab + d_ab[k]),
                ac: wa * (targets.ac + d_ac[k]),
                bc: wb * (targets.bc + d_bc[k]),
                abc: wa * wb * (targets.abc + d_abc[k]),
            };
            let p = joint_from_moments(&m)?;
            let hist = rounded_counts(&p, shots);
            runs.push(CountsRun {
                sign_a: sa,
                sign_b: sb,
                counts: (0..8).map(|i| (format!("{i:03b}"), hist[i])).collect(),
            });
        }
    }
    // Shuffle the execution order, as hardware schedules do.
    for i in (1..runs.len()).rev() {
        let j = rng.gen_range(0..=i);
        runs.swap(i, j);
    }
    Ok(CountsTable {
        version: FORMAT_VERSION.to_string(),
        meta: CountsMeta {
            psi,
            theta,
            order,
            shots,
            source: "ingested".to_string(),
            seed: Some(seed),
        },
        runs,
    })
}

/// Published single-set trapped-ion reference statistics for the two
/// measurement orders at ψ = π/4, θ = 0.1 (λ-scaled values and their
/// quoted errors), reconstructed as synthetic counts: 1 job, 100000 shots,
/// 25 repetitions.
pub fn reference_fixture(order: Order) -> CountsTable {
    let theta = 0.1f64;
    let l = theta.sin();
    let l2 = l * l;
    // (value, error) rows: abc/λ², ab/λ², ac/λ, bc/λ, a/λ, b/λ, c.
    let (abc, ab, ac, bc, a, b, cc) = match order {
        Order::AB => (
            (0.829, 0.023),
            (1.117, 0.032),
            (-0.744, 0.002),
            (-0.717, 0.002),
            (-0.752, 0.003),
            (-0.719, 0.003),
            (0.507, 0.0002),
        ),
        Order::BA => (
            (0.824, 0.023),
            (1.136, 0.032),
            (-0.742, 0.002),
            (-0.725, 0.002),
            (-0.744, 0.003),
            (-0.727, 0.003),
            (0.507, 0.0002),
        ),
    };
    let targets = MomentTargets {
        c: cc.0,
        a: a.0 * l,
        b: b.0 * l,
        ab: ab.0 * l2,
        ac: ac.0 * l,
        bc: bc.0 * l,
        abc: abc.0 * l2,
    };
    let drift = DriftSpec {
        c: cc.1,
        a: a.1 * l,
        b: b.1 * l,
        ab: ab.1 * l2,
        ac: ac.1 * l,
        bc: bc.1 * l,
        abc: abc.1 * l2,
    };
    let seed = match order {
        Order::AB => 1216,
        Order::BA => 1217,
    };
    drifted_counts(
        std::f64::consts::FRAC_PI_4,
        theta,
        order,
        100_000,
        25,
        seed,
        &targets,
        &drift,
    )
    .expect("reference targets are feasible")
}
