//! Monte-Carlo baseline: the inequality for classical noisy readouts of a
//! single underlying value, with optional contrast mixtures of detector
//! states.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};

/// Distribution of the underlying value z.
#[derive(Clone, Copy, Debug)]
pub enum ZDist {
    Constant(f64),
    /// ±1 with the given probability of +1.
    PlusMinus {
        p_plus: f64,
    },
    Gaussian {
        mean: f64,
        sd: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl ZDist {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            ZDist::Constant(v) => v,
            ZDist::PlusMinus { p_plus } => {
                if rng.gen_bool(p_plus) {
                    1.0
                } else {
                    -1.0
                }
            }
            ZDist::Gaussian { mean, sd } => Normal::new(mean, sd).unwrap().sample(rng),
            ZDist::Uniform { lo, hi } => Uniform::new(lo, hi).sample(rng),
        }
    }
}

/// Zero-mean readout noise added independently by each detector.
#[derive(Clone, Copy, Debug)]
pub enum NoiseDist {
    None,
    Gaussian { sd: f64 },
    Uniform { half_width: f64 },
}

impl NoiseDist {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            NoiseDist::None => 0.0,
            NoiseDist::Gaussian { sd } => Normal::new(0.0, sd).unwrap().sample(rng),
            NoiseDist::Uniform { half_width } => Uniform::new(-half_width, half_width).sample(rng),
        }
    }
}

/// The conditioning event; it may depend on z or be independent randomness,
/// never on the readout noises.
#[derive(Clone, Copy, Debug)]
pub enum Condition {
    Always,
    ZPositive,
    Window { lo: f64, hi: f64 },
    Random { p: f64 },
}

impl Condition {
    fn met(&self, z: f64, rng: &mut impl Rng) -> bool {
        match *self {
            Condition::Always => true,
            Condition::ZPositive => z > 0.0,
            Condition::Window { lo, hi } => z >= lo && z <= hi,
            Condition::Random { p } => rng.gen_bool(p),
        }
    }
}

/// A classical measurement scenario: readouts a = z + ξ_a, b = z + ξ_b with
/// unbiased independent noises, conditioned on c.  With `contrast` set, each
/// detector is a two-preparation mixture with weights ±1/2 reading ±z, and
/// the averages are combined exactly like the quantum contrast scheme.
#[derive(Clone, Copy, Debug)]
pub struct ClassicalScenario {
    pub z: ZDist,
    pub noise_a: NoiseDist,
    pub noise_b: NoiseDist,
    pub condition: Condition,
    pub contrast: bool,
}

/// Monte-Carlo estimate of the inequality ratio with a batch-means error.
#[derive(Clone, Copy, Debug)]
pub struct BaselineEstimate {
    pub lhs: f64,
    pub std_err: f64,
    pub n_conditioned: usize,
    pub n_samples: usize,
}

#[derive(Clone, Copy, Default)]
struct MomentSums {
    n: f64,
    c: f64,
    ac: f64,
    bc: f64,
    abc: f64,
}

impl MomentSums {
    fn record(&mut self, a: f64, b: f64, c: bool) {
        self.n += 1.0;
        if c {
            self.c += 1.0;
            self.ac += a;
            self.bc += b;
            self.abc += a * b;
        }
    }

    fn add(&mut self, other: &MomentSums) {
        self.n += other.n;
        self.c += other.c;
        self.ac += other.ac;
        self.bc += other.bc;
        self.abc += other.abc;
    }
}

fn ratio(settings: &[((f64, f64), MomentSums)]) -> Option<f64> {
    let weight_total: f64 = settings.len() as f64;
    let mut c = 0.0;
    let mut ac = 0.0;
    let mut bc = 0.0;
    let mut abc = 0.0;
    for ((wa, wb), s) in settings {
        if s.n == 0.0 {
            return None;
        }
        c += s.c / s.n / weight_total;
        ac += wa * s.ac / s.n / weight_total;
        bc += wb * s.bc / s.n / weight_total;
        abc += wa * wb * s.abc / s.n / weight_total;
    }
    let denom = 4.0 * abc * c;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((ac + bc).powi(2) / denom)
}

#[allow(clippy::needless_range_loop)]
/// Sample the scenario and estimate (⟨a|c⟩+⟨b|c⟩)²/4⟨ab|c⟩.
///
/// `n_samples` counts shots per detector setting (one setting without
/// contrast, four with it).  The error is a batch-means standard error over
/// eight batches.
pub fn classical_baseline(
    scenario: &ClassicalScenario,
    n_samples: usize,
    seed: u64,
) -> Result<BaselineEstimate> {
    if n_samples < 16 {
        return Err(Error::InvalidArg("need at least 16 samples".into()));
    }
    let settings: Vec<(f64, f64)> = if scenario.contrast {
        vec![(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
    } else {
        vec![(1.0, 1.0)]
    };
    const BATCHES: usize = 8;
    // sums[setting][batch]
    let mut sums = vec![[MomentSums::default(); BATCHES]; settings.len()];
    let mut met_any = 0usize;
    use rand::SeedableRng;
    for (si, &(wa, wb)) in settings.iter().enumerate() {
        let mut rng =
            ChaCha12Rng::seed_from_u64(seed ^ (si as u64).wrapping_mul(0x9E3779B97F4A7C15));
        for i in 0..n_samples {
            let z = scenario.z.sample(&mut rng);
            let c = scenario.condition.met(z, &mut rng);
            // With contrast the detector in the ∓ preparation reads ∓z.
            let read_a = if scenario.contrast { wa * z } else { z };
            let read_b = if scenario.contrast { wb * z } else { z };
            let a = read_a + scenario.noise_a.sample(&mut rng);
            let b = read_b + scenario.noise_b.sample(&mut rng);
            sums[si][i % BATCHES].record(a, b, c);
            if c {
                met_any += 1;
            }
        }
    }
    if met_any == 0 {
        return Err(Error::DegenerateCondition(n_samples * settings.len()));
    }

    let pooled: Vec<((f64, f64), MomentSums)> = settings
        .iter()
        .enumerate()
        .map(|(si, &w)| {
            let mut total = MomentSums::default();
            for b in &sums[si] {
                total.add(b);
            }
            (w, total)
        })
        .collect();
    let lhs = ratio(&pooled).ok_or(Error::Indeterminate)?;

    let mut batch_values = Vec::with_capacity(BATCHES);
    for batch in 0..BATCHES {
        let per: Vec<((f64, f64), MomentSums)> = settings
            .iter()
            .enumerate()
            .map(|(si, &w)| (w, sums[si][batch]))
            .collect();
        if let Some(v) = ratio(&per) {
            batch_values.push(v);
        }
    }
    if batch_values.len() < BATCHES / 2 {
        return Err(Error::DegenerateCondition(met_any));
    }
    let m = batch_values.len() as f64;
    let mean: f64 = batch_values.iter().sum::<f64>() / m;
    let var: f64 =
        batch_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let std_err = (var / m).sqrt();

    Ok(BaselineEstimate {
        lhs,
        std_err,
        n_conditioned: met_any,
        n_samples: n_samples * settings.len(),
    })
}

/// Draw a random scenario with a condition that keeps a healthy acceptance
/// rate; used by the statistical sweep over baselines.
pub fn random_scenario(rng: &mut impl Rng) -> ClassicalScenario {
    let z = match rng.gen_range(0..4) {
        0 => ZDist::PlusMinus {
            p_plus: rng.gen_range(0.2..0.8),
        },
        1 => ZDist::Gaussian {
            mean: rng.gen_range(-1.0..1.0),
            sd: rng.gen_range(0.3..1.5),
        },
        2 => ZDist::Uniform {
            lo: -1.5,
            hi: rng.gen_range(0.5..2.0),
        },
        _ => ZDist::Constant(rng.gen_range(0.5..2.0)),
    };
    let noise_a = random_noise_dist(rng);
    let noise_b = random_noise_dist(rng);
    let condition = match rng.gen_range(0..4) {
        0 => Condition::Always,
        1 => Condition::ZPositive,
        2 => Condition::Window {
            lo: -0.8,
            hi: rng.gen_range(0.2..1.5),
        },
        _ => Condition::Random {
            p: rng.gen_range(0.3..0.9),
        },
    };
    ClassicalScenario {
        z,
        noise_a,
        noise_b,
        condition,
        contrast: rng.gen_bool(0.3),
    }
}

fn random_noise_dist(rng: &mut impl Rng) -> NoiseDist {
    match rng.gen_range(0..3) {
        0 => NoiseDist::None,
        1 => NoiseDist::Gaussian {
            sd: rng.gen_range(0.2..1.5),
        },
        _ => NoiseDist::Uniform {
            half_width: rng.gen_range(0.2..1.5),
        },
    }
}
