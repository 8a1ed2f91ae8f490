//! Finite-shot Monte-Carlo simulation, the contrast estimator pipeline,
//! error bars and significance of violation.
//!
//! Counts files are JSON with the fixed schema
//! `{"version":"weakreal/1","meta":{...},"runs":[{"sign_a":±1,"sign_b":±1,
//! "counts":{"<abc bitstring>":n,...}},...]}`; bit order is a,b,c left to
//! right and a c-bit of 0 means the condition was met.

pub mod synthetic;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imperfect::NoiseParams;
use crate::protocol::{
    contrast_combine, exact_expectations, violation_lhs, ContrastConfig, ExpectationSet, Order,
    SettingMoments,
};
use crate::FORMAT_VERSION;

/// Metadata block of a counts file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountsMeta {
    pub psi: f64,
    pub theta: f64,
    pub order: Order,
    /// Shots per run (one run = one sign setting of one repetition).
    pub shots: u64,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// One executed circuit: a sign setting and its outcome counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountsRun {
    pub sign_a: i8,
    pub sign_b: i8,
    pub counts: BTreeMap<String, u64>,
}

/// Per-setting shot counts of one job, in execution order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountsTable {
    pub version: String,
    pub meta: CountsMeta,
    pub runs: Vec<CountsRun>,
}

/// Index of a length-3 bitstring in the a,b,c bit order.
fn bitstring_index(key: &str) -> Result<usize> {
    if key.len() != 3 || !key.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::Schema(format!(
            "counts key {key:?} is not a 3-bit string over 0/1"
        )));
    }
    Ok(key
        .bytes()
        .fold(0usize, |acc, b| (acc << 1) | usize::from(b == b'1')))
}

fn bitstring_of(index: usize) -> String {
    format!("{:03b}", index & 7)
}

impl CountsTable {
    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "version {:?}, expected {FORMAT_VERSION:?}",
                self.version
            )));
        }
        if self.meta.shots == 0 {
            return Err(Error::ZeroShots);
        }
        for (i, run) in self.runs.iter().enumerate() {
            if run.sign_a.abs() != 1 || run.sign_b.abs() != 1 {
                return Err(Error::Schema(format!("run {i}: signs must be ±1")));
            }
            let mut total = 0u64;
            for (key, &n) in &run.counts {
                bitstring_index(key).map_err(|e| Error::Schema(format!("run {i}: {e}")))?;
                total += n;
            }
            if total != self.meta.shots {
                return Err(Error::Schema(format!(
                    "run {i}: counts sum to {total}, expected {} shots",
                    self.meta.shots
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("counts tables always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: CountsTable = serde_json::from_str(text)
            .map_err(|e| Error::Schema(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        table.validate()?;
        Ok(table)
    }
}

/// A full simulated experiment: jobs × repetitions × the four sign settings.
#[derive(Clone, Debug)]
pub struct SimulationPlan {
    pub psi: f64,
    pub theta: f64,
    pub order: Order,
    pub shots: u64,
    pub reps: u32,
    pub jobs: u32,
    pub seed: u64,
    pub noise_a: Option<NoiseParams>,
    pub noise_b: Option<NoiseParams>,
}

const SETTINGS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

fn substream(master: u64, id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}

fn stream_id(job: u32, rep: u32, setting: usize, kind: u64) -> u64 {
    (u64::from(job) << 34) | (u64::from(rep) << 4) | ((setting as u64) << 2) | kind
}

/// Multinomial draw by sequential binomials.
fn multinomial(rng: &mut ChaCha12Rng, n: u64, probs: &[f64; 8]) -> [u64; 8] {
    let mut out = [0u64; 8];
    let mut remaining = n;
    let mut rest: f64 = probs.iter().sum();
    for i in 0..7 {
        if remaining == 0 || rest <= 0.0 {
            break;
        }
        let p = (probs[i] / rest).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, p).expect("p in [0,1]").sample(rng);
        out[i] = draw;
        remaining -= draw;
        rest -= probs[i];
    }
    out[7] = remaining;
    out
}

fn counts_map(hist: &[u64; 8]) -> BTreeMap<String, u64> {
    (0..8).map(|i| (bitstring_of(i), hist[i])).collect()
}

/// Sample the plan into one counts table per job.  Deterministic in the
/// seed: every (job, repetition, setting) gets its own counter stream, and
/// the execution order within a job is an independently seeded shuffle.
pub fn sample_counts(plan: &SimulationPlan) -> Result<Vec<CountsTable>> {
    if plan.shots == 0 || plan.reps == 0 || plan.jobs == 0 {
        return Err(Error::ZeroShots);
    }
    let cfg = ContrastConfig {
        psi: plan.psi,
        theta: plan.theta,
        order: plan.order,
        noise_a: plan.noise_a,
        noise_b: plan.noise_b,
    };
    let mut dists = Vec::with_capacity(4);
    for (idx, setting) in cfg.settings().into_iter().enumerate() {
        let dist = exact_expectations(&setting)?;
        let mut p = *dist.probs();
        for v in p.iter_mut() {
            *v = v.max(0.0);
        }
        let total: f64 = p.iter().sum();
        for v in p.iter_mut() {
            *v /= total;
        }
        dists.push((SETTINGS[idx], p));
    }

    (0..plan.jobs)
        .into_par_iter()
        .map(|job| {
            // Execution schedule: all (rep, setting) pairs, shuffled.
            let mut schedule: Vec<(u32, usize)> = (0..plan.reps)
                .flat_map(|r| (0..4).map(move |s| (r, s)))
                .collect();
            let mut shuffle_rng = substream(plan.seed, stream_id(job, 0, 0, 1));
            for i in (1..schedule.len()).rev() {
                let j = shuffle_rng.gen_range(0..=i);
                schedule.swap(i, j);
            }
            let runs: Vec<CountsRun> = schedule
                .into_iter()
                .map(|(rep, s)| {
                    let mut rng = substream(plan.seed, stream_id(job, rep, s, 0));
                    let hist = multinomial(&mut rng, plan.shots, &dists[s].1);
                    CountsRun {
                        sign_a: dists[s].0 .0,
                        sign_b: dists[s].0 .1,
                        counts: counts_map(&hist),
                    }
                })
                .collect();
            Ok(CountsTable {
                version: FORMAT_VERSION.to_string(),
                meta: CountsMeta {
                    psi: plan.psi,
                    theta: plan.theta,
                    order: plan.order,
                    shots: plan.shots,
                    source: "simulated".to_string(),
                    seed: Some(plan.seed),
                },
                runs,
            })
        })
        .collect()
}

/// An estimated value with its standard error and the number of shots that
/// entered it.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub sigma: f64,
    pub n_effective: u64,
}

/// Contrast-combined estimates of all protocol quantities.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimates {
    pub c: EstimateWithError,
    pub a: EstimateWithError,
    pub b: EstimateWithError,
    pub ac: EstimateWithError,
    pub bc: EstimateWithError,
    pub ab: EstimateWithError,
    pub abc: EstimateWithError,
    pub psi: f64,
    pub theta: f64,
    pub order: Order,
    /// Shots per sign setting (jobs × repetitions × shots).
    pub shots_per_setting: u64,
}

impl Estimates {
    pub fn expectation_set(&self) -> ExpectationSet {
        ExpectationSet {
            c: self.c.value,
            a: self.a.value,
            b: self.b.value,
            ac: self.ac.value,
            bc: self.bc.value,
            ab: self.ab.value,
            abc: self.abc.value,
        }
    }

    pub fn rows(&self) -> [(&'static str, EstimateWithError); 7] {
        [
            ("c", self.c),
            ("a", self.a),
            ("b", self.b),
            ("ac", self.ac),
            ("bc", self.bc),
            ("ab", self.ab),
            ("abc", self.abc),
        ]
    }
}

fn setting_index(sign_a: i8, sign_b: i8) -> usize {
    (usize::from(sign_a < 0) << 1) | usize::from(sign_b < 0)
}

struct Grouped<'a> {
    meta: &'a CountsMeta,
    /// Runs per sign setting, in per-setting occurrence order (repetitions).
    by_setting: [Vec<&'a CountsRun>; 4],
}

fn group_runs(tables: &[CountsTable]) -> Result<Grouped<'_>> {
    let first = tables.first().ok_or(Error::ZeroShots)?;
    for t in tables {
        t.validate()?;
        let m = (&t.meta, &first.meta);
        if (m.0.psi - m.1.psi).abs() > 1e-15
            || (m.0.theta - m.1.theta).abs() > 1e-15
            || m.0.order != m.1.order
            || m.0.shots != m.1.shots
        {
            return Err(Error::InconsistentMeta(format!(
                "tables disagree: ({}, {}, {}, {}) vs ({}, {}, {}, {})",
                m.0.psi, m.0.theta, m.0.order, m.0.shots, m.1.psi, m.1.theta, m.1.order, m.1.shots
            )));
        }
    }
    let mut by_setting: [Vec<&CountsRun>; 4] = [vec![], vec![], vec![], vec![]];
    for t in tables {
        for run in &t.runs {
            by_setting[setting_index(run.sign_a, run.sign_b)].push(run);
        }
    }
    for (idx, runs) in by_setting.iter().enumerate() {
        if runs.is_empty() {
            return Err(Error::MissingSetting {
                sign_a: if idx & 2 == 0 { 1 } else { -1 },
                sign_b: if idx & 1 == 0 { 1 } else { -1 },
            });
        }
    }
    let n0 = by_setting[0].len();
    if by_setting.iter().any(|r| r.len() != n0) {
        return Err(Error::InconsistentMeta(format!(
            "unbalanced settings: {:?} runs",
            by_setting.iter().map(|r| r.len()).collect::<Vec<_>>()
        )));
    }
    Ok(Grouped {
        meta: &first.meta,
        by_setting,
    })
}

fn moments_of_counts<'a>(
    runs: impl Iterator<Item = &'a CountsRun>,
    shots: u64,
) -> (SettingMoments, u64) {
    let mut hist = [0u64; 8];
    let mut n_runs = 0u64;
    for run in runs {
        for (key, &n) in &run.counts {
            hist[bitstring_index(key).expect("validated")] += n;
        }
        n_runs += 1;
    }
    let total = (n_runs * shots) as f64;
    let mut m = SettingMoments::default();
    for (idx, &n) in hist.iter().enumerate() {
        let p = n as f64 / total;
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
    (m, n_runs * shots)
}

fn combine_grouped(grouped: &Grouped<'_>) -> Result<(ExpectationSet, u64)> {
    let mut per_setting = Vec::with_capacity(4);
    let mut n_set = 0u64;
    for (idx, runs) in grouped.by_setting.iter().enumerate() {
        let (m, n) = moments_of_counts(runs.iter().copied(), grouped.meta.shots);
        n_set = n;
        let sa = if idx & 2 == 0 { 1 } else { -1 };
        let sb = if idx & 1 == 0 { 1 } else { -1 };
        per_setting.push((sa, sb, m));
    }
    Ok((contrast_combine(&per_setting)?, n_set))
}

/// Contrast estimates with per-quantity standard errors.
///
/// Correlations that include the condition bit carry the binomial error
/// √(⟨c⟩−⟨c⟩²)/(2√n); pure ±1 products carry √(1−x²)/(2√n), with n the
/// shots per setting.
pub fn estimate(tables: &[CountsTable]) -> Result<Estimates> {
    let grouped = group_runs(tables)?;
    let (e, n_set) = combine_grouped(&grouped)?;
    let n = n_set as f64;
    let c_var = (e.c - e.c * e.c).max(0.0);
    let sig_c = c_var.sqrt() / (2.0 * n.sqrt());
    let sig_pm = |x: f64| ((1.0 - x * x).max(0.0)).sqrt() / (2.0 * n.sqrt());
    let with = |value: f64, sigma: f64| EstimateWithError {
        value,
        sigma,
        n_effective: 4 * n_set,
    };
    Ok(Estimates {
        c: with(e.c, sig_c),
        a: with(e.a, sig_pm(e.a)),
        b: with(e.b, sig_pm(e.b)),
        ac: with(e.ac, sig_c),
        bc: with(e.bc, sig_c),
        ab: with(e.ab, sig_pm(e.ab)),
        abc: with(e.abc, sig_c),
        psi: grouped.meta.psi,
        theta: grouped.meta.theta,
        order: grouped.meta.order,
        shots_per_setting: n_set,
    })
}

/// Significance of the inequality violation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Significance {
    pub lhs: EstimateWithError,
    pub z_score: f64,
    /// Set when the inputs carry no statistical error at all.
    pub exact: bool,
}

/// Plug-in ratio with first-order error propagation keeping only the abc
/// and c variance terms; the single-average contributions are suppressed
/// by a factor of order λ and are neglected.
pub fn violation_significance(est: &Estimates) -> Result<Significance> {
    let e = est.expectation_set();
    let report = violation_lhs(&e);
    let lhs = report.lhs.ok_or(Error::Indeterminate)?;
    let rel = (est.abc.sigma / e.abc).powi(2) + (est.c.sigma / e.c).powi(2);
    let sigma = lhs.abs() * rel.sqrt();
    let exact = sigma == 0.0;
    let z_score = if exact {
        if (lhs - 1.0).abs() < f64::EPSILON {
            0.0
        } else {
            f64::INFINITY.copysign(lhs - 1.0)
        }
    } else {
        (lhs - 1.0) / sigma
    };
    Ok(Significance {
        lhs: EstimateWithError {
            value: lhs,
            sigma,
            n_effective: est.abc.n_effective,
        },
        z_score,
        exact,
    })
}

/// Bootstrap standard error of the plug-in ratio, resampling runs with
/// replacement within each sign setting.
pub fn bootstrap_sigma(
    tables: &[CountsTable],
    n_resamples: usize,
    seed: u64,
) -> Result<EstimateWithError> {
    if n_resamples < 100 {
        return Err(Error::InvalidArg(format!(
            "need at least 100 resamples, got {n_resamples}"
        )));
    }
    let grouped = group_runs(tables)?;
    let (point, n_set) = combine_grouped(&grouped)?;
    let point_lhs = violation_lhs(&point).lhs.ok_or(Error::Indeterminate)?;

    let mut rng = substream(seed, 2);
    let mut values = Vec::with_capacity(n_resamples);
    let mut skipped = 0usize;
    for _ in 0..n_resamples {
        let mut per_setting = Vec::with_capacity(4);
        for (idx, runs) in grouped.by_setting.iter().enumerate() {
            let resampled = (0..runs.len()).map(|_| runs[rng.gen_range(0..runs.len())]);
            let (m, _) = moments_of_counts(resampled, grouped.meta.shots);
            let sa = if idx & 2 == 0 { 1 } else { -1 };
            let sb = if idx & 1 == 0 { 1 } else { -1 };
            per_setting.push((sa, sb, m));
        }
        let e = contrast_combine(&per_setting)?;
        match violation_lhs(&e).lhs {
            Some(v) => values.push(v),
            None => skipped += 1,
        }
    }
    if skipped * 10 > n_resamples {
        return Err(Error::Indeterminate);
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(EstimateWithError {
        value: point_lhs,
        sigma: var.sqrt(),
        n_effective: 4 * n_set,
    })
}
