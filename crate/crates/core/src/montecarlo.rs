//! Event-level simulation of the six setting-pair experiments.
//!
//! Each pair is an independent block of `n` photon pairs drawn from its
//! quantum [`OutcomeTable`] with stream `CounterRng::substream(seed, k)`,
//! `k` being the pair's position in [`SettingPair::AUDITED`]. Sampling is
//! inverse-CDF over the fixed cell order `++, +-, +0, -+, --, -0, 0+, 0-, 00`.
//!
//! Error model: every cell estimate gets the binomial standard error
//! `√(p̂(1-p̂)/n)`. The `S'` estimate reads one cell from each of six
//! independent blocks, so its standard error is the quadrature sum of the six
//! selected cell errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AngleConfig, OutcomeSelector, SettingPair};
use crate::quantum::{outcome_table, selected_cells, sprime_exp_qm, DetectorParams, OutcomeTable};
use crate::rng::CounterRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimConfig {
    pub detector: DetectorParams,
    pub angles: AngleConfig,
    pub events_per_pair: u64,
    pub seed: u64,
    pub selector: OutcomeSelector,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.events_per_pair == 0 {
            return Err(Error::InvalidSimConfig("eventsPerPair must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome counts for one setting pair, indexed like [`OutcomeTable::probs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountMatrix {
    pub counts: [[u64; 3]; 3],
    pub total: u64,
}

impl CountMatrix {
    pub fn get(&self, o1: crate::model::Outcome, o2: crate::model::Outcome) -> u64 {
        self.counts[o1.index()][o2.index()]
    }

    /// Cell-wise sum; associative and commutative.
    pub fn merge(&self, other: &CountMatrix) -> CountMatrix {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.counts[i][j] += other.counts[i][j];
            }
        }
        out.total += other.total;
        out
    }

    pub fn double_detections(&self) -> u64 {
        self.counts[0][0] + self.counts[0][1] + self.counts[1][0] + self.counts[1][1]
    }
}

/// Draws `n` pair outcomes from `table`.
pub fn simulate_pair_block(table: &OutcomeTable, n: u64, stream: &mut CounterRng) -> CountMatrix {
    let mut cdf = [0.0; 9];
    let mut acc = 0.0;
    for (c, p) in cdf.iter_mut().zip(table.flat()) {
        acc += p;
        *c = acc;
    }
    // Index of the last cell with positive mass absorbs rounding in the tail.
    let last = table.flat().iter().rposition(|&p| p > 0.0).unwrap_or(8);
    let mut tally = [0u64; 9];
    for _ in 0..n {
        let u = stream.next_f64();
        let k = cdf[..last].iter().position(|&c| u < c).unwrap_or(last);
        tally[k] += 1;
    }
    let mut counts = [[0u64; 3]; 3];
    for (k, c) in tally.into_iter().enumerate() {
        counts[k / 3][k % 3] = c;
    }
    CountMatrix { counts, total: n }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairEstimate {
    pub pair: String,
    pub counts: CountMatrix,
    pub probabilities: [[f64; 3]; 3],
    pub std_errors: [[f64; 3]; 3],
    pub m_estimate: f64,
    pub m_std_error: f64,
}

impl PairEstimate {
    fn from_counts(pair: SettingPair, counts: CountMatrix) -> Self {
        let n = counts.total;
        let mut probabilities = [[0.0; 3]; 3];
        let mut std_errors = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let p = counts.counts[i][j] as f64 / n as f64;
                probabilities[i][j] = p;
                std_errors[i][j] = binomial_se(p, n);
            }
        }
        let m_estimate = counts.double_detections() as f64 / n as f64;
        PairEstimate {
            pair: pair.label(),
            counts,
            probabilities,
            std_errors,
            m_estimate,
            m_std_error: binomial_se(m_estimate, n),
        }
    }
}

/// z-score comparing the double-detection estimates of two pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairZ {
    pub first: String,
    pub second: String,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimReport {
    pub config: SimConfig,
    pub pairs: Vec<PairEstimate>,
    pub sprime_estimate: f64,
    pub sprime_std_error: f64,
    /// Exact quantum value for the same configuration.
    pub sprime_expected: f64,
    pub a_test_zscores: Vec<PairZ>,
}

fn z_score(a: &PairEstimate, b: &PairEstimate) -> f64 {
    let diff = (a.m_estimate - b.m_estimate).abs();
    let se = (a.m_std_error.powi(2) + b.m_std_error.powi(2)).sqrt();
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn all_z_scores(pairs: &[PairEstimate]) -> Vec<PairZ> {
    let mut out = Vec::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            out.push(PairZ {
                first: pairs[i].pair.clone(),
                second: pairs[j].pair.clone(),
                z: z_score(&pairs[i], &pairs[j]),
            });
        }
    }
    out
}

/// Simulates the six blocks; block `k` always uses substream `k`.
pub fn simulate_counts(cfg: &SimConfig) -> Result<Vec<CountMatrix>> {
    cfg.validate()?;
    let tables: Vec<OutcomeTable> = SettingPair::AUDITED
        .iter()
        .map(|&pair| outcome_table(&cfg.detector, cfg.angles.pair_difference(pair)))
        .collect();
    Ok(tables
        .par_iter()
        .enumerate()
        .map(|(k, t)| simulate_pair_block(t, cfg.events_per_pair, &mut CounterRng::substream(cfg.seed, k as u64)))
        .collect())
}

pub fn run_experiment(cfg: &SimConfig) -> Result<SimReport> {
    let counts = simulate_counts(cfg)?;
    Ok(report_from_counts(cfg, &counts))
}

/// Assembles estimates from per-pair counts (in [`SettingPair::AUDITED`] order).
pub fn report_from_counts(cfg: &SimConfig, counts: &[CountMatrix]) -> SimReport {
    let pairs: Vec<PairEstimate> = SettingPair::AUDITED
        .iter()
        .zip(counts)
        .map(|(&pair, &c)| PairEstimate::from_counts(pair, c))
        .collect();
    let mut estimate = 0.0;
    let mut variance = 0.0;
    for (pe, (sign, o1, o2)) in pairs.iter().zip(selected_cells(cfg.selector)) {
        estimate += sign * pe.probabilities[o1.index()][o2.index()];
        variance += pe.std_errors[o1.index()][o2.index()].powi(2);
    }
    SimReport {
        config: *cfg,
        a_test_zscores: all_z_scores(&pairs),
        pairs,
        sprime_estimate: estimate,
        sprime_std_error: variance.sqrt(),
        sprime_expected: sprime_exp_qm(&cfg.detector, &cfg.angles, cfg.selector),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AssumptionACheck {
    pub passed: bool,
    pub threshold: f64,
    pub details: Vec<PairZ>,
}

impl AssumptionACheck {
    pub fn offending(&self) -> impl Iterator<Item = &PairZ> {
        let t = self.threshold;
        self.details.iter().filter(move |d| !(d.z < t))
    }
}

/// Two-sample z-test of equal double-detection rates for every pair of
/// setting pairs; passes iff every `z < z_threshold`.
pub fn check_assumption_a(report: &SimReport, z_threshold: f64) -> AssumptionACheck {
    let details = all_z_scores(&report.pairs);
    AssumptionACheck {
        passed: details.iter().all(|d| d.z < z_threshold),
        threshold: z_threshold,
        details,
    }
}
