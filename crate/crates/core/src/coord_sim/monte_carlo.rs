use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Result, SimError, SimScheme, StageFlags, TrialPlan, TrialResult};
use crate::finite_prob::JointPmf;
use crate::rate_region::RateTriple;

/// A Monte Carlo experiment: one target and joint, several block lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub target: JointPmf,
    pub joint6: JointPmf,
    pub scheme: SimScheme,
    pub block_lengths: Vec<usize>,
    pub delta: f64,
    pub epsilon: f64,
}

/// The JSON-lines form of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub n: usize,
    pub scheme: SimScheme,
    pub tv: f64,
    pub flags: StageFlags,
    pub rates: RateTriple,
}

impl From<&TrialResult> for TrialRecord {
    fn from(t: &TrialResult) -> Self {
        Self {
            seed: t.seed,
            n: t.n,
            scheme: t.scheme,
            tv: t.tv_to_target,
            flags: t.stage_failures,
            rates: t.channel_rates,
        }
    }
}

/// Number of trials with each stage flag set, in [`StageFlags::NAMES`]
/// order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCounts(pub [usize; 7]);

impl StageCounts {
    fn add(&mut self, f: &StageFlags) {
        for (c, set) in self.0.iter_mut().zip(f.as_array()) {
            *c += set as usize;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NSummary {
    pub n: usize,
    pub trials: usize,
    pub mean_tv: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
    pub failures: StageCounts,
    /// Trials with at least one stage flag set.
    pub any_failure: usize,
    pub budget_violations: usize,
    pub channel_rates: RateTriple,
}

impl NSummary {
    pub fn failure_rates(&self) -> [f64; 7] {
        self.failures.0.map(|c| c as f64 / self.trials as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub per_n: Vec<NSummary>,
    /// Ordered by block length (as configured), then seed.
    pub trials: Vec<TrialResult>,
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(n: usize, trials: &[TrialResult]) -> NSummary {
    let mut tvs: Vec<f64> = trials.iter().map(|t| t.tv_to_target).collect();
    let mean_tv = tvs.iter().sum::<f64>() / tvs.len() as f64;
    tvs.sort_by(f64::total_cmp);
    let mut failures = StageCounts::default();
    for t in trials {
        failures.add(&t.stage_failures);
    }
    NSummary {
        n,
        trials: trials.len(),
        mean_tv,
        q10: quantile(&tvs, 0.1),
        q50: quantile(&tvs, 0.5),
        q90: quantile(&tvs, 0.9),
        failures,
        any_failure: trials.iter().filter(|t| t.stage_failures.any()).count(),
        budget_violations: trials.iter().map(|t| t.budget_violations).sum(),
        channel_rates: trials[0].channel_rates,
    }
}

/// Runs seeds `base_seed .. base_seed + trials` at every block length. Seeds
/// are shared across block lengths.
pub fn monte_carlo(config: &SimConfig, trials: usize, base_seed: u64) -> Result<MonteCarloSummary> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    if config.block_lengths.is_empty() {
        return Err(SimError::NoBlockLengths);
    }
    let mut per_n = Vec::with_capacity(config.block_lengths.len());
    let mut all = Vec::with_capacity(trials * config.block_lengths.len());
    for &n in &config.block_lengths {
        let plan = TrialPlan::new(
            &config.target,
            &config.joint6,
            config.scheme,
            n,
            config.delta,
            config.epsilon,
        )?;
        let results = (0..trials as u64)
            .into_par_iter()
            .map(|i| plan.run(base_seed.wrapping_add(i)))
            .collect::<Result<Vec<_>>>()?;
        per_n.push(summarize(n, &results));
        all.extend(results);
    }
    Ok(MonteCarloSummary { per_n, trials: all })
}

impl MonteCarloSummary {
    pub fn records(&self) -> Vec<TrialRecord> {
        self.trials.iter().map(TrialRecord::from).collect()
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in self.records() {
            out.push_str(&serde_json::to_string(&r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// CSV with header `n,mean_tv,q10,q90` followed by one failure-rate
    /// column per stage.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("n,mean_tv,q10,q90");
        for name in StageFlags::NAMES {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for s in &self.per_n {
            write!(out, "{},{},{},{}", s.n, s.mean_tv, s.q10, s.q90).expect("string write");
            for r in s.failure_rates() {
                write!(out, ",{r}").expect("string write");
            }
            out.push('\n');
        }
        out
    }

    pub fn total_budget_violations(&self) -> usize {
        self.per_n.iter().map(|s| s.budget_violations).sum()
    }
}
