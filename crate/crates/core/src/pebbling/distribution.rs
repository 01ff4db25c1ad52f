//! Empirical `cc(S, G, delta)` over fresh resolutions of a dynamic spec.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::strategies::{run_strategy, Strategy};
use super::PebbleError;
use crate::graph::DynamicGraphSpec;
use crate::seed::Seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub strategy: String,
    pub trials: usize,
    pub delta: f64,
    /// largest `c` with empirical `Pr[cc >= c] >= 1 - delta`
    pub cc_delta: u64,
    pub min: u64,
    pub mean: f64,
    pub max: u64,
    /// per-trial costs in trial order
    pub samples: Vec<u64>,
}

/// With costs sorted ascending `c_1 <= ... <= c_T`, at least `T - j + 1`
/// samples are `>= c_j`, so the answer is `c_j` for `j = floor(delta T) + 1`.
pub fn empirical_cc(samples: &[u64], delta: f64) -> u64 {
    assert!(!samples.is_empty());
    let mut s = samples.to_vec();
    s.sort_unstable();
    let j = ((delta * s.len() as f64).floor() as usize).min(s.len() - 1);
    s[j]
}

pub fn cc_distribution(
    spec: &DynamicGraphSpec,
    strategy: &Strategy,
    trials: usize,
    delta: f64,
    seed: &Seed,
) -> Result<DistributionReport, PebbleError> {
    if trials == 0 {
        return Err(PebbleError::Range("need at least one trial".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(PebbleError::Range(format!("delta must be in (0, 1), got {delta}")));
    }
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let key = seed.derive_index("resolution", t as u64);
            let res = spec.resolve_pseudo(&key.0)?;
            Ok(run_strategy(spec, &res, strategy)?.1.cc)
        })
        .collect::<Result<Vec<u64>, PebbleError>>()?;
    let min = *samples.iter().min().unwrap();
    let max = *samples.iter().max().unwrap();
    let mean = samples.iter().map(|&c| c as f64).sum::<f64>() / trials as f64;
    Ok(DistributionReport {
        strategy: strategy.to_string(),
        trials,
        delta,
        cc_delta: empirical_cc(&samples, delta),
        min,
        mean,
        max,
        samples,
    })
}
