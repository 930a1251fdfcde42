//! Participant/window sampling for one DBA draw.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StageRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingRule {
    /// With at least this many windows, every participant contributes one.
    pub full_threshold: usize,
    /// Otherwise this fraction of the cohort is drawn (rounded up).
    pub subset_fraction: f64,
    /// Overrides the fractional subset size, e.g. 6 of 24.
    pub fixed_subset_size: Option<usize>,
}

impl Default for SamplingRule {
    fn default() -> Self {
        Self {
            full_threshold: 100,
            subset_fraction: 0.20,
            fixed_subset_size: None,
        }
    }
}

impl SamplingRule {
    pub fn subset_size(&self, participant_count: usize) -> usize {
        self.fixed_subset_size
            .unwrap_or_else(|| (self.subset_fraction * participant_count as f64 - 1e-9).ceil() as usize)
            .max(1)
    }
}

/// Picks `(participant, item)` pairs for one draw.
///
/// `pool_sizes[p]` is the number of candidate items participant `p` holds.
/// Participants are returned in ascending order.
pub fn sample_windows(
    pool_sizes: &[usize],
    activity_count: usize,
    participant_count: usize,
    rule: &SamplingRule,
    rng: &mut StageRng,
) -> Result<Vec<(usize, usize)>> {
    let eligible: Vec<usize> = (0..pool_sizes.len()).filter(|&p| pool_sizes[p] > 0).collect();
    if eligible.is_empty() {
        return Err(Error::param("no participant has data for this activity"));
    }
    let chosen: Vec<usize> = if activity_count >= rule.full_threshold {
        eligible
    } else {
        let k = rule.subset_size(participant_count).min(eligible.len());
        let mut picks: Vec<usize> = index::sample(rng, eligible.len(), k)
            .into_iter()
            .map(|i| eligible[i])
            .collect();
        picks.sort_unstable();
        picks
    };
    Ok(chosen
        .into_iter()
        .map(|p| (p, rng.random_range(0..pool_sizes[p])))
        .collect())
}
