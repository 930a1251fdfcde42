use std::collections::BTreeMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StageRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubsampleSpec {
    pub count: usize,
    /// Per-class fraction; 0.88 gives an expected pairwise Jaccard of about 0.785.
    pub fraction: f64,
}

impl Default for SubsampleSpec {
    fn default() -> Self {
        Self {
            count: 10,
            fraction: 0.88,
        }
    }
}

impl SubsampleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::param(format!(
                "subsample fraction must be in (0, 1], got {}",
                self.fraction
            )));
        }
        if self.count < 2 {
            return Err(Error::param("at least two subsamples are required"));
        }
        Ok(())
    }
}

/// Draws ⌈fraction·n_c⌉ rows without replacement from every class `c`.
/// Returned indices are sorted.
pub fn stratified_subsample<L: Ord + Copy>(labels: &[L], fraction: f64, rng: &mut StageRng) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param(format!(
            "subsample fraction must be in (0, 1], got {fraction}"
        )));
    }
    if labels.is_empty() {
        return Err(Error::param("cannot subsample an empty label vector"));
    }
    let mut classes: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        classes.entry(l).or_default().push(i);
    }
    let mut out = Vec::new();
    for rows in classes.values() {
        let take = ((fraction * rows.len() as f64) - 1e-9).ceil().max(1.0) as usize;
        out.extend(
            sample(rng, rows.len(), take.min(rows.len()))
                .into_iter()
                .map(|k| rows[k]),
        );
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn class_sizes_follow_the_ceiling() {
        let labels: Vec<u8> = (0..10).map(|_| 0).chain((0..4).map(|_| 1)).collect();
        let s = stratified_subsample(&labels, 0.88, &mut rng_for(1, &[])).unwrap();
        assert_eq!(s.iter().filter(|&&i| labels[i] == 0).count(), 9);
        assert_eq!(s.iter().filter(|&&i| labels[i] == 1).count(), 4);
        let all = stratified_subsample(&labels, 1.0, &mut rng_for(1, &[])).unwrap();
        assert_eq!(all, (0..14).collect::<Vec<_>>());
        assert_eq!(s, stratified_subsample(&labels, 0.88, &mut rng_for(1, &[])).unwrap());
    }

    #[test]
    fn bad_fraction_is_rejected() {
        assert!(stratified_subsample(&[0u8, 1], 0.0, &mut rng_for(1, &[])).is_err());
        assert!(SubsampleSpec {
            count: 1,
            fraction: 0.5
        }
        .validate()
        .is_err());
    }
}
