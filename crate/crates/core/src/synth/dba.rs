//! DTW barycentre averaging.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::scalar::Real;

use super::dtw::{dtw, dtw_cost, WarpingPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbaInit {
    Medoid,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BarycenterConfig {
    pub max_iters: usize,
    /// Stop once the within-set cost drops by less than this fraction.
    pub rel_tolerance: f64,
    pub init: DbaInit,
    pub seed: u64,
}

impl Default for BarycenterConfig {
    fn default() -> Self {
        Self {
            max_iters: 30,
            rel_tolerance: 1e-4,
            init: DbaInit::Medoid,
            seed: 0,
        }
    }
}

impl BarycenterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::param("max_iters must be at least 1"));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::param("rel_tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbaOutcome<T> {
    pub barycenter: Vec<T>,
    /// Within-set cost of the initial barycentre and after every accepted update.
    pub cost_history: Vec<T>,
    pub iterations: usize,
}

/// Index minimising the summed pairwise cost; ties go to the lowest index.
pub(crate) fn medoid_by(n: usize, mut pair_cost: impl FnMut(usize, usize) -> Result<f64>) -> Result<usize> {
    let mut totals = vec![0.0f64; n];
    for i in 0..n {
        for j in i + 1..n {
            let c = pair_cost(i, j)?;
            totals[i] += c;
            totals[j] += c;
        }
    }
    Ok(totals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap_or(0))
}

/// Member with the least total DTW cost to all others.
pub fn medoid_index<T: Real>(set: &[Vec<T>]) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::param("empty series set"));
    }
    medoid_by(set.len(), |i, j| Ok(dtw_cost(&set[i], &set[j])?.as_f64()))
}

fn align_all<T: Real>(barycenter: &[T], set: &[Vec<T>]) -> Result<(Vec<WarpingPath>, T)> {
    let mut total = T::zero();
    let mut paths = Vec::with_capacity(set.len());
    for s in set {
        let al = dtw(barycenter, s)?;
        total += al.cost;
        paths.push(al.path);
    }
    Ok((paths, total))
}

/// Replaces every barycentre point with the mean of the member samples
/// aligned to it. The mean is accumulated as an offset from the current
/// value, so points whose aligned samples all equal it stay bit-identical.
fn update<T: Real>(barycenter: &[T], set: &[Vec<T>], paths: &[WarpingPath]) -> Vec<T> {
    let mut sums = vec![T::zero(); barycenter.len()];
    let mut counts = vec![0usize; barycenter.len()];
    for (s, path) in set.iter().zip(paths) {
        for &(t, k) in &path.pairs {
            sums[t] += s[k] - barycenter[t];
            counts[t] += 1;
        }
    }
    barycenter
        .iter()
        .zip(sums.iter().zip(&counts))
        .map(|(&b, (&sum, &c))| b + sum / T::lit(c as f64))
        .collect()
}

fn check_set<T: Real>(set: &[Vec<T>]) -> Result<()> {
    if set.is_empty() {
        return Err(Error::param("DBA needs at least one series"));
    }
    if set.iter().any(|s| s.is_empty()) {
        return Err(Error::param("DBA series must be non-empty"));
    }
    Ok(())
}

/// Runs DBA from a given initial barycentre.
pub fn dba_from<T: Real>(set: &[Vec<T>], init: Vec<T>, config: &BarycenterConfig) -> Result<DbaOutcome<T>> {
    check_set(set)?;
    config.validate()?;
    if init.is_empty() {
        return Err(Error::param("DBA initial barycentre is empty"));
    }
    let mut barycenter = init;
    let (mut paths, mut cost) = align_all(&barycenter, set)?;
    let mut cost_history = vec![cost];
    let mut iterations = 0;
    let tol = T::lit(config.rel_tolerance);
    while iterations < config.max_iters && cost > T::zero() {
        let next = update(&barycenter, set, &paths);
        let (next_paths, next_cost) = align_all(&next, set)?;
        // The update cannot increase the cost in exact arithmetic; a rounding
        // uptick means convergence.
        if next_cost > cost {
            break;
        }
        let decrease = cost - next_cost;
        barycenter = next;
        paths = next_paths;
        let prev = cost;
        cost = next_cost;
        cost_history.push(cost);
        iterations += 1;
        if decrease <= tol * prev {
            break;
        }
    }
    Ok(DbaOutcome {
        barycenter,
        cost_history,
        iterations,
    })
}

/// DBA with medoid or random-member initialisation, returning the trace.
pub fn dba_trace<T: Real>(set: &[Vec<T>], config: &BarycenterConfig) -> Result<DbaOutcome<T>> {
    check_set(set)?;
    config.validate()?;
    let start = match config.init {
        DbaInit::Medoid => medoid_index(set)?,
        DbaInit::Random => rng_for(config.seed, &[0xdba]).random_range(0..set.len()),
    };
    dba_from(set, set[start].clone(), config)
}

/// Barycentre of `set`; its length equals the initialising member's length.
pub fn dba<T: Real>(set: &[Vec<T>], config: &BarycenterConfig) -> Result<Vec<T>> {
    Ok(dba_trace(set, config)?.barycenter)
}
