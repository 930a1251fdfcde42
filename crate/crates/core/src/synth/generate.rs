//! Count-matched synthetic window generation by per-channel DBA.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_for};
use crate::scalar::Real;
use crate::signal::{
    ButterworthHighpass, FineLabel, LabeledWindow, Origin, BACK_RATE_HZ, BACK_WINDOW_LEN, THIGH_RATE_HZ,
    THIGH_WINDOW_LEN, WINDOW_S,
};

use super::dba::{dba_from, medoid_by, BarycenterConfig};
use super::dtw::dtw_cost;
use super::sampling::{sample_windows, SamplingRule};

/// How source excerpts are formed and how DBA output becomes 2 s windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPolicy {
    /// Two consecutive windows (4 s); the central 2 s of the barycentre are kept.
    Walking4sTrimTo2s,
    /// Whole transfer runs; the barycentre is cut into consecutive 2 s windows.
    TransferFullSpan,
    /// Single 2 s windows.
    Static2s,
}

impl WindowPolicy {
    pub fn for_activity(label: FineLabel) -> Self {
        if label == FineLabel::Walking {
            WindowPolicy::Walking4sTrimTo2s
        } else if label.is_transfer() {
            WindowPolicy::TransferFullSpan
        } else {
            WindowPolicy::Static2s
        }
    }
}

/// A contiguous multi-channel source sequence from one participant.
#[derive(Debug, Clone, PartialEq)]
pub struct Excerpt<T> {
    pub thigh: Vec<[T; 3]>,
    pub back: Vec<[T; 3]>,
}

impl<T: Real> Excerpt<T> {
    fn channel(&self, c: usize) -> Vec<T> {
        let (s, a) = if c < 3 { (&self.thigh, c) } else { (&self.back, c - 3) };
        s.iter().map(|v| v[a]).collect()
    }

    fn windows(&self) -> usize {
        (self.thigh.len() / THIGH_WINDOW_LEN).min(self.back.len() / BACK_WINDOW_LEN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticipantPool<T> {
    pub participant_id: String,
    pub excerpts: Vec<Excerpt<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisPlan<T> {
    pub activity: FineLabel,
    pub pools: Vec<ParticipantPool<T>>,
    /// Real window count for the activity; also the number to synthesise.
    pub target_count: usize,
    /// Number of participants in the cohort (not only those with data).
    pub participant_count: usize,
    pub policy: WindowPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub barycenter: BarycenterConfig,
    pub sampling: SamplingRule,
    /// Consecutive failed consistency checks tolerated per draw.
    pub retry_budget: usize,
    /// High-pass the lower-back z axis of walking excerpts before averaging.
    pub drift_correction: bool,
    pub drift_cutoff_hz: f64,
    pub drift_order: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            barycenter: BarycenterConfig::default(),
            sampling: SamplingRule::default(),
            retry_budget: 50,
            drift_correction: true,
            drift_cutoff_hz: 0.5,
            drift_order: 4,
        }
    }
}

fn consecutive<T>(a: &LabeledWindow<T>, b: &LabeledWindow<T>) -> bool {
    a.participant_id == b.participant_id && a.label == b.label && (b.start_s - a.start_s - WINDOW_S).abs() < 1e-6
}

fn concat<T: Real>(run: &[&LabeledWindow<T>]) -> Excerpt<T> {
    Excerpt {
        thigh: run.iter().flat_map(|w| w.thigh.iter().copied()).collect(),
        back: run.iter().flat_map(|w| w.back.iter().copied()).collect(),
    }
}

impl<T: Real> SynthesisPlan<T> {
    /// Builds the per-participant pools for `activity` from real windows.
    pub fn from_windows(activity: FineLabel, windows: &[LabeledWindow<T>], config: &SynthesisConfig) -> Result<Self> {
        let policy = WindowPolicy::for_activity(activity);
        let mut participants: Vec<&str> = windows.iter().map(|w| w.participant_id.as_str()).collect();
        participants.sort_unstable();
        participants.dedup();
        let mut by_participant: BTreeMap<&str, Vec<&LabeledWindow<T>>> = BTreeMap::new();
        for w in windows.iter().filter(|w| w.label == activity) {
            by_participant.entry(&w.participant_id).or_default().push(w);
        }
        let drift = if config.drift_correction && policy == WindowPolicy::Walking4sTrimTo2s {
            Some(ButterworthHighpass::new(
                config.drift_order,
                config.drift_cutoff_hz,
                BACK_RATE_HZ,
            )?)
        } else {
            None
        };
        let target_count = by_participant.values().map(Vec::len).sum();
        let pools = by_participant
            .into_iter()
            .map(|(pid, mut ws)| {
                ws.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
                let excerpts = match policy {
                    WindowPolicy::Static2s => ws.iter().map(|w| concat(&[w])).collect(),
                    WindowPolicy::Walking4sTrimTo2s => ws
                        .windows(2)
                        .filter(|p| consecutive(p[0], p[1]))
                        .map(|p| {
                            let mut e = concat(p);
                            if let Some(f) = &drift {
                                let z: Vec<T> = e.back.iter().map(|v| v[2]).collect();
                                for (v, nz) in e.back.iter_mut().zip(f.filter_zero_phase(&z)) {
                                    v[2] = nz;
                                }
                            }
                            e
                        })
                        .collect(),
                    WindowPolicy::TransferFullSpan => {
                        let mut runs: Vec<Vec<&LabeledWindow<T>>> = Vec::new();
                        for w in ws {
                            match runs.last_mut() {
                                Some(run) if consecutive(run[run.len() - 1], w) => run.push(w),
                                _ => runs.push(vec![w]),
                            }
                        }
                        runs.iter().map(|r| concat(r)).collect()
                    }
                };
                ParticipantPool {
                    participant_id: pid.to_string(),
                    excerpts,
                }
            })
            .collect();
        Ok(Self {
            activity,
            pools,
            target_count,
            participant_count: participants.len(),
            policy,
        })
    }
}

/// Per-channel DBA on one sample of excerpts; `None` when the six
/// barycentres disagree in duration or are too short to cut a window from.
fn draw_once<T: Real>(
    plan: &SynthesisPlan<T>,
    config: &SynthesisConfig,
    seed: u64,
) -> Result<Option<Vec<LabeledWindow<T>>>> {
    let sizes: Vec<usize> = plan.pools.iter().map(|p| p.excerpts.len()).collect();
    let mut rng = rng_for(seed, &[]);
    let picks = sample_windows(
        &sizes,
        plan.target_count,
        plan.participant_count,
        &config.sampling,
        &mut rng,
    )?;
    let members: Vec<&Excerpt<T>> = picks.iter().map(|&(p, i)| &plan.pools[p].excerpts[i]).collect();
    let channels: Vec<Vec<Vec<T>>> = (0..6).map(|c| members.iter().map(|m| m.channel(c)).collect()).collect();
    let medoid = medoid_by(members.len(), |i, j| {
        let mut total = 0.0;
        for ch in &channels {
            total += dtw_cost(&ch[i], &ch[j])?.as_f64();
        }
        Ok(total)
    })?;
    let bary_config = BarycenterConfig {
        seed: derive_seed(seed, &[1]),
        ..config.barycenter.clone()
    };
    let mut bary = Vec::with_capacity(6);
    for ch in &channels {
        bary.push(dba_from(ch, ch[medoid].clone(), &bary_config)?.barycenter);
    }
    let thigh_len = bary[0].len();
    let back_len = bary[3].len();
    let consistent = bary[..3].iter().all(|b| b.len() == thigh_len)
        && bary[3..].iter().all(|b| b.len() == back_len)
        && (thigh_len as f64 / THIGH_RATE_HZ - back_len as f64 / BACK_RATE_HZ).abs() <= 1.0 / THIGH_RATE_HZ + 1e-9;
    if !consistent || thigh_len < THIGH_WINDOW_LEN || back_len < BACK_WINDOW_LEN {
        return Ok(None);
    }
    let thigh: Vec<[T; 3]> = (0..thigh_len).map(|i| [bary[0][i], bary[1][i], bary[2][i]]).collect();
    let back: Vec<[T; 3]> = (0..back_len).map(|i| [bary[3][i], bary[4][i], bary[5][i]]).collect();
    let cut = |t0: usize, b0: usize, start_s: f64| {
        LabeledWindow::new(
            "synthetic",
            plan.activity,
            start_s,
            thigh[t0..t0 + THIGH_WINDOW_LEN].to_vec(),
            back[b0..b0 + BACK_WINDOW_LEN].to_vec(),
            Origin::Synthetic,
        )
    };
    let windows = match plan.policy {
        WindowPolicy::Static2s => vec![cut(0, 0, 0.0)?],
        WindowPolicy::Walking4sTrimTo2s => {
            let t0 = (thigh_len - THIGH_WINDOW_LEN) / 2;
            let b0 = (back_len - BACK_WINDOW_LEN) / 2;
            vec![cut(t0, b0, t0 as f64 / THIGH_RATE_HZ)?]
        }
        WindowPolicy::TransferFullSpan => {
            let n = (thigh_len / THIGH_WINDOW_LEN).min(back_len / BACK_WINDOW_LEN);
            (0..n)
                .map(|w| cut(w * THIGH_WINDOW_LEN, w * BACK_WINDOW_LEN, w as f64 * WINDOW_S))
                .collect::<Result<_>>()?
        }
    };
    Ok(Some(windows))
}

fn draw_with_retries<T: Real>(
    plan: &SynthesisPlan<T>,
    config: &SynthesisConfig,
    seed: u64,
    draw: u64,
) -> Result<Vec<LabeledWindow<T>>> {
    for attempt in 0..config.retry_budget.max(1) {
        if let Some(ws) = draw_once(plan, config, derive_seed(seed, &[draw, attempt as u64]))? {
            return Ok(ws);
        }
    }
    Err(Error::Generation {
        activity: plan.activity.to_string(),
        message: format!("consistency check failed {} times in a row", config.retry_budget),
    })
}

/// Repeats sample → DBA → check → post-process until exactly
/// `plan.target_count` synthetic windows exist. Draw `d` always uses the
/// seed derived from `(seed, d)`, so batching does not change the result.
pub fn generate_synthetic<T: Real>(
    plan: &SynthesisPlan<T>,
    config: &SynthesisConfig,
    seed: u64,
) -> Result<Vec<LabeledWindow<T>>> {
    if plan.target_count == 0 {
        return Ok(Vec::new());
    }
    if plan.pools.iter().all(|p| p.excerpts.is_empty()) {
        return Err(Error::Generation {
            activity: plan.activity.to_string(),
            message: "no participant has source excerpts".into(),
        });
    }
    let per_draw = plan
        .pools
        .iter()
        .flat_map(|p| &p.excerpts)
        .map(|e| match plan.policy {
            WindowPolicy::TransferFullSpan => e.windows().max(1),
            _ => 1,
        })
        .min()
        .unwrap_or(1);
    let mut out: Vec<LabeledWindow<T>> = Vec::with_capacity(plan.target_count);
    let mut next_draw = 0u64;
    while out.len() < plan.target_count {
        let batch = (plan.target_count - out.len()).div_ceil(per_draw) as u64;
        let results: Vec<Result<Vec<LabeledWindow<T>>>> = (next_draw..next_draw + batch)
            .into_par_iter()
            .map(|d| draw_with_retries(plan, config, seed, d))
            .collect();
        next_draw += batch;
        for r in results {
            for w in r? {
                if out.len() < plan.target_count {
                    out.push(w);
                }
            }
        }
    }
    Ok(out)
}

/// Synthesises a count-matched dataset for every activity present in `real`.
pub fn synthesize_dataset<T: Real>(
    real: &[LabeledWindow<T>],
    config: &SynthesisConfig,
    seed: u64,
) -> Result<Vec<LabeledWindow<T>>> {
    let mut out = Vec::new();
    for activity in FineLabel::ALL {
        if !real.iter().any(|w| w.label == activity) {
            continue;
        }
        let plan = SynthesisPlan::from_windows(activity, real, config)?;
        let activity_seed = derive_seed(seed, &[activity.index() as u64]);
        out.extend(generate_synthetic(&plan, config, activity_seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(pid: &str, label: FineLabel, start: f64, fill: impl Fn(usize, usize) -> f64) -> LabeledWindow<f64> {
        LabeledWindow::new(
            pid,
            label,
            start,
            (0..50).map(|i| [fill(0, i), fill(1, i), fill(2, i)]).collect(),
            (0..256).map(|i| [fill(3, i), fill(4, i), fill(5, i)]).collect(),
            Origin::Real,
        )
        .unwrap()
    }

    #[test]
    fn identical_static_pool_reproduces_window() {
        let real: Vec<_> = (0..8)
            .flat_map(|p| {
                (0..3).map(move |k| {
                    window(&format!("p{p}"), FineLabel::Standing, 2.0 * k as f64, |c, _| {
                        c as f64 * 0.25
                    })
                })
            })
            .collect();
        let plan = SynthesisPlan::from_windows(FineLabel::Standing, &real, &SynthesisConfig::default()).unwrap();
        assert_eq!(plan.target_count, 24);
        let synth = generate_synthetic(&plan, &SynthesisConfig::default(), 3).unwrap();
        assert_eq!(synth.len(), 24);
        for w in &synth {
            assert_eq!(w.origin, Origin::Synthetic);
            assert_eq!(w.thigh, real[0].thigh);
            assert_eq!(w.back, real[0].back);
        }
    }

    #[test]
    fn walking_windows_are_trimmed_to_two_seconds() {
        let real: Vec<_> = (0..3)
            .flat_map(|p| {
                (0..4).map(move |k| {
                    window(&format!("p{p}"), FineLabel::Walking, 2.0 * k as f64, move |c, i| {
                        let rate = if c < 3 { 25.0 } else { 128.0 };
                        (std::f64::consts::TAU * (1.0 + 0.1 * p as f64) * (i as f64 / rate)).sin() + c as f64
                    })
                })
            })
            .collect();
        let plan = SynthesisPlan::from_windows(FineLabel::Walking, &real, &SynthesisConfig::default()).unwrap();
        assert!(plan
            .pools
            .iter()
            .all(|p| p.excerpts.len() == 3 && p.excerpts[0].thigh.len() == 100));
        let synth = generate_synthetic(&plan, &SynthesisConfig::default(), 1).unwrap();
        assert_eq!(synth.len(), 12);
        assert!(synth
            .iter()
            .all(|w| w.thigh.len() == 50 && w.back.len() == 256 && w.validate().is_ok()));
    }

    #[test]
    fn transfer_runs_are_split_into_windows() {
        let mut real = Vec::new();
        for p in 0..4 {
            let pid = format!("p{p}");
            real.push(window(&pid, FineLabel::SitToStand, 10.0, |c, _| c as f64));
            real.push(window(&pid, FineLabel::SitToStand, 12.0, |c, _| c as f64 + 1.0));
            real.push(window(&pid, FineLabel::SitToStand, 40.0, |c, _| c as f64));
        }
        let plan = SynthesisPlan::from_windows(FineLabel::SitToStand, &real, &SynthesisConfig::default()).unwrap();
        assert_eq!(plan.policy, WindowPolicy::TransferFullSpan);
        assert_eq!(plan.pools[0].excerpts.len(), 2);
        assert_eq!(plan.target_count, 12);
        let synth = generate_synthetic(&plan, &SynthesisConfig::default(), 9).unwrap();
        assert_eq!(synth.len(), 12);
    }

    #[test]
    fn dataset_counts_match_and_are_deterministic() {
        let mut real = Vec::new();
        for p in 0..5 {
            let pid = format!("p{p}");
            for k in 0..3 {
                real.push(window(&pid, FineLabel::Sitting, 2.0 * k as f64, move |c, i| {
                    (i as f64 * 0.01 * (p + 1) as f64).cos() + c as f64
                }));
            }
            real.push(window(&pid, FineLabel::Supine, 50.0, move |c, _| {
                -(c as f64) + p as f64 * 0.1
            }));
        }
        let cfg = SynthesisConfig::default();
        let a = synthesize_dataset(&real, &cfg, 42).unwrap();
        let b = synthesize_dataset(&real, &cfg, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|w| w.label == FineLabel::Sitting).count(), 15);
        assert_eq!(a.iter().filter(|w| w.label == FineLabel::Supine).count(), 5);
    }
}
