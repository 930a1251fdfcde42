use crate::scalar::Real;

use super::{samples_for, LabeledWindow, Origin, RecordingSession};

/// Tiles the session into non-overlapping windows from its origin, keeping
/// only windows fully covered by a single annotation interval.
pub fn segment<T: Real>(session: &RecordingSession<T>, window_s: f64) -> Vec<LabeledWindow<T>> {
    let origin = session.origin();
    let end = session.end();
    let thigh_len = samples_for(window_s, session.thigh.rate_hz);
    let back_len = samples_for(window_s, session.back.rate_hz);
    let mut windows = Vec::new();
    let mut k = 0usize;
    loop {
        let start = origin + k as f64 * window_s;
        let stop = start + window_s;
        if stop > end + 1e-9 {
            break;
        }
        k += 1;
        let Some(iv) = session.annotations.covering(start, stop) else {
            continue;
        };
        let (Some(ti), Some(bi)) = (session.thigh.index_at(start), session.back.index_at(start)) else {
            continue;
        };
        if ti + thigh_len > session.thigh.len() || bi + back_len > session.back.len() {
            continue;
        }
        windows.push(LabeledWindow {
            participant_id: session.participant_id.clone(),
            label: iv.label,
            start_s: start,
            thigh: session.thigh.samples[ti..ti + thigh_len].to_vec(),
            back: session.back.samples[bi..bi + back_len].to_vec(),
            origin: Origin::Real,
        });
    }
    windows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{AnnotationTrack, FineLabel, Interval, SensorId, TriaxialSeries};

    fn session(seconds: usize, intervals: Vec<Interval>) -> RecordingSession<f64> {
        let thigh = (0..25 * seconds).map(|i| [i as f64, 0.0, 1.0]).collect();
        let back = (0..128 * seconds).map(|i| [i as f64, 0.0, 1.0]).collect();
        RecordingSession {
            participant_id: "p".into(),
            thigh: TriaxialSeries::new(SensorId::UpperThigh, 25.0, 0.0, thigh).unwrap(),
            back: TriaxialSeries::new(SensorId::LowerBack, 128.0, 0.0, back).unwrap(),
            annotations: AnnotationTrack::new(intervals).unwrap(),
        }
    }

    fn iv(start: f64, end: f64, label: FineLabel) -> Interval {
        Interval { start, end, label }
    }

    #[test]
    fn single_interval_tiles_fully() {
        let s = session(10, vec![iv(0.0, 10.0, FineLabel::Sitting)]);
        let w = segment(&s, 2.0);
        assert_eq!(w.len(), 5);
        assert!(w.iter().all(|w| w.label == FineLabel::Sitting && w.validate().is_ok()));
        let starts: Vec<f64> = w.iter().map(|w| w.start_s).collect();
        assert_eq!(starts, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
        // Both slices come from the same absolute span.
        assert_eq!(w[2].thigh[0][0], 100.0);
        assert_eq!(w[2].back[0][0], 512.0);
    }

    #[test]
    fn mixed_window_is_dropped() {
        let s = session(
            4,
            vec![iv(0.0, 3.0, FineLabel::Sitting), iv(3.0, 4.0, FineLabel::Standing)],
        );
        let w = segment(&s, 2.0);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].start_s, 0.0);
    }

    #[test]
    fn partial_coverage_yields_nothing() {
        let s = session(4, vec![iv(0.25, 1.75, FineLabel::Walking)]);
        assert!(segment(&s, 2.0).is_empty());
    }

    #[test]
    fn tiling_starts_where_both_streams_exist() {
        let mut s = session(10, vec![iv(0.0, 12.0, FineLabel::Standing)]);
        s.thigh.start_time = 1.0;
        let w = segment(&s, 2.0);
        assert_eq!(
            w.iter().map(|w| w.start_s).collect::<Vec<_>>(),
            vec![1.0, 3.0, 5.0, 7.0]
        );
    }
}
