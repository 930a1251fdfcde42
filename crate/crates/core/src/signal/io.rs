//! CSV ingestion: sensor streams (`t,x,y,z`) and annotations (`start,end,label`).

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{AnnotationTrack, FineLabel, Interval, RecordingSession, SensorId, TriaxialSeries};

/// Maximum tolerated deviation of a sample interval from the nominal period.
const MAX_PERIOD_DEVIATION: f64 = 0.10;

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn check_header(path: &Path, rdr: &mut csv::Reader<std::fs::File>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers()?.clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_field(path: &Path, line: usize, name: &str, raw: Option<&str>) -> Result<f64> {
    let raw = raw.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("missing field `{name}`"),
    })?;
    let v: f64 = raw.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("field `{name}`: cannot parse `{raw}` as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("field `{name}` is not finite"),
        });
    }
    Ok(v)
}

/// Loads one sensor stream at its nominal sampling rate.
pub fn load_series<T: Real>(path: &Path, sensor: SensorId) -> Result<TriaxialSeries<T>> {
    let mut rdr = open(path)?;
    check_header(path, &mut rdr, &["t", "x", "y", "z"])?;
    let rate = sensor.nominal_rate_hz();
    let period = 1.0 / rate;
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        if rec.len() != 4 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected 4 fields, found {}", rec.len()),
            });
        }
        let t = parse_field(path, line, "t", rec.get(0))?;
        let x = parse_field(path, line, "x", rec.get(1))?;
        let y = parse_field(path, line, "y", rec.get(2))?;
        let z = parse_field(path, line, "z", rec.get(3))?;
        if let Some(&prev) = times.last() {
            let dt: f64 = t - prev;
            if dt <= 0.0 {
                return Err(Error::Format(format!(
                    "{}: non-monotone timestamp at line {line} ({t} after {prev})",
                    path.display()
                )));
            }
            if ((dt - period) / period).abs() >= MAX_PERIOD_DEVIATION {
                return Err(Error::Format(format!(
                    "{}: irregular sampling at line {line}: interval {dt} s vs nominal {period} s",
                    path.display()
                )));
            }
        }
        times.push(t);
        samples.push([T::lit(x), T::lit(y), T::lit(z)]);
    }
    if samples.is_empty() {
        return Err(Error::Format(format!("{}: empty series", path.display())));
    }
    TriaxialSeries::new(sensor, rate, times[0], samples)
}

pub fn load_annotations(path: &Path) -> Result<AnnotationTrack> {
    let mut rdr = open(path)?;
    check_header(path, &mut rdr, &["start", "end", "label"])?;
    let mut intervals = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        let start = parse_field(path, line, "start", rec.get(0))?;
        let end = parse_field(path, line, "end", rec.get(1))?;
        let label: FineLabel = rec.get(2).unwrap_or("").parse().map_err(|e: Error| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        intervals.push(Interval { start, end, label });
    }
    AnnotationTrack::new(intervals)
}

pub fn load_session<T: Real>(
    participant_id: &str,
    thigh_csv: &Path,
    back_csv: &Path,
    annot_csv: &Path,
) -> Result<RecordingSession<T>> {
    Ok(RecordingSession {
        participant_id: participant_id.to_string(),
        thigh: load_series(thigh_csv, SensorId::UpperThigh)?,
        back: load_series(back_csv, SensorId::LowerBack)?,
        annotations: load_annotations(annot_csv)?,
    })
}

pub fn write_series<T: Real>(path: &Path, series: &TriaxialSeries<T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "x", "y", "z"])?;
    for (i, s) in series.samples.iter().enumerate() {
        let t = series.start_time + i as f64 / series.rate_hz;
        w.write_record([
            format!("{t}"),
            format!("{}", s[0]),
            format!("{}", s[1]),
            format!("{}", s[2]),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_annotations(path: &Path, track: &AnnotationTrack) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["start", "end", "label"])?;
    for iv in track.intervals() {
        w.write_record([format!("{}", iv.start), format!("{}", iv.end), iv.label.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn three_row_thigh_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "t.csv",
            "t,x,y,z\n0.0,0.0,0.0,1.0\n0.04,0.0,0.0,1.0\n0.08,0.0,0.0,1.0\n",
        );
        let s: TriaxialSeries<f64> = load_series(&p, SensorId::UpperThigh).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.rate_hz, 25.0);
        assert!(s.samples.iter().all(|v| *v == [0.0, 0.0, 1.0]));
    }

    #[test]
    fn empty_sensor_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "t.csv", "t,x,y,z\n");
        let err = load_series::<f64>(&p, SensorId::UpperThigh).unwrap_err();
        assert!(err.to_string().contains("empty series"), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "t.csv", "t,x,y,z\n0.0,0,0,1\n0.04,abc,0,1\n");
        match load_series::<f64>(&p, SensorId::UpperThigh) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_monotone_and_irregular_timestamps() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "t.csv", "t,x,y,z\n0.0,0,0,1\n0.04,0,0,1\n0.02,0,0,1\n");
        assert!(matches!(
            load_series::<f64>(&p, SensorId::UpperThigh),
            Err(Error::Format(_))
        ));
        let p = write(&dir, "u.csv", "t,x,y,z\n0.0,0,0,1\n0.05,0,0,1\n");
        assert!(matches!(
            load_series::<f64>(&p, SensorId::UpperThigh),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn overlapping_annotation_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "start,end,label\n0,3,sitting\n2,4,standing\n");
        assert!(load_annotations(&p).is_err());
        let p = write(&dir, "b.csv", "start,end,label\n4,6,sit_to_stand\n0,4,sitting\n");
        let track = load_annotations(&p).unwrap();
        assert_eq!(track.intervals()[0].label, FineLabel::Sitting);
    }

    #[test]
    fn written_series_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let s = TriaxialSeries::new(SensorId::LowerBack, 128.0, 1.5, vec![[0.25f64, -0.5, 1.0]; 300]).unwrap();
        let p = dir.path().join("b.csv");
        write_series(&p, &s).unwrap();
        let back: TriaxialSeries<f64> = load_series(&p, SensorId::LowerBack).unwrap();
        assert_eq!(back.len(), 300);
        assert_eq!(back.start_time, 1.5);
        assert_eq!(back.samples, s.samples);
    }
}
