use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{FineLabel, Origin};

use super::catalog::catalog;
use super::extract::FeatureVector;

/// Row-major feature table with per-row participant, label and origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    data: Vec<f64>,
    pub participants: Vec<String>,
    pub labels: Vec<FineLabel>,
    pub origins: Vec<Origin>,
}

impl FeatureMatrix {
    pub fn empty(names: Vec<String>) -> Self {
        Self {
            names,
            data: Vec::new(),
            participants: Vec::new(),
            labels: Vec::new(),
            origins: Vec::new(),
        }
    }

    /// Builds a matrix over the full catalog from extracted vectors.
    pub fn from_vectors(rows: Vec<FeatureVector<f64>>) -> Self {
        let mut m = Self::empty(catalog().names().into_iter().map(String::from).collect());
        for r in rows {
            m.push_row(&r.values, r.participant_id, r.label, r.origin)
                .expect("extracted vectors have catalog width");
        }
        m
    }

    pub fn push_row(&mut self, values: &[f64], participant: String, label: FineLabel, origin: Origin) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::Format(format!(
                "row has {} values, expected {}",
                values.len(),
                self.names.len()
            )));
        }
        self.data.extend_from_slice(values);
        self.participants.push(participant);
        self.labels.push(label);
        self.origins.push(origin);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.get(i, j)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut m = Self::empty(self.names.clone());
        for &i in rows {
            m.data.extend_from_slice(self.row(i));
            m.participants.push(self.participants[i].clone());
            m.labels.push(self.labels[i]);
            m.origins.push(self.origins[i]);
        }
        m
    }

    /// Keeps the named columns in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n.as_ref())
                    .ok_or_else(|| Error::Format(format!("unknown feature `{}`", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut m = Self::empty(names.iter().map(|n| n.as_ref().to_string()).collect());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            m.data.extend(idx.iter().map(|&j| row[j]));
        }
        m.participants = self.participants.clone();
        m.labels = self.labels.clone();
        m.origins = self.origins.clone();
        Ok(m)
    }

    /// Sorted distinct participant ids.
    pub fn participant_ids(&self) -> Vec<String> {
        let mut ids = self.participants.clone();
        ids.sort();
        ids.dedup();
        ids
    }

    /// Header: feature names then `participant,label,origin`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.names.iter().map(String::as_str).collect();
        header.extend(["participant", "label", "origin"]);
        wtr.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut rec: Vec<String> = self.row(i).iter().map(f64::to_string).collect();
            rec.push(self.participants[i].clone());
            rec.push(self.labels[i].as_str().to_string());
            rec.push(self.origins[i].as_str().to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
        let tail = ["participant", "label", "origin"];
        if header.len() < 4 || header[header.len() - 3..] != tail {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "header must end with participant,label,origin".into(),
            });
        }
        let nf = header.len() - 3;
        let mut m = Self::empty(header[..nf].to_vec());
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = k + 2;
            let bad = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            };
            if rec.len() != header.len() {
                return Err(bad(format!("expected {} fields, found {}", header.len(), rec.len())));
            }
            let values = (0..nf)
                .map(|j| {
                    rec[j]
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| bad(format!("feature `{}`: invalid value `{}`", header[j], &rec[j])))
                })
                .collect::<Result<Vec<_>>>()?;
            let label: FineLabel = rec[nf + 1]
                .parse()
                .map_err(|_| bad(format!("unknown label `{}`", &rec[nf + 1])))?;
            let origin = match &rec[nf + 2] {
                "real" => Origin::Real,
                "synthetic" => Origin::Synthetic,
                other => return Err(bad(format!("unknown origin `{other}`"))),
            };
            m.push_row(&values, rec[nf].to_string(), label, origin)?;
        }
        Ok(m)
    }
}

/// Per-column mean and sample deviation from a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl StandardizationStats {
    pub fn fit(matrix: &FeatureMatrix) -> Result<Self> {
        if matrix.n_rows() == 0 {
            return Err(Error::param("cannot fit a standardizer on an empty matrix"));
        }
        let (mean, sd) = (0..matrix.n_cols())
            .map(|j| {
                let col = matrix.column(j);
                (super::extract::mean(&col), super::extract::std_dev(&col))
            })
            .unzip();
        Ok(Self {
            names: matrix.names.clone(),
            mean,
            sd,
        })
    }

    /// Z-scores one row; zero-deviation columns map to 0.
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }

    pub fn apply(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
        if matrix.names != self.names {
            return Err(Error::Format(
                "matrix columns differ from the fitted standardizer".into(),
            ));
        }
        let mut out = FeatureMatrix::empty(matrix.names.clone());
        for i in 0..matrix.n_rows() {
            out.push_row(
                &self.apply_row(matrix.row(i)),
                matrix.participants[i].clone(),
                matrix.labels[i],
                matrix.origins[i],
            )?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FeatureMatrix {
        let mut m = FeatureMatrix::empty(vec!["a".into(), "b".into(), "c".into()]);
        for (i, v) in [[1.0, 5.0, 2.0], [2.0, 5.0, 4.0], [4.0, 5.0, 9.0], [7.0, 5.0, 1.0]]
            .iter()
            .enumerate()
        {
            m.push_row(v, format!("p{}", i % 2), FineLabel::Sitting, Origin::Real)
                .unwrap();
        }
        m
    }

    #[test]
    fn standardized_columns_are_centered_and_scaled() {
        let m = toy();
        let st = StandardizationStats::fit(&m).unwrap();
        let z = st.apply(&m).unwrap();
        for j in 0..3 {
            let col = z.column(j);
            let mu: f64 = col.iter().sum::<f64>() / 4.0;
            assert!(mu.abs() < 1e-10);
            let var: f64 = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / 3.0;
            if j == 1 {
                assert!(col.iter().all(|&v| v == 0.0));
            } else {
                assert!((var - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fit_uses_only_given_rows() {
        let m = toy();
        let train = m.select_rows(&[0, 1]);
        let st = StandardizationStats::fit(&train).unwrap();
        assert_eq!(st.mean, vec![1.5, 5.0, 3.0]);
        let test = st.apply(&m.select_rows(&[2, 3])).unwrap();
        assert!(test.column(0).iter().sum::<f64>().abs() > 1.0);
    }

    #[test]
    fn csv_round_trip_and_column_selection() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut m = toy();
        m.origins[3] = Origin::Synthetic;
        m.write_csv(&path).unwrap();
        assert_eq!(FeatureMatrix::read_csv(&path).unwrap(), m);
        let s = m.select_columns(&["c", "a"]).unwrap();
        assert_eq!(s.row(2), &[9.0, 4.0]);
        assert!(m.select_columns(&["zz"]).is_err());
        assert_eq!(m.participant_ids(), vec!["p0", "p1"]);
    }

    #[test]
    fn csv_rejects_bad_values_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(
            &path,
            "a,participant,label,origin\n1,p,sitting,real\nx,p,sitting,real\n",
        )
        .unwrap();
        match FeatureMatrix::read_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
