//! Sample representation, the bundled digoxin dataset, and CSV input/output.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// An iid sample of `(x, y, z)` triples, stored column-wise.
///
/// `x` is the conditioning variable; the hypothesis under test is
/// `y ⫫ z | x`. All entries are finite and `n ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<f64>,
}

impl Sample {
    pub fn from_rows(rows: &[(f64, f64, f64)]) -> Result<Self> {
        let xs = rows.iter().map(|r| r.0).collect();
        let ys = rows.iter().map(|r| r.1).collect();
        let zs = rows.iter().map(|r| r.2).collect();
        Self::from_columns(xs, ys, zs)
    }

    pub fn from_columns(xs: Vec<f64>, ys: Vec<f64>, zs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidArgument(
                "sample must contain at least one row".into(),
            ));
        }
        if xs.len() != ys.len() || xs.len() != zs.len() {
            return Err(Error::InvalidArgument(format!(
                "column lengths differ: x has {}, y has {}, z has {}",
                xs.len(),
                ys.len(),
                zs.len()
            )));
        }
        for (name, col) in [("x", &xs), ("y", &ys), ("z", &zs)] {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite value in column {name} at row {}",
                    i + 1
                )));
            }
        }
        Ok(Sample { xs, ys, zs })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.xs.len()
    }

    #[inline]
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    #[inline]
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    #[inline]
    pub fn zs(&self) -> &[f64] {
        &self.zs
    }

    pub fn row(&self, i: usize) -> (f64, f64, f64) {
        (self.xs[i], self.ys[i], self.zs[i])
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.n()).map(|i| self.row(i))
    }
}

/// Renal function of 35 consecutive patients under treatment for heart
/// failure with digoxin: creatinine clearance `x` and digoxin clearance `y`
/// in ml/min/1.73m², urine flow `z` in ml/min. Data from Halkin, Sheiner,
/// Peck & Melmon (1975), "Determinants of the renal clearance of digoxin",
/// Clinical Pharmacology and Therapeutics 17, 385-394.
///
/// The question of clinical interest is whether digoxin clearance is
/// independent of urine flow controlling for creatinine clearance.
pub fn digoxin_dataset() -> Sample {
    #[rustfmt::skip]
    const ROWS: [(f64, f64, f64); 35] = [
        (19.5, 17.5, 0.74), (24.7, 34.8, 0.43), (26.5, 11.4, 0.11),
        (31.1, 29.3, 1.48), (31.3, 13.9, 0.97), (31.8, 31.6, 1.12),
        (34.1, 20.7, 1.77), (36.6, 34.1, 0.70), (42.4, 25.0, 0.93),
        (42.8, 47.4, 2.50), (44.2, 31.8, 0.89), (49.7, 36.1, 0.52),
        (51.3, 22.7, 0.33), (55.0, 30.7, 0.80), (55.9, 42.5, 1.02),
        (61.2, 42.4, 0.56), (63.1, 61.1, 0.93), (63.7, 38.2, 0.44),
        (66.8, 37.5, 0.50), (72.4, 50.1, 0.97), (80.9, 50.2, 1.02),
        (82.0, 50.0, 0.95), (82.7, 31.8, 0.76), (87.9, 55.4, 1.06),
        (101.5, 110.6, 1.38), (105.0, 114.4, 1.85), (110.5, 69.3, 2.25),
        (114.2, 84.8, 1.76), (117.8, 63.9, 1.60), (122.6, 76.1, 0.88),
        (127.9, 112.8, 1.70), (135.6, 82.2, 0.98), (136.0, 46.8, 0.94),
        (153.5, 137.7, 1.76), (201.1, 76.1, 0.87),
    ];
    Sample::from_rows(&ROWS).expect("embedded dataset is valid")
}

/// A CSV data source: path plus the header names of the three columns.
#[derive(Clone, Debug)]
pub struct DatasetFile {
    pub path: PathBuf,
    pub x_column: String,
    pub y_column: String,
    pub z_column: String,
}

impl DatasetFile {
    /// A CSV file with the default column names `x`, `y`, `z`.
    pub fn new(path: impl Into<PathBuf>) -> Self {
        DatasetFile {
            path: path.into(),
            x_column: "x".into(),
            y_column: "y".into(),
            z_column: "z".into(),
        }
    }

    pub fn with_columns(
        mut self,
        x: impl Into<String>,
        y: impl Into<String>,
        z: impl Into<String>,
    ) -> Self {
        self.x_column = x.into();
        self.y_column = y.into();
        self.z_column = z.into();
        self
    }
}

/// Load a headered CSV file into a [`Sample`].
///
/// Rows are kept in file order. Errors carry location diagnostics: the
/// missing column name, or the 1-based data row and column of the first
/// non-numeric or non-finite cell.
pub fn load_csv(file: &DatasetFile) -> Result<Sample> {
    let path_str = file.path.display().to_string();
    let mut reader = csv::Reader::from_path(&file.path)?;
    let headers = reader.headers()?.clone();
    let index_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn {
                name: name.to_string(),
                path: path_str.clone(),
            })
    };
    let xi = index_of(&file.x_column)?;
    let yi = index_of(&file.y_column)?;
    let zi = index_of(&file.z_column)?;

    let (mut xs, mut ys, mut zs) = (Vec::new(), Vec::new(), Vec::new());
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |col: usize, name: &str| -> Result<f64> {
            let raw = record.get(col).unwrap_or("");
            match raw.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(Error::BadCell {
                    row: row_idx + 1,
                    column: name.to_string(),
                    path: path_str.clone(),
                    reason: format!("non-finite value {v}"),
                }),
                Err(e) => Err(Error::BadCell {
                    row: row_idx + 1,
                    column: name.to_string(),
                    path: path_str.clone(),
                    reason: format!("{e} (got {raw:?})"),
                }),
            }
        };
        xs.push(cell(xi, &file.x_column)?);
        ys.push(cell(yi, &file.y_column)?);
        zs.push(cell(zi, &file.z_column)?);
    }
    if xs.is_empty() {
        return Err(Error::EmptyDataset { path: path_str });
    }
    Sample::from_columns(xs, ys, zs)
}

/// Write a [`Sample`] as a headered `x,y,z` CSV.
///
/// Values are printed with the shortest representation that parses back to
/// the identical `f64`, so export followed by [`load_csv`] is lossless.
pub fn write_sample_csv(path: &Path, sample: &Sample) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x,y,z")?;
    for (x, y, z) in sample.rows() {
        writeln!(out, "{x},{y},{z}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::silverman_bandwidth;
    use approx::assert_relative_eq;

    #[test]
    fn digoxin_shape_and_edge_rows() {
        let d = digoxin_dataset();
        assert_eq!(d.n(), 35);
        assert_eq!(d.row(0), (19.5, 17.5, 0.74));
        assert_eq!(d.row(34), (201.1, 76.1, 0.87));
    }

    #[test]
    fn digoxin_has_tied_y_values() {
        // 76.1 appears twice in the y column; tie handling downstream is
        // deterministic, so the duplicate must survive ingestion.
        let d = digoxin_dataset();
        let dup = d.ys().iter().filter(|&&y| y == 76.1).count();
        assert_eq!(dup, 2);
    }

    #[test]
    fn digoxin_silverman_bandwidth() {
        let d = digoxin_dataset();
        let h = silverman_bandwidth(d.xs()).unwrap();
        assert_relative_eq!(h.value(), 22.47673160671349, epsilon = 1e-9);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("digoxin.csv");
        let d = digoxin_dataset();
        write_sample_csv(&path, &d).unwrap();
        let back = load_csv(&DatasetFile::new(&path)).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn csv_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,y,z\n1,2,3\n4,5,6\n7,8,9\n").unwrap();
        let s = load_csv(&DatasetFile::new(&path)).unwrap();
        assert_eq!(s.n(), 3);
        assert_eq!(s.row(2), (7.0, 8.0, 9.0));
    }

    #[test]
    fn csv_missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,y\n1,2\n").unwrap();
        match load_csv(&DatasetFile::new(&path)) {
            Err(Error::MissingColumn { name, .. }) => assert_eq!(name, "z"),
            other => panic!("expected missing-column error, got {other:?}"),
        }
    }

    #[test]
    fn csv_bad_cell_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,y,z\n1,2,3\n4,oops,6\n").unwrap();
        match load_csv(&DatasetFile::new(&path)) {
            Err(Error::BadCell { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "y");
            }
            other => panic!("expected bad-cell error, got {other:?}"),
        }
    }

    #[test]
    fn csv_column_remap() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "creatinine,digoxin,urine\n1,2,3\n").unwrap();
        let s = load_csv(
            &DatasetFile::new(&path).with_columns("creatinine", "digoxin", "urine"),
        )
        .unwrap();
        assert_eq!(s.row(0), (1.0, 2.0, 3.0));
    }

    #[test]
    fn csv_empty_dataset_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,y,z\n").unwrap();
        assert!(matches!(
            load_csv(&DatasetFile::new(&path)),
            Err(Error::EmptyDataset { .. })
        ));
    }

    #[test]
    fn sample_rejects_non_finite() {
        let err = Sample::from_rows(&[(1.0, f64::NAN, 3.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
