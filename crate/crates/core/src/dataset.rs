//! Tabular sample storage: inputs, outputs, CSV round-trip, and the
//! train/validation/test split.
//!
//! The CSV layout is `x1..xd,f1..fm,g1..gc` with one sample per row. Values
//! are written with Rust's shortest round-trip float formatting, so a file
//! read back reproduces every f64 bit for bit.

use crate::error::{CoreError, Result};
use crate::rng::rng_from_seed;
use rand::seq::SliceRandom;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

/// Row indices for the three holdout sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn output_index(&self, name: &str) -> Result<usize> {
        self.output_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| {
                CoreError::InvalidArgument(format!(
                    "no output column '{name}'; available: {}",
                    self.output_names.join(", ")
                ))
            })
    }

    /// Column of one output across all rows.
    pub fn output_column(&self, j: usize) -> Vec<f64> {
        self.outputs.iter().map(|row| row[j]).collect()
    }

    /// Splits rows into train/validation/test by a seeded shuffle.
    /// Fractions apply to validation and test; the remainder trains.
    pub fn split(&self, val_fraction: f64, test_fraction: f64, seed: u64) -> Result<Split> {
        if !(0.0..1.0).contains(&val_fraction)
            || !(0.0..1.0).contains(&test_fraction)
            || val_fraction + test_fraction >= 1.0
        {
            return Err(CoreError::InvalidArgument(format!(
                "fractions must lie in (0,1) and sum below 1, got val={val_fraction}, test={test_fraction}"
            )));
        }
        let n = self.len();
        let n_val = (n as f64 * val_fraction).floor() as usize;
        let n_test = (n as f64 * test_fraction).floor() as usize;
        if n_val + n_test >= n {
            return Err(CoreError::InvalidArgument(format!(
                "dataset of {n} rows is too small for val={n_val}, test={n_test}"
            )));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = rng_from_seed(seed);
        idx.shuffle(&mut rng);
        let train = idx[..n - n_val - n_test].to_vec();
        let val = idx[n - n_val - n_test..n - n_test].to_vec();
        let test = idx[n - n_test..].to_vec();
        Ok(Split { train, val, test })
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        let header: Vec<&str> = self
            .input_names
            .iter()
            .chain(self.output_names.iter())
            .map(String::as_str)
            .collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for (x, y) in self.inputs.iter().zip(&self.outputs) {
            let mut first = true;
            for v in x.iter().chain(y.iter()) {
                if !first {
                    s.push(',');
                }
                let _ = write!(s, "{v}");
                first = false;
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn from_csv_string(text: &str) -> Result<Dataset> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CoreError::MalformedData("empty CSV".into()))?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let d = names.iter().take_while(|n| n.starts_with('x')).count();
        if d == 0 || d == names.len() {
            return Err(CoreError::MalformedData(
                "header must contain x-columns followed by f/g-columns".into(),
            ));
        }
        for name in &names[d..] {
            if !name.starts_with('f') && !name.starts_with('g') {
                return Err(CoreError::MalformedData(format!(
                    "unexpected column '{name}' after input columns"
                )));
            }
        }
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::with_capacity(names.len());
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    CoreError::MalformedData(format!(
                        "line {}: cannot parse '{}' as a number",
                        lineno + 2,
                        field
                    ))
                })?;
                row.push(v);
            }
            if row.len() != names.len() {
                return Err(CoreError::MalformedData(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    names.len(),
                    row.len()
                )));
            }
            outputs.push(row.split_off(d));
            inputs.push(row);
        }
        Ok(Dataset {
            input_names: names[..d].to_vec(),
            output_names: names[d..].to_vec(),
            inputs,
            outputs,
        })
    }

    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_string(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset {
            input_names: vec!["x1".into(), "x2".into()],
            output_names: vec!["f1".into(), "g1".into()],
            inputs: vec![vec![0.1, 0.2], vec![0.3, 0.4], vec![1.0 / 3.0, 2.0 / 7.0]],
            outputs: vec![vec![1.5, -0.5], vec![2.5, 0.0], vec![f64::MIN_POSITIVE, 1e300]],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = toy();
        let text = ds.to_csv_string();
        let back = Dataset::from_csv_string(&text).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn header_declares_layout() {
        let text = toy().to_csv_string();
        assert!(text.starts_with("x1,x2,f1,g1\n"));
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let n = 1000;
        let ds = Dataset {
            input_names: vec!["x1".into()],
            output_names: vec!["f1".into()],
            inputs: (0..n).map(|i| vec![i as f64]).collect(),
            outputs: (0..n).map(|i| vec![i as f64]).collect(),
        };
        let sp = ds.split(0.15, 0.15, 7).unwrap();
        assert_eq!(sp.train.len(), 700);
        assert_eq!(sp.val.len(), 150);
        assert_eq!(sp.test.len(), 150);
        let mut all: Vec<usize> = sp
            .train
            .iter()
            .chain(&sp.val)
            .chain(&sp.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
        assert_eq!(ds.split(0.15, 0.15, 7).unwrap(), sp);
    }

    #[test]
    fn split_rejects_bad_fractions() {
        let ds = toy();
        assert!(ds.split(0.5, 0.5, 1).is_err());
        assert!(ds.split(-0.1, 0.2, 1).is_err());
    }

    #[test]
    fn missing_column_lists_alternatives() {
        let err = toy().output_index("f9").unwrap_err().to_string();
        assert!(err.contains("f1") && err.contains("g1"));
    }

    #[test]
    fn malformed_rows_are_reported() {
        assert!(Dataset::from_csv_string("x1,f1\n1.0\n").is_err());
        assert!(Dataset::from_csv_string("x1,f1\n1.0,abc\n").is_err());
        assert!(Dataset::from_csv_string("f1,x1\n1.0,2.0\n").is_err());
    }
}
