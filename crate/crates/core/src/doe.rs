//! Design of experiments: Latin hypercube sampling, bound scaling,
//! correlation diagnostics, and without-replacement subsampling of finite
//! populations.

use crate::error::{CoreError, Result};
use crate::rng::rng_from_seed;
use rand::seq::SliceRandom;
use rand::Rng;

/// A Latin hypercube plan over the unit cube [0,1)^dim.
///
/// For every dimension the n values are stratified: exactly one value falls
/// in each interval [k/n, (k+1)/n).
#[derive(Debug, Clone)]
pub struct LhsPlan {
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
    /// n rows, dim columns.
    pub points: Vec<Vec<f64>>,
}

/// Draws a stratified Latin hypercube sample.
pub fn lhs_sample(n: usize, dim: usize, seed: u64) -> Result<LhsPlan> {
    if n == 0 || dim == 0 {
        return Err(CoreError::InvalidArgument(format!(
            "lhs_sample requires n >= 1 and dim >= 1, got n={n}, dim={dim}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut points = vec![vec![0.0; dim]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for d in 0..dim {
        strata.shuffle(&mut rng);
        for (row, &k) in strata.iter().enumerate() {
            let jitter: f64 = rng.random();
            points[row][d] = (k as f64 + jitter) / n as f64;
        }
    }
    Ok(LhsPlan {
        n,
        dim,
        seed,
        points,
    })
}

/// Maps unit-cube coordinates into problem units, column by column.
pub fn scale_to_bounds(plan: &LhsPlan, bounds: &[(f64, f64)]) -> Result<Vec<Vec<f64>>> {
    if plan.dim != bounds.len() {
        return Err(CoreError::DimensionMismatch {
            expected: plan.dim,
            got: bounds.len(),
        });
    }
    Ok(plan
        .points
        .iter()
        .map(|row| {
            row.iter()
                .zip(bounds)
                .map(|(&u, &(lo, hi))| lo + u * (hi - lo))
                .collect()
        })
        .collect())
}

/// Pearson correlation matrix over the columns of a data matrix.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub r: Vec<Vec<f64>>,
    /// Columns with zero variance; these correlate 0 with everything by
    /// convention.
    pub constant_columns: Vec<usize>,
}

pub fn correlation_matrix(data: &[Vec<f64>], labels: &[String]) -> Result<CorrelationMatrix> {
    let n = data.len();
    if n < 2 {
        return Err(CoreError::InvalidArgument(format!(
            "correlation needs at least 2 rows, got {n}"
        )));
    }
    let m = data[0].len();
    if labels.len() != m {
        return Err(CoreError::DimensionMismatch {
            expected: m,
            got: labels.len(),
        });
    }
    let mean: Vec<f64> = (0..m)
        .map(|j| data.iter().map(|row| row[j]).sum::<f64>() / n as f64)
        .collect();
    let sdev: Vec<f64> = (0..m)
        .map(|j| {
            data.iter()
                .map(|row| (row[j] - mean[j]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let constant_columns: Vec<usize> = (0..m).filter(|&j| sdev[j] == 0.0).collect();
    let mut r = vec![vec![0.0; m]; m];
    for i in 0..m {
        r[i][i] = 1.0;
        for j in (i + 1)..m {
            let val = if sdev[i] == 0.0 || sdev[j] == 0.0 {
                0.0
            } else {
                let cov: f64 = data
                    .iter()
                    .map(|row| (row[i] - mean[i]) * (row[j] - mean[j]))
                    .sum();
                cov / (sdev[i] * sdev[j])
            };
            r[i][j] = val;
            r[j][i] = val;
        }
    }
    Ok(CorrelationMatrix {
        labels: labels.to_vec(),
        r,
        constant_columns,
    })
}

/// How to draw the without-replacement subsample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsampleMethod {
    /// Generate k LHS points over the population's bounding box, then claim
    /// each point's nearest unclaimed member. This spreads the subsample
    /// across the region the population actually covered.
    LhsNearest,
    /// Plain uniform draw without replacement, kept as a sensitivity check.
    Uniform,
}

impl std::str::FromStr for SubsampleMethod {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lhs" | "lhs-nearest" => Ok(SubsampleMethod::LhsNearest),
            "uniform" => Ok(SubsampleMethod::Uniform),
            other => Err(CoreError::InvalidArgument(format!(
                "unknown subsample method '{other}', expected 'lhs' or 'uniform'"
            ))),
        }
    }
}

/// Selects k distinct member indices from a population of position vectors.
pub fn lhs_subsample(
    positions: &[Vec<f64>],
    k: usize,
    seed: u64,
    method: SubsampleMethod,
) -> Result<Vec<usize>> {
    let n = positions.len();
    if k == 0 || k > n {
        return Err(CoreError::InvalidArgument(format!(
            "subsample size must satisfy 1 <= k <= population ({n}), got {k}"
        )));
    }
    match method {
        SubsampleMethod::Uniform => {
            let mut idx: Vec<usize> = (0..n).collect();
            let mut rng = rng_from_seed(seed);
            idx.shuffle(&mut rng);
            idx.truncate(k);
            Ok(idx)
        }
        SubsampleMethod::LhsNearest => {
            let dim = positions[0].len();
            let mut lo = vec![f64::INFINITY; dim];
            let mut hi = vec![f64::NEG_INFINITY; dim];
            for p in positions {
                for d in 0..dim {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
            let scale: Vec<f64> = (0..dim)
                .map(|d| {
                    let r = hi[d] - lo[d];
                    if r > 0.0 {
                        1.0 / r
                    } else {
                        0.0
                    }
                })
                .collect();
            let normalized: Vec<Vec<f64>> = positions
                .iter()
                .map(|p| (0..dim).map(|d| (p[d] - lo[d]) * scale[d]).collect())
                .collect();
            let plan = lhs_sample(k, dim, seed)?;
            let mut claimed = vec![false; n];
            let mut selected = Vec::with_capacity(k);
            for target in &plan.points {
                let mut best = usize::MAX;
                let mut best_d2 = f64::INFINITY;
                for (i, p) in normalized.iter().enumerate() {
                    if claimed[i] {
                        continue;
                    }
                    let d2: f64 = p
                        .iter()
                        .zip(target)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d2 < best_d2 {
                        best_d2 = d2;
                        best = i;
                    }
                }
                claimed[best] = true;
                selected.push(best);
            }
            Ok(selected)
        }
    }
}
