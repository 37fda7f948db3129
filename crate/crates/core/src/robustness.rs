//! Robustness certification of surrogate-based optimization results.
//!
//! A statistically sized subsample of the optimizer's population history is
//! re-evaluated through the rigorous oracle; the signed sum of deviations
//! per objective (Rb) must stay within a tolerance for the run to count as
//! robust. Front-agreement diagnostics (generational distance and
//! hypervolume) compare the surrogate-based Pareto front with one obtained
//! directly on the rigorous model.

use crate::doe::{lhs_subsample, SubsampleMethod};
use crate::error::{CoreError, Result};
use crate::mopso::PopulationHistory;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Parameters of the sample-size rule Np = z^2 sigma (1 - sigma) / E^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeSpec {
    pub zscore: f64,
    pub sigma: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "N")]
    pub finite_population: Option<usize>,
}

impl Default for SampleSizeSpec {
    /// The 99% parameterization used by the reproduction runs: z = 2.576,
    /// the conservative proportion 0.5, and E = 0.066, giving 381 samples.
    fn default() -> Self {
        SampleSizeSpec {
            zscore: 2.576,
            sigma: 0.5,
            e: 0.066,
            finite_population: None,
        }
    }
}

/// Number of samples needed for a representative subsample. The finite
/// population correction, when requested, applies before rounding up.
pub fn sample_size(spec: &SampleSizeSpec) -> Result<usize> {
    if !(spec.zscore > 0.0) || !(spec.e > 0.0) || !(spec.sigma > 0.0 && spec.sigma < 1.0) {
        return Err(CoreError::InvalidArgument(
            "sample size needs zscore > 0, E > 0, and sigma in (0,1)".into(),
        ));
    }
    let raw = spec.zscore * spec.zscore * spec.sigma * (1.0 - spec.sigma) / (spec.e * spec.e);
    let corrected = match spec.finite_population {
        Some(n) if n > 0 => raw / (1.0 + (raw - 1.0) / n as f64),
        _ => raw,
    };
    Ok((corrected.ceil() as usize).max(1))
}

/// Signed deviation sum and mean absolute deviation over
/// (rigorous, surrogate) pairs, in fixed input order.
pub fn compute_rb(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.is_empty() {
        return Err(CoreError::InvalidArgument(
            "compute_rb needs at least one pair".into(),
        ));
    }
    let mut rb = 0.0;
    let mut abs_sum = 0.0;
    for &(f, h) in pairs {
        let d = f - h;
        rb += d;
        abs_sum += d.abs();
    }
    Ok((rb, abs_sum / pairs.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessConfig {
    /// Tolerance on |Rb| per objective.
    pub epsilon: f64,
    /// Nominal confidence level recorded in the report.
    pub confidence: f64,
    pub spec: SampleSizeSpec,
    /// Compute deviations on min-max normalized objectives (ranges taken
    /// from the surrogate values across the full history).
    pub normalize: bool,
    pub method: SubsampleMethod,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        RobustnessConfig {
            epsilon: 0.05,
            confidence: 0.99,
            spec: SampleSizeSpec::default(),
            normalize: true,
            method: SubsampleMethod::LhsNearest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVerdict {
    pub rb: f64,
    pub mae: f64,
    pub pass: bool,
}

/// Everything needed to reproduce and audit one certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub problem: String,
    pub epsilon: f64,
    pub confidence: f64,
    pub np: usize,
    pub spec: SampleSizeSpec,
    pub per_objective: Vec<ObjectiveVerdict>,
    pub sample_indices: Vec<usize>,
    pub seed: u64,
    pub normalized: bool,
    pub verdict: String,
}

impl RobustnessReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

/// Re-evaluates a subsample of the population history through the rigorous
/// oracle and tests |Rb| <= epsilon per objective.
///
/// The absolute value is deliberate: the deviation sum is signed and a
/// large negative sum indicates just as much disagreement as a positive
/// one.
pub fn certify<E>(
    history: &PopulationHistory,
    oracle: &E,
    problem: &str,
    config: &RobustnessConfig,
    seed: u64,
) -> Result<RobustnessReport>
where
    E: Fn(&[f64]) -> Result<(Vec<f64>, Vec<f64>)> + Sync,
{
    if history.is_empty() {
        return Err(CoreError::InvalidArgument(
            "population history is empty".into(),
        ));
    }
    if !(config.epsilon > 0.0) {
        return Err(CoreError::InvalidArgument("epsilon must be positive".into()));
    }
    let np = sample_size(&config.spec)?;
    if np > history.len() {
        return Err(CoreError::InsufficientPopulation {
            population: history.len(),
            needed: np,
        });
    }
    let positions = history.positions();
    let sample_indices = lhs_subsample(&positions, np, seed, config.method)?;

    let rigorous: Vec<Result<(Vec<f64>, Vec<f64>)>> = sample_indices
        .par_iter()
        .map(|&i| oracle(&history.records[i].x))
        .collect();
    let mut rigorous_f = Vec::with_capacity(np);
    for r in rigorous {
        rigorous_f.push(r?.0);
    }

    let m = history.records[0].f.len();
    let mut per_objective = Vec::with_capacity(m);
    for j in 0..m {
        let (lo, hi) = if config.normalize {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in &history.records {
                lo = lo.min(r.f[j]);
                hi = hi.max(r.f[j]);
            }
            (lo, hi)
        } else {
            (0.0, 1.0)
        };
        let scale = if hi > lo { hi - lo } else { 1.0 };
        let pairs: Vec<(f64, f64)> = sample_indices
            .iter()
            .zip(&rigorous_f)
            .map(|(&i, rf)| {
                (
                    (rf[j] - lo) / scale,
                    (history.records[i].f[j] - lo) / scale,
                )
            })
            .collect();
        let (rb, mae) = compute_rb(&pairs)?;
        per_objective.push(ObjectiveVerdict {
            rb,
            mae,
            pass: rb.abs() <= config.epsilon,
        });
    }
    let all_pass = per_objective.iter().all(|o| o.pass);
    Ok(RobustnessReport {
        problem: problem.into(),
        epsilon: config.epsilon,
        confidence: config.confidence,
        np,
        spec: config.spec.clone(),
        per_objective,
        sample_indices,
        seed,
        normalized: config.normalize,
        verdict: if all_pass { "pass" } else { "fail" }.into(),
    })
}

/// Agreement diagnostics between two Pareto fronts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontAgreement {
    pub generational_distance: f64,
    pub hypervolume_a: f64,
    pub hypervolume_b: f64,
}

/// Generational distance from front a to front b (in objective space
/// normalized by the union's per-objective ranges) plus the hypervolume of
/// each front against the supplied reference point (in raw units).
pub fn front_agreement(
    front_a: &[Vec<f64>],
    front_b: &[Vec<f64>],
    reference: &[f64],
) -> Result<FrontAgreement> {
    if front_a.is_empty() || front_b.is_empty() {
        return Err(CoreError::InvalidArgument("fronts must be nonempty".into()));
    }
    let m = reference.len();
    if front_a.iter().chain(front_b).any(|f| f.len() != m) {
        return Err(CoreError::InvalidArgument(
            "front members and reference must share one objective count".into(),
        ));
    }
    for f in front_a.iter().chain(front_b) {
        let le_all = reference.iter().zip(f).all(|(&r, &v)| r <= v);
        let lt_any = reference.iter().zip(f).any(|(&r, &v)| r < v);
        if le_all && lt_any {
            return Err(CoreError::InvalidArgument(
                "reference point dominates a front member".into(),
            ));
        }
    }

    // normalize by the union's bounding box; degenerate ranges fall back
    // to raw differences
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for f in front_a.iter().chain(front_b) {
        for j in 0..m {
            lo[j] = lo[j].min(f[j]);
            hi[j] = hi[j].max(f[j]);
        }
    }
    let scale: Vec<f64> = (0..m)
        .map(|j| {
            let r = hi[j] - lo[j];
            if r > 1e-12 {
                1.0 / r
            } else {
                1.0
            }
        })
        .collect();
    let gd = front_a
        .iter()
        .map(|a| {
            front_b
                .iter()
                .map(|b| {
                    a.iter()
                        .zip(b)
                        .zip(&scale)
                        .map(|((&av, &bv), &s)| ((av - bv) * s).powi(2))
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum::<f64>()
        / front_a.len() as f64;

    Ok(FrontAgreement {
        generational_distance: gd,
        hypervolume_a: hypervolume(front_a, reference)?,
        hypervolume_b: hypervolume(front_b, reference)?,
    })
}

/// Hypervolume dominated by a front relative to a reference point, for one
/// to three objectives. Points that do not strictly dominate the reference
/// contribute nothing.
pub fn hypervolume(front: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    match reference.len() {
        1 => {
            let best = front.iter().map(|f| f[0]).fold(f64::INFINITY, f64::min);
            Ok((reference[0] - best).max(0.0))
        }
        2 => Ok(hv2(
            &front
                .iter()
                .map(|f| (f[0], f[1]))
                .collect::<Vec<_>>(),
            (reference[0], reference[1]),
        )),
        3 => Ok(hv3(front, reference)),
        m => Err(CoreError::InvalidArgument(format!(
            "hypervolume supports 1 to 3 objectives, got {m}"
        ))),
    }
}

/// Exact 2-D hypervolume by a sweep over the nondominated staircase.
fn hv2(points: &[(f64, f64)], reference: (f64, f64)) -> f64 {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(a, b)| a < reference.0 && b < reference.1)
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut hv = 0.0;
    let mut prev_y = reference.1;
    for &(x, y) in &pts {
        if y < prev_y {
            hv += (reference.0 - x) * (prev_y - y);
            prev_y = y;
        }
    }
    hv
}

/// Exact 3-D hypervolume by slicing along the first objective and summing
/// 2-D staircase volumes per slab.
fn hv3(front: &[Vec<f64>], reference: &[f64]) -> f64 {
    let pts: Vec<&Vec<f64>> = front
        .iter()
        .filter(|f| f[0] < reference[0] && f[1] < reference[1] && f[2] < reference[2])
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    let mut levels: Vec<f64> = pts.iter().map(|f| f[0]).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let mut hv = 0.0;
    for (k, &level) in levels.iter().enumerate() {
        let next = if k + 1 < levels.len() {
            levels[k + 1]
        } else {
            reference[0]
        };
        let slab: Vec<(f64, f64)> = pts
            .iter()
            .filter(|f| f[0] <= level)
            .map(|f| (f[1], f[2]))
            .collect();
        hv += (next - level) * hv2(&slab, (reference[1], reference[2]));
    }
    hv
}
