//! Constrained multiobjective particle swarm optimization.
//!
//! The optimizer runs over arbitrary evaluation functions (surrogates or
//! rigorous oracles), keeps a crowding-pruned nondominated archive, and
//! records every evaluation in an append-only population history that the
//! certification stage samples later.

use crate::error::{CoreError, Result};
use crate::rng::rng_from_seed;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Outcome of comparing two points under feasibility dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    A,
    B,
    Neither,
}

fn violation(g: &[f64]) -> f64 {
    g.iter().map(|&v| v.max(0.0)).sum()
}

fn pareto_dominates(fa: &[f64], fb: &[f64]) -> bool {
    let mut strict = false;
    for (&a, &b) in fa.iter().zip(fb) {
        if a > b {
            return false;
        }
        if a < b {
            strict = true;
        }
    }
    strict
}

/// Deb-style comparison: any feasible point beats any infeasible one;
/// two infeasible points compare by total violation; two feasible points
/// compare by Pareto dominance on the objectives.
pub fn feasibility_dominates(fa: &[f64], ga: &[f64], fb: &[f64], gb: &[f64]) -> Result<Dominance> {
    if fa.len() != fb.len() || ga.len() != gb.len() {
        return Err(CoreError::InvalidArgument(format!(
            "arity mismatch: f {} vs {}, g {} vs {}",
            fa.len(),
            fb.len(),
            ga.len(),
            gb.len()
        )));
    }
    let (va, vb) = (violation(ga), violation(gb));
    let (fea_a, fea_b) = (va == 0.0, vb == 0.0);
    Ok(match (fea_a, fea_b) {
        (true, false) => Dominance::A,
        (false, true) => Dominance::B,
        (false, false) => {
            if va < vb {
                Dominance::A
            } else if vb < va {
                Dominance::B
            } else {
                Dominance::Neither
            }
        }
        (true, true) => {
            if pareto_dominates(fa, fb) {
                Dominance::A
            } else if pareto_dominates(fb, fa) {
                Dominance::B
            } else {
                Dominance::Neither
            }
        }
    })
}

/// Crowding distance of each front member: the per-objective cuboid side
/// lengths, each normalized by that objective's range. Boundary members
/// get infinity; objectives with zero range contribute nothing.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    let m = front[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..m {
        order.sort_by(|&a, &b| {
            front[a][j]
                .partial_cmp(&front[b][j])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let lo = front[order[0]][j];
        let hi = front[order[n - 1]][j];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let (prev, next) = (front[order[w - 1]][j], front[order[w + 1]][j]);
            if dist[order[w]].is_finite() {
                dist[order[w]] += (next - prev) / range;
            }
        }
    }
    dist
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveMember {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

/// Bounded nondominated set under feasibility dominance.
#[derive(Debug, Clone)]
pub struct ParetoArchive {
    pub members: Vec<ArchiveMember>,
    pub capacity: usize,
}

impl ParetoArchive {
    pub fn new(capacity: usize) -> ParetoArchive {
        ParetoArchive {
            members: Vec::new(),
            capacity,
        }
    }

    pub fn objective_vectors(&self) -> Vec<Vec<f64>> {
        self.members.iter().map(|m| m.f.clone()).collect()
    }

    /// Adds the candidate unless an existing member dominates it; members
    /// the candidate dominates are dropped. When the archive overflows,
    /// the most crowded member is evicted.
    pub fn insert(&mut self, candidate: ArchiveMember) -> Result<bool> {
        let mut doomed = vec![false; self.members.len()];
        for (i, m) in self.members.iter().enumerate() {
            match feasibility_dominates(&m.f, &m.g, &candidate.f, &candidate.g)? {
                Dominance::A => return Ok(false),
                Dominance::B => doomed[i] = true,
                Dominance::Neither => {}
            }
        }
        let mut keep = doomed.iter().map(|&d| !d);
        self.members.retain(|_| keep.next().unwrap());
        self.members.push(candidate);
        while self.members.len() > self.capacity {
            let dist = crowding_distance(&self.objective_vectors());
            let evict = dist
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(i, _)| i)
                .unwrap();
            self.members.remove(evict);
        }
        Ok(true)
    }
}

/// One recorded evaluation; the certifier consumes these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iteration: usize,
    pub particle: usize,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct PopulationHistory {
    pub records: Vec<HistoryRecord>,
}

impl PopulationHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.x.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    pub archive_capacity: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 100,
            iterations: 100,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            seed: 0,
            archive_capacity: 200,
        }
    }
}

impl PsoConfig {
    fn validate(&self) -> Result<()> {
        if self.swarm_size < 2 || self.iterations < 1 || self.archive_capacity < 1 {
            return Err(CoreError::InvalidArgument(
                "swarm needs >= 2 particles, >= 1 iteration, and a positive archive capacity"
                    .into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.inertia) || self.cognitive <= 0.0 || self.social <= 0.0 {
            return Err(CoreError::InvalidArgument(
                "inertia must lie in [0,1] and both acceleration coefficients must be positive"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Runs the swarm against an evaluation function.
///
/// Every particle is evaluated once per iteration (the history therefore
/// holds exactly swarm_size x iterations records), positions update after
/// the iteration's records are archived, and boundary violations clip the
/// coordinate while zeroing its velocity. Particle evaluations may run in
/// parallel; all state updates apply in particle-index order, so a fixed
/// seed reproduces the run exactly.
pub fn run<E>(
    eval: &E,
    bounds: &[(f64, f64)],
    config: &PsoConfig,
) -> Result<(ParetoArchive, PopulationHistory)>
where
    E: Fn(&[f64]) -> Result<(Vec<f64>, Vec<f64>)> + Sync,
{
    config.validate()?;
    if bounds.is_empty() {
        return Err(CoreError::InvalidArgument("empty bounds".into()));
    }
    let dim = bounds.len();
    let mut rng = rng_from_seed(config.seed);
    let mut positions: Vec<Vec<f64>> = (0..config.swarm_size)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect()
        })
        .collect();
    let mut velocities = vec![vec![0.0; dim]; config.swarm_size];
    let mut pbest: Vec<Option<(Vec<f64>, Vec<f64>, Vec<f64>)>> = vec![None; config.swarm_size];
    let mut archive = ParetoArchive::new(config.archive_capacity);
    let mut history = PopulationHistory::default();

    for iteration in 0..config.iterations {
        let evals: Vec<Result<(Vec<f64>, Vec<f64>)>> =
            positions.par_iter().map(|x| eval(x)).collect();
        let mut results = Vec::with_capacity(config.swarm_size);
        for (particle, r) in evals.into_iter().enumerate() {
            let (f, g) = r?;
            if f.iter().chain(g.iter()).any(|v| !v.is_finite()) {
                return Err(CoreError::NonFiniteEvaluation {
                    particle,
                    iteration,
                });
            }
            results.push((f, g));
        }
        for (particle, (f, g)) in results.iter().enumerate() {
            history.records.push(HistoryRecord {
                iteration,
                particle,
                x: positions[particle].clone(),
                f: f.clone(),
                g: g.clone(),
            });
        }
        for (particle, (f, g)) in results.iter().enumerate() {
            archive.insert(ArchiveMember {
                x: positions[particle].clone(),
                f: f.clone(),
                g: g.clone(),
            })?;
        }
        for (particle, (f, g)) in results.iter().enumerate() {
            let current = (positions[particle].clone(), f.clone(), g.clone());
            match &pbest[particle] {
                None => pbest[particle] = Some(current),
                Some((_, bf, bg)) => {
                    if feasibility_dominates(f, g, bf, bg)? == Dominance::A {
                        pbest[particle] = Some(current);
                    }
                }
            }
        }
        let crowding = crowding_distance(&archive.objective_vectors());
        for particle in 0..config.swarm_size {
            let a = rng.random_range(0..archive.members.len());
            let b = rng.random_range(0..archive.members.len());
            let leader_idx = if crowding[b] > crowding[a] { b } else { a };
            let leader_x = archive.members[leader_idx].x.clone();
            let best_x = pbest[particle].as_ref().unwrap().0.clone();
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = config.inertia * velocities[particle][d]
                    + config.cognitive * r1 * (best_x[d] - positions[particle][d])
                    + config.social * r2 * (leader_x[d] - positions[particle][d]);
                velocities[particle][d] = v;
                positions[particle][d] += v;
                let (lo, hi) = bounds[d];
                if positions[particle][d] < lo {
                    positions[particle][d] = lo;
                    velocities[particle][d] = 0.0;
                } else if positions[particle][d] > hi {
                    positions[particle][d] = hi;
                    velocities[particle][d] = 0.0;
                }
            }
        }
    }
    Ok((archive, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominance_basic_cases() {
        // feasible beats infeasible
        let d = feasibility_dominates(&[1.0, 1.0], &[-1.0], &[0.0, 0.0], &[0.5]).unwrap();
        assert_eq!(d, Dominance::A);
        // incomparable feasible pair
        let d = feasibility_dominates(&[1.0, 2.0], &[], &[2.0, 1.0], &[]).unwrap();
        assert_eq!(d, Dominance::Neither);
        // componentwise better
        let d = feasibility_dominates(&[1.0, 1.0], &[], &[2.0, 2.0], &[]).unwrap();
        assert_eq!(d, Dominance::A);
        // two infeasibles compare by violation
        let d = feasibility_dominates(&[9.0], &[0.2, 0.3], &[0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(d, Dominance::A);
        // equal points do not dominate each other
        let d = feasibility_dominates(&[1.0, 1.0], &[], &[1.0, 1.0], &[]).unwrap();
        assert_eq!(d, Dominance::Neither);
    }

    #[test]
    fn dominance_rejects_arity_mismatch() {
        assert!(feasibility_dominates(&[1.0], &[], &[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn crowding_known_values() {
        let front = vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]];
        let d = crowding_distance(&front);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - 2.0).abs() < 1e-12);

        let two = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(crowding_distance(&two).iter().all(|v| v.is_infinite()));

        // duplicates sit between the same neighbors; ties sort by index so
        // each one gets a distinct, deterministic cuboid
        let dup = vec![
            vec![0.0, 3.0],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            vec![3.0, 0.0],
        ];
        let d = crowding_distance(&dup);
        assert!((d[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((d[2] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn archive_insert_cases() {
        let mut a = ParetoArchive::new(10);
        let member = |f: Vec<f64>| ArchiveMember {
            x: vec![0.0],
            f,
            g: vec![],
        };
        assert!(a.insert(member(vec![1.0, 1.0])).unwrap());
        // dominated candidate leaves the archive unchanged
        assert!(!a.insert(member(vec![2.0, 2.0])).unwrap());
        assert_eq!(a.members.len(), 1);
        // dominating candidate replaces everything it beats
        assert!(a.insert(member(vec![0.0, 0.0])).unwrap());
        assert_eq!(a.members.len(), 1);
        assert_eq!(a.members[0].f, vec![0.0, 0.0]);
    }

    #[test]
    fn archive_respects_capacity() {
        let mut a = ParetoArchive::new(4);
        for i in 0..20 {
            let t = i as f64 / 19.0;
            a.insert(ArchiveMember {
                x: vec![t],
                f: vec![t, 1.0 - t],
                g: vec![],
            })
            .unwrap();
        }
        assert_eq!(a.members.len(), 4);
        // extremes survive eviction because their crowding distance is infinite
        let fs = a.objective_vectors();
        assert!(fs.iter().any(|f| f[0] == 0.0));
        assert!(fs.iter().any(|f| f[0] == 1.0));
    }

    #[test]
    fn history_count_is_exact() {
        let cfg = PsoConfig {
            swarm_size: 10,
            iterations: 5,
            seed: 3,
            ..PsoConfig::default()
        };
        let eval = |x: &[f64]| Ok((vec![x[0] * x[0]], vec![]));
        let (_, hist) = run(&eval, &[(-1.0, 1.0)], &cfg).unwrap();
        assert_eq!(hist.len(), 50);
        let mut seen = std::collections::HashSet::new();
        for r in &hist.records {
            assert!(seen.insert((r.iteration, r.particle)));
            assert!((-1.0..=1.0).contains(&r.x[0]));
        }
    }

    #[test]
    fn convex_bowl_converges() {
        let cfg = PsoConfig {
            swarm_size: 30,
            iterations: 100,
            seed: 1,
            ..PsoConfig::default()
        };
        let eval = |x: &[f64]| {
            let d = (x[0] - 0.6).powi(2) + (x[1] + 0.2).powi(2);
            Ok((vec![d], vec![]))
        };
        let (archive, _) = run(&eval, &[(-2.0, 2.0), (-2.0, 2.0)], &cfg).unwrap();
        let best = archive
            .members
            .iter()
            .map(|m| m.f[0])
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-3, "best {best}");
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = PsoConfig {
            swarm_size: 12,
            iterations: 20,
            seed: 8,
            ..PsoConfig::default()
        };
        let eval = |x: &[f64]| Ok((vec![x[0], 1.0 - x[0]], vec![x[1] - 0.8]));
        let run1 = run(&eval, &[(0.0, 1.0), (0.0, 1.0)], &cfg).unwrap();
        let run2 = run(&eval, &[(0.0, 1.0), (0.0, 1.0)], &cfg).unwrap();
        assert_eq!(run1.0.members, run2.0.members);
        assert_eq!(run1.1.records, run2.1.records);
    }

    #[test]
    fn non_finite_evaluation_aborts() {
        let cfg = PsoConfig {
            swarm_size: 5,
            iterations: 3,
            seed: 1,
            ..PsoConfig::default()
        };
        let eval = |x: &[f64]| {
            Ok((
                vec![if x[0] > 0.5 { f64::NAN } else { x[0] }],
                vec![],
            ))
        };
        match run(&eval, &[(0.0, 1.0)], &cfg) {
            Err(CoreError::NonFiniteEvaluation { .. }) => {}
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn archive_nondominated_after_run() {
        let cfg = PsoConfig {
            swarm_size: 20,
            iterations: 30,
            seed: 5,
            ..PsoConfig::default()
        };
        let eval = |x: &[f64]| {
            Ok((
                vec![x[0], (x[0] - 1.0).powi(2) + x[1]],
                vec![0.3 - x[1]],
            ))
        };
        let (archive, _) = run(&eval, &[(0.0, 1.0), (0.0, 1.0)], &cfg).unwrap();
        for (i, a) in archive.members.iter().enumerate() {
            for (j, b) in archive.members.iter().enumerate() {
                if i != j {
                    let d = feasibility_dominates(&a.f, &a.g, &b.f, &b.g).unwrap();
                    assert_ne!(d, Dominance::A, "member {i} dominates member {j}");
                }
            }
        }
    }
}
