//! Hyperband-style hyperparameter search.
//!
//! Configurations are sampled at random from a small grid of depths,
//! widths, and learning rates; training epochs are the budgeted resource.
//! Each bracket starts many cheap runs and repeatedly keeps the best
//! fraction at eta times the budget, resuming from checkpoints rather than
//! retraining.

use crate::dataset::Dataset;
use crate::error::{CoreError, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::surrogate::{LrSchedule, Normalization, TrainConfig, TrainData, Trainer};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub depths: Vec<usize>,
    pub widths: Vec<usize>,
    pub lrs: Vec<f64>,
    pub batches: Vec<usize>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            depths: (1..=6).collect(),
            widths: (1..=12).map(|i| i * 20).collect(),
            lrs: vec![1e-2, 1e-3, 1e-4],
            batches: vec![32],
        }
    }
}

impl SearchSpace {
    fn validate(&self) -> Result<()> {
        if self.depths.is_empty()
            || self.widths.is_empty()
            || self.lrs.is_empty()
            || self.batches.is_empty()
        {
            return Err(CoreError::InvalidArgument(
                "search space sets must be nonempty".into(),
            ));
        }
        if self.depths.contains(&0) || self.widths.contains(&0) || self.batches.contains(&0) {
            return Err(CoreError::InvalidArgument(
                "depths, widths, and batch sizes must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One successive-halving stage: `n` configurations trained up to `r`
/// total epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub n: usize,
    pub r: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bracket {
    pub s: usize,
    pub rounds: Vec<Round>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbandPlan {
    pub r_max: usize,
    pub eta: usize,
    pub brackets: Vec<Bracket>,
}

/// Builds the standard Hyperband schedule for a maximum per-configuration
/// budget of `r_max` epochs and downsampling rate `eta`.
pub fn make_plan(r_max: usize, eta: usize) -> Result<HyperbandPlan> {
    if r_max < 1 {
        return Err(CoreError::InvalidArgument("R must be at least 1".into()));
    }
    if eta < 2 {
        return Err(CoreError::InvalidArgument("eta must be at least 2".into()));
    }
    let mut s_max = 0usize;
    while eta.pow(s_max as u32 + 1) <= r_max {
        s_max += 1;
    }
    let mut brackets = Vec::with_capacity(s_max + 1);
    for s in (0..=s_max).rev() {
        let n0 = ((s_max + 1) as f64 * eta.pow(s as u32) as f64 / (s + 1) as f64).ceil() as usize;
        let mut rounds = Vec::with_capacity(s + 1);
        let mut n = n0;
        for i in 0..=s {
            let r = (r_max / eta.pow((s - i) as u32)).max(1);
            rounds.push(Round { n, r });
            n = (n / eta).max(1);
        }
        brackets.push(Bracket { s, rounds });
    }
    Ok(HyperbandPlan {
        r_max,
        eta,
        brackets,
    })
}

/// One sampled configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub batch: usize,
}

impl SampledConfig {
    /// Stable hash used only for deterministic tie-breaking when two
    /// configurations reach the same validation loss.
    fn stable_hash(&self) -> u64 {
        let key = format!("{:?}|{:e}|{}", self.hidden, self.lr, self.batch);
        derive_seed(0, &key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub rank: usize,
    pub widths: Vec<usize>,
    pub lr: f64,
    pub batch: usize,
    pub epochs_trained: usize,
    /// None when the configuration diverged.
    pub val_mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: SampledConfig,
    pub best_val_mse: f64,
    pub leaderboard: Vec<LeaderboardEntry>,
}

struct Candidate {
    config: SampledConfig,
    trainer: Option<Trainer>,
    val_mse: f64,
    sample_order: usize,
    alive: bool,
}

/// Runs the full Hyperband schedule over one target column and returns the
/// lowest-validation-loss configuration plus a ranked leaderboard of every
/// configuration touched.
pub fn run_search(
    space: &SearchSpace,
    dataset: &Dataset,
    target: usize,
    bounds: &[(f64, f64)],
    plan: &HyperbandPlan,
    base: &TrainConfig,
    seed: u64,
) -> Result<SearchOutcome> {
    space.validate()?;
    if dataset.is_empty() {
        return Err(CoreError::InvalidArgument("empty dataset".into()));
    }
    let split = dataset.split(base.validation_fraction, base.test_fraction, base.seed)?;
    let norm = Normalization::from_bounds_and_targets(bounds, &dataset.output_column(target));
    let data = TrainData::from_split(dataset, target, &norm, &split);
    let dim = dataset.input_names.len();

    let mut rng = rng_from_seed(seed);
    let mut finished: Vec<Candidate> = Vec::new();
    let mut sample_order = 0usize;

    for bracket in &plan.brackets {
        let n0 = bracket.rounds[0].n;
        let mut pool: Vec<Candidate> = (0..n0)
            .map(|_| {
                let depth = space.depths[rng.random_range(0..space.depths.len())];
                let width = space.widths[rng.random_range(0..space.widths.len())];
                let lr = space.lrs[rng.random_range(0..space.lrs.len())];
                let batch = space.batches[rng.random_range(0..space.batches.len())];
                let config = SampledConfig {
                    hidden: vec![width; depth],
                    lr,
                    batch,
                };
                sample_order += 1;
                Candidate {
                    config,
                    trainer: None,
                    val_mse: f64::INFINITY,
                    sample_order,
                    alive: true,
                }
            })
            .collect();

        for (round_idx, round) in bracket.rounds.iter().enumerate() {
            for cand in pool.iter_mut().filter(|c| c.alive) {
                if cand.trainer.is_none() {
                    let mut widths = Vec::with_capacity(cand.config.hidden.len() + 2);
                    widths.push(dim);
                    widths.extend_from_slice(&cand.config.hidden);
                    widths.push(1);
                    let cfg = TrainConfig {
                        learning_rate: cand.config.lr,
                        batch_size: cand.config.batch,
                        epochs: plan.r_max,
                        seed: derive_seed(
                            seed,
                            &format!("bracket{}/sample{}", bracket.s, cand.sample_order),
                        ),
                        schedule: LrSchedule::Constant,
                        ..base.clone()
                    };
                    cand.trainer = Some(Trainer::new(&widths, norm.clone(), cfg)?);
                }
                let trainer = cand.trainer.as_mut().unwrap();
                let additional = round.r.saturating_sub(trainer.epochs_done());
                match trainer.run_epochs(&data, additional, plan.r_max) {
                    Ok(()) => {
                        cand.val_mse = trainer
                            .history
                            .last()
                            .map(|h| h.val_mse)
                            .unwrap_or(f64::INFINITY);
                    }
                    Err(CoreError::TrainingDiverged { .. }) => {
                        cand.val_mse = f64::INFINITY;
                        cand.alive = false;
                    }
                    Err(e) => return Err(e),
                }
            }
            let is_last = round_idx + 1 == bracket.rounds.len();
            if !is_last {
                let keep = bracket.rounds[round_idx + 1].n;
                let mut order: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].alive).collect();
                order.sort_by(|&a, &b| rank_key(&pool[a]).partial_cmp(&rank_key(&pool[b])).unwrap());
                for (pos, &i) in order.iter().enumerate() {
                    if pos >= keep {
                        pool[i].alive = false;
                    }
                }
            }
        }
        finished.extend(pool);
    }

    // rank everything; diverged configurations sink to the bottom
    finished.sort_by(|a, b| rank_key(a).partial_cmp(&rank_key(b)).unwrap());
    if finished.first().map(|c| c.val_mse.is_finite()) != Some(true) {
        return Err(CoreError::SearchFailed(
            "every sampled configuration diverged".into(),
        ));
    }
    let leaderboard: Vec<LeaderboardEntry> = finished
        .iter()
        .enumerate()
        .map(|(i, c)| LeaderboardEntry {
            rank: i + 1,
            widths: c.config.hidden.clone(),
            lr: c.config.lr,
            batch: c.config.batch,
            epochs_trained: c.trainer.as_ref().map_or(0, |t| t.epochs_done()),
            val_mse: c.val_mse.is_finite().then_some(c.val_mse),
        })
        .collect();
    let best = &finished[0];
    Ok(SearchOutcome {
        best: best.config.clone(),
        best_val_mse: best.val_mse,
        leaderboard,
    })
}

fn rank_key(c: &Candidate) -> (f64, u64, usize) {
    (c.val_mse, c.config.stable_hash(), c.sample_order)
}
