//! Pipeline stages shared by the individual subcommands and the
//! end-to-end reproduction command. Each stage writes its artifacts into
//! the run directory and records them in the manifest.

use crate::manifest::RunManifest;
use anyhow::{anyhow, bail, Context, Result};
use certopt_core::mopso::{self, feasibility_dominates, Dominance, HistoryRecord, ParetoArchive};
use certopt_core::problems::Oracle;
use certopt_core::robustness::{self, RobustnessConfig, RobustnessReport};
use certopt_core::surrogate::{self, Activation, FitOutcome, MlpModel, TrainConfig};
use certopt_core::tuner::{self, HyperbandPlan, SearchSpace};
use certopt_core::{
    correlation_matrix, derive_seed, lhs_sample, scale_to_bounds, Dataset, PopulationHistory,
    Problem, PsoConfig,
};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Draws an LHS design, evaluates it through the rigorous oracle, and
/// writes the dataset plus its column correlation matrix.
pub fn generate(
    dir: &Path,
    manifest: &mut RunManifest,
    oracle: &Oracle,
    samples: usize,
    seed: u64,
) -> Result<Dataset> {
    if samples < 10 {
        bail!("need at least 10 samples, got {samples}");
    }
    let problem = &oracle.problem;
    let plan = lhs_sample(samples, problem.dim, seed)?;
    let points = scale_to_bounds(&plan, &problem.bounds)?;
    let (input_names, output_names) = oracle.column_names();
    let mut inputs = Vec::with_capacity(samples);
    let mut outputs = Vec::with_capacity(samples);
    for x in points {
        let e = oracle.eval(&x)?;
        let mut row = e.f;
        row.extend_from_slice(&e.g);
        inputs.push(x);
        outputs.push(row);
    }
    let dataset = Dataset {
        input_names,
        output_names,
        inputs,
        outputs,
    };
    dataset.write_csv(&dir.join("dataset.csv"))?;

    let mut labels = dataset.input_names.clone();
    labels.extend(dataset.output_names.iter().cloned());
    let rows: Vec<Vec<f64>> = dataset
        .inputs
        .iter()
        .zip(&dataset.outputs)
        .map(|(x, y)| x.iter().chain(y).copied().collect())
        .collect();
    let corr = correlation_matrix(&rows, &labels)?;
    let mut text = String::from("column");
    for l in &corr.labels {
        text.push(',');
        text.push_str(l);
    }
    text.push('\n');
    for (i, l) in corr.labels.iter().enumerate() {
        text.push_str(l);
        for v in &corr.r[i] {
            text.push(',');
            text.push_str(&format!("{v}"));
        }
        text.push('\n');
    }
    std::fs::write(dir.join("correlation.csv"), text)?;

    manifest.record_seed("generate", seed);
    manifest.record_config("generate.samples", samples);
    manifest.record_artifact("dataset", "dataset.csv");
    manifest.record_artifact("correlation", "correlation.csv");
    Ok(dataset)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainMetrics {
    pub target: String,
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub param_count: usize,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    pub test_mse: f64,
    pub test_mae: f64,
    pub normalized: bool,
}

pub struct TuneParams {
    pub space: SearchSpace,
    pub plan: HyperbandPlan,
    pub seed: u64,
}

/// Fits one MISO surrogate for `target`, optionally running a
/// hyperparameter search first, and writes model, metrics, and parity
/// artifacts.
pub fn train(
    dir: &Path,
    manifest: &mut RunManifest,
    dataset: &Dataset,
    problem: &Problem,
    target: &str,
    hidden: &[usize],
    config: &TrainConfig,
    tune: Option<&TuneParams>,
) -> Result<(FitOutcome, TrainMetrics)> {
    let target_index = dataset.output_index(target)?;
    let mut config = config.clone();
    let mut hidden = hidden.to_vec();

    if let Some(params) = tune {
        let outcome = tuner::run_search(
            &params.space,
            dataset,
            target_index,
            &problem.bounds,
            &params.plan,
            &config,
            params.seed,
        )?;
        write_json(&dir.join(format!("leaderboard/{target}.json")), &outcome)?;
        manifest.record_artifact(
            &format!("leaderboard:{target}"),
            &format!("leaderboard/{target}.json"),
        );
        manifest.record_seed(&format!("tune:{target}"), params.seed);
        hidden = outcome.best.hidden.clone();
        config.learning_rate = outcome.best.lr;
        config.batch_size = outcome.best.batch;
    }

    let outcome = surrogate::fit(dataset, target_index, &hidden, &problem.bounds, &config)?;
    let test_inputs: Vec<Vec<f64>> = outcome
        .split
        .test
        .iter()
        .map(|&i| dataset.inputs[i].clone())
        .collect();
    let test_targets: Vec<f64> = outcome
        .split
        .test
        .iter()
        .map(|&i| dataset.outputs[i][target_index])
        .collect();
    let (metrics, parity) = surrogate::evaluate(&outcome.model, &test_inputs, &test_targets)?;

    let model_rel = format!("models/{target}.json");
    let model_path = dir.join(&model_rel);
    if let Some(parent) = model_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    surrogate::save_model(&model_path, target, &outcome.model)?;

    let last = outcome
        .history
        .get(outcome.best_epoch)
        .ok_or_else(|| anyhow!("training history is empty"))?;
    let (_, total) = surrogate::param_count(&outcome.model.layer_widths)?;
    let summary = TrainMetrics {
        target: target.into(),
        widths: outcome.model.layer_widths.clone(),
        activation: outcome.model.activation,
        param_count: total,
        epochs_run: outcome.epochs_run,
        best_epoch: outcome.best_epoch,
        train_mse: last.train_mse,
        val_mse: last.val_mse,
        test_mse: metrics.mse,
        test_mae: metrics.mae,
        normalized: true,
    };
    write_json(&dir.join(format!("metrics/{target}.json")), &summary)?;

    let mut text = String::from("actual,predicted\n");
    for (truth, pred) in &parity {
        text.push_str(&format!("{truth},{pred}\n"));
    }
    std::fs::create_dir_all(dir.join("parity"))?;
    std::fs::write(dir.join(format!("parity/{target}.csv")), text)?;

    manifest.record_seed(&format!("train:{target}"), config.seed);
    manifest.record_config(
        &format!("train.{target}.widths"),
        hidden
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.record_config(&format!("train.{target}.epochs"), config.epochs);
    manifest.record_config(&format!("train.{target}.learning_rate"), config.learning_rate);
    manifest.record_config(&format!("train.{target}.batch_size"), config.batch_size);
    manifest.record_config(&format!("train.{target}.activation"), config.activation);
    manifest.record_artifact(&format!("model:{target}"), &model_rel);
    manifest.record_artifact(&format!("metrics:{target}"), &format!("metrics/{target}.json"));
    manifest.record_artifact(&format!("parity:{target}"), &format!("parity/{target}.csv"));
    Ok((outcome, summary))
}

/// Loads the per-output models for a problem from a run directory, in
/// output-column order (objectives then constraints).
pub fn load_model_set(dir: &Path, oracle: &Oracle) -> Result<Vec<MlpModel>> {
    let (_, output_names) = oracle.column_names();
    let mut models = Vec::with_capacity(output_names.len());
    for name in &output_names {
        let path = dir.join(format!("models/{name}.json"));
        let file = surrogate::load_model(&path)
            .with_context(|| format!("loading model {}", path.display()))?;
        if file.target != *name {
            bail!(
                "model {} declares target '{}', expected '{name}'",
                path.display(),
                file.target
            );
        }
        if file.model.input_dim() != oracle.problem.dim {
            bail!(
                "model {name} expects {} inputs but problem has {} dimensions",
                file.model.input_dim(),
                oracle.problem.dim
            );
        }
        models.push(file.model);
    }
    Ok(models)
}

/// Evaluation closure over a trained model set, splitting outputs into
/// objectives and constraints by problem arity.
pub fn surrogate_ensemble<'a>(
    models: &'a [MlpModel],
    problem: &'a Problem,
) -> impl Fn(&[f64]) -> certopt_core::Result<(Vec<f64>, Vec<f64>)> + Sync + 'a {
    move |x: &[f64]| {
        let mut f = Vec::with_capacity(problem.n_objectives);
        let mut g = Vec::with_capacity(problem.n_constraints);
        for (k, model) in models.iter().enumerate() {
            let y = model.forward(x)?;
            if k < problem.n_objectives {
                f.push(y);
            } else {
                g.push(y);
            }
        }
        Ok((f, g))
    }
}

fn history_csv(history: &PopulationHistory, problem: &Problem) -> String {
    let mut text = String::from("iteration,particle");
    for d in 0..problem.dim {
        text.push_str(&format!(",x{}", d + 1));
    }
    for j in 0..problem.n_objectives {
        text.push_str(&format!(",f{}", j + 1));
    }
    for c in 0..problem.n_constraints {
        text.push_str(&format!(",g{}", c + 1));
    }
    text.push('\n');
    for r in &history.records {
        text.push_str(&format!("{},{}", r.iteration, r.particle));
        for v in r.x.iter().chain(&r.f).chain(&r.g) {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    text
}

fn archive_csv(archive: &ParetoArchive, problem: &Problem) -> String {
    let mut text = String::new();
    for d in 0..problem.dim {
        if d > 0 {
            text.push(',');
        }
        text.push_str(&format!("x{}", d + 1));
    }
    for j in 0..problem.n_objectives {
        text.push_str(&format!(",f{}", j + 1));
    }
    for c in 0..problem.n_constraints {
        text.push_str(&format!(",g{}", c + 1));
    }
    text.push('\n');
    for m in &archive.members {
        let row: Vec<String> = m
            .x
            .iter()
            .chain(&m.f)
            .chain(&m.g)
            .map(|v| format!("{v}"))
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

/// Runs the swarm against an evaluator and persists archive + history
/// under the given artifact prefix ("" or "rigorous_").
pub fn optimize<E>(
    dir: &Path,
    manifest: &mut RunManifest,
    problem: &Problem,
    eval: &E,
    config: &PsoConfig,
    prefix: &str,
) -> Result<(ParetoArchive, PopulationHistory)>
where
    E: Fn(&[f64]) -> certopt_core::Result<(Vec<f64>, Vec<f64>)> + Sync,
{
    let (archive, history) = mopso::run(eval, &problem.bounds, config)?;
    let archive_rel = format!("{prefix}archive.csv");
    let history_rel = format!("{prefix}history.csv");
    std::fs::write(dir.join(&archive_rel), archive_csv(&archive, problem))?;
    std::fs::write(dir.join(&history_rel), history_csv(&history, problem))?;
    let stage = if prefix.is_empty() {
        "optimize".to_string()
    } else {
        format!("optimize-{}", prefix.trim_end_matches('_'))
    };
    manifest.record_seed(&stage, config.seed);
    manifest.record_artifact(&format!("{prefix}archive"), &archive_rel);
    manifest.record_artifact(&format!("{prefix}history"), &history_rel);
    Ok((archive, history))
}

fn split_header(header: &str, expected_lead: &[&str]) -> Result<(usize, usize, usize)> {
    let cols: Vec<&str> = header.trim().split(',').collect();
    let lead = expected_lead.len();
    if cols.len() < lead || cols[..lead] != *expected_lead {
        bail!(
            "expected header to start with {}, got '{header}'",
            expected_lead.join(",")
        );
    }
    let rest = &cols[lead..];
    let dim = rest.iter().take_while(|c| c.starts_with('x')).count();
    let nf = rest[dim..].iter().take_while(|c| c.starts_with('f')).count();
    let ng = rest[dim + nf..].iter().take_while(|c| c.starts_with('g')).count();
    if dim == 0 || nf == 0 || dim + nf + ng != rest.len() {
        bail!("unrecognized column layout '{header}'");
    }
    Ok((dim, nf, ng))
}

pub fn read_history_csv(path: &Path) -> Result<PopulationHistory> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading history {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty history file"))?;
    let (dim, nf, ng) = split_header(header, &["iteration", "particle"])?;
    let mut history = PopulationHistory::default();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 + dim + nf + ng {
            bail!("history line {}: wrong field count", lineno + 2);
        }
        let parse =
            |s: &str| -> Result<f64> { s.parse().map_err(|e| anyhow!("line {}: {e}", lineno + 2)) };
        let nums: Vec<f64> = fields[2..].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        history.records.push(HistoryRecord {
            iteration: fields[0].parse().map_err(|e| anyhow!("line {}: {e}", lineno + 2))?,
            particle: fields[1].parse().map_err(|e| anyhow!("line {}: {e}", lineno + 2))?,
            x: nums[..dim].to_vec(),
            f: nums[dim..dim + nf].to_vec(),
            g: nums[dim + nf..].to_vec(),
        });
    }
    if history.is_empty() {
        bail!("history {} has no records", path.display());
    }
    Ok(history)
}

/// Loads an archive CSV and verifies the rows are mutually nondominated.
pub fn read_archive_csv(path: &Path) -> Result<Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading archive {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty archive file"))?;
    let (dim, nf, ng) = split_header(header, &[])?;
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split(',')
            .map(|s| s.parse().map_err(|e| anyhow!("line {}: {e}", lineno + 2)))
            .collect::<Result<_>>()?;
        if nums.len() != dim + nf + ng {
            bail!("archive line {}: wrong field count", lineno + 2);
        }
        rows.push((
            nums[..dim].to_vec(),
            nums[dim..dim + nf].to_vec(),
            nums[dim + nf..].to_vec(),
        ));
    }
    for i in 0..rows.len() {
        for k in i + 1..rows.len() {
            let (a, b) = (&rows[i], &rows[k]);
            if feasibility_dominates(&a.1, &a.2, &b.1, &b.2)? != Dominance::Neither {
                bail!(
                    "archive {} is inconsistent: rows {} and {} dominate one another",
                    path.display(),
                    i + 2,
                    k + 2
                );
            }
        }
    }
    Ok(rows)
}

/// Certifies a history against an oracle and writes the report artifact.
pub fn certify_stage<E>(
    dir: &Path,
    manifest: &mut RunManifest,
    history: &PopulationHistory,
    oracle: &E,
    problem_name: &str,
    config: &RobustnessConfig,
    seed: u64,
) -> Result<RobustnessReport>
where
    E: Fn(&[f64]) -> certopt_core::Result<(Vec<f64>, Vec<f64>)> + Sync,
{
    let report = robustness::certify(history, oracle, problem_name, config, seed)?;
    write_json(&dir.join("report.json"), &report)?;
    manifest.record_seed("certify", seed);
    manifest.record_config("certify.epsilon", config.epsilon);
    manifest.record_config("certify.zscore", config.spec.zscore);
    manifest.record_config("certify.sigma", config.spec.sigma);
    manifest.record_config("certify.error_margin", config.spec.e);
    manifest.record_config("certify.normalize", config.normalize);
    manifest.record_artifact("report", "report.json");
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontComparison {
    pub problem: String,
    pub reference: Vec<f64>,
    pub generational_distance: f64,
    pub hypervolume_surrogate: f64,
    pub hypervolume_rigorous: f64,
    pub hypervolume_ratio: f64,
    pub surrogate_front_size: usize,
    pub rigorous_front_size: usize,
}

/// Compares the surrogate-based front with the rigorous-oracle front and
/// writes the agreement metrics.
pub fn front_agreement_stage(
    dir: &Path,
    manifest: &mut RunManifest,
    problem: &Problem,
    surrogate_archive: &ParetoArchive,
    rigorous_archive: &ParetoArchive,
) -> Result<FrontComparison> {
    let feasible: Vec<Vec<f64>> = surrogate_archive
        .members
        .iter()
        .filter(|m| m.g.iter().all(|&g| g <= 0.0))
        .map(|m| m.f.clone())
        .collect();
    let rigorous: Vec<Vec<f64>> = rigorous_archive
        .members
        .iter()
        .filter(|m| m.g.iter().all(|&g| g <= 0.0))
        .map(|m| m.f.clone())
        .collect();
    if feasible.is_empty() || rigorous.is_empty() {
        bail!("front comparison needs feasible members on both fronts");
    }
    let m = problem.n_objectives;
    let mut reference = vec![0.0; m];
    for j in 0..m {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for f in feasible.iter().chain(&rigorous) {
            lo = lo.min(f[j]);
            hi = hi.max(f[j]);
        }
        let pad = if hi - lo > 0.0 { 0.1 * (hi - lo) } else { 1.0 };
        reference[j] = hi + pad;
    }
    let agreement = robustness::front_agreement(&feasible, &rigorous, &reference)?;
    let (ha, hb) = (agreement.hypervolume_a, agreement.hypervolume_b);
    let comparison = FrontComparison {
        problem: problem.name.clone(),
        reference,
        generational_distance: agreement.generational_distance,
        hypervolume_surrogate: ha,
        hypervolume_rigorous: hb,
        hypervolume_ratio: ha.min(hb) / ha.max(hb),
        surrogate_front_size: feasible.len(),
        rigorous_front_size: rigorous.len(),
    };
    write_json(&dir.join("front_agreement.json"), &comparison)?;
    manifest.record_artifact("front_agreement", "front_agreement.json");
    Ok(comparison)
}

/// Per-benchmark reproduction settings: sample count and per-target
/// architecture + epoch budget. These are tuned so every objective clears
/// the certification tolerance with margin on a desk-scale budget.
pub struct ReproSpec {
    pub samples: usize,
    pub targets: &'static [(&'static str, &'static [usize], usize, Activation)],
}

pub fn repro_spec(problem: &str) -> Option<ReproSpec> {
    use Activation::{Relu, Tanh};
    match problem {
        "binh_korn" => Some(ReproSpec {
            samples: 1000,
            targets: &[
                ("f1", &[60, 60, 60], 1500, Tanh),
                ("f2", &[60, 60, 60], 1500, Tanh),
                ("g1", &[60, 60, 60], 1500, Tanh),
                ("g2", &[60, 60, 60], 1500, Tanh),
            ],
        }),
        // the f2 net is relu: it tracks the square-root cliff at x1 = 0
        // with less one-sided bias than tanh at equal budget
        "zdt3" => Some(ReproSpec {
            samples: 3000,
            targets: &[
                ("f1", &[60, 60], 1500, Tanh),
                ("f2", &[100, 100, 100, 100, 100], 1500, Relu),
            ],
        }),
        "dtlz2" => Some(ReproSpec {
            samples: 2000,
            targets: &[
                ("f1", &[128, 128], 2500, Tanh),
                ("f2", &[128, 128], 2500, Tanh),
                ("f3", &[96, 96], 2000, Tanh),
            ],
        }),
        _ => None,
    }
}

pub struct ReproOutcome {
    pub metrics: Vec<TrainMetrics>,
    pub comparison: FrontComparison,
    pub report: RobustnessReport,
}

/// Chains generate, train (every output), optimize, the rigorous-oracle
/// optimization for front comparison, and certification.
pub fn repro(
    dir: &Path,
    oracle: &Oracle,
    root_seed: u64,
    pso: &PsoConfig,
    robustness_config: &RobustnessConfig,
) -> Result<ReproOutcome> {
    let problem = &oracle.problem;
    let spec = repro_spec(&problem.name)
        .ok_or_else(|| anyhow!("no reproduction settings for '{}'", problem.name))?;
    std::fs::create_dir_all(dir)?;
    let mut manifest = RunManifest::new(&format!("{}-s{root_seed}", problem.name), &problem.name);
    if problem.name == "dtlz2" {
        manifest.dtlz2_form = Some(oracle.dtlz2_form.to_string());
    }
    manifest.record_config("seed", root_seed);

    let dataset = generate(
        dir,
        &mut manifest,
        oracle,
        spec.samples,
        derive_seed(root_seed, "generate"),
    )
    .context("generate stage")?;

    let mut metrics = Vec::new();
    for &(target, hidden, epochs, activation) in spec.targets {
        let config = TrainConfig {
            epochs,
            patience: epochs,
            activation,
            seed: derive_seed(root_seed, &format!("train:{target}")),
            ..TrainConfig::default()
        };
        let (_, summary) = train(
            dir,
            &mut manifest,
            &dataset,
            problem,
            target,
            hidden,
            &config,
            None,
        )
        .with_context(|| format!("train stage for {target}"))?;
        metrics.push(summary);
    }

    let models = load_model_set(dir, oracle)?;
    let ensemble = surrogate_ensemble(&models, problem);
    let surrogate_pso = PsoConfig {
        seed: derive_seed(root_seed, "optimize"),
        ..pso.clone()
    };
    let (archive, history) = optimize(dir, &mut manifest, problem, &ensemble, &surrogate_pso, "")
        .context("optimize stage")?;

    let rigorous_eval = |x: &[f64]| oracle.eval(x).map(|e| (e.f, e.g));
    let rigorous_pso = PsoConfig {
        seed: derive_seed(root_seed, "optimize-rigorous"),
        ..pso.clone()
    };
    let (rigorous_archive, _) = optimize(
        dir,
        &mut manifest,
        problem,
        &rigorous_eval,
        &rigorous_pso,
        "rigorous_",
    )
    .context("rigorous optimize stage")?;

    let comparison =
        front_agreement_stage(dir, &mut manifest, problem, &archive, &rigorous_archive)
            .context("front agreement stage")?;

    let report = certify_stage(
        dir,
        &mut manifest,
        &history,
        &rigorous_eval,
        &problem.name,
        robustness_config,
        derive_seed(root_seed, "certify"),
    )
    .context("certify stage")?;

    manifest.record_config("pso.swarm_size", pso.swarm_size);
    manifest.record_config("pso.iterations", pso.iterations);
    manifest.finalize(dir)?;
    Ok(ReproOutcome {
        metrics,
        comparison,
        report,
    })
}
