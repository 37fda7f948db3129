//! Command-line pipeline for surrogate-assisted optimization with
//! robustness certification: generate training data, fit surrogates, run
//! the swarm, certify the result, or reproduce a whole benchmark study.

mod config;
mod manifest;
mod report;
mod stages;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use config::FileConfig;
use manifest::{RunManifest, MANIFEST_NAME};
use certopt_core::problems::Oracle;
use certopt_core::surrogate::{Activation, TrainConfig};
use certopt_core::tuner::{make_plan, SearchSpace};
use certopt_core::{
    derive_seed, Dtlz2Form, PsoConfig, RobustnessConfig, SampleSizeSpec, SubsampleMethod,
};
use std::path::PathBuf;
use std::process::ExitCode;

const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(
    name = "certopt",
    version,
    about = "Surrogate-assisted multiobjective optimization with robustness certification"
)]
struct Cli {
    /// Configuration file with flat dotted keys (CLI flags take precedence)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Root seed; every stage derives its own stream from it
    #[arg(long, global = true, env = "CERTOPT_SEED")]
    seed: Option<u64>,
    /// Worker threads for parallel evaluation (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an LHS design and evaluate it through the rigorous oracle
    Generate {
        /// Benchmark name: binh_korn, zdt3, or dtlz2
        #[arg(long)]
        problem: String,
        /// Number of design points (at least 10)
        #[arg(long)]
        samples: Option<usize>,
        /// DTLZ2 variant: paper or standard
        #[arg(long, value_name = "FORM")]
        dtlz2_form: Option<String>,
        /// Run directory to create
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Fit one surrogate model for a dataset output column
    Train {
        /// Run directory produced by generate
        #[arg(long, value_name = "DIR")]
        run: PathBuf,
        /// Output column to fit (f1, g2, ...)
        #[arg(long)]
        target: String,
        /// Hidden layer widths, comma separated (e.g. 60,60,60)
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<usize>>,
        /// Search hyperparameters first instead of using --widths
        #[arg(long)]
        tune: bool,
        /// Maximum per-configuration epoch budget for the search
        #[arg(long = "hb-R", value_name = "R")]
        hb_r: Option<usize>,
        /// Halving factor for the search
        #[arg(long = "hb-eta", value_name = "ETA")]
        hb_eta: Option<usize>,
        /// Seed for configuration sampling (defaults to a stream derived
        /// from the root seed)
        #[arg(long = "hb-seed")]
        hb_seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
        /// Hidden activation: tanh or relu
        #[arg(long)]
        activation: Option<String>,
    },
    /// Run the particle swarm against the trained surrogates
    Optimize {
        #[arg(long, value_name = "DIR")]
        run: PathBuf,
        #[arg(long)]
        swarm_size: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        inertia: Option<f64>,
        #[arg(long)]
        cognitive: Option<f64>,
        #[arg(long)]
        social: Option<f64>,
        #[arg(long)]
        archive_capacity: Option<usize>,
    },
    /// Re-evaluate a subsample of the optimization history through the
    /// rigorous oracle and test the robustness tolerance
    Certify {
        #[arg(long, value_name = "DIR")]
        run: PathBuf,
        /// Per-objective tolerance on |Rb|
        #[arg(long)]
        epsilon: Option<f64>,
        /// Confidence level recorded in the report
        #[arg(long)]
        confidence: Option<f64>,
        /// Z-score of the sample-size rule
        #[arg(long)]
        zscore: Option<f64>,
        /// Population proportion of the sample-size rule
        #[arg(long)]
        sigma: Option<f64>,
        /// Error margin E of the sample-size rule
        #[arg(long, value_name = "E")]
        error_margin: Option<f64>,
        /// Apply the finite population correction with this N
        #[arg(long, value_name = "N")]
        finite_population: Option<usize>,
        /// Compare raw objective values instead of normalized ones
        #[arg(long)]
        no_normalize: bool,
        /// Subsample method: lhs or uniform
        #[arg(long)]
        method: Option<String>,
        /// Certify against the surrogates themselves instead of the
        /// rigorous oracle (sanity check; Rb must be exactly zero)
        #[arg(long)]
        self_check: bool,
    },
    /// Reproduce the full study pipeline for one benchmark
    Repro {
        /// Benchmark name: binh_korn, zdt3, or dtlz2
        problem: String,
        /// Run directory to create
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// DTLZ2 variant override (reproduction defaults to standard)
        #[arg(long, value_name = "FORM")]
        dtlz2_form: Option<String>,
    },
    /// Summarize the artifacts of a run directory
    Report {
        #[arg(long, value_name = "DIR")]
        run: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("setting up the thread pool")?;
    }
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let root_seed = match cli.seed {
        Some(s) => s,
        None => file.get::<u64>("seed")?.unwrap_or(DEFAULT_SEED),
    };

    match cli.command {
        Command::Generate {
            problem,
            samples,
            dtlz2_form,
            out,
        } => {
            let oracle = make_oracle(&problem, dtlz2_form.as_deref(), &file, Dtlz2Form::Paper)?;
            let samples = file.resolve(samples, "generate.samples", 1000)?;
            std::fs::create_dir_all(&out)?;
            let mut manifest =
                RunManifest::new(&format!("{problem}-s{root_seed}"), &oracle.problem.name);
            if problem == "dtlz2" {
                manifest.dtlz2_form = Some(oracle.dtlz2_form.to_string());
            }
            manifest.record_config("seed", root_seed);
            let dataset = stages::generate(
                &out,
                &mut manifest,
                &oracle,
                samples,
                derive_seed(root_seed, "generate"),
            )?;
            manifest.finalize(&out)?;
            println!(
                "wrote {} rows ({} inputs, {} outputs) to {}",
                dataset.len(),
                dataset.input_names.len(),
                dataset.output_names.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Train {
            run,
            target,
            widths,
            tune,
            hb_r,
            hb_eta,
            hb_seed,
            epochs,
            learning_rate,
            batch_size,
            patience,
            activation,
        } => {
            let mut manifest = RunManifest::load(&run.join(MANIFEST_NAME))?;
            let oracle = oracle_from_manifest(&manifest)?;
            let dataset =
                certopt_core::Dataset::read_csv(&manifest.artifact_path(&run, "dataset")?)?;
            let activation = match file.resolve(activation, "train.activation", "tanh".into())? {
                s if s == "tanh" => Activation::Tanh,
                s if s == "relu" => Activation::Relu,
                s => bail!("unknown activation '{s}', expected 'tanh' or 'relu'"),
            };
            let config = TrainConfig {
                learning_rate: file.resolve(learning_rate, "train.learning_rate", 1e-3)?,
                batch_size: file.resolve(batch_size, "train.batch_size", 32)?,
                epochs: file.resolve(epochs, "train.epochs", 500)?,
                patience: file.resolve(patience, "train.patience", 50)?,
                seed: derive_seed(root_seed, &format!("train:{target}")),
                activation,
                ..TrainConfig::default()
            };
            let tune_params = if tune {
                let r = file.resolve(hb_r, "hb.r", 27)?;
                let eta = file.resolve(hb_eta, "hb.eta", 3)?;
                Some(stages::TuneParams {
                    space: SearchSpace::default(),
                    plan: make_plan(r, eta)?,
                    seed: hb_seed
                        .unwrap_or_else(|| derive_seed(root_seed, &format!("tune:{target}"))),
                })
            } else {
                None
            };
            let hidden = match (&widths, tune) {
                (Some(w), _) => w.clone(),
                (None, true) => Vec::new(),
                (None, false) => match file.get::<String>("train.widths")? {
                    Some(s) => parse_widths(&s)?,
                    None => bail!("provide --widths or --tune"),
                },
            };
            let (_, summary) = stages::train(
                &run,
                &mut manifest,
                &dataset,
                &oracle.problem,
                &target,
                &hidden,
                &config,
                tune_params.as_ref(),
            )?;
            manifest.finalize(&run)?;
            println!(
                "{}: widths {:?}, {} parameters, {} epochs, test MSE {:.3e}, test MAE {:.3e}",
                summary.target,
                summary.widths,
                summary.param_count,
                summary.epochs_run,
                summary.test_mse,
                summary.test_mae
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Optimize {
            run,
            swarm_size,
            iterations,
            inertia,
            cognitive,
            social,
            archive_capacity,
        } => {
            let mut manifest = RunManifest::load(&run.join(MANIFEST_NAME))?;
            let oracle = oracle_from_manifest(&manifest)?;
            let config = pso_from(&file, &PsoFlags {
                swarm_size,
                iterations,
                inertia,
                cognitive,
                social,
                archive_capacity,
            }, derive_seed(root_seed, "optimize"))?;
            let models = stages::load_model_set(&run, &oracle)?;
            let ensemble = stages::surrogate_ensemble(&models, &oracle.problem);
            let (archive, history) =
                stages::optimize(&run, &mut manifest, &oracle.problem, &ensemble, &config, "")?;
            manifest.record_config("pso.swarm_size", config.swarm_size);
            manifest.record_config("pso.iterations", config.iterations);
            manifest.finalize(&run)?;
            println!(
                "archive holds {} nondominated members; history records {} evaluations",
                archive.members.len(),
                history.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify {
            run,
            epsilon,
            confidence,
            zscore,
            sigma,
            error_margin,
            finite_population,
            no_normalize,
            method,
            self_check,
        } => {
            let mut manifest = RunManifest::load(&run.join(MANIFEST_NAME))?;
            let oracle = oracle_from_manifest(&manifest)?;
            let history = stages::read_history_csv(&manifest.artifact_path(&run, "history")?)?;
            let method = match file.resolve(method, "certify.method", "lhs".into())?.as_str() {
                "lhs" | "lhs-nearest" => SubsampleMethod::LhsNearest,
                "uniform" => SubsampleMethod::Uniform,
                other => bail!("unknown subsample method '{other}'"),
            };
            let config = RobustnessConfig {
                epsilon: file.resolve(epsilon, "certify.epsilon", 0.05)?,
                confidence: file.resolve(confidence, "certify.confidence", 0.99)?,
                spec: SampleSizeSpec {
                    zscore: file.resolve(zscore, "certify.zscore", 2.576)?,
                    sigma: file.resolve(sigma, "certify.sigma", 0.5)?,
                    e: file.resolve(error_margin, "certify.error_margin", 0.066)?,
                    finite_population: match finite_population {
                        Some(n) => Some(n),
                        None => file.get("certify.finite_population")?,
                    },
                },
                normalize: !no_normalize,
                method,
            };
            let seed = derive_seed(root_seed, "certify");
            let report = if self_check {
                let models = stages::load_model_set(&run, &oracle)?;
                let ensemble = stages::surrogate_ensemble(&models, &oracle.problem);
                stages::certify_stage(
                    &run,
                    &mut manifest,
                    &history,
                    &ensemble,
                    &oracle.problem.name,
                    &config,
                    seed,
                )?
            } else {
                let rigorous = |x: &[f64]| oracle.eval(x).map(|e| (e.f, e.g));
                stages::certify_stage(
                    &run,
                    &mut manifest,
                    &history,
                    &rigorous,
                    &oracle.problem.name,
                    &config,
                    seed,
                )?
            };
            manifest.finalize(&run)?;
            report::print_certification(&report, history.len());
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Repro {
            problem,
            out,
            dtlz2_form,
        } => {
            let oracle = make_oracle(&problem, dtlz2_form.as_deref(), &file, Dtlz2Form::Standard)?;
            let pso = pso_from(&file, &PsoFlags::default(), 0)?;
            let robustness_config = RobustnessConfig {
                epsilon: file.resolve(None, "certify.epsilon", 0.05)?,
                ..RobustnessConfig::default()
            };
            let outcome = stages::repro(&out, &oracle, root_seed, &pso, &robustness_config)?;
            println!("reproduction of {problem} complete: {}", out.display());
            for m in &outcome.metrics {
                println!(
                    "  {}: {} parameters, test MAE {:.3e}",
                    m.target, m.param_count, m.test_mae
                );
            }
            println!(
                "  front agreement: GD {:.4}, hypervolume ratio {:.4}",
                outcome.comparison.generational_distance, outcome.comparison.hypervolume_ratio
            );
            println!();
            report::print_certification(&outcome.report, pso.swarm_size * pso.iterations);
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { run } => {
            let manifest = RunManifest::load(&run.join(MANIFEST_NAME))?;
            report::print_run_summary(&run, &manifest)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_widths(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| anyhow!("bad width '{p}': {e}")))
        .collect()
}

/// Builds the oracle for a problem name, honoring the DTLZ2 form from
/// flag, then config file, then the given default.
fn make_oracle(
    problem: &str,
    flag: Option<&str>,
    file: &FileConfig,
    default_form: Dtlz2Form,
) -> Result<Oracle> {
    let form = match flag {
        Some(s) => s.parse()?,
        None => match file.get::<String>("dtlz2.form")? {
            Some(s) => s.parse()?,
            None => default_form,
        },
    };
    Ok(Oracle::new(problem, form)?)
}

fn oracle_from_manifest(manifest: &RunManifest) -> Result<Oracle> {
    let form = match &manifest.dtlz2_form {
        Some(s) => s.parse()?,
        None => Dtlz2Form::Paper,
    };
    Ok(Oracle::new(&manifest.problem, form)?)
}

#[derive(Default)]
struct PsoFlags {
    swarm_size: Option<usize>,
    iterations: Option<usize>,
    inertia: Option<f64>,
    cognitive: Option<f64>,
    social: Option<f64>,
    archive_capacity: Option<usize>,
}

fn pso_from(file: &FileConfig, flags: &PsoFlags, seed: u64) -> Result<PsoConfig> {
    let defaults = PsoConfig::default();
    Ok(PsoConfig {
        swarm_size: file.resolve(flags.swarm_size, "pso.swarm_size", defaults.swarm_size)?,
        iterations: file.resolve(flags.iterations, "pso.iterations", defaults.iterations)?,
        inertia: file.resolve(flags.inertia, "pso.inertia", defaults.inertia)?,
        cognitive: file.resolve(flags.cognitive, "pso.cognitive", defaults.cognitive)?,
        social: file.resolve(flags.social, "pso.social", defaults.social)?,
        archive_capacity: file.resolve(
            flags.archive_capacity,
            "pso.archive_capacity",
            defaults.archive_capacity,
        )?,
        seed,
    })
}
