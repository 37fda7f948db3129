//! End-to-end acceptance checks for the full pipeline. Each test prints
//! one summary line.
//!
//! The cheap checks run with the ordinary test suite. The five marked
//! #[ignore] reproduce all three benchmark studies (15-25 minutes on one
//! core, sharing one lazily built fixture); run everything with
//!
//! ```sh
//! cargo test --test acceptance -- --include-ignored --test-threads=1 --nocapture
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use certopt_core::mopso::ArchiveMember;
use certopt_core::robustness::{compute_rb, hypervolume, sample_size};
use certopt_core::surrogate::{self, Activation, MlpModel};
use certopt_core::{lhs_sample, rng_from_seed, ParetoArchive, SampleSizeSpec};
use rand::Rng;

struct ReproRun {
    dir: PathBuf,
    wall: std::time::Duration,
}

struct Fixture {
    root: tempfile::TempDir,
    runs: BTreeMap<&'static str, ReproRun>,
}

fn certopt_bin() -> &'static str {
    env!("CARGO_BIN_EXE_certopt")
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let root = tempfile::tempdir().expect("temp dir");
        let mut runs = BTreeMap::new();
        for problem in ["binh_korn", "zdt3", "dtlz2"] {
            let dir = root.path().join(problem);
            let started = std::time::Instant::now();
            let status = Command::new(certopt_bin())
                .args(["repro", problem, "--out"])
                .arg(&dir)
                .env("CERTOPT_SEED", "7")
                .status()
                .expect("run certopt repro");
            assert!(status.success(), "repro {problem} failed");
            runs.insert(
                problem,
                ReproRun {
                    dir,
                    wall: started.elapsed(),
                },
            );
        }
        Fixture { root, runs }
    })
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

#[test]
fn a01_parameter_counts_match_published_tables() {
    let cases: [(&[usize], usize); 5] = [
        (&[2, 60, 60, 60, 1], 7561),
        (&[3, 100, 1], 501),
        (&[3, 80, 80, 80, 80, 80, 1], 26321),
        (&[3, 180, 180, 180, 180, 180, 1], 131221),
        (&[3, 220, 220, 1], 49721),
    ];
    for (widths, want) in cases {
        let (_, total) = surrogate::param_count(widths).unwrap();
        assert_eq!(total, want, "widths {widths:?}");
    }
    println!("criterion 1 (parameter counts 7561/501/26321/131221/49721 exact): PASS");
}

#[test]
fn a02_analytic_gradients_match_finite_differences() {
    let mut rng = rng_from_seed(2024);
    let mut worst = 0.0f64;
    for k in 0..50u64 {
        let depth = rng.random_range(1..=3usize);
        let mut widths = vec![rng.random_range(1..=4usize)];
        for _ in 0..depth {
            widths.push(rng.random_range(2..=6));
        }
        widths.push(1);
        let mut model = MlpModel::init(&widths, Activation::Tanh, 9000 + k).unwrap();
        let dim = widths[0];
        let xs: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let ys: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (grad_w, grad_b, _) = surrogate::batch_gradients(&model, &xs, &ys);
        let eps = 1e-6;
        for layer in 0..grad_w.len() {
            let n_weights = grad_w[layer].len();
            for slot in 0..n_weights + grad_b[layer].len() {
                let (is_bias, index) = if slot < n_weights {
                    (false, slot)
                } else {
                    (true, slot - n_weights)
                };
                let analytic = if is_bias {
                    grad_b[layer][index]
                } else {
                    grad_w[layer][index]
                };
                let orig = if is_bias {
                    model.biases[layer][index]
                } else {
                    model.weights[layer][index]
                };
                let set = |m: &mut MlpModel, v: f64| {
                    if is_bias {
                        m.biases[layer][index] = v;
                    } else {
                        m.weights[layer][index] = v;
                    }
                };
                set(&mut model, orig + eps);
                let up = surrogate::batch_loss(&model, &xs, &ys);
                set(&mut model, orig - eps);
                let down = surrogate::batch_loss(&model, &xs, &ys);
                set(&mut model, orig);
                let numeric = (up - down) / (2.0 * eps);
                let scale = analytic.abs().max(numeric.abs()).max(1e-4);
                let rel = (analytic - numeric).abs() / scale;
                if rel > worst {
                    worst = rel;
                }
            }
        }
    }
    assert!(worst <= 1e-4, "worst relative error {worst}");
    println!(
        "criterion 2 (gradients vs central differences, 50 networks, max rel err {worst:.2e}): PASS"
    );
}

#[test]
fn a03_lhs_stratification_holds_over_1000_cases() {
    let mut rng = rng_from_seed(303);
    for _ in 0..1000 {
        let n = rng.random_range(1..300usize);
        let dim = rng.random_range(1..7usize);
        let seed: u64 = rng.random();
        let plan = lhs_sample(n, dim, seed).unwrap();
        for d in 0..dim {
            let mut hit = vec![false; n];
            for p in &plan.points {
                let k = ((p[d] * n as f64).floor() as usize).min(n - 1);
                assert!(!hit[k], "stratum visited twice (n={n}, dim={dim})");
                hit[k] = true;
            }
        }
    }
    println!("criterion 3 (LHS one-sample-per-stratum, 1000 random cases): PASS");
}

// The zdt3 second objective needs a hotter learning rate to capture its
// sin(10 pi x1) oscillation inside 500 epochs, and early stopping disabled
// so the cosine schedule anneals fully.
const TRAIN_PLANS: &[(&str, &[(&str, &str, &str, &[&str])])] = &[
    (
        "binh_korn",
        &[
            ("f1", "60,60,60", "tanh", &[]),
            ("f2", "60,60,60", "tanh", &[]),
        ],
    ),
    (
        "zdt3",
        &[
            ("f1", "60,60", "tanh", &[]),
            (
                "f2",
                "160,160,160",
                "tanh",
                &["--learning-rate", "0.01", "--patience", "500"],
            ),
        ],
    ),
    (
        "dtlz2",
        &[
            ("f1", "128,128", "tanh", &[]),
            ("f2", "128,128", "tanh", &[]),
            ("f3", "96,96", "tanh", &[]),
        ],
    ),
];

#[test]
#[ignore = "trains seven networks through the real binary"]
fn a04_surrogates_reach_mae_bound_at_default_budget() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let started = std::time::Instant::now();
    let mut lines = Vec::new();
    for (problem, targets) in TRAIN_PLANS {
        let dir = tmp.path().join(problem);
        let mut generate = Command::new(certopt_bin());
        generate
            .args(["generate", "--problem", problem, "--samples", "1000", "--out"])
            .arg(&dir)
            .env("CERTOPT_SEED", "7");
        if *problem == "dtlz2" {
            generate.args(["--dtlz2-form", "standard"]);
        }
        assert!(
            generate.status().expect("generate").success(),
            "generate {problem}"
        );
        for (target, widths, activation, extra) in *targets {
            let mut train = Command::new(certopt_bin());
            train
                .args(["train", "--run"])
                .arg(&dir)
                .args([
                    "--target",
                    target,
                    "--widths",
                    widths,
                    "--activation",
                    activation,
                ])
                .args(*extra)
                .env("CERTOPT_SEED", "7");
            assert!(
                train.status().expect("train").success(),
                "train {problem}/{target}"
            );
            let m = read_json(&dir.join(format!("metrics/{target}.json")));
            assert!(m["normalized"].as_bool().unwrap());
            let mae = m["test_mae"].as_f64().unwrap();
            lines.push(format!("{problem}/{target} {mae:.4}"));
            assert!(mae <= 0.01, "{problem}/{target} test MAE {mae} exceeds 0.01");
        }
    }
    let wall = started.elapsed();
    assert!(
        wall.as_secs() <= 300,
        "training took {wall:?}, budget is 5 minutes"
    );
    println!(
        "criterion 4 (test MAE <= 0.01 at 1000 samples, default budget: {}; wall {:.0?}): PASS",
        lines.join(", "),
        wall
    );
}

#[test]
#[ignore = "needs the three-benchmark reproduction fixture"]
fn a05_fronts_agree_with_rigorous_runs() {
    let fx = fixture();
    let mut parts = Vec::new();
    for problem in ["binh_korn", "zdt3", "dtlz2"] {
        let run = &fx.runs[problem];
        let c = read_json(&run.dir.join("front_agreement.json"));
        let gd = c["generational_distance"].as_f64().unwrap();
        let ratio = c["hypervolume_ratio"].as_f64().unwrap();
        if problem == "dtlz2" {
            assert!(gd <= 0.1, "{problem} GD {gd} exceeds 0.1");
        } else {
            assert!(gd <= 0.05, "{problem} GD {gd} exceeds 0.05");
            assert!(ratio >= 0.95, "{problem} hypervolume ratio {ratio} outside 5%");
        }
        parts.push(format!("{problem} GD {gd:.4} HVr {ratio:.4}"));
    }
    println!("criterion 5 (front agreement: {}): PASS", parts.join("; "));
}

#[test]
#[ignore = "needs the three-benchmark reproduction fixture"]
fn a06_sample_size_rule_and_certification_cost() {
    let np95 = sample_size(&SampleSizeSpec {
        zscore: 1.96,
        sigma: 0.5,
        e: 0.05,
        finite_population: None,
    })
    .unwrap();
    assert_eq!(np95, 385);

    let mut rng = rng_from_seed(606);
    for _ in 0..1000 {
        let spec = SampleSizeSpec {
            zscore: rng.random_range(0.5..4.0),
            sigma: rng.random_range(0.05..0.95),
            e: rng.random_range(0.01..0.5),
            finite_population: None,
        };
        let base = sample_size(&spec).unwrap();
        let tighter = sample_size(&SampleSizeSpec {
            e: spec.e * rng.random_range(0.2..1.0),
            ..spec.clone()
        })
        .unwrap();
        let bolder = sample_size(&SampleSizeSpec {
            zscore: spec.zscore * rng.random_range(1.0..2.0),
            ..spec.clone()
        })
        .unwrap();
        assert!(
            tighter >= base && bolder >= base,
            "monotonicity violated for {spec:?}"
        );
    }

    let fx = fixture();
    let mut parts = Vec::new();
    for problem in ["binh_korn", "zdt3", "dtlz2"] {
        let run = &fx.runs[problem];
        let report = read_json(&run.dir.join("report.json"));
        let np = report["np"].as_u64().unwrap();
        assert!(np >= 381, "{problem} Np {np} below 381");
        let history = std::fs::read_to_string(run.dir.join("history.csv")).unwrap();
        let evals = history.lines().count() - 1;
        let cost = np as f64 / evals as f64;
        assert!(
            cost <= 0.04,
            "{problem} certification cost {cost:.4} exceeds 4% of {evals} evaluations"
        );
        parts.push(format!("{problem} {np}/{evals}"));
    }
    println!(
        "criterion 6 (385 at z=1.96/E=0.05; monotone over 1000 specs; cost <= 4%: {}): PASS",
        parts.join(", ")
    );
}

#[test]
#[ignore = "needs the three-benchmark reproduction fixture"]
fn a07_certification_bounds_hold_across_benchmarks() {
    let fx = fixture();
    let mut rbs: Vec<(String, f64)> = Vec::new();
    let mut total_wall = std::time::Duration::ZERO;
    for problem in ["binh_korn", "zdt3", "dtlz2"] {
        let run = &fx.runs[problem];
        total_wall += run.wall;
        let report = read_json(&run.dir.join("report.json"));
        for (j, o) in report["per_objective"].as_array().unwrap().iter().enumerate() {
            rbs.push((format!("{problem}/f{}", j + 1), o["rb"].as_f64().unwrap()));
        }
    }
    assert_eq!(rbs.len(), 7, "expected 7 objectives across the benchmarks");
    let within_tight = rbs.iter().filter(|(_, rb)| rb.abs() <= 0.05).count();
    let worst = rbs
        .iter()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .unwrap();
    for (name, rb) in &rbs {
        assert!(rb.abs() <= 0.1, "{name} |Rb| {} exceeds 0.1", rb.abs());
    }
    assert!(
        within_tight >= 5,
        "only {within_tight} of 7 objectives reach |Rb| <= 0.05"
    );
    assert!(
        total_wall.as_secs() <= 900,
        "three reproductions took {total_wall:?}, budget is 15 minutes"
    );
    println!(
        "criterion 7 (|Rb| <= 0.05 for {within_tight}/7, all <= 0.1, worst {} {:+.4}, wall {:.0?}): PASS",
        worst.0, worst.1, total_wall
    );
}

#[test]
fn a08_reference_oracle_equivalences() {
    let mut rng = rng_from_seed(808);
    for _ in 0..100 {
        let n = rng.random_range(1..60usize);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..2).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let mut archive = ParetoArchive::new(n);
        for f in &points {
            archive
                .insert(ArchiveMember {
                    x: vec![],
                    f: f.clone(),
                    g: vec![],
                })
                .unwrap();
        }
        let mut got: Vec<Vec<f64>> = archive.objective_vectors();
        let mut want: Vec<Vec<f64>> = points
            .iter()
            .filter(|p| {
                !points.iter().any(|q| {
                    q.iter().zip(p.iter()).all(|(a, b)| a <= b)
                        && q.iter().zip(p.iter()).any(|(a, b)| a < b)
                })
            })
            .cloned()
            .collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want, "archive disagrees with brute-force filter");
    }

    for trial in 0..50 {
        let mut rng = rng_from_seed(trial);
        let pairs: Vec<(f64, f64)> = (0..rng.random_range(1..200))
            .map(|_| (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect();
        let (rb, mae) = compute_rb(&pairs).unwrap();
        let naive_rb: f64 = pairs.iter().map(|(f, h)| f - h).sum();
        let naive_mae: f64 =
            pairs.iter().map(|(f, h)| (f - h).abs()).sum::<f64>() / pairs.len() as f64;
        assert!((rb - naive_rb).abs() < 1e-12 && (mae - naive_mae).abs() < 1e-12);
    }

    let front = vec![
        vec![0.1, 0.85],
        vec![0.3, 0.5],
        vec![0.55, 0.35],
        vec![0.8, 0.1],
    ];
    let reference = [1.0, 1.0];
    let exact = hypervolume(&front, &reference).unwrap();
    let cells = 1000;
    let mut covered = 0usize;
    for i in 0..cells {
        let qx = (i as f64 + 0.5) / cells as f64;
        for j in 0..cells {
            let qy = (j as f64 + 0.5) / cells as f64;
            if front.iter().any(|f| f[0] <= qx && f[1] <= qy) {
                covered += 1;
            }
        }
    }
    let estimate = covered as f64 / (cells * cells) as f64;
    let rel = (exact - estimate).abs() / exact;
    assert!(rel < 0.01, "hypervolume {exact} vs grid estimate {estimate}");
    println!(
        "criterion 8 (archive = brute force x100; rb = naive sum x50; hypervolume vs grid rel {rel:.5}): PASS"
    );
}

#[test]
#[ignore = "runs the binh_korn reproduction twice"]
fn a09_reproduction_is_byte_identical() {
    let fx = fixture();
    let first = &fx.runs["binh_korn"];
    let again = fx.root.path().join("binh_korn_again");
    let started = std::time::Instant::now();
    let status = Command::new(certopt_bin())
        .args(["repro", "binh_korn", "--out"])
        .arg(&again)
        .env("CERTOPT_SEED", "7")
        .status()
        .expect("run certopt repro");
    assert!(status.success());
    let wall = first.wall + started.elapsed();

    let manifest = read_json(&again.join("manifest.json"));
    let mut compared = 0;
    for (role, rel) in manifest["artifacts"].as_object().unwrap() {
        let rel = rel.as_str().unwrap();
        let a = std::fs::read(first.dir.join(rel)).unwrap();
        let b = std::fs::read(again.join(rel)).unwrap();
        assert_eq!(a, b, "artifact '{role}' ({rel}) differs between runs");
        compared += 1;
    }
    let a = std::fs::read(first.dir.join("manifest.json")).unwrap();
    let b = std::fs::read(again.join("manifest.json")).unwrap();
    assert_eq!(a, b, "manifests differ");
    assert!(
        wall.as_secs() <= 600,
        "two reproductions took {wall:?}, budget is 10 minutes"
    );
    println!(
        "criterion 9 (repro binh_korn twice, {compared} artifacts + manifest byte-identical, wall {wall:.0?}): PASS"
    );
}
