//! Analytic benchmark problems.
//!
//! These are the rigorous oracles: they generate training data and later
//! serve as the ground truth when certifying surrogate-based optimization
//! results. All constraints use the convention g(x) <= 0 means feasible.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Static description of a registered benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub dim: usize,
    pub n_objectives: usize,
    pub n_constraints: usize,
    /// Per-variable closed intervals [lo, hi].
    pub bounds: Vec<(f64, f64)>,
}

/// One oracle evaluation: inputs, objectives, constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

/// DTLZ2 comes in two shapes: the form printed in the source material
/// (an extra sin factor on the first objective and a full-sum G term,
/// whose exact front collapses to a single point) and the standard form
/// with a 2-D spherical front. `Standard` is what comparison runs use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtlz2Form {
    Paper,
    Standard,
}

impl std::fmt::Display for Dtlz2Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Dtlz2Form::Paper => "paper",
            Dtlz2Form::Standard => "standard",
        })
    }
}

impl std::str::FromStr for Dtlz2Form {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Dtlz2Form::Paper),
            "standard" => Ok(Dtlz2Form::Standard),
            other => Err(CoreError::InvalidArgument(format!(
                "unknown dtlz2 form '{other}', expected 'paper' or 'standard'"
            ))),
        }
    }
}

pub const PROBLEM_NAMES: [&str; 3] = ["binh_korn", "zdt3", "dtlz2"];

/// Looks up the static descriptor for a registered problem name.
pub fn registry_lookup(name: &str) -> Result<Problem> {
    match name {
        "binh_korn" => Ok(Problem {
            name: name.into(),
            dim: 2,
            n_objectives: 2,
            n_constraints: 2,
            bounds: vec![(0.0, 5.0), (0.0, 3.0)],
        }),
        "zdt3" => Ok(Problem {
            name: name.into(),
            dim: 3,
            n_objectives: 2,
            n_constraints: 0,
            bounds: vec![(0.0, 1.0); 3],
        }),
        "dtlz2" => Ok(Problem {
            name: name.into(),
            dim: 3,
            n_objectives: 3,
            n_constraints: 0,
            bounds: vec![(0.0, 1.0); 3],
        }),
        other => Err(CoreError::UnknownProblem {
            name: other.into(),
            available: PROBLEM_NAMES.join(", "),
        }),
    }
}

fn check_bounds(x: &[f64], bounds: &[(f64, f64)]) -> Result<()> {
    if x.len() != bounds.len() {
        return Err(CoreError::DimensionMismatch {
            expected: bounds.len(),
            got: x.len(),
        });
    }
    for (i, (&xi, &(lo, hi))) in x.iter().zip(bounds).enumerate() {
        if !(lo..=hi).contains(&xi) || !xi.is_finite() {
            return Err(CoreError::OutOfBounds {
                index: i + 1,
                value: xi,
                lo,
                hi,
            });
        }
    }
    Ok(())
}

/// Binh and Korn: two quadratic objectives, two quadratic constraints,
/// box [0,5] x [0,3].
pub fn eval_binh_korn(x: &[f64]) -> Result<Evaluation> {
    check_bounds(x, &[(0.0, 5.0), (0.0, 3.0)])?;
    let (x1, x2) = (x[0], x[1]);
    let f1 = 4.0 * x1 * x1 + 4.0 * x2 * x2;
    let f2 = (x1 - 5.0).powi(2) + (x2 - 5.0).powi(2);
    let g1 = (x1 - 5.0).powi(2) + x2 * x2 - 25.0;
    let g2 = -(x1 - 8.0).powi(2) - (x2 + 3.0).powi(2) + 7.7;
    Ok(Evaluation {
        x: x.to_vec(),
        f: vec![f1, f2],
        g: vec![g1, g2],
    })
}

/// ZDT3 in the three-variable form used here: f1 = x1 and a rippled second
/// objective through the auxiliary term 1 + (9/29)(x2 + x3).
pub fn eval_zdt3(x: &[f64]) -> Result<Evaluation> {
    check_bounds(x, &[(0.0, 1.0); 3])?;
    let x1 = x[0];
    let aux = 1.0 + (9.0 / 29.0) * (x[1] + x[2]);
    let ratio = x1 / aux;
    let f2 = aux * (1.0 - ratio.sqrt() - ratio * (10.0 * PI * x1).sin());
    Ok(Evaluation {
        x: x.to_vec(),
        f: vec![x1, f2],
        g: vec![],
    })
}

/// DTLZ2 with three variables and three objectives on [0,1]^3.
pub fn eval_dtlz2(x: &[f64], form: Dtlz2Form) -> Result<Evaluation> {
    check_bounds(x, &[(0.0, 1.0); 3])?;
    let c = |i: usize| (x[i] * PI / 2.0).cos();
    let s = |i: usize| (x[i] * PI / 2.0).sin();
    let f = match form {
        Dtlz2Form::Paper => {
            let big_g: f64 = x.iter().map(|xi| (xi - 0.5).powi(2)).sum();
            vec![
                (1.0 + big_g) * c(0) * c(1) * s(2),
                (1.0 + big_g) * c(0) * s(1),
                (1.0 + big_g) * s(0),
            ]
        }
        Dtlz2Form::Standard => {
            let big_g = (x[2] - 0.5).powi(2);
            vec![
                (1.0 + big_g) * c(0) * c(1),
                (1.0 + big_g) * c(0) * s(1),
                (1.0 + big_g) * s(0),
            ]
        }
    };
    Ok(Evaluation {
        x: x.to_vec(),
        f,
        g: vec![],
    })
}

/// A callable handle over one registered problem, fixing the DTLZ2 form.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub problem: Problem,
    pub dtlz2_form: Dtlz2Form,
}

impl Oracle {
    pub fn new(name: &str, dtlz2_form: Dtlz2Form) -> Result<Self> {
        Ok(Oracle {
            problem: registry_lookup(name)?,
            dtlz2_form,
        })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Evaluation> {
        match self.problem.name.as_str() {
            "binh_korn" => eval_binh_korn(x),
            "zdt3" => eval_zdt3(x),
            "dtlz2" => eval_dtlz2(x, self.dtlz2_form),
            other => Err(CoreError::UnknownProblem {
                name: other.into(),
                available: PROBLEM_NAMES.join(", "),
            }),
        }
    }

    /// Column names for datasets and history files: x1..xd, f1..fm, g1..gc.
    pub fn column_names(&self) -> (Vec<String>, Vec<String>) {
        let p = &self.problem;
        let inputs = (1..=p.dim).map(|i| format!("x{i}")).collect();
        let outputs = (1..=p.n_objectives)
            .map(|i| format!("f{i}"))
            .chain((1..=p.n_constraints).map(|i| format!("g{i}")))
            .collect();
        (inputs, outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close_to(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn binh_korn_known_points() {
        let e = eval_binh_korn(&[0.0, 0.0]).unwrap();
        assert_eq!(e.f, vec![0.0, 50.0]);
        close_to(e.g[0], 0.0);
        close_to(e.g[1], -65.3);

        let e = eval_binh_korn(&[5.0, 3.0]).unwrap();
        assert_eq!(e.f, vec![136.0, 4.0]);
        close_to(e.g[0], -16.0);
        close_to(e.g[1], -37.3);

        let e = eval_binh_korn(&[2.5, 1.5]).unwrap();
        close_to(e.f[0], 34.0);
        close_to(e.f[1], 18.5);
        close_to(e.g[0], -16.5);
        close_to(e.g[1], -42.8);
    }

    #[test]
    fn binh_korn_rejects_out_of_bounds() {
        let err = eval_binh_korn(&[5.1, 0.0]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("x1") && msg.contains('5'), "{msg}");
        assert!(eval_binh_korn(&[0.0, -0.001]).is_err());
    }

    #[test]
    fn binh_korn_objectives_nonnegative() {
        let mut rng = crate::rng::rng_from_seed(1);
        use rand::Rng;
        for _ in 0..500 {
            let x = [rng.random::<f64>() * 5.0, rng.random::<f64>() * 3.0];
            let e = eval_binh_korn(&x).unwrap();
            assert!(e.f[0] >= 0.0 && e.f[1] >= 0.0);
        }
    }

    #[test]
    fn zdt3_known_points() {
        let e = eval_zdt3(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(e.f, vec![0.0, 1.0]);

        let e = eval_zdt3(&[1.0, 0.0, 0.0]).unwrap();
        close_to(e.f[0], 1.0);
        close_to(e.f[1], 0.0);

        let e = eval_zdt3(&[0.5, 0.0, 0.0]).unwrap();
        close_to(e.f[1], 1.0 - 0.5f64.sqrt());
    }

    #[test]
    fn zdt3_at_zero_first_variable_equals_aux() {
        let mut rng = crate::rng::rng_from_seed(2);
        use rand::Rng;
        for _ in 0..200 {
            let (x2, x3) = (rng.random::<f64>(), rng.random::<f64>());
            let e = eval_zdt3(&[0.0, x2, x3]).unwrap();
            close_to(e.f[1], 1.0 + (9.0 / 29.0) * (x2 + x3));
        }
    }

    #[test]
    fn dtlz2_known_points() {
        let e = eval_dtlz2(&[0.5; 3], Dtlz2Form::Paper).unwrap();
        close_to(e.f[0], 0.5 * std::f64::consts::FRAC_1_SQRT_2);
        close_to(e.f[1], 0.5);
        close_to(e.f[2], std::f64::consts::FRAC_1_SQRT_2);

        let e = eval_dtlz2(&[0.0; 3], Dtlz2Form::Paper).unwrap();
        assert_eq!(e.f, vec![0.0, 0.0, 0.0]);

        // independent scalar substitution at (1, 0, 0.5)
        let e = eval_dtlz2(&[1.0, 0.0, 0.5], Dtlz2Form::Paper).unwrap();
        let big_g = 0.25 + 0.25 + 0.0;
        close_to(e.f[0], 0.0);
        close_to(e.f[1], 0.0);
        close_to(e.f[2], 1.0 + big_g);
    }

    #[test]
    fn dtlz2_standard_front_is_unit_sphere_at_g_zero() {
        let mut rng = crate::rng::rng_from_seed(3);
        use rand::Rng;
        for _ in 0..200 {
            let x = [rng.random::<f64>(), rng.random::<f64>(), 0.5];
            let e = eval_dtlz2(&x, Dtlz2Form::Standard).unwrap();
            let norm2: f64 = e.f.iter().map(|v| v * v).sum();
            assert!((norm2 - 1.0).abs() < 1e-12, "norm2 = {norm2}");
        }
    }

    #[test]
    fn oracles_are_pure() {
        let o = Oracle::new("dtlz2", Dtlz2Form::Paper).unwrap();
        let a = o.eval(&[0.3, 0.7, 0.9]).unwrap();
        let b = o.eval(&[0.3, 0.7, 0.9]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn registry_contents() {
        let p = registry_lookup("binh_korn").unwrap();
        assert_eq!((p.dim, p.n_objectives, p.n_constraints), (2, 2, 2));
        let p = registry_lookup("zdt3").unwrap();
        assert_eq!((p.dim, p.n_objectives, p.n_constraints), (3, 2, 0));
        let p = registry_lookup("dtlz2").unwrap();
        assert_eq!((p.dim, p.n_objectives, p.n_constraints), (3, 3, 0));
        let err = registry_lookup("rosenbrock").unwrap_err().to_string();
        assert!(err.contains("binh_korn") && err.contains("zdt3"));
    }

    #[test]
    fn column_names_follow_convention() {
        let o = Oracle::new("binh_korn", Dtlz2Form::Paper).unwrap();
        let (xs, ys) = o.column_names();
        assert_eq!(xs, vec!["x1", "x2"]);
        assert_eq!(ys, vec!["f1", "f2", "g1", "g2"]);
    }
}
