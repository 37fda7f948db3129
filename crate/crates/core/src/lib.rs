//! Surrogate-assisted constrained multiobjective optimization with
//! statistical robustness certification.
//!
//! The pieces compose into one pipeline: Latin hypercube sampling of an
//! analytic benchmark ([`doe`], [`problems`]) produces a training table
//! ([`dataset`]); multilayer perceptron regressors fit each output
//! ([`surrogate`]), optionally tuned by successive halving ([`tuner`]);
//! particle swarm optimization runs against the surrogates while keeping a
//! Pareto archive and the full population history ([`mopso`]); a sized
//! subsample of that history re-evaluated on the rigorous model then
//! certifies the result ([`robustness`]).

pub mod dataset;
pub mod doe;
pub mod error;
pub mod mopso;
pub mod problems;
pub mod rng;
pub mod robustness;
pub mod surrogate;
pub mod tuner;

pub use dataset::{Dataset, Split};
pub use doe::{correlation_matrix, lhs_sample, lhs_subsample, scale_to_bounds, SubsampleMethod};
pub use error::{CoreError, Result};
pub use mopso::{ParetoArchive, PopulationHistory, PsoConfig};
pub use problems::{
    eval_binh_korn, eval_dtlz2, eval_zdt3, Dtlz2Form, Evaluation, Oracle, Problem, PROBLEM_NAMES,
};
pub use rng::{derive_seed, rng_from_seed};
pub use robustness::{
    certify, front_agreement, sample_size, RobustnessConfig, RobustnessReport, SampleSizeSpec,
};
pub use surrogate::{MlpModel, TrainConfig};
pub use tuner::{HyperbandPlan, SearchSpace};
