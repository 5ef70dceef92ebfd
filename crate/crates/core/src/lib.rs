//! Estimation of causal effects under network interference when the
//! network itself is observed with edge errors.
//!
//! The crate covers graph generation and ingestion, the edge-noise model,
//! the four-level exposure mapping with its confusion matrix, the
//! Horvitz-Thompson, plug-in and method-of-moments estimators, the
//! moment-based noise fit, closed-form bias predictions, and a seeded
//! Monte Carlo harness.

pub mod error;
pub mod estimators;
pub mod exposure;
pub mod graph;
pub mod harness;
pub mod noise;
pub mod noise_fit;
pub mod numeric;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{
    as_noisy_estimate, contrast, ht_estimate, mme_estimate, realize_outcomes, LevelMeans, MixingRule,
    MmeEstimate, OutcomeTable, RealizedOutcomes, RouteCounts,
};
pub use exposure::{
    assign_treatment, confusion_matrix, exposure_level, exposure_levels, exposure_probabilities, invert_confusion,
    ConfusionMatrix, ExposureLevel, ExposureProbabilities, GeneralizedExposureConfig, Treatment,
};
pub use graph::{DegreeDistribution, Graph};
pub use noise::{perturb, replicate, NoiseParams};
pub use noise_fit::{default_alpha0, fit_alpha_beta, fit_with_options, moment_stats, FitOptions, MomentStats, NoiseFitResult};
pub use theory::{plug_in_bias, condition_diagnostics, observed_degree_moments, BiasPrediction, ConditionDiagnostics};
pub use harness::{run_experiment, EstimateSummary, EstimatorKind, ExperimentConfig};
