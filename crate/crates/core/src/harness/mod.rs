//! Seeded Monte Carlo experiments: scenario setup, per-trial estimation,
//! aggregation with bootstrap intervals, and result files.

mod bootstrap;
mod config;
mod output;
mod run;

pub use bootstrap::{bootstrap_ci, bootstrap_mean_sd, percentile, Statistic};
pub use config::{
    load_outcome_table, EstimatorKind, ExperimentConfig, GraphSource, MixingMode, NoiseSpec, OutcomeSource, Scenario,
};
pub use output::{emit_results, write_summary_csv, RESULT_COLUMNS};
pub use run::{run_experiment, run_scenario, run_trials, summarize, EstimateSummary, SummaryRow, TrialRecord};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the RNG stream for trial `trial`: `mix64(mix64(master + γ) ^ trial)`
/// with `γ` the SplitMix64 increment.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    mix64(mix64(master_seed.wrapping_add(GOLDEN_GAMMA)) ^ trial)
}

/// Seeds for streams that are not trials (fixed graph, bootstrap), kept
/// apart from trial streams by a distinct tag.
pub(crate) fn auxiliary_seed(master_seed: u64, tag: u64, index: u64) -> u64 {
    trial_seed(master_seed ^ mix64(tag), index)
}

pub(crate) const GRAPH_STREAM: u64 = 0x0067_7261_7068;
pub(crate) const BOOTSTRAP_STREAM: u64 = 0x626f_6f74;
