use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bootstrap::bootstrap_mean_sd;
use super::config::{generate_graph, EstimatorKind, ExperimentConfig, GraphSource, Scenario};
use super::{auxiliary_seed, trial_seed, BOOTSTRAP_STREAM};
use crate::error::{Error, Result};
use crate::estimators::{as_noisy_estimate, ht_estimate, mme_estimate, realize_outcomes, RouteCounts};
use crate::exposure::{assign_treatment, ExposureLevel};
use crate::graph::Graph;
use crate::noise::{replicate, NoiseParams};
use crate::noise_fit::{fit_replicates, NoiseFitResult};
use crate::numeric::{mean, sample_sd};

/// Replicates drawn per trial: one for estimation, all three for the noise fit.
const REPLICATES: usize = 3;

// Independent ChaCha streams under each trial seed. Runs that differ only
// in noise rates therefore share treatments, and edge deletions are nested
// in beta.
const GRAPH_STREAM_ID: u64 = 0;
const NOISE_STREAM_ID: u64 = 1;
const TREATMENT_STREAM_ID: u64 = 2;

/// Outcome of one trial. `estimates` follows the config's estimator order
/// and is empty when the trial failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub estimates: Vec<[f64; 4]>,
    pub failure: Option<String>,
    pub routes: RouteCounts,
    pub fit: Option<NoiseFitResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: EstimatorKind,
    pub level: ExposureLevel,
    pub truth: f64,
    pub mean_estimate: f64,
    pub bias: f64,
    pub bias_ci_lo: f64,
    pub bias_ci_hi: f64,
    pub sd: f64,
    pub sd_ci_lo: f64,
    pub sd_ci_hi: f64,
    /// Trials that contributed (failed trials excluded).
    pub n_trials: usize,
    pub n_failed: usize,
}

impl SummaryRow {
    /// Monte Carlo standard error of the mean estimate.
    pub fn mc_se(&self) -> f64 {
        self.sd / (self.n_trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub config: ExperimentConfig,
    pub rows: Vec<SummaryRow>,
    pub n_trials: usize,
    pub n_failed: usize,
    /// Vertex routes of the corrected estimator summed over trials.
    pub routes: RouteCounts,
    pub fits_run: usize,
    pub fits_converged: usize,
}

impl EstimateSummary {
    pub fn row(&self, estimator: EstimatorKind, level: ExposureLevel) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.level == level)
    }

    pub fn fit_convergence_rate(&self) -> Option<f64> {
        (self.fits_run > 0).then(|| self.fits_converged as f64 / self.fits_run as f64)
    }
}

fn run_trial(scn: &Scenario, cfg: &ExperimentConfig, trial: u64) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.master_seed, trial);
    let stream = |id: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        rng
    };
    let mut record = TrialRecord {
        trial,
        estimates: Vec::new(),
        failure: None,
        routes: RouteCounts::default(),
        fit: None,
    };

    let fresh;
    let graph: &Graph = match (&cfg.graph_source, cfg.regenerate_graph) {
        (GraphSource::Generator { n_vertices, degree }, true) => {
            fresh = generate_graph(*n_vertices, degree, &mut stream(GRAPH_STREAM_ID))?;
            &fresh
        }
        _ => &scn.graph,
    };

    let noise = cfg.noise.params();
    let observed = if cfg.needs_observation() {
        replicate(graph, &noise, REPLICATES, &mut stream(NOISE_STREAM_ID))?
    } else {
        Vec::new()
    };

    let mut noise_hat = noise;
    if cfg.estimators.contains(&EstimatorKind::Mme) && !cfg.noise.known {
        match fit_replicates(&observed[0], &observed[1], &observed[2], &cfg.fit) {
            Ok((_, fit)) => {
                noise_hat = NoiseParams {
                    alpha: fit.alpha_hat,
                    beta: fit.beta_hat,
                };
                record.fit = Some(fit);
            }
            Err(e) => {
                record.failure = Some(e.to_string());
                return Ok(record);
            }
        }
    }

    let t = assign_treatment(graph.n_vertices(), cfg.p, &mut stream(TREATMENT_STREAM_ID))?;
    let realized = realize_outcomes(graph, &t, &scn.outcomes)?;
    let rule = cfg.mixing_mode.rule(cfg.p)?;
    for est in &cfg.estimators {
        let means = match est {
            EstimatorKind::HtTrue => ht_estimate(graph, &t, &realized, cfg.p)?,
            EstimatorKind::AsNoisy => as_noisy_estimate(&observed[0], &t, &realized, cfg.p)?,
            EstimatorKind::Mme => {
                let m = mme_estimate(&observed[0], &t, &realized, cfg.p, &noise_hat, &rule)?;
                record.routes = m.routes;
                m.means
            }
        };
        record.estimates.push(means.0);
    }
    Ok(record)
}

/// Runs the trials with indices in `trials`, in parallel, returned in index
/// order. Each trial's randomness depends only on the master seed and its index.
pub fn run_trials(scn: &Scenario, cfg: &ExperimentConfig, trials: Range<u64>) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    if scn.outcomes.len() != scn.graph.n_vertices() {
        return Err(Error::Dimension {
            expected: scn.graph.n_vertices(),
            found: scn.outcomes.len(),
        });
    }
    trials.into_par_iter().map(|t| run_trial(scn, cfg, t)).collect()
}

/// Aggregates trial records in the order given. Failed trials are excluded;
/// more than 1% failures is an error.
pub fn summarize(scn: &Scenario, cfg: &ExperimentConfig, records: &[TrialRecord]) -> Result<EstimateSummary> {
    if records.is_empty() {
        return Err(Error::param("no trial records to summarise"));
    }
    let n_failed = records.iter().filter(|r| r.failure.is_some()).count();
    if n_failed * 100 > records.len() {
        return Err(Error::TooManyFailures {
            failed: n_failed,
            trials: records.len(),
        });
    }
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.failure.is_none()).collect();

    let mut routes = RouteCounts::default();
    for r in &ok {
        routes.corrected += r.routes.corrected;
        routes.plug_in += r.routes.plug_in;
        routes.singular_fallback += r.routes.singular_fallback;
    }
    let fits: Vec<&NoiseFitResult> = records.iter().filter_map(|r| r.fit.as_ref()).collect();
    let fits_run = fits.len() + records.iter().filter(|r| r.failure.is_some()).count();

    let truth = scn.outcomes.truth();
    let cells: Vec<(usize, EstimatorKind, ExposureLevel)> = cfg
        .estimators
        .iter()
        .enumerate()
        .flat_map(|(e, &kind)| ExposureLevel::ALL.into_iter().map(move |level| (e, kind, level)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(e, estimator, level)| {
            let k = level.index();
            let values: Vec<f64> = ok.iter().map(|r| r.estimates[e][k]).collect();
            let cell = (e * ExposureLevel::ALL.len() + k) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(auxiliary_seed(cfg.master_seed, BOOTSTRAP_STREAM, cell));
            let (mean_ci, sd_ci) = bootstrap_mean_sd(&values, cfg.bootstrap_b, cfg.bootstrap_level, &mut rng)?;
            let mean_estimate = mean(&values);
            let truth = truth.0[k];
            Ok(SummaryRow {
                estimator,
                level,
                truth,
                mean_estimate,
                bias: mean_estimate - truth,
                bias_ci_lo: mean_ci.0 - truth,
                bias_ci_hi: mean_ci.1 - truth,
                sd: sample_sd(&values),
                sd_ci_lo: sd_ci.0,
                sd_ci_hi: sd_ci.1,
                n_trials: values.len(),
                n_failed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EstimateSummary {
        config: cfg.clone(),
        rows,
        n_trials: records.len(),
        n_failed,
        routes,
        fits_run,
        fits_converged: fits.iter().filter(|f| f.converged).count(),
    })
}

/// All trials of `cfg` on a prepared scenario.
pub fn run_scenario(scn: &Scenario, cfg: &ExperimentConfig) -> Result<EstimateSummary> {
    let records = run_trials(scn, cfg, 0..cfg.trials as u64)?;
    summarize(scn, cfg, &records)
}

/// Builds the scenario described by `cfg` and runs it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EstimateSummary> {
    cfg.validate()?;
    let scn = Scenario::from_config(cfg)?;
    run_scenario(&scn, cfg)
}
