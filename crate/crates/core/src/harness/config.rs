use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{auxiliary_seed, GRAPH_STREAM};
use crate::error::{Error, Result};
use crate::estimators::{MixingRule, OutcomeTable};
use crate::exposure::check_probability;
use crate::graph::{
    build_graph_configuration, build_true_graph_from_rounds, load_edge_lists, load_rounds, sample_degree_sequence,
    DegreeDistribution, Graph, LabelIndex,
};
use crate::noise::NoiseParams;
use crate::noise_fit::FitOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSource {
    /// Degree sequence from `degree`, wired by the erased configuration model.
    Generator { n_vertices: usize, degree: DegreeDistribution },
    /// `node_a,node_b` CSV. With `n_vertices`, labels `0..n_vertices` are
    /// vertex indices and isolated vertices are kept.
    EdgeList {
        path: PathBuf,
        #[serde(default)]
        n_vertices: Option<usize>,
    },
    /// `round,node_a,node_b` CSV; a pair is an edge when reported in at
    /// least `min_count` rounds.
    Rounds { path: PathBuf, min_count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub alpha: f64,
    pub beta: f64,
    /// Use the true rates in the corrected estimator instead of fitting them.
    #[serde(default)]
    pub known: bool,
}

impl NoiseSpec {
    pub fn params(&self) -> NoiseParams {
        NoiseParams {
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeSource {
    /// Every vertex gets the same four potential outcomes.
    Dilated { values: [f64; 4] },
    /// CSV with header `y_c11,y_c10,y_c01,y_c00`, one row per vertex index.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingMode {
    #[default]
    SparseFallback,
    OrderOfMagnitude,
}

impl MixingMode {
    pub fn rule(self, p: f64) -> Result<MixingRule> {
        match self {
            MixingMode::SparseFallback => Ok(MixingRule::SparseFallback),
            MixingMode::OrderOfMagnitude => MixingRule::order_of_magnitude(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// Horvitz-Thompson on the true graph.
    #[serde(rename = "HT_true")]
    HtTrue,
    /// Plug-in on the first observed replicate.
    #[serde(rename = "AS_noisy")]
    AsNoisy,
    /// Method-of-moments correction on the first observed replicate.
    #[serde(rename = "MME")]
    Mme,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::HtTrue, EstimatorKind::AsNoisy, EstimatorKind::Mme];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::HtTrue => "HT_true",
            EstimatorKind::AsNoisy => "AS_noisy",
            EstimatorKind::Mme => "MME",
        }
    }

    pub fn needs_observation(self) -> bool {
        self != EstimatorKind::HtTrue
    }
}

fn default_bootstrap_b() -> usize {
    1000
}

fn default_bootstrap_level() -> f64 {
    0.95
}

fn default_estimators() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph_source: GraphSource,
    pub noise: NoiseSpec,
    pub p: f64,
    pub outcomes: OutcomeSource,
    pub trials: usize,
    #[serde(default = "default_bootstrap_b")]
    pub bootstrap_b: usize,
    #[serde(default = "default_bootstrap_level")]
    pub bootstrap_level: f64,
    #[serde(default)]
    pub mixing_mode: MixingMode,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    /// Draw a fresh graph in every trial (generator sources only).
    #[serde(default)]
    pub regenerate_graph: bool,
    #[serde(default)]
    pub fit: FitOptions,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data paths are resolved against its directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.graph_source {
            GraphSource::EdgeList { path, .. } | GraphSource::Rounds { path, .. } => fix(path),
            GraphSource::Generator { .. } => {}
        }
        if let OutcomeSource::File { path } = &mut self.outcomes {
            fix(path);
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability(self.p)?;
        self.noise.params().validate()?;
        if self.trials == 0 {
            return Err(Error::param("trials must be >= 1"));
        }
        if self.bootstrap_b == 0 {
            return Err(Error::param("bootstrap_b must be >= 1"));
        }
        if !(self.bootstrap_level > 0.0 && self.bootstrap_level < 1.0) {
            return Err(Error::param(format!(
                "bootstrap_level must be in (0, 1), got {}",
                self.bootstrap_level
            )));
        }
        let mut seen = self.estimators.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.estimators.len() {
            return Err(Error::param("estimators listed more than once"));
        }
        match &self.graph_source {
            GraphSource::Generator { n_vertices, degree } => degree.validate(*n_vertices)?,
            GraphSource::Rounds { min_count, .. } if *min_count == 0 => {
                return Err(Error::param("min_count must be >= 1"));
            }
            _ => {}
        }
        if self.regenerate_graph && !matches!(self.graph_source, GraphSource::Generator { .. }) {
            return Err(Error::param("regenerate_graph needs a generator graph source"));
        }
        if let OutcomeSource::Dilated { values } = &self.outcomes {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::param("dilated outcomes must be finite"));
            }
        }
        self.mixing_mode.rule(self.p)?;
        Ok(())
    }

    pub fn needs_observation(&self) -> bool {
        self.estimators.iter().any(|e| e.needs_observation())
    }
}

/// A fixed true graph with its outcome table.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: Graph,
    pub outcomes: OutcomeTable,
}

impl Scenario {
    pub fn new(graph: Graph, outcomes: OutcomeTable) -> Result<Self> {
        if graph.n_vertices() != outcomes.len() {
            return Err(Error::Dimension {
                expected: graph.n_vertices(),
                found: outcomes.len(),
            });
        }
        if graph.n_vertices() == 0 {
            return Err(Error::param("scenario graph has no vertices"));
        }
        Ok(Scenario { graph, outcomes })
    }

    /// Builds the true graph and outcomes described by `cfg`. A generated
    /// graph is drawn from a stream derived from the master seed.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let graph = match &cfg.graph_source {
            GraphSource::Generator { n_vertices, degree } => {
                let mut rng = ChaCha8Rng::seed_from_u64(auxiliary_seed(cfg.master_seed, GRAPH_STREAM, 0));
                generate_graph(*n_vertices, degree, &mut rng)?
            }
            GraphSource::EdgeList { path, n_vertices } => {
                let labels = n_vertices.map(LabelIndex::with_numeric).unwrap_or_default();
                let (mut graphs, labels) = load_edge_lists(vec![open(path)?], labels)?;
                if let Some(n) = n_vertices {
                    if labels.len() != *n {
                        return Err(Error::Validation(format!(
                            "{}: labels outside 0..{n} found",
                            path.display()
                        )));
                    }
                }
                graphs.remove(0)
            }
            GraphSource::Rounds { path, min_count } => {
                let data = load_rounds(open(path)?)?;
                build_true_graph_from_rounds(&data, *min_count)?
            }
        };
        let n = graph.n_vertices();
        let outcomes = match &cfg.outcomes {
            OutcomeSource::Dilated { values } => OutcomeTable::constant(n, *values)?,
            OutcomeSource::File { path } => load_outcome_table(open(path)?)?,
        };
        Scenario::new(graph, outcomes)
    }
}

pub(crate) fn generate_graph<R: rand::Rng + ?Sized>(
    n_vertices: usize,
    degree: &DegreeDistribution,
    rng: &mut R,
) -> Result<Graph> {
    let degrees = sample_degree_sequence(degree, n_vertices, rng)?;
    Ok(build_graph_configuration(&degrees, rng)?.graph)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads `y_c11,y_c10,y_c01,y_c00` rows.
pub fn load_outcome_table<R: Read>(source: R) -> Result<OutcomeTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != ["y_c11", "y_c10", "y_c01", "y_c00"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header y_c11,y_c10,y_c01,y_c00, got {}", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 fields, got {}", record.len()),
            });
        }
        let mut row = [0.0; 4];
        for (k, field) in record.iter().enumerate() {
            row[k] = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {field:?}"),
            })?;
        }
        rows.push(row);
    }
    OutcomeTable::new(rows)
}
