//! Horvitz-Thompson / Aronow-Samii estimators on the true and an observed
//! graph, and the confusion-corrected method-of-moments estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exposure::{
    check_probability, confusion_matrix, exposure_levels, exposure_probabilities, invert_confusion,
    ExposureLevel, Treatment,
};
use crate::graph::Graph;
use crate::noise::NoiseParams;
use crate::numeric::pairwise_sum4;

/// Potential outcomes `y_i(c11), y_i(c10), y_i(c01), y_i(c00)`, one row per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTable {
    rows: Vec<[f64; 4]>,
    y_max: f64,
}

impl OutcomeTable {
    pub fn new(rows: Vec<[f64; 4]>) -> Result<Self> {
        let mut y_max: f64 = 0.0;
        for (i, row) in rows.iter().enumerate() {
            for v in row {
                if !v.is_finite() {
                    return Err(Error::param(format!("non-finite potential outcome at vertex {i}")));
                }
                y_max = y_max.max(v.abs());
            }
        }
        Ok(OutcomeTable { rows, y_max })
    }

    /// Every vertex shares the same four outcome values.
    pub fn constant(n: usize, values: [f64; 4]) -> Result<Self> {
        Self::new(vec![values; n])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[[f64; 4]] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64; 4] {
        &self.rows[i]
    }

    /// Bound on `|y_i(c_k)|` over the table.
    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// `y_i(c_k) - y_i(c_l)`.
    pub fn tau(&self, i: usize, k: ExposureLevel, l: ExposureLevel) -> f64 {
        self.rows[i][k.index()] - self.rows[i][l.index()]
    }

    /// Population means of each column: the estimands.
    pub fn truth(&self) -> LevelMeans {
        let sums = pairwise_sum4(&self.rows);
        let n = self.rows.len() as f64;
        LevelMeans(sums.map(|s| s / n))
    }
}

/// Outcome and true exposure of every vertex under one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedOutcomes {
    pub outcome: Vec<f64>,
    pub level: Vec<ExposureLevel>,
}

/// One estimate (or true value) per exposure level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMeans(pub [f64; 4]);

impl LevelMeans {
    pub fn get(&self, level: ExposureLevel) -> f64 {
        self.0[level.index()]
    }
}

/// `m(c_k) - m(c_l)`.
pub fn contrast(m: &LevelMeans, k: ExposureLevel, l: ExposureLevel) -> f64 {
    m.get(k) - m.get(l)
}

/// Which vertices get the confusion correction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MixingRule {
    /// Correct vertices with `C1 <= d_hat < C2`, where `1/p = a 10^b`,
    /// `a` in `[1/sqrt(10), sqrt(10))`, `C1 = 10^b / sqrt(10)`, `C2 = sqrt(10) 10^b`.
    OrderOfMagnitude { c1: f64, c2: f64 },
    /// Correct every vertex with `d_hat >= 1`.
    #[default]
    SparseFallback,
}

impl MixingRule {
    pub fn order_of_magnitude(p: f64) -> Result<Self> {
        check_probability(p)?;
        let b = ((1.0 / p).log10() + 0.5).floor();
        let sqrt10 = 10f64.sqrt();
        let base = 10f64.powf(b);
        Ok(MixingRule::OrderOfMagnitude {
            c1: base / sqrt10,
            c2: sqrt10 * base,
        })
    }

    pub fn corrects(&self, d_hat: f64) -> bool {
        match *self {
            MixingRule::OrderOfMagnitude { c1, c2 } => c1 <= d_hat && d_hat < c2,
            MixingRule::SparseFallback => d_hat >= 1.0,
        }
    }
}

/// Realises outcomes at each vertex's true exposure level.
pub fn realize_outcomes(g_true: &Graph, t: &Treatment, y: &OutcomeTable) -> Result<RealizedOutcomes> {
    let n = g_true.n_vertices();
    for found in [t.len(), y.len()] {
        if found != n {
            return Err(Error::Dimension { expected: n, found });
        }
    }
    let level = exposure_levels(t, g_true);
    let outcome = level
        .iter()
        .enumerate()
        .map(|(i, l)| y.row(i)[l.index()])
        .collect();
    Ok(RealizedOutcomes { outcome, level })
}

fn check_inputs(g: &Graph, t: &Treatment, r: &RealizedOutcomes, p: f64) -> Result<()> {
    check_probability(p)?;
    let n = g.n_vertices();
    for found in [t.len(), r.outcome.len(), r.level.len()] {
        if found != n {
            return Err(Error::Dimension { expected: n, found });
        }
    }
    if n == 0 {
        return Err(Error::param("graph has no vertices"));
    }
    Ok(())
}

/// Per-vertex inverse-probability terms with levels and probabilities taken
/// from `g`. Vertices whose observed level has zero probability contribute 0.
fn ipw_terms(g: &Graph, t: &Treatment, r: &RealizedOutcomes, p: f64, strict: bool) -> Result<Vec<[f64; 4]>> {
    let levels = exposure_levels(t, g);
    let mut terms = Vec::with_capacity(levels.len());
    for (i, level) in levels.into_iter().enumerate() {
        let probs = exposure_probabilities(g.degree(i) as f64, p)?;
        let prob = probs.get(level);
        let mut row = [0.0; 4];
        if prob > 0.0 {
            row[level.index()] = r.outcome[i] / prob;
        } else if strict {
            return Err(Error::Contract(format!(
                "vertex {i} attained {level} with zero exposure probability"
            )));
        }
        terms.push(row);
    }
    Ok(terms)
}

fn average(terms: &[[f64; 4]]) -> LevelMeans {
    let n = terms.len() as f64;
    LevelMeans(pairwise_sum4(terms).map(|s| s / n))
}

/// Horvitz-Thompson estimate of each level mean, classifying exposure on `g`.
///
/// With `g` the true graph this is unbiased. Fails if a vertex attains a
/// level of zero probability.
pub fn ht_estimate(g: &Graph, t: &Treatment, r: &RealizedOutcomes, p: f64) -> Result<LevelMeans> {
    check_inputs(g, t, r, p)?;
    Ok(average(&ipw_terms(g, t, r, p, true)?))
}

/// Aronow-Samii plug-in on an observed graph: levels and probabilities from
/// `g_obs`, outcomes from the true exposure.
pub fn as_noisy_estimate(g_obs: &Graph, t: &Treatment, r: &RealizedOutcomes, p: f64) -> Result<LevelMeans> {
    check_inputs(g_obs, t, r, p)?;
    Ok(average(&ipw_terms(g_obs, t, r, p, false)?))
}

/// Corrected degree `(d_obs - (n - 1) alpha) / (1 - alpha - beta)`; may be negative.
pub fn degree_estimate(d_obs: usize, alpha_hat: f64, beta_hat: f64, n_vertices: usize) -> Result<f64> {
    if !(alpha_hat + beta_hat < 1.0) {
        return Err(Error::param(format!(
            "alpha + beta must be < 1, got {}",
            alpha_hat + beta_hat
        )));
    }
    let n1 = n_vertices.saturating_sub(1) as f64;
    Ok((d_obs as f64 - n1 * alpha_hat) / (1.0 - alpha_hat - beta_hat))
}

/// `P^{-1}(d_hat, alpha, beta) * y_tilde` for one vertex.
pub fn mme_node(
    y_tilde: &[f64; 4],
    d_hat: f64,
    alpha_hat: f64,
    beta_hat: f64,
    p: f64,
    n_vertices: usize,
) -> Result<[f64; 4]> {
    let noise = NoiseParams { alpha: alpha_hat, beta: beta_hat };
    let conf = confusion_matrix(d_hat, n_vertices, p, &noise)?;
    Ok(invert_confusion(&conf)?.apply(y_tilde))
}

/// How a vertex entered the corrected estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRoute {
    Corrected,
    /// Outside the mixing rule's correction range.
    PlugIn,
    /// Inside the range but the confusion matrix was singular.
    SingularFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RouteCounts {
    pub corrected: usize,
    pub plug_in: usize,
    pub singular_fallback: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmeEstimate {
    pub means: LevelMeans,
    pub routes: RouteCounts,
}

/// Per-vertex terms of the corrected estimator, with the route each took.
pub fn mme_terms(
    g_obs: &Graph,
    t: &Treatment,
    r: &RealizedOutcomes,
    p: f64,
    noise_hat: &NoiseParams,
    rule: &MixingRule,
) -> Result<Vec<(NodeRoute, [f64; 4])>> {
    check_inputs(g_obs, t, r, p)?;
    noise_hat.validate()?;
    let n = g_obs.n_vertices();
    let max_degree = (n - 1) as f64;
    let plug_in = ipw_terms(g_obs, t, r, p, false)?;
    let levels = exposure_levels(t, g_obs);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d_hat = degree_estimate(g_obs.degree(i), noise_hat.alpha, noise_hat.beta, n)?.clamp(0.0, max_degree);
        if !rule.corrects(d_hat) {
            out.push((NodeRoute::PlugIn, plug_in[i]));
            continue;
        }
        let mut y_tilde = [0.0; 4];
        y_tilde[levels[i].index()] = r.outcome[i];
        match mme_node(&y_tilde, d_hat, noise_hat.alpha, noise_hat.beta, p, n) {
            Ok(v) => out.push((NodeRoute::Corrected, v)),
            Err(Error::Singular { .. }) => out.push((NodeRoute::SingularFallback, plug_in[i])),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Method-of-moments estimate of each level mean on an observed graph.
pub fn mme_estimate(
    g_obs: &Graph,
    t: &Treatment,
    r: &RealizedOutcomes,
    p: f64,
    noise_hat: &NoiseParams,
    rule: &MixingRule,
) -> Result<MmeEstimate> {
    let terms = mme_terms(g_obs, t, r, p, noise_hat, rule)?;
    let mut routes = RouteCounts::default();
    for (route, _) in &terms {
        match route {
            NodeRoute::Corrected => routes.corrected += 1,
            NodeRoute::PlugIn => routes.plug_in += 1,
            NodeRoute::SingularFallback => routes.singular_fallback += 1,
        }
    }
    let values: Vec<[f64; 4]> = terms.into_iter().map(|(_, v)| v).collect();
    Ok(MmeEstimate {
        means: average(&values),
        routes,
    })
}
