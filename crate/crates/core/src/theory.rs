//! Closed-form predictions used to check simulation output: plug-in bias
//! under edge noise, moments of functions of the observed degree, and the
//! regularity-condition diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::OutcomeTable;
use crate::exposure::{check_probability, exposure_probabilities, ExposureLevel};
use crate::graph::Graph;
use crate::noise::NoiseParams;
use crate::numeric::{pairwise_sum4, pow_one_minus};

/// Predicted bias of the plug-in estimator at each level. The c11 and c01
/// components drop an asymptotically vanishing remainder; c10 and c00 are exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasPrediction {
    pub bias: [f64; 4],
    pub has_remainder: [bool; 4],
}

impl BiasPrediction {
    pub fn get(&self, level: ExposureLevel) -> f64 {
        self.bias[level.index()]
    }
}

/// Bias coefficients of one vertex: `[c11, c10, c01, c00]` multipliers of
/// `tau(c11, c10)`, `tau(c11, c10)`, `tau(c01, c00)`, `tau(c01, c00)`.
///
/// The c11/c01 coefficient is
/// `-(1-p)^d [1 - (1-αp)^{n-1-d}] / [1 - (1-αp)^{n-1-d} (1-(1-β)p)^d]`
/// and the c10/c00 coefficient is `1 - (1-βp)^d`.
pub fn bias_coefficients(d: f64, n_vertices: usize, p: f64, noise: &NoiseParams) -> (f64, f64) {
    let outside = n_vertices as f64 - 1.0 - d;
    let a = pow_one_minus(noise.alpha * p, outside);
    let s = pow_one_minus((1.0 - noise.beta) * p, d);
    let numer = pow_one_minus(p, d) * (1.0 - a);
    let denom = 1.0 - a * s;
    let exposed = if numer == 0.0 { 0.0 } else { -numer / denom };
    let isolated = 1.0 - pow_one_minus(noise.beta * p, d);
    (exposed, isolated)
}

/// Per-vertex bias terms `[c11, c10, c01, c00]` for a vertex of true degree `d`.
pub fn bias_node_terms(d: f64, n_vertices: usize, p: f64, noise: &NoiseParams, y: &[f64; 4]) -> [f64; 4] {
    let (exposed, isolated) = bias_coefficients(d, n_vertices, p, noise);
    let tau_direct = y[0] - y[1];
    let tau_indirect = y[2] - y[3];
    [
        exposed * tau_direct,
        isolated * tau_direct,
        exposed * tau_indirect,
        isolated * tau_indirect,
    ]
}

/// Averages [`bias_node_terms`] over the vertices.
pub fn plug_in_bias(
    degrees: &[usize],
    y: &OutcomeTable,
    noise: &NoiseParams,
    p: f64,
    n_vertices: usize,
) -> Result<BiasPrediction> {
    check_probability(p)?;
    noise.validate()?;
    if degrees.len() != y.len() {
        return Err(Error::Dimension {
            expected: degrees.len(),
            found: y.len(),
        });
    }
    if degrees.is_empty() {
        return Err(Error::param("no vertices"));
    }
    let terms: Vec<[f64; 4]> = degrees
        .iter()
        .zip(y.rows())
        .map(|(&d, row)| bias_node_terms(d as f64, n_vertices, p, noise, row))
        .collect();
    let n = degrees.len() as f64;
    Ok(BiasPrediction {
        bias: pairwise_sum4(&terms).map(|s| s / n),
        has_remainder: [true, false, true, false],
    })
}

/// Moments of `(1-p)^{d_obs}` where the observed degree is
/// `Binomial(n-1-d, α) + Binomial(d, 1-β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedDegreeMoments {
    /// `E[(1-p)^{d_obs}]`
    pub mean_pow: f64,
    /// `E[(1-p)^{-d_obs}]`
    pub mean_inv_pow: f64,
    /// `Var[(1-p)^{d_obs}]`
    pub var_pow: f64,
}

pub fn observed_degree_moments(d: usize, n_vertices: usize, p: f64, noise: &NoiseParams) -> Result<ObservedDegreeMoments> {
    check_probability(p)?;
    noise.validate()?;
    if d + 1 > n_vertices {
        return Err(Error::param(format!("degree {d} too large for {n_vertices} vertices")));
    }
    let outside = (n_vertices - 1 - d) as f64;
    let d = d as f64;
    let (alpha, keep) = (noise.alpha, 1.0 - noise.beta);
    let mean_pow = pow_one_minus(alpha * p, outside) * pow_one_minus(keep * p, d);
    let ratio = p / (1.0 - p);
    let mean_inv_pow = (1.0 + alpha * ratio).powf(outside) * (1.0 + keep * ratio).powf(d);
    let second = pow_one_minus(alpha * p * (2.0 - p), outside) * pow_one_minus(keep * p * (2.0 - p), d);
    Ok(ObservedDegreeMoments {
        mean_pow,
        mean_inv_pow,
        var_pow: (second - mean_pow * mean_pow).max(0.0),
    })
}

/// Finite-sample proxies for the two consistency conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionDiagnostics {
    /// `sum_i 1/p_i(c_k) / n^2` per level, skipping vertices where `p_i(c_k) = 0`.
    pub inverse_probability: [f64; 4],
    /// Vertices with degree 0, which have no c11/c01 probability.
    pub isolated_vertices: usize,
    /// Ordered pairs `i != j` sharing an edge or a common neighbour.
    pub dependent_pairs: usize,
    /// `dependent_pairs / n^2`.
    pub dependency: f64,
}

pub fn condition_diagnostics(g: &Graph, p: f64) -> Result<ConditionDiagnostics> {
    check_probability(p)?;
    let n = g.n_vertices();
    if n == 0 {
        return Err(Error::param("graph has no vertices"));
    }
    let n2 = (n as f64) * (n as f64);
    let mut isolated = 0;
    let mut inverse: Vec<[f64; 4]> = Vec::with_capacity(n);
    for i in 0..n {
        let probs = exposure_probabilities(g.degree(i) as f64, p)?;
        if g.degree(i) == 0 {
            isolated += 1;
        }
        inverse.push(probs.0.map(|q| if q > 0.0 { 1.0 / q } else { 0.0 }));
    }

    let mut stamp = vec![usize::MAX; n];
    let mut dependent = 0;
    for i in 0..n {
        stamp[i] = i;
        for &j in g.neighbors(i) {
            if stamp[j] != i {
                stamp[j] = i;
                dependent += 1;
            }
            for &k in g.neighbors(j) {
                if stamp[k] != i {
                    stamp[k] = i;
                    dependent += 1;
                }
            }
        }
    }

    Ok(ConditionDiagnostics {
        inverse_probability: pairwise_sum4(&inverse).map(|s| s / n2),
        isolated_vertices: isolated,
        dependent_pairs: dependent,
        dependency: dependent as f64 / n2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposure::ExposureLevel::*;

    #[test]
    fn noiseless_bias_is_zero() {
        let y = OutcomeTable::constant(3, [10.0, 7.0, 5.0, 1.0]).unwrap();
        let b = plug_in_bias(&[1, 2, 2], &y, &NoiseParams::NONE, 0.1, 3).unwrap();
        assert_eq!(b.bias, [0.0; 4]);
    }

    #[test]
    fn homogeneous_c10_value() {
        let y = OutcomeTable::constant(4, [10.0, 7.0, 5.0, 1.0]).unwrap();
        let noise = NoiseParams { alpha: 0.01, beta: 0.1 };
        let b = plug_in_bias(&[5; 4], &y, &noise, 0.1, 200).unwrap();
        assert!((b.get(C10) - 3.0 * (1.0 - 0.950_990_049_9)).abs() < 1e-12, "{}", b.get(C10));
        assert!((b.get(C10) - 0.147_029_850_3).abs() < 1e-9);
        assert!(b.get(C11) < 0.0 && b.get(C01) < 0.0);
    }

    #[test]
    fn no_missed_edges_means_no_isolated_bias() {
        let y = OutcomeTable::constant(2, [10.0, 7.0, 5.0, 1.0]).unwrap();
        let noise = NoiseParams { alpha: 0.2, beta: 0.0 };
        let b = plug_in_bias(&[3, 8], &y, &noise, 0.1, 50).unwrap();
        assert_eq!(b.get(C10), 0.0);
        assert_eq!(b.get(C00), 0.0);
    }

    #[test]
    fn degree_moments_noiseless() {
        let m = observed_degree_moments(6, 50, 0.1, &NoiseParams::NONE).unwrap();
        assert!((m.mean_pow - 0.9f64.powi(6)).abs() < 1e-15);
        assert!((m.mean_inv_pow - 0.9f64.powi(-6)).abs() < 1e-12);
        assert!(m.var_pow.abs() < 1e-15);
    }

    #[test]
    fn empty_graph_diagnostics() {
        let n = 20;
        let d = condition_diagnostics(&Graph::empty(n), 0.1).unwrap();
        let expect = 1.0 / (0.9 * n as f64);
        assert!((d.inverse_probability[C00.index()] - expect).abs() < 1e-15);
        assert_eq!(d.isolated_vertices, n);
        assert_eq!(d.dependent_pairs, 0);
    }

    #[test]
    fn complete_graph_is_fully_dependent() {
        let n = 12;
        let d = condition_diagnostics(&Graph::complete(n), 0.1).unwrap();
        assert_eq!(d.dependent_pairs, n * (n - 1));
        assert!((d.dependency - (n - 1) as f64 / n as f64).abs() < 1e-15);
    }

    #[test]
    fn path_dependency_counts_distance_two() {
        // 0-1-2-3: dependent pairs {01,12,23,02,13}, each ordered both ways.
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(condition_diagnostics(&g, 0.5).unwrap().dependent_pairs, 10);
    }
}
