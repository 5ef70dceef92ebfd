//! Independent edge-flip noise with constant Type-I / Type-II rates.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Above this false-edge rate the per-pair path is used.
const SPARSE_ALPHA_LIMIT: f64 = 0.1;

/// Edge flip rates: `alpha` turns a non-edge on, `beta` drops a true edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub alpha: f64,
    pub beta: f64,
}

impl NoiseParams {
    pub const NONE: NoiseParams = NoiseParams { alpha: 0.0, beta: 0.0 };

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let params = NoiseParams { alpha, beta };
        params.validate()?;
        Ok(params)
    }

    /// Rates usable for simulation: each in `[0, 1]`.
    fn validate_rates(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// Rates usable for estimation: `alpha, beta < 1` and `alpha + beta < 1`.
    pub fn validate(&self) -> Result<()> {
        self.validate_rates()?;
        if self.alpha >= 1.0 || self.beta >= 1.0 || self.alpha + self.beta >= 1.0 {
            return Err(Error::param(format!(
                "need alpha, beta < 1 and alpha + beta < 1, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0
    }
}

/// One observation of `g` under the noise model.
///
/// True edges are visited in canonical order and kept with probability
/// `1 - beta`. False edges come either from a per-pair scan of non-edges in
/// canonical order, or, when `alpha` is small, from a `Binomial(#non-edges,
/// alpha)` count of distinct uniformly chosen non-edges; both give the same
/// law. The boundary rates `alpha = 1` / `beta = 1` are accepted here even
/// though they are not estimable.
pub fn perturb<R: Rng + ?Sized>(g: &Graph, noise: &NoiseParams, rng: &mut R) -> Result<Graph> {
    noise.validate_rates()?;
    let n = g.n_vertices();
    let keep = 1.0 - noise.beta;
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(g.n_edges());
    for edge in g.edges() {
        if keep >= 1.0 || (keep > 0.0 && rng.random::<f64>() < keep) {
            pairs.push(edge);
        }
    }

    let non_edges = g.n_pairs() - g.n_edges();
    if noise.alpha > 0.0 && non_edges > 0 {
        if noise.alpha <= SPARSE_ALPHA_LIMIT {
            let count = Binomial::new(non_edges as u64, noise.alpha)
                .expect("alpha is a probability")
                .sample(rng) as usize;
            let mut chosen: HashSet<(usize, usize)> = HashSet::with_capacity(count);
            while chosen.len() < count {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                if i == j {
                    continue;
                }
                let key = (i.min(j), i.max(j));
                if !g.has_edge(key.0, key.1) {
                    chosen.insert(key);
                }
            }
            pairs.extend(chosen);
        } else {
            for i in 0..n {
                let row = g.neighbors(i);
                let mut cursor = row.partition_point(|&j| j <= i);
                for j in (i + 1)..n {
                    if cursor < row.len() && row[cursor] == j {
                        cursor += 1;
                        continue;
                    }
                    if noise.alpha >= 1.0 || rng.random::<f64>() < noise.alpha {
                        pairs.push((i, j));
                    }
                }
            }
        }
    }
    pairs.sort_unstable();
    Ok(Graph::from_canonical_pairs(n, &pairs))
}

/// `k` conditionally independent observations of `g`, drawn in order from `rng`.
pub fn replicate<R: Rng + ?Sized>(
    g: &Graph,
    noise: &NoiseParams,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Graph>> {
    if k == 0 {
        return Err(Error::param("need at least one replicate"));
    }
    (0..k).map(|_| perturb(g, noise, rng)).collect()
}
