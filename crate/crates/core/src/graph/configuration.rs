use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};

/// Stub matchings tried before settling for erasure.
pub const DEFAULT_SIMPLE_ATTEMPTS: usize = 64;

/// Output of the erased configuration model, with the bookkeeping needed to
/// see how far the realised degrees drifted from the request.
#[derive(Debug, Clone)]
pub struct ConfigurationGraph {
    pub graph: Graph,
    /// Degrees after parity repair; realised degrees never exceed these.
    pub requested: Vec<usize>,
    /// Node whose degree was bumped by one to make the stub total even.
    pub parity_repaired: Option<usize>,
    pub erased_self_loops: usize,
    pub erased_multi_edges: usize,
    /// Number of stub matchings drawn (the last one is the one returned).
    pub attempts: usize,
}

impl ConfigurationGraph {
    /// Stubs lost to erasure.
    pub fn erased_stubs(&self) -> usize {
        2 * (self.erased_self_loops + self.erased_multi_edges)
    }
}

pub fn build_graph_configuration<R: Rng + ?Sized>(
    degrees: &[usize],
    rng: &mut R,
) -> Result<ConfigurationGraph> {
    build_graph_configuration_with(degrees, DEFAULT_SIMPLE_ATTEMPTS, rng)
}

/// Random stub matching on `degrees`. Up to `max_attempts` matchings are drawn
/// and the first simple one is kept; otherwise the last matching is erased
/// (self-loops and repeated pairs dropped).
pub fn build_graph_configuration_with<R: Rng + ?Sized>(
    degrees: &[usize],
    max_attempts: usize,
    rng: &mut R,
) -> Result<ConfigurationGraph> {
    let n = degrees.len();
    if n == 0 {
        return Err(Error::param("degree sequence is empty"));
    }
    if let Some((i, &d)) = degrees.iter().enumerate().find(|(_, &d)| d == 0 || d > n - 1) {
        return Err(Error::param(format!(
            "degree {d} of node {i} outside [1, {}]",
            n - 1
        )));
    }

    let mut requested = degrees.to_vec();
    let mut parity_repaired = None;
    if requested.iter().sum::<usize>() % 2 == 1 {
        let eligible: Vec<usize> = (0..n).filter(|&i| requested[i] < n - 1).collect();
        // An odd total implies some node is below n - 1.
        let node = eligible[rng.random_range(0..eligible.len())];
        requested[node] += 1;
        parity_repaired = Some(node);
    }

    let mut stubs: Vec<usize> = requested
        .iter()
        .enumerate()
        .flat_map(|(i, &d)| std::iter::repeat_n(i, d))
        .collect();

    let attempts_allowed = max_attempts.max(1);
    let mut attempt = 0;
    loop {
        attempt += 1;
        stubs.shuffle(rng);
        let mut seen = HashSet::with_capacity(stubs.len() / 2);
        let mut pairs = Vec::with_capacity(stubs.len() / 2);
        let (mut loops, mut multi) = (0, 0);
        for chunk in stubs.chunks_exact(2) {
            let (a, b) = (chunk[0], chunk[1]);
            if a == b {
                loops += 1;
                continue;
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key) {
                pairs.push(key);
            } else {
                multi += 1;
            }
        }
        if (loops == 0 && multi == 0) || attempt >= attempts_allowed {
            pairs.sort_unstable();
            return Ok(ConfigurationGraph {
                graph: Graph::from_canonical_pairs(n, &pairs),
                requested,
                parity_repaired,
                erased_self_loops: loops,
                erased_multi_edges: multi,
                attempts: attempt,
            });
        }
    }
}
