//! Estimating the edge-flip rates from three observed replicates: moment
//! statistics over all vertex pairs, then a fixed-point iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

const CLAMP_LO: f64 = 1e-12;
const CLAMP_HI: f64 = 1.0 - 1e-9;
/// Raw iterates further than this outside `[0, 1]` abort the fit.
const OVERSHOOT: f64 = 0.05;
const DEGENERATE: f64 = 1e-12;

/// Observed density, pairwise difference density and exactly-one-of-three density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl MomentStats {
    /// Population moments implied by `(alpha, beta, delta)`:
    /// `u1 = (1-δ)α + δ(1-β)`, `u2 = (1-δ)α(1-α) + δβ(1-β)`,
    /// `u3 = (1-δ)α(1-α)^2 + δβ^2(1-β)`.
    pub fn expected(alpha: f64, beta: f64, delta: f64) -> MomentStats {
        MomentStats {
            u1: (1.0 - delta) * alpha + delta * (1.0 - beta),
            u2: (1.0 - delta) * alpha * (1.0 - alpha) + delta * beta * (1.0 - beta),
            u3: (1.0 - delta) * alpha * (1.0 - alpha).powi(2) + delta * beta * beta * (1.0 - beta),
        }
    }
}

/// Moment statistics of three replicates. `u2` compares `a2` with `a1`;
/// `u3` uses all three.
pub fn moment_stats(a1: &Graph, a2: &Graph, a3: &Graph) -> Result<MomentStats> {
    let n = a1.n_vertices();
    for g in [a2, a3] {
        if g.n_vertices() != n {
            return Err(Error::Dimension {
                expected: n,
                found: g.n_vertices(),
            });
        }
    }
    if n < 2 {
        return Err(Error::param("moment statistics need at least 2 vertices"));
    }
    let pairs = a1.n_pairs() as f64;

    let e1: Vec<(usize, usize)> = a1.edges().collect();
    let e2: Vec<(usize, usize)> = a2.edges().collect();
    let shared = sorted_intersection(&e1, &e2);
    let sym_diff = e1.len() + e2.len() - 2 * shared;

    let mut all: Vec<(usize, usize)> = e1;
    all.extend(e2);
    all.extend(a3.edges());
    all.sort_unstable();
    let mut exactly_one = 0usize;
    let mut k = 0;
    while k < all.len() {
        let mut run = 1;
        while k + run < all.len() && all[k + run] == all[k] {
            run += 1;
        }
        if run == 1 {
            exactly_one += 1;
        }
        k += run;
    }

    Ok(MomentStats {
        u1: a1.n_edges() as f64 / pairs,
        u2: sym_diff as f64 / (2.0 * pairs),
        u3: exactly_one as f64 / (3.0 * pairs),
    })
}

fn sorted_intersection(a: &[(usize, usize)], b: &[(usize, usize)]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFitResult {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub delta_hat: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Fixed-point iteration settings. `alpha0: None` starts at [`default_alpha0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub alpha0: Option<f64>,
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            alpha0: None,
            eps: 1e-10,
            max_iter: 10_000,
        }
    }
}

fn checked(iteration: usize, quantity: &'static str, raw: f64) -> Result<f64> {
    if !(-OVERSHOOT..=1.0 + OVERSHOOT).contains(&raw) {
        return Err(Error::Divergence {
            iteration,
            quantity,
            value: raw,
        });
    }
    Ok(raw.clamp(CLAMP_LO, CLAMP_HI))
}

/// Solves for `(alpha, beta, delta)` from the moment statistics.
///
/// Each step sets `alpha0` to the current `alpha_hat` and updates
/// `beta_hat = (u2 - alpha0 + u1 alpha0) / (u1 - alpha0)`,
/// `delta_hat = (u1 - alpha0)^2 / (u1 - u2 - 2 u1 alpha0 + alpha0^2)`,
/// `alpha_hat = (u3 - delta_hat beta_hat^2 (1 - beta_hat)) / ((1 - delta_hat)(1 - alpha0)^2)`,
/// stopping once `|alpha_hat - alpha0| <= eps`. Hitting `max_iter` returns
/// the last iterate with `converged = false`.
pub fn fit_alpha_beta(m: &MomentStats, alpha0: f64, eps: f64, max_iter: usize) -> Result<NoiseFitResult> {
    if !(alpha0 > 0.0 && alpha0 < m.u1) {
        return Err(Error::param(format!(
            "alpha0 must lie in (0, u1 = {}), got {alpha0}",
            m.u1
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::param(format!("tolerance must be > 0, got {eps}")));
    }

    let (u1, u2, u3) = (m.u1, m.u2, m.u3);
    let mut alpha_hat = alpha0;
    let mut previous = alpha_hat + 10.0 * eps;
    let (mut beta_hat, mut delta_hat) = (f64::NAN, f64::NAN);
    let mut iterations = 0;
    while (alpha_hat - previous).abs() > eps {
        if iterations == max_iter {
            return Ok(NoiseFitResult {
                alpha_hat,
                beta_hat,
                delta_hat,
                iterations,
                converged: false,
            });
        }
        previous = alpha_hat;
        let gap = u1 - previous;
        if gap.abs() < DEGENERATE {
            return Err(Error::Degenerate(format!("u1 - alpha0 = {gap:e} at iteration {iterations}")));
        }
        beta_hat = checked(iterations, "beta", (u2 - previous + u1 * previous) / gap)?;
        let denom = u1 - u2 - 2.0 * u1 * previous + previous * previous;
        if denom.abs() < DEGENERATE {
            return Err(Error::Degenerate(format!("delta denominator {denom:e} at iteration {iterations}")));
        }
        delta_hat = checked(iterations, "delta", gap * gap / denom)?;
        let raw_alpha = (u3 - delta_hat * beta_hat * beta_hat * (1.0 - beta_hat))
            / ((1.0 - delta_hat) * (1.0 - previous).powi(2));
        alpha_hat = checked(iterations, "alpha", raw_alpha)?;
        iterations += 1;
    }

    if !(alpha_hat + beta_hat < 1.0) {
        return Err(Error::Degenerate(format!(
            "alpha + beta = {} is not below 1",
            alpha_hat + beta_hat
        )));
    }
    Ok(NoiseFitResult {
        alpha_hat,
        beta_hat,
        delta_hat,
        iterations,
        converged: true,
    })
}

/// Starting point `min(u1 / 10, u2 / (1 - u1))`. Above `u2 / (1 - u1)` the
/// first `beta_hat` iterate is negative, which can abort a fit whose true
/// rates are well inside the domain. Falls back to `u1 / 10` when `u2 = 0`.
pub fn default_alpha0(m: &MomentStats) -> f64 {
    let tenth = m.u1 / 10.0;
    let cap = m.u2 / (1.0 - m.u1);
    if cap > 0.0 {
        tenth.min(cap)
    } else {
        tenth
    }
}

/// Fit with [`FitOptions`], defaulting `alpha0` to [`default_alpha0`].
pub fn fit_with_options(m: &MomentStats, opts: &FitOptions) -> Result<NoiseFitResult> {
    let alpha0 = opts.alpha0.unwrap_or_else(|| default_alpha0(m));
    fit_alpha_beta(m, alpha0, opts.eps, opts.max_iter)
}

/// Moment statistics and fit in one call.
pub fn fit_replicates(a1: &Graph, a2: &Graph, a3: &Graph, opts: &FitOptions) -> Result<(MomentStats, NoiseFitResult)> {
    let m = moment_stats(a1, a2, a3)?;
    Ok((m, fit_with_options(&m, opts)?))
}
