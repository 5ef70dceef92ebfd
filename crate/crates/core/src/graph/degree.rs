use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, integrate};

/// Degree law of the true network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeDistribution {
    /// Poisson conditioned on being at least one, parameterised by its own mean.
    ZeroTruncatedPoisson { mean: f64 },
    /// Density proportional to `exp(-rate x) x^-(shape + 1)` on `[lower, n - 1]`.
    ParetoExpCutoff { rate: f64, shape: f64, lower: f64 },
}

/// Poisson rate `mu` whose zero-truncated law has mean `mean`,
/// i.e. the root of `mu / (1 - exp(-mu)) = mean`.
///
/// Means at or below one have no root; the limit `mu -> 0` is returned.
pub fn ztp_poisson_rate(mean: f64) -> f64 {
    if mean <= 1.0 {
        return 0.0;
    }
    let f = |mu: f64| mu / (-(-mu).exp_m1()) - mean;
    // mu / (1 - e^-mu) lies in (mu, mu + 1) for mu > 0.
    bisect(f, (mean - 1.0).max(0.0), mean, 1e-12)
}

impl DegreeDistribution {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            DegreeDistribution::ZeroTruncatedPoisson { mean } => {
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(Error::param(format!("zero-truncated Poisson mean must be > 0, got {mean}")));
                }
            }
            DegreeDistribution::ParetoExpCutoff { rate, shape, lower } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::param(format!("cutoff rate must be > 0, got {rate}")));
                }
                if !(shape > 0.0 && shape.is_finite()) {
                    return Err(Error::param(format!("Pareto shape must be > 0, got {shape}")));
                }
                let upper = n as f64 - 1.0;
                if !(lower >= 1.0 && lower < upper) {
                    return Err(Error::param(format!(
                        "Pareto lower bound must satisfy 1 <= lower < n - 1 = {upper}, got {lower}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Mean degree of the continuous law on a graph of `n` vertices.
    ///
    /// For the Pareto variant this is the ratio of the first to the zeroth
    /// moment of the unnormalised density, by quadrature.
    pub fn mean(&self, n: usize) -> Result<f64> {
        self.validate(n)?;
        Ok(match *self {
            DegreeDistribution::ZeroTruncatedPoisson { mean } => mean.max(1.0),
            DegreeDistribution::ParetoExpCutoff { rate, shape, lower } => {
                let upper = n as f64 - 1.0;
                let density = |x: f64| (-rate * x).exp() * x.powf(-(shape + 1.0));
                let z = integrate(&density, lower, upper, 1e-14);
                let m1 = integrate(&|x: f64| x * density(x), lower, upper, 1e-14);
                m1 / z
            }
        })
    }

    /// Normalisation constant `C(shape, lower, rate)` of the Pareto law with
    /// exponential cutoff, in closed form via integration by parts:
    /// `(rate * mean + shape) / (lower^-shape e^{-rate lower} - (n-1)^-shape e^{-rate (n-1)})`.
    pub fn normalization_constant(&self, n: usize) -> Result<f64> {
        match *self {
            DegreeDistribution::ParetoExpCutoff { rate, shape, lower } => {
                let mean = self.mean(n)?;
                let upper = n as f64 - 1.0;
                let boundary = lower.powf(-shape) * (-rate * lower).exp()
                    - upper.powf(-shape) * (-rate * upper).exp();
                Ok((rate * mean + shape) / boundary)
            }
            DegreeDistribution::ZeroTruncatedPoisson { .. } => Err(Error::param(
                "normalization constant is defined for the Pareto law only",
            )),
        }
    }
}

/// Draws `n` i.i.d. degrees, each in `[1, n - 1]`.
pub fn sample_degree_sequence<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::param(format!("need at least 2 vertices, got {n}")));
    }
    dist.validate(n)?;
    let max_degree = n - 1;
    match *dist {
        DegreeDistribution::ZeroTruncatedPoisson { mean } => {
            let mu = ztp_poisson_rate(mean);
            Ok((0..n).map(|_| sample_ztp(mu, max_degree, rng)).collect())
        }
        DegreeDistribution::ParetoExpCutoff { rate, shape, lower } => {
            let upper = max_degree as f64;
            let floor = (lower.ceil() as usize).max(1);
            let a = lower.powf(-shape);
            let b = upper.powf(-shape);
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                // Inverse CDF of the pure Pareto truncated to [lower, upper].
                let u: f64 = rng.random();
                let x = (a - u * (a - b)).powf(-1.0 / shape);
                let accept = (-rate * (x - lower)).exp();
                if rng.random::<f64>() < accept {
                    let d = (x.round() as usize).clamp(floor, max_degree);
                    out.push(d);
                }
            }
            Ok(out)
        }
    }
}

fn sample_ztp<R: Rng + ?Sized>(mu: f64, max_degree: usize, rng: &mut R) -> usize {
    if mu < 1e-9 {
        return 1;
    }
    if mu < 1.0 {
        // Rejecting zeros is slow here; invert the truncated CDF directly.
        loop {
            let u: f64 = rng.random::<f64>() * -(-mu).exp_m1();
            let mut k = 1usize;
            let mut pmf = mu * (-mu).exp();
            let mut cdf = pmf;
            while cdf < u && k < max_degree + 64 {
                k += 1;
                pmf *= mu / k as f64;
                cdf += pmf;
            }
            if k <= max_degree {
                return k;
            }
        }
    }
    let poisson = Poisson::new(mu).expect("rate is positive and finite");
    loop {
        let k = poisson.sample(rng) as usize;
        if (1..=max_degree).contains(&k) {
            return k;
        }
    }
}
