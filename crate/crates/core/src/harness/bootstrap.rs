use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{mean, sample_sd};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Mean,
    /// Sample standard deviation (`n - 1` denominator).
    Sd,
}

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

fn check(samples: &[f64], b: usize, level: f64) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::param("bootstrap needs at least one sample"));
    }
    if b == 0 {
        return Err(Error::param("bootstrap needs at least one resample"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param(format!("level must be in (0, 1), got {level}")));
    }
    Ok(())
}

fn interval(mut stats: Vec<f64>, level: f64) -> (f64, f64) {
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (percentile(&stats, tail), percentile(&stats, 1.0 - tail))
}

/// Mean and sample SD of one resample with replacement. `shifted` holds the
/// samples minus `centre`, which keeps the one-pass variance well conditioned.
fn resample_moments<R: Rng + ?Sized>(shifted: &[f64], centre: f64, rng: &mut R) -> (f64, f64) {
    let n = shifted.len();
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = shifted[draw_index(n, rng)];
        s1 += x;
        s2 += x * x;
    }
    let nf = n as f64;
    let sd = if n > 1 {
        ((s2 - s1 * s1 / nf).max(0.0) / (nf - 1.0)).sqrt()
    } else {
        0.0
    };
    (centre + s1 / nf, sd)
}

fn centred(samples: &[f64]) -> (Vec<f64>, f64) {
    let c = mean(samples);
    (samples.iter().map(|x| x - c).collect(), c)
}

fn draw_index<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    if n <= u32::MAX as usize {
        rng.random_range(0..n as u32) as usize
    } else {
        rng.random_range(0..n)
    }
}

/// Percentile interval of `statistic` over `b` resamples with replacement.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    samples: &[f64],
    b: usize,
    level: f64,
    statistic: Statistic,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check(samples, b, level)?;
    let (shifted, c) = centred(samples);
    let stats = (0..b)
        .map(|_| {
            let (m, sd) = resample_moments(&shifted, c, rng);
            match statistic {
                Statistic::Mean => m,
                Statistic::Sd => sd,
            }
        })
        .collect();
    Ok(interval(stats, level))
}

/// Percentile intervals for the mean and the SD from the same `b` resamples.
pub fn bootstrap_mean_sd<R: Rng + ?Sized>(
    samples: &[f64],
    b: usize,
    level: f64,
    rng: &mut R,
) -> Result<((f64, f64), (f64, f64))> {
    check(samples, b, level)?;
    let (shifted, c) = centred(samples);
    let (means, sds): (Vec<f64>, Vec<f64>) = (0..b).map(|_| resample_moments(&shifted, c, rng)).unzip();
    let mean_ci = widen(interval(means, level), mean(samples));
    let sd_ci = widen(interval(sds, level), sample_sd(samples));
    Ok((mean_ci, sd_ci))
}

/// Percentile intervals need not contain the point estimate (small or
/// skewed samples); the reported interval is stretched to include it.
fn widen((lo, hi): (f64, f64), point: f64) -> (f64, f64) {
    (lo.min(point), hi.max(point))
}
