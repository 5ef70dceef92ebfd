//! Small numerical helpers shared across modules.

/// Pairwise (cascade) summation with a fixed split order.
///
/// The recursion splits at `len / 2` all the way down to blocks of eight, so
/// the result depends only on the input order and never on how the terms were
/// produced (sequentially or in parallel).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Column-wise [`pairwise_sum`] over four-component rows.
pub fn pairwise_sum4(rows: &[[f64; 4]]) -> [f64; 4] {
    const BLOCK: usize = 8;
    if rows.len() <= BLOCK {
        let mut acc = [0.0; 4];
        for row in rows {
            for k in 0..4 {
                acc[k] += row[k];
            }
        }
        return acc;
    }
    let mid = rows.len() / 2;
    let (a, b) = (pairwise_sum4(&rows[..mid]), pairwise_sum4(&rows[mid..]));
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator). Zero for fewer than two values.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    (pairwise_sum(&sq) / (values.len() - 1) as f64).sqrt()
}

/// `(1 - p)^d` for real `d >= 0`, computed through `ln_1p` for accuracy at small `p`.
pub(crate) fn pow_one_minus(p: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 1.0;
    }
    (d * (-p).ln_1p()).exp()
}

/// `1 - (1 - p)^d`, accurate when the result is small.
pub(crate) fn one_minus_pow_one_minus(p: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    -(d * (-p).ln_1p()).exp_m1()
}

/// Root of a monotone function on `[lo, hi]` by bisection.
///
/// The caller guarantees a sign change on the bracket.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return mid;
        }
        let f_mid = f(mid);
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }

    if b <= a {
        return 0.0;
    }
    // Split into geometric panels first: the integrands here are steep near `a`.
    let panels = 64;
    let ratio = (b / a).powf(1.0 / panels as f64);
    let geometric = a > 0.0 && ratio.is_finite() && ratio > 1.0;
    let mut total = 0.0;
    let mut lo = a;
    for k in 1..=panels {
        let hi = if k == panels {
            b
        } else if geometric {
            a * ratio.powi(k)
        } else {
            a + (b - a) * k as f64 / panels as f64
        };
        let fa = f(lo);
        let fb = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += recurse(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40);
        lo = hi;
    }
    total
}
