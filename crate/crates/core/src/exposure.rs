//! Bernoulli treatment assignment, four-level exposure mappings, their
//! closed-form probabilities and the expected observed-vs-true confusion
//! matrix.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::noise::NoiseParams;
use crate::numeric::{one_minus_pow_one_minus, pow_one_minus};

/// Determinants at or below this are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Treatment {
    pub p: f64,
    pub z: Vec<bool>,
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("treatment probability must lie in (0, 1), got {p}")))
    }
}

/// I.i.d. Bernoulli(`p`) assignment to `n` units.
pub fn assign_treatment<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Treatment> {
    check_probability(p)?;
    let z = (0..n).map(|_| rng.random::<f64>() < p).collect();
    Ok(Treatment { p, z })
}

impl Treatment {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Number of treated neighbours of `i` in `g`.
    pub fn treated_neighbors(&self, g: &Graph, i: usize) -> usize {
        g.neighbors(i).iter().filter(|&&j| self.z[j]).count()
    }
}

/// Exposure condition. The same four slots carry the thresholded
/// (generalised) conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExposureLevel {
    /// Treated, with a treated neighbour.
    C11,
    /// Treated, no treated neighbour.
    C10,
    /// Untreated, with a treated neighbour.
    C01,
    /// Neither.
    C00,
}

impl ExposureLevel {
    pub const ALL: [ExposureLevel; 4] = [
        ExposureLevel::C11,
        ExposureLevel::C10,
        ExposureLevel::C01,
        ExposureLevel::C00,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> ExposureLevel {
        Self::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            ExposureLevel::C11 => "c11",
            ExposureLevel::C10 => "c10",
            ExposureLevel::C01 => "c01",
            ExposureLevel::C00 => "c00",
        }
    }

    fn from_parts(treated: bool, exposed: bool) -> ExposureLevel {
        match (treated, exposed) {
            (true, true) => ExposureLevel::C11,
            (true, false) => ExposureLevel::C10,
            (false, true) => ExposureLevel::C01,
            (false, false) => ExposureLevel::C00,
        }
    }
}

impl fmt::Display for ExposureLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn exposure_level(t: &Treatment, g: &Graph, i: usize) -> ExposureLevel {
    let exposed = g.neighbors(i).iter().any(|&j| t.z[j]);
    ExposureLevel::from_parts(t.z[i], exposed)
}

/// Levels of every vertex.
pub fn exposure_levels(t: &Treatment, g: &Graph) -> Vec<ExposureLevel> {
    (0..g.n_vertices()).map(|i| exposure_level(t, g, i)).collect()
}

/// Neighbourhood threshold for the generalised mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralizedExposureConfig {
    /// The same absolute threshold `m >= 1` for every vertex.
    Absolute(usize),
    /// One absolute threshold per vertex.
    PerNode(Vec<usize>),
    /// `m_i = max(1, ceil(q * d_i))` with `q` in `[0, 1]`.
    Fractional(f64),
}

impl GeneralizedExposureConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            GeneralizedExposureConfig::Absolute(m) if *m == 0 => {
                Err(Error::param("absolute threshold must be >= 1"))
            }
            GeneralizedExposureConfig::PerNode(ms) if ms.contains(&0) => {
                Err(Error::param("per-node thresholds must be >= 1"))
            }
            GeneralizedExposureConfig::Fractional(q) if !(0.0..=1.0).contains(q) => {
                Err(Error::param(format!("fraction must lie in [0, 1], got {q}")))
            }
            _ => Ok(()),
        }
    }

    /// Threshold `m_i` for a vertex of degree `degree`.
    pub fn threshold(&self, i: usize, degree: usize) -> usize {
        match self {
            GeneralizedExposureConfig::Absolute(m) => *m,
            GeneralizedExposureConfig::PerNode(ms) => ms[i],
            GeneralizedExposureConfig::Fractional(q) => ((q * degree as f64).ceil() as usize).max(1),
        }
    }
}

/// Thresholded mapping: exposed iff at least `m_i` neighbours are treated.
pub fn exposure_level_generalized(
    t: &Treatment,
    g: &Graph,
    i: usize,
    cfg: &GeneralizedExposureConfig,
) -> ExposureLevel {
    let m = cfg.threshold(i, g.degree(i));
    ExposureLevel::from_parts(t.z[i], t.treated_neighbors(g, i) >= m)
}

/// Probabilities of the four levels, indexed by [`ExposureLevel::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureProbabilities(pub [f64; 4]);

impl ExposureProbabilities {
    pub fn get(&self, level: ExposureLevel) -> f64 {
        self.0[level.index()]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Closed-form exposure probabilities for degree `d` (real `d` allowed):
/// `(p[1-(1-p)^d], p(1-p)^d, (1-p)[1-(1-p)^d], (1-p)^{d+1})`.
pub fn exposure_probabilities(d: f64, p: f64) -> Result<ExposureProbabilities> {
    check_probability(p)?;
    if !(d >= 0.0) {
        return Err(Error::param(format!("degree must be >= 0, got {d}")));
    }
    let none = pow_one_minus(p, d);
    let some = one_minus_pow_one_minus(p, d);
    Ok(ExposureProbabilities([p * some, p * none, (1.0 - p) * some, (1.0 - p) * none]))
}

/// Probabilities under the generalised mapping with threshold `m`: binomial
/// head/tail sums of the number of treated neighbours.
pub fn exposure_probabilities_generalized(d: usize, p: f64, m: usize) -> Result<ExposureProbabilities> {
    check_probability(p)?;
    if m == 0 {
        return Err(Error::param("threshold must be >= 1"));
    }
    let below = binomial_head(d, p, m - 1);
    let at_least = if d < m { 0.0 } else { 1.0 - below };
    Ok(ExposureProbabilities([
        p * at_least,
        p * below,
        (1.0 - p) * at_least,
        (1.0 - p) * below,
    ]))
}

/// `P(X <= k)` for `X ~ Binomial(d, p)`, summed term by term in log space.
fn binomial_head(d: usize, p: f64, k: usize) -> f64 {
    let top = k.min(d);
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let mut ln_choose = 0.0;
    let mut total = 0.0;
    for x in 0..=top {
        if x > 0 {
            ln_choose += ((d - x + 1) as f64).ln() - (x as f64).ln();
        }
        total += (ln_choose + x as f64 * ln_p + (d - x) as f64 * ln_q).exp();
    }
    total.min(1.0)
}

/// Expected confusion matrix of a vertex with true degree `d`, split into the
/// treated block `s` (rows observed `{c11, c10}`, columns true `{c11, c10}`)
/// and the control block `q = ((1 - p) / p) s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionMatrix {
    pub s: [[f64; 2]; 2],
    pub q: [[f64; 2]; 2],
    pub d: f64,
    pub n_vertices: usize,
    pub p: f64,
    pub noise: NoiseParams,
}

/// Inverses of the two blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionInverse {
    pub s_inv: [[f64; 2]; 2],
    pub q_inv: [[f64; 2]; 2],
}

pub fn confusion_matrix(d: f64, n_vertices: usize, p: f64, noise: &NoiseParams) -> Result<ConfusionMatrix> {
    check_probability(p)?;
    noise.validate()?;
    let max_degree = n_vertices as f64 - 1.0;
    if !(d >= 0.0 && d <= max_degree) {
        return Err(Error::param(format!("degree {d} outside [0, {max_degree}]")));
    }
    // a = P(no treated false neighbour), r = P(no treated true neighbour),
    // s = P(no treated neighbour among the retained true edges).
    let a = pow_one_minus(noise.alpha * p, max_degree - d);
    let r = pow_one_minus(p, d);
    let s = pow_one_minus((1.0 - noise.beta) * p, d);
    let s11 = p * (one_minus_pow_one_minus(p, d) - a * (s - r));
    let s12 = p * r * (1.0 - a);
    let s21 = p * a * (s - r);
    let s22 = p * r * a;
    let s_block = [[s11, s12], [s21, s22]];
    let ratio = (1.0 - p) / p;
    let q_block = s_block.map(|row| row.map(|v| ratio * v));
    Ok(ConfusionMatrix {
        s: s_block,
        q: q_block,
        d,
        n_vertices,
        p,
        noise: *noise,
    })
}

impl ConfusionMatrix {
    pub fn determinant(&self) -> f64 {
        self.s[0][0] * self.s[1][1] - self.s[0][1] * self.s[1][0]
    }

    /// Full 4x4 matrix over `(c11, c10, c01, c00)`.
    pub fn full(&self) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = self.s[r][c];
                m[r + 2][c + 2] = self.q[r][c];
            }
        }
        m
    }
}

/// Inverts both blocks; a determinant at or below [`SINGULAR_DET`] is
/// reported as singular.
pub fn invert_confusion(m: &ConfusionMatrix) -> Result<ConfusionInverse> {
    let det = m.determinant();
    if !(det > SINGULAR_DET) {
        return Err(Error::Singular { det });
    }
    let s = &m.s;
    let s_inv = [
        [s[1][1] / det, -s[0][1] / det],
        [-s[1][0] / det, s[0][0] / det],
    ];
    let ratio = m.p / (1.0 - m.p);
    let q_inv = s_inv.map(|row| row.map(|v| ratio * v));
    Ok(ConfusionInverse { s_inv, q_inv })
}

impl ConfusionInverse {
    /// Applies the block-diagonal inverse to a vector over `(c11, c10, c01, c00)`.
    pub fn apply(&self, y: &[f64; 4]) -> [f64; 4] {
        let (s, q) = (&self.s_inv, &self.q_inv);
        [
            s[0][0] * y[0] + s[0][1] * y[1],
            s[1][0] * y[0] + s[1][1] * y[1],
            q[0][0] * y[2] + q[0][1] * y[3],
            q[1][0] * y[2] + q[1][1] * y[3],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn star() -> Graph {
        Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn levels_from_definition() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let t = Treatment { p: 0.5, z: vec![true, false, true] };
        assert_eq!(exposure_level(&t, &g, 2), ExposureLevel::C10, "isolated treated");
        assert_eq!(exposure_level(&t, &g, 0), ExposureLevel::C10);
        assert_eq!(exposure_level(&t, &g, 1), ExposureLevel::C01);
        let t = Treatment { p: 0.5, z: vec![true, true, false] };
        assert_eq!(exposure_level(&t, &g, 0), ExposureLevel::C11);
        assert_eq!(exposure_level(&t, &g, 2), ExposureLevel::C00);
    }

    #[test]
    fn generalized_thresholds() {
        let g = star();
        let two_treated = Treatment { p: 0.5, z: vec![true, true, true, false] };
        let cfg = GeneralizedExposureConfig::Absolute(3);
        assert_eq!(exposure_level_generalized(&two_treated, &g, 0, &cfg), ExposureLevel::C10);
        let three_treated = Treatment { p: 0.5, z: vec![false, true, true, true] };
        assert_eq!(exposure_level_generalized(&three_treated, &g, 0, &cfg), ExposureLevel::C01);
        let frac = GeneralizedExposureConfig::Fractional(0.5);
        assert_eq!(frac.threshold(0, 3), 2);
        assert_eq!(frac.threshold(0, 0), 1);
        assert_eq!(GeneralizedExposureConfig::Fractional(0.0).threshold(0, 7), 1);
        assert!(GeneralizedExposureConfig::Absolute(0).validate().is_err());
        assert!(GeneralizedExposureConfig::Fractional(1.5).validate().is_err());
    }

    #[test]
    fn treatment_rejects_bad_p_and_is_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(assign_treatment(10, 0.0, &mut rng).is_err());
        assert!(assign_treatment(10, 1.0, &mut rng).is_err());
        let a = assign_treatment(50, 0.3, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = assign_treatment(50, 0.3, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_degree_probabilities() {
        let e = exposure_probabilities(0.0, 0.2).unwrap();
        assert_eq!(e.0, [0.0, 0.2, 0.0, 0.8]);
        assert!(exposure_probabilities(-1.0, 0.2).is_err());
    }

    #[test]
    fn degree_six_probabilities() {
        // Frozen from enumeration of all 2^7 own-plus-neighbour patterns.
        let e = exposure_probabilities(6.0, 0.1).unwrap();
        let want = [0.046_855_9, 0.053_144_1, 0.421_703_1, 0.478_296_9];
        for k in 0..4 {
            assert!((e.0[k] - want[k]).abs() < 1e-12, "{k}: {}", e.0[k]);
        }
    }

    #[test]
    fn generalized_reduces_and_tails() {
        for d in 0..10 {
            let a = exposure_probabilities_generalized(d, 0.1, 1).unwrap();
            let b = exposure_probabilities(d as f64, 0.1).unwrap();
            for k in 0..4 {
                assert!((a.0[k] - b.0[k]).abs() < 1e-14);
            }
        }
        let e = exposure_probabilities_generalized(5, 0.1, 2).unwrap();
        assert!((e.0[0] - 0.008_146).abs() < 1e-12, "{}", e.0[0]);
        let e = exposure_probabilities_generalized(2, 0.3, 3).unwrap();
        assert_eq!(e.0[0], 0.0);
        assert_eq!(e.0[2], 0.0);
    }

    #[test]
    fn noiseless_confusion_is_diagonal() {
        let c = confusion_matrix(4.0, 20, 0.1, &NoiseParams::NONE).unwrap();
        let r = 0.9f64.powi(4);
        assert!((c.s[0][0] - 0.1 * (1.0 - r)).abs() < 1e-15);
        assert!((c.s[1][1] - 0.1 * r).abs() < 1e-15);
        assert_eq!(c.s[0][1], 0.0);
        assert_eq!(c.s[1][0], 0.0);
        let inv = invert_confusion(&c).unwrap();
        assert!((inv.s_inv[0][0] - 1.0 / (0.1 * (1.0 - r))).abs() < 1e-9);
        assert!((inv.s_inv[1][1] - 1.0 / (0.1 * r)).abs() < 1e-9);
    }

    #[test]
    fn zero_degree_confusion_and_singularity() {
        let noise = NoiseParams { alpha: 0.05, beta: 0.2 };
        let c = confusion_matrix(0.0, 10, 0.1, &noise).unwrap();
        let a = (1.0 - 0.05 * 0.1f64).powi(9);
        assert_eq!(c.s[0][0], 0.0);
        assert_eq!(c.s[1][0], 0.0);
        assert!((c.s[0][1] - 0.1 * (1.0 - a)).abs() < 1e-15);
        assert!((c.s[1][1] - 0.1 * a).abs() < 1e-15);
        assert!(matches!(invert_confusion(&c), Err(Error::Singular { .. })));
        let tiny = confusion_matrix(1e-9, 10, 0.1, &noise).unwrap();
        assert!(invert_confusion(&tiny).is_err());
    }

    #[test]
    fn confusion_rejects_excess_degree() {
        assert!(confusion_matrix(10.0, 10, 0.1, &NoiseParams::NONE).is_err());
        assert!(confusion_matrix(9.0, 10, 0.1, &NoiseParams::NONE).is_ok());
    }

    #[test]
    fn apply_inverse_recovers_vector() {
        let noise = NoiseParams { alpha: 0.01, beta: 0.1 };
        let c = confusion_matrix(7.5, 100, 0.1, &noise).unwrap();
        let inv = invert_confusion(&c).unwrap();
        let y = [10.0, 7.0, 5.0, 1.0];
        let m = c.full();
        let py: Vec<f64> = (0..4).map(|r| (0..4).map(|k| m[r][k] * y[k]).sum()).collect();
        let back = inv.apply(&[py[0], py[1], py[2], py[3]]);
        for k in 0..4 {
            assert!((back[k] - y[k]).abs() < 1e-10);
        }
    }
}
