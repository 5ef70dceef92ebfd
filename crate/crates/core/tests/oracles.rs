//! Monte Carlo checks of library quantities against independently computed references.

mod common;

use common::DILATED;
use nnc_core::estimators::mme_node;
use nnc_core::graph::sample_degree_sequence;
use nnc_core::harness::{GraphSource, MixingMode, NoiseSpec, OutcomeSource};
use nnc_core::ExposureLevel::*;
use nnc_core::{
    condition_diagnostics, exposure_levels, exposure_probabilities, fit_with_options, moment_stats,
    observed_degree_moments, perturb, replicate, run_experiment, DegreeDistribution, EstimatorKind, ExperimentConfig,
    FitOptions, Graph, NoiseParams, OutcomeTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn new() -> Self {
        Welford { n: 0.0, mean: 0.0, m2: 0.0 }
    }
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }
    fn var(&self) -> f64 {
        self.m2 / (self.n - 1.0)
    }
    fn se(&self) -> f64 {
        (self.var() / self.n).sqrt()
    }
}

fn assert_close_mc(name: &str, w: &Welford, expected: f64) {
    let tol = 3.0 * w.se() + 1e-12;
    assert!((w.mean - expected).abs() <= tol, "{name}: {} vs {expected} (3 SE = {tol})", w.mean);
}

fn erdos_renyi(n: usize, mean_degree: f64, rng: &mut ChaCha8Rng) -> Graph {
    let q = mean_degree / (n - 1) as f64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < q {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

fn ks_distance(draws: &[usize], cdf: &[f64]) -> f64 {
    let mut counts = vec![0usize; cdf.len()];
    for &d in draws {
        counts[d] += 1;
    }
    let mut acc = 0usize;
    let mut worst: f64 = 0.0;
    for (k, &c) in counts.iter().enumerate() {
        acc += c;
        worst = worst.max((acc as f64 / draws.len() as f64 - cdf[k]).abs());
    }
    worst
}

#[test]
fn zero_truncated_poisson_draws_match_the_conditioned_pmf() {
    let n = 60;
    let mean = 10.0;
    // Rate solving mu / (1 - e^-mu) = mean by Newton's method.
    let mut mu: f64 = mean;
    for _ in 0..100 {
        let e = (-mu).exp();
        let f = mu / (1.0 - e) - mean;
        let df = (1.0 - e - mu * e) / (1.0 - e).powi(2);
        mu -= f / df;
    }
    let mut pmf = vec![0.0; n];
    let mut term = (-mu).exp();
    for (k, slot) in pmf.iter_mut().enumerate().skip(1) {
        term *= mu / k as f64;
        *slot = term;
    }
    let total: f64 = pmf.iter().sum();
    let mut cdf = vec![0.0; n];
    let mut acc = 0.0;
    for k in 0..n {
        acc += pmf[k] / total;
        cdf[k] = acc;
    }

    let mut draws = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dist = DegreeDistribution::ZeroTruncatedPoisson { mean };
    while draws.len() < 100_000 {
        draws.extend(sample_degree_sequence(&dist, n, &mut rng).unwrap());
    }
    assert!(draws.iter().all(|&d| (1..n).contains(&d)));
    let ks = ks_distance(&draws, &cdf);
    assert!(ks <= 0.02, "Kolmogorov distance {ks}");
}

#[test]
fn pareto_draws_match_the_rounded_density() {
    let n = 300;
    let (rate, shape, lower) = (0.02, 1.5, 2.0);
    let upper = (n - 1) as f64;
    let density = |x: f64| (-rate * x).exp() * x.powf(-(shape + 1.0));
    let trapezoid = |a: f64, b: f64| {
        let steps = 2000;
        let h = (b - a) / steps as f64;
        let inner: f64 = (1..steps).map(|i| density(a + i as f64 * h)).sum();
        h * (0.5 * (density(a) + density(b)) + inner)
    };
    let total = trapezoid(lower, upper);
    let mut cdf = vec![0.0; n];
    for (k, slot) in cdf.iter_mut().enumerate() {
        let edge = (k as f64 + 0.5).min(upper);
        *slot = if edge <= lower { 0.0 } else { trapezoid(lower, edge) / total };
    }
    cdf[n - 1] = 1.0;

    let mut draws = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let dist = DegreeDistribution::ParetoExpCutoff { rate, shape, lower };
    while draws.len() < 100_000 {
        draws.extend(sample_degree_sequence(&dist, n, &mut rng).unwrap());
    }
    let ks = ks_distance(&draws, &cdf);
    assert!(ks <= 0.02, "Kolmogorov distance {ks}");

    let sample_mean = draws.iter().sum::<usize>() as f64 / draws.len() as f64;
    let quadrature_mean = dist.mean(n).unwrap();
    assert!((sample_mean - quadrature_mean).abs() < 0.1, "{sample_mean} vs {quadrature_mean}");
}

#[test]
fn observed_mean_degree_matches_noise_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 300;
    let g = erdos_renyi(n, 8.0, &mut rng);
    let noise = NoiseParams { alpha: 0.01, beta: 0.2 };
    let pairs = (n * (n - 1) / 2) as f64;
    let edges = g.n_edges() as f64;
    let expected = 2.0 * (edges * (1.0 - noise.beta) + (pairs - edges) * noise.alpha) / n as f64;
    let mut w = Welford::new();
    for _ in 0..400 {
        let obs = perturb(&g, &noise, &mut rng).unwrap();
        w.push(2.0 * obs.n_edges() as f64 / n as f64);
    }
    assert_close_mc("observed mean degree", &w, expected);
}

#[test]
fn moment_statistics_match_hand_computed_expectations() {
    let n = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut all_pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    for k in 0..995 {
        let j = rng.random_range(k..all_pairs.len());
        all_pairs.swap(k, j);
    }
    let g = Graph::from_edges(n, all_pairs[..995].iter().copied()).unwrap();
    // density 0.05, alpha 0.005, beta 0.1
    let expected = [0.04975, 0.00922625, 0.005152619375];
    let noise = NoiseParams { alpha: 0.005, beta: 0.1 };
    let mut ws = [Welford::new(), Welford::new(), Welford::new()];
    for _ in 0..200 {
        let reps = replicate(&g, &noise, 3, &mut rng).unwrap();
        let m = moment_stats(&reps[0], &reps[1], &reps[2]).unwrap();
        for (w, x) in ws.iter_mut().zip([m.u1, m.u2, m.u3]) {
            w.push(x);
        }
    }
    for (k, (w, e)) in ws.iter().zip(expected).enumerate() {
        assert_close_mc(&format!("u{}", k + 1), w, e);
    }
}

#[test]
fn noise_fit_error_shrinks_with_network_size() {
    let noise = NoiseParams { alpha: 0.005, beta: 0.1 };
    let mut rmse = Vec::new();
    for (idx, n) in [100usize, 200, 400].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + idx as u64);
        let (mut sa, mut sb, mut used) = (0.0, 0.0, 0);
        for _ in 0..200 {
            let g = erdos_renyi(n, 10.0, &mut rng);
            let reps = replicate(&g, &noise, 3, &mut rng).unwrap();
            let m = moment_stats(&reps[0], &reps[1], &reps[2]).unwrap();
            if let Ok(fit) = fit_with_options(&m, &FitOptions::default()) {
                sa += (fit.alpha_hat - noise.alpha).powi(2);
                sb += (fit.beta_hat - noise.beta).powi(2);
                used += 1;
            }
        }
        assert!(used >= 190, "only {used} fits succeeded at n = {n}");
        rmse.push(((sa / used as f64).sqrt(), (sb / used as f64).sqrt()));
    }
    for w in rmse.windows(2) {
        assert!(w[1].0 < w[0].0 && w[1].1 < w[0].1, "{rmse:?}");
    }
}

#[test]
fn exposure_frequencies_match_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let g = erdos_renyi(80, 5.0, &mut rng);
    let p = 0.3;
    let draws = 20_000;
    let mut counts = vec![[0usize; 4]; g.n_vertices()];
    for _ in 0..draws {
        let t = nnc_core::assign_treatment(g.n_vertices(), p, &mut rng).unwrap();
        for (i, level) in exposure_levels(&t, &g).into_iter().enumerate() {
            counts[i][level.index()] += 1;
        }
    }
    for (i, c) in counts.iter().enumerate() {
        let probs = exposure_probabilities(g.degree(i) as f64, p).unwrap();
        for k in 0..4 {
            let q = probs.0[k];
            let freq = c[k] as f64 / draws as f64;
            let se = (q * (1.0 - q) / draws as f64).sqrt();
            assert!((freq - q).abs() <= 4.5 * se + 1e-12, "vertex {i} level {k}: {freq} vs {q}");
        }
    }
}

#[test]
fn corrected_vertex_term_is_unbiased_at_the_true_degree() {
    let (n, d, p) = (200usize, 8usize, 0.1);
    let noise = NoiseParams { alpha: 0.005, beta: 0.1 };
    let y = DILATED;
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut ws = [Welford::new(), Welford::new(), Welford::new(), Welford::new()];
    for _ in 0..100_000 {
        let treated = rng.random::<f64>() < p;
        let (mut true_exposed, mut obs_exposed) = (false, false);
        for _ in 0..d {
            let z = rng.random::<f64>() < p;
            true_exposed |= z;
            obs_exposed |= z && rng.random::<f64>() >= noise.beta;
        }
        for _ in 0..n - 1 - d {
            obs_exposed |= rng.random::<f64>() < p && rng.random::<f64>() < noise.alpha;
        }
        let level = |exposed: bool| match (treated, exposed) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        let mut y_tilde = [0.0; 4];
        y_tilde[level(obs_exposed)] = y[level(true_exposed)];
        let term = mme_node(&y_tilde, d as f64, noise.alpha, noise.beta, p, n).unwrap();
        for (w, x) in ws.iter_mut().zip(term) {
            w.push(x);
        }
    }
    for k in 0..4 {
        assert_close_mc(&format!("level {k}"), &ws[k], y[k]);
    }
}

#[test]
fn observed_degree_moments_match_simulation() {
    let (n, d, p) = (50usize, 6usize, 0.1);
    let noise = NoiseParams { alpha: 0.01, beta: 0.1 };
    let theory = observed_degree_moments(d, n, p, &noise).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut pow, mut inv, mut sq) = (Welford::new(), Welford::new(), Welford::new());
    for _ in 0..200_000 {
        let kept = (0..d).filter(|_| rng.random::<f64>() >= noise.beta).count();
        let added = (0..n - 1 - d).filter(|_| rng.random::<f64>() < noise.alpha).count();
        let x = (1.0 - p).powi((kept + added) as i32);
        pow.push(x);
        inv.push(1.0 / x);
        sq.push(x * x);
    }
    assert_close_mc("E[(1-p)^d]", &pow, theory.mean_pow);
    assert_close_mc("E[(1-p)^-d]", &inv, theory.mean_inv_pow);
    assert_close_mc("E[(1-p)^2d]", &sq, theory.var_pow + theory.mean_pow.powi(2));
}

#[test]
fn dependency_matches_brute_force_on_sparse_random_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let n = 1000;
    let g = erdos_renyi(n, 10.0, &mut rng);
    let diag = condition_diagnostics(&g, 0.1).unwrap();
    let mut brute = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j && (g.has_edge(i, j) || g.common_neighbors(i, j).unwrap() > 0) {
                brute += 1;
            }
        }
    }
    assert_eq!(diag.dependent_pairs, brute);
    // A pair is dependent unless it has no edge and none of the other n - 2 vertices joins both.
    let q = 10.0 / (n - 1) as f64;
    let pair_prob = 1.0 - (1.0 - q) * (1.0 - q * q).powi(n as i32 - 2);
    let expected = pair_prob * (n - 1) as f64 / n as f64;
    assert!((diag.dependency - expected).abs() < 0.05 * expected, "{} vs {expected}", diag.dependency);
    assert!(diag.dependency < 0.15);
}

fn noiseless_config(trials: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        graph_source: GraphSource::Generator {
            n_vertices: 300,
            degree: DegreeDistribution::ZeroTruncatedPoisson { mean: 6.0 },
        },
        noise: NoiseSpec { alpha: 0.0, beta: 0.0, known: true },
        p: 0.2,
        outcomes: OutcomeSource::Dilated { values: DILATED },
        trials,
        bootstrap_b: 200,
        bootstrap_level: 0.95,
        mixing_mode: MixingMode::SparseFallback,
        master_seed: seed,
        estimators: EstimatorKind::ALL.to_vec(),
        regenerate_graph: false,
        fit: FitOptions::default(),
    }
}

#[test]
fn noiseless_harness_is_unbiased() {
    let summary = run_experiment(&noiseless_config(2000, 19)).unwrap();
    assert_eq!(summary.n_failed, 0);
    for row in &summary.rows {
        assert!(
            row.bias.abs() < 4.0 * row.mc_se(),
            "{:?} {:?}: bias {} se {}",
            row.estimator,
            row.level,
            row.bias,
            row.mc_se()
        );
    }
    let truth = OutcomeTable::constant(1, DILATED).unwrap().truth();
    let contrast = |k| nnc_core::contrast(&truth, k, C00);
    assert_eq!([contrast(C11), contrast(C10), contrast(C01)], [9.0, 6.0, 4.0]);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut cfg = noiseless_config(64, 20);
    cfg.noise = NoiseSpec { alpha: 0.004, beta: 0.1, known: false };
    cfg.regenerate_graph = true;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_experiment(&cfg).unwrap())
    };
    let single = run(1);
    assert_eq!(single, run(4));
    assert_eq!(single, run(7));
}
