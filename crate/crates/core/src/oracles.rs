//! Statistical and exact checks of the samplers against independent oracles.

use std::collections::HashMap;

use crate::explorer::explore;
use crate::graphgen::{critical_p, sample_fast, GraphSample, ModelVariant};
use crate::rng::{derive_seed, substream};
use crate::sbs::{draw_clock, enumerate_orders, mean_curve};
use crate::stats::{ks_statistic, mean, std_dev, std_error};
use crate::weights::{generate_pareto_iid, MomentTargets, WeightVector};
use rand::Rng;

/// Composite Simpson rule on `[a, b]`.
fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let inner: f64 = (1..steps)
        .map(|k| g(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (g(a) + inner + g(b)) * h / 3.0
}

/// `E[W^k]` for Pareto(scale, shape) by quadrature after `x = scale / s`.
fn pareto_moment_quadrature(scale: f64, shape: f64, k: i32) -> f64 {
    let density = |x: f64| shape * scale.powf(shape) / x.powf(shape + 1.0);
    let integrand = |s: f64| {
        let s = s.max(1e-12);
        let x = scale / s;
        x.powi(k) * density(x) * scale / (s * s)
    };
    simpson(integrand, 0.0, 1.0, 20_000)
}

#[test]
fn pareto_moments_match_quadrature() {
    let t = MomentTargets::pareto(2.0 / 3.0, 4.0);
    for (k, closed) in [(1, t.ew), (2, t.ew2), (3, t.ew3)] {
        assert!(
            (pareto_moment_quadrature(2.0 / 3.0, 4.0, k) - closed).abs() < 1e-9,
            "k = {k}"
        );
    }
    assert!((t.ew - 8.0 / 9.0).abs() < 1e-15);
    assert!((t.ew2 - 8.0 / 9.0).abs() < 1e-15);
    assert!((t.ew3 / t.ew - 4.0 / 3.0).abs() < 1e-15);
}

#[test]
fn pareto_mean_weight() {
    let n = 20_000;
    let wv = generate_pareto_iid(n, 2.0 / 3.0, 4.0, 11).unwrap();
    let sd = (8.0f64 / 81.0).sqrt();
    assert!((wv.ell() / n as f64 - 8.0 / 9.0).abs() < 3.0 * sd / (n as f64).sqrt());
}

#[test]
fn pareto_c_hat() {
    // W^3 has infinite variance here, so the spread of c_hat is estimated
    // from independent replicate vectors rather than a formula.
    let n = 100_000;
    let c: Vec<f64> = (0..30)
        .map(|s| generate_pareto_iid(n, 2.0 / 3.0, 4.0, s).unwrap().c_hat())
        .collect();
    for &x in &c {
        assert!((x - 4.0 / 3.0).abs() < 3.0 * std_dev(&c), "c_hat {x}");
    }
    assert!((mean(&c) - 4.0 / 3.0).abs() < 3.0 * std_error(&c));
}

#[test]
fn truncated_capacity_law_matches_thresholding() {
    // two vertices of weight 1 at p = 2: capacities of present edges against
    // full Exp(1) draws kept when <= p
    let wv = WeightVector::new(vec![1.0, 1.0]).unwrap();
    let p = 2.0;
    let samples = 1_000_000u64;
    let sampled: Vec<f64> = (0..samples)
        .filter_map(|s| {
            sample_fast(&wv, p, ModelVariant::Poisson, s, &Default::default())
                .unwrap()
                .edges()
                .next()
                .map(|e| e.2)
        })
        .collect();
    let mut rng = substream(99, &[1]);
    let thresholded: Vec<f64> = (0..samples)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .filter(|&x| x <= p)
        .collect();
    let q = 1.0 - (-p).exp();
    let sigma = (q * (1.0 - q) / samples as f64).sqrt();
    assert!((sampled.len() as f64 / samples as f64 - q).abs() < 4.0 * sigma);
    assert!(ks_statistic(&sampled, &thresholded) < 0.01);
}

#[test]
fn size_biased_vertex_is_critical() {
    let n = 100_000;
    let wv = generate_pareto_iid(n, 2.0 / 3.0, 4.0, 1).unwrap();
    let p = critical_p(&wv, 0.0).unwrap();
    let w = wv.weights();
    // exact mean degree of a size-biased vertex, summed directly
    let exact: f64 = (0..n)
        .step_by(1)
        .map(|i| {
            let di: f64 = w.iter().map(|&wj| -(-w[i] * wj * p).exp_m1()).sum::<f64>() + (-w[i] * w[i] * p).exp_m1();
            w[i] / wv.ell() * di
        })
        .sum();
    assert!((exact - 1.0).abs() < 0.05, "exact {exact}");
    let mut degs = Vec::new();
    for r in 0..40u64 {
        let g = sample_fast(&wv, p, ModelVariant::Poisson, r, &Default::default()).unwrap();
        let mut rng = substream(r, &[77]);
        let tree = crate::fenwick::WeightedFenwick::new(w);
        for _ in 0..2500 {
            degs.push(g.degree(tree.sample(&mut rng).unwrap()) as f64);
        }
    }
    assert!(
        (mean(&degs) - exact).abs() < 3.0 * std_error(&degs),
        "{} vs {exact}",
        mean(&degs)
    );
}

fn empty_graph(n: usize) -> GraphSample {
    GraphSample::from_edges(n, 1.0, ModelVariant::Poisson, &[]).unwrap()
}

#[test]
fn root_law_is_size_biased() {
    let wv = WeightVector::new(vec![1.0, 2.0, 3.0]).unwrap();
    let g = empty_graph(3);
    let reps = 100_000u64;
    // index 0 holds weight 3 after sorting
    let hits = (0..reps)
        .filter(|&s| explore(&g, &wv, s).unwrap().order[0] == 0)
        .count() as f64;
    let sigma = (0.25 / reps as f64).sqrt();
    assert!((hits / reps as f64 - 0.5).abs() < 3.0 * sigma);
}

#[test]
fn empty_graph_order_is_size_biased_without_replacement() {
    let wv = WeightVector::new(vec![1.0, 2.0, 3.0]).unwrap();
    let w = wv.weights();
    let g = empty_graph(3);
    let reps = 1_000_000u64;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for s in 0..reps {
        *counts.entry(explore(&g, &wv, s).unwrap().order).or_default() += 1;
    }
    let mut perms = 0;
    for a in 0..3 {
        for b in 0..3 {
            if a == b {
                continue;
            }
            let c = 3 - a - b;
            let prob = w[a] / 6.0 * w[b] / (w[b] + w[c]);
            let freq = *counts.get(&vec![a, b, c]).unwrap_or(&0) as f64 / reps as f64;
            let sigma = (prob * (1.0 - prob) / reps as f64).sqrt();
            assert!((freq - prob).abs() < 3.5 * sigma, "{a}{b}{c}: {freq} vs {prob}");
            perms += 1;
        }
    }
    assert_eq!(perms, 6);
}

#[test]
fn clock_order_law_n5() {
    let w = [0.4, 2.5, 1.0, 3.3, 0.9];
    let exact: HashMap<Vec<usize>, f64> = enumerate_orders(&w).unwrap().into_iter().collect();
    let reps = 500_000u64;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for s in 0..reps {
        *counts
            .entry(draw_clock(&w, derive_seed(5, &[s]), &[]).unwrap().0.order)
            .or_default() += 1;
    }
    let tv: f64 = exact
        .iter()
        .map(|(o, p)| (*counts.get(o).unwrap_or(&0) as f64 / reps as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.02, "TV {tv}");
}

#[test]
fn early_draws_have_unit_mean() {
    let n = 100_000;
    let wv = generate_pareto_iid(n, 2.0 / 3.0, 4.0, 3).unwrap();
    let c = mean_curve(&wv, n / 100, 10_000, 3).unwrap();
    let m = c.mean[n / 100 - 1];
    assert!((0.9..=1.1).contains(&m), "{m}");
}

#[test]
fn unit_weight_l0_matches_exact_mean() {
    use crate::explorer::l0_trace;
    use crate::theory::unit_weight_l0_mean;
    let n = 2000;
    let wv = crate::weights::generate_constant(n, 1.0).unwrap();
    let p = critical_p(&wv, 2.0).unwrap();
    let grid = [10usize, 100, 400, 1000, 2000];
    let reps = 2000u64;
    let mut vals = vec![Vec::new(); grid.len()];
    for r in 0..reps {
        let g = sample_fast(&wv, p, ModelVariant::Poisson, r, &Default::default()).unwrap();
        let t = explore(&g, &wv, r).unwrap();
        let l0 = l0_trace(&t, &g);
        for (j, &m) in grid.iter().enumerate() {
            vals[j].push(l0[m] as f64);
        }
    }
    for (j, &m) in grid.iter().enumerate() {
        let exact = unit_weight_l0_mean(n, p, m);
        assert!((mean(&vals[j]) - exact).abs() < 3.5 * std_error(&vals[j]), "m = {m}");
    }
}
