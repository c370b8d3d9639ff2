//! Fixtures shared by the benchmarks.

use critgraph_core::graphgen::{critical_p, sample_fast, ModelVariant};
use critgraph_core::weights::generate_pareto_iid;
use critgraph_core::{GraphSample, WeightVector};

pub const SCALE: f64 = 2.0 / 3.0;
pub const SHAPE: f64 = 4.0;

/// Pareto weights of size `n`.
pub fn weights(n: usize, seed: u64) -> WeightVector {
    generate_pareto_iid(n, SCALE, SHAPE, seed).expect("valid Pareto parameters")
}

/// Weights and a Poisson graph at window parameter `f`.
pub fn critical_graph(n: usize, f: f64, seed: u64) -> (WeightVector, GraphSample) {
    let wv = weights(n, seed);
    let p = critical_p(&wv, f).expect("positive p");
    let g = sample_fast(&wv, p, ModelVariant::Poisson, seed, &Default::default()).expect("sampler succeeds");
    (wv, g)
}
