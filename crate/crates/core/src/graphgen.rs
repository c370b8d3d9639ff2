//! Sampling rank-1 inhomogeneous random graphs.
//!
//! Vertex `i` carries weight `w_i` (sorted non-increasing) and the pair
//! `{i, j}` is an edge independently with probability `q(w_i w_j)`:
//!
//! | model      | `q`                                   |
//! |------------|---------------------------------------|
//! | `Poisson`  | `1 - exp(-w_i w_j p)`                 |
//! | `ChungLu`  | `w_i w_j p` (must not exceed 1)       |
//! | `Bdml`     | `w_i w_j s / (n + w_i w_j s)`, `s = p ell_n` |
//!
//! Every stored edge also carries a key in `[0, p]`. For the Poisson model it
//! is the edge capacity `E_ij ~ Exp(w_i w_j)` conditioned on `E_ij <= p`, which
//! makes the sample a slice of the monotone coupling `p -> G(W, p)`. The other
//! models get i.i.d. uniform keys; the explorer only uses keys to order
//! children.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{open_unit, substream, tag};
use crate::weights::WeightVector;

/// Rows handled by one random substream.
const ROW_BLOCK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelVariant {
    Poisson,
    ChungLu,
    Bdml,
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelVariant::Poisson => "poisson",
            ModelVariant::ChungLu => "chung-lu",
            ModelVariant::Bdml => "bdml",
        })
    }
}

impl FromStr for ModelVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "poisson" => Ok(ModelVariant::Poisson),
            "chung-lu" | "chunglu" => Ok(ModelVariant::ChungLu),
            "bdml" => Ok(ModelVariant::Bdml),
            _ => Err(Error::invalid(format!(
                "unknown model {s:?} (expected poisson, chung-lu or bdml)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    /// Reject Chung-Lu parameters with `w_1 w_2 p > 1` instead of clamping.
    pub strict: bool,
    /// Largest `n` accepted by the quadratic reference sampler.
    pub max_reference_n: usize,
    /// Largest `n` for which a full capacity matrix may be drawn.
    pub capacity_matrix_cap: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            strict: true,
            max_reference_n: 20_000,
            capacity_matrix_cap: 3_000,
        }
    }
}

/// `p_f = (ell^{1/3} + f) / ell^{4/3}`.
pub fn critical_p_for_ell(ell: f64, f: f64) -> Result<f64> {
    if !(ell.is_finite() && ell > 0.0) {
        return Err(Error::invalid(format!("ell_n must be positive, got {ell}")));
    }
    if !f.is_finite() {
        return Err(Error::invalid(format!("f must be finite, got {f}")));
    }
    let cbrt = ell.cbrt();
    let p = (cbrt + f) / (ell * cbrt);
    if p <= 0.0 {
        return Err(Error::invalid(format!(
            "f = {f} gives p = {p} <= 0 (need f > -ell^(1/3) = {})",
            -cbrt
        )));
    }
    Ok(p)
}

pub fn critical_p(wv: &WeightVector, f: f64) -> Result<f64> {
    critical_p_for_ell(wv.ell(), f)
}

/// `p = c / ell_n`, the parameterisation of the phase-transition sweep.
pub fn p_for_c(wv: &WeightVector, c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid(format!("c must be positive, got {c}")));
    }
    Ok(c / wv.ell())
}

/// Edge probabilities of one model at one `p`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeLaw {
    model: ModelVariant,
    p: f64,
    /// `s / n` for BDML.
    bdml_scale: f64,
    strict: bool,
}

impl EdgeLaw {
    pub fn new(wv: &WeightVector, p: f64, model: ModelVariant, strict: bool) -> Result<Self> {
        if p.is_nan() || p < 0.0 {
            return Err(Error::invalid(format!("p must be >= 0, got {p}")));
        }
        let law = Self {
            model,
            p,
            bdml_scale: p * wv.ell() / wv.n() as f64,
            strict,
        };
        if model == ModelVariant::ChungLu && strict && wv.n() >= 2 {
            // weights are sorted, so the first pair has the largest product
            let x = wv.get(0) * wv.get(1) * p;
            if x > 1.0 {
                return Err(Error::ProbabilityExceedsOne { i: 0, j: 1, value: x });
            }
        }
        Ok(law)
    }

    pub fn model(&self) -> ModelVariant {
        self.model
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn prob(&self, wi: f64, wj: f64) -> f64 {
        let prod = wi * wj;
        match self.model {
            ModelVariant::Poisson => -(-prod * self.p).exp_m1(),
            ModelVariant::ChungLu => {
                let x = prod * self.p;
                debug_assert!(!self.strict || x <= 1.0 || x.is_nan());
                x.min(1.0)
            }
            ModelVariant::Bdml => {
                let y = prod * self.bdml_scale;
                if y.is_infinite() {
                    1.0
                } else {
                    y / (1.0 + y)
                }
            }
        }
    }

    /// `ln(1 - q)`, accurate for small `q`.
    pub fn log_complement(&self, wi: f64, wj: f64) -> f64 {
        let prod = wi * wj;
        match self.model {
            ModelVariant::Poisson => -prod * self.p,
            ModelVariant::ChungLu => {
                let x = (prod * self.p).min(1.0);
                (-x).ln_1p()
            }
            ModelVariant::Bdml => -(prod * self.bdml_scale).ln_1p(),
        }
    }

    /// Key for a present edge: a truncated exponential capacity for the
    /// Poisson model, a uniform key otherwise.
    fn key<R: Rng + ?Sized>(&self, wi: f64, wj: f64, q: f64, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self.model {
            ModelVariant::Poisson => {
                let rate = wi * wj;
                let c = -(-u * q).ln_1p() / rate;
                c.min(self.p)
            }
            _ if self.p.is_finite() => u * self.p,
            _ => u,
        }
    }
}

/// A simple undirected graph stored as sorted adjacency lists, with one key
/// (capacity) per edge mirrored on both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    n: usize,
    p: f64,
    model: ModelVariant,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    keys: Vec<f64>,
}

/// One line of an edge-list file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: usize,
    pub v: usize,
    pub capacity: Option<f64>,
}

impl GraphSample {
    /// Assembles the adjacency from edges sorted by `(u, v)` with `u < v`.
    fn from_sorted(n: usize, p: f64, model: ModelVariant, edges: &[(usize, usize, f64)]) -> Self {
        let mut deg = vec![0usize; n];
        for &(u, v, _) in edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let total = offsets[n];
        let mut targets = vec![0usize; total];
        let mut keys = vec![0f64; total];
        let mut cursor: Vec<usize> = offsets[..n].to_vec();
        // With edges sorted by (u, v), every list comes out sorted: vertex x
        // receives its smaller neighbours (rows u < x) before its own row.
        for &(u, v, k) in edges {
            targets[cursor[u]] = v;
            keys[cursor[u]] = k;
            cursor[u] += 1;
            targets[cursor[v]] = u;
            keys[cursor[v]] = k;
            cursor[v] += 1;
        }
        Self {
            n,
            p,
            model,
            offsets,
            targets,
            keys,
        }
    }

    /// Builds a graph from arbitrary edges, validating simplicity and keys.
    pub fn from_edges(n: usize, p: f64, model: ModelVariant, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len());
        for &(a, b, k) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            if !(k >= 0.0 && k <= p) {
                return Err(Error::invalid(format!("edge ({a}, {b}) has key {k} outside [0, {p}]")));
            }
            sorted.push((a.min(b), a.max(b), k));
        }
        sorted.sort_by_key(|&(a, b, _)| (a, b));
        if let Some(w) = sorted.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::invalid(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        Ok(Self::from_sorted(n, p, model, &sorted))
    }

    /// Builds a graph from edge-list records; missing capacities are replaced
    /// by uniform ordering keys drawn from `seed`.
    pub fn from_records(n: usize, p: f64, model: ModelVariant, records: &[EdgeRecord], seed: u64) -> Result<Self> {
        let mut rng = substream(seed, &[tag::ORDER_KEYS]);
        let scale = if p.is_finite() { p } else { 1.0 };
        let edges: Vec<(usize, usize, f64)> = records
            .iter()
            .map(|r| {
                let k = match r.capacity {
                    Some(c) => c,
                    None => rng.random::<f64>() * scale,
                };
                (r.u, r.v, k)
            })
            .collect();
        Self::from_edges(n, p, model, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn model(&self) -> ModelVariant {
        self.model
    }

    /// Whether the edge keys are genuine capacities (Poisson model only).
    pub fn has_capacities(&self) -> bool {
        self.model == ModelVariant::Poisson
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Neighbours of `v` in increasing index order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Keys of the edges in [`neighbors`](Self::neighbors) order.
    pub fn keys(&self, v: usize) -> &[f64] {
        &self.keys[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges `(u, v, key)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.keys(u))
                .filter(move |(&v, _)| v > u)
                .map(move |(&v, &k)| (u, v, k))
        })
    }

    /// Writes the `u,v,capacity` CSV; capacity is left empty for models
    /// without capacities.
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["u", "v", "capacity"]).map_err(csv_err)?;
        for (u, v, k) in self.edges() {
            let cap = if self.has_capacities() {
                k.to_string()
            } else {
                String::new()
            };
            w.write_record([u.to_string(), v.to_string(), cap]).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Vec<EdgeRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let headers = r.headers().map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    if headers.iter().collect::<Vec<_>>() != ["u", "v", "capacity"] {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "expected header u,v,capacity".into(),
        });
    }
    let mut out = Vec::new();
    for (idx, rec) in r.deserialize::<EdgeRecord>().enumerate() {
        out.push(rec.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 2,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn row_blocks(n: usize) -> impl IndexedParallelIterator<Item = (usize, std::ops::Range<usize>)> {
    let blocks = n.div_ceil(ROW_BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(move |b| (b, b * ROW_BLOCK..((b + 1) * ROW_BLOCK).min(n)))
}

fn collect_blocks(parts: Vec<Vec<(usize, usize, f64)>>) -> Vec<(usize, usize, f64)> {
    let total = parts.iter().map(Vec::len).sum();
    let mut edges = Vec::with_capacity(total);
    parts.into_iter().for_each(|p| edges.extend(p));
    edges
}

/// Pairwise Bernoulli sampler, `O(n^2)`. Used as the oracle for
/// [`sample_fast`].
pub fn sample_reference(
    wv: &WeightVector,
    p: f64,
    model: ModelVariant,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<GraphSample> {
    let n = wv.n();
    if n > opts.max_reference_n {
        return Err(Error::TooLarge {
            what: "reference sampler",
            n,
            limit: opts.max_reference_n,
            hint: "; use sample_fast",
        });
    }
    let law = EdgeLaw::new(wv, p, model, opts.strict)?;
    let w = wv.weights();
    let parts: Vec<_> = row_blocks(n)
        .map(|(b, rows)| {
            let mut rng = substream(seed, &[tag::REFERENCE_ROWS, b as u64]);
            let mut out = Vec::new();
            for i in rows {
                for j in i + 1..n {
                    let q = law.prob(w[i], w[j]);
                    if rng.random::<f64>() < q {
                        out.push((i, j, law.key(w[i], w[j], q, &mut rng)));
                    }
                }
            }
            out
        })
        .collect();
    Ok(GraphSample::from_sorted(n, p, model, &collect_blocks(parts)))
}

/// Geometric-skip sampler with expected cost `O(n + m)` plus rejections.
///
/// Along row `i`, `q_ij` is non-increasing in `j` because the weights are
/// sorted. From the current column `j` we jump a Geometric(`qbar`) number of
/// columns with `qbar = q_ij`, then keep the landing column with probability
/// `q / qbar`. Each column is thus kept independently with probability
/// exactly `q`, and `qbar` is refreshed at every landing.
pub fn sample_fast(
    wv: &WeightVector,
    p: f64,
    model: ModelVariant,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<GraphSample> {
    let n = wv.n();
    let law = EdgeLaw::new(wv, p, model, opts.strict)?;
    let w = wv.weights();
    let parts: Vec<_> = row_blocks(n)
        .map(|(b, rows)| {
            let mut rng = substream(seed, &[tag::FAST_ROWS, b as u64]);
            let mut out = Vec::new();
            for i in rows {
                let mut j = i + 1;
                while j < n {
                    let qbar = law.prob(w[i], w[j]);
                    if qbar <= 0.0 {
                        break;
                    }
                    if qbar < 1.0 {
                        let skip = (open_unit(&mut rng).ln() / law.log_complement(w[i], w[j])).floor();
                        if skip >= (n - j) as f64 {
                            break;
                        }
                        j += skip as usize;
                    }
                    let q = law.prob(w[i], w[j]);
                    if q >= qbar || rng.random::<f64>() * qbar < q {
                        out.push((i, j, law.key(w[i], w[j], q, &mut rng)));
                    }
                    j += 1;
                }
            }
            out
        })
        .collect();
    Ok(GraphSample::from_sorted(n, p, model, &collect_blocks(parts)))
}

/// All `n(n-1)/2` capacities `E_ij ~ Exp(w_i w_j)` of the monotone coupling.
#[derive(Debug, Clone)]
pub struct CapacityMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl CapacityMatrix {
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i != j, "no capacity on the diagonal");
        self.upper[self.index(i, j)]
    }

    /// The Poisson-model graph `G(W, p)`: all pairs with capacity at most `p`.
    pub fn threshold(&self, p: f64) -> GraphSample {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let c = self.upper[self.index(i, j)];
                if c <= p {
                    edges.push((i, j, c));
                }
            }
        }
        GraphSample::from_sorted(self.n, p, ModelVariant::Poisson, &edges)
    }
}

pub fn sample_capacity_matrix(wv: &WeightVector, seed: u64, opts: &SamplerOptions) -> Result<CapacityMatrix> {
    let n = wv.n();
    if n > opts.capacity_matrix_cap {
        return Err(Error::TooLarge {
            what: "capacity matrix",
            n,
            limit: opts.capacity_matrix_cap,
            hint: "; use sample_fast for a single p",
        });
    }
    let w = wv.weights();
    let parts: Vec<Vec<f64>> = row_blocks(n)
        .map(|(b, rows)| {
            let mut rng = substream(seed, &[tag::CAPACITY_MATRIX, b as u64]);
            let mut out = Vec::new();
            for i in rows {
                for j in i + 1..n {
                    out.push(-open_unit(&mut rng).ln() / (w[i] * w[j]));
                }
            }
            out
        })
        .collect();
    Ok(CapacityMatrix {
        n,
        upper: parts.concat(),
    })
}
