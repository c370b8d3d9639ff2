//! Size-biased sampling without replacement.
//!
//! Two independent samplers produce the order `v(1), v(2), ...` in which
//! indices are drawn with probability proportional to their remaining weight:
//! a sequential Fenwick-tree sampler and the exponential-clock construction
//! (index `k` rings at `T_k ~ Exp(w_k / ell)`, order = ring order). Exact
//! enumeration over all orders serves as an oracle for small inputs.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fenwick::WeightedFenwick;
use crate::rng::{open_unit, substream, tag};
use crate::stats::exact_sum;
use crate::weights::WeightVector;

/// Largest input accepted by [`enumerate_orders`].
pub const MAX_ENUMERATION_N: usize = 8;
/// Largest input accepted by [`check_conjectures`].
pub const MAX_CONJECTURE_N: usize = 6;
/// Slack for comparing exactly enumerated probabilities.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SbsMethod {
    Sequential,
    Clock,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbsDraw {
    /// Drawn indices in draw order.
    pub order: Vec<usize>,
    pub method: SbsMethod,
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::invalid("weights must be non-empty"));
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::invalid(format!(
            "weight {i} is {w}, expected a positive finite value"
        )));
    }
    Ok(())
}

/// The first `m` indices of a size-biased order, drawn one at a time.
pub fn draw_sequential(weights: &[f64], m: usize, seed: u64) -> Result<SbsDraw> {
    check_weights(weights)?;
    if m == 0 || m > weights.len() {
        return Err(Error::invalid(format!("m = {m} outside 1..={}", weights.len())));
    }
    let mut rng = substream(seed, &[tag::SEQUENTIAL]);
    let mut tree = WeightedFenwick::new(weights);
    let order = (0..m).map(|_| tree.take(&mut rng).expect("m <= n")).collect();
    Ok(SbsDraw {
        order,
        method: SbsMethod::Sequential,
    })
}

/// Ring times and the counting processes `N(x)` and `X(x)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockTrace {
    pub times: Vec<f64>,
    pub grid: Vec<f64>,
    /// `N(x)`: number of clocks rung by `x`.
    pub counts: Vec<usize>,
    /// `X(x)`: total weight of clocks rung by `x`.
    pub sums: Vec<f64>,
}

impl ClockTrace {
    /// Checks `X(x) = sum_{k <= N(x)} w_{v'(k)}` at every grid point. Both
    /// sides are correctly rounded sums, so equality is exact.
    pub fn identity_holds(&self, weights: &[f64], draw: &SbsDraw) -> bool {
        self.counts
            .iter()
            .zip(&self.sums)
            .all(|(&count, &sum)| exact_sum(draw.order[..count].iter().map(|&k| weights[k])) == sum)
    }
}

/// Full size-biased order from exponential clocks, together with `N` and `X`
/// evaluated on `grid`.
pub fn draw_clock(weights: &[f64], seed: u64, grid: &[f64]) -> Result<(SbsDraw, ClockTrace)> {
    check_weights(weights)?;
    let ell = exact_sum(weights.iter().copied());
    let mut rng = substream(seed, &[tag::CLOCK]);
    let times: Vec<f64> = weights.iter().map(|&w| -open_unit(&mut rng).ln() * ell / w).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]).then(a.cmp(&b)));
    let counts: Vec<usize> = grid
        .iter()
        .map(|&x| times.iter().filter(|&&t| t <= x).count())
        .collect();
    let sums = grid
        .iter()
        .map(|&x| exact_sum(times.iter().zip(weights).filter(|(&t, _)| t <= x).map(|(_, &w)| w)))
        .collect();
    Ok((
        SbsDraw {
            order,
            method: SbsMethod::Clock,
        },
        ClockTrace {
            times,
            grid: grid.to_vec(),
            counts,
            sums,
        },
    ))
}

/// Empirical `E[w_{v(l)}]` for `l = 1..=l_max` with the leading-order
/// prediction `1 + (l / ell)(1 - C)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCurve {
    pub rounds: usize,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub prediction: Vec<f64>,
}

impl MeanCurve {
    pub fn l_max(&self) -> usize {
        self.mean.len()
    }

    /// CSV `l,empirical_mean,stderr,prediction`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["l", "empirical_mean", "stderr", "prediction"])
            .map_err(csv_err)?;
        for l in 0..self.l_max() {
            w.write_record([
                (l + 1).to_string(),
                self.mean[l].to_string(),
                self.stderr[l].to_string(),
                self.prediction[l].to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Rounds per work unit; fixed so results do not depend on the thread count.
const ROUND_CHUNK: usize = 64;

/// `1 + (l / ell)(1 - C)` for `l = 1..=l_max`.
pub fn mean_curve_prediction(wv: &WeightVector, l_max: usize) -> Vec<f64> {
    let slope = (1.0 - wv.c_hat()) / wv.ell();
    (1..=l_max).map(|l| 1.0 + l as f64 * slope).collect()
}

pub fn mean_curve(wv: &WeightVector, l_max: usize, rounds: usize, seed: u64) -> Result<MeanCurve> {
    if l_max == 0 || l_max > wv.n() {
        return Err(Error::invalid(format!("l_max = {l_max} outside 1..={}", wv.n())));
    }
    if rounds < 2 {
        return Err(Error::invalid("mean_curve needs at least 2 rounds"));
    }
    let template = WeightedFenwick::new(wv.weights());
    let w = wv.weights();
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..rounds.div_ceil(ROUND_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; l_max];
            let mut sq = vec![0.0; l_max];
            for r in c * ROUND_CHUNK..((c + 1) * ROUND_CHUNK).min(rounds) {
                let mut rng = substream(seed, &[tag::MEAN_CURVE, r as u64]);
                let mut tree = template.clone();
                for l in 0..l_max {
                    let x = w[tree.take(&mut rng).expect("l_max <= n")];
                    sum[l] += x;
                    sq[l] += x * x;
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; l_max];
    let mut sq = vec![0.0; l_max];
    for (s, q) in &chunks {
        for l in 0..l_max {
            sum[l] += s[l];
            sq[l] += q[l];
        }
    }
    let r = rounds as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / r).collect();
    let stderr = sq
        .iter()
        .zip(&mean)
        .map(|(q, m)| ((q - r * m * m).max(0.0) / (r - 1.0) / r).sqrt())
        .collect();
    Ok(MeanCurve {
        rounds,
        mean,
        stderr,
        prediction: mean_curve_prediction(wv, l_max),
    })
}

/// Every order of `0..n` with its size-biased probability
/// `prod_i w_{s(i)} / (w_{s(i)} + ... + w_{s(n)})`.
pub fn enumerate_orders(weights: &[f64]) -> Result<Vec<(Vec<usize>, f64)>> {
    check_weights(weights)?;
    let n = weights.len();
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge {
            what: "exact enumeration",
            n,
            limit: MAX_ENUMERATION_N,
            hint: "",
        });
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(w: &[f64], prefix: &mut Vec<usize>, used: &mut [bool], prob: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if prefix.len() == w.len() {
            out.push((prefix.clone(), prob));
            return;
        }
        let rest = exact_sum((0..w.len()).filter(|&k| !used[k]).map(|k| w[k]));
        for j in 0..w.len() {
            if !used[j] {
                used[j] = true;
                prefix.push(j);
                rec(w, prefix, used, prob * w[j] / rest, out);
                prefix.pop();
                used[j] = false;
            }
        }
    }
    rec(weights, &mut prefix, &mut used, 1.0, &mut out);
    Ok(out)
}

/// Exact expectation of `statistic(order)` under size-biased sampling.
pub fn enumerate_exact(weights: &[f64], statistic: impl Fn(&[usize]) -> f64) -> Result<f64> {
    let orders = enumerate_orders(weights)?;
    Ok(exact_sum(orders.iter().map(|(o, p)| p * statistic(o))))
}

/// `marginals[u][j] = P(v(u + 1) = j)`.
pub fn exact_marginals(weights: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = weights.len();
    let orders = enumerate_orders(weights)?;
    let mut m = vec![vec![0.0; n]; n];
    for (o, p) in &orders {
        for (u, &j) in o.iter().enumerate() {
            m[u][j] += p;
        }
    }
    Ok(m)
}

/// The capped weights `min(w, cap)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedWeightView {
    pub cap: f64,
}

impl TruncatedWeightView {
    pub fn new(cap: f64) -> Result<Self> {
        if cap.is_nan() || cap <= 0.0 {
            return Err(Error::invalid(format!("cap must be positive, got {cap}")));
        }
        Ok(Self { cap })
    }

    pub fn apply(&self, w: f64) -> f64 {
        w.min(self.cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub weights: Vec<f64>,
    pub cap: f64,
    pub thresholds: Vec<f64>,
    /// `survival[u][t] = P(min(w_{v(u+1)}, cap) >= thresholds[t])`.
    pub survival: Vec<Vec<f64>>,
    /// Largest increase of a survival value from one step to the next.
    pub max_violation: f64,
    pub holds: bool,
}

/// Whether `P(min(w_{v(u)}, cap) >= x)` is non-increasing in `u` for every
/// threshold `x`, computed exactly.
pub fn check_monotonicity(weights: &[f64], cap: f64) -> Result<MonotonicityReport> {
    let view = TruncatedWeightView::new(cap)?;
    let marg = exact_marginals(weights)?;
    let capped: Vec<f64> = weights.iter().map(|&w| view.apply(w)).collect();
    let thresholds: Vec<f64> = distinct_sorted(&capped);
    let survival: Vec<Vec<f64>> = marg
        .iter()
        .map(|row| {
            thresholds
                .iter()
                .map(|&x| exact_sum((0..weights.len()).filter(|&j| capped[j] >= x).map(|j| row[j])))
                .collect()
        })
        .collect();
    let mut max_violation = 0.0f64;
    for pair in survival.windows(2) {
        for (hi, lo) in pair[1].iter().zip(&pair[0]) {
            max_violation = max_violation.max(hi - lo);
        }
    }
    Ok(MonotonicityReport {
        weights: weights.to_vec(),
        cap,
        thresholds,
        survival,
        max_violation,
        holds: max_violation <= EXACT_TOL,
    })
}

fn distinct_sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjectureKind {
    /// `P(|S_V - E S_V| >= x) <= P(|S_J - E S_J| >= x)` for window sums over
    /// `l..=m`, with `J` i.i.d. copies of `V(1)`.
    Concentration,
    /// As above with `J` i.i.d. copies of `V(l)`.
    ConcentrationMarginal,
    /// `P(a_{V(1)} >= x_1, ..) >= P(a_{V(2)} >= x_1, ..)` over `m` coordinates.
    OrderedShift,
    /// `P(a_{J(1)} >= x_1, ..) >= P(a_{V(1)} >= x_1, ..)` over `m` coordinates.
    OrderedReplacement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureRecord {
    pub kind: ConjectureKind,
    pub n: usize,
    pub weights: Vec<f64>,
    pub m: usize,
    /// Window start for the concentration kinds.
    pub l: Option<usize>,
    pub x: Vec<f64>,
    /// Side that should be the smaller one.
    pub smaller: f64,
    /// Side that should be the larger one.
    pub larger: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub records: Vec<ConjectureRecord>,
}

impl ConjectureReport {
    pub fn failures(&self) -> impl Iterator<Item = &ConjectureRecord> {
        self.records.iter().filter(|r| !r.holds)
    }

    /// Whether every record of `kind` with `m <= m_max` holds.
    pub fn holds_up_to(&self, kind: ConjectureKind, m_max: usize) -> bool {
        self.records
            .iter()
            .filter(|r| r.kind == kind && r.m <= m_max)
            .all(|r| r.holds)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &self.records).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// A finite law of window sums stored as `(value, probability)` pairs.
struct SumLaw(Vec<(f64, f64)>);

impl SumLaw {
    fn mean(&self) -> f64 {
        exact_sum(self.0.iter().map(|(v, p)| v * p))
    }

    /// Sorted absolute deviations from the mean with tail probabilities.
    fn deviations(&self) -> (Vec<f64>, Vec<f64>) {
        let mu = self.mean();
        let mut d: Vec<(f64, f64)> = self.0.iter().map(|(v, p)| ((v - mu).abs(), *p)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut tail = vec![0.0; d.len() + 1];
        for k in (0..d.len()).rev() {
            tail[k] = tail[k + 1] + d[k].1;
        }
        (d.into_iter().map(|x| x.0).collect(), tail)
    }
}

fn tail_at(devs: &(Vec<f64>, Vec<f64>), x: f64) -> f64 {
    // values within rounding of x count as reaching it
    let slack = EXACT_TOL * x.abs().max(1.0);
    let k = devs.0.partition_point(|&d| d < x - slack);
    devs.1[k]
}

/// Law of the sum of `k` i.i.d. draws from `marginal`.
fn iid_sum_law(weights: &[f64], marginal: &[f64], k: usize) -> SumLaw {
    let mut law = vec![(0.0, 1.0)];
    for _ in 0..k {
        let mut next = Vec::with_capacity(law.len() * weights.len());
        for &(v, p) in &law {
            for (j, &w) in weights.iter().enumerate() {
                if marginal[j] > 0.0 {
                    next.push((v + w, p * marginal[j]));
                }
            }
        }
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        // merge sums that differ only by rounding
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(next.len());
        for (v, p) in next {
            match merged.last_mut() {
                Some(last) if (v - last.0).abs() <= 1e-12 * v.abs().max(1.0) => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        law = merged;
    }
    SumLaw(law)
}

/// Survival `P(a_{s(off+1)} >= x_1, ..., a_{s(off+m)} >= x_m)` over a list of
/// weighted sequences.
fn joint_survival(seqs: &[(Vec<f64>, f64)], off: usize, x: &[f64]) -> f64 {
    exact_sum(
        seqs.iter()
            .filter(|(s, _)| x.iter().enumerate().all(|(k, &xk)| s[off + k] >= xk))
            .map(|(_, p)| *p),
    )
}

fn threshold_vectors(grid: &[f64], m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                grid.iter().map(move |&x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Exact check of both sampling conjectures for every `m <= m_max`, with
/// `a = p = weights` (size-biased sampling).
pub fn check_conjectures(weights: &[f64], m_max: usize) -> Result<ConjectureReport> {
    check_weights(weights)?;
    let n = weights.len();
    if n > MAX_CONJECTURE_N {
        return Err(Error::TooLarge {
            what: "conjecture check",
            n,
            limit: MAX_CONJECTURE_N,
            hint: "",
        });
    }
    if m_max == 0 {
        return Err(Error::invalid("m_max must be at least 1"));
    }
    let orders = enumerate_orders(weights)?;
    let marg = exact_marginals(weights)?;
    let seqs: Vec<(Vec<f64>, f64)> = orders
        .iter()
        .map(|(o, p)| (o.iter().map(|&j| weights[j]).collect(), *p))
        .collect();
    let mut records = Vec::new();
    let rec = |kind, m, l, x: Vec<f64>, smaller: f64, larger: f64| ConjectureRecord {
        kind,
        n,
        weights: weights.to_vec(),
        m,
        l,
        x,
        smaller,
        larger,
        holds: smaller <= larger + EXACT_TOL,
    };

    for m in 1..=m_max.min(n) {
        for l in 1..=m {
            let v_law = SumLaw(
                seqs.iter()
                    .map(|(s, p)| (s[l - 1..m].iter().sum::<f64>(), *p))
                    .collect(),
            );
            let v_dev = v_law.deviations();
            for (kind, marginal) in [
                (ConjectureKind::Concentration, &marg[0]),
                (ConjectureKind::ConcentrationMarginal, &marg[l - 1]),
            ] {
                if kind == ConjectureKind::ConcentrationMarginal && l == 1 {
                    continue;
                }
                let j_dev = iid_sum_law(weights, marginal, m - l + 1).deviations();
                let mut grid: Vec<f64> = v_dev.0.iter().chain(&j_dev.0).copied().filter(|&x| x > 0.0).collect();
                grid.sort_by(f64::total_cmp);
                grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
                for x in grid {
                    records.push(rec(kind, m, Some(l), vec![x], tail_at(&v_dev, x), tail_at(&j_dev, x)));
                }
            }
        }
    }

    let grid = distinct_sorted(weights);
    let first: Vec<(f64, f64)> = (0..n).map(|j| (weights[j], marg[0][j])).collect();
    for m in 1..=m_max.min(n) {
        for x in threshold_vectors(&grid, m) {
            let v_joint = joint_survival(&seqs, 0, &x);
            let j_joint: f64 = x
                .iter()
                .map(|&xk| exact_sum(first.iter().filter(|(w, _)| *w >= xk).map(|(_, p)| *p)))
                .product();
            records.push(rec(
                ConjectureKind::OrderedReplacement,
                m,
                None,
                x.clone(),
                v_joint,
                j_joint,
            ));
            if m < n {
                let shifted = joint_survival(&seqs, 1, &x);
                records.push(rec(ConjectureKind::OrderedShift, m, None, x, shifted, v_joint));
            }
        }
    }
    Ok(ConjectureReport { records })
}

/// Random weights for exact sweeps: integers in `1..=max` divided by a
/// common denominator, so ties occur with positive probability.
pub fn random_rational_weights<R: Rng + ?Sized>(n: usize, max: u32, rng: &mut R) -> Vec<f64> {
    let den = rng.random_range(1..=4) as f64;
    (0..n).map(|_| rng.random_range(1..=max) as f64 / den).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, std_error};
    use crate::weights::generate_constant;

    const W123: [f64; 3] = [1.0, 2.0, 3.0];

    #[test]
    fn enumeration_hand_values() {
        let first = enumerate_exact(&W123, |o| W123[o[0]]).unwrap();
        assert!((first - 7.0 / 3.0).abs() < 1e-14);
        let second = enumerate_exact(&W123, |o| W123[o[1]]).unwrap();
        assert!((second - 2.1).abs() < 1e-14);
        let total = enumerate_exact(&[0.3, 1.7, 2.0, 5.5, 0.01], |_| 1.0).unwrap();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(enumerate_orders(&[1.0; 9]).is_err());
    }

    #[test]
    fn sequential_first_draw_and_errors() {
        let hits = (0..100_000u64)
            .filter(|&s| draw_sequential(&W123, 1, s).unwrap().order[0] == 2)
            .count() as f64;
        let sigma = (0.25f64 / 1e5).sqrt();
        assert!((hits / 1e5 - 0.5).abs() < 3.0 * sigma);
        assert!(draw_sequential(&W123, 4, 0).is_err());
        assert!(draw_sequential(&W123, 0, 0).is_err());
        assert!(draw_sequential(&[1.0, -1.0], 1, 0).is_err());
    }

    #[test]
    fn second_draw_mean() {
        let xs: Vec<f64> = (0..100_000u64)
            .map(|s| W123[draw_sequential(&W123, 2, s).unwrap().order[1]])
            .collect();
        assert!((mean(&xs) - 2.1).abs() < 3.0 * std_error(&xs));
    }

    #[test]
    fn clock_identity_and_monotone_counts() {
        let w = [0.5, 4.0, 1.25, 3.0, 3.0, 0.1];
        let grid: Vec<f64> = (0..40).map(|k| k as f64 * 0.4).collect();
        for seed in 0..500 {
            let (draw, trace) = draw_clock(&w, seed, &grid).unwrap();
            let mut sorted = draw.order.clone();
            sorted.sort();
            assert_eq!(sorted, (0..w.len()).collect::<Vec<_>>());
            assert!(trace.identity_holds(&w, &draw));
            assert!(trace.counts.windows(2).all(|p| p[0] <= p[1]));
            assert!(trace.sums.windows(2).all(|p| p[0] <= p[1]));
        }
    }

    #[test]
    fn clock_first_ring() {
        let reps = 100_000u64;
        let mut hits = [0usize; 3];
        for s in 0..reps {
            hits[draw_clock(&W123, s, &[]).unwrap().0.order[0]] += 1;
        }
        for k in 0..3 {
            let p = W123[k] / 6.0;
            let sigma = (p * (1.0 - p) / reps as f64).sqrt();
            assert!((hits[k] as f64 / reps as f64 - p).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn constant_mean_curve() {
        let wv = generate_constant(50, 1.0).unwrap();
        let c = mean_curve(&wv, 50, 10, 1).unwrap();
        assert!(c.mean.iter().all(|&m| m == 1.0));
        assert!(c.prediction.iter().all(|&m| m == 1.0));
        assert!(c.stderr.iter().all(|&s| s == 0.0));
        assert!(mean_curve(&wv, 51, 10, 1).is_err());
        assert!(mean_curve(&wv, 5, 1, 1).is_err());
    }

    #[test]
    fn small_mean_curve() {
        let wv = WeightVector::new(W123.to_vec()).unwrap();
        let c = mean_curve(&wv, 2, 40_000, 5).unwrap();
        assert!((c.mean[0] - 7.0 / 3.0).abs() < 3.0 * c.stderr[0]);
        assert!((c.mean[1] - 2.1).abs() < 3.0 * c.stderr[1]);
    }

    #[test]
    fn monotonicity_hand_case() {
        let r = check_monotonicity(&W123, f64::INFINITY).unwrap();
        assert!(r.holds);
        let at3 = r.thresholds.iter().position(|&x| x == 3.0).unwrap();
        assert!((r.survival[0][at3] - 0.5).abs() < 1e-14);
        assert!((r.survival[1][at3] - 0.35).abs() < 1e-14);
        let flat = check_monotonicity(&[2.0; 5], 1.0).unwrap();
        assert!(flat.holds);
        assert!(flat.survival.iter().flatten().all(|&p| (p - 1.0).abs() < 1e-12));
        assert!(check_monotonicity(&W123, 0.0).is_err());
    }

    #[test]
    fn conjectures_small_case() {
        let r = check_conjectures(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        for kind in [ConjectureKind::OrderedShift, ConjectureKind::OrderedReplacement] {
            assert!(r.holds_up_to(kind, 2), "{kind:?}");
        }
        assert!(r.records.iter().any(|x| x.kind == ConjectureKind::Concentration));
        assert!(check_conjectures(&[1.0; 7], 2).is_err());
    }

    #[test]
    fn truncated_view_is_monotone() {
        let v = TruncatedWeightView::new(2.5).unwrap();
        let xs = [0.1, 1.0, 2.5, 3.0, 100.0];
        assert!(xs.windows(2).all(|p| v.apply(p[0]) <= v.apply(p[1])));
        assert_eq!(v.apply(100.0), 2.5);
    }
}
