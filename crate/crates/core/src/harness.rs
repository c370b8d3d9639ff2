//! Seeded Monte Carlo experiments: sample, explore, summarise, aggregate.
//!
//! Replication `rep` of parameter index `k` uses the seed
//! `derive_seed(master, [REPLICATION, k, rep])`; the graph comes from
//! `derive_seed(rep_seed, [GRAPH])` and the exploration from `rep_seed`
//! itself. The weight vector is built once per experiment from the master
//! seed. Rows are collected in `(parameter, rep)` order, so reports do not
//! depend on the number of worker threads.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explorer::{component_stats, explore, l0_trace, largest_component, ComponentStats};
use crate::graphgen::{critical_p, p_for_c, sample_fast, GraphSample, ModelVariant, SamplerOptions};
use crate::rng::{derive_seed, tag};
use crate::stats::{linear_fit, mean, median, std_dev, std_error, wilson_interval, LinearFit, Z_95};
use crate::theory::{drift_curve, predict, Prediction};
use crate::weights::{WeightSpec, WeightVector};

/// Sub-tag selecting the rows that get an independent component recount.
const SPOT_CHECK: u64 = 0x5c;

/// How the swept values map to an edge parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    /// `p = critical_p(f)`.
    F,
    /// `p` given directly.
    P,
    /// `p = c / ell`.
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub weights: WeightSpec,
    pub model: ModelVariant,
    pub param: ParamKind,
    pub values: Vec<f64>,
    pub reps: usize,
    pub eps: f64,
    pub eps_prime: f64,
    pub seed: u64,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
    /// `K` in the surplus event `surplus(C1) <= K f^3 / C`.
    pub surplus_constant: f64,
    /// Factor applied to both small-component size bounds.
    pub small_factor: f64,
    /// `K` in the small-excess events `excess <= K f^eps`.
    pub excess_constant: f64,
    /// Fraction of rows whose components are recounted with union-find.
    pub spot_check_rate: f64,
    /// Record wall-clock time per replication (breaks byte-identical rows).
    pub timing: bool,
    pub strict: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            weights: WeightSpec::Pareto {
                scale: 2.0 / 3.0,
                shape: 4.0,
            },
            model: ModelVariant::Poisson,
            param: ParamKind::F,
            values: vec![4.0],
            reps: 5,
            eps: 0.5,
            eps_prime: 0.4,
            seed: 0,
            threads: None,
            surplus_constant: 20.0,
            small_factor: 3.0,
            excess_constant: 5.0,
            spot_check_rate: 0.01,
            timing: false,
            strict: true,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if self.values.is_empty() {
            return Err(Error::invalid("no parameter values given"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("parameter value {v} is not finite")));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.spot_check_rate) {
            return Err(Error::invalid("spot_check_rate must lie in [0, 1]"));
        }
        Ok(())
    }

    /// The weight vector shared by all replications.
    pub fn weight_vector(&self) -> Result<WeightVector> {
        self.weights.build(Some(self.n), self.seed)
    }

    fn p_for(&self, wv: &WeightVector, v: f64) -> Result<f64> {
        match self.param {
            ParamKind::F => critical_p(wv, v),
            ParamKind::P if v >= 0.0 => Ok(v),
            ParamKind::P => Err(Error::invalid(format!("p must be >= 0, got {v}"))),
            ParamKind::C => p_for_c(wv, v),
        }
    }
}

/// One replication. The `f` column holds the swept value, whatever its kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub f: f64,
    pub seed: u64,
    pub rep: usize,
    pub c1_size: usize,
    pub c1_weight: f64,
    pub c1_surplus: usize,
    pub c2_size: usize,
    pub pre_max_size: usize,
    pub post_max_size: usize,
    pub pre_excess_total: usize,
    pub post_excess_max: usize,
    pub n_components: usize,
    pub max_l: i64,
    pub ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventId {
    /// `|C1|` inside the giant size interval.
    GiantSize,
    /// `weight(C1)` inside the giant weight interval.
    GiantWeight,
    GiantWindow,
    /// `surplus(C1) <= K f^3 / C`.
    GiantSurplus,
    /// Components before C1 have size at most `factor ell^{2/3} / f^{1-eps}`.
    SmallBefore,
    /// Components after C1 have size at most `factor ell^{2/3} / f`.
    SmallAfter,
    SmallComponents,
    /// Total excess before C1 at most `K f^eps`.
    ExcessBefore,
    /// Largest excess after C1 at most `K f^eps`.
    ExcessAfter,
}

impl EventId {
    pub const ALL: [EventId; 9] = [
        EventId::GiantSize,
        EventId::GiantWeight,
        EventId::GiantWindow,
        EventId::GiantSurplus,
        EventId::SmallBefore,
        EventId::SmallAfter,
        EventId::SmallComponents,
        EventId::ExcessBefore,
        EventId::ExcessAfter,
    ];

    /// The power of `f` in the exponent of the failure bound, as a function
    /// of `eps`.
    pub fn decay_exponent(self, eps: f64) -> f64 {
        match self {
            EventId::GiantSize | EventId::GiantWeight | EventId::GiantWindow | EventId::GiantSurplus => 1.0,
            EventId::SmallBefore | EventId::SmallComponents => eps.min(0.5),
            EventId::SmallAfter | EventId::ExcessAfter => 0.5,
            EventId::ExcessBefore => eps / 2.0,
        }
    }

    fn holds(self, row: &ReplicationRow, pred: &Prediction, cfg: &ExperimentConfig) -> bool {
        let f = pred.f;
        match self {
            EventId::GiantSize => pred.size_in_window(row.c1_size as f64),
            EventId::GiantWeight => pred.weight_in_window(row.c1_weight),
            EventId::GiantWindow => {
                EventId::GiantSize.holds(row, pred, cfg) && EventId::GiantWeight.holds(row, pred, cfg)
            }
            EventId::GiantSurplus => row.c1_surplus as f64 <= cfg.surplus_constant * pred.surplus_scale / pred.c,
            EventId::SmallBefore => row.pre_max_size as f64 <= cfg.small_factor * pred.small_before_size,
            EventId::SmallAfter => row.post_max_size as f64 <= cfg.small_factor * pred.small_after_size,
            EventId::SmallComponents => {
                EventId::SmallBefore.holds(row, pred, cfg) && EventId::SmallAfter.holds(row, pred, cfg)
            }
            EventId::ExcessBefore => row.pre_excess_total as f64 <= cfg.excess_constant * f.powf(pred.eps),
            EventId::ExcessAfter => row.post_excess_max as f64 <= cfg.excess_constant * f.powf(pred.eps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSummary {
    pub successes: usize,
    pub trials: usize,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl EventSummary {
    fn new(successes: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z_95);
        Self {
            successes,
            trials,
            frequency: successes as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    pub fn failures(&self) -> usize {
        self.trials - self.successes
    }

    pub fn failure_frequency(&self) -> f64 {
        1.0 - self.frequency
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub value: f64,
    pub p: f64,
    pub reps: usize,
    pub mean_c1_size: f64,
    pub sd_c1_size: f64,
    pub median_c1_size: f64,
    /// `mean |C1| / n`.
    pub mean_c1_fraction: f64,
    /// `mean |C1| / n^{2/3}`.
    pub mean_c1_scaled: f64,
    pub mean_c1_weight: f64,
    pub median_c1_surplus: f64,
    pub mean_n_components: f64,
    pub mean_max_l: f64,
    /// Present for `f > 0` sweeps.
    pub prediction: Option<Prediction>,
    /// `median surplus(C1) / f^3`.
    pub median_surplus_over_f3: Option<f64>,
    pub events: BTreeMap<EventId, EventSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n: usize,
    pub ell: f64,
    pub c_hat: f64,
    #[serde(skip)]
    pub rows: Vec<ReplicationRow>,
    pub aggregates: Vec<Aggregate>,
    /// Regression of `ln median surplus(C1)` on `ln f` over the sweep.
    pub surplus_loglog: Option<LinearFit>,
    pub decay: BTreeMap<EventId, DecayFit>,
}

impl ExperimentReport {
    pub fn rows_for(&self, value: f64) -> impl Iterator<Item = &ReplicationRow> {
        self.rows.iter().filter(move |r| r.f == value)
    }

    pub fn write_rows_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        for row in &self.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        if self.rows.is_empty() {
            w.write_record(ROW_HEADER).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_aggregate_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }

    /// Writes `rows.csv` and `aggregate.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.write_rows_csv(dir.join("rows.csv"))?;
        self.write_aggregate_json(dir.join("aggregate.json"))
    }
}

pub const ROW_HEADER: [&str; 14] = [
    "f",
    "seed",
    "rep",
    "c1_size",
    "c1_weight",
    "c1_surplus",
    "c2_size",
    "pre_max_size",
    "post_max_size",
    "pre_excess_total",
    "post_excess_max",
    "n_components",
    "max_l",
    "ms",
];

pub(crate) fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::io::Write::write_all(&mut w, b"\n").map_err(|e| Error::io(path, e))
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build().map_err(|e| Error::Internal(format!("thread pool: {e}")))
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "non-string panic payload".into())
}

/// Runs `job` for every `(value index, rep)` pair on a pool of `threads`
/// workers, returning results in input order. A panic becomes an error
/// carrying the replication seed.
fn replicate_all<T: Send>(
    values: &[f64],
    reps: usize,
    master: u64,
    stream: u64,
    threads: Option<usize>,
    job: impl Fn(usize, usize, u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let jobs: Vec<(usize, usize)> = (0..values.len()).flat_map(|k| (0..reps).map(move |r| (k, r))).collect();
    let results: Vec<Result<T>> = pool(threads)?.install(|| {
        jobs.par_iter()
            .map(|&(k, rep)| {
                let seed = derive_seed(master, &[stream, k as u64, rep as u64]);
                catch_unwind(AssertUnwindSafe(|| job(k, rep, seed))).unwrap_or_else(|payload| {
                    Err(Error::Replication {
                        f: values[k],
                        rep,
                        seed,
                        message: panic_message(payload),
                    })
                })
            })
            .collect()
    });
    results.into_iter().collect()
}

fn spot_checked(seed: u64, rate: f64) -> bool {
    (derive_seed(seed, &[SPOT_CHECK]) >> 11) as f64 / (1u64 << 53) as f64 <= rate && rate > 0.0
}

/// Recounts components with union-find and compares `(size, surplus)`
/// multisets with the explorer's.
pub fn recount_components(g: &GraphSample, stats: &[ComponentStats]) -> Result<()> {
    let n = g.n();
    let mut uf = UnionFind::<usize>::new(n);
    for (u, v, _) in g.edges() {
        uf.union(u, v);
    }
    let mut size = vec![0usize; n];
    let mut edges = vec![0usize; n];
    for v in 0..n {
        size[uf.find(v)] += 1;
    }
    for (u, _, _) in g.edges() {
        edges[uf.find(u)] += 1;
    }
    let mut ours: Vec<(usize, usize)> = (0..n)
        .filter(|&r| size[r] > 0)
        .map(|r| (size[r], edges[r] + 1 - size[r]))
        .collect();
    let mut theirs: Vec<(usize, usize)> = stats.iter().map(|c| (c.size, c.surplus)).collect();
    ours.sort_unstable();
    theirs.sort_unstable();
    if ours != theirs {
        return Err(Error::Internal(
            "union-find recount disagrees with the exploration".into(),
        ));
    }
    Ok(())
}

fn one_replication(
    cfg: &ExperimentConfig,
    wv: &WeightVector,
    value: f64,
    p: f64,
    rep: usize,
    seed: u64,
) -> Result<ReplicationRow> {
    let t0 = Instant::now();
    let opts = SamplerOptions {
        strict: cfg.strict,
        ..Default::default()
    };
    let g = sample_fast(wv, p, cfg.model, derive_seed(seed, &[tag::GRAPH]), &opts)?;
    let trace = explore(&g, wv, seed)?;
    let stats = component_stats(&trace, &g, wv)?;

    let total: usize = stats.iter().map(|c| c.size).sum();
    let weight: f64 = stats.iter().map(|c| c.weight).sum();
    if total != wv.n() || (weight - wv.ell()).abs() > 1e-9 * wv.ell() {
        return Err(Error::Internal(format!(
            "conservation failed: sizes {total} vs n {}, weights {weight} vs ell {}",
            wv.n(),
            wv.ell()
        )));
    }
    if spot_checked(seed, cfg.spot_check_rate) {
        recount_components(&g, &stats)?;
    }

    let (li, c1) = largest_component(&stats).ok_or_else(|| Error::Internal("no components".into()))?;
    let (pre, post) = (&stats[..li], &stats[li + 1..]);
    let max_size = |cs: &[ComponentStats]| cs.iter().map(|c| c.size).max().unwrap_or(0);
    Ok(ReplicationRow {
        f: value,
        seed,
        rep,
        c1_size: c1.size,
        c1_weight: c1.weight,
        c1_surplus: c1.surplus,
        c2_size: max_size(pre).max(max_size(post)),
        pre_max_size: max_size(pre),
        post_max_size: max_size(post),
        pre_excess_total: pre.iter().map(|c| c.surplus).sum(),
        post_excess_max: post.iter().map(|c| c.surplus).max().unwrap_or(0),
        n_components: stats.len(),
        max_l: trace.max_l(),
        ms: cfg.timing.then(|| t0.elapsed().as_secs_f64() * 1e3),
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let wv = cfg.weight_vector()?;
    let ps: Vec<f64> = cfg.values.iter().map(|&v| cfg.p_for(&wv, v)).collect::<Result<_>>()?;
    let rows = replicate_all(
        &cfg.values,
        cfg.reps,
        cfg.seed,
        tag::REPLICATION,
        cfg.threads,
        |k, rep, seed| one_replication(cfg, &wv, cfg.values[k], ps[k], rep, seed),
    )?;
    let report = summarize(cfg, &wv, &ps, rows)?;
    if let Some(dir) = &cfg.out_dir {
        report.write(dir)?;
    }
    Ok(report)
}

fn summarize(
    cfg: &ExperimentConfig,
    wv: &WeightVector,
    ps: &[f64],
    rows: Vec<ReplicationRow>,
) -> Result<ExperimentReport> {
    let n = wv.n() as f64;
    let mut aggregates = Vec::with_capacity(cfg.values.len());
    for (k, chunk) in rows.chunks(cfg.reps).enumerate() {
        let value = cfg.values[k];
        let col = |g: fn(&ReplicationRow) -> f64| chunk.iter().map(g).collect::<Vec<f64>>();
        let sizes = col(|r| r.c1_size as f64);
        let surplus = col(|r| r.c1_surplus as f64);
        let prediction = match cfg.param {
            ParamKind::F if value > 0.0 => Some(predict(wv, value, cfg.eps, cfg.eps_prime)?),
            _ => None,
        };
        let mut events = BTreeMap::new();
        if let Some(pred) = &prediction {
            for id in EventId::ALL {
                let hits = chunk.iter().filter(|r| id.holds(r, pred, cfg)).count();
                events.insert(id, EventSummary::new(hits, chunk.len()));
            }
        }
        let median_surplus = median(&surplus);
        aggregates.push(Aggregate {
            value,
            p: ps[k],
            reps: chunk.len(),
            mean_c1_size: mean(&sizes),
            sd_c1_size: if chunk.len() > 1 { std_dev(&sizes) } else { 0.0 },
            median_c1_size: median(&sizes),
            mean_c1_fraction: mean(&sizes) / n,
            mean_c1_scaled: mean(&sizes) / n.powf(2.0 / 3.0),
            mean_c1_weight: mean(&col(|r| r.c1_weight)),
            median_c1_surplus: median_surplus,
            mean_n_components: mean(&col(|r| r.n_components as f64)),
            mean_max_l: mean(&col(|r| r.max_l as f64)),
            median_surplus_over_f3: prediction.map(|p| median_surplus / p.surplus_scale),
            prediction,
            events,
        });
    }

    let with_pred: Vec<&Aggregate> = aggregates.iter().filter(|a| a.prediction.is_some()).collect();
    let pos: Vec<&&Aggregate> = with_pred.iter().filter(|a| a.median_c1_surplus > 0.0).collect();
    let surplus_loglog = if pos.len() >= 2 {
        linear_fit(
            &pos.iter().map(|a| a.value.ln()).collect::<Vec<_>>(),
            &pos.iter().map(|a| a.median_c1_surplus.ln()).collect::<Vec<_>>(),
        )
    } else {
        None
    };
    let mut decay = BTreeMap::new();
    if with_pred.len() >= 3 {
        for id in EventId::ALL {
            let e = id.decay_exponent(cfg.eps);
            let x: Vec<f64> = with_pred.iter().map(|a| a.value.powf(e)).collect();
            let fail: Vec<usize> = with_pred.iter().map(|a| a.events[&id].failures()).collect();
            decay.insert(id, fit_decay(&x, &fail, cfg.reps)?);
        }
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        n: wv.n(),
        ell: wv.ell(),
        c_hat: wv.c_hat(),
        rows,
        aggregates,
        surplus_loglog,
        decay,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayStatus {
    /// Fitted slope is negative.
    Decaying,
    /// Fitted slope is zero or positive.
    NotDecaying,
    /// No failures at any point: consistent with decay, slope undetermined.
    Unresolvable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub status: DecayStatus,
    pub fit: Option<LinearFit>,
}

/// Regresses `ln(failures / R + 1 / (2R))` on `x`.
pub fn fit_decay(x: &[f64], failures: &[usize], reps: usize) -> Result<DecayFit> {
    if x.len() != failures.len() || x.len() < 3 {
        return Err(Error::invalid("decay fit needs at least 3 matching points"));
    }
    if reps == 0 || failures.iter().any(|&k| k > reps) {
        return Err(Error::invalid("failure counts must lie in 0..=reps"));
    }
    if failures.iter().all(|&k| k == 0) {
        return Ok(DecayFit {
            status: DecayStatus::Unresolvable,
            fit: None,
        });
    }
    let r = reps as f64;
    let freqs: Vec<f64> = failures.iter().map(|&k| k as f64 / r).collect();
    fit_decay_frequencies(x, &freqs, reps)
}

/// [`fit_decay`] on failure frequencies.
pub fn fit_decay_frequencies(x: &[f64], freqs: &[f64], reps: usize) -> Result<DecayFit> {
    let r = reps as f64;
    let y: Vec<f64> = freqs.iter().map(|&q| (q + 0.5 / r).ln()).collect();
    let fit = linear_fit(x, &y).ok_or_else(|| Error::invalid("degenerate decay fit"))?;
    Ok(DecayFit {
        status: if fit.slope < 0.0 {
            DecayStatus::Decaying
        } else {
            DecayStatus::NotDecaying
        },
        fit: Some(fit),
    })
}

/// Decay fit of one event across a report's sweep.
pub fn decay_fit(report: &ExperimentReport, event: EventId) -> Result<DecayFit> {
    let with_pred: Vec<&Aggregate> = report.aggregates.iter().filter(|a| a.prediction.is_some()).collect();
    let e = event.decay_exponent(report.config.eps);
    let x: Vec<f64> = with_pred.iter().map(|a| a.value.powf(e)).collect();
    let fail: Vec<usize> = with_pred.iter().map(|a| a.events[&event].failures()).collect();
    fit_decay(&x, &fail, report.config.reps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimePoint {
    pub c: f64,
    pub mean_c1_fraction: f64,
    pub mean_c1_scaled: f64,
    pub sd_c1_scaled: f64,
    pub mean_c1_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub n: usize,
    pub reps: usize,
    pub points: Vec<RegimePoint>,
    /// Mean `|C1|` strictly increasing in `c` (values taken in sorted order).
    pub strictly_increasing: bool,
    #[serde(skip)]
    pub experiment: ExperimentReport,
}

/// Sweep of `p = c / ell` across the phase transition.
pub fn regime_sweep(
    n: usize,
    weights: WeightSpec,
    c_values: &[f64],
    reps: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<RegimeReport> {
    let cfg = ExperimentConfig {
        n,
        weights,
        param: ParamKind::C,
        values: c_values.to_vec(),
        reps,
        seed,
        threads,
        ..Default::default()
    };
    let exp = run(&cfg)?;
    let nf = n as f64;
    let mut points: Vec<RegimePoint> = exp
        .aggregates
        .iter()
        .map(|a| {
            let scaled: Vec<f64> = exp
                .rows_for(a.value)
                .map(|r| r.c1_size as f64 / nf.powf(2.0 / 3.0))
                .collect();
            RegimePoint {
                c: a.value,
                mean_c1_fraction: a.mean_c1_fraction,
                mean_c1_scaled: a.mean_c1_scaled,
                sd_c1_scaled: if scaled.len() > 1 { std_dev(&scaled) } else { 0.0 },
                mean_c1_size: a.mean_c1_size,
            }
        })
        .collect();
    let mut sorted = points.clone();
    sorted.sort_by(|a, b| a.c.total_cmp(&b.c));
    let strictly_increasing = sorted.windows(2).all(|w| w[0].mean_c1_size < w[1].mean_c1_size);
    points.shrink_to_fit();
    Ok(RegimeReport {
        n,
        reps,
        points,
        strictly_increasing,
        experiment: exp,
    })
}

/// Mean of `L^0_m` over replications against the leading-order drift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub f: f64,
    pub reps: usize,
    pub grid: Vec<usize>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub prediction: Vec<f64>,
}

impl DriftReport {
    /// `|mean - prediction| / stderr` per grid point.
    pub fn z_scores(&self) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.stderr)
            .zip(&self.prediction)
            .map(|((m, s), p)| (m - p) / s)
            .collect()
    }
}

/// `points` evenly spaced grid values up to `3 f ell^{2/3} / C`, capped at `n`.
pub fn drift_grid(wv: &WeightVector, f: f64, points: usize) -> Vec<usize> {
    let top = 3.0 * f * wv.ell().powf(2.0 / 3.0) / wv.c_hat();
    let mut g: Vec<usize> = (1..=points)
        .map(|k| ((k as f64 * top / points as f64).round() as usize).clamp(1, wv.n()))
        .collect();
    g.dedup();
    g
}

pub fn drift_experiment(
    wv: &WeightVector,
    model: ModelVariant,
    f: f64,
    reps: usize,
    grid: &[usize],
    seed: u64,
    threads: Option<usize>,
) -> Result<DriftReport> {
    if reps < 2 {
        return Err(Error::invalid("drift experiment needs at least 2 replications"));
    }
    let prediction = drift_curve(wv, f, 0.0, 1.0, grid)?;
    let p = critical_p(wv, f)?;
    let samples = replicate_all(&[f], reps, seed, tag::DRIFT, threads, |_, _, rseed| {
        let g = sample_fast(
            wv,
            p,
            model,
            derive_seed(rseed, &[tag::GRAPH]),
            &SamplerOptions::default(),
        )?;
        let trace = explore(&g, wv, rseed)?;
        let l0 = l0_trace(&trace, &g);
        Ok(grid.iter().map(|&m| l0[m] as f64).collect::<Vec<f64>>())
    })?;
    let column = |j: usize| samples.iter().map(|s| s[j]).collect::<Vec<f64>>();
    Ok(DriftReport {
        f,
        reps,
        grid: grid.to_vec(),
        mean: (0..grid.len()).map(|j| mean(&column(j))).collect(),
        stderr: (0..grid.len()).map(|j| std_error(&column(j))).collect(),
        prediction,
    })
}
