//! Subcommand bodies.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use critgraph_core::explorer::{largest_component, write_components_csv};
use critgraph_core::graphgen::{read_edge_list, SamplerOptions};
use critgraph_core::harness::{self, drift_experiment, drift_grid, regime_sweep};
use critgraph_core::rng::{derive_seed, substream, tag};
use critgraph_core::sbs::{
    check_conjectures, check_monotonicity, mean_curve as run_mean_curve, random_rational_weights, ConjectureKind,
    ConjectureReport, MAX_CONJECTURE_N, MAX_ENUMERATION_N,
};
use critgraph_core::{
    component_stats, critical_p, explore as run_explore, predict as run_predict, sample_fast, ExperimentConfig,
    GraphSample, ModelVariant, ParamKind, WeightSpec, WeightVector,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::overlay::{at_most_one, echo, given, load, merge, resolve};
use crate::{
    ConjectureArgs, DriftArgs, ExploreArgs, GenArgs, GraphFlags, MeanCurveArgs, MonotoneArgs, PredictArgs, SweepArgs,
    Usage, VerifyArgs,
};

const DEFAULT_OUT: &str = "critgraph-out";

fn default_weights() -> WeightSpec {
    WeightSpec::Pareto {
        scale: 2.0 / 3.0,
        shape: 4.0,
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| usage("--seed is required; every random choice is derived from it"))
}

fn out_dir(out: &Option<PathBuf>) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn build_weights(spec: &WeightSpec, n: Option<usize>, seed: Option<u64>) -> Result<WeightVector> {
    let needs_n = matches!(spec, WeightSpec::Pareto { .. } | WeightSpec::Constant { .. });
    if needs_n && n.is_none() {
        return Err(usage(format!("--n is required for weights {spec}")));
    }
    let seed = if spec.is_random() {
        require_seed(seed)?
    } else {
        seed.unwrap_or(0)
    };
    Ok(spec.build(n, seed)?)
}

/// Merges flags over the config, then splits off the keys named in `outer`
/// and returns them alongside the resolved graph flags.
fn resolve_split<O: Serialize + DeserializeOwned>(
    outer: &O,
    graph: &GraphFlags,
    config: Option<&Path>,
    outer_keys: &[&str],
) -> Result<(O, GraphFlags)> {
    let mut flags = given(graph)?;
    flags.extend(given(outer)?);
    let mut merged = merge(load(config)?, flags, &[&["f", "p"]]);
    at_most_one(&merged, &["f", "p"])?;
    let outer_map: Map<String, Value> = outer_keys
        .iter()
        .filter_map(|k| merged.remove(*k).map(|v| (k.to_string(), v)))
        .collect();
    Ok((resolve(outer_map)?, resolve(merged)?))
}

fn echo_parts<A: Serialize, B: Serialize>(dir: &Path, a: &A, b: &B) -> Result<()> {
    let (Value::Object(mut m), Value::Object(rest)) = (serde_json::to_value(a)?, serde_json::to_value(b)?) else {
        unreachable!("argument structs serialize to objects")
    };
    m.extend(rest);
    echo(dir, &m)
}

fn edge_p(g: &GraphFlags, wv: &WeightVector) -> Result<f64> {
    match (g.f, g.p) {
        (Some(f), None) => Ok(critical_p(wv, f)?),
        (None, Some(p)) => Ok(p),
        (None, None) => Err(usage("one of --f or --p is required")),
        (Some(_), Some(_)) => Err(usage("--f and --p cannot be used together")),
    }
}

fn sampler_options(g: &GraphFlags) -> SamplerOptions {
    SamplerOptions {
        strict: !g.lenient,
        ..Default::default()
    }
}

/// Weights and a sampled graph; the graph stream is split off the master seed.
fn sample_from_flags(g: &GraphFlags) -> Result<(WeightVector, GraphSample, u64)> {
    let seed = require_seed(g.seed)?;
    let wv = build_weights(&g.weights.clone().unwrap_or_else(default_weights), g.n, Some(seed))?;
    let p = edge_p(g, &wv)?;
    let model = g.model.unwrap_or(ModelVariant::Poisson);
    let graph = sample_fast(&wv, p, model, derive_seed(seed, &[tag::GRAPH]), &sampler_options(g))?;
    Ok((wv, graph, seed))
}

pub fn gen(a: GenArgs, config: Option<&Path>) -> Result<()> {
    let (outer, g) = resolve_split(&a, &a.graph, config, &["out"])?;
    let (wv, graph, _) = sample_from_flags(&g)?;
    let dir = out_dir(&outer.out);
    echo_parts(&dir, &outer, &g)?;
    wv.write(dir.join("weights.txt"))?;
    graph.write_edge_list(dir.join("edges.csv"))?;
    println!(
        "n = {}, ell = {:.6}, c_hat = {:.6}, p = {:.6e}, m = {}",
        wv.n(),
        wv.ell(),
        wv.c_hat(),
        graph.p(),
        graph.edge_count()
    );
    Ok(())
}

fn load_graph(path: &Path, g: &GraphFlags) -> Result<(WeightVector, GraphSample, u64)> {
    let seed = require_seed(g.seed)?;
    let records = read_edge_list(path)?;
    let n_edges = records.iter().map(|r| r.u.max(r.v) + 1).max().unwrap_or(0);
    let n = g.n.unwrap_or(n_edges).max(n_edges);
    let spec = g.weights.clone().unwrap_or(WeightSpec::Constant { c: 1.0 });
    let wv = build_weights(&spec, Some(n), Some(seed))?;
    let p = if g.f.is_some() || g.p.is_some() {
        edge_p(g, &wv)?
    } else {
        records
            .iter()
            .filter_map(|r| r.capacity)
            .reduce(f64::max)
            .unwrap_or(f64::INFINITY)
    };
    let graph = GraphSample::from_records(wv.n(), p, g.model.unwrap_or(ModelVariant::Poisson), &records, seed)?;
    Ok((wv, graph, seed))
}

pub fn explore(a: ExploreArgs, config: Option<&Path>) -> Result<()> {
    let (outer, g) = resolve_split(&a, &a.graph, config, &["graph_file", "rescale", "out"])?;
    let (wv, graph, seed) = match &outer.graph_file {
        Some(path) => load_graph(path, &g)?,
        None => sample_from_flags(&g)?,
    };
    let trace = run_explore(&graph, &wv, seed)?;
    let stats = component_stats(&trace, &graph, &wv)?;
    let dir = out_dir(&outer.out);
    echo_parts(&dir, &outer, &g)?;
    trace.write_jsonl(dir.join("trace.jsonl"))?;
    write_components_csv(&stats, dir.join("components.csv"))?;
    if outer.rescale {
        trace.write_rescaled_csv(dir.join("rescaled.csv"))?;
    }
    let (idx, c1) = largest_component(&stats).ok_or_else(|| anyhow!("graph has no vertices"))?;
    println!(
        "n = {}, m = {}, components = {}, largest = #{idx} (size {}, weight {:.4}, surplus {}), max L = {}",
        graph.n(),
        graph.edge_count(),
        stats.len(),
        c1.size,
        c1.weight,
        c1.surplus,
        trace.max_l()
    );
    Ok(())
}

pub fn verify(a: VerifyArgs, config: Option<&Path>) -> Result<()> {
    let mut flags = given(&a)?;
    let lists = [
        (ParamKind::F, &a.f_list),
        (ParamKind::P, &a.p_list),
        (ParamKind::C, &a.c_list),
    ];
    if let Some((kind, Some(values))) = lists.into_iter().find(|(_, v)| v.is_some()) {
        flags.insert("param".into(), serde_json::to_value(kind)?);
        flags.insert("values".into(), serde_json::to_value(values)?);
    }
    if a.lenient {
        flags.insert("strict".into(), Value::Bool(false));
    }
    let mut merged = merge(load(config)?, flags, &[]);
    if !merged.contains_key("seed") {
        return Err(usage("--seed is required; every random choice is derived from it"));
    }
    merged
        .entry("out_dir")
        .or_insert_with(|| Value::String(DEFAULT_OUT.into()));
    let cfg: ExperimentConfig = resolve(merged)?;
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let dir = cfg.out_dir.clone().expect("out_dir defaulted above");
    echo(&dir, &cfg)?;
    let report = harness::run(&cfg)?;
    report.write(&dir)?;
    println!(
        "n = {}, ell = {:.4}, c_hat = {:.4}, reps = {}",
        report.n, report.ell, report.c_hat, cfg.reps
    );
    for agg in &report.aggregates {
        let window = agg
            .events
            .get(&harness::EventId::GiantWindow)
            .map(|e| format!("{:.3}", e.frequency))
            .unwrap_or_else(|| "-".into());
        println!(
            "{} = {}: mean |C1| {:.1} (sd {:.1}), median surplus {}, giant in window {window}",
            match cfg.param {
                ParamKind::F => "f",
                ParamKind::P => "p",
                ParamKind::C => "c",
            },
            agg.value,
            agg.mean_c1_size,
            agg.sd_c1_size,
            agg.median_c1_surplus
        );
    }
    Ok(())
}

fn resolve_flat<T: Serialize + DeserializeOwned>(a: &T, config: Option<&Path>) -> Result<T> {
    resolve(merge(load(config)?, given(a)?, &[]))
}

pub fn mean_curve(a: MeanCurveArgs, config: Option<&Path>) -> Result<()> {
    let a = resolve_flat(&a, config)?;
    let seed = require_seed(a.seed)?;
    let wv = build_weights(&a.weights.clone().unwrap_or_else(default_weights), a.n, Some(seed))?;
    let l_max = a.l_max.unwrap_or((wv.n() / 10).max(1));
    if l_max == 0 || l_max > wv.n() {
        return Err(usage(format!("--l-max must lie in 1..={}", wv.n())));
    }
    let rounds = a.rounds.unwrap_or(10_000);
    let curve = run_mean_curve(&wv, l_max, rounds, seed)?;
    let dir = out_dir(&a.out);
    echo(&dir, &a)?;
    curve.write_csv(dir.join("mean_curve.csv"))?;
    println!(
        "n = {}, rounds = {rounds}, mean at l = 1: {:.4} (prediction {:.4}), at l = {l_max}: {:.4} (prediction {:.4})",
        wv.n(),
        curve.mean[0],
        curve.prediction[0],
        curve.mean[l_max - 1],
        curve.prediction[l_max - 1]
    );
    Ok(())
}

fn exact_size_check(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(usage(format!("exact enumeration supports n <= {limit}, got {n}")));
    }
    if n == 0 {
        return Err(usage("need at least one weight"));
    }
    Ok(())
}

pub fn conjecture(a: ConjectureArgs, config: Option<&Path>) -> Result<()> {
    let a = resolve_flat(&a, config)?;
    let m_max = a.m_max.unwrap_or(2);
    let vectors: Vec<Vec<f64>> = match (&a.weights, a.trials) {
        (Some(_), Some(_)) => return Err(usage("--weights and --trials cannot be used together")),
        (Some(w), None) => vec![w.clone()],
        (None, trials) => {
            let n = a.n.ok_or_else(|| usage("one of --n or --weights is required"))?;
            exact_size_check(n.min(MAX_ENUMERATION_N + 1), MAX_ENUMERATION_N)?;
            match trials {
                None => vec![(1..=n).map(|i| i as f64).collect()],
                Some(t) => {
                    let mut rng = substream(require_seed(a.seed)?, &[tag::WEIGHTS]);
                    let max = a.max_weight.unwrap_or(10);
                    (0..t).map(|_| random_rational_weights(n, max, &mut rng)).collect()
                }
            }
        }
    };
    let mut report = ConjectureReport::default();
    for w in &vectors {
        exact_size_check(w.len(), MAX_CONJECTURE_N)?;
        if m_max == 0 || m_max > w.len() {
            return Err(usage(format!("--m-max must lie in 1..={}", w.len())));
        }
        report.records.extend(check_conjectures(w, m_max)?.records);
    }
    let dir = out_dir(&a.out);
    echo(&dir, &a)?;
    report.write_json(dir.join("conjecture.json"))?;
    let count = |kinds: &[ConjectureKind]| report.failures().filter(|r| kinds.contains(&r.kind)).count();
    let ordered = [ConjectureKind::OrderedShift, ConjectureKind::OrderedReplacement];
    println!(
        "{} vector(s), {} comparisons up to m = {m_max}; failures: ordered {}, concentration {}; ordered inequalities hold for m <= 2: {}",
        vectors.len(),
        report.records.len(),
        count(&ordered),
        count(&[ConjectureKind::Concentration, ConjectureKind::ConcentrationMarginal]),
        ordered.into_iter().all(|k| report.holds_up_to(k, 2))
    );
    Ok(())
}

/// Every distinct weight and each midpoint between consecutive ones.
fn default_caps(w: &[f64]) -> Vec<f64> {
    let mut v = w.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mids: Vec<f64> = v.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    v.extend(mids);
    v.sort_by(f64::total_cmp);
    v
}

pub fn monotone(a: MonotoneArgs, config: Option<&Path>) -> Result<()> {
    let a = resolve_flat(&a, config)?;
    let w = a.weights.clone().ok_or_else(|| usage("--weights is required"))?;
    exact_size_check(w.len(), MAX_ENUMERATION_N)?;
    let caps = a.cap.map(|c| vec![c]).unwrap_or_else(|| default_caps(&w));
    let reports = caps
        .iter()
        .map(|&c| check_monotonicity(&w, c))
        .collect::<critgraph_core::Result<Vec<_>>>()?;
    let dir = out_dir(&a.out);
    echo(&dir, &a)?;
    let path = dir.join("monotone.json");
    fs::write(&path, serde_json::to_string_pretty(&reports)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    let worst = reports
        .iter()
        .map(|r| r.max_violation)
        .fold(f64::NEG_INFINITY, f64::max);
    if reports.iter().all(|r| r.holds) {
        println!("pass: {} cap(s), largest survival increase {worst:.3e}", reports.len());
        Ok(())
    } else {
        println!("fail: largest survival increase {worst:.3e}");
        Err(anyhow!("capped draws are not stochastically decreasing"))
    }
}

pub fn predict(a: PredictArgs, config: Option<&Path>) -> Result<()> {
    let a = resolve_flat(&a, config)?;
    let f = a.f.ok_or_else(|| usage("--f is required"))?;
    let wv = build_weights(&a.weights.clone().unwrap_or_else(default_weights), a.n, a.seed)?;
    let prediction = run_predict(&wv, f, a.eps.unwrap_or(0.5), a.eps_prime.unwrap_or(0.4))?;
    let dir = out_dir(&a.out);
    echo(&dir, &a)?;
    let text = serde_json::to_string_pretty(&prediction)? + "\n";
    let path = dir.join("prediction.json");
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    print!("{text}");
    Ok(())
}

pub fn sweep(a: SweepArgs, config: Option<&Path>) -> Result<()> {
    let a = resolve_flat(&a, config)?;
    let seed = require_seed(a.seed)?;
    let n = a.n.unwrap_or(ExperimentConfig::default().n);
    let values = a.c_list.clone().unwrap_or_else(|| vec![0.8, 1.0, 1.2]);
    let report = regime_sweep(
        n,
        a.weights.clone().unwrap_or_else(default_weights),
        &values,
        a.reps.unwrap_or(20),
        seed,
        a.threads,
    )?;
    let dir = out_dir(&a.out);
    echo(&dir, &a)?;
    report.experiment.write(&dir)?;
    let path = dir.join("regime.json");
    fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    for pt in &report.points {
        println!(
            "c = {}: mean |C1|/n {:.4}, mean |C1|/n^(2/3) {:.3} (sd {:.3})",
            pt.c, pt.mean_c1_fraction, pt.mean_c1_scaled, pt.sd_c1_scaled
        );
    }
    println!("strictly increasing: {}", report.strictly_increasing);
    Ok(())
}

pub fn drift(a: DriftArgs, config: Option<&Path>) -> Result<()> {
    let a = resolve_flat(&a, config)?;
    let seed = require_seed(a.seed)?;
    let f = a.f.ok_or_else(|| usage("--f is required"))?;
    let wv = build_weights(&a.weights.clone().unwrap_or_else(default_weights), a.n, Some(seed))?;
    let grid = drift_grid(&wv, f, a.points.unwrap_or(20));
    let report = drift_experiment(
        &wv,
        a.model.unwrap_or(ModelVariant::Poisson),
        f,
        a.reps.unwrap_or(200),
        &grid,
        seed,
        a.threads,
    )?;
    let dir = out_dir(&a.out);
    echo(&dir, &a)?;
    let path = dir.join("drift.json");
    fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    let z = report.z_scores();
    let within = z.iter().filter(|z| z.abs() <= 3.0).count();
    println!(
        "f = {f}, reps = {}: {within}/{} grid points within 3 SE of the leading-order drift",
        report.reps,
        z.len()
    );
    Ok(())
}
