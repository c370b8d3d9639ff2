//! Breadth-first walk over a sampled graph.
//!
//! Step `i` (1-based) explores the `i`-th discovered vertex `v(i)`. Its
//! undiscovered neighbours become its children, discovered in increasing
//! order of edge capacity. When the queue is empty a fresh root is drawn
//! among undiscovered vertices with probability proportional to weight.
//!
//! With `c(i)` the number of children,
//! `L'_i = L'_{i-1} + c(i) - 1` and `L_i = max(L_{i-1} + c(i) - 1, 1)`,
//! both started at 1. A component is finished exactly when `L'` reaches a
//! strict new minimum.

use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fenwick::WeightedFenwick;
use crate::graphgen::GraphSample;
use crate::rng::{substream, tag};
use crate::stats::KahanSum;
use crate::weights::WeightVector;

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationTrace {
    /// `order[i - 1] = v(i)`.
    pub order: Vec<usize>,
    /// Inverse of `order`: `position[v(i)] = i`.
    pub position: Vec<usize>,
    /// BFW parent; `None` for component roots.
    pub parent: Vec<Option<usize>>,
    /// `children[i - 1] = c(i)`.
    pub children: Vec<usize>,
    /// `L'_0 ..= L'_n`.
    pub lprime: Vec<i64>,
    /// `L_0 ..= L_n`.
    pub l: Vec<i64>,
    /// `Z_i = L_i - L'_i`.
    pub z: Vec<i64>,
    /// Inclusive step intervals `(start, end)` of each component.
    pub component_bounds: Vec<(usize, usize)>,
    /// Non-tree edges as pairs of order positions `(i, j)`, `i < j`, recorded
    /// when `v(i)` is explored and `v(j)` is already queued.
    pub surplus_edges: Vec<(usize, usize)>,
}

impl ExplorationTrace {
    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn component_count(&self) -> usize {
        self.component_bounds.len()
    }

    pub fn max_l(&self) -> i64 {
        self.l.iter().copied().max().unwrap_or(1)
    }

    /// Parent-child pairs of the BFW forest.
    pub fn forest_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(v, p)| p.map(|p| (p, v)))
    }

    /// `(i / n^{2/3}, L_i / n^{1/3})` for plotting.
    pub fn rescaled(&self) -> Vec<(f64, f64)> {
        let n = self.n() as f64;
        let (t, s) = (n.powf(2.0 / 3.0), n.cbrt());
        self.l
            .iter()
            .enumerate()
            .map(|(i, &l)| (i as f64 / t, l as f64 / s))
            .collect()
    }

    /// One JSON object per step: `{i, v, c, lprime, l}`.
    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        #[derive(Serialize)]
        struct Step {
            i: usize,
            v: usize,
            c: usize,
            lprime: i64,
            l: i64,
        }
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for i in 1..=self.n() {
            let step = Step {
                i,
                v: self.order[i - 1],
                c: self.children[i - 1],
                lprime: self.lprime[i],
                l: self.l[i],
            };
            serde_json::to_writer(&mut out, &step).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// CSV `t,l` of the rescaled reflected walk.
    pub fn write_rescaled_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["t", "l"]).map_err(csv_err)?;
        for (t, l) in self.rescaled() {
            w.write_record([t.to_string(), l.to_string()]).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Runs the breadth-first walk. Roots are drawn from the substream
/// `(seed, EXPLORE)`.
pub fn explore(g: &GraphSample, wv: &WeightVector, seed: u64) -> Result<ExplorationTrace> {
    let n = g.n();
    if n != wv.n() {
        return Err(Error::SizeMismatch {
            graph: n,
            weights: wv.n(),
        });
    }
    let mut rng = substream(seed, &[tag::EXPLORE]);
    let mut roots = WeightedFenwick::new(wv.weights());
    let mut order = Vec::with_capacity(n);
    let mut position = vec![0usize; n];
    let mut parent = vec![None; n];
    let mut children = Vec::with_capacity(n);
    let mut lprime = Vec::with_capacity(n + 1);
    let mut l = Vec::with_capacity(n + 1);
    let mut bounds = Vec::new();
    let mut surplus = Vec::new();
    let mut batch: Vec<(f64, usize)> = Vec::new();
    lprime.push(1i64);
    l.push(1i64);
    let mut start = 1;

    for i in 1..=n {
        if order.len() < i {
            let root = roots
                .take(&mut rng)
                .ok_or_else(|| Error::Internal("root pool exhausted early".into()))?;
            order.push(root);
            position[root] = i;
            start = i;
        }
        let v = order[i - 1];
        batch.clear();
        for (&u, &key) in g.neighbors(v).iter().zip(g.keys(v)) {
            match position[u] {
                0 => batch.push((key, u)),
                j if j > i => surplus.push((i, j)),
                _ => {}
            }
        }
        batch.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, u) in &batch {
            order.push(u);
            position[u] = order.len();
            parent[u] = Some(v);
            roots.remove(u);
        }
        let c = batch.len();
        children.push(c);
        let step = c as i64 - 1;
        lprime.push(lprime[i - 1] + step);
        l.push((l[i - 1] + step).max(1));
        if order.len() == i {
            bounds.push((start, i));
        }
    }
    // surplus pairs were pushed in increasing i, but j order within a step
    // follows adjacency order; sort for a canonical listing
    surplus.sort_unstable();

    let z = l.iter().zip(&lprime).map(|(a, b)| a - b).collect();
    Ok(ExplorationTrace {
        order,
        position,
        parent,
        children,
        lprime,
        l,
        z,
        component_bounds: bounds,
        surplus_edges: surplus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentStats {
    pub size: usize,
    pub weight: f64,
    pub surplus: usize,
    pub start: usize,
    pub end: usize,
}

/// Per-component statistics in discovery order. The surplus is computed
/// from the adjacency and checked against the surplus edges seen by the
/// walk; a disagreement is reported as an internal error.
pub fn component_stats(trace: &ExplorationTrace, g: &GraphSample, wv: &WeightVector) -> Result<Vec<ComponentStats>> {
    if g.n() != wv.n() || trace.n() != g.n() {
        return Err(Error::SizeMismatch {
            graph: g.n(),
            weights: wv.n(),
        });
    }
    let mut out = Vec::with_capacity(trace.component_bounds.len());
    for &(start, end) in &trace.component_bounds {
        let mut weight = KahanSum::default();
        let mut degree_sum = 0usize;
        for &v in &trace.order[start - 1..end] {
            weight.add(wv.get(v));
            degree_sum += g.degree(v);
        }
        let size = end - start + 1;
        let internal = degree_sum / 2;
        let surplus = (internal + 1).checked_sub(size).ok_or_else(|| {
            Error::Internal(format!(
                "component at {start}..={end} has {internal} edges for {size} vertices"
            ))
        })?;
        let lo = trace.surplus_edges.partition_point(|e| e.0 < start);
        let hi = trace.surplus_edges.partition_point(|e| e.0 <= end);
        if hi - lo != surplus {
            return Err(Error::Internal(format!(
                "component at {start}..={end}: surplus {surplus} from edges, {} seen by the walk",
                hi - lo
            )));
        }
        out.push(ComponentStats {
            size,
            weight: weight.value(),
            surplus,
            start,
            end,
        });
    }
    Ok(out)
}

/// The naive exploration walk `L^0`: at step `i` it moves by the number of
/// neighbours of `v(i)` discovered after step `i`, minus one. It counts the
/// surplus edges that `L'` ignores, so `L^0 >= L'`.
pub fn l0_trace(trace: &ExplorationTrace, g: &GraphSample) -> Vec<i64> {
    let mut out = Vec::with_capacity(trace.n() + 1);
    out.push(1i64);
    for (idx, &v) in trace.order.iter().enumerate() {
        let i = idx + 1;
        let later = g.neighbors(v).iter().filter(|&&u| trace.position[u] > i).count();
        out.push(out[idx] + later as i64 - 1);
    }
    out
}

/// The largest component, ties going to the earliest discovered.
pub fn largest_component(stats: &[ComponentStats]) -> Option<(usize, &ComponentStats)> {
    stats
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &ComponentStats)>, (i, c)| match best {
            Some((_, b)) if b.size >= c.size => best,
            _ => Some((i, c)),
        })
}

/// CSV `component_id,size,weight,surplus,start,end`.
pub fn write_components_csv(stats: &[ComponentStats], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["component_id", "size", "weight", "surplus", "start", "end"])
        .map_err(csv_err)?;
    for (id, c) in stats.iter().enumerate() {
        w.write_record([
            id.to_string(),
            c.size.to_string(),
            c.weight.to_string(),
            c.surplus.to_string(),
            c.start.to_string(),
            c.end.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphgen::ModelVariant;
    use crate::weights::generate_constant;

    fn graph(n: usize, edges: &[(usize, usize)]) -> GraphSample {
        let e: Vec<_> = edges
            .iter()
            .enumerate()
            .map(|(k, &(u, v))| (u, v, 0.1 * (k + 1) as f64))
            .collect();
        GraphSample::from_edges(n, 1.0, ModelVariant::Poisson, &e).unwrap()
    }

    #[test]
    fn triangle() {
        let g = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        let w = generate_constant(3, 1.0).unwrap();
        for seed in 0..20 {
            let t = explore(&g, &w, seed).unwrap();
            assert_eq!(t.children, vec![2, 0, 0]);
            assert_eq!(t.lprime, vec![1, 2, 1, 0]);
            assert_eq!(t.component_bounds, vec![(1, 3)]);
            assert_eq!(t.surplus_edges, vec![(2, 3)]);
            let s = component_stats(&t, &g, &w).unwrap();
            assert_eq!(s.len(), 1);
            assert_eq!((s[0].size, s[0].surplus), (3, 1));
            assert_eq!(l0_trace(&t, &g), vec![1, 2, 2, 1]);
        }
    }

    #[test]
    fn path_shapes() {
        // 0 - 1 - 2
        let g = graph(3, &[(0, 1), (1, 2)]);
        let w = generate_constant(3, 1.0).unwrap();
        let (mut mid, mut leaf) = (false, false);
        for seed in 0..200 {
            let t = explore(&g, &w, seed).unwrap();
            if t.order[0] == 1 {
                assert_eq!(t.children, vec![2, 0, 0]);
                assert_eq!(t.lprime, vec![1, 2, 1, 0]);
                mid = true;
            } else {
                assert_eq!(t.children, vec![1, 1, 0]);
                assert_eq!(t.lprime, vec![1, 1, 1, 0]);
                leaf = true;
            }
            assert_eq!(component_stats(&t, &g, &w).unwrap()[0].surplus, 0);
            assert_eq!(l0_trace(&t, &g), t.lprime);
        }
        assert!(mid && leaf);
    }

    #[test]
    fn empty_graph() {
        let g = graph(4, &[]);
        let w = WeightVector::new(vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        let t = explore(&g, &w, 3).unwrap();
        assert_eq!(t.component_count(), 4);
        assert_eq!(t.children, vec![0; 4]);
        assert_eq!(t.lprime, vec![1, 0, -1, -2, -3]);
        assert_eq!(t.l, vec![1; 5]);
        assert_eq!(t.z, vec![0, 1, 2, 3, 4]);
        assert_eq!(l0_trace(&t, &g), vec![1, 0, -1, -2, -3]);
    }

    #[test]
    fn two_disjoint_edges() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        let w = generate_constant(4, 1.0).unwrap();
        let s = component_stats(&explore(&g, &w, 1).unwrap(), &g, &w).unwrap();
        assert_eq!(s.len(), 2);
        for c in &s {
            assert_eq!((c.size, c.weight, c.surplus), (2, 2.0, 0));
        }
    }

    #[test]
    fn children_follow_capacity_order() {
        let e = [(0, 1, 0.5), (0, 2, 0.1), (0, 3, 0.3)];
        let g = GraphSample::from_edges(4, 1.0, ModelVariant::Poisson, &e).unwrap();
        // vertex 0 dominates the root draw only sometimes; find a seed
        let w = generate_constant(4, 1.0).unwrap();
        let t = (0..100)
            .map(|s| explore(&g, &w, s).unwrap())
            .find(|t| t.order[0] == 0)
            .unwrap();
        assert_eq!(t.order, vec![0, 2, 3, 1]);
    }

    #[test]
    fn size_mismatch() {
        let g = graph(3, &[]);
        let w = generate_constant(4, 1.0).unwrap();
        assert!(matches!(explore(&g, &w, 0), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn largest_tie_rule() {
        let mk = |size| ComponentStats {
            size,
            weight: size as f64,
            surplus: 0,
            start: 0,
            end: 0,
        };
        let s = vec![mk(3), mk(3), mk(2)];
        assert_eq!(largest_component(&s).unwrap().0, 0);
        let s = vec![mk(1), mk(5), mk(2)];
        assert_eq!(largest_component(&s).unwrap().0, 1);
        assert_eq!(largest_component(&s[..1]).unwrap().0, 0);
        assert!(largest_component(&[]).is_none());
    }

    #[test]
    fn writers() {
        let g = graph(3, &[(0, 1), (0, 2), (1, 2)]);
        let w = generate_constant(3, 1.0).unwrap();
        let t = explore(&g, &w, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        t.write_jsonl(dir.path().join("t.jsonl")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["i"], 1);
        assert_eq!(first["c"], 2);
        assert_eq!(first["lprime"], 2);
        assert_eq!(text.lines().count(), 3);
        let s = component_stats(&t, &g, &w).unwrap();
        write_components_csv(&s, dir.path().join("c.csv")).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
        assert_eq!(csv, "component_id,size,weight,surplus,start,end\n0,3,3,1,1,3\n");
    }
}
