//! Vertex weight vectors and the moment conditions they are checked against.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{open_unit, substream, tag};
use crate::stats::KahanSum;

/// Positive weights sorted in non-increasing order, with cached power sums.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
    ell: f64,
    s2: f64,
    s3: f64,
}

impl WeightVector {
    /// Validates and sorts `w` (stable, so equal weights keep their input order).
    pub fn new(mut w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::invalid("weight vector is empty"));
        }
        if let Some((i, x)) = w.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::invalid(format!(
                "weight #{i} = {x} is not a positive finite number"
            )));
        }
        w.sort_by(|a, b| b.total_cmp(a));
        let (mut s1, mut s2, mut s3) = (KahanSum::default(), KahanSum::default(), KahanSum::default());
        for &x in &w {
            s1.add(x);
            s2.add(x * x);
            s3.add(x * x * x);
        }
        Ok(Self {
            w,
            ell: s1.value(),
            s2: s2.value(),
            s3: s3.value(),
        })
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn get(&self, i: usize) -> f64 {
        self.w[i]
    }

    /// Total weight, written ℓ_n in the literature.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn s2(&self) -> f64 {
        self.s2
    }

    pub fn s3(&self) -> f64 {
        self.s3
    }

    pub fn w_max(&self) -> f64 {
        self.w[0]
    }

    /// Empirical `E[W^3]/E[W]`, the constant C of the critical window.
    pub fn c_hat(&self) -> f64 {
        self.s3 / self.ell
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.w
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::with_capacity(self.w.len() * 20);
        for x in &self.w {
            // `{}` prints the shortest representation that round-trips.
            out.push_str(&format!("{x}\n"));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// `n` i.i.d. Pareto(scale, shape) weights: density `shape * scale^shape / x^(shape+1)`
/// on `[scale, inf)`.
pub fn generate_pareto_iid(n: usize, scale: f64, shape: f64, seed: u64) -> Result<WeightVector> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid(format!("Pareto scale must be positive, got {scale}")));
    }
    if !(shape.is_finite() && shape > 3.0) {
        return Err(Error::invalid(format!(
            "Pareto shape must exceed 3 (finite third moment), got {shape}"
        )));
    }
    let mut rng = substream(seed, &[tag::WEIGHTS]);
    let inv = -1.0 / shape;
    let w = (0..n).map(|_| scale * open_unit(&mut rng).powf(inv)).collect();
    WeightVector::new(w)
}

pub fn generate_constant(n: usize, c: f64) -> Result<WeightVector> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    WeightVector::new(vec![c; n])
}

/// Reads one positive decimal per line. Blank lines are skipped.
pub fn load_weights(path: impl AsRef<Path>) -> Result<WeightVector> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut w = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let x: f64 = line
            .parse()
            .map_err(|_| parse_err(idx + 1, format!("cannot parse {line:?} as a number")))?;
        if !(x.is_finite() && x > 0.0) {
            return Err(parse_err(idx + 1, format!("weight {line} is not positive")));
        }
        w.push(x);
    }
    if w.is_empty() {
        return Err(parse_err(0, "no weights in file".into()));
    }
    WeightVector::new(w)
}

/// How to obtain a weight vector: `pareto:SCALE,SHAPE`, `const:C`,
/// `file:PATH` or a literal list `1,2,3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightSpec {
    Pareto { scale: f64, shape: f64 },
    Constant { c: f64 },
    File(PathBuf),
    List(Vec<f64>),
}

impl WeightSpec {
    /// Builds the vector; `n` is ignored for file and list specs.
    pub fn build(&self, n: Option<usize>, seed: u64) -> Result<WeightVector> {
        let need_n = || n.ok_or_else(|| Error::invalid(format!("weight spec {self} needs n")));
        match self {
            WeightSpec::Pareto { scale, shape } => generate_pareto_iid(need_n()?, *scale, *shape, seed),
            WeightSpec::Constant { c } => generate_constant(need_n()?, *c),
            WeightSpec::File(p) => load_weights(p),
            WeightSpec::List(v) => WeightVector::new(v.clone()),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, WeightSpec::Pareto { .. })
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Pareto { scale, shape } => write!(f, "pareto:{scale},{shape}"),
            WeightSpec::Constant { c } => write!(f, "const:{c}"),
            WeightSpec::File(p) => write!(f, "file:{}", p.display()),
            WeightSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::invalid(format!("weight spec {s:?}: {why}"));
        let nums = |body: &str| -> Result<Vec<f64>> {
            body.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad("expected numbers")))
                .collect()
        };
        if let Some(body) = s.strip_prefix("pareto:") {
            match nums(body)?.as_slice() {
                [scale, shape] => Ok(WeightSpec::Pareto {
                    scale: *scale,
                    shape: *shape,
                }),
                _ => Err(bad("expected pareto:SCALE,SHAPE")),
            }
        } else if let Some(body) = s.strip_prefix("const:") {
            match nums(body)?.as_slice() {
                [c] if *c > 0.0 => Ok(WeightSpec::Constant { c: *c }),
                _ => Err(bad("expected const:C with C > 0")),
            }
        } else if let Some(path) = s.strip_prefix("file:") {
            Ok(WeightSpec::File(PathBuf::from(path)))
        } else {
            Ok(WeightSpec::List(nums(s)?))
        }
    }
}

impl TryFrom<String> for WeightSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WeightSpec> for String {
    fn from(s: WeightSpec) -> String {
        s.to_string()
    }
}

/// Moments of the limiting weight law W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTargets {
    pub ew: f64,
    pub ew2: f64,
    pub ew3: f64,
}

impl MomentTargets {
    /// Moments of Pareto(scale, shape): `shape * scale^k / (shape - k)`.
    pub fn pareto(scale: f64, shape: f64) -> Self {
        let m = |k: f64| shape * scale.powf(k) / (shape - k);
        Self {
            ew: m(1.0),
            ew2: m(2.0),
            ew3: m(3.0),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            ew: c,
            ew2: c * c,
            ew3: c * c * c,
        }
    }
}

/// Multipliers for the `o(.)` terms of the moment conditions.
///
/// Items (iv) and (v) are checked at scale `n^{2/3}`, item (vi) at `sqrt(n)`
/// and item (vii) at `n^{1/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    pub iii: f64,
    pub iv: f64,
    pub v: f64,
    pub vi: f64,
    pub vii: f64,
}

impl ToleranceProfile {
    /// 2% of `E[W]` for item (iii), three empirical standard deviations of
    /// `W`, `W^2`, `W^3` for items (iv) to (vi), and 1 for item (vii).
    pub fn default_for(wv: &WeightVector, targets: &MomentTargets) -> Self {
        let n = wv.n() as f64;
        let sd = |k: i32, sum: f64| {
            let mean = sum / n;
            let mut acc = KahanSum::default();
            wv.weights().iter().for_each(|x| acc.add((x.powi(k) - mean).powi(2)));
            (acc.value() / (n - 1.0).max(1.0)).sqrt()
        };
        Self {
            iii: 0.02 * targets.ew,
            iv: 3.0 * sd(1, wv.ell()),
            v: 3.0 * sd(2, wv.s2()),
            vi: 3.0 * sd(3, wv.s3()),
            vii: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionItem {
    pub pass: bool,
    pub residual: f64,
    /// Absolute threshold the residual was compared with.
    pub tolerance: f64,
}

impl ConditionItem {
    fn check(residual: f64, tolerance: f64) -> Self {
        Self {
            pass: residual <= tolerance,
            residual,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionsReport {
    /// `E[W^2] = E[W]`
    pub item_iii: ConditionItem,
    /// `ell_n = E[W] n + o(n^{2/3})`
    pub item_iv: ConditionItem,
    /// `sum w^2 = E[W^2] n + o(n^{2/3})`
    pub item_v: ConditionItem,
    /// `sum w^3 = E[W^3] n + o(sqrt n)`, relaxed from `o(1)`
    pub item_vi: ConditionItem,
    /// `max w = o(n^{1/3})`
    pub item_vii: ConditionItem,
    #[serde(skip)]
    pub profile: Option<ToleranceProfile>,
}

impl ConditionsReport {
    pub fn all_pass(&self) -> bool {
        self.items().iter().all(|i| i.pass)
    }

    pub fn items(&self) -> [ConditionItem; 5] {
        [self.item_iii, self.item_iv, self.item_v, self.item_vi, self.item_vii]
    }
}

pub fn validate_conditions(
    wv: &WeightVector,
    targets: &MomentTargets,
    tol: &ToleranceProfile,
) -> Result<ConditionsReport> {
    let MomentTargets { ew, ew2, ew3 } = *targets;
    if !(ew.is_finite() && ew2.is_finite() && ew3.is_finite()) {
        return Err(Error::invalid("moment targets must be finite"));
    }
    if ew <= 0.0 {
        return Err(Error::invalid("E[W] must be positive"));
    }
    let n = wv.n() as f64;
    Ok(ConditionsReport {
        item_iii: ConditionItem::check((ew2 - ew).abs(), tol.iii),
        item_iv: ConditionItem::check((wv.ell() - ew * n).abs(), tol.iv * n.powf(2.0 / 3.0)),
        item_v: ConditionItem::check((wv.s2() - ew2 * n).abs(), tol.v * n.powf(2.0 / 3.0)),
        item_vi: ConditionItem::check((wv.s3() - ew3 * n).abs(), tol.vi * n.sqrt()),
        item_vii: ConditionItem::check(wv.w_max(), tol.vii * n.cbrt()),
        profile: Some(*tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_vectors() {
        let w = generate_constant(5, 1.0).unwrap();
        assert_eq!((w.ell(), w.s2(), w.s3(), w.c_hat()), (5.0, 5.0, 5.0, 1.0));
        let w = generate_constant(3, 2.0).unwrap();
        assert_eq!((w.ell(), w.s2(), w.s3()), (6.0, 12.0, 24.0));
    }

    #[test]
    fn constant_ones_pass_every_item_with_zero_residual() {
        for n in [2usize, 3, 10, 1000] {
            let w = generate_constant(n, 1.0).unwrap();
            let t = MomentTargets::constant(1.0);
            let r = validate_conditions(&w, &t, &ToleranceProfile::default_for(&w, &t)).unwrap();
            assert!(r.all_pass());
            for item in &r.items()[..4] {
                assert_eq!(item.residual, 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(generate_pareto_iid(10, 1.0, 3.0, 1).is_err());
        assert!(generate_pareto_iid(10, 1.0, 2.5, 1).is_err());
        assert!(generate_pareto_iid(1, 1.0, 4.0, 1).is_err());
        assert!(generate_constant(1, 1.0).is_err());
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn pareto_support_and_order() {
        let w = generate_pareto_iid(2, 1.0, 4.0, 11).unwrap();
        assert!(w.get(0) >= w.get(1) && w.get(1) >= 1.0);
    }

    #[test]
    fn pareto_is_reproducible() {
        let a = generate_pareto_iid(1000, 2.0 / 3.0, 4.0, 42).unwrap();
        let b = generate_pareto_iid(1000, 2.0 / 3.0, 4.0, 42).unwrap();
        let c = generate_pareto_iid(1000, 2.0 / 3.0, 4.0, 43).unwrap();
        assert!(a
            .weights()
            .iter()
            .zip(b.weights())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, c);
    }

    #[test]
    fn max_weight_violation_is_reported() {
        let n = 10_000usize;
        let mut v = vec![1.0; n];
        v[0] = (n as f64).sqrt();
        let w = WeightVector::new(v).unwrap();
        let t = MomentTargets::constant(1.0);
        let r = validate_conditions(&w, &t, &ToleranceProfile::default_for(&w, &t)).unwrap();
        assert!(!r.item_vii.pass);
        assert_eq!(r.item_vii.residual, 100.0);
    }

    #[test]
    fn load_weights_parses_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.txt");
        std::fs::write(&p, "3\n1\n2\n").unwrap();
        let w = load_weights(&p).unwrap();
        assert_eq!(w.weights(), &[3.0, 2.0, 1.0]);
        assert_eq!(w.ell(), 6.0);

        std::fs::write(&p, "1\n-2\n").unwrap();
        match load_weights(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::write(&p, "1\nabc\n").unwrap();
        assert!(matches!(load_weights(&p), Err(Error::Parse { line: 2, .. })));
        std::fs::write(&p, "").unwrap();
        assert!(load_weights(&p).is_err());
    }

    #[test]
    fn load_a_million_ones() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ones.txt");
        std::fs::write(&p, "1.0\n".repeat(1_000_000)).unwrap();
        let w = load_weights(&p).unwrap();
        assert_eq!(w.n(), 1_000_000);
        assert_eq!(w.ell(), 1e6);
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.txt");
        let w = generate_pareto_iid(500, 2.0 / 3.0, 4.0, 3).unwrap();
        w.write(&p).unwrap();
        assert_eq!(load_weights(&p).unwrap(), w);
    }

    #[test]
    fn weight_spec_parsing() {
        assert_eq!(
            "pareto:0.6667,4".parse::<WeightSpec>().unwrap(),
            WeightSpec::Pareto {
                scale: 0.6667,
                shape: 4.0
            }
        );
        assert_eq!(
            "const:1".parse::<WeightSpec>().unwrap(),
            WeightSpec::Constant { c: 1.0 }
        );
        assert_eq!(
            "1,2,3".parse::<WeightSpec>().unwrap(),
            WeightSpec::List(vec![1.0, 2.0, 3.0])
        );
        assert!("pareto:1".parse::<WeightSpec>().is_err());
        assert!("const:-1".parse::<WeightSpec>().is_err());
        let s: WeightSpec = "file:/tmp/w.txt".parse().unwrap();
        assert_eq!(s.to_string().parse::<WeightSpec>().unwrap(), s);
    }

    #[test]
    fn conditions_report_json_keys() {
        let w = generate_constant(10, 1.0).unwrap();
        let t = MomentTargets::constant(1.0);
        let r = validate_conditions(&w, &t, &ToleranceProfile::default_for(&w, &t)).unwrap();
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        for key in ["item_iii", "item_iv", "item_v", "item_vi", "item_vii"] {
            let item = &v[key];
            assert!(item["pass"].is_boolean() && item["residual"].is_number() && item["tolerance"].is_number());
        }
    }
}
