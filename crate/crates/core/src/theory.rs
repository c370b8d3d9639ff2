//! Leading-order predictions for the barely supercritical regime.
//!
//! Everything here drops the `o(.)` remainders, which are never bounded
//! explicitly; [`Prediction::leading_order_only`] is always `true`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphgen::critical_p_for_ell;
use crate::weights::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub f: f64,
    pub ell: f64,
    /// `C = E[W^3] / E[W]`, estimated by `s3 / ell`.
    pub c: f64,
    pub eps: f64,
    pub eps_prime: f64,
    pub p: f64,
    /// `2 f ell^{2/3} / C`.
    pub giant_center: f64,
    pub giant_size_interval: (f64, f64),
    pub giant_weight_interval: (f64, f64),
    /// `f^3`, the order of the giant's surplus.
    pub surplus_scale: f64,
    /// `ell^{2/3} / f^{1 - eps}`: size bound before the giant.
    pub small_before_size: f64,
    pub small_before_weight: f64,
    /// `ell^{2/3} / f`: size bound after the giant.
    pub small_after_size: f64,
    pub small_after_weight: f64,
    /// Vertex `f ell^{2/3} / C` of the drift parabola and its height.
    pub drift_peak_m: f64,
    pub drift_peak: f64,
    pub leading_order_only: bool,
}

impl Prediction {
    /// `m f ell^{-1/3} - C m^2 / (2 ell)`.
    pub fn drift(&self, m: f64) -> f64 {
        m * self.f / self.ell.cbrt() - self.c * m * m / (2.0 * self.ell)
    }

    pub fn size_in_window(&self, size: f64) -> bool {
        self.giant_size_interval.0 <= size && size <= self.giant_size_interval.1
    }

    pub fn weight_in_window(&self, weight: f64) -> bool {
        self.giant_weight_interval.0 <= weight && weight <= self.giant_weight_interval.1
    }
}

pub fn predict(wv: &WeightVector, f: f64, eps: f64, eps_prime: f64) -> Result<Prediction> {
    predict_with(wv.ell(), wv.c_hat(), f, eps, eps_prime)
}

/// [`predict`] from the summary values `ell` and `C` alone.
pub fn predict_with(ell: f64, c: f64, f: f64, eps: f64, eps_prime: f64) -> Result<Prediction> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::invalid(format!("f must be positive, got {f}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(eps_prime > 0.0 && eps_prime <= 1.0) {
        return Err(Error::invalid(format!("eps_prime must lie in (0, 1], got {eps_prime}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid(format!("C must be positive, got {c}")));
    }
    let l23 = ell.powf(2.0 / 3.0);
    let unit = f * l23 / c;
    let small_before_size = l23 / f.powf(1.0 - eps);
    let small_after_size = l23 / f;
    Ok(Prediction {
        f,
        ell,
        c,
        eps,
        eps_prime,
        p: critical_p_for_ell(ell, f)?,
        giant_center: 2.0 * unit,
        giant_size_interval: (
            2.0 * (1.0 - eps_prime / 2.0) * unit - l23 / c,
            2.0 * (1.0 + eps_prime / 2.0) * unit,
        ),
        giant_weight_interval: (2.0 * (1.0 - eps_prime) * unit, 2.0 * (1.0 + eps_prime) * unit),
        surplus_scale: f * f * f,
        small_before_size,
        small_before_weight: (1.0 + eps_prime) * small_before_size,
        small_after_size,
        small_after_weight: (1.0 + eps_prime) * small_after_size,
        drift_peak_m: unit,
        drift_peak: f * f * ell.cbrt() / (2.0 * c),
        leading_order_only: true,
    })
}

/// `(m - l)(f ell^{-1/3} - (C(m + l) + 2h) / (2 ell)) + 1` at each `m`.
pub fn drift_curve(wv: &WeightVector, f: f64, h: f64, l: f64, m_grid: &[usize]) -> Result<Vec<f64>> {
    if let Some(&m) = m_grid.iter().find(|&&m| m == 0 || m > wv.n()) {
        return Err(Error::invalid(format!("grid point {m} outside 1..={}", wv.n())));
    }
    Ok(m_grid
        .iter()
        .map(|&m| drift_value(wv.ell(), wv.c_hat(), f, h, l, m as f64))
        .collect())
}

pub fn drift_value(ell: f64, c: f64, f: f64, h: f64, l: f64, m: f64) -> f64 {
    (m - l) * (f / ell.cbrt() - (c * (m + l) + 2.0 * h) / (2.0 * ell)) + 1.0
}

/// Exact `E[L^0_m]` for unit weights: each explored vertex has `n - i`
/// uninspected pairs to later vertices, each present with `1 - e^{-p}`.
pub fn unit_weight_l0_mean(n: usize, p: f64, m: usize) -> f64 {
    let q = -(-p).exp_m1();
    let m = m as f64;
    let n = n as f64;
    // sum_{i=1}^m (n - i) = m n - m(m + 1)/2
    1.0 + q * (m * n - m * (m + 1.0) / 2.0) - m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::generate_constant;

    #[test]
    fn worked_interval() {
        let p = predict_with(1e6, 4.0 / 3.0, 10.0, 0.5, 0.2).unwrap();
        assert!((p.giant_center - 150_000.0).abs() < 1e-6);
        assert!((p.giant_size_interval.0 - 127_500.0).abs() < 1e-6);
        assert!((p.giant_size_interval.1 - 165_000.0).abs() < 1e-6);
        assert!(p.leading_order_only);
    }

    #[test]
    fn erdos_renyi_center() {
        let wv = generate_constant(1000, 1.0).unwrap();
        let p = predict(&wv, 3.0, 0.5, 0.4).unwrap();
        assert!((p.giant_center - 6.0 * 1000f64.powf(2.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn interval_width() {
        for (ell, c, f, e) in [(1e5, 1.2, 6.0, 0.4), (3e4, 1.0, 2.0, 1.0), (7.7e6, 2.5, 30.0, 0.05)] {
            let p = predict_with(ell, c, f, 0.5, e).unwrap();
            let width = p.giant_size_interval.1 - p.giant_size_interval.0;
            let l23 = ell.powf(2.0 / 3.0);
            let expected = 2.0 * e * f * l23 / c + l23 / c;
            assert!((width - expected).abs() <= 1e-9 * expected);
            assert!(p.giant_size_interval.0 <= p.giant_center && p.giant_center <= p.giant_size_interval.1);
        }
    }

    #[test]
    fn drift_parabola() {
        let p = predict_with(1e6, 4.0 / 3.0, 10.0, 0.5, 0.4).unwrap();
        assert!(p.drift(2.0 * p.drift_peak_m).abs() < 1e-6);
        assert!((p.drift(p.drift_peak_m) - p.drift_peak).abs() < 1e-6);
        assert!((p.drift_peak - 100.0 * 100.0 / (2.0 * 4.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn drift_curve_properties() {
        let wv = generate_constant(100_000, 1.0).unwrap();
        let (ell, c, f) = (wv.ell(), wv.c_hat(), 4.0);
        assert_eq!(drift_curve(&wv, f, 0.0, 1.0, &[1]).unwrap(), vec![1.0]);
        let vertex = f * ell.powf(2.0 / 3.0) / c;
        let a = drift_value(ell, c, f, 0.0, 1.0, vertex - 300.0);
        let b = drift_value(ell, c, f, 0.0, 1.0, vertex + 300.0);
        assert!((a - b).abs() < 1e-9 * a.abs());
        // pairs summing to 2 vertex + 2 l agree to within O(l / vertex)
        let a = drift_value(ell, c, f, 0.0, 1.0, vertex + 1.0 - 300.0);
        let b = drift_value(ell, c, f, 0.0, 1.0, vertex + 1.0 + 300.0);
        assert!((a - b).abs() < 1e-2 * a.abs());
        let h = ell.cbrt();
        let lower = drift_curve(&wv, f, h, 1.0, &[10, 50]).unwrap();
        let base = drift_curve(&wv, f, 0.0, 1.0, &[10, 50]).unwrap();
        assert!(lower.iter().zip(&base).all(|(x, y)| x < y));
        assert!(drift_curve(&wv, f, 0.0, 1.0, &[0]).is_err());
        assert!(drift_curve(&wv, f, 0.0, 1.0, &[100_001]).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(predict_with(1e6, 1.0, 0.0, 0.5, 0.4).is_err());
        assert!(predict_with(1e6, 1.0, 1.0, 0.0, 0.4).is_err());
        assert!(predict_with(1e6, 1.0, 1.0, 0.5, 1.5).is_err());
    }

    #[test]
    fn unit_weight_mean_small_cases() {
        assert_eq!(unit_weight_l0_mean(10, 0.3, 0), 1.0);
        let q = 1.0 - (-0.3f64).exp();
        assert!((unit_weight_l0_mean(10, 0.3, 2) - (1.0 + 9.0 * q - 1.0 + 8.0 * q - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn pure_and_repeatable() {
        let a = predict_with(1e5, 1.3, 8.0, 0.5, 0.4).unwrap();
        let b = predict_with(1e5, 1.3, 8.0, 0.5, 0.4).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
