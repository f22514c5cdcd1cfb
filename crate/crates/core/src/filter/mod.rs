//! Exact dephasing exponents for filter functions in Ornstein-Uhlenbeck noise.
//!
//! For a Gaussian field with correlation `b² e^{-R|t|}` the signal of a
//! filter `ξ` is `S = exp(-b² W)` with
//!
//! ```text
//! W = ∫_0^T e^{-Rs} p(s) ds,    p(s) = ∫_0^{T-s} ξ(t) ξ(t+s) dt.
//! ```
//!
//! `p` is exactly piecewise linear, so `W` is a finite sum of closed-form
//! segment integrals. [`periodic`] rebuilds the same number from one cycle
//! and [`closed_form`] collects the small-`Rτ` asymptotics.

pub mod closed_form;
pub mod periodic;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{phi1, phi2};
use crate::noise::{BathComposition, OuParams};
use crate::sequence::FilterFunction;

pub use closed_form::{closed_form, ClosedForm, ClosedFormKind};
pub use periodic::{cdd_recursion, w_periodic, PeriodicQuantities};

/// Continuous piecewise-linear function given by its values at knots.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::InvalidParameter(
                "piecewise-linear function needs >= 2 knots with one value each".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "knots must be strictly increasing".into(),
            ));
        }
        Ok(Self { knots, values })
    }

    /// `(start, end, intercept, slope)` with the line written as `α + β s`.
    pub fn segments(&self) -> Vec<(f64, f64, f64, f64)> {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| {
                let slope = (v[1] - v[0]) / (k[1] - k[0]);
                (k[0], k[1], v[0] - slope * k[0], slope)
            })
            .collect()
    }

    /// Linear interpolation; zero outside the support.
    pub fn eval(&self, s: f64) -> f64 {
        let (first, last) = (self.knots[0], *self.knots.last().expect("non-empty"));
        if s < first || s > last {
            return 0.0;
        }
        let i = self
            .knots
            .partition_point(|&k| k <= s)
            .clamp(1, self.knots.len() - 1);
        let (k0, k1) = (self.knots[i - 1], self.knots[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (s - k0) / (k1 - k0)
    }

    /// `∫ e^{-rate·s} f(s) ds` over the support, exact per segment. Any real
    /// rate is accepted; negative rates feed the cross-cycle term.
    pub fn integrate_exp(&self, rate: f64) -> f64 {
        let mut acc = 0.0;
        for (k, v) in self.knots.windows(2).zip(self.values.windows(2)) {
            let h = k[1] - k[0];
            let x = rate * h;
            let seg = h * (v[0] * phi1(x) + (v[1] - v[0]) * phi2(x));
            acc += (-rate * k[0]).exp() * seg;
        }
        acc
    }

    /// `∫ f(s) ds`.
    pub fn integral(&self) -> f64 {
        self.integrate_exp(0.0)
    }

    /// `∫ s f(s) ds`.
    pub fn first_moment(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| {
                let h = k[1] - k[0];
                // ∫_0^h (k0 + u)(v0 + (v1-v0)u/h) du
                h * (k[0] * (v[0] + v[1]) / 2.0 + h * (v[0] / 6.0 + v[1] / 3.0))
            })
            .sum()
    }
}

/// `∫_0^{T-s} ξ(t) ξ(t+s) dt` for one lag, by a merge of both edge lists.
fn correlation_at(edges: &[f64], s: f64) -> f64 {
    let total = *edges.last().expect("edges include T");
    let t_end = total - s;
    if t_end <= 0.0 {
        return 0.0;
    }
    let last_seg = edges.len() - 2;
    let mut i = 0usize;
    let mut j = edges[1..edges.len() - 1].partition_point(|&e| e <= s);
    let mut t = 0.0;
    let mut acc = 0.0;
    while t < t_end {
        let ei = edges[i + 1];
        let ej = edges[j + 1] - s;
        let next = ei.min(ej).min(t_end);
        let sign = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * (next - t);
        t = next;
        if ei <= next && i < last_seg {
            i += 1;
        }
        if ej <= next && j < last_seg {
            j += 1;
        }
        if ei > t_end && ej > t_end {
            break;
        }
        if next >= t_end {
            break;
        }
    }
    acc
}

/// Exact autocorrelation `p(s)` of a filter, with knots at every pairwise
/// difference of segment edges (lags closer than `1e-12·T` are merged).
pub fn autocorrelation(f: &FilterFunction) -> PiecewiseLinear {
    let edges = f.edges();
    let total = f.duration;
    let mut lags = Vec::with_capacity(edges.len() * (edges.len() + 1) / 2);
    for (a, &ea) in edges.iter().enumerate() {
        for &eb in &edges[a..] {
            lags.push(eb - ea);
        }
    }
    lags.sort_by(f64::total_cmp);
    let tol = 1e-12 * total;
    let mut knots: Vec<f64> = Vec::with_capacity(lags.len());
    for s in lags {
        let s = s.clamp(0.0, total);
        match knots.last() {
            Some(&k) if s - k <= tol => {}
            _ => knots.push(s),
        }
    }
    // the support ends at exactly T
    if let Some(k) = knots.last_mut() {
        *k = total;
    }
    knots[0] = 0.0;
    let values = knots.iter().map(|&s| correlation_at(&edges, s)).collect();
    PiecewiseLinear { knots, values }
}

/// Decay exponent `W`, fidelity `S = exp(-b² W)` and the path that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayResult {
    pub w: f64,
    pub s: f64,
    pub method: String,
}

impl DecayResult {
    pub fn new(w: f64, b: f64, method: impl Into<String>) -> Result<Self> {
        if !w.is_finite() {
            return Err(Error::Numerical(format!("decay exponent is not finite: {w}")));
        }
        Ok(Self {
            w,
            s: (-b * b * w).exp(),
            method: method.into(),
        })
    }
}

/// `W = ∫ e^{-Rs} p(s) ds` for an arbitrary filter, exact to rounding.
pub fn w_general(f: &FilterFunction, p: &OuParams) -> Result<DecayResult> {
    DecayResult::new(autocorrelation(f).integrate_exp(p.rate()), p.b, "general")
}

/// Total exponent `Σ_j b_j² W(R_j)` of independent noise lines.
pub fn exponent_multi(f: &FilterFunction, bath: &BathComposition) -> Result<f64> {
    if bath.lines.is_empty() {
        return Err(Error::EmptyComposition);
    }
    let pl = autocorrelation(f);
    Ok(bath
        .lines
        .iter()
        .map(|l| l.b * l.b * pl.integrate_exp(l.rate()))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rel_close;

    fn ff(t: f64, bp: &[f64]) -> FilterFunction {
        FilterFunction::new(t, bp.to_vec()).unwrap()
    }

    #[test]
    fn free_evolution_autocorrelation() {
        let p = autocorrelation(&ff(3.0, &[]));
        for s in [0.0, 0.5, 2.9, 3.0] {
            assert!((p.eval(s) - (3.0 - s)).abs() < 1e-15);
        }
    }

    #[test]
    fn echo_autocorrelation() {
        let t = 2.0;
        let p = autocorrelation(&ff(t, &[1.0]));
        for s in [0.0, 0.3, 0.99, 1.0, 1.4, 2.0] {
            let want = if s < t / 2.0 { t - 3.0 * s } else { s - t };
            assert!((p.eval(s) - want).abs() < 1e-14, "s={s}");
        }
        // static noise is refocused
        assert!(p.integral().abs() < 1e-15);
    }

    #[test]
    fn pdd_half_cycle_autocorrelation() {
        let tau = 0.7;
        let p = autocorrelation(&ff(2.0 * tau, &[tau]));
        for s in [0.0, 0.2, 0.5, 0.7, 1.0, 1.4] {
            let want = if s < tau {
                2.0 * tau - 3.0 * s
            } else {
                s - 2.0 * tau
            };
            assert!((p.eval(s) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn free_static_limit() {
        let p = OuParams::static_line(1.0).unwrap();
        let r = w_general(&ff(2.5, &[]), &p).unwrap();
        assert!(rel_close(r.w, 2.5 * 2.5 / 2.0, 1e-14, 0.0));
    }

    #[test]
    fn segment_integral_matches_quadrature() {
        let f = ff(5.0, &[0.4, 1.9, 2.2, 4.1]);
        let pl = autocorrelation(&f);
        for rate in [0.0, 0.04, 1.3, -0.2] {
            let n = 400_000;
            let h = 5.0 / n as f64;
            let mut q = 0.0;
            for k in 0..n {
                let s = (k as f64 + 0.5) * h;
                q += (-rate * s).exp() * pl.eval(s) * h;
            }
            assert!(rel_close(pl.integrate_exp(rate), q, 1e-9, 1e-12), "rate {rate}");
        }
    }

    #[test]
    fn moment_and_segments() {
        let pl = PiecewiseLinear::new(vec![0.0, 1.0, 3.0], vec![1.0, 3.0, 0.0]).unwrap();
        // ∫ s f = ∫0^1 s(1+2s) + ∫1^3 s(3 - 1.5(s-1))
        let want = (0.5 + 2.0 / 3.0) + (4.5 * 4.0 - 1.5 * 26.0 / 3.0);
        assert!((pl.first_moment() - want).abs() < 1e-12);
        let seg = pl.segments();
        assert_eq!(seg[0], (0.0, 1.0, 1.0, 2.0));
        assert!(PiecewiseLinear::new(vec![0.0], vec![1.0]).is_err());
    }
}
