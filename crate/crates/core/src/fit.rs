//! Decay-time fits.
//!
//! A curve `S = exp[-(T/T_1e)^3]` is linear in `ln T` after taking
//! `ln(-ln S)`, so fixed-exponent fits reduce to a weighted mean and
//! free-exponent fits to a straight line in log-log space.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Fidelity window used to select points for fits.
pub const DEFAULT_WINDOW: (f64, f64) = (0.2, 0.95);

/// Decay time of `exp[-(T/T_1e)^3]` and its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicFit {
    pub t1e: f64,
    pub t1e_err: f64,
    pub points: usize,
}

/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_err: f64,
    pub intercept_err: f64,
    pub points: usize,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(invalid("x and y lengths differ"));
    }
    let n = x.len();
    if n < 2 {
        return Err(invalid("line fit needs at least two points"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("line fit needs distinct x values"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_err, intercept_err) = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = b - intercept - slope * a;
                r * r
            })
            .sum();
        let s2 = rss / (nf - 2.0);
        ((s2 / sxx).sqrt(), (s2 * (1.0 / nf + mx * mx / sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_err,
        intercept_err,
        points: n,
    })
}

/// Fixed-exponent fit over points with `S` inside `window`.
///
/// `ln T_1e` is the weighted mean of `ln T − ln(−ln S)/3`. With standard
/// errors the weights follow from propagating them; the reported error is the
/// larger of the propagated error and the scatter of the estimates.
pub fn fit_cubic_decay(t: &[f64], s: &[f64], s_err: Option<&[f64]>, window: (f64, f64)) -> Result<CubicFit> {
    if t.len() != s.len() || s_err.is_some_and(|e| e.len() != s.len()) {
        return Err(invalid("fit inputs have different lengths"));
    }
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for i in 0..t.len() {
        let si = s[i];
        if !(si >= window.0 && si <= window.1) || !(t[i] > 0.0) {
            continue;
        }
        let ln_s = si.ln();
        ys.push(t[i].ln() - (-ln_s).ln() / 3.0);
        let w = match s_err {
            Some(e) if e[i] > 0.0 => {
                let sigma = e[i] / (3.0 * si * ln_s.abs());
                1.0 / (sigma * sigma)
            }
            _ => 1.0,
        };
        ws.push(w);
    }
    let n = ys.len();
    if n == 0 {
        return Err(invalid(format!(
            "no points with S in [{}, {}] to fit",
            window.0, window.1
        )));
    }
    let sw: f64 = ws.iter().sum();
    let mean = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let weighted = s_err.is_some_and(|e| e.iter().any(|&v| v > 0.0));
    let stat = if weighted { sw.sqrt().recip() } else { 0.0 };
    let scatter = if n > 1 {
        let var = ys
            .iter()
            .zip(&ws)
            .map(|(y, w)| w * (y - mean) * (y - mean))
            .sum::<f64>()
            / sw;
        (var / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let t1e = mean.exp();
    Ok(CubicFit {
        t1e,
        t1e_err: t1e * stat.max(scatter),
        points: n,
    })
}

/// Free-exponent fit of `-ln S = (T/T_0)^k`: returns the log-log line
/// `ln(-ln S) = intercept + k ln T` over points inside `window`.
pub fn fit_stretched_exponent(t: &[f64], s: &[f64], window: (f64, f64)) -> Result<LineFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(s)
        .filter(|&(&ti, &si)| ti > 0.0 && si >= window.0 && si <= window.1)
        .map(|(&ti, &si)| (ti.ln(), (-si.ln()).ln()))
        .unzip();
    line_fit(&x, &y)
}
