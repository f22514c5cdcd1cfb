//! Small numerical kernels shared by the noise sampler and the filter integrals.
//!
//! Every function here has a removable singularity at `x = 0` and is switched
//! to a Taylor series near the origin. The switch points are chosen so that
//! the closed form loses at most a few ulps at the boundary.

/// Below this `|x|` the `φ` kernels use their Taylor series.
pub const SERIES_THRESHOLD: f64 = 0.5;

/// Below this `|x|` exponential polynomials divided by `x²` use their series.
const EXP_POLY_THRESHOLD: f64 = 1.0;

/// `φ1(x) = (1 - e^{-x})/x`.
pub fn phi1(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        // Σ (-x)^n / (n! (n+1))
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..24 {
            term *= -x / n as f64;
            sum += term / (n + 1) as f64;
        }
        sum
    } else {
        -(-x).exp_m1() / x
    }
}

/// `φ2(x) = (1 - (1 + x) e^{-x})/x²`.
pub fn phi2(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        // Σ (-x)^n / (n! (n+2))
        let mut term = 1.0;
        let mut sum = 0.5;
        for n in 1..24 {
            term *= -x / n as f64;
            sum += term / (n + 2) as f64;
        }
        sum
    } else {
        (-(-x).exp_m1() - x * (-x).exp()) / (x * x)
    }
}

/// Evaluates `f(x)/x²` for `f(x) = a0 + a1 x + Σ c_k e^{-λ_k x}` that
/// vanishes to second order at the origin.
///
/// The series branch uses `f^{(n)}(0) = Σ c_k (-λ_k)^n` for `n ≥ 2`, so the
/// caller only has to guarantee `f(0) = f'(0) = 0`.
pub fn exp_poly_over_x2(a0: f64, a1: f64, terms: &[(f64, f64)], x: f64) -> f64 {
    if x.abs() < EXP_POLY_THRESHOLD {
        let mut powers: Vec<f64> = terms.iter().map(|&(_, l)| l * l / 2.0).collect();
        let mut sum = 0.0;
        let mut xn = 1.0;
        for n in 2..48 {
            let coeff: f64 = terms.iter().zip(&powers).map(|(&(c, _), &p)| c * p).sum();
            sum += coeff * xn;
            xn *= x;
            for (p, &(_, l)) in powers.iter_mut().zip(terms) {
                *p *= -l / (n + 1) as f64;
            }
        }
        sum
    } else {
        let f = a0 + a1 * x + terms.iter().map(|&(c, l)| c * (-l * x).exp()).sum::<f64>();
        f / (x * x)
    }
}

/// `(2x - 3 + 4e^{-x} - e^{-2x}) / x²`, the variance of the integrated OU
/// process over a window `Δ`, in units of `b² Δ²`, with `x = Δ/tau_c`.
pub fn ou_phase_variance_ratio(x: f64) -> f64 {
    exp_poly_over_x2(-3.0, 2.0, &[(4.0, 1.0), (-1.0, 2.0)], x)
}

/// Relative closeness check used by tests and invariants.
pub fn rel_close(a: f64, b: f64, rtol: f64, atol: f64) -> bool {
    (a - b).abs() <= atol + rtol * a.abs().max(b.abs())
}
