//! Exponents of sequences built from identical cycles.
//!
//! With `N_c` copies of a cycle of length `T_c` and `x = R T_c`,
//!
//! ```text
//! W = Γ_N (Q11 + Q12) - P_N Q12
//! P_N = Σ_{m<N} e^{-mx},   Γ_N = Σ_{m<N} (N - m) e^{-mx}
//! Q12 = e^{-x} Q11(R → -R)
//! ```
//!
//! Concatenated sequences are handled by composing signed blocks: a cycle
//! made of `K` blocks `σ_k F` of length `L` has
//! `Q11' = Σ_m e^{-mRL} (A_m Q11 + B_m Q12)` with `A_m = Σ_k σ_k σ_{k+m}` and
//! `B_m = Σ_k σ_k σ_{k+m+1}`.

use serde::Serialize;

use super::{autocorrelation, DecayResult};
use crate::error::{invalid, Result};
use crate::math::exp_poly_over_x2;
use crate::noise::OuParams;
use crate::sequence::{CddBase, FilterFunction};

/// Cycle integrals and the geometric sums that assemble `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicQuantities {
    pub q11: f64,
    pub q12: f64,
    pub p_n: f64,
    pub gamma_n: f64,
    pub t_c: f64,
    pub n_c: usize,
}

impl PeriodicQuantities {
    pub fn w(&self) -> f64 {
        self.gamma_n * (self.q11 + self.q12) - self.p_n * self.q12
    }
}

/// `(P_N, Γ_N)` for `x = R T_c`.
pub fn geometric_sums(n_c: usize, x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut g = 0.0;
    for m in 0..n_c {
        let e = (-(m as f64) * x).exp();
        p += e;
        g += (n_c - m) as f64 * e;
    }
    (p, g)
}

/// Assembles the periodic quantities from `Q11` at `±R`.
pub fn assemble(q11_plus: f64, q11_minus: f64, t_c: f64, n_c: usize, rate: f64) -> PeriodicQuantities {
    let x = rate * t_c;
    let q12 = (-x).exp() * q11_minus;
    let (p_n, gamma_n) = geometric_sums(n_c, x);
    PeriodicQuantities {
        q11: q11_plus,
        q12,
        p_n,
        gamma_n,
        t_c,
        n_c,
    }
}

pub fn periodic_quantities(cycle: &FilterFunction, n_c: usize, rate: f64) -> Result<PeriodicQuantities> {
    if !(cycle.duration > 0.0) {
        return Err(invalid("cycle length must be > 0"));
    }
    if n_c == 0 {
        return Err(invalid("cycle count must be >= 1"));
    }
    let pl = autocorrelation(cycle);
    Ok(assemble(
        pl.integrate_exp(rate),
        pl.integrate_exp(-rate),
        cycle.duration,
        n_c,
        rate,
    ))
}

/// `W` for `n_c` identical copies of `single_cycle`.
pub fn w_periodic(single_cycle: &FilterFunction, n_c: usize, p: &OuParams) -> Result<DecayResult> {
    let q = periodic_quantities(single_cycle, n_c, p.rate())?;
    DecayResult::new(q.w(), p.b, "periodic")
}

/// `Q11` of a signed block composition, at `+R` and `-R`.
pub fn compose_blocks(signs: &[f64], block_len: f64, q_plus: f64, q_minus: f64, rate: f64) -> (f64, f64) {
    let k = signs.len();
    let a = |m: usize| (0..k - m).map(|i| signs[i] * signs[i + m]).sum::<f64>();
    let b = |m: usize| {
        if m + 1 >= k {
            0.0
        } else {
            (0..k - m - 1).map(|i| signs[i] * signs[i + m + 1]).sum::<f64>()
        }
    };
    let x = rate * block_len;
    let q12_plus = (-x).exp() * q_minus;
    let q12_minus = x.exp() * q_plus;
    let mut new_plus = 0.0;
    let mut new_minus = 0.0;
    for m in 0..k {
        let (am, bm) = (a(m), b(m));
        new_plus += (-(m as f64) * x).exp() * (am * q_plus + bm * q12_plus);
        new_minus += ((m as f64) * x).exp() * (am * q_minus + bm * q12_minus);
    }
    (new_plus, new_minus)
}

/// `Q11` of the level-one half period in closed form: PDD `[+,-]` over `2τ`,
/// XY4 `[+,-,-,+]` over `4τ`. Returns `(Q11(R), Q11(-R), T_c)`.
pub fn base_half_period(base: CddBase, tau: f64, rate: f64) -> (f64, f64, f64) {
    let d = rate * tau;
    let g = |x: f64| match base {
        CddBase::Pdd => exp_poly_over_x2(-3.0, 2.0, &[(4.0, 1.0), (-1.0, 2.0)], x),
        CddBase::Xy4 => exp_poly_over_x2(-5.0, 4.0, &[(4.0, 1.0), (4.0, 2.0), (-4.0, 3.0), (1.0, 4.0)], x),
    };
    let t_c = match base {
        CddBase::Pdd => 2.0 * tau,
        CddBase::Xy4 => 4.0 * tau,
    };
    (tau * tau * g(d), tau * tau * g(-d), t_c)
}

/// Half-period of `CDD_level`: `(Q11(R), Q11(-R), length)`.
pub fn cdd_half_period(base: CddBase, level: u32, tau: f64, rate: f64) -> Result<(f64, f64, f64)> {
    if level < 1 {
        return Err(invalid("concatenation level must be >= 1"));
    }
    let (mut qp, mut qm, mut len) = base_half_period(base, tau, rate);
    let signs: &[f64] = match base {
        CddBase::Pdd => &[1.0, -1.0],
        CddBase::Xy4 => &[1.0, -1.0, -1.0, 1.0],
    };
    for _ in 1..level {
        // full period of the previous level, then the signed half of this one
        let (fp, fm) = compose_blocks(&[1.0, 1.0], len, qp, qm, rate);
        let full = 2.0 * len;
        let (hp, hm) = compose_blocks(signs, full, fp, fm, rate);
        qp = hp;
        qm = hm;
        len = full * signs.len() as f64;
    }
    Ok((qp, qm, len))
}

/// `W` of `n_repeats` full periods of `CDD_level` by the level recursion.
pub fn cdd_recursion(
    base: CddBase,
    level: u32,
    p: &OuParams,
    tau: f64,
    n_repeats: usize,
) -> Result<DecayResult> {
    if !(tau > 0.0) {
        return Err(invalid("unit delay must be > 0"));
    }
    if n_repeats == 0 {
        return Err(invalid("repeat count must be >= 1"));
    }
    let rate = p.rate();
    let (qp, qm, len) = cdd_half_period(base, level, tau, rate)?;
    let q = assemble(qp, qm, len, 2 * n_repeats, rate);
    DecayResult::new(q.w(), p.b, "cdd-recursion")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::w_general;
    use crate::math::rel_close;
    use crate::sequence::{cdd, cpmg_family, CpmgVariant};

    #[test]
    fn single_cycle_is_q11() {
        let f = FilterFunction::new(4.0, vec![1.0, 3.0]).unwrap();
        let p = OuParams::nv_default();
        let q = periodic_quantities(&f, 1, p.rate()).unwrap();
        assert_eq!((q.p_n, q.gamma_n), (1.0, 1.0));
        assert!(rel_close(q.w(), q.q11, 1e-15, 0.0));
        assert!(w_periodic(&f, 0, &p).is_err());
    }

    #[test]
    fn geometric_sum_limits_and_identity() {
        let (p, g) = geometric_sums(7, 0.0);
        assert_eq!(p, 7.0);
        assert_eq!(g, 28.0);
        // Γ = N P + (1/T_c) dP/dR
        let (n, t_c, r, h) = (9, 1.3, 0.2, 1e-6);
        let (p0, g0) = geometric_sums(n, r * t_c);
        let dp = (geometric_sums(n, (r + h) * t_c).0 - geometric_sums(n, (r - h) * t_c).0) / (2.0 * h);
        assert!(rel_close(g0, n as f64 * p0 + dp / t_c, 1e-8, 0.0));
    }

    #[test]
    fn periodic_matches_general_on_tiled_filter() {
        let p = OuParams::nv_default();
        let cycle = FilterFunction::new(1.6, vec![0.2, 0.6, 1.0, 1.4]).unwrap();
        for n in [1, 2, 5, 8] {
            let a = w_periodic(&cycle, n, &p).unwrap().w;
            let b = w_general(&cycle.tile(n).unwrap(), &p).unwrap().w;
            assert!(rel_close(a, b, 1e-10, 0.0), "n={n}: {a} vs {b}");
        }
        let odd = FilterFunction::new(1.2, vec![0.6]).unwrap();
        let a = w_periodic(&odd, 6, &p).unwrap().w;
        let b = w_general(&odd.tile(6).unwrap(), &p).unwrap().w;
        assert!(rel_close(a, b, 1e-10, 0.0));
    }

    #[test]
    fn base_closed_forms_match_autocorrelation() {
        let rate = 0.04;
        for tau in [0.05, 0.6, 10.0, 40.0] {
            let (qp, qm, tc) = base_half_period(CddBase::Pdd, tau, rate);
            let pl = autocorrelation(&FilterFunction::new(tc, vec![tau]).unwrap());
            assert!(rel_close(qp, pl.integrate_exp(rate), 1e-10, 0.0));
            assert!(rel_close(qm, pl.integrate_exp(-rate), 1e-10, 0.0));
            let (qp, qm, tc) = base_half_period(CddBase::Xy4, tau, rate);
            let pl = autocorrelation(&FilterFunction::new(tc, vec![tau, 3.0 * tau]).unwrap());
            assert!(rel_close(qp, pl.integrate_exp(rate), 1e-10, 0.0));
            assert!(rel_close(qm, pl.integrate_exp(-rate), 1e-10, 0.0));
        }
    }

    #[test]
    fn full_pdd_period_closed_forms() {
        for d in [1e-3, 0.05, 0.7, 2.0] {
            let rate = 0.04;
            let tau = d / rate;
            let (hp, hm, len) = base_half_period(CddBase::Pdd, tau, rate);
            let (fp, fm) = compose_blocks(&[1.0, 1.0], len, hp, hm, rate);
            let e = |k: f64| (-k * d).exp();
            let q11 = (-7.0 + 4.0 * d + 12.0 * e(1.0) - 8.0 * e(2.0) + 4.0 * e(3.0) - e(4.0)) / (rate * rate);
            let q12 = (-1.0 + 4.0 * e(1.0) - 8.0 * e(2.0) + 12.0 * e(3.0) - (4.0 * d + 7.0) * e(4.0))
                / (rate * rate);
            let tol = if d < 0.01 { 1e-5 } else { 1e-10 };
            assert!(rel_close(fp, q11, tol, 0.0), "d={d}: {fp} vs {q11}");
            assert!(rel_close((-4.0 * d).exp() * fm, q12, tol, 0.0), "d={d}");
        }
    }

    #[test]
    fn second_level_small_delta() {
        // the level-two half period (8τ) carries Q11 ≈ (8/3) δ³ / R², i.e. the
        // same decay per unit time as the short-time PDD rate
        let rate = 0.04;
        let d = 1e-3;
        let tau = d / rate;
        let (qp, qm, len) = cdd_half_period(CddBase::Pdd, 2, tau, rate).unwrap();
        assert!(rel_close(len, 8.0 * tau, 1e-15, 0.0));
        let want = 8.0 / 3.0 * d.powi(3) / (rate * rate);
        assert!(rel_close(qp, want, 1e-2, 0.0), "{qp} vs {want}");
        let q12 = (-rate * len).exp() * qm;
        assert!(rel_close(q12, -want, 2e-2, 0.0), "{q12}");
        let pdd_rate_per_time = 2.0 * d.powi(3) / (3.0 * rate * rate) / (2.0 * tau);
        assert!(rel_close(qp / len, pdd_rate_per_time, 1e-2, 0.0));
    }

    #[test]
    fn recursion_matches_general() {
        let p = OuParams::nv_default();
        for base in [CddBase::Pdd, CddBase::Xy4] {
            for level in 1..=3 {
                for reps in [1, 3] {
                    let tau = 0.13;
                    let seq = cdd(base, level, tau, reps).unwrap();
                    let g = w_general(&seq.filter_function(), &p).unwrap().w;
                    let r = cdd_recursion(base, level, &p, tau, reps).unwrap().w;
                    assert!(
                        rel_close(g, r, 1e-9, 0.0),
                        "{base:?} l={level} reps={reps}: {g} vs {r}"
                    );
                }
            }
        }
    }

    #[test]
    fn xy4_cycle_matches_sequence() {
        let p = OuParams::nv_default();
        let tau = 0.3;
        let (qp, qm, tc) = base_half_period(CddBase::Xy4, tau, p.rate());
        let q = assemble(qp, qm, tc, 6, p.rate());
        let seq = cpmg_family(CpmgVariant::Xy4, 3, tau).unwrap();
        let g = w_general(&seq.filter_function(), &p).unwrap().w;
        assert!(rel_close(q.w(), g, 1e-10, 0.0));
    }
}
