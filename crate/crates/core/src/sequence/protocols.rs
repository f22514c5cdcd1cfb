//! Generators for the standard decoupling sequences.
//!
//! Periodic families are laid out on an integer grid of the unit delay `τ`
//! and scaled afterwards, so pulses that should coincide (block junctions in
//! SDD and CDD) are bitwise equal and the merge rule sees them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Axis, MergePolicy, Pulse, PulseSequence};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CpmgVariant {
    Cpmg,
    Xy4,
    Xy8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PddVariant {
    PddXy,
    SddXy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CddBase {
    Pdd,
    Xy4,
}

/// Pulses on the τ-grid: `(grid index, axis)`, plus the period in grid units.
struct Grid {
    units: u64,
    pulses: Vec<(u64, Axis)>,
}

impl Grid {
    fn from(units: u64, pulses: &[(u64, Axis)]) -> Self {
        Self {
            units,
            pulses: pulses.to_vec(),
        }
    }

    fn repeat(&self, n: usize) -> Self {
        let mut pulses = Vec::with_capacity(self.pulses.len() * n);
        for k in 0..n as u64 {
            pulses.extend(self.pulses.iter().map(|&(t, a)| (t + k * self.units, a)));
        }
        Self {
            units: self.units * n as u64,
            pulses,
        }
    }

    fn scale(&self, tau: f64, label: String, policy: MergePolicy) -> Result<PulseSequence> {
        self.scale_to(tau * self.units as f64, label, policy)
    }

    /// Grid index `k` lands at `k·(T/units)`; the last index is pinned to `T`.
    fn scale_to(&self, duration: f64, label: String, policy: MergePolicy) -> Result<PulseSequence> {
        let tau = duration / self.units as f64;
        let pulses = self
            .pulses
            .iter()
            .map(|&(k, a)| {
                let t = if k == self.units { duration } else { k as f64 * tau };
                Pulse::new(t, a)
            })
            .collect();
        PulseSequence::new(duration, pulses, label, policy)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(invalid(format!("unit delay must be > 0, got {tau}")));
    }
    Ok(())
}

fn check_count(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(invalid(format!("{what} must be >= 1")));
    }
    Ok(())
}

fn cpmg_grid(variant: CpmgVariant) -> Grid {
    use Axis::*;
    match variant {
        CpmgVariant::Cpmg => Grid::from(4, &[(1, X), (3, X)]),
        CpmgVariant::Xy4 => Grid::from(8, &[(1, X), (3, Y), (5, X), (7, Y)]),
        CpmgVariant::Xy8 => Grid::from(
            16,
            &[(1, X), (3, Y), (5, X), (7, Y), (9, Y), (11, X), (13, Y), (15, X)],
        ),
    }
}

fn pdd_grid(variant: PddVariant) -> Grid {
    use Axis::*;
    match variant {
        PddVariant::PddXy => Grid::from(4, &[(1, X), (2, Y), (3, X), (4, Y)]),
        // period followed by its time reverse; the two Y pulses at 4 meet
        PddVariant::SddXy => Grid::from(
            8,
            &[(1, X), (2, Y), (3, X), (4, Y), (4, Y), (5, X), (6, Y), (7, X)],
        ),
    }
}

fn cdd_grid(base: CddBase, level: u32) -> Grid {
    use Axis::*;
    let mut g = match base {
        CddBase::Pdd => pdd_grid(PddVariant::PddXy),
        CddBase::Xy4 => cpmg_grid(CpmgVariant::Xy4),
    };
    for _ in 1..level {
        let l = g.units;
        let mut pulses = Vec::new();
        match base {
            // C X C Y C X C Y
            CddBase::Pdd => {
                for (k, axis) in [X, Y, X, Y].into_iter().enumerate() {
                    let off = k as u64 * l;
                    pulses.extend(g.pulses.iter().map(|&(t, a)| (t + off, a)));
                    pulses.push((off + l, axis));
                }
                g = Grid { units: 4 * l, pulses };
            }
            // C X C C Y C C X C C Y C
            CddBase::Xy4 => {
                for k in 0..8u64 {
                    let off = k * l;
                    pulses.extend(g.pulses.iter().map(|&(t, a)| (t + off, a)));
                    if k % 2 == 0 {
                        pulses.push((off + l, if k % 4 == 0 { X } else { Y }));
                    }
                }
                g = Grid { units: 8 * l, pulses };
            }
        }
    }
    g
}

pub fn cpmg_family(variant: CpmgVariant, n_periods: usize, tau: f64) -> Result<PulseSequence> {
    check_tau(tau)?;
    check_count(n_periods, "period count")?;
    let p = match variant {
        CpmgVariant::Cpmg => Protocol::Cpmg(n_periods),
        CpmgVariant::Xy4 => Protocol::Xy4(n_periods),
        CpmgVariant::Xy8 => Protocol::Xy8(n_periods),
    };
    cpmg_grid(variant)
        .repeat(n_periods)
        .scale(tau, p.to_string(), MergePolicy::Cancel)
}

pub fn pdd_family(variant: PddVariant, n_periods: usize, tau: f64) -> Result<PulseSequence> {
    pdd_family_with(variant, n_periods, tau, MergePolicy::Cancel)
}

pub fn pdd_family_with(
    variant: PddVariant,
    n_periods: usize,
    tau: f64,
    policy: MergePolicy,
) -> Result<PulseSequence> {
    check_tau(tau)?;
    check_count(n_periods, "period count")?;
    let p = match variant {
        PddVariant::PddXy => Protocol::Pdd(n_periods),
        PddVariant::SddXy => Protocol::Sdd(n_periods),
    };
    pdd_grid(variant)
        .repeat(n_periods)
        .scale(tau, p.to_string(), policy)
}

/// Concatenated sequence of `level` seeded by one PDD XY or XY4 period.
/// The PDD seed grows fourfold per level, the XY4 seed eightfold.
pub fn cdd(base: CddBase, level: u32, tau: f64, n_repeats: usize) -> Result<PulseSequence> {
    cdd_with(base, level, tau, n_repeats, MergePolicy::Cancel)
}

pub fn cdd_with(
    base: CddBase,
    level: u32,
    tau: f64,
    n_repeats: usize,
    policy: MergePolicy,
) -> Result<PulseSequence> {
    check_tau(tau)?;
    check_count(n_repeats, "repeat count")?;
    if level < 1 {
        return Err(invalid("concatenation level must be >= 1"));
    }
    let p = match base {
        CddBase::Pdd => Protocol::Cdd {
            level,
            repeats: n_repeats,
        },
        CddBase::Xy4 => Protocol::CddXy4 {
            level,
            repeats: n_repeats,
        },
    };
    cdd_grid(base, level)
        .repeat(n_repeats)
        .scale(tau, p.to_string(), policy)
}

/// `t_j = T sin²(jπ/(2ℓ+2))`, `j = 1..ℓ` for even `ℓ` and `j = 1..ℓ+1` for odd
/// `ℓ`; the odd terminal pulse is pinned to `T` exactly.
pub fn udd_times(level: usize, total: f64) -> Vec<f64> {
    let n = if level.is_multiple_of(2) { level } else { level + 1 };
    let denom = (2 * level + 2) as f64;
    (1..=n)
        .map(|j| {
            if j == level + 1 {
                total
            } else {
                let s = (j as f64 * PI / denom).sin();
                total * s * s
            }
        })
        .collect()
}

fn check_total(total: f64) -> Result<()> {
    if !(total > 0.0) || !total.is_finite() {
        return Err(invalid(format!("sequence duration must be > 0, got {total}")));
    }
    Ok(())
}

pub fn udd(level: usize, total: f64) -> Result<PulseSequence> {
    check_total(total)?;
    check_count(level, "UDD order")?;
    let pulses = udd_times(level, total)
        .into_iter()
        .map(|t| Pulse::new(t, Axis::X))
        .collect();
    PulseSequence::new(
        total,
        pulses,
        Protocol::Udd(level).to_string(),
        MergePolicy::Cancel,
    )
}

/// Outer UDD of X pulses whose every interval holds an inner UDD of Y pulses.
/// Where an inner terminal Y meets an outer X, Y is applied first.
pub fn qdd(level: usize, total: f64) -> Result<PulseSequence> {
    check_total(total)?;
    check_count(level, "QDD order")?;
    let outer = udd_times(level, total);
    let mut ends = outer.clone();
    if level.is_multiple_of(2) {
        ends.push(total);
    }
    let mut pulses = Vec::new();
    let mut start = 0.0;
    for (j, &end) in ends.iter().enumerate() {
        let mut inner = udd_times(level, end - start);
        for t in inner.iter_mut() {
            *t += start;
        }
        if level % 2 == 1 {
            *inner.last_mut().expect("odd UDD has a terminal pulse") = end;
        }
        pulses.extend(inner.into_iter().map(|t| Pulse::new(t, Axis::Y)));
        if j < outer.len() {
            pulses.push(Pulse::new(end, Axis::X));
        }
        start = end;
    }
    PulseSequence::new(
        total,
        pulses,
        Protocol::Qdd(level).to_string(),
        MergePolicy::Cancel,
    )
}

pub fn hahn_echo(total: f64) -> Result<PulseSequence> {
    Protocol::Hahn.build(total, MergePolicy::Cancel)
}

pub fn free_evolution(total: f64) -> Result<PulseSequence> {
    check_total(total)?;
    PulseSequence::new(total, vec![], Protocol::Fid.to_string(), MergePolicy::Cancel)
}

/// A protocol family with its counts, independent of timing.
///
/// The textual form (`xy4(2)`, `cdd(3)`, `cdd_xy4(2,4)`, `udd(16)`, `hahn()`)
/// is used in config files and output tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    Fid,
    Hahn,
    Cpmg(usize),
    Xy4(usize),
    Xy8(usize),
    Pdd(usize),
    Sdd(usize),
    Cdd { level: u32, repeats: usize },
    CddXy4 { level: u32, repeats: usize },
    Udd(usize),
    Qdd(usize),
}

impl Protocol {
    /// Duration in units of `τ` for the grid-based families; `None` for UDD/QDD.
    pub fn grid_units(&self) -> Option<u64> {
        Some(match *self {
            Protocol::Fid => 1,
            Protocol::Hahn => 2,
            Protocol::Cpmg(n) => 4 * n as u64,
            Protocol::Xy4(n) => 8 * n as u64,
            Protocol::Xy8(n) => 16 * n as u64,
            Protocol::Pdd(n) => 4 * n as u64,
            Protocol::Sdd(n) => 8 * n as u64,
            Protocol::Cdd { level, repeats } => 4u64.pow(level) * repeats as u64,
            Protocol::CddXy4 { level, repeats } => 8u64.pow(level) * repeats as u64,
            Protocol::Udd(_) | Protocol::Qdd(_) => return None,
        })
    }

    /// Number of delays `N_d`, i.e. grid steps; CPMG-timed families count
    /// the half-delay `d` of `d-π-d-d-π-d` (grid families only).
    pub fn delays(&self) -> Option<u64> {
        self.grid_units()
    }

    /// Pulses physically applied, before any same-axis merge.
    pub fn nominal_pulses(&self) -> usize {
        match *self {
            Protocol::Fid => 0,
            Protocol::Hahn => 1,
            Protocol::Cpmg(n) => 2 * n,
            Protocol::Xy4(n) | Protocol::Pdd(n) => 4 * n,
            Protocol::Xy8(n) | Protocol::Sdd(n) => 8 * n,
            Protocol::Cdd { level, repeats } => (1..level).fold(4, |c, _| 4 * c + 4) * repeats,
            Protocol::CddXy4 { level, repeats } => (1..level).fold(4, |c, _| 8 * c + 4) * repeats,
            Protocol::Udd(l) => {
                if l % 2 == 0 {
                    l
                } else {
                    l + 1
                }
            }
            Protocol::Qdd(l) => {
                if l % 2 == 0 {
                    l * (l + 2)
                } else {
                    (l + 1) * (l + 2)
                }
            }
        }
    }

    /// Builds the sequence with total duration `total`.
    pub fn build(&self, total: f64, policy: MergePolicy) -> Result<PulseSequence> {
        check_total(total)?;
        self.validate()?;
        let grid = match *self {
            Protocol::Fid => Grid::from(1, &[]),
            Protocol::Hahn => Grid::from(2, &[(1, Axis::X)]),
            Protocol::Cpmg(n) => cpmg_grid(CpmgVariant::Cpmg).repeat(n),
            Protocol::Xy4(n) => cpmg_grid(CpmgVariant::Xy4).repeat(n),
            Protocol::Xy8(n) => cpmg_grid(CpmgVariant::Xy8).repeat(n),
            Protocol::Pdd(n) => pdd_grid(PddVariant::PddXy).repeat(n),
            Protocol::Sdd(n) => pdd_grid(PddVariant::SddXy).repeat(n),
            Protocol::Cdd { level, repeats } => cdd_grid(CddBase::Pdd, level).repeat(repeats),
            Protocol::CddXy4 { level, repeats } => cdd_grid(CddBase::Xy4, level).repeat(repeats),
            Protocol::Udd(l) => return udd(l, total),
            Protocol::Qdd(l) => return qdd(l, total),
        };
        grid.scale_to(total, self.to_string(), policy)
    }

    /// Whether the family's count parameters are usable.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Protocol::Fid | Protocol::Hahn => true,
            Protocol::Cpmg(n)
            | Protocol::Xy4(n)
            | Protocol::Xy8(n)
            | Protocol::Pdd(n)
            | Protocol::Sdd(n)
            | Protocol::Udd(n)
            | Protocol::Qdd(n) => n >= 1,
            Protocol::Cdd { level, repeats } | Protocol::CddXy4 { level, repeats } => {
                level >= 1 && repeats >= 1 && level <= 8
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("bad protocol parameters: {self}")))
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Protocol::Fid => write!(f, "fid()"),
            Protocol::Hahn => write!(f, "hahn()"),
            Protocol::Cpmg(n) => write!(f, "cpmg({n})"),
            Protocol::Xy4(n) => write!(f, "xy4({n})"),
            Protocol::Xy8(n) => write!(f, "xy8({n})"),
            Protocol::Pdd(n) => write!(f, "pdd({n})"),
            Protocol::Sdd(n) => write!(f, "sdd({n})"),
            Protocol::Cdd { level, repeats: 1 } => write!(f, "cdd({level})"),
            Protocol::Cdd { level, repeats } => write!(f, "cdd({level},{repeats})"),
            Protocol::CddXy4 { level, repeats: 1 } => write!(f, "cdd_xy4({level})"),
            Protocol::CddXy4 { level, repeats } => write!(f, "cdd_xy4({level},{repeats})"),
            Protocol::Udd(l) => write!(f, "udd({l})"),
            Protocol::Qdd(l) => write!(f, "qdd({l})"),
        }
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Unknown {
            what: "protocol",
            name: s.to_string(),
        };
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim().to_ascii_lowercase();
        let args: Vec<usize> = s[open + 1..s.len() - 1]
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .map(|a| a.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let one = |args: &[usize]| match args {
            [n] => Ok(*n),
            _ => Err(bad()),
        };
        let p = match name.as_str() {
            "fid" | "free" if args.is_empty() => Protocol::Fid,
            "hahn" | "echo" if args.is_empty() => Protocol::Hahn,
            "cpmg" => Protocol::Cpmg(one(&args)?),
            "xy4" => Protocol::Xy4(one(&args)?),
            "xy8" => Protocol::Xy8(one(&args)?),
            "pdd" => Protocol::Pdd(one(&args)?),
            "sdd" => Protocol::Sdd(one(&args)?),
            "udd" => Protocol::Udd(one(&args)?),
            "qdd" => Protocol::Qdd(one(&args)?),
            "cdd" | "cdd_xy4" => {
                let (level, repeats) = match args[..] {
                    [l] => (l, 1),
                    [l, r] => (l, r),
                    _ => return Err(bad()),
                };
                let level = u32::try_from(level).map_err(|_| bad())?;
                if name == "cdd" {
                    Protocol::Cdd { level, repeats }
                } else {
                    Protocol::CddXy4 { level, repeats }
                }
            }
            _ => return Err(bad()),
        };
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Axis::X;

    fn times(s: &PulseSequence) -> Vec<f64> {
        s.pulses.iter().map(|p| p.time).collect()
    }

    fn axes(s: &PulseSequence) -> String {
        s.pulses.iter().map(|p| p.axis.as_char()).collect()
    }

    #[test]
    fn cpmg_family_single_period() {
        let c = cpmg_family(CpmgVariant::Cpmg, 1, 1.0).unwrap();
        assert_eq!(times(&c), vec![1.0, 3.0]);
        assert_eq!(c.duration, 4.0);
        let x4 = cpmg_family(CpmgVariant::Xy4, 1, 1.0).unwrap();
        assert_eq!(times(&x4), vec![1.0, 3.0, 5.0, 7.0]);
        assert_eq!(axes(&x4), "XYXY");
        assert_eq!(x4.duration, 8.0);
        let x8 = cpmg_family(CpmgVariant::Xy8, 1, 1.0).unwrap();
        assert_eq!(axes(&x8), "XYXYYXYX");
        assert_eq!(times(&x8), vec![1.0, 3.0, 5.0, 7.0, 9.0, 11.0, 13.0, 15.0]);
        assert!(cpmg_family(CpmgVariant::Cpmg, 0, 1.0).is_err());
        assert!(cpmg_family(CpmgVariant::Cpmg, 1, 0.0).is_err());
    }

    #[test]
    fn pdd_and_sdd() {
        let p = pdd_family(PddVariant::PddXy, 1, 1.0).unwrap();
        assert_eq!(times(&p), vec![1.0, 2.0, 3.0, 4.0]);
        let s = pdd_family(PddVariant::SddXy, 1, 1.0).unwrap();
        assert_eq!(times(&s), vec![1.0, 2.0, 3.0, 5.0, 6.0, 7.0]);
        assert_eq!(axes(&s), "XYXXYX");
        let raw = pdd_family_with(PddVariant::SddXy, 2, 1.0, MergePolicy::Keep).unwrap();
        assert_eq!(raw.len(), 16);
    }

    #[test]
    fn cdd_counts_and_durations() {
        let c1 = cdd(CddBase::Pdd, 1, 1.0, 1).unwrap();
        assert_eq!(
            c1,
            PulseSequence {
                label: "cdd(1)".into(),
                ..pdd_family(PddVariant::PddXy, 1, 1.0).unwrap()
            }
        );
        let c2 = cdd(CddBase::Pdd, 2, 1.0, 1).unwrap();
        assert_eq!(c2.duration, 16.0);
        let raw = cdd_with(CddBase::Pdd, 2, 1.0, 1, MergePolicy::Keep).unwrap();
        assert_eq!(raw.len(), 20);
        assert_eq!(c2.len(), 16);
        let x2 = cdd_with(CddBase::Xy4, 2, 1.0, 1, MergePolicy::Keep).unwrap();
        assert_eq!(x2.len(), 36);
        assert_eq!(x2.duration, 64.0);
        assert!(cdd(CddBase::Pdd, 0, 1.0, 1).is_err());
        assert_eq!(Protocol::Cdd { level: 2, repeats: 1 }.nominal_pulses(), 20);
        assert_eq!(Protocol::CddXy4 { level: 2, repeats: 1 }.nominal_pulses(), 36);
    }

    #[test]
    fn udd_timings() {
        let t = udd_times(2, 1.0);
        assert!((t[0] - 0.25).abs() < 1e-15 && (t[1] - 0.75).abs() < 1e-15);
        let t1 = udd_times(1, 1.0);
        assert!((t1[0] - 0.5).abs() < 1e-15);
        assert_eq!(t1[1], 1.0);
        let t16 = udd_times(16, 3.0);
        assert_eq!(t16.len(), 16);
        assert!(t16.windows(2).all(|w| w[0] < w[1]));
        for j in 0..16 {
            assert!((t16[j] + t16[15 - j] - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn qdd_structure() {
        let q = qdd(1, 1.0).unwrap();
        assert_eq!(axes(&q), "YYXYYX");
        let t = times(&q);
        assert!((t[0] - 0.25).abs() < 1e-15);
        assert_eq!(t[1], t[2]);
        assert_eq!(t[4], 1.0);
        assert_eq!(t[5], 1.0);
        assert_eq!(qdd(6, 1.0).unwrap().len(), 48);
        assert_eq!(qdd(3, 1.0).unwrap().len(), 20);
        for l in 1..8 {
            assert_eq!(qdd(l, 2.0).unwrap().len(), Protocol::Qdd(l).nominal_pulses());
        }
    }

    #[test]
    fn protocol_tokens_round_trip() {
        for s in [
            "fid()",
            "hahn()",
            "cpmg(8)",
            "xy4(2)",
            "xy8(4)",
            "pdd(3)",
            "sdd(2)",
            "cdd(2)",
            "cdd(3,2)",
            "cdd_xy4(2)",
            "udd(16)",
            "qdd(6)",
        ] {
            let p: Protocol = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("xy4(0)".parse::<Protocol>().is_err());
        assert!("bogus(1)".parse::<Protocol>().is_err());
        assert!("xy4".parse::<Protocol>().is_err());
    }

    #[test]
    fn build_pins_duration() {
        for p in [
            "xy4(3)",
            "cdd(2)",
            "cdd_xy4(2)",
            "qdd(3)",
            "udd(5)",
            "hahn()",
            "pdd(7)",
        ] {
            let p: Protocol = p.parse().unwrap();
            let s = p.build(0.37, MergePolicy::Cancel).unwrap();
            assert_eq!(s.duration, 0.37);
            assert!(s.pulses.iter().all(|q| q.time <= 0.37));
        }
        let h = Protocol::Hahn.build(2.0, MergePolicy::Cancel).unwrap();
        assert_eq!(h.pulses, vec![Pulse::new(1.0, X)]);
    }
}
