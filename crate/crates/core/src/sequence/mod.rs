//! Pulse sequences and their filter functions.
//!
//! Pulses are instantaneous nominal π rotations about X or Y. A sequence
//! stores them in application order; several pulses may share an instant
//! (QDD nests an inner Y pulse and an outer X pulse at the same time) and
//! are then applied in list order with zero delay.

mod dsl;
mod protocols;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use dsl::{parse_dsl, render_dsl};
pub use protocols::{
    cdd, cdd_with, cpmg_family, free_evolution, hahn_echo, pdd_family, pdd_family_with, qdd, udd, udd_times,
    CddBase, CpmgVariant, PddVariant, Protocol,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
        }
    }
}

/// A nominal π pulse at `time` [µs].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub time: f64,
    pub axis: Axis,
}

impl Pulse {
    pub fn new(time: f64, axis: Axis) -> Self {
        Self { time, axis }
    }
}

/// What to do with back-to-back identical pulses at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MergePolicy {
    /// Same-axis pairs cancel (`π² = 1` for ideal pulses), cascading.
    #[default]
    Cancel,
    /// Keep every physically applied pulse; needed for faulty-pulse runs.
    Keep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub duration: f64,
    pub pulses: Vec<Pulse>,
    pub label: String,
}

impl PulseSequence {
    /// Validates, stably sorts by time and applies `policy`.
    pub fn new(
        duration: f64,
        mut pulses: Vec<Pulse>,
        label: impl Into<String>,
        policy: MergePolicy,
    ) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(invalid(format!("sequence duration must be > 0, got {duration}")));
        }
        for p in &pulses {
            if !(p.time >= 0.0 && p.time <= duration) {
                return Err(Error::PulseOutOfRange {
                    time: p.time,
                    duration,
                });
            }
        }
        pulses.sort_by(|a, b| a.time.total_cmp(&b.time));
        let pulses = match policy {
            MergePolicy::Cancel => merge_coincident(pulses)?,
            MergePolicy::Keep => pulses,
        };
        Ok(Self {
            duration,
            pulses,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    /// Concatenates `n` copies end to end.
    pub fn repeat(&self, n: usize, policy: MergePolicy) -> Result<Self> {
        if n == 0 {
            return Err(invalid("repeat count must be >= 1"));
        }
        let mut pulses = Vec::with_capacity(self.pulses.len() * n);
        for k in 0..n {
            let offset = self.duration * k as f64;
            pulses.extend(self.pulses.iter().map(|p| Pulse::new(p.time + offset, p.axis)));
        }
        Self::new(self.duration * n as f64, pulses, self.label.clone(), policy)
    }

    pub fn filter_function(&self) -> FilterFunction {
        filter_function(self)
    }

    /// `{"duration": T, "pulses": [{"time": t, "axis": "X"}, ...]}` ordered by
    /// time, then by application order.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            duration: f64,
            pulses: &'a [Pulse],
        }
        serde_json::to_string(&View {
            duration: self.duration,
            pulses: &self.pulses,
        })
        .expect("sequence serializes")
    }
}

/// Stack-based merge: a pulse equal in time and axis to the one on top of the
/// stack annihilates it, which lets `X Y Y X` at one instant collapse fully.
fn merge_coincident(pulses: Vec<Pulse>) -> Result<Vec<Pulse>> {
    let mut out: Vec<Pulse> = Vec::with_capacity(pulses.len());
    for p in pulses {
        match out.last() {
            Some(top) if top.time == p.time && top.axis == p.axis => {
                out.pop();
            }
            _ => out.push(p),
        }
    }
    // whatever survives must not repeat an axis within one instant
    let mut i = 0;
    while i < out.len() {
        let mut j = i + 1;
        while j < out.len() && out[j].time == out[i].time {
            j += 1;
        }
        for a in i..j {
            for b in a + 1..j {
                if out[a].axis == out[b].axis {
                    return Err(Error::DuplicatePulse {
                        time: out[a].time,
                        axis: out[a].axis.as_char(),
                    });
                }
            }
        }
        i = j;
    }
    Ok(out)
}

/// `ξ(t)`: `+1` at `t = 0`, flipping at every instant that carries an odd
/// number of pulses.
///
/// Pulses at `t = 0` or `t = T` are dropped: they change neither `ξ` on the
/// open interval nor anything quadratic in it.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterFunction {
    pub duration: f64,
    pub breakpoints: Vec<f64>,
}

impl FilterFunction {
    pub fn new(duration: f64, breakpoints: Vec<f64>) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(invalid(format!("filter duration must be > 0, got {duration}")));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("filter breakpoints must be strictly increasing"));
        }
        if breakpoints.iter().any(|&t| !(t > 0.0 && t < duration)) {
            return Err(invalid("filter breakpoints must lie inside (0, T)"));
        }
        Ok(Self {
            duration,
            breakpoints,
        })
    }

    /// Segment edges `0, t_1, ..., t_N, T`.
    pub fn edges(&self) -> Vec<f64> {
        let mut e = Vec::with_capacity(self.breakpoints.len() + 2);
        e.push(0.0);
        e.extend_from_slice(&self.breakpoints);
        e.push(self.duration);
        e
    }

    /// `(start, end, sign)` for each constant piece.
    pub fn segments(&self) -> Vec<(f64, f64, f64)> {
        let e = self.edges();
        e.windows(2)
            .enumerate()
            .map(|(i, w)| (w[0], w[1], if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect()
    }

    pub fn sign_at(&self, t: f64) -> f64 {
        if !(0.0..=self.duration).contains(&t) {
            return 0.0;
        }
        let flips = self.breakpoints.partition_point(|&b| b <= t);
        if flips % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `∫_0^T ξ(t) dt`.
    pub fn integral(&self) -> f64 {
        self.segments().iter().map(|&(a, b, s)| s * (b - a)).sum()
    }

    /// `n` identical copies of `ξ` end to end. When a cycle ends on `-1` a
    /// flip is inserted at each junction so every copy starts at `+1`.
    pub fn tile(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("tile count must be >= 1"));
        }
        let odd = self.breakpoints.len() % 2 == 1;
        let mut bp = Vec::with_capacity((self.breakpoints.len() + 1) * n);
        for k in 0..n {
            let offset = self.duration * k as f64;
            if k > 0 && odd {
                bp.push(offset);
            }
            bp.extend(self.breakpoints.iter().map(|t| t + offset));
        }
        Self::new(self.duration * n as f64, bp)
    }
}

pub fn filter_function(seq: &PulseSequence) -> FilterFunction {
    let mut breakpoints = Vec::new();
    let pulses = &seq.pulses;
    let mut i = 0;
    while i < pulses.len() {
        let t = pulses[i].time;
        let mut j = i + 1;
        while j < pulses.len() && pulses[j].time == t {
            j += 1;
        }
        if (j - i) % 2 == 1 && t > 0.0 && t < seq.duration {
            breakpoints.push(t);
        }
        i = j;
    }
    FilterFunction {
        duration: seq.duration,
        breakpoints,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(duration: f64, p: &[(f64, Axis)]) -> Result<PulseSequence> {
        PulseSequence::new(
            duration,
            p.iter().map(|&(t, a)| Pulse::new(t, a)).collect(),
            "t",
            MergePolicy::Cancel,
        )
    }

    #[test]
    fn cascading_merge() {
        use Axis::*;
        let s = seq(4.0, &[(1.0, X), (1.0, Y), (1.0, Y), (1.0, X)]).unwrap();
        assert!(s.is_empty());
        let s = seq(4.0, &[(1.0, X), (1.0, X), (2.0, Y)]).unwrap();
        assert_eq!(s.pulses, vec![Pulse::new(2.0, Y)]);
        assert!(matches!(
            seq(4.0, &[(1.0, X), (1.0, Y), (1.0, X)]),
            Err(Error::DuplicatePulse { axis: 'X', .. })
        ));
        assert!(matches!(
            seq(4.0, &[(5.0, X)]),
            Err(Error::PulseOutOfRange { .. })
        ));
    }

    #[test]
    fn keep_policy_retains_pairs() {
        let s = PulseSequence::new(
            4.0,
            vec![Pulse::new(2.0, Axis::Y), Pulse::new(2.0, Axis::Y)],
            "k",
            MergePolicy::Keep,
        )
        .unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.filter_function().breakpoints.is_empty());
    }

    #[test]
    fn parity_rule_for_breakpoints() {
        use Axis::*;
        let s = seq(4.0, &[(1.0, Y), (1.0, X), (2.0, X), (4.0, Y)]).unwrap();
        let f = s.filter_function();
        assert_eq!(f.breakpoints, vec![2.0]);
        assert_eq!(f.sign_at(1.5), 1.0);
        assert_eq!(f.sign_at(3.0), -1.0);
    }

    #[test]
    fn filter_integral_and_segments() {
        let f = FilterFunction::new(4.0, vec![1.0, 3.0]).unwrap();
        assert_eq!(f.integral(), 0.0);
        assert_eq!(
            f.segments(),
            vec![(0.0, 1.0, 1.0), (1.0, 3.0, -1.0), (3.0, 4.0, 1.0)]
        );
        let tiled = FilterFunction::new(2.0, vec![1.0]).unwrap().tile(3).unwrap();
        assert_eq!(tiled.breakpoints, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let even = f.tile(2).unwrap();
        assert_eq!(even.breakpoints, vec![1.0, 3.0, 5.0, 7.0]);
        let empty = FilterFunction::new(2.0, vec![]).unwrap();
        assert_eq!(empty.integral(), 2.0);
        assert!(FilterFunction::new(2.0, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn json_keeps_application_order() {
        use Axis::*;
        let s = seq(1.0, &[(0.5, Y), (0.5, X)]).unwrap();
        assert_eq!(
            s.to_json(),
            r#"{"duration":1.0,"pulses":[{"time":0.5,"axis":"Y"},{"time":0.5,"axis":"X"}]}"#
        );
    }
}
