//! Experiment description files.
//!
//! ```text
//! # comment
//! [experiment]
//! name = fig3a
//! mode = simulate            # analytic | simulate | scan
//! protocols = xy4(1), xy4(2), xy4(4)
//! t_min = 1                  # total-time grid [µs] ...
//! t_max = 40
//! t_points = 24
//! # tau = 0.6                # ... or a fixed grid step with a count sweep
//! # counts = 1..50
//! trajectories = 10000
//! seed = 1
//!
//! [bath]
//! b = 3.3                    # rad/µs
//! tau_c = 25                 # µs; 'inf' for a quasi-static line
//! # lines = 2.0:25, 1.5:inf  # several lines as b:tau_c pairs
//! detuning_mhz = -0.5        # cyclic MHz, converted with 2π
//! a0_mhz = -2.16
//! iz_probs = 0.5, 0.2, 0.3   # I_z = +1, -1, 0
//!
//! [errors]
//! model = measured              # ideal | measured, then per-key overrides
//! eps_x = -0.02
//! ```
//!
//! Every key is optional except the protocol list (or `families` and `np`
//! for scans). Unknown sections and keys are rejected with their line.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::ClosedFormKind;
use crate::fit::DEFAULT_WINDOW;
use crate::noise::{mhz_to_angular, BathComposition, OuParams, StaticFieldModel};
use crate::sequence::Protocol;
use crate::spin::PulseErrors;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Analytic,
    Simulate,
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanMethod {
    Analytic,
    Simulate,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TimeGrid {
    /// `points` evenly spaced total times in `[t_min, t_max]`.
    Total { t_min: f64, t_max: f64, points: usize },
    /// Fixed grid step `tau`; the protocol count runs over `counts`.
    FixedTau { tau: f64, counts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub mode: Mode,
    pub protocols: Vec<Protocol>,
    pub grid: TimeGrid,
    pub closed_forms: Vec<String>,
    pub families: Vec<String>,
    pub pulse_counts: Vec<usize>,
    pub scan_method: ScanMethod,
    pub scan_points: usize,
    pub fit_window: (f64, f64),
    pub bath: BathComposition,
    pub static_field: StaticFieldModel,
    pub errors: PulseErrors,
    pub ideal_reference: bool,
    pub trajectories: usize,
    pub seed: u64,
}

pub const DEFAULT_TRAJECTORIES: usize = 10_000;

const KEYS: &[(&str, &[&str])] = &[
    (
        "experiment",
        &[
            "name",
            "mode",
            "protocols",
            "t_min",
            "t_max",
            "t_points",
            "tau",
            "counts",
            "closed_forms",
            "families",
            "np",
            "scan_method",
            "scan_points",
            "fit_window",
            "ideal_reference",
            "trajectories",
            "seed",
        ],
    ),
    (
        "bath",
        &["b", "tau_c", "lines", "detuning_mhz", "a0_mhz", "iz_probs"],
    ),
    ("errors", &["model", "eps_x", "eps_y", "n_y", "m_x", "n_0", "m_0"]),
];

struct Entry {
    value: String,
    line: usize,
}

type Sections = BTreeMap<&'static str, BTreeMap<&'static str, Entry>>;

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn lex(text: &str) -> Result<Sections> {
    let mut out: Sections = BTreeMap::new();
    let mut section: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line, "unterminated section header"))?
                .trim();
            let known = KEYS
                .iter()
                .find(|(s, _)| *s == name)
                .ok_or_else(|| cfg_err(line, format!("unknown section [{name}]")))?;
            section = Some(known.0);
            out.entry(known.0).or_default();
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| cfg_err(line, format!("expected key = value, found '{body}'")))?;
        let key = key.trim();
        let sec = section.ok_or_else(|| cfg_err(line, format!("key '{key}' outside any section")))?;
        let allowed = KEYS
            .iter()
            .find(|(s, _)| *s == sec)
            .map(|(_, k)| *k)
            .unwrap_or(&[]);
        let key = *allowed
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| cfg_err(line, format!("unknown key '{key}' in [{sec}]")))?;
        let slot = out.entry(sec).or_default();
        if slot.contains_key(key) {
            return Err(cfg_err(line, format!("duplicate key '{key}' in [{sec}]")));
        }
        slot.insert(
            key,
            Entry {
                value: value.trim().to_string(),
                line,
            },
        );
    }
    Ok(out)
}

/// Splits at commas outside parentheses.
fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

struct Reader<'a> {
    sections: &'a Sections,
}

impl Reader<'_> {
    fn get(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.sections.get(sec).and_then(|s| s.get(key))
    }

    fn f64(&self, sec: &str, key: &str) -> Result<Option<f64>> {
        self.get(sec, key)
            .map(|e| {
                parse_f64(&e.value)
                    .ok_or_else(|| cfg_err(e.line, format!("{key}: not a number: '{}'", e.value)))
            })
            .transpose()
    }

    fn usize(&self, sec: &str, key: &str) -> Result<Option<usize>> {
        self.get(sec, key)
            .map(|e| {
                e.value
                    .parse::<usize>()
                    .map_err(|_| cfg_err(e.line, format!("{key}: not a count: '{}'", e.value)))
            })
            .transpose()
    }

    fn list(&self, sec: &str, key: &str) -> Option<(Vec<String>, usize)> {
        self.get(sec, key).map(|e| (split_list(&e.value), e.line))
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "Inf" | "infinity" => Some(f64::INFINITY),
        t => t.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

fn parse_counts(s: &str, line: usize) -> Result<Vec<usize>> {
    let bad = || cfg_err(line, format!("counts: expected 'a..b' or a list, found '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a == 0 || b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    split_list(s)
        .iter()
        .map(|v| v.parse::<usize>().map_err(|_| bad()))
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let sections = lex(text)?;
        let r = Reader { sections: &sections };
        let ex = "experiment";

        let name = r
            .get(ex, "name")
            .map_or_else(|| "custom".to_string(), |e| e.value.clone());
        let mode = match r.get(ex, "mode") {
            // A file with only scan keys is a scan.
            None if r.get(ex, "protocols").is_none() && r.get(ex, "families").is_some() => Mode::Scan,
            None => Mode::Simulate,
            Some(e) => match e.value.as_str() {
                "analytic" => Mode::Analytic,
                "simulate" => Mode::Simulate,
                "scan" => Mode::Scan,
                other => return Err(cfg_err(e.line, format!("unknown mode '{other}'"))),
            },
        };
        let protocols = match r.list(ex, "protocols") {
            None => Vec::new(),
            Some((items, line)) => items
                .iter()
                .map(|p| p.parse::<Protocol>().map_err(|e| cfg_err(line, e)))
                .collect::<Result<Vec<_>>>()?,
        };

        let grid = match (r.f64(ex, "tau")?, r.get(ex, "counts")) {
            (Some(tau), Some(c)) => {
                if !(tau > 0.0) || !tau.is_finite() {
                    return Err(cfg_err(c.line, "tau must be positive"));
                }
                TimeGrid::FixedTau {
                    tau,
                    counts: parse_counts(&c.value, c.line)?,
                }
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::Config("'tau' and 'counts' must be given together".into()));
            }
            (None, None) => {
                let t_min = r.f64(ex, "t_min")?.unwrap_or(0.5);
                let t_max = r.f64(ex, "t_max")?.unwrap_or(20.0);
                let points = r.usize(ex, "t_points")?.unwrap_or(20);
                if !(t_min > 0.0) || !(t_max >= t_min) || !t_max.is_finite() || points == 0 {
                    return Err(Error::Config(format!(
                        "bad time grid: t_min={t_min}, t_max={t_max}, t_points={points}"
                    )));
                }
                TimeGrid::Total { t_min, t_max, points }
            }
        };

        let closed_forms = match r.list(ex, "closed_forms") {
            None => Vec::new(),
            Some((items, line)) => {
                for k in &items {
                    k.parse::<ClosedFormKind>().map_err(|e| cfg_err(line, e))?;
                }
                items
            }
        };
        let families = match r.list(ex, "families") {
            None => Vec::new(),
            Some((items, line)) => {
                for f in &items {
                    if !FAMILIES.contains(&f.as_str()) {
                        return Err(cfg_err(
                            line,
                            format!("unknown family '{f}', expected one of {FAMILIES:?}"),
                        ));
                    }
                }
                items
            }
        };
        let pulse_counts = match r.get(ex, "np") {
            None => Vec::new(),
            Some(e) => parse_counts(&e.value, e.line)?,
        };
        let scan_method = match r.get(ex, "scan_method") {
            None => ScanMethod::Analytic,
            Some(e) => match e.value.as_str() {
                "analytic" => ScanMethod::Analytic,
                "simulate" => ScanMethod::Simulate,
                "both" => ScanMethod::Both,
                other => return Err(cfg_err(e.line, format!("unknown scan_method '{other}'"))),
            },
        };
        let scan_points = r.usize(ex, "scan_points")?.unwrap_or(16);
        let fit_window = match r.list(ex, "fit_window") {
            None => DEFAULT_WINDOW,
            Some((v, line)) => {
                let nums: Vec<f64> = v.iter().filter_map(|s| parse_f64(s)).collect();
                if nums.len() != 2 || !(0.0 < nums[0] && nums[0] < nums[1] && nums[1] < 1.0) {
                    return Err(cfg_err(line, "fit_window needs two values 0 < lo < hi < 1"));
                }
                (nums[0], nums[1])
            }
        };
        let ideal_reference = match r.get(ex, "ideal_reference") {
            None => false,
            Some(e) => match e.value.as_str() {
                "true" | "yes" | "on" => true,
                "false" | "no" | "off" => false,
                other => return Err(cfg_err(e.line, format!("expected true/false, found '{other}'"))),
            },
        };
        let trajectories = r.usize(ex, "trajectories")?.unwrap_or(DEFAULT_TRAJECTORIES);
        let seed = match r.get(ex, "seed") {
            None => 1,
            Some(e) => e
                .value
                .parse::<u64>()
                .map_err(|_| cfg_err(e.line, format!("seed: not an unsigned integer: '{}'", e.value)))?,
        };

        let bath = read_bath(&r)?;
        let static_field = read_static(&r)?;
        let errors = read_errors(&r)?;

        let cfg = Self {
            name,
            mode,
            protocols,
            grid,
            closed_forms,
            families,
            pulse_counts,
            scan_method,
            scan_points,
            fit_window,
            bath,
            static_field,
            errors,
            ideal_reference,
            trajectories,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::Scan => {
                if self.families.is_empty() || self.pulse_counts.is_empty() {
                    return Err(Error::Config("scan needs 'families' and 'np'".into()));
                }
                if self.scan_points < 4 {
                    return Err(Error::Config("scan_points must be at least 4".into()));
                }
            }
            _ => {
                if self.protocols.is_empty() {
                    return Err(Error::Config("no protocols given".into()));
                }
            }
        }
        if self.trajectories == 0 {
            return Err(Error::Config("trajectories must be at least 1".into()));
        }
        if self.bath.lines.is_empty() {
            return Err(Error::EmptyComposition);
        }
        self.errors.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// Pulse-count families accepted by scans.
pub const FAMILIES: &[&str] = &["cpmg", "xy4", "xy8", "pdd", "sdd", "udd", "qdd"];

fn read_bath(r: &Reader) -> Result<BathComposition> {
    let base = OuParams::nv_default();
    if let Some((items, line)) = r.list("bath", "lines") {
        if r.get("bath", "b").is_some() || r.get("bath", "tau_c").is_some() {
            return Err(cfg_err(line, "give either 'lines' or 'b'/'tau_c', not both"));
        }
        let lines = items
            .iter()
            .map(|it| {
                let (b, tc) = it
                    .split_once(':')
                    .ok_or_else(|| cfg_err(line, format!("line '{it}' is not b:tau_c")))?;
                let b = parse_f64(b).ok_or_else(|| cfg_err(line, format!("bad amplitude in '{it}'")))?;
                let tc = parse_f64(tc).ok_or_else(|| cfg_err(line, format!("bad tau_c in '{it}'")))?;
                OuParams::new(b, tc).map_err(|e| cfg_err(line, e))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(BathComposition::new(lines));
    }
    let b = r.f64("bath", "b")?.unwrap_or(base.b);
    let tau_c = r.f64("bath", "tau_c")?.unwrap_or(base.tau_c);
    let p = OuParams::new(b, tau_c).map_err(|e| Error::Config(e.to_string()))?;
    Ok(BathComposition::single(p))
}

fn read_static(r: &Reader) -> Result<StaticFieldModel> {
    let d = StaticFieldModel::nv_default();
    let detuning = r.f64("bath", "detuning_mhz")?.map_or(d.detuning, mhz_to_angular);
    let hyperfine = r.f64("bath", "a0_mhz")?.map_or(d.hyperfine, mhz_to_angular);
    let probs = match r.list("bath", "iz_probs") {
        None => d.iz_probabilities,
        Some((v, line)) => {
            let nums: Vec<f64> = v
                .iter()
                .map(|s| parse_f64(s).ok_or_else(|| cfg_err(line, format!("bad probability '{s}'"))))
                .collect::<Result<_>>()?;
            nums.try_into()
                .map_err(|_| cfg_err(line, "iz_probs needs three values"))?
        }
    };
    StaticFieldModel::new(detuning, hyperfine, probs).map_err(|e| Error::Config(e.to_string()))
}

fn read_errors(r: &Reader) -> Result<PulseErrors> {
    let mut e = match r.get("errors", "model") {
        None => PulseErrors::ideal(),
        Some(m) => match m.value.as_str() {
            "ideal" => PulseErrors::ideal(),
            "measured" => PulseErrors::measured(),
            other => return Err(cfg_err(m.line, format!("unknown error model '{other}'"))),
        },
    };
    let fields: [(&str, &mut f64); 6] = [
        ("eps_x", &mut e.eps_x),
        ("eps_y", &mut e.eps_y),
        ("n_y", &mut e.n_y),
        ("m_x", &mut e.m_x),
        ("n_0", &mut e.n_0),
        ("m_0", &mut e.m_0),
    ];
    for (k, slot) in fields {
        if let Some(v) = r.f64("errors", k)? {
            *slot = v;
        }
    }
    Ok(e)
}
