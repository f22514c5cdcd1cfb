//! Text form of a pulse sequence.
//!
//! ```text
//! # comments run to end of line; statements end at ';' or newline
//! label=my-seq
//! T=4
//! t=1:X; t=3:X
//! ```
//!
//! A single macro may replace the explicit form: `cpmg(n,tau)`, `xy4(n,tau)`,
//! `xy8(n,tau)`, `pdd(n,tau)`, `sdd(n,tau)`, `cdd(l,tau[,reps])`,
//! `cdd_xy4(l,tau[,reps])`, `udd(l,T)`, `qdd(l,T)`, `hahn(T)`, `fid(T)`.
//! Same-axis pulses at one instant cancel in pairs.

use super::protocols::{
    cdd, cpmg_family, free_evolution, hahn_echo, pdd_family, qdd, udd, CddBase, CpmgVariant, PddVariant,
};
use super::{Axis, MergePolicy, Pulse, PulseSequence};
use crate::error::{Error, Result};

struct Stmt<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn err(s: &Stmt, offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line: s.line,
        column: s.column + offset,
        message: message.into(),
    }
}

fn statements(text: &str) -> Vec<Stmt<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut start = 0;
        for piece in line.split(';') {
            let lead = piece.len() - piece.trim_start().len();
            let trimmed = piece.trim();
            if !trimmed.is_empty() {
                out.push(Stmt {
                    text: trimmed,
                    line: i + 1,
                    column: line[..start].chars().count() + piece[..lead].chars().count() + 1,
                });
            }
            start += piece.len() + 1;
        }
    }
    out
}

fn number(s: &Stmt, offset: usize, text: &str) -> Result<f64> {
    let t = text.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(s, offset, format!("expected a number, found '{t}'")))
}

fn count(s: &Stmt, offset: usize, text: &str) -> Result<usize> {
    let t = text.trim();
    t.parse::<usize>()
        .map_err(|_| err(s, offset, format!("expected a positive integer, found '{t}'")))
}

fn macro_call(s: &Stmt) -> Result<PulseSequence> {
    let open = s.text.find('(').expect("caller checked");
    let name = s.text[..open].trim().to_ascii_lowercase();
    if !s.text.ends_with(')') {
        return Err(err(s, s.text.len(), "missing ')'"));
    }
    let inner = &s.text[open + 1..s.text.len() - 1];
    let mut args = Vec::new();
    let mut off = open + 1;
    for a in inner.split(',') {
        if !a.trim().is_empty() {
            args.push((off, a));
        }
        off += a.len() + 1;
    }
    let arity = |n: &[usize]| -> Result<()> {
        if n.contains(&args.len()) {
            Ok(())
        } else {
            Err(err(
                s,
                open,
                format!("{name} takes {n:?} arguments, got {}", args.len()),
            ))
        }
    };
    let n0 = |args: &[(usize, &str)]| count(s, args[0].0, args[0].1);
    let f = |args: &[(usize, &str)], i: usize| number(s, args[i].0, args[i].1);
    let seq = match name.as_str() {
        "cpmg" | "xy4" | "xy8" => {
            arity(&[2])?;
            let v = match name.as_str() {
                "cpmg" => CpmgVariant::Cpmg,
                "xy4" => CpmgVariant::Xy4,
                _ => CpmgVariant::Xy8,
            };
            cpmg_family(v, n0(&args)?, f(&args, 1)?)
        }
        "pdd" | "sdd" => {
            arity(&[2])?;
            let v = if name == "pdd" {
                PddVariant::PddXy
            } else {
                PddVariant::SddXy
            };
            pdd_family(v, n0(&args)?, f(&args, 1)?)
        }
        "cdd" | "cdd_xy4" => {
            arity(&[2, 3])?;
            let base = if name == "cdd" { CddBase::Pdd } else { CddBase::Xy4 };
            let level = u32::try_from(n0(&args)?).map_err(|_| err(s, args[0].0, "level too large"))?;
            let reps = if args.len() == 3 {
                count(s, args[2].0, args[2].1)?
            } else {
                1
            };
            cdd(base, level, f(&args, 1)?, reps)
        }
        "udd" | "qdd" => {
            arity(&[2])?;
            if name == "udd" {
                udd(n0(&args)?, f(&args, 1)?)
            } else {
                qdd(n0(&args)?, f(&args, 1)?)
            }
        }
        "hahn" | "fid" => {
            arity(&[1])?;
            if name == "hahn" {
                hahn_echo(f(&args, 0)?)
            } else {
                free_evolution(f(&args, 0)?)
            }
        }
        _ => return Err(err(s, 0, format!("unknown macro '{name}'"))),
    };
    seq.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => err(s, 0, other.to_string()),
    })
}

/// Parses the text form into a normalized sequence.
pub fn parse_dsl(text: &str) -> Result<PulseSequence> {
    let stmts = statements(text);
    if stmts.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty sequence description".into(),
        });
    }
    let mut duration: Option<f64> = None;
    let mut label: Option<String> = None;
    let mut pulses: Vec<(Pulse, usize)> = Vec::new();
    let mut from_macro: Option<PulseSequence> = None;

    for s in &stmts {
        if let Some(rest) = s.text.strip_prefix("label") {
            let v = rest.trim_start();
            let v = v
                .strip_prefix('=')
                .ok_or_else(|| err(s, 5, "expected '=' after label"))?;
            label = Some(v.trim().to_string());
        } else if let Some(rest) = s.text.strip_prefix('T') {
            let v = rest
                .trim_start()
                .strip_prefix('=')
                .ok_or_else(|| err(s, 1, "expected '=' after T"))?;
            if duration.is_some() {
                return Err(err(s, 0, "duration given twice"));
            }
            duration = Some(number(s, s.text.len() - v.len(), v)?);
        } else if let Some(rest) = s.text.strip_prefix('t') {
            let v = rest
                .trim_start()
                .strip_prefix('=')
                .ok_or_else(|| err(s, 1, "expected '=' after t"))?;
            let base = s.text.len() - v.len();
            let colon = v
                .find(':')
                .ok_or_else(|| err(s, base + v.len(), "expected ':<axis>' after pulse time"))?;
            let time = number(s, base, &v[..colon])?;
            let axis = match v[colon + 1..].trim() {
                "X" | "x" => Axis::X,
                "Y" | "y" => Axis::Y,
                other => {
                    return Err(err(s, base + colon + 1, format!("unknown axis '{other}'")));
                }
            };
            pulses.push((Pulse::new(time, axis), s.line));
        } else if s.text.contains('(') {
            if from_macro.is_some() {
                return Err(err(s, 0, "only one macro per description"));
            }
            from_macro = Some(macro_call(s)?);
        } else {
            return Err(err(s, 0, format!("unrecognized statement '{}'", s.text)));
        }
    }

    if let Some(mut seq) = from_macro {
        if duration.is_some() || !pulses.is_empty() {
            return Err(Error::Parse {
                line: stmts[0].line,
                column: stmts[0].column,
                message: "a macro cannot be combined with explicit T or pulses".into(),
            });
        }
        if let Some(l) = label {
            seq.label = l;
        }
        return Ok(seq);
    }

    let duration = duration.ok_or_else(|| Error::Parse {
        line: stmts[0].line,
        column: stmts[0].column,
        message: "missing 'T=<duration>'".into(),
    })?;
    PulseSequence::new(
        duration,
        pulses.into_iter().map(|(p, _)| p).collect(),
        label.unwrap_or_else(|| "custom".into()),
        MergePolicy::Cancel,
    )
}

/// Explicit text form; `parse_dsl(render_dsl(s)) == s` for normalized `s`.
pub fn render_dsl(seq: &PulseSequence) -> String {
    let mut out = String::new();
    if !seq.label.is_empty() {
        out.push_str(&format!("label={}\n", seq.label));
    }
    out.push_str(&format!("T={}\n", seq.duration));
    for p in &seq.pulses {
        out.push_str(&format!("t={}:{}\n", p.time, p.axis.as_char()));
    }
    out
}
