//! Config-driven experiments, named presets and result tables.
//!
//! Presets are plain config files compiled into the binary; `ddkit
//! simulate --preset fig3a` and `ddkit simulate --config presets/fig3a.conf`
//! are equivalent. The config hash in every table is taken over the
//! resolved configuration, so formatting changes in a file do not alter it
//! but any parameter change does.

mod config;
mod table;

use std::f64::consts::E;

pub use config::{ExperimentConfig, Mode, ScanMethod, TimeGrid, DEFAULT_TRAJECTORIES, FAMILIES};
pub use table::{
    format_sig9, round_sig9, sha256_hex, Cell, Format, ResultTable, ANALYTIC_COLUMNS, CHECK_COLUMNS,
    CURVE_COLUMNS, P1_COLUMNS, SCAN_COLUMNS,
};

use crate::error::{invalid, Error, Result};
use crate::filter::{closed_form, exponent_multi, ClosedFormKind};
use crate::fit::fit_cubic_decay;
use crate::noise::{BathComposition, StaticFieldModel};
use crate::p1::{transition_lines, type2_axes, P1Params};
use crate::sequence::{MergePolicy, Protocol, PulseSequence};
use crate::spin::{
    ensemble_fidelity, sensitivity_table, standard_columns, static_expansion_check, AxisErrors,
    FidelityCurve, PulseErrors, RunConfig,
};

/// Names and contents of the shipped presets.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig1", include_str!("presets/fig1.conf")),
    ("fig2", include_str!("presets/fig2.conf")),
    ("fig3a", include_str!("presets/fig3a.conf")),
    ("fig3b", include_str!("presets/fig3b.conf")),
    ("fig4", include_str!("presets/fig4.conf")),
    ("fig5a", include_str!("presets/fig5a.conf")),
    ("fig5b", include_str!("presets/fig5b.conf")),
    ("fig6", include_str!("presets/fig6.conf")),
    ("fig7a", include_str!("presets/fig7a.conf")),
    ("fig7b", include_str!("presets/fig7b.conf")),
    ("fig8a", include_str!("presets/fig8a.conf")),
    ("fig8b", include_str!("presets/fig8b.conf")),
    ("fig9a", include_str!("presets/fig9a.conf")),
    ("fig9b", include_str!("presets/fig9b.conf")),
    ("fig10a", include_str!("presets/fig10a.conf")),
    ("fig10b", include_str!("presets/fig10b.conf")),
];

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::Config(format!(
                "unknown preset '{name}'; available: {}",
                names.join(", ")
            ))
        })
}

pub fn load_preset(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::parse(preset_text(name)?)
}

/// Process exit code for an error: 2 for bad input, 3 for numerical
/// failures, 1 for I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::Eigen(_) => 3,
        Error::Io { .. } => 1,
        _ => 2,
    }
}

impl ExperimentConfig {
    /// SHA-256 over the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

/// Grid families rescaled to a new period or repeat count.
pub fn with_count(p: &Protocol, n: usize) -> Result<Protocol> {
    Ok(match *p {
        Protocol::Cpmg(_) => Protocol::Cpmg(n),
        Protocol::Xy4(_) => Protocol::Xy4(n),
        Protocol::Xy8(_) => Protocol::Xy8(n),
        Protocol::Pdd(_) => Protocol::Pdd(n),
        Protocol::Sdd(_) => Protocol::Sdd(n),
        Protocol::Cdd { level, .. } => Protocol::Cdd { level, repeats: n },
        Protocol::CddXy4 { level, .. } => Protocol::CddXy4 { level, repeats: n },
        _ => return Err(invalid(format!("{p} has no repeat count for a fixed-tau sweep"))),
    })
}

/// Protocol of `family` with exactly `np` applied pulses.
pub fn protocol_for_pulses(family: &str, np: usize) -> Result<Protocol> {
    let exact = |div: usize, make: fn(usize) -> Protocol| {
        if np > 0 && np.is_multiple_of(div) {
            Ok(make(np / div))
        } else {
            Err(invalid(format!(
                "{family} needs a pulse count divisible by {div}, got {np}"
            )))
        }
    };
    match family {
        "cpmg" => exact(2, Protocol::Cpmg),
        "xy4" => exact(4, Protocol::Xy4),
        "pdd" => exact(4, Protocol::Pdd),
        "xy8" => exact(8, Protocol::Xy8),
        "sdd" => exact(8, Protocol::Sdd),
        "udd" if np >= 1 => Ok(Protocol::Udd(np)),
        "qdd" => (1..=64)
            .map(Protocol::Qdd)
            .find(|p| p.nominal_pulses() == np)
            .ok_or_else(|| invalid(format!("no QDD level has {np} pulses"))),
        _ => Err(Error::Unknown {
            what: "protocol family",
            name: family.into(),
        }),
    }
}

/// `(T, protocol)` pairs of a grid.
pub fn grid_points(p: &Protocol, grid: &TimeGrid) -> Result<Vec<(f64, Protocol)>> {
    match grid {
        TimeGrid::Total { t_min, t_max, points } => Ok((0..*points)
            .map(|i| {
                let t = if *points == 1 {
                    *t_min
                } else {
                    t_min + (t_max - t_min) * i as f64 / (*points - 1) as f64
                };
                (t, *p)
            })
            .collect()),
        TimeGrid::FixedTau { tau, counts } => counts
            .iter()
            .map(|&n| {
                let q = with_count(p, n)?;
                let units = q.grid_units().expect("grid family") as f64;
                Ok((units * tau, q))
            })
            .collect(),
    }
}

/// Ideal-pulse `S_X(T)` from the exact filter-function exponent, including
/// the dephasing of any unrefocused static field.
pub fn analytic_fidelity(
    seq: &PulseSequence,
    bath: &BathComposition,
    static_field: &StaticFieldModel,
) -> Result<f64> {
    let f = seq.filter_function();
    let w = exponent_multi(&f, bath)?;
    let area = f.integral();
    let probs = static_field.iz_probabilities;
    let mean_cos: f64 = [(1i8, probs[0]), (-1, probs[1]), (0, probs[2])]
        .iter()
        .map(|&(iz, p)| p * (static_field.field_for(iz) * area).cos())
        .sum();
    let s = (-w).exp() * mean_cos;
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Numerical(format!("non-finite fidelity for {}", seq.label)))
    }
}

/// `T` where the analytic fidelity of `p` first drops to `1/e`.
pub fn analytic_t1e(p: &Protocol, bath: &BathComposition, static_field: &StaticFieldModel) -> Result<f64> {
    let s =
        |t: f64| -> Result<f64> { analytic_fidelity(&p.build(t, MergePolicy::Cancel)?, bath, static_field) };
    let target = 1.0 / E;
    let mut hi = 1.0;
    while s(hi)? > target {
        hi *= 2.0;
        if hi > 1e7 {
            return Err(Error::Numerical(format!("{p} does not decay")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if s(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn run_config(cfg: &ExperimentConfig, seqs: Vec<PulseSequence>, errors: PulseErrors) -> RunConfig {
    RunConfig {
        sequences: seqs,
        bath: cfg.bath.clone(),
        static_field: cfg.static_field,
        errors,
        n_trajectories: cfg.trajectories,
        seed: cfg.seed,
    }
}

fn curve_rows(table: &mut ResultTable, curve: &FidelityCurve, label: &str, np: &[usize], seed: u64) {
    for i in 0..curve.t.len() {
        table.push(vec![
            Cell::num(curve.t[i]),
            Cell::num(curve.sx[i]),
            Cell::num(curve.sx_err[i]),
            Cell::num(curve.sy[i]),
            Cell::num(curve.sy_err[i]),
            Cell::text(label),
            Cell::from(np[i]),
            Cell::Int(seed as i64),
        ]);
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(&cfg.name, cfg.hash(), cfg.seed, &CURVE_COLUMNS);
    for p in &cfg.protocols {
        let points = grid_points(p, &cfg.grid)?;
        let seqs = points
            .iter()
            .map(|(t, q)| q.build(*t, MergePolicy::Keep))
            .collect::<Result<Vec<_>>>()?;
        let np: Vec<usize> = points.iter().map(|(_, q)| q.nominal_pulses()).collect();
        let curve = ensemble_fidelity(&run_config(cfg, seqs.clone(), cfg.errors))?;
        curve_rows(&mut table, &curve, &p.to_string(), &np, cfg.seed);
        if cfg.ideal_reference && !cfg.errors.is_ideal() {
            let ideal = ensemble_fidelity(&run_config(cfg, seqs, PulseErrors::ideal()))?;
            curve_rows(&mut table, &ideal, &format!("{p} ideal"), &np, cfg.seed);
        }
    }
    Ok(table)
}

fn analytic(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(&cfg.name, cfg.hash(), cfg.seed, &ANALYTIC_COLUMNS);
    let kinds = cfg
        .closed_forms
        .iter()
        .map(|k| k.parse::<ClosedFormKind>())
        .collect::<Result<Vec<_>>>()?;
    let effective = if kinds.is_empty() {
        None
    } else {
        Some(cfg.bath.compose()?.as_ou_params()?)
    };
    for p in &cfg.protocols {
        for (t, q) in grid_points(p, &cfg.grid)? {
            let seq = q.build(t, MergePolicy::Cancel)?;
            let label = q.to_string();
            let np = q.nominal_pulses();
            let s = analytic_fidelity(&seq, &cfg.bath, &cfg.static_field)?;
            table.push(vec![
                Cell::num(t),
                Cell::num(s),
                Cell::text("exact"),
                Cell::text(&label),
                Cell::from(np),
            ]);
            if let (Some(ou), Some(nd)) = (&effective, q.delays()) {
                for k in &kinds {
                    let v = closed_form(*k, ou, t, nd as f64)?;
                    table.push(vec![
                        Cell::num(t),
                        Cell::num(v.value),
                        Cell::text(k.name()),
                        Cell::text(&label),
                        Cell::from(np),
                    ]);
                }
            }
        }
    }
    Ok(table)
}

/// Total-time grid bracketing the `1/e` point, for decay-time fits.
pub fn fit_grid(t1e: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| t1e * (0.45 + 0.85 * i as f64 / (points - 1) as f64))
        .collect()
}

fn scan(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(&cfg.name, cfg.hash(), cfg.seed, &SCAN_COLUMNS);
    for fam in &cfg.families {
        for &np in &cfg.pulse_counts {
            let p = protocol_for_pulses(fam, np)?;
            let label = p.to_string();
            let guess = analytic_t1e(&p, &cfg.bath, &cfg.static_field)?;
            let ts = fit_grid(guess, cfg.scan_points);
            if matches!(cfg.scan_method, ScanMethod::Analytic | ScanMethod::Both) {
                let s = ts
                    .iter()
                    .map(|&t| {
                        analytic_fidelity(&p.build(t, MergePolicy::Cancel)?, &cfg.bath, &cfg.static_field)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let fit = fit_cubic_decay(&ts, &s, None, cfg.fit_window)?;
                table.push(vec![
                    Cell::text(&label),
                    Cell::from(np),
                    Cell::num(fit.t1e),
                    Cell::num(fit.t1e_err),
                    Cell::text("analytic-fit"),
                ]);
            }
            if matches!(cfg.scan_method, ScanMethod::Simulate | ScanMethod::Both) {
                let seqs = ts
                    .iter()
                    .map(|&t| p.build(t, MergePolicy::Keep))
                    .collect::<Result<Vec<_>>>()?;
                let curve = ensemble_fidelity(&run_config(cfg, seqs, cfg.errors))?;
                let fit = fit_cubic_decay(&curve.t, &curve.sx, Some(&curve.sx_err), cfg.fit_window)?;
                table.push(vec![
                    Cell::text(&label),
                    Cell::from(np),
                    Cell::num(fit.t1e),
                    Cell::num(fit.t1e_err),
                    Cell::text("mc-fit"),
                ]);
            }
        }
    }
    Ok(table)
}

/// Runs the experiment a config describes.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Analytic => analytic(cfg),
        Mode::Simulate => simulate(cfg),
        Mode::Scan => scan(cfg),
    }
}

/// ESR lines of both P1 types.
pub fn p1_table(params: &P1Params, floor: f64) -> Result<ResultTable> {
    let hash = sha256_hex(
        serde_json::to_string(&(params, floor))
            .expect("serializes")
            .as_bytes(),
    );
    let mut table = ResultTable::new("p1-lines", hash, 0, &P1_COLUMNS);
    for axis in [[0.0, 0.0, 1.0], type2_axes()[0]] {
        for l in transition_lines(&params.with_axis(axis), floor)? {
            table.push(vec![
                Cell::Int(i64::from(l.p1_type)),
                Cell::num(l.frequency),
                Cell::num(l.weight),
                Cell::Int(i64::from(l.iz_label)),
            ]);
        }
    }
    Ok(table)
}

/// Static-error expansion residuals and the first-order sensitivity table.
pub fn check_table() -> Result<ResultTable> {
    let mut table = ResultTable::new("check", sha256_hex(b"check"), 0, &CHECK_COLUMNS);
    let e = AxisErrors {
        eps_x: 1.0,
        eps_y: 0.6,
        n_y: 0.3,
        n_z: 0.7,
        m_x: 0.5,
        m_z: -0.4,
    };
    let udd_e = AxisErrors { n_y: 0.0, ..e };
    let cases: Vec<(Protocol, f64)> = vec![
        (Protocol::Cpmg(1), 0.3),
        (Protocol::Xy4(1), 0.3),
        (Protocol::Pdd(1), 0.3),
        (Protocol::Sdd(1), 0.3),
        (Protocol::Xy8(1), 0.3),
        (Protocol::Cdd { level: 2, repeats: 1 }, 0.3),
        (Protocol::CddXy4 { level: 2, repeats: 1 }, 0.3),
        (Protocol::Udd(4), 0.3),
        (Protocol::Udd(5), 0.3),
        (Protocol::Udd(4), 0.0),
        (Protocol::Qdd(2), 0.0),
        (Protocol::Qdd(3), 0.0),
    ];
    for (p, phi) in cases {
        let errs = if matches!(p, Protocol::Udd(_)) { udd_e } else { e };
        let r = static_expansion_check(&p, &errs, phi)?;
        let last = r.ratios.last().copied().unwrap_or(f64::NAN);
        table.push(vec![
            Cell::text("expansion"),
            Cell::text(p.to_string()),
            Cell::text(format!(
                "residual ratio at smallest lambda, phi_d={phi}, order {}",
                r.order
            )),
            Cell::num(last),
            Cell::text(if r.scaling_ok() { "yes" } else { "no" }),
        ]);
        if let Some(c) = r.coefficient_error {
            table.push(vec![
                Cell::text("coefficient"),
                Cell::text(p.to_string()),
                Cell::text(format!("relative error, lambda={}", r.lambdas[0])),
                Cell::num(c),
                Cell::text(if c < 0.01 { "yes" } else { "no" }),
            ]);
        }
    }
    for (label, s) in sensitivity_table(&standard_columns())? {
        for (state, list) in [("S_X", &s.sx), ("S_Y", &s.sy)] {
            let names: Vec<&str> = list.iter().map(|c| c.name()).collect();
            table.push(vec![
                Cell::text("sensitivity"),
                Cell::text(label),
                Cell::text(state),
                Cell::text(if names.is_empty() {
                    "0".to_string()
                } else {
                    names.join(" ")
                }),
                Cell::text("-"),
            ]);
        }
    }
    Ok(table)
}
