//! Self-generated baselines. They pin current behaviour, not external data.

use ddkit::harness::{load_preset, run_experiment};

fn max_deviation(preset: &str, trajectories: usize) -> (f64, f64) {
    let mut cfg = load_preset(preset).unwrap();
    cfg.trajectories = trajectories;
    let table = run_experiment(&cfg).unwrap();
    let (sx, sy) = (table.column("SX").unwrap(), table.column("SY").unwrap());
    let label = cfg.protocols[0].to_string();
    let faulty: Vec<_> = table.rows_for(&label).collect();
    let ideal_label = format!("{label} ideal");
    let ideal: Vec<_> = table.rows_for(&ideal_label).collect();
    let mut dx: f64 = 0.0;
    let mut dy: f64 = 0.0;
    for (a, b) in faulty.iter().zip(&ideal) {
        dx = dx.max((a[sx].as_f64().unwrap() - b[sx].as_f64().unwrap()).abs());
        dy = dy.max((a[sy].as_f64().unwrap() - b[sy].as_f64().unwrap()).abs());
    }
    (dx, dy)
}

#[test]
fn cpmg_error_deviation_baseline() {
    let (dx, dy) = max_deviation("fig6", 2_000);
    println!("fig6 at 2000 trajectories: max dS_X {dx:.9}, max dS_Y {dy:.9}");
    assert!((dx - BASE_FIG6.0).abs() < 1e-9, "{dx}");
    assert!((dy - BASE_FIG6.1).abs() < 1e-9, "{dy}");
}

#[test]
fn xy4_error_deviation_baseline() {
    let (dx, dy) = max_deviation("fig7b", 2_000);
    println!("fig7b at 2000 trajectories: max dS_X {dx:.9}, max dS_Y {dy:.9}");
    assert!((dx - BASE_FIG7B.0).abs() < 1e-9, "{dx}");
    assert!((dy - BASE_FIG7B.1).abs() < 1e-9, "{dy}");
}

// (max |ΔS_X|, max |ΔS_Y|) between faulty and ideal pulses, seed from the preset.
const BASE_FIG6: (f64, f64) = (0.001854409, 0.659242741);
const BASE_FIG7B: (f64, f64) = (0.099962679, 0.099964640);
