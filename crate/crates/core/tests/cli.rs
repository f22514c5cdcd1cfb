use std::process::{Command, Output};

use ddkit::harness::ResultTable;

fn ddkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn p1_lines_csv() {
    let o = ddkit(&["p1-lines"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "type,freq_mhz,weight,iz_label");
    assert_eq!(rows.len(), 7);
    assert!(rows[1].starts_with("1,217.69"));
}

#[test]
fn p1_lines_follow_field() {
    let o = ddkit(&["p1-lines", "--b0", "200", "--p", "-4"]);
    assert!(o.status.success());
    let first: f64 = stdout(&o)
        .lines()
        .nth(5)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(first > 400.0, "{first}");
}

#[test]
fn unknown_preset_is_a_config_error() {
    for args in [
        &["simulate", "--preset", "fig42"][..],
        &["analytic", "--preset", ""][..],
    ] {
        let o = ddkit(args);
        assert_eq!(o.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));
    }
}

#[test]
fn mode_mismatch_and_bad_files() {
    // fig3a lists protocols but no scan families.
    assert_eq!(ddkit(&["scan", "--preset", "fig3a"]).status.code(), Some(2));
    assert_eq!(
        ddkit(&["simulate", "--config", "/nonexistent/x.conf"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(ddkit(&["simulate"]).status.code(), Some(2));

    let dir = std::env::temp_dir().join(format!("ddkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "[experiment]\nprotocols = xy4(1)\nwobble = 3\n").unwrap();
    let o = ddkit(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    // A bath without noise never decays: a numerical failure.
    let flat = dir.join("flat.conf");
    std::fs::write(
        &flat,
        "[experiment]\nfamilies = xy4\nnp = 8\n[bath]\nb = 0\ndetuning_mhz = 0\na0_mhz = 0\n",
    )
    .unwrap();
    assert_eq!(
        ddkit(&["scan", "--config", flat.to_str().unwrap()]).status.code(),
        Some(3)
    );
}

#[test]
fn simulate_overrides_and_json_file() {
    let dir = std::env::temp_dir().join(format!("ddkit-json-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("fig7a.json");
    let args = [
        "simulate",
        "--preset",
        "fig7a",
        "--trajectories",
        "600",
        "--seed",
        "44",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ];
    let o = ddkit(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = ResultTable::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(table.seed, 44);
    assert_eq!(table.experiment, "fig7a");
    assert_eq!(table.rows.len(), 48);

    let csv = |seed: &str| {
        stdout(&ddkit(&[
            "simulate",
            "--preset",
            "fig7a",
            "--trajectories",
            "600",
            "--seed",
            seed,
        ]))
    };
    assert_eq!(csv("44"), csv("44"));
    assert_ne!(csv("44"), csv("45"));
}

#[test]
fn check_reports_every_suite() {
    let o = ddkit(&["check"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("suite,protocol,detail,value,pass"));
    assert!(!text.contains(",no\n"), "{text}");
    assert_eq!(text.matches("sensitivity,").count(), 16);
}

#[test]
fn analytic_fig1_has_envelopes() {
    let text = stdout(&ddkit(&["analytic", "--preset", "fig1"]));
    for m in ["exact", "pdd_short", "pdd_long"] {
        assert_eq!(text.matches(&format!(",{m},")).count(), 50, "{m}");
    }
}
