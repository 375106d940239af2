use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qre"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn comparison_table_rows() {
    let o = qre(&["paper-example", "--dims", "5..12"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,trace_dist,new_bound,ae11_natural,ae11_base2,winner_natural,winner_base2"
    );
    let row5: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row5[0], "5");
    for i in [1, 2, 4] {
        assert!((row5[i].parse::<f64>().unwrap() - 1.2).abs() < 1e-12);
    }
    assert!((row5[3].parse::<f64>().unwrap() - 0.6 * 4f64.ln()).abs() < 1e-12);
    assert_eq!(&row5[5..], ["old", "tie"]);
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn clean_qubit_sweep_exits_zero() {
    let o = qre(&[
        "sweep", "--dims", "2", "--trials", "10000", "--f", "neg-log",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 violations"));
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    let base = [
        "sweep",
        "--dims",
        "2..4",
        "--trials",
        "40",
        "--seed",
        "9",
        "--chain-q",
        "2",
    ];
    let run = |out: &Path, jobs: &str, format: &str| {
        let mut args = base.to_vec();
        args.extend([
            "--jobs",
            jobs,
            "--format",
            format,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(qre(&args).status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    let csv_one = run(&a, "1", "csv");
    assert_eq!(csv_one, run(&a, "4", "csv"));
    assert_eq!(run(&b, "1", "json"), run(&c, "3", "json"));
    let rows: Value = serde_json::from_slice(&std::fs::read(&b).unwrap()).unwrap();
    let csv_lines = String::from_utf8(csv_one).unwrap().lines().count();
    assert_eq!(rows.as_array().unwrap().len() + 1, csv_lines);
}

#[test]
fn equal_states_give_zero_on_every_route() {
    let dir = tempfile::tempdir().unwrap();
    let m = r#"[[0.5,0.0],[0.1,-0.2],[0.1,0.2],[0.5,0.0]]"#;
    let doc = format!(r#"{{"dim": 2, "rho": {m}, "sigma": {m}}}"#);
    let path = write(dir.path(), "pair.json", &doc);
    let o = qre(&["divergence", "--pair", &path, "--format", "json"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in rows.as_array().unwrap() {
        for key in ["spectral", "direct", "superoperator"] {
            assert!(row[key].as_f64().unwrap().abs() < 1e-14, "{row}");
        }
    }
}

#[test]
fn bounds_report_in_base_two() {
    let o = qre(&[
        "bounds",
        "--dims",
        "3",
        "--seed",
        "4",
        "--f",
        "neg-log",
        "--log-base",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("prior-relative-entropy-base2"));
    assert!(!text.contains("prior-relative-entropy,"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"dims": "3..4", "format": "json", "seed": 1}"#,
    );
    let o = qre(&["paper-example", "--config", &cfg, "--dims", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["d"], 6);

    let wrong = write(dir.path(), "wrong.json", r#"{"command": "sweep"}"#);
    assert_eq!(
        qre(&["paper-example", "--config", &wrong]).status.code(),
        Some(3)
    );
    let unknown = write(dir.path(), "unknown.json", r#"{"dimz": [3]}"#);
    assert_eq!(
        qre(&["paper-example", "--config", &unknown]).status.code(),
        Some(2)
    );
}

#[test]
fn exit_codes() {
    assert_eq!(qre(&["sweep", "--dims", "2-4"]).status.code(), Some(2));
    assert_eq!(
        qre(&["sweep", "--f", "tsallis:q=abc"]).status.code(),
        Some(2)
    );
    assert_eq!(qre(&["nonsense"]).status.code(), Some(2));
    assert_eq!(qre(&["sweep", "--trials", "0"]).status.code(), Some(3));
    assert_eq!(qre(&["sweep", "--f", "tsallis:q=3"]).status.code(), Some(3));
    assert_eq!(
        qre(&["paper-example", "--dims", "2"]).status.code(),
        Some(3)
    );
    assert_eq!(
        qre(&["conjecture", "--dims", "2..4"]).status.code(),
        Some(3)
    );
    assert_eq!(
        qre(&["bounds", "--pair", "/no/such/file.json"])
            .status
            .code(),
        Some(4)
    );
    let o = qre(&[
        "paper-example",
        "--dims",
        "5",
        "--out",
        "/no/such/dir/out.csv",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn seed_is_logged() {
    let o = qre(&["paper-example", "--dims", "5", "--seed", "77"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed=77"));
}

#[test]
fn conjecture_record_is_deterministic() {
    let args = [
        "conjecture",
        "--dims",
        "3..4",
        "--trials",
        "200",
        "--restarts",
        "3",
        "--steps",
        "20",
        "--seed",
        "12",
    ];
    let a = qre(&args);
    let b = qre(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let rec: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(rec["seed"], 12);
    assert!(rec["max_ratio"].as_f64().unwrap() > 0.0);
    assert_eq!(rec["families"].as_array().unwrap().len(), 3);
    assert!(rec["argmax_instance"]["pair"]["rho"].is_array());
}

#[test]
fn repr_check_passes_for_defaults() {
    let o = qre(&["repr-check", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 4 * 60);
}
