use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .env_remove("QWALK_THREADS")
        .output()
        .expect("qwalk runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn verify_diamond_passes_with_closed_form_values() {
    let o = qwalk(&["verify", "--graph", &fixture("diamond.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["passed"], true);
    let q = &r["quantities"];
    assert_eq!(q["first_arrival"][0]["n"], 3);
    assert!((q["first_arrival"][0]["q"].as_f64().unwrap() - 0.790123456790).abs() < 1e-10);
    assert!((q["p_out_series"].as_f64().unwrap() - 0.8).abs() < 1e-10);
    assert!((q["p_out_spectral"].as_f64().unwrap() - 0.8).abs() < 1e-10);
    assert_eq!(q["bound_states"], 4);
    assert_eq!(r["graph_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_line_passes_with_full_transmission() {
    let o = qwalk(&["verify", "--graph", &fixture("line.json")]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert!((r["quantities"]["p_out_spectral"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn verify_twisted_line_passes_with_time_reversal_as_info() {
    let o = qwalk(&["verify", "--graph", &fixture("twisted_line.json")]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    let tr = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "time_reversal")
        .unwrap();
    assert_eq!(tr["status"], "info");
}

#[test]
fn verify_bad_coin_fails_with_residual() {
    let o = qwalk(&["verify", "--graph", &fixture("bad_coin.json")]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    assert_eq!(r["passed"], false);
    assert_eq!(r["checks"][0]["name"], "coin_constraints");
    assert_eq!(r["checks"][0]["residual"].as_f64(), Some(-0.25));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(
        stderr.contains("coin_constraints,fail,-2.5000000000000000e-1"),
        "{stderr}"
    );
}

#[test]
fn schema_errors_exit_two_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(
        &path,
        r#"{"vertices": [0, 1], "edges": [[0, 1, "a"]], "entry": 0, "exit": "one"}"#,
    )
    .unwrap();
    let o = qwalk(&["verify", "--graph", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/exit"));

    let missing = dir.path().join("nope.json");
    let o = qwalk(&["pout", "--graph", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let d = fixture("diamond.json");
    assert_eq!(qwalk(&["emit-plotdata", "bogus", "--graph", &d]).status.code(), Some(2));
    assert_eq!(qwalk(&["pout"]).status.code(), Some(2));
    assert_eq!(qwalk(&["pout", "--graph", &d, "--seed", "1"]).status.code(), Some(2));
    assert_eq!(
        qwalk(&["oracle", "--graph", &d, "--from", "L1>0", "--to", "2>R1", "--steps", "17"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qwalk(&["oracle", "--graph", &d, "--from", "0>2", "--to", "2>R1", "--steps", "3"])
            .status
            .code(),
        Some(2)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(["time-reversal", "--graph", &d])
        .env("QWALK_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let d = fixture("diamond.json");
    let runs: Vec<Vec<u8>> = ["1", "4"]
        .iter()
        .flat_map(|threads| {
            (0..2).map(move |_| {
                Command::new(env!("CARGO_BIN_EXE_qwalk"))
                    .args(["verify", "--seed", "11"])
                    .env("QWALK_THREADS", threads)
                    .output()
                    .unwrap()
                    .stdout
            })
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
    let a = qwalk(&["scatter", "--graph", &d, "--samples", "128"]).stdout;
    let b = qwalk(&["scatter", "--graph", &d, "--samples", "128"]).stdout;
    assert_eq!(a, b);
    assert!(!a.contains(&b'\r'));
}

#[test]
fn plotdata_qseries_rows() {
    let o = qwalk(&[
        "emit-plotdata",
        "qseries",
        "--graph",
        &fixture("diamond.json"),
        "--n-max",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("n,q\n"));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 21);
    for row in &rows {
        let n: usize = row[0].parse().unwrap();
        let q: f64 = row[1].parse().unwrap();
        match n {
            3 => assert!((q - 64.0 / 81.0).abs() < 1e-12 && row[1].starts_with("7.9012")),
            7 => assert!((q - 64.0 / 6561.0).abs() < 1e-12 && row[1].starts_with("9.754")),
            11 | 15 | 19 => assert!(q > 0.0),
            _ => assert!(q.abs() < 1e-15, "q({n}) = {q}"),
        }
        // 17 significant digits
        let digits = row[1].split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(digits.len(), 17);
    }
}

#[test]
fn plotdata_transmission() {
    let o = qwalk(&[
        "emit-plotdata",
        "transmission",
        "--graph",
        &fixture("diamond.json"),
        "--samples",
        "8",
    ]);
    assert!(stdout(&o).starts_with("theta,t2\n"));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 8);
    let theta: f64 = rows[2][0].parse().unwrap();
    let t2: f64 = rows[2][1].parse().unwrap();
    assert!((theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!((t2 - 1.0).abs() < 1e-12);

    let o = qwalk(&["emit-plotdata", "transmission", "--graph", &fixture("line.json")]);
    for row in csv_rows(&o) {
        assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn plotdata_spectrum_has_four_unit_eigenvalues() {
    let o = qwalk(&["emit-plotdata", "spectrum", "--graph", &fixture("diamond.json")]);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 8);
    let unit = rows
        .iter()
        .filter(|r| (r[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-8)
        .count();
    assert_eq!(unit, 4);
}

#[test]
fn simulate_measured_table() {
    let o = qwalk(&[
        "simulate",
        "--graph",
        &fixture("diamond.json"),
        "--steps",
        "8",
        "--measured",
    ]);
    assert!(stdout(&o).starts_with("n,q,cumulative,remaining\n"));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 9);
    let q3: f64 = rows[3][1].parse().unwrap();
    assert!((q3 - 64.0 / 81.0).abs() < 1e-12);
    for r in &rows {
        let c: f64 = r[2].parse().unwrap();
        let rem: f64 = r[3].parse().unwrap();
        assert!((c + rem - 1.0).abs() < 1e-12);
    }

    let o = qwalk(&[
        "simulate",
        "--graph",
        &fixture("diamond.json"),
        "--steps",
        "3",
        "--format",
        "json",
    ]);
    let v = json(&o);
    assert_eq!(v["columns"][1], "probability");
    assert!((v["rows"][3][1].as_f64().unwrap() - 64.0 / 81.0).abs() < 1e-12);
}

#[test]
fn scatter_matches_closed_form() {
    let o = qwalk(&["scatter", "--graph", &fixture("diamond.json"), "--direction", "right"]);
    assert!(stdout(&o).starts_with("theta,re_t,im_t,abs_t2,re_r,im_r\n"));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 64);
    for r in rows {
        let f: Vec<f64> = r.iter().map(|x| x.parse().unwrap()).collect();
        let z = num_complex::Complex64::from_polar(1.0, f[0]);
        let t = 8.0 * z.powu(3) / (9.0 - z.powu(4));
        assert!((f[1] - t.re).abs() < 1e-10 && (f[2] - t.im).abs() < 1e-10);
    }
}

#[test]
fn oracle_bound_states_time_reversal_pout() {
    let d = fixture("diamond.json");
    let o = qwalk(&[
        "oracle", "--graph", &d, "--from", "L1>0", "--to", "2>R1", "--steps", "3",
    ]);
    let v = json(&o);
    assert!((v["amplitude"][0].as_f64().unwrap() - 8.0 / 9.0).abs() < 1e-15);
    assert_eq!(v["path_count"], 2);

    let v = json(&qwalk(&["bound-states", "--graph", &d]));
    let states = v.as_array().unwrap();
    assert_eq!(states.len(), 4);
    for s in states {
        let support = s["support"].as_object().unwrap();
        assert!(!support.is_empty());
        assert!(support.keys().all(|k| k.contains('#')));
    }

    let v = json(&qwalk(&["time-reversal", "--graph", &fixture("twisted_line.json")]));
    assert_eq!(v["holds"], false);
    assert!(v["residual"].as_f64().unwrap() > 1.0);

    let v = json(&qwalk(&["pout", "--graph", &d]));
    assert!((v["p_out_spectral"].as_f64().unwrap() - 0.8).abs() < 1e-10);
    assert!(v["discrepancy"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["converged"], true);
}

#[test]
fn verify_output_table_is_written_and_cited() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("checks.csv");
    let o = qwalk(&[
        "verify",
        "--graph",
        &fixture("diamond.json"),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["output_table"].as_str(), path.to_str());
    let table = std::fs::read_to_string(&path).unwrap();
    assert!(table.starts_with("name,status,residual,tolerance\n"));
    assert_eq!(table.lines().count(), r["checks"].as_array().unwrap().len() + 1);
}

#[test]
fn qseries_with_seeded_graph_is_a_probability_table() {
    let o = qwalk(&["qseries", "--seed", "5", "--n-max", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 31);
    let total: f64 = rows.last().unwrap()[2].parse().unwrap();
    assert!((0.0..=1.0 + 1e-12).contains(&total));
}
