use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cryoamp"));
    c.env_remove("CRYOAMP_OUT_DIR");
    c
}

fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn dc_sweep_has_four_quantity_columns() {
    let amp = asset("netlists/two_stage_amp.cir");
    let o = run(&["dc", amp.to_str().unwrap(), "--sweep", "V1", "0", "0.8", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "u_supply,i_d,u_ds,p_hemt,p_bias");
    assert_eq!(lines.count(), 81);
}

#[test]
fn missing_file_exits_with_input_error() {
    let o = run(&["dc", "/nonexistent/deck.cir"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr).to_lowercase();
    assert!(err.contains("no such file"), "{err}");
}

#[test]
fn divider_gives_single_row() {
    let o = run(&["dc", asset("netlists/divider.cir").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("v(mid)"));
}

#[test]
fn floating_node_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let deck = dir.path().join("float.cir");
    std::fs::write(&deck, "V1 a 0 1\nR1 a 0 1k\nC1 b c 1p\nR2 b c 1k\n").unwrap();
    let o = run(&["dc", deck.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("floating"));
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let amp = asset("netlists/two_stage_amp.cir");
    let csv_out = run(&["--format", "csv", "ac", amp.to_str().unwrap(), "--points", "20", "-q"]);
    let json_out = run(&["--format", "json", "ac", amp.to_str().unwrap(), "--points", "20", "-q"]);
    assert_eq!(csv_out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(csv_out.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let json: serde_json::Value = serde_json::from_slice(&json_out.stdout).unwrap();
    let objs = json.as_array().unwrap();
    assert_eq!(rows.len(), objs.len());
    for (row, obj) in rows.iter().zip(objs) {
        for (h, cell) in headers.iter().zip(row.iter()) {
            let a: f64 = cell.parse().unwrap();
            let b = obj[h].as_f64().unwrap();
            assert!(a == b || (a - b).abs() <= 1e-8 * a.abs(), "{h}: {a} vs {b}");
        }
    }
}

#[test]
fn outputs_are_deterministic() {
    let amp = asset("netlists/two_stage_amp.cir");
    for args in [
        vec!["ac", amp.to_str().unwrap(), "--points", "50"],
        vec!["--format", "json", "dc", amp.to_str().unwrap()],
        vec!["spectrum", "--points", "512", "--levels", "8"],
        vec!["photons", "--table"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("CRYOAMP_OUT_DIR", dir.path())
        .args(["brightness", "1", "100", "-20"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("brightness.csv")).unwrap();
    assert!(written.starts_with("t_g,t_d,s12_db,t_b"));
}

#[test]
fn explicit_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("levels.svg");
    let o = run(&["--format", "svg", "--out", path.to_str().unwrap(), "spectrum", "--points", "512"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(path).unwrap().starts_with("<svg"));
}

#[test]
fn fit_emits_model_line() {
    let o = run(&["fit", asset("data/iv_synthetic.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with(".model MGF4937 STATZ beta="), "{text}");
    let reparsed = cryoamp::netlist::parse(&format!("{text}R1 a 0 1k\n")).unwrap();
    let p = reparsed.model("MGF4937").unwrap();
    assert!((p.beta / 0.08 - 1.0).abs() < 1e-4);
}

#[test]
fn match_emits_fragment() {
    let o = run(&["match", "5.6k", "600", "450meg"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("Ls ")));
    assert!(text.lines().any(|l| l.starts_with("Cp ") || l.starts_with("Lp ")));
}

#[test]
fn svg_rejected_for_tables() {
    let o = run(&["--format", "svg", "brightness", "1", "1", "-20"]);
    assert_eq!(o.status.code(), Some(2));
}
