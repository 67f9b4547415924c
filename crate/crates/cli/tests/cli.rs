use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_leonard"))
}

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn validate_d1_fixture() {
    let o = run(&["validate", &fixture("fix-d1.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["ok"], true);
}

#[test]
fn gen_reproduces_krawtchouk_fixture() {
    let o = run(&[
        "gen", "krawtchouk", "--d", "2", "--field", "rational", "--param", "s=1", "sstar=1", "r=2", "theta0=0",
        "thetastar0=0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let want: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture("fix-kraw2.json")).unwrap()).unwrap();
    assert_eq!(json(&o), want);
}

#[test]
fn orphan_scoreboard_skips_s_matrix() {
    let o = run(&["verify", "--all", &fixture("fix-orphan.json")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines.iter().filter(|l| l.ends_with(": pass")).count(), 11);
    assert_eq!(lines[11], "s-matrix: skipped: base ±1");
}

const FAMILY_MATRIX: &[(&str, &str, &[&str])] = &[
    ("q-racah", "rational", &["q=2", "h=1", "hstar=1", "s=1", "sstar=1", "r1=3"]),
    ("q-hahn", "rational", &["q=2", "h=1", "hstar=1", "sstar=1", "r=3"]),
    ("dual-q-hahn", "rational", &["q=2", "h=1", "hstar=1", "s=1", "r=3"]),
    ("quantum-q-krawtchouk", "rational", &["q=2", "hstar=1", "r=3", "s=1"]),
    ("q-krawtchouk", "prime:11", &["q=2", "h=1", "hstar=1", "sstar=1"]),
    ("affine-q-krawtchouk", "prime:11", &["q=2", "h=1", "hstar=1", "r=1"]),
    ("dual-q-krawtchouk", "rational", &["q=3", "h=1", "hstar=2", "s=1"]),
    ("racah", "rational", &["h=1", "hstar=1", "s=10", "sstar=10", "r1=5"]),
    ("hahn", "prime:7", &["hstar=1", "s=1", "sstar=6", "r=3"]),
    ("dual-hahn", "rational", &["h=1", "s=10", "sstar=1", "r=5"]),
    ("krawtchouk", "rational", &["r=2", "s=1", "sstar=1"]),
    ("bannai-ito", "rational", &["h=1", "hstar=1", "s=10", "sstar=10", "r1=-5"]),
    ("orphan", "ext:2:2:1,1,1", &["h=1", "hstar=w", "s=w", "sstar=w", "r=w"]),
];

#[test]
fn every_family_pipes_into_a_clean_scoreboard() {
    for (family, field, params) in FAMILY_MATRIX {
        let mut args = vec!["gen", family, "--d", "3", "--field", field, "--param"];
        args.extend_from_slice(params);
        let g = run(&args);
        assert_eq!(g.status.code(), Some(0), "{family}: {}", String::from_utf8_lossy(&g.stderr));
        let v = run_stdin(&["verify", "--all", "-"], &g.stdout);
        assert_eq!(v.status.code(), Some(0), "{family}:\n{}", stdout(&v));
        assert_eq!(stdout(&v).lines().count(), 12);

        let c = run_stdin(&["classify", "-"], &g.stdout);
        assert_eq!(c.status.code(), Some(0), "{family}: {}", String::from_utf8_lossy(&c.stderr));
        let w = json(&c);
        for key in ["case", "family", "parameters", "field_of_witness"] {
            assert!(w.get(key).is_some(), "{family}: missing {key}");
        }
    }
}

#[test]
fn classify_witness_regenerates_through_gen() {
    for (family, field, params) in FAMILY_MATRIX.iter().filter(|(_, f, _)| *f == "rational") {
        let mut args = vec!["gen", family, "--d", "3", "--field", field, "--param"];
        args.extend_from_slice(params);
        let g = run(&args);
        let w = json(&run_stdin(&["classify", "-"], &g.stdout));
        assert_eq!(w["field_of_witness"], "Q");
        let named: Vec<String> = w["parameters"]
            .as_object()
            .unwrap()
            .iter()
            .filter(|(k, _)| k.as_str() != "d")
            .map(|(k, v)| format!("{k}={}", v.as_str().unwrap()))
            .collect();
        let fam = w["family"].as_str().unwrap();
        let mut args = vec!["gen", fam, "--d", "3", "--param"];
        args.extend(named.iter().map(String::as_str));
        let again = run(&args);
        assert_eq!(again.status.code(), Some(0), "{family}: {}", String::from_utf8_lossy(&again.stderr));
        assert_eq!(json(&again), json(&g), "{family}");
    }
}

#[test]
fn classify_krawtchouk_fixture() {
    let o = run(&["classify", &fixture("fix-kraw2.json")]);
    assert_eq!(o.status.code(), Some(0));
    let w = json(&o);
    assert_eq!(w["case"], "II");
    assert_eq!(w["family"], "krawtchouk");
    assert_eq!(w["parameters"]["r"], "2");
    assert_eq!(w["field_of_witness"], "Q");
}

#[test]
fn reports_and_tables() {
    let o = run(&["weights", &fixture("fix-d1.json")]);
    assert_eq!(json(&o)["k"], serde_json::json!(["1", "-1/2"]));
    assert_eq!(json(&o)["nu"], "1/2");
    let o = run(&["recurrence", &fixture("fix-d1.json")]);
    assert_eq!(json(&o)["a"], serde_json::json!(["-1", "2"]));
    let o = run(&["poly-table", &fixture("fix-kraw2.json")]);
    assert_eq!(json(&o)["rows"][1], serde_json::json!(["1", "3/4", "1/2"]));
    let o = run(&["matrices", &fixture("fix-d1.json"), "--name", "G"]);
    assert_eq!(json(&o)["G"]["rows"], serde_json::json!([["1", "-1"], ["0", "1"]]));
    let o = run(&["enumerate", "--field", "prime:5", "--d", "2", "--count"]);
    assert_eq!(stdout(&o).trim(), "6000");
}

#[test]
fn exit_codes() {
    // malformed JSON, unknown family, bad field flag, unknown parameter
    assert_eq!(run_stdin(&["validate", "-"], b"{").status.code(), Some(2));
    assert_eq!(run(&["gen", "jacobi", "--d", "2"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--field", "prime:6", "--d", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["gen", "krawtchouk", "--d", "2", "--param", "s=1", "sstar=1", "r=2", "q=3"]).status.code(),
        Some(2)
    );
    // inadmissible parameters and failing checks
    assert_eq!(
        run(&["gen", "krawtchouk", "--d", "2", "--param", "s=1", "sstar=1", "r=1"]).status.code(),
        Some(1)
    );
    let bad = br#"{"field":{"kind":"rational"},"d":1,"theta":["0","1"],"theta_star":["0","1"],"varphi":["1"],"phi":["5"]}"#;
    assert_eq!(run_stdin(&["validate", "-"], bad).status.code(), Some(1));
    let v = run_stdin(&["verify", "--all", "-"], bad);
    assert_eq!(v.status.code(), Some(1));
    assert_eq!(stdout(&v).lines().filter(|l| !l.starts_with("  ")).count(), 12);
}

#[test]
fn closed_pipe_is_not_an_error() {
    use std::io::{BufRead, BufReader};
    let mut child = bin()
        .args(["enumerate", "--field", "prime:7", "--d", "3"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut first = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut first).unwrap();
    assert!(first.starts_with('{'));
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
