use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;
use tempfile::TempDir;

const A2: &str =
    r#"{"ring": {"field": {"Fp": 7}, "vars": ["y"], "f": "y^3", "trunc": 12}, "phi": [["y"]], "psi": [["y^2"]]}"#;
const NOT_MF: &str =
    r#"{"ring": {"field": {"Fp": 7}, "vars": ["y"], "f": "y^3", "trunc": 12}, "phi": [["y"]], "psi": [["y^3"]]}"#;
const MALFORMED: &str =
    r#"{"ring": {"field": {"Fp": 7}, "vars": ["y"], "f": "y^3", "trunc": 12}, "phi": [["y*+"]], "psi": [["y^2"]]}"#;
const A7_CURVE: &str = r#"{"ring": {"field": {"Fp": 7}, "vars": ["x","y"], "f": "x^2 + y^8", "trunc": 12},
  "phi": [["x","y^4"],["-y^4","x"]], "psi": [["x","-y^4"],["y^4","x"]]}"#;
const NODE_MF: &str =
    r#"{"ring": {"field": {"Fp": 7}, "vars": ["x","y"], "f": "x*y", "trunc": 12}, "phi": [["x"]], "psi": [["y"]]}"#;
const NODE_RING: &str = "field = { Fp = 7 }\nvars = [\"x\", \"y\"]\nf = \"x*y\"\ntrunc = 12\n";
const CUBIC: &str = "field = { Fp = 7 }\nvars = [\"x\", \"y\", \"z\"]\nf = \"x^3 + y^3 + z^3\"\ntrunc = 8\n";
const CURVE: &str = r#"{"field": {"Fp": 101}, "semigroup": [3, 7], "trunc": 30}"#;

struct Fixtures {
    dir: TempDir,
}

impl Fixtures {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        for (name, text) in [
            ("a2.json", A2),
            ("not_mf.json", NOT_MF),
            ("malformed.json", MALFORMED),
            ("a7c.json", A7_CURVE),
            ("node.json", NODE_MF),
            ("node.toml", NODE_RING),
            ("cubic.toml", CUBIC),
            ("curve.json", CURVE),
        ] {
            std::fs::write(dir.path().join(name), text).unwrap();
        }
        Fixtures { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }
}

fn mflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mflab"))
        .args(args)
        .env_remove("MFLAB_TRUNC")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn schema_for(command: &str) -> JSONSchema {
    let index: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_dir().join("index.json")).unwrap()).unwrap();
    let file = index[command]
        .as_str()
        .unwrap_or_else(|| panic!("no schema for `{command}`"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_dir().join(file)).unwrap()).unwrap();
    JSONSchema::compile(&schema).unwrap()
}

fn assert_valid(command: &str, v: &Value) {
    let schema = schema_for(command);
    let msgs: Vec<String> = match schema.validate(v) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("`{command}` output violates its schema: {msgs:?}\n{v:#}");
}

/// Runs a command expected to succeed and checks its JSON against the schema.
fn run_valid(args: &[&str], expected_code: i32) -> Value {
    let o = mflab(args);
    assert_eq!(
        code(&o),
        expected_code,
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = stdout_json(&o);
    let command = v["command"].as_str().unwrap().to_string();
    assert_valid(&command, &v);
    v
}

#[test]
fn ring_check_hypersurface_and_curve() {
    let fx = Fixtures::new();
    let v = run_valid(&["ring", "check", &fx.path("cubic.toml")], 0);
    assert_eq!(v["command"], "ring check");
    assert_eq!(v["trunc"], 8);
    let v = run_valid(&["ring", "check", &fx.path("curve.json")], 0);
    assert_eq!(v["status"], "pass");
}

#[test]
fn mf_commands_match_their_schemas() {
    let fx = Fixtures::new();
    let a2 = fx.path("a2.json");
    run_valid(&["mf", "validate", &a2, &fx.path("node.json")], 0);
    for op in ["shift", "reduce", "transpose", "tau"] {
        run_valid(&["mf", op, &a2], 0);
    }
    let v = run_valid(&["mf", "iso", &a2, &a2], 0);
    assert_eq!(v["status"], "pass");
}

#[test]
fn shifted_module_is_not_isomorphic() {
    let fx = Fixtures::new();
    let out = fx.path("a2_shift.json");
    run_valid(&["mf", "shift", &fx.path("a2.json"), "--out", &out], 0);
    let v = run_valid(&["mf", "iso", &fx.path("a2.json"), &out], 1);
    assert_eq!(v["status"], "fail");
}

#[test]
fn transform_output_round_trips_through_the_file_format() {
    let fx = Fixtures::new();
    let once = fx.path("once.json");
    let twice = fx.path("twice.json");
    run_valid(&["mf", "shift", &fx.path("a2.json"), "--out", &once], 0);
    run_valid(&["mf", "shift", &once, "--out", &twice], 0);
    run_valid(&["mf", "validate", &once, &twice], 0);
    let v = run_valid(&["mf", "iso", &fx.path("a2.json"), &twice], 0);
    assert_eq!(v["status"], "pass");
}

#[test]
fn knoerrer_commands_match_their_schemas() {
    let fx = Fixtures::new();
    let a2 = fx.path("a2.json");
    run_valid(&["knoerrer", "sharp", &a2], 0);
    let sharp = fx.path("a2_sharp.json");
    run_valid(&["knoerrer", "sharp", &a2, "--out", &sharp], 0);
    run_valid(&["knoerrer", "flat", &sharp], 0);
    let v = run_valid(&["knoerrer", "verify", &a2, &fx.path("node.json"), "--section"], 0);
    assert_eq!(v["status"], "pass");
}

#[test]
fn hom_and_invariants_match_their_schemas() {
    let fx = Fixtures::new();
    let node = fx.path("node.json");
    let v = run_valid(&["hom", "stable", &node, &node], 0);
    assert_eq!(v["value"], 1);
    for inv in ["hlength", "betti", "mult", "annexp"] {
        run_valid(&["invariant", inv, &node], 0);
    }
    let v = run_valid(&["resolve", &node, "--steps", "4"], 0);
    assert_eq!(v["command"], "resolve");
    run_valid(&["approx-k", "--ring", &fx.path("node.toml")], 0);
}

#[test]
fn experiments_match_their_schemas() {
    let fx = Fixtures::new();
    run_valid(&["exp", "catalog", "--family", "An", "--max", "3"], 0);
    run_valid(&["exp", "harada-sai", "--standard", "3", "--x", "y"], 0);
    run_valid(&["exp", "knoerrer-transfer", "--family", "An", "--n", "3"], 0);
    run_valid(&["exp", "kawasaki", "--ring", &fx.path("cubic.toml"), "--n", "4"], 0);
    let v = run_valid(&["exp", "bt-family", "--count", "0"], 0);
    assert_eq!(v["items"].as_array().unwrap().len(), 0);
}

#[test]
fn non_factorization_exits_one() {
    let fx = Fixtures::new();
    let o = mflab(&["mf", "validate", &fx.path("not_mf.json")]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_valid("mf validate", &v);
    assert_eq!(v["status"], "fail");
}

#[test]
fn low_precision_exits_two_with_suggestion() {
    let fx = Fixtures::new();
    let a = fx.path("a7c.json");
    let o = mflab(&["hom", "stable", &a, &a, "--trunc", "6"]);
    assert_eq!(code(&o), 2);
    let v = stdout_json(&o);
    assert_valid("error", &v);
    assert_eq!(v["exit_code"], 2);
    let suggested = v["error"]["suggested_trunc"].as_u64().unwrap();
    assert!(suggested > 6);
    let o = mflab(&["hom", "stable", &a, &a, "--trunc", &suggested.to_string()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn malformed_input_exits_three_with_position() {
    let fx = Fixtures::new();
    let o = mflab(&["mf", "validate", &fx.path("malformed.json")]);
    assert_eq!(code(&o), 3);
    let v = stdout_json(&o);
    assert_valid("error", &v);
    assert_eq!(v["error"]["kind"], "Parse");
    assert!(v["error"]["position"].is_u64());
}

#[test]
fn missing_file_and_bad_arguments_exit_three() {
    let fx = Fixtures::new();
    assert_eq!(code(&mflab(&["mf", "validate", &fx.path("absent.json")])), 3);
    assert_eq!(
        code(&mflab(&["mf", "validate", &fx.path("a2.json"), "--trunc", "3"])),
        3
    );
    assert_eq!(code(&mflab(&["mf", "frobnicate"])), 3);
    assert_eq!(
        code(&mflab(&["--seed", "abc", "mf", "validate", &fx.path("a2.json")])),
        3
    );
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&mflab(&["--help"])), 0);
    assert_eq!(code(&mflab(&["--version"])), 0);
}

#[test]
fn output_is_deterministic() {
    let fx = Fixtures::new();
    let args = ["knoerrer", "verify", &fx.path("a2.json"), "--section", "--seed", "7"];
    let a = mflab(&args);
    let b = mflab(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let args = ["exp", "catalog", "--family", "Dn", "--max", "5", "--jobs", "1"];
    let c = mflab(&args);
    let d = mflab(&["exp", "catalog", "--family", "Dn", "--max", "5", "--jobs", "4"]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn trunc_precedence() {
    let fx = Fixtures::new();
    let a2 = fx.path("a2.json");
    assert_eq!(stdout_json(&mflab(&["mf", "validate", &a2]))["trunc"], 12);
    assert_eq!(
        stdout_json(&mflab(&["mf", "validate", &a2, "--trunc", "9"]))["trunc"],
        9
    );
    let o = Command::new(env!("CARGO_BIN_EXE_mflab"))
        .args(["mf", "validate", &a2])
        .env("MFLAB_TRUNC", "10")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&o)["trunc"], 10);
    let o = Command::new(env!("CARGO_BIN_EXE_mflab"))
        .args(["mf", "validate", &a2, "--trunc", "8"])
        .env("MFLAB_TRUNC", "10")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&o)["trunc"], 8);
}

#[test]
fn random_seed_is_recorded() {
    let fx = Fixtures::new();
    let v = run_valid(&["mf", "validate", &fx.path("a2.json"), "--seed", "random"], 0);
    assert!(v["seed"].is_u64());
    let v = run_valid(&["mf", "validate", &fx.path("a2.json"), "--seed", "123"], 0);
    assert_eq!(v["seed"], 123);
}

#[test]
fn empty_family_gives_header_only_csv() {
    let o = mflab(&["exp", "bt-family", "--count", "0", "--csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["tau", "betti", "hlength", "indecomposable", "distinct"]);
    assert_eq!(r.records().count(), 0);
}

#[test]
fn csv_rows_parse_back() {
    let fx = Fixtures::new();
    let o = mflab(&[
        "mf",
        "validate",
        &fx.path("a2.json"),
        &fx.path("node.json"),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let width = r.headers().unwrap().len();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|row| row.len() == width));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(r.headers().unwrap()).unwrap();
    for row in &rows {
        w.write_record(row).unwrap();
    }
    assert_eq!(w.into_inner().unwrap(), o.stdout);
}

#[test]
fn table_output_has_a_status_line() {
    let fx = Fixtures::new();
    let o = mflab(&["invariant", "betti", &fx.path("node.json"), "--format", "table"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("invariant betti: pass (trunc 12, seed 42)"), "{text}");
}
