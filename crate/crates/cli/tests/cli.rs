//! End-to-end tests driving the `racg` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_racg"))
}

struct Fixtures {
    dir: PathBuf,
}

impl Fixtures {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("racg-cli-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let f = Fixtures { dir };
        f.write(
            "p3.json",
            r#"{"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"]]}"#,
        );
        f.write(
            "c4.json",
            r#"{"vertices": ["a","b","c","d"], "edges": [["a","b"],["b","c"],["c","d"],["d","a"]]}"#,
        );
        f.write(
            "c5.json",
            r#"{"vertices": ["a","b","c","d","e"],
                "edges": [["a","b"],["b","c"],["c","d"],["d","e"],["e","a"]]}"#,
        );
        // D(c5, a): two copies of the path b-c-d-e glued along {b, e}
        f.write(
            "d-c5-a.json",
            r#"{"vertices": ["b","c","d","e","c'","d'"],
                "edges": [["b","c"],["c","d"],["d","e"],["b","c'"],["c'","d'"],["d'","e"]]}"#,
        );
        f.write(
            "k2.json",
            r#"{"vertices": ["x","y"], "edges": [["x","y"]]}"#,
        );
        f
    }

    fn write(&self, name: &str, content: &str) -> PathBuf {
        let path = self.dir.join(name);
        fs::write(&path, content).unwrap();
        path
    }

    fn path(&self, name: &str) -> String {
        self.dir.join(name).to_string_lossy().into_owned()
    }
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout)
        .unwrap_or_else(|_| panic!("not json: {}", String::from_utf8_lossy(&output.stdout)))
}

#[test]
fn qc_fixture_reports_constant() {
    let f = Fixtures::new("qc");
    let out = run(&["qc", "--graph", &f.path("p3.json"), "--gens", "c a, c b"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["verdict"], "quasiconvex");
    assert_eq!(v["M"], 1);
}

#[test]
fn qc_unknown_exits_two() {
    let f = Fixtures::new("qc-unknown");
    let out = run(&[
        "qc",
        "--graph",
        &f.path("c4.json"),
        "--gens",
        "a b c d",
        "--max-cells",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["verdict"], "unknown");
}

#[test]
fn index_fixture() {
    let f = Fixtures::new("index");
    let out = run(&["index", "--graph", &f.path("p3.json"), "--gens", "c a, c b"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["verdict"], "finite");
    assert_eq!(v["index"], 2);
    assert_eq!(v["representatives"], serde_json::json!(["", "c"]));

    let out = run(&[
        "index",
        "--graph",
        &f.path("c4.json"),
        "--gens",
        "a b c d",
        "--max-cells",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["verdict"], "unknown");
}

#[test]
fn member_torsion_normal_power() {
    let f = Fixtures::new("verdicts");
    let p3 = f.path("p3.json");
    let out = run(&[
        "member", "--graph", &p3, "--gens", "c a, c b", "--word", "b a",
    ]);
    assert_eq!(json_of(&out)["verdict"], "member");
    let out = run(&[
        "member", "--graph", &p3, "--gens", "c a, c b", "--word", "a",
    ]);
    assert_eq!(json_of(&out)["verdict"], "non-member");
    let out = run(&["torsion", "--graph", &p3, "--gens", "a c"]);
    assert_eq!(json_of(&out)["verdict"], "torsion-free");
    let out = run(&["torsion", "--graph", &p3, "--gens", "c a, c b"]);
    assert_eq!(json_of(&out)["verdict"], "has-torsion");
    let out = run(&["normal", "--graph", &p3, "--gens", "c a, c b"]);
    assert_eq!(json_of(&out)["verdict"], "normal");
    let out = run(&["normal", "--graph", &p3, "--gens", "a"]);
    assert_eq!(json_of(&out)["verdict"], "not-normal");
    let out = run(&[
        "power-member",
        "--graph",
        &p3,
        "--gens",
        "c a, c b",
        "--word",
        "a",
    ]);
    assert_eq!(json_of(&out)["verdict"], "yes");
}

#[test]
fn core_graph_output() {
    let f = Fixtures::new("core");
    let out = run(&["core", "--graph", &f.path("p3.json"), "--gens", "c a, c b"]);
    let v = json_of(&out);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 2);
    assert_eq!(v["edges"].as_array().unwrap().len(), 3);
    let out = run(&[
        "core",
        "--graph",
        &f.path("p3.json"),
        "--gens",
        "c a, c b",
        "--format",
        "dot",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("graph core"));
}

#[test]
fn separate_and_exit_codes() {
    let f = Fixtures::new("separate");
    let out = run(&["separate", "--graph", &f.path("p3.json"), "--word", "a"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["verdict"], "separated");
    assert_eq!(v["index"], 2);
    assert_eq!(v["still-member"], false);
    // trivial words are an error
    let out = run(&["separate", "--graph", &f.path("p3.json"), "--word", "a a"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reflect_subcommands() {
    let f = Fixtures::new("reflect");
    let p3 = f.path("p3.json");
    let out = run(&["reflect", "trim", "--graph", &p3, "--gens", "a, b a b"]);
    let v = json_of(&out);
    // b a b equals a, so the set trims to one reflection
    assert_eq!(v["reflections"].as_array().unwrap().len(), 1);

    let refl_file = f.write(
        "refl.json",
        r#"[{"conjugator": "c", "core": "a"}, {"conjugator": "", "core": "b"}]"#,
    );
    let out = run(&[
        "reflect",
        "complete",
        "--graph",
        &p3,
        "--reflections",
        refl_file.to_str().unwrap(),
    ]);
    let v = json_of(&out);
    assert_eq!(v["status"], "finished");
    assert!(v["vertices"].as_u64().unwrap() >= 2);

    let out = run(&["reflect", "gens", "--graph", &p3, "--gens", "a, b"]);
    let v = json_of(&out);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 2);
    assert_eq!(v["edges"].as_array().unwrap().len(), 1);
}

#[test]
fn convert_involutions_fixture() {
    let f = Fixtures::new("convert");
    let out = run(&[
        "convert-involutions",
        "--graph",
        &f.path("p3.json"),
        "--gens",
        "a, a b",
        "--target",
        &f.path("k2.json"),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json_of(&out);
    let cores: Vec<&str> = v["reflections"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["core"].as_str().unwrap())
        .collect();
    assert_eq!(cores.len(), 2);
    assert!(cores.contains(&"a") && cores.contains(&"b"));
}

#[test]
fn embed_doubling_witness() {
    let f = Fixtures::new("embed");
    let witness = f.dir.join("witness.json");
    let out = run(&[
        "embed",
        "--graph",
        &f.path("c5.json"),
        "--target",
        &f.path("d-c5-a.json"),
        "--caps-len",
        "1",
        "--witness-out",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json_of(&out);
    assert_eq!(v["verdict"], "yes");
    assert_eq!(v["index"], 2);
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&witness).unwrap()).unwrap();
    assert_eq!(saved.as_array().unwrap().len(), 6);
}

#[test]
fn complete_trace_and_export_round_trip() {
    let f = Fixtures::new("export");
    let trace = f.dir.join("trace.jsonl");
    let out = run(&[
        "complete",
        "--graph",
        &f.path("p3.json"),
        "--gens",
        "c a, c b",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["status"], "finished");
    assert_eq!(v["vertices"], 2);
    // every trace line is a json record with the documented fields
    let log = fs::read_to_string(&trace).unwrap();
    assert!(!log.is_empty());
    for line in log.lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(rec["op"].is_string());
        assert!(rec["cells_after"].is_u64());
    }

    let out = run(&[
        "export",
        "--graph",
        &f.path("p3.json"),
        "--gens",
        "c a, c b",
        "--format",
        "dot",
    ]);
    let dot = String::from_utf8_lossy(&out.stdout);
    assert!(dot.contains("doublecircle"));
    assert_eq!(dot.matches(" -- ").count(), 3);

    let out = run(&[
        "export",
        "--graph",
        &f.path("p3.json"),
        "--gens",
        "c a, c b",
        "--format",
        "json",
    ]);
    let exported = String::from_utf8_lossy(&out.stdout).into_owned();
    let reimported = racg_core::CubeComplex::from_json(&exported).unwrap();
    assert_eq!(exported, reimported.to_json());
}

#[test]
fn bad_inputs_exit_one() {
    let f = Fixtures::new("errors");
    // unknown generator name in a word
    let out = run(&[
        "member",
        "--graph",
        &f.path("p3.json"),
        "--gens",
        "c a",
        "--word",
        "z",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown generator"));
    // missing graph file
    let out = run(&["qc", "--graph", &f.path("nope.json"), "--gens", "a"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn env_budget_is_honored() {
    let f = Fixtures::new("env");
    let out = bin()
        .args(["qc", "--graph", &f.path("c4.json"), "--gens", "a b c d"])
        .env("RACG_MAX_CELLS", "500")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_of(&out)["verdict"], "unknown");
}
