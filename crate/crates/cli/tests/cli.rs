use pcsp_core::gen::{grid_embedded, k4_embedded};
use pcsp_core::kernel::SfvsKernelInstance;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

fn pcsp(args: &[&str], envs: &[(&str, &str)]) -> (i32, Value) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pcsp"));
    cmd.args(args).env_remove("PH_CAPS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    let text = String::from_utf8(out.stdout).expect("utf-8 output");
    let value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {text}"));
    (out.status.code().expect("exit code"), value)
}

fn write(dir: &tempfile::TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(serde_json::to_string(value).unwrap().as_bytes()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn triangle(problem: &str, k: usize) -> Value {
    json!({
        "problem": problem,
        "graph": { "n": 3, "edges": [[0, 1], [1, 2], [2, 0]] },
        "k": k,
        "rotation": [[0, 2], [0, 1], [1, 2]],
    })
}

#[test]
fn brute_oct_on_a_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "tri.json", &triangle("oct", 1));
    let (code, out) = pcsp(&["solve", s(&input), "--algorithm", "brute"], &[]);
    assert_eq!(code, 0);
    assert_eq!(out["answer"], json!(true));
    assert_eq!(out["witness"].as_array().unwrap().len(), 1);
    let (code, out) = pcsp(&["solve", s(&input), "--algorithm", "brute", "--k", "0"], &[]);
    assert_eq!(code, 0);
    assert_eq!(out["answer"], json!(false));
    assert_eq!(out["witness"], Value::Null);
}

#[test]
fn structured_oct_reports_stats() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "tri.json", &triangle("oct", 1));
    let (code, out) = pcsp(&["solve", s(&input)], &[]);
    assert_eq!(code, 0);
    assert_eq!(out["answer"], json!(true));
    for key in ["guesses", "width", "table_cells", "wall_ms"] {
        assert!(out["stats"][key].is_u64(), "missing stats.{key}: {out}");
    }
}

#[test]
fn problem_flag_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    // A triangle is no odd-cycle-free graph, but its components are small.
    let mut p = triangle("oct", 0);
    p["t"] = json!(3);
    let input = write(&dir, "tri.json", &p);
    let (_, out) = pcsp(&["solve", s(&input), "--algorithm", "brute"], &[]);
    assert_eq!(out["answer"], json!(false));
    let (_, out) = pcsp(&["solve", s(&input), "--algorithm", "brute", "--problem", "coc"], &[]);
    assert_eq!(out["answer"], json!(true));
}

#[test]
fn regression_corpus_structured_matches_brute() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&corpus).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(files.len() >= 30);
    for file in files {
        let expected: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
        let (c1, structured) = pcsp(&["solve", s(&file)], &[]);
        let (c2, brute) = pcsp(&["solve", s(&file), "--algorithm", "brute"], &[]);
        assert_eq!((c1, c2), (0, 0), "{}", file.display());
        assert_eq!(structured["answer"], brute["answer"], "{}", file.display());
        assert_eq!(brute["answer"], expected["expected"], "{}", file.display());
    }
}

#[test]
fn planted_tuple_mode() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "tri.json", &triangle("oct", 1));
    // Class containing vertex 0, one removed vertex, namely 0.
    let tuple = write(&dir, "tuple.json", &json!([0, 1, 0]));
    let (code, out) = pcsp(&["solve", s(&input), "--tuple-file", s(&tuple)], &[]);
    assert!(code == 0 || code == 2, "{out}");
    assert!(out.get("answer").is_some());
}

#[test]
fn dp_cap_exhaustion_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (g, rot) = grid_embedded(3, 3);
    let lists: Vec<Vec<usize>> = rot.order.iter().map(|r| r.iter().map(|e| e.edge).collect()).collect();
    let p = json!({ "problem": "oct", "graph": g, "k": 1, "rotation": lists });
    let input = write(&dir, "grid.json", &p);
    let (code, out) = pcsp(&["solve", s(&input)], &[("PH_CAPS", "dp=1")]);
    assert_eq!(code, 2, "{out}");
    assert_eq!(out["answer"], Value::Null);
}

#[test]
fn malformed_input_is_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let (code, out) = pcsp(&["solve", s(&path)], &[]);
    assert_eq!(code, 1);
    assert_eq!(out["error"]["kind"], json!("parse"));
    let bad_vertex =
        write(&dir, "v.json", &json!({ "problem": "oct", "graph": { "n": 2, "edges": [[0, 5]] }, "k": 1 }));
    let (code, out) = pcsp(&["solve", s(&bad_vertex)], &[]);
    assert_eq!(code, 1);
    assert!(out["error"]["message"].as_str().unwrap().contains('5'));
    let (code, out) = pcsp(&["solve", s(&path)], &[("PH_CAPS", "brute=lots")]);
    assert_eq!(code, 1);
    assert_eq!(out["error"]["kind"], json!("caps"));
    let (code, out) = pcsp(&["frobnicate"], &[]);
    assert_eq!(code, 1);
    assert_eq!(out["error"]["kind"], json!("usage"));
}

#[test]
fn validate_reports_euler_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (g, rot) = k4_embedded();
    let mut lists: Vec<Vec<usize>> = rot.order.iter().map(|r| r.iter().map(|e| e.edge).collect()).collect();
    let good = write(&dir, "good.json", &json!({ "graph": g, "rotation": lists }));
    let (code, out) = pcsp(&["validate", s(&good)], &[]);
    assert_eq!(code, 0);
    assert_eq!(out["valid"], json!(true));
    assert_eq!(out["embedding"]["faces"], json!(4));
    lists[0].swap(0, 1);
    let bad = write(&dir, "bad.json", &json!({ "graph": g, "rotation": lists }));
    let (code, out) = pcsp(&["validate", s(&bad)], &[]);
    assert_eq!(code, 0);
    assert_eq!(out["valid"], json!(false));
    assert!(out["embedding"]["error"].as_str().unwrap().contains("Euler"), "{out}");
}

#[test]
fn validate_checks_decompositions() {
    let dir = tempfile::tempdir().unwrap();
    let g = json!({ "n": 3, "edges": [[0, 1], [1, 2]] });
    let good = json!({ "bags": [[0, 1], [1, 2]], "tree_edges": [[0, 1]] });
    let bad = json!({ "bags": [[0, 1], [2]], "tree_edges": [[0, 1]] });
    let (_, out) = pcsp(&["validate", s(&write(&dir, "a.json", &json!({ "graph": g, "decomposition": good })))], &[]);
    assert_eq!(out["decomposition"]["width"], json!(1));
    let (_, out) = pcsp(&["validate", s(&write(&dir, "b.json", &json!({ "graph": g, "decomposition": bad })))], &[]);
    assert_eq!(out["valid"], json!(false));
}

#[test]
fn treewidth_exact_and_heuristic() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = grid_embedded(3, 3);
    let input = write(&dir, "g.json", &json!({ "graph": g }));
    let (_, out) = pcsp(&["treewidth", s(&input), "--exact"], &[]);
    assert_eq!(out["width"], json!(3));
    let (_, out) = pcsp(&["treewidth", s(&input), "--heuristic"], &[]);
    assert!(out["width"].as_u64().unwrap() >= 3);
    let dimacs = dir.path().join("c4.col");
    std::fs::write(&dimacs, "c a 4-cycle\np edge 4 4\ne 1 2\ne 2 3\ne 3 4\ne 4 1\n").unwrap();
    let (code, out) = pcsp(&["treewidth", s(&dimacs), "--dimacs", "--exact"], &[]);
    assert_eq!(code, 0);
    assert_eq!(out["width"], json!(2));
    let (code, _) = pcsp(&["treewidth", s(&dimacs), "--exact"], &[]);
    assert_eq!(code, 1);
    let (code, _) = pcsp(&["treewidth", s(&input), "--exact"], &[("PH_CAPS", "tw=4")]);
    assert_eq!(code, 1);
}

#[test]
fn reduce_emits_reparseable_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "tri.json", &triangle("oct", 1));
    let (code, out) = pcsp(&["reduce", s(&input)], &[]);
    assert_eq!(code, 0);
    let text = serde_json::to_string(&out).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), out);
    assert!(out["Vertex"]["csp"]["binary"].is_array(), "{out}");
}

fn kernel_input() -> Value {
    // Two triangles sharing vertex 0, each with one terminal edge.
    json!({
        "n": 5,
        "edges": [
            { "u": 0, "v": 1, "terminal": true }, { "u": 1, "v": 2, "terminal": false }, { "u": 2, "v": 0, "terminal": false },
            { "u": 0, "v": 3, "terminal": false }, { "u": 3, "v": 4, "terminal": true }, { "u": 4, "v": 0, "terminal": false },
        ],
        "undeletable": [],
        "k": 1,
    })
}

#[test]
fn kernelize_rules_and_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "k.json", &kernel_input());
    let (code, out) = pcsp(&["kernelize", s(&input), "--rules"], &[]);
    assert_eq!(code, 0, "{out}");
    let inst: SfvsKernelInstance = serde_json::from_value(out["instance"].clone()).unwrap();
    inst.validate().unwrap();
    assert_eq!(serde_json::to_value(&inst).unwrap(), out["instance"]);
    assert!(out["log"].is_array());
    let (code, out) = pcsp(&["kernelize", s(&input), "--supply-W", "all"], &[]);
    assert_eq!(code, 0);
    assert_eq!(out["instance"], kernel_input());
    let w = write(&dir, "w.json", &json!([0, 1, 3, 4]));
    let (code, out) = pcsp(&["kernelize", s(&input), "--supply-W", s(&w)], &[]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out["instance"]["undeletable"].as_array().unwrap().len(), 1);
}

#[test]
fn kernelize_grid_replacement_needs_a_rotation() {
    let dir = tempfile::tempdir().unwrap();
    // Path 0-1-2 closed by a terminal edge 2-0, with vertex 1 undeletable.
    let mut inst = json!({
        "n": 3,
        "edges": [{ "u": 0, "v": 1, "terminal": false }, { "u": 1, "v": 2, "terminal": false }, { "u": 2, "v": 0, "terminal": true }],
        "undeletable": [1],
        "k": 1,
    });
    let (code, _) = pcsp(&["kernelize", s(&write(&dir, "a.json", &inst)), "--grid-replace"], &[]);
    assert_eq!(code, 1);
    inst["rotation"] = json!([[0, 2], [0, 1], [1, 2]]);
    let (code, out) = pcsp(&["kernelize", s(&write(&dir, "b.json", &inst)), "--grid-replace"], &[]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out["instance"]["undeletable"], json!([]));
    assert!(out["instance"]["n"].as_u64().unwrap() > 3);
}

#[test]
fn gen_hardness_is_deterministic_and_checked() {
    let args = ["gen-hardness", "--n", "1", "--k", "2", "--seed", "7", "--check"];
    let (code, a) = pcsp(&args, &[]);
    assert_eq!(code, 0, "{a}");
    let (_, b) = pcsp(&args, &[]);
    assert_eq!(a, b);
    assert_eq!(a["instance"]["k"], json!(16));
    assert_eq!(a["instance"]["t"], json!(90));
    let tiling = &a["check"]["grid_tiling"];
    let deletion = &a["check"]["deletion"];
    assert_eq!(tiling.is_null(), deletion.is_null());
}

#[test]
fn gen_hardness_from_a_sets_file() {
    let dir = tempfile::tempdir().unwrap();
    let sets = json!([[[[0, 0]], [[0, 1]]], [[[1, 0]], [[1, 1]]]]);
    let path = write(&dir, "sets.json", &sets);
    let (code, out) = pcsp(&["gen-hardness", "--n", "1", "--k", "2", "--sets-file", s(&path), "--check"], &[]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out["check"]["grid_tiling"], json!([[0, 1], [0, 1]]));
    assert!(out["check"]["deletion"].is_array());
    let bad = write(&dir, "bad.json", &json!([[[[0, 3]]]]));
    let (code, _) = pcsp(&["gen-hardness", "--n", "1", "--k", "1", "--sets-file", s(&bad)], &[]);
    assert_eq!(code, 1);
}

#[test]
fn gen_hardness_unweighted_output() {
    let (code, out) = pcsp(&["gen-hardness", "--n", "0", "--k", "1", "--unweighted"], &[]);
    assert_eq!(code, 0, "{out}");
    let inst = &out["instance"];
    assert_eq!(inst["undeletable"], json!([]));
    assert!(inst["weights"].as_array().unwrap().iter().all(|w| w == &json!(1)));
}

#[test]
fn solve_output_is_deterministic_apart_from_timing() {
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus/oct_vertex_1.json");
    let run = || {
        let (code, mut out) = pcsp(&["solve", s(&file), "--threads", "2"], &[]);
        assert_eq!(code, 0);
        out["stats"].as_object_mut().unwrap().remove("wall_ms");
        out
    };
    assert_eq!(run(), run());
}
