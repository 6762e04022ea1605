//! End-to-end tests of the binary. Golden files live in `tests/data/golden`;
//! run with `UPDATE_GOLDEN=1` to rewrite them.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use conedual::instance::parse_str;
use conedual::projection::{coordinate_subspace, project_by_elimination, to_float};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_conedual"));
    c.env_remove("CONEDUAL_SEED");
    c
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    {
        let mut pipe = child.stdin.take().expect("stdin");
        if let Some(s) = stdin {
            pipe.write_all(s.as_bytes()).expect("write stdin");
        }
    }
    child.wait_with_output().expect("binary finishes")
}

fn stdout_ok(args: &[&str], stdin: Option<&str>) -> String {
    let out = run(args, stdin);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn check_golden(name: &str, actual: &str) {
    let path = data("golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).expect("write golden");
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}; run with UPDATE_GOLDEN=1", path.display()));
    assert_eq!(actual, want, "golden mismatch for {name}");
}

/// Gallery corpus: (name, gallery arguments).
const CORPUS: &[(&str, &[&str])] = &[
    ("example-adapted-3", &["gallery", "example-adapted", "--n", "3"]),
    ("planted-lp", &["gallery", "planted", "--n", "4", "--m", "3", "--seed", "1"]),
    ("planted-soc", &["gallery", "planted", "--n", "5", "--m", "4", "--mix", "soc", "--seed", "2"]),
    ("packing", &["gallery", "packing", "--n", "3", "--m", "2", "--seed", "3"]),
    ("packing-infeasible", &["gallery", "packing", "--n", "3", "--m", "2", "--seed", "3", "--infeasible-b"]),
    ("lp-small-7", &["gallery", "random", "--profile", "lp-small", "--seed", "7"]),
];

/// (label used in golden file names, arguments).
const COMMANDS: &[(&str, &[&str])] = &[
    ("dualize", &["dualize"]),
    ("solve", &["solve"]),
    ("diagnose", &["diagnose"]),
    ("bounded", &["bounded"]),
    ("bounded-dual", &["bounded", "--side", "dual"]),
    ("gordan", &["gordan"]),
    ("almost", &["almost", "--eps", "1e-6,1e-3"]),
];

fn corpus() -> Vec<(String, String)> {
    CORPUS
        .iter()
        .map(|(name, args)| (name.to_string(), stdout_ok(args, None)))
        .collect()
}

#[test]
fn lp_small_seed_7_is_deterministic() {
    let a = stdout_ok(&["gallery", "random", "--profile", "lp-small", "--seed", "7"], None);
    let env = bin()
        .args(["gallery", "random", "--profile", "lp-small"])
        .env("CONEDUAL_SEED", "7")
        .output()
        .expect("runs");
    assert_eq!(String::from_utf8(env.stdout).unwrap(), a);
    check_golden("lp-small-7.instance.json", &a);
}

#[test]
fn every_subcommand_matches_its_golden_file() {
    for (name, text) in corpus() {
        check_golden(&format!("{name}.instance.json"), &text);
        for (label, cmd) in COMMANDS {
            let mut args: Vec<&str> = cmd.to_vec();
            args.push("--json");
            let out = stdout_ok(&args, Some(&text));
            check_golden(&format!("{name}.{label}.json"), &out);
        }
    }
    let simplex = data("simplex.json");
    let e1e2 = data("e1e2.json");
    let out = stdout_ok(
        &["project", simplex.to_str().unwrap(), "--subspace", e1e2.to_str().unwrap(), "--json"],
        None,
    );
    check_golden("simplex.project.json", &out);
}

/// Value at a flattened text path such as `entries[2].verdict`.
fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    let mut cur = v;
    for part in path.split('.') {
        let (key, idx) = match part.find('[') {
            Some(i) => (&part[..i], Some(&part[i..])),
            None => (part, None),
        };
        cur = cur.get(key)?;
        if let Some(idx) = idx {
            for n in idx.split(['[', ']']).filter(|s| !s.is_empty()) {
                cur = cur.get(n.parse::<usize>().ok()?)?;
            }
        }
    }
    Some(cur)
}

#[test]
fn text_and_json_carry_the_same_verdicts() {
    for (name, text) in corpus() {
        for (_, cmd) in COMMANDS.iter().filter(|(label, _)| *label != "dualize") {
            let json: Value = serde_json::from_str(&stdout_ok(&[&[cmd[0]], &cmd[1..], &["--json"]].concat(), Some(&text))).unwrap();
            let plain = stdout_ok(cmd, Some(&text));
            let mut seen = 0;
            for line in plain.lines() {
                let (path, value) = line.split_once(": ").expect("key: value lines");
                let leaf = path.rsplit('.').next().unwrap();
                if !["verdict", "status", "branch", "feasible", "primal_feasible", "dual_feasible", "double_hit"].contains(&leaf) {
                    continue;
                }
                let j = lookup(&json, path).unwrap_or_else(|| panic!("{name} {cmd:?}: {path} missing from JSON"));
                let rendered = match j {
                    Value::String(s) => s.clone(),
                    Value::Null => "-".to_string(),
                    other => other.to_string(),
                };
                assert_eq!(rendered, value, "{name} {cmd:?}: {path}");
                seen += 1;
            }
            assert!(seen > 0, "{name} {cmd:?}: no verdicts in text output");
        }
    }
}

#[test]
fn dualize_twice_gives_back_the_program() {
    for (name, text) in corpus() {
        let once = stdout_ok(&["dualize"], Some(&text));
        let twice = stdout_ok(&["dualize"], Some(&once));
        assert_eq!(parse_str(&twice).unwrap().program, parse_str(&text).unwrap().program, "{name}");
    }
}

#[test]
fn pathology_pipeline() {
    let inst = stdout_ok(&["gallery", "example-adapted", "--n", "3"], None);
    let r: Value = serde_json::from_str(&stdout_ok(&["diagnose", "--json"], Some(&inst))).unwrap();
    assert_eq!(r["version"], "report/v1");
    assert_eq!(r["primal_feasible"], "No");
    assert_eq!(r["status"], "PrimalInfeasible");
    assert_eq!(r["dobj"], 0.0);
    assert!(r["entries"].as_array().unwrap().iter().all(|e| e["verdict"] != "Yes"));
}

#[test]
fn projection_of_the_simplex_matches_elimination() {
    let simplex = data("simplex.json");
    let out = stdout_ok(
        &["project", simplex.to_str().unwrap(), "--subspace", data("e1e2.json").to_str().unwrap(), "--json"],
        None,
    );
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["exact"], true);
    let rows: Vec<(Vec<f64>, f64)> = v["normals"]
        .as_array()
        .unwrap()
        .iter()
        .zip(v["offsets"].as_array().unwrap())
        .map(|(n, o)| (n.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect(), o.as_f64().unwrap()))
        .collect();
    let p = parse_str(&std::fs::read_to_string(&simplex).unwrap()).unwrap().program;
    let fm = project_by_elimination(&p, &coordinate_subspace(3, &[0, 1])).unwrap().remove_redundant();
    let (normals, offsets) = to_float(&fm);
    assert_eq!(normals.len(), 3);
    for (a, b) in normals.iter().zip(&offsets) {
        let s = a.norm();
        let hit = rows.iter().any(|(n, o)| {
            (n[0] - a[0] / s).abs() < 1e-9 && (n[1] - a[1] / s).abs() < 1e-9 && (o - b / s).abs() < 1e-9
        });
        assert!(hit, "facet {a} <= {b} missing from {rows:?}");
    }
    // Every reported row holds at the vertices of the projected triangle.
    for u in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] {
        for (n, o) in &rows {
            assert!(n[0] * u[0] + n[1] * u[1] <= o + 1e-9);
        }
    }
}

#[test]
fn exit_codes() {
    let missing = run(&["solve", "/nonexistent/file.json"], None);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(run(&["solve", "--tol-feas", "-1"], Some("{}")).status.code(), Some(1));
    assert_eq!(run(&["solve"], Some("not json")).status.code(), Some(2));
    let bad_shape = std::fs::read_to_string(data("simplex.json")).unwrap().replace("[[1, 1, 1]]", "[[1, 1]]");
    let out = run(&["solve"], Some(&bad_shape));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("A[0]"));
    assert_eq!(run(&["--help"], None).status.code(), Some(0));
}

#[test]
fn failed_projection_precondition_is_a_report() {
    // x1 free, x1 <= x2, x2 >= 0, projected onto the x2 axis.
    let inst = r#"{"A": [[1, -1]], "b": [0], "c": [0, 0], "cone_C": ["free", "nonneg"],
        "cone_K": ["nonneg"], "space_x": [{"real": 1}, {"real": 1}], "space_y": [{"real": 1}],
        "version": "instance/v1"}"#;
    let dir = std::env::temp_dir().join(format!("conedual-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let sub = dir.join("x2.json");
    std::fs::write(&sub, "[[0, 1]]").unwrap();
    let out = stdout_ok(&["project", "--subspace", sub.to_str().unwrap(), "--json"], Some(inst));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["precondition"], "No");
    std::fs::remove_dir_all(&dir).ok();
}
