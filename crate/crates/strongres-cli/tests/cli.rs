use std::process::Command as Process;

use proptest::prelude::*;
use serde_json::Value;
use strongres::rational::ratio;
use strongres::{Polynomial, Ring};
use strongres_cli::{execute, parse_problem, Command, Options, ProblemFile};

const CURVE: &str = include_str!("data/curve.txt");

fn run(command: Command, text: &str) -> strongres_cli::RunArtifacts {
    execute(command, text, &Options::default())
}

fn problem_strategy() -> impl Strategy<Value = ProblemFile> {
    let names = ["x", "y", "z", "w1", "u_2"];
    (1usize..=5)
        .prop_flat_map(move |d| {
            let term = (prop::collection::vec(0u32..3, d), -5i64..=5, 1i64..=4);
            (
                Just(d),
                prop::collection::vec(prop::collection::vec(term, 1..4), 1..4),
                prop::collection::vec(any::<bool>(), d),
                1u32..4,
            )
        })
        .prop_map(move |(d, gens, seeded, threshold)| {
            let ring = Ring::new(&names[..d]).unwrap();
            let generators = gens
                .into_iter()
                .map(|ts| Polynomial::from_terms(&ring, ts.into_iter().map(|(e, n, q)| (e, ratio(n, q)))))
                .filter(|g| !g.is_zero())
                .collect();
            let exceptional = (0..d).filter(|&i| seeded[i]).collect();
            ProblemFile {
                ring,
                generators,
                exceptional,
                threshold,
            }
        })
        .prop_filter("needs a generator", |p| !p.generators.is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn problems_survive_printing(p in problem_strategy()) {
        let text = p.to_string();
        let back = parse_problem(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.to_string(), text);
    }
}

#[test]
fn corpus_files_round_trip() {
    for text in [
        CURVE,
        include_str!("data/ex2.txt"),
        include_str!("data/ex3.txt"),
        include_str!("data/cross.txt"),
        include_str!("data/monomial.txt"),
        include_str!("data/seeded.txt"),
        include_str!("data/nonpure.txt"),
        include_str!("data/cylinder.txt"),
    ] {
        let p = parse_problem(text).unwrap();
        assert_eq!(parse_problem(&p.to_string()).unwrap(), p);
    }
}

#[test]
fn runs_are_deterministic() {
    for (command, text) in [
        (Command::Strong, CURVE),
        (Command::Principalize, include_str!("data/monomial.txt")),
        (Command::Invariants, include_str!("data/ex2.txt")),
    ] {
        let a = run(command, text);
        let b = run(command, text);
        assert_eq!(a.json, b.json);
        assert_eq!(a.dot, b.dot);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.summary, b.summary);
    }
}

#[test]
fn identity_run_has_no_steps_and_one_chart() {
    let out = run(Command::Strong, include_str!("data/ex3.txt"));
    assert_eq!(out.exit_code, 0);
    let v: Value = serde_json::from_str(&out.json).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "strong");
    assert_eq!(v["steps"], Value::Array(Vec::new()));
    assert_eq!(v["charts"].as_array().unwrap().len(), 1);
    assert!(out.trace.is_empty());
}

#[test]
fn curve_run_has_the_documented_shape() {
    let out = run(Command::Strong, CURVE);
    assert_eq!(out.exit_code, 0, "{}", out.summary);
    let v: Value = serde_json::from_str(&out.json).unwrap();
    let steps = v["steps"].as_array().unwrap();
    let indices: Vec<u64> = steps.iter().map(|s| s["index"].as_u64().unwrap()).collect();
    assert_eq!(indices, vec![1, 2, 2]);
    assert_eq!(steps[0]["center"]["coordinates"], serde_json::json!(["x1", "x2", "x3"]));
    assert_eq!(v["report"]["passed"], true);
    for key in ["factorization", "smooth", "normal_crossings", "relative_property"] {
        assert_eq!(v["report"][key], true, "{key}");
    }
    for chart in v["charts"].as_array().unwrap() {
        for key in ["id", "parent", "pivot", "variables", "exceptional", "c_exponents", "to_root"] {
            assert!(chart.get(key).is_some(), "{key}");
        }
    }

    assert_eq!(out.trace.len(), 2);
    assert_eq!(out.trace[0], "step 1: level 1, t=(2,0), center=chart 0: V(x1, x2, x3)");
    assert_eq!(out.trace[1], "step 2: level 2, t=unload, center=chart 2: V(x1, x2); chart 3: V(x1, x3)");

    // One root, three charts of the point blowup and two children for each blowup of L.
    let dot = out.dot.unwrap();
    let nodes = dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count();
    let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
    assert_eq!(nodes, 8);
    assert_eq!(edges.len(), 7);
    assert_eq!(edges.iter().filter(|l| l.trim_start().starts_with("c0 ->")).count(), 3);
    assert_eq!(edges.iter().filter(|l| l.ends_with("[label=\"1\"];")).count(), 3);
    assert_eq!(edges.iter().filter(|l| l.ends_with("[label=\"2\"];")).count(), 4);
    assert!(dot.starts_with("digraph charts {\n") && dot.ends_with("}\n"));
    let created: Vec<Value> = v["charts"].as_array().unwrap().iter().map(|c| c["created_at"].clone()).collect();
    assert_eq!(created[0], Value::Null);
    assert_eq!(created[1..4], [Value::from(1), Value::from(1), Value::from(1)]);
}

fn error_of(command: Command, text: &str, opts: &Options) -> (i32, String) {
    let out = execute(command, text, opts);
    let v: Value = serde_json::from_str(&out.json).unwrap();
    (out.exit_code, v["error"]["reason"].as_str().unwrap_or("").to_string())
}

#[test]
fn errors_carry_a_reason_and_an_exit_code() {
    let d = Options::default();
    assert_eq!(error_of(Command::Strong, "ring x\nideal y\n", &d), (1, "UndeclaredVariable".into()));
    assert_eq!(error_of(Command::Strong, "ring x\nideal x +\n", &d), (1, "SyntaxError".into()));
    assert_eq!(error_of(Command::Strong, "ring x\nideal x - x\n", &d), (1, "ZeroGenerator".into()));
    assert_eq!(error_of(Command::Principalize, "ring x\nideal x + 1, x\n", &d), (1, "UnitIdeal".into()));
    assert_eq!(
        error_of(Command::Strong, include_str!("data/nonpure.txt"), &d),
        (3, "NonPureDimensional".into())
    );
    let small = Options {
        max_steps: 3,
        ..Options::default()
    };
    assert_eq!(
        error_of(Command::Principalize, include_str!("data/seeded.txt"), &small),
        (4, "BudgetExceeded".into())
    );
    let seeded = Options {
        seed_exceptional: vec!["q".into()],
        ..Options::default()
    };
    assert_eq!(error_of(Command::Principalize, include_str!("data/cross.txt"), &seeded).0, 1);
}

#[test]
fn seeding_from_the_command_line_matches_the_file() {
    let flags = Options {
        seed_exceptional: vec!["x".into(), "y".into()],
        ..Options::default()
    };
    let from_flag = execute(Command::Principalize, "ring x y\nideal x^2*y^3\n", &flags);
    let from_file = run(Command::Principalize, include_str!("data/seeded.txt"));
    assert_eq!(from_flag.exit_code, 0);
    assert_eq!(from_flag.trace, from_file.trace);
    assert_eq!(from_flag.dot, from_file.dot);
}

#[test]
fn binary_writes_artifacts_and_exits_with_the_run_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("curve.txt");
    std::fs::write(&input, CURVE).unwrap();
    let json = dir.path().join("out.json");
    let dot = dir.path().join("out.dot");
    let out = Process::new(env!("CARGO_BIN_EXE_strongres"))
        .arg("strong")
        .arg(&input)
        .arg("--emit-json")
        .arg(&json)
        .arg("--emit-dot")
        .arg(&dot)
        .arg("--trace")
        .arg("--verify")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().next().unwrap().starts_with("step 1: "));
    assert!(stdout.contains("verification: pass"));
    let written = std::fs::read_to_string(&json).unwrap();
    assert_eq!(written, run(Command::Strong, CURVE).json);
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph charts {"));

    let again = Process::new(env!("CARGO_BIN_EXE_strongres"))
        .arg("verify")
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(again.status.code(), Some(0));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, include_str!("data/nonpure.txt")).unwrap();
    let failed = Process::new(env!("CARGO_BIN_EXE_strongres"))
        .arg("strong")
        .arg(&bad)
        .arg("--emit-json")
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(failed.status.code(), Some(3));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["error"]["reason"], "NonPureDimensional");

    let missing = Process::new(env!("CARGO_BIN_EXE_strongres"))
        .arg("strong")
        .arg(dir.path().join("absent.txt"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}
