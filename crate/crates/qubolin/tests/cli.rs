//! Drive the installed binary end to end: command output, exit codes, and
//! serialization transparency between `build` and `solve`.

use std::path::{Path, PathBuf};
use std::process::Output;

use qubolin::io::read_qubo_any;
use qubolin::report::{render_solve_report, SolveKind, TableOptions};
use qubolin::solver::brute_force_capped;
use qubolin::RadixEncoding;

const DEMO_PROBLEM: &str = r#"{
  "A": [[3, 1], [-1, 2]],
  "b": [-1, 5],
  "encoding": { "low": 0, "high": 2 },
  "scale": [0.4, 0.4]
}
"#;

fn run(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_qubolin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn write_demo(dir: &Path) -> PathBuf {
    let path = dir.join("demo.json");
    std::fs::write(&path, DEMO_PROBLEM).unwrap();
    path
}

#[test]
fn diagonalize_prints_transform_and_solution() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_demo(dir.path());
    let out = run(&["diagonalize", problem.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("R ="), "{text}");
    assert!(text.contains("D = [1.6,"), "{text}");
    assert!(text.contains("scale = [0.4, 0.4]"), "{text}");
    assert!(text.contains("y* = [-2,"), "{text}");
    assert!(text.contains("x* = [-1,"), "{text}");
}

#[test]
fn diagonalize_warns_on_singular_gram() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("singular.json");
    std::fs::write(&problem, r#"{"A": [[1, 1], [1, 1]], "b": [2, 2]}"#).unwrap();
    let out = run(&["diagonalize", problem.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("D = [2, 0]"), "{text}");
    assert!(text.contains("zero pivot at column(s) [1]"), "{text}");
}

#[test]
fn scale_override_changes_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_demo(dir.path());
    let out = run(&["diagonalize", problem.to_str().unwrap(), "--scale", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("D = [10,"), "{text}");
}

#[test]
fn build_reports_sparsity_and_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_demo(dir.path());
    let qubo = dir.path().join("congruence.json");
    let out = run(&[
        "build",
        problem.to_str().unwrap(),
        qubo.to_str().unwrap(),
        "--model",
        "congruence",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("nnz 23 / bound 24"), "{}", stdout(&out));
    let (q, meta) = read_qubo_any(&std::fs::read_to_string(&qubo).unwrap()).unwrap();
    assert_eq!(q.nnz(), 23);
    assert!(meta.unwrap().annihilate_pm);

    let vanilla = dir.path().join("vanilla.json");
    let out = run(&[
        "build",
        problem.to_str().unwrap(),
        vanilla.to_str().unwrap(),
        "--model",
        "vanilla",
    ]);
    assert!(stdout(&out).contains("nnz 78 / bound 78"), "{}", stdout(&out));
}

#[test]
fn coordinate_export_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_demo(dir.path());
    for (zeros, expected) in [(false, 23usize), (true, 78)] {
        let qubo = dir.path().join(format!("q{expected}.coord"));
        let mut args = vec![
            "build",
            problem.to_str().unwrap(),
            qubo.to_str().unwrap(),
            "--model",
            "congruence",
            "--format",
            "coord",
        ];
        if zeros {
            args.push("--include-zeros");
        }
        assert!(run(&args).status.success());
        let text = std::fs::read_to_string(&qubo).unwrap();
        assert_eq!(text.lines().count(), 1 + expected);
        assert!(text.starts_with("qubo 12 26\n"));
    }
}

#[test]
fn solve_after_build_matches_in_process_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_demo(dir.path());
    let qubo = dir.path().join("vanilla.json");
    assert!(run(&[
        "build",
        problem.to_str().unwrap(),
        qubo.to_str().unwrap(),
        "--model",
        "vanilla",
    ])
    .status
    .success());

    let out = run(&[
        "solve",
        qubo.to_str().unwrap(),
        "--method",
        "exhaustive",
        "--max-rows",
        "10",
    ]);
    assert!(out.status.success());

    let (q, _) = read_qubo_any(&std::fs::read_to_string(&qubo).unwrap()).unwrap();
    let result = brute_force_capped(&q, 10).unwrap();
    let expected = render_solve_report(
        &[result],
        &["count".to_string()],
        Some(&RadixEncoding::new(2, 0, 2).unwrap()),
        SolveKind::Exhaustive,
        &TableOptions {
            collapse: true,
            max_rows: 10,
        },
    );
    assert_eq!(stdout(&out), expected);
    assert!(stdout(&out).contains("degeneracy 42"));
    assert!(stdout(&out).contains("all 6 combinations"));
}

#[test]
fn solve_sa_trials_conserve_reads_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_demo(dir.path());
    let qubo = dir.path().join("congruence.json");
    assert!(run(&[
        "build",
        problem.to_str().unwrap(),
        qubo.to_str().unwrap(),
        "--model",
        "congruence",
    ])
    .status
    .success());

    let args = [
        "solve",
        qubo.to_str().unwrap(),
        "--method",
        "sa",
        "--reads",
        "200",
        "--sweeps",
        "20",
        "--seed",
        "5",
        "--trials",
        "3",
    ];
    let first = run(&args);
    assert!(first.status.success());
    let text = stdout(&first);
    let total_line = text
        .lines()
        .find(|l| l.starts_with("total"))
        .expect("totals row");
    assert_eq!(total_line.matches("200").count(), 3, "{total_line}");
    assert!(text.contains("run 1"), "{text}");

    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn solve_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_demo(dir.path());
    let qubo = dir.path().join("congruence.json");
    assert!(run(&[
        "build",
        problem.to_str().unwrap(),
        qubo.to_str().unwrap(),
        "--model",
        "congruence",
    ])
    .status
    .success());
    let csv = dir.path().join("table.csv");
    let out = run(&[
        "solve",
        qubo.to_str().unwrap(),
        "--method",
        "exhaustive",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("q11,q12,q13,q14,q15,q16,q21,q22,q23,q24,q25,q26,energy,count\n"));
}

#[test]
fn collapse_flag_can_be_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_demo(dir.path());
    let qubo = dir.path().join("vanilla.json");
    assert!(run(&[
        "build",
        problem.to_str().unwrap(),
        qubo.to_str().unwrap(),
        "--model",
        "vanilla",
    ])
    .status
    .success());
    let out = run(&[
        "solve",
        qubo.to_str().unwrap(),
        "--collapse",
        "false",
        "--max-rows",
        "50",
    ]);
    assert!(out.status.success());
    assert!(!stdout(&out).contains("all 6 combinations"));
}

#[test]
fn exit_code_2_on_input_errors() {
    let out = run(&["diagonalize", "/nonexistent/problem.json"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = run(&["diagonalize", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let mismatched = dir.path().join("mismatched.json");
    std::fs::write(&mismatched, r#"{"A": [[1, 2]], "b": [1, 2]}"#).unwrap();
    let out = run(&["build", mismatched.to_str().unwrap(), "/tmp/unused.json"]);
    assert_eq!(out.status.code(), Some(2));

    let params = dir.path().join("demo.json");
    std::fs::write(&params, DEMO_PROBLEM).unwrap();
    let qubo = dir.path().join("q.json");
    assert!(run(&["build", params.to_str().unwrap(), qubo.to_str().unwrap()])
        .status
        .success());
    let out = run(&["solve", qubo.to_str().unwrap(), "--method", "sa", "--reads", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_4_on_size_guard() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big.json");
    // 2 variables x 2 x 8 exponents = 32 qubits, beyond the guard
    std::fs::write(
        &big,
        r#"{"A": [[3, 1], [-1, 2]], "b": [-1, 5], "encoding": {"low": 0, "high": 7}}"#,
    )
    .unwrap();
    let qubo = dir.path().join("big_q.json");
    assert!(run(&["build", big.to_str().unwrap(), qubo.to_str().unwrap()])
        .status
        .success());
    let out = run(&["solve", qubo.to_str().unwrap(), "--method", "exhaustive"]);
    assert_eq!(out.status.code(), Some(4));
}
