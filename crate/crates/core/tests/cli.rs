//! Behavior of the shipped binary: flag surface, exit codes, file
//! outputs, and replay.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ka-solve"));
    cmd.env_remove("KA_SOLVE_WORKERS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn help_lists_every_subcommand_and_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for sub in ["preset", "experiment", "solve-kaczmarz", "solve-lms"] {
        assert!(text.contains(sub), "--help must mention {sub}:\n{text}");
    }

    let out = run(&["experiment", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for flag in [
        "--family", "--m", "--p", "--n-iters", "--trials", "--snr", "--snr-range", "--vth",
        "--cov-scale", "--mean", "--a-policy", "--seed", "--fixed-h", "--replay", "--out",
        "--workers",
    ] {
        assert!(text.contains(flag), "experiment --help must document {flag}:\n{text}");
    }
}

#[test]
fn preset_writes_the_expected_table_shape() {
    let dir = tempdir().unwrap();
    let out_path = dir.path().join("fig2a.csv");
    let out = run(&[
        "preset", "--name", "fig2a", "--trials", "10", "--seed", "1", "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 502, "header plus k = 0..=500");
    assert_eq!(lines[0], "k,ls,map,kaczmarz,ka_kaczmarz");
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 5, "five columns per row: {line}");
    }
    assert!(out_path.with_extension("meta.json").exists());
}

#[test]
fn unknown_preset_exits_one_and_names_the_valid_choices() {
    let out = run(&["preset", "--name", "bogus", "--out", "/tmp/never-written.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stderr(&out);
    for name in ["fig2a", "fig2b", "fig4a", "fig4b"] {
        assert!(text.contains(name), "error must list {name}: {text}");
    }
    assert!(!Path::new("/tmp/never-written.csv").exists());
}

#[test]
fn repeated_invocations_write_identical_files() {
    let dir = tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for path in [&first, &second] {
        let out = run(&[
            "preset", "--name", "fig4b", "--trials", "25", "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn replay_reproduces_a_run_from_its_sidecar() {
    let dir = tempdir().unwrap();
    let original = dir.path().join("run.csv");
    let replayed = dir.path().join("replayed.csv");
    let out = run(&[
        "experiment", "--family", "lms", "--m", "30", "--p", "4", "--n-iters", "30",
        "--trials", "15", "--snr-range", "-4:4:4", "--seed", "7", "--out",
        original.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let sidecar = original.with_extension("meta.json");
    let out = run(&[
        "experiment", "--replay", sidecar.to_str().unwrap(), "--out",
        replayed.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(
        std::fs::read(&original).unwrap(),
        std::fs::read(&replayed).unwrap()
    );
    assert_eq!(
        std::fs::read(&sidecar).unwrap(),
        std::fs::read(replayed.with_extension("meta.json")).unwrap()
    );
}

#[test]
fn replay_conflicts_with_explicit_experiment_flags() {
    let out = run(&[
        "experiment", "--replay", "whatever.meta.json", "--m", "10", "--out", "/tmp/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(1), "clap must reject the mix");
}

#[test]
fn experiment_without_an_snr_choice_is_a_usage_error() {
    let out = run(&[
        "experiment", "--family", "kaczmarz", "--m", "8", "--p", "3", "--trials", "2",
        "--out", "/tmp/never.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--snr"), "hint the missing flag: {}", stderr(&out));
}

#[test]
fn numerical_failure_inside_a_trial_exits_two() {
    // m < p leaves the weighted gram rank deficient, so the closed-form
    // solve inside trial 0 fails
    let out = run(&[
        "experiment", "--family", "kaczmarz", "--m", "3", "--p", "8", "--n-iters", "5",
        "--trials", "2", "--snr", "0", "--out", "/tmp/never2.csv",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("trial 0"), "name the failing trial: {}", stderr(&out));
}

#[test]
fn solve_kaczmarz_prints_the_exact_solution_of_an_identity_system() {
    let dir = tempdir().unwrap();
    let problem = dir.path().join("problem.csv");
    std::fs::write(&problem, "# identity system\n1,0\n0,1\n3.0,-2.0\n").unwrap();
    let out = run(&[
        "solve-kaczmarz", problem.to_str().unwrap(), "--n-iters", "200",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let fields: Vec<f64> = stdout(&out)
        .trim()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!(fields.len(), 2);
    assert!((fields[0] - 3.0).abs() <= 1e-12 && (fields[1] + 2.0).abs() <= 1e-12);
}

#[test]
fn solve_kaczmarz_pulls_toward_the_prior_mean_when_given_one() {
    let dir = tempdir().unwrap();
    let problem = dir.path().join("problem.csv");
    std::fs::write(&problem, "1,0\n0,1\n1.0,1.0\n").unwrap();
    let solve = |extra: &[&str]| -> Vec<f64> {
        let mut args = vec!["solve-kaczmarz", problem.to_str().unwrap(), "--n-iters", "400"];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
        stdout(&out).trim().split(',').map(|f| f.parse().unwrap()).collect()
    };
    let plain = solve(&[]);
    let tight = solve(&["--cov-scale", "0.01", "--mean", "0,0"]);
    for i in 0..2 {
        assert!((plain[i] - 1.0).abs() <= 1e-9, "plain solves the system");
        assert!(
            tight[i] < 0.5,
            "a tight zero prior must dominate: {}",
            tight[i]
        );
    }
}

#[test]
fn solve_kaczmarz_rejects_malformed_problem_files() {
    let dir = tempdir().unwrap();
    let problem = dir.path().join("bad.csv");
    std::fs::write(&problem, "1,0\n0,oops\n1,1\n").unwrap();
    let out = run(&["solve-kaczmarz", problem.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "point at the bad line: {}", stderr(&out));

    std::fs::write(&problem, "0,0\n0,1\n1,1\n").unwrap();
    let out = run(&["solve-kaczmarz", problem.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "zero row without a prior is unusable");
}

#[test]
fn solve_lms_identifies_a_short_filter() {
    // y is x filtered by (0.8, -0.3) without noise; a long stream with a
    // mild prior lands close to the truth
    let dir = tempdir().unwrap();
    let stream = dir.path().join("stream.csv");
    let mut x = Vec::new();
    let mut state = 1234567u64;
    for _ in 0..400 {
        // small xorshift so the input is deterministic but busy
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        x.push((state % 1000) as f64 / 1000.0);
    }
    let mut text = String::new();
    for k in 0..x.len() {
        let prev = if k == 0 { 0.0 } else { x[k - 1] };
        let y = 0.8 * x[k] - 0.3 * prev;
        text.push_str(&format!("{},{}\n", x[k], y));
    }
    std::fs::write(&stream, text).unwrap();

    let out = run(&[
        "solve-lms", stream.to_str().unwrap(), "--p", "2", "--noise-var", "0.01",
        "--cov-scale", "1.0",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let fields: Vec<f64> = stdout(&out)
        .trim()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!(fields.len(), 2);
    assert!(
        (fields[0] - 0.8).abs() <= 0.05 && (fields[1] + 0.3).abs() <= 0.05,
        "identified ({}, {}) vs (0.8, -0.3)",
        fields[0],
        fields[1]
    );
}

#[test]
fn solve_lms_rejects_more_iterations_than_samples() {
    let dir = tempdir().unwrap();
    let stream = dir.path().join("s.csv");
    std::fs::write(&stream, "0.1,0.2\n0.3,0.1\n").unwrap();
    let out = run(&["solve-lms", stream.to_str().unwrap(), "--p", "1", "--n-iters", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("2 samples"), "{}", stderr(&out));
}

#[test]
fn bad_worker_configuration_is_a_usage_error() {
    let out = run(&["--workers", "0", "preset", "--name", "fig4a", "--out", "/tmp/w.csv"]);
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .env("KA_SOLVE_WORKERS", "soon")
        .args(["preset", "--name", "fig4a", "--trials", "2", "--out", "/tmp/w.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("KA_SOLVE_WORKERS"), "{}", stderr(&out));
}
