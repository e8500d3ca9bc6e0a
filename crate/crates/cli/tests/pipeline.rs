use std::fs;
use std::path::Path;
use std::process::Command;

use stabnum::instance::{parse_instance, Solution};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("stabnum").chain(args.iter().copied());
    let code = stabnum_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn kv<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("missing {key} in\n{text}"))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_then_bound_with_exact_check() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("a.pts");
    let (code, _, _) = run(&["gen", "--random", "10", "--bbox", "100", "--seed", "7", "-o", p(&pts)]);
    assert_eq!(code, 0);
    let inst = parse_instance(&fs::read_to_string(&pts).unwrap(), "a").unwrap();
    assert_eq!(inst.len(), 10);

    let (code, out, _) = run(&["bound", p(&pts), "--problem", "matching", "--family", "axis", "--exact-check"]);
    assert_eq!(code, 0, "{out}");
    let k: f64 = kv(&out, "k_frac").parse().unwrap();
    let ceil: usize = kv(&out, "ceil_bound").parse().unwrap();
    assert_eq!(ceil as f64, (k - 1e-6).ceil());
    assert_eq!(kv(&out, "exact_check"), "ok");
    let exact = stabnum::instance::parse_rational(kv(&out, "k_frac_exact")).unwrap();
    let approx = exact.numer().to_string().parse::<f64>().unwrap() / exact.denom().to_string().parse::<f64>().unwrap();
    assert!((approx - k).abs() < 1e-6);
}

#[test]
fn gen_is_reproducible() {
    let a = run(&["gen", "--grid", "3x4", "--keep", "0.75", "--seed", "3"]);
    let b = run(&["gen", "--grid", "3x4", "--keep", "0.75", "--seed", "3"]);
    assert_eq!(a.0, 0);
    assert_eq!(a, b);
    let c = run(&["gen", "--grid", "3x4", "--keep", "0.75", "--seed", "4"]);
    assert_ne!(a.1, c.1);
}

#[test]
fn exact_emits_solution_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("a.pts");
    run(&["gen", "--random", "7", "--seed", "7", "-o", p(&pts)]);
    let (code, out, err) = run(&["exact", p(&pts), "--problem", "tree", "--family", "general", "--time-limit", "60000"]);
    assert_eq!(code, 0, "{err}");
    let inst = parse_instance(&fs::read_to_string(&pts).unwrap(), "a").unwrap();
    let sol = Solution::from_json(&out, &inst).unwrap();
    assert_eq!(kv(&err, "k_exact"), sol.k.to_string());
    let ceil: usize = kv(&err, "ceil_bound").parse().unwrap();
    let rounding: usize = kv(&err, "k_rounding").parse().unwrap();
    assert!(ceil <= sol.k && sol.k <= rounding);
    let ratio: f64 = kv(&err, "ratio").parse().unwrap();
    assert!((ratio - rounding as f64 / sol.k.max(ceil) as f64).abs() < 1e-6);
}

#[test]
fn emitted_solutions_evaluate_to_their_stored_k() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("b.pts");
    run(&["gen", "--random", "8", "--bbox", "20", "--seed", "11", "-o", p(&pts)]);
    for (cmd, problem, family) in [
        ("round", "matching", "axis"),
        ("round", "tree", "general"),
        ("exact", "matching", "general"),
        ("exact", "tree", "axis"),
        ("minlen", "matching", "general"),
        ("minlen", "tree", "axis"),
    ] {
        let sol = dir.path().join(format!("{cmd}-{problem}-{family}.json"));
        let (code, _, err) = run(&[cmd, p(&pts), "--problem", problem, "--family", family, "-o", p(&sol)]);
        assert_eq!(code, 0, "{cmd} {problem} {family}: {err}");
        for objective in ["stabbing", "crossing", "average", "length"] {
            let (code, out, err) = run(&["eval", p(&pts), "--edges", p(&sol), "--objective", objective]);
            assert_eq!(code, 0, "{err}");
            assert_eq!(kv(&out, "consistent"), "true");
            assert_eq!(kv(&out, "stored_k"), kv(&out, "recomputed_k"));
        }
    }
}

#[test]
fn eval_rejects_tampered_k() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("sq.pts");
    fs::write(&pts, "4\n0 0\n1 0\n0 1\n1 1\n").unwrap();
    let sol = dir.path().join("s.json");
    run(&["round", p(&pts), "-o", p(&sol)]);
    let text = fs::read_to_string(&sol).unwrap().replace("\"k\": 2", "\"k\": 1");
    fs::write(&sol, text).unwrap();
    let (code, _, err) = run(&["eval", p(&pts), "--edges", p(&sol)]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn report_lists_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("sq.pts");
    fs::write(&pts, "# name: square\n4\n0 0\n1 0\n0 1\n1 1\n").unwrap();
    let (code, out, err) = run(&["report", p(&pts), "--exact-check"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(kv(&out, "instance"), "square");
    assert_eq!(kv(&out, "k_frac"), "1.500000");
    assert_eq!(kv(&out, "k_frac_exact"), "3/2");
    assert_eq!(kv(&out, "ceil_bound"), "2");
    assert_eq!(kv(&out, "k_exact"), "2");
    assert_eq!(kv(&out, "ratio"), "1.000000");
    for key in ["k_rounding", "cuts_added", "time_bound_ms", "time_rounding_ms", "time_exact_ms"] {
        kv(&out, key);
    }
}

#[test]
fn odd_matching_needs_explicit_drop() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("odd.pts");
    fs::write(&pts, "5\n0 0\n4 0\n0 4\n4 4\n9 9\n").unwrap();
    let (code, _, _) = run(&["bound", p(&pts)]);
    assert_eq!(code, 2);
    let (code, out, _) = run(&["bound", p(&pts), "--drop-last"]);
    assert_eq!(code, 0);
    assert_eq!(kv(&out, "k_frac"), "1.500000");
}

#[test]
fn oracle_on_square() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("sq.pts");
    fs::write(&pts, "4\n0 0\n1 0\n0 1\n1 1\n").unwrap();
    let (code, out, _) = run(&["oracle", p(&pts), "--problem", "triangulation", "--objective", "crossing"]);
    assert_eq!(code, 0);
    assert_eq!(kv(&out, "value"), "3");
    assert_eq!(kv(&out, "optimal_structures"), "2");
    let (_, out, _) = run(&["oracle", p(&pts), "--problem", "matching"]);
    assert_eq!(kv(&out, "value"), "2");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["bound"]).0, 1);
    assert_eq!(run(&["bound", "/nonexistent/file.pts"]).0, 1);
    assert_eq!(run(&["gen", "--grid", "3by4"]).0, 1);
    assert_eq!(run(&["bound", "x.pts", "--family", "diagonal"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn bound_rejects_triangulation() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("sq.pts");
    fs::write(&pts, "4\n0 0\n1 0\n0 1\n1 1\n").unwrap();
    assert_eq!(run(&["bound", p(&pts), "--problem", "triangulation"]).0, 1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_stabnum");
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("odd.pts");
    fs::write(&pts, "3\n0 0\n1 0\n0 1\n").unwrap();
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["gen", "--random", "4"]), Some(0));
    assert_eq!(status(&["nope"]), Some(1));
    assert_eq!(status(&["round", p(&pts)]), Some(2));
    let a = Command::new(bin).args(["round", p(&pts), "--problem", "tree"]).output().unwrap();
    let b = Command::new(bin).args(["round", p(&pts), "--problem", "tree"]).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
