use std::path::{Path, PathBuf};
use std::process::Command;

use corrfix::cli::{self, EXIT_ERROR, EXIT_NOT_CORRELATION, EXIT_OK};
use corrfix::io::{read_matrix, write_matrix};
use corrfix_core::SymmetricMatrix;
use proptest::prelude::*;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let argv = std::iter::once("corrfix").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn corr_with_override_is_not_psd() {
    let panel = data("aex_2013_panel.csv");
    let r = run(&[
        "corr",
        panel.to_str().unwrap(),
        "--override",
        "Wolters Kluwer,Euro/US dollar,1:5",
    ]);
    assert_eq!(r.code, EXIT_NOT_CORRELATION, "{}", r.err);
    assert_eq!(field(&r.err, "is_psd"), "false");
    assert_eq!(read_matrix(&r.out).unwrap().dim(), 5);
}

#[test]
fn corr_without_override_is_psd() {
    let panel = data("aex_2013_panel.csv");
    let r = run(&["corr", panel.to_str().unwrap(), "--header"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r
        .out
        .starts_with(",Galapagos,Heineken,TomTom,Wolters Kluwer,Euro/US dollar\n"));
}

#[test]
fn corr_single_instrument() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "one.csv",
        "date,X\n2020-01-01,1\n2020-01-02,2\n2020-01-03,4\n",
    );
    let r = run(&["corr", &p]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(r.out.trim(), "1.000000");
}

#[test]
fn corr_missing_cell_fails_under_default_policy() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "gap.csv",
        "date,X,Y\nd1,1,2\nd2,,3\nd3,2,5\nd4,4,4\nd5,3,1\n",
    );
    assert_eq!(run(&["corr", &p]).code, EXIT_ERROR);
    assert_eq!(run(&["corr", &p, "--policy", "drop"]).code, EXIT_OK);
    assert_eq!(run(&["corr", &p, "--policy", "pairwise"]).code, EXIT_OK);
}

#[test]
fn check_classifies_files() {
    let dir = tempfile::tempdir().unwrap();
    let identity = write(dir.path(), "i.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let r = run(&["check", &identity]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(field(&r.out, "is_correlation"), "true");

    let r = run(&["check", data("aex_2013_distorted.csv").to_str().unwrap()]);
    assert_eq!(r.code, EXIT_NOT_CORRELATION);
    assert_eq!(field(&r.out, "is_psd"), "false");
    let min: f64 = field(&r.out, "min_eigenvalue").parse().unwrap();
    assert!((min + 0.089).abs() < 1e-3);

    let asym = write(dir.path(), "a.csv", "1,0.5\n0.4,1\n");
    let r = run(&["check", &asym]);
    assert_eq!(r.code, EXIT_NOT_CORRELATION);
    assert_eq!(field(&r.out, "is_symmetric"), "false");
}

#[test]
fn repaired_output_checks_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fixed.csv");
    let r = run(&[
        "repair",
        data("aex_2013_distorted.csv").to_str().unwrap(),
        "--epsilon",
        "0.001",
        "--output",
        out.to_str().unwrap(),
        "--header",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(field(&r.out, "clipped_count"), "1");
    assert_eq!(run(&["check", out.to_str().unwrap()]).code, EXIT_OK);

    let compare = run(&[
        "compare",
        out.to_str().unwrap(),
        data("aex_2013_corrected.csv").to_str().unwrap(),
    ]);
    assert_eq!(compare.code, EXIT_OK);
    let max: f64 = field(&compare.out, "max").parse().unwrap();
    assert!(max <= 0.002, "{max}");
}

#[test]
fn repair_identity_clips_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "i.csv", "1,0\n0,1\n");
    let r = run(&["repair", &p]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(field(&r.err, "clipped_count"), "0");
    assert_eq!(r.out, "1.000000,0.000000\n0.000000,1.000000\n");
}

#[test]
fn repair_two_by_two_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "1,1.1\n1.1,1\n");
    // eigenvalues 2.1 and -0.1; off-diagonal becomes (2.1 - eps) / (2.1 + eps)
    let r = run(&["repair", &p, "--epsilon", "0.001"]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.out, "1.000000,0.999048\n0.999048,1.000000\n");

    let apd = run(&["repair", &p, "--method", "apd", "--format", "json"]);
    assert_eq!(apd.code, EXIT_OK);
    let v: Value = serde_json::from_str(&apd.err).unwrap();
    assert_eq!(v["method"], "apd");
}

#[test]
fn compare_norms() {
    let dir = tempfile::tempdir().unwrap();
    let i = write(dir.path(), "i.csv", "1,0\n0,1\n");
    let z = write(dir.path(), "z.csv", "0,0\n0,0\n");
    let r = run(&["compare", &i, &i]);
    assert_eq!(r.out, "frobenius: 0.0\nmax: 0.0\nscaled_max: 0.0\n");
    let r = run(&["compare", &i, &z]);
    assert_eq!(
        r.out,
        format!("frobenius: {}\nmax: 1.0\nscaled_max: 2.0\n", 2f64.sqrt())
    );

    let three = write(dir.path(), "t.csv", "1,0,0\n0,1,0\n0,0,1\n");
    assert_eq!(run(&["compare", &i, &three]).code, EXIT_ERROR);
}

#[test]
fn distorted_and_corrected_are_close_in_max_norm() {
    let r = run(&[
        "compare",
        data("aex_2013_distorted.csv").to_str().unwrap(),
        data("aex_2013_corrected.csv").to_str().unwrap(),
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert!(v["max"].as_f64().unwrap() <= 0.06);
    assert_eq!(v["scaled_max"].as_f64().unwrap(), 5.0 * v["max"].as_f64().unwrap());
}

#[test]
fn bench_is_deterministic() {
    let args = [
        "bench", "--size", "10", "--trials", "50", "--seed", "42", "--format", "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.out, b.out);
    let v: Value = serde_json::from_str(&a.out).unwrap();
    assert_eq!(v["trials"], 50);
    assert!(
        v["apd_frobenius_vs_perturbed_mean"].as_f64().unwrap()
            <= v["clip_frobenius_vs_perturbed_mean"].as_f64().unwrap()
    );
}

#[test]
fn bench_zero_noise_is_all_zero() {
    let r = run(&[
        "bench", "--size", "5", "--trials", "3", "--noise", "0", "--format", "json",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    for key in ["clip_frobenius_vs_perturbed_max", "apd_max_vs_original_max"] {
        assert_eq!(v[key], 0.0, "{key}");
    }
}

#[test]
fn failed_run_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "1,0.5\n0.5,oops\n");
    let out = dir.path().join("out.csv");
    let r = run(&["repair", &bad, "--output", out.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.err.starts_with("error:"));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["repair"]).code, EXIT_ERROR);
    assert_eq!(run(&["bench", "--epsilon", "0"]).code, EXIT_ERROR);
    assert_eq!(run(&["repair", "x.csv", "--precision", "18"]).code, EXIT_ERROR);
    assert_eq!(run(&["corr", "x.csv", "--override", "A,B"]).code, EXIT_ERROR);
    assert_eq!(run(&["check", "/nonexistent/m.csv"]).code, EXIT_ERROR);
    assert_eq!(run(&["--help"]).code, EXIT_OK);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_corrfix");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(
        status(&["check", data("aex_2013_corrected.csv").to_str().unwrap()]),
        Some(EXIT_OK)
    );
    assert_eq!(
        status(&["check", data("aex_2013_distorted.csv").to_str().unwrap()]),
        Some(EXIT_NOT_CORRELATION)
    );
    assert_eq!(status(&["check", "/nonexistent/m.csv"]), Some(EXIT_ERROR));
}

proptest! {
    #[test]
    fn full_precision_round_trip(n in 1usize..6, seed in prop::collection::vec(-1e3f64..1e3, 21)) {
        let a = SymmetricMatrix::from_upper_fn(n, |i, j| seed[i * n + j - i * (i + 1) / 2]).unwrap();
        let back = read_matrix(&write_matrix(&a, 17, None).unwrap()).unwrap();
        for i in 0..n {
            for j in 0..n {
                let rel = (back.get(i, j) - a.get(i, j)).abs() / a.get(i, j).abs().max(1.0);
                prop_assert!(rel <= 1e-15);
            }
        }
    }
}
