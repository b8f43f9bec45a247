use std::process::Command;
use wrapsynth::cli::{run, EXIT_LIMIT, EXIT_OK, EXIT_UNSOUND, EXIT_USAGE};

fn wrapsynth(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("wrapsynth").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn modes_lists_vectors_then_count() {
    let (code, out, _) = wrapsynth(&["modes", "@add_lsl", "--width", "6"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.last(), Some(&(lines.len() - 1).to_string().as_str()));
    assert_eq!(lines, ["OO", "UE", "PE", "NO", "4"]);
}

#[test]
fn block_without_modal_instruction_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(&dir, "mov.asm");
    std::fs::write(&f, "MOV R1 R0\nEOR R1 R0\n").unwrap();
    let (code, out, _) = wrapsynth(&["modes", &f]);
    assert_eq!(code, EXIT_OK);
    assert!(out.trim_end().ends_with("(empty)"), "{out}");
}

#[test]
fn inc_stats_count_32_probes_per_bound() {
    let (code, out, _) = wrapsynth(&["synth", "@inc", "--domain", "interval", "--strategy", "const", "--stats"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("guard r0 <= 4294967295"), "{out}");
    assert!(out.contains("guard -r0 <= -4294967295"), "{out}");
    assert!(out.contains("guard r0 <= 4294967294"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("# guard-calls 128 ")), "{out}");
}

#[test]
fn synth_apply_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let tf = path(&dir, "isign.tf.json");
    let (code, _, err) =
        wrapsynth(&["synth", "@isign", "--domain", "interval", "--modes", "UONP", "--format", "json", "-o", &tf]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (code, out, err) = wrapsynth(&["apply", &tf, "-2147483647 <= R0 <= -2147483644, -20 <= R1 <= -10"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("r0 in [-2147483642, -2147483629]"), "{out}");
    assert!(out.contains("r1 in [-20, -10]"), "{out}");

    let small = path(&dir, "isign5.tf");
    let (code, _, _) = wrapsynth(&["synth", "@isign", "--width", "5", "-o", &small]);
    assert_eq!(code, EXIT_OK);
    let (code, out, _) = wrapsynth(&["verify", "@isign", &small, "--samples", "100"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.trim_end().ends_with("clean"));

    // Pull the PEPP upper bound on r0' below the truth.
    let text = std::fs::read_to_string(&small).unwrap();
    let start = text.find("pair PEPP").unwrap();
    let at = start + text[start..].find("update d'1 <= ").unwrap();
    let end = at + text[at..].find('\n').unwrap();
    let bad = format!("{}update d'1 <= -16{}", &text[..at], &text[end..]);
    let bad_path = path(&dir, "bad.tf");
    std::fs::write(&bad_path, bad).unwrap();
    let (code, out, _) = wrapsynth(&["verify", "@isign", &bad_path, "--samples", "100", "--json"]);
    assert_eq!(code, EXIT_UNSOUND);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["violations"].as_u64().unwrap() > 0);
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let args = ["synth", "@roundup", "--width", "8", "--format", "json"];
    let (_, a, _) = wrapsynth(&args);
    let (_, b, _) = wrapsynth(&args);
    assert!(a.starts_with('{'));
    assert_eq!(a, b);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(wrapsynth(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(wrapsynth(&["modes", "/no/such/file.asm"]).0, EXIT_USAGE);
    assert_eq!(wrapsynth(&["modes", "@nosuchblock"]).0, EXIT_USAGE);
    assert_eq!(wrapsynth(&["synth", "@swap", "--width", "99"]).0, EXIT_USAGE);
    assert_eq!(wrapsynth(&["synth", "@swap", "--monomials", "R0*R9"]).0, EXIT_USAGE);
    let (code, _, err) = wrapsynth(&["synth", "@swap", "--modes", "XYZ"]);
    assert_eq!(code, EXIT_USAGE, "{err}");
}

#[test]
fn resource_limits_exit_3() {
    assert_eq!(wrapsynth(&["synth", "@isign", "--width", "6", "--mode-cap", "2"]).0, EXIT_LIMIT);
    assert_eq!(wrapsynth(&["modes", "@isign", "--width", "6", "--mode-cap", "2"]).0, EXIT_LIMIT);
    let (code, _, err) = wrapsynth(&["synth", "@mul_add", "--width", "16", "--budget", "1"]);
    assert_eq!(code, EXIT_LIMIT, "{err}");
}

#[test]
fn apply_rejects_non_octagonal_state() {
    let dir = tempfile::tempdir().unwrap();
    let tf = path(&dir, "swap.tf");
    assert_eq!(wrapsynth(&["synth", "@swap", "--width", "4", "-o", &tf]).0, EXIT_OK);
    let (code, _, err) = wrapsynth(&["apply", &tf, "R0+2*R1 <= 3"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("r0+2*r1"), "{err}");
    let (code, _, err) = wrapsynth(&["apply", &tf, "R0+R1+R0 <= 3"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("not an octagonal"), "{err}");
    let (_, out, _) = wrapsynth(&["apply", &tf, "bottom"]);
    assert_eq!(out, "BOTTOM\n");
}

#[test]
fn dimacs_header_is_first() {
    let (code, out, _) = wrapsynth(&["dimacs", "@inc", "--width", "4"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().find(|l| !l.starts_with('c')).unwrap().starts_with("p cnf "));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_wrapsynth");
    let ok = Command::new(bin).args(["modes", "@swap", "--width", "4"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).arg("--no-such-flag").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    assert!(!bad.stderr.is_empty());
}
