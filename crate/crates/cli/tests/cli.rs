//! End-to-end tests of the `confluo` binary: output shapes and the exit
//! code contract (0 ok, 1 counterexample, 2 usage/syntax, 3 undeclared
//! symbol, 4 undecided within budget).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

/// Runs the binary from the workspace root so rule-file paths in the
/// output stay relative and stable.
fn confluo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confluo"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn check_reports_tree_criteria_and_applicable_results() {
    let out = confluo(&["check", "corpus/tree.crs"]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0);
    assert!(text.contains("rules: 14   symbols: 17 (6 defined)"));
    for flag in [
        "left-linear:            yes",
        "semi-closed:            yes",
        "right-applicative:      yes",
        "applicative:            yes",
        "algebraic:              yes",
        "arity-compliant:        yes",
        "rules beta-normal:      yes",
        "orthonormal:            yes",
    ] {
        assert!(text.contains(flag), "missing `{flag}` in:\n{text}");
    }
    // Fully regular system: every implemented criterion applies.
    let results = text
        .lines()
        .skip_while(|l| !l.starts_with("applicable results"))
        .filter(|l| l.starts_with("  - "))
        .count();
    assert_eq!(results, 5, "expected five applicable results:\n{text}");
    assert!(text.contains("shallow confluence"));
}

#[test]
fn check_full_corpus_is_orthonormal_but_not_applicative() {
    let out = confluo(&["check", "corpus/full.crs"]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0);
    assert!(text.contains("rules: 25   symbols: 22 (11 defined)"));
    // The replacement rule carries a lambda on its right side.
    assert!(text.contains("right-applicative:      no"));
    assert!(text.contains("algebraic:              no"));
    assert!(text.contains("arity-compliant:        yes"));
    assert!(text.contains("orthonormal:            yes"));
    assert!(text.contains("shallow confluence of beta-aware conditional rewriting"));
}

#[test]
fn check_explains_each_orthonormality_failure() {
    let out = confluo(&["check", "corpus/minus_cond.crs"]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0);
    assert!(text.contains("semi-closed:            no"));
    assert!(text.contains("orthonormal:            no"));
    for line in [
        "rule `m_eq` condition 1: target has free variables",
        "rule `m_gap` condition 1: target has free variables",
        "critical pair of `m_eq` and `m_gap` at e has no clashing conditions: s zero vs zero",
        "critical pair of `m_gap` and `m_eq` at e has no clashing conditions: zero vs s zero",
    ] {
        assert!(text.contains(line), "missing `{line}` in:\n{text}");
    }
}

#[test]
fn reduce_prints_the_full_derivation() {
    let out = confluo(&["reduce", "corpus/tree.crs", "len (cons a (cons b nil))"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "start len (cons a (cons b nil))\n\
         e rule len_cons s (len (cons b nil))\n\
         2 rule len_cons s (s (len nil))\n\
         2.2 rule len_nil s (s zero)\n\
         normal form: s (s zero) (3 steps)\n"
    );
}

#[test]
fn normalize_prints_only_the_status_line() {
    let out = confluo(&["normalize", "corpus/tree.crs", "len (cons a (cons b nil))"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "normal form: s (s zero) (3 steps)\n");
}

#[test]
fn normalize_with_zero_fuel_exhausts_immediately() {
    let out = confluo(&["normalize", "corpus/tree.crs", "len nil", "--fuel", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "fuel exhausted after 0 steps: len nil\n");
}

#[test]
fn normalize_dot_prints_the_reduction_graph() {
    let out = confluo(&["normalize", "corpus/tree.crs", "len nil", "--format", "dot"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("digraph reduction {"));
    assert!(text.contains("label=\"len_nil\""));
}

#[test]
fn join_prints_witness_and_both_derivations() {
    let out = confluo(&["join", "corpus/tree.crs", "car (cons a nil)", "(\\x. x) a"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "joinable at: a\n\
         left:\n  start car (cons a nil)\n  e rule car_cons a\n\
         right:\n  start (\\x. x) a\n  e beta a\n"
    );
}

#[test]
fn join_distinct_normal_forms_exits_one() {
    let out = confluo(&["join", "corpus/tree.crs", "a", "b"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "not joinable\n");
}

#[test]
fn join_cut_off_by_budget_exits_four() {
    // A diverging beta term against an inert constant: the search can
    // never close, so the verdict stays unknown.
    let fix = "(\\u. \\v. v (u u v)) (\\u. \\v. v (u u v)) s";
    let out = confluo(&[
        "join",
        "corpus/minus_cond.crs",
        fix,
        "zero",
        "--max-graph",
        "200",
    ]);
    assert_eq!(code(&out), 4);
    assert_eq!(stdout(&out), "unknown within budget\n");
}

#[test]
fn undeclared_symbol_exits_three() {
    let out = confluo(&["reduce", "corpus/tree.crs", "len kaboom"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("undeclared symbol `kaboom`"));
}

#[test]
fn missing_rule_file_exits_two() {
    let out = confluo(&["check", "corpus/nope.crs"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("corpus/nope.crs"));
}

#[test]
fn syntax_error_in_rule_file_exits_two() {
    // A seeds file is not a rule file; the parser rejects it up front.
    let out = confluo(&["check", "seeds/tree.terms"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("parse error"));
}

#[test]
fn level_flag_is_rejected_for_pure_beta() {
    let out = confluo(&[
        "reduce",
        "corpus/tree.crs",
        "len nil",
        "--rel",
        "beta",
        "--level",
        "2",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--level does not apply to --rel beta"));
}

#[test]
fn b_base_flag_is_rejected_outside_the_b_family() {
    let out = confluo(&[
        "reduce",
        "corpus/tree.crs",
        "len nil",
        "--rel",
        "a",
        "--b-base",
        "a",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--b-base applies only to --rel b and --rel beta-b"));
}

#[test]
fn probe_finds_the_open_condition_counterexample() {
    let out = confluo(&[
        "probe",
        "corpus/minus_cond.crs",
        "seeds/minus.terms",
        "--rel",
        "beta-a",
    ]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("not joinable: 1"));
    assert!(text.contains("left endpoint:  zero"));
    assert!(text.contains("right endpoint: s zero"));
    // Both endpoint derivations justify their rule's condition inline.
    assert!(text.contains("rule m_eq"));
    assert!(text.contains("rule m_gap"));
}

#[test]
fn probe_tree_corpus_is_clean_under_both_combined_relations() {
    for rel in ["beta-a", "beta-b"] {
        let out = confluo(&["probe", "corpus/tree.crs", "seeds/tree.terms", "--rel", rel]);
        assert_eq!(code(&out), 0, "--rel {rel}:\n{}", stdout(&out));
        let text = stdout(&out);
        assert!(text.contains("not joinable: 0"));
        assert!(text.contains("unknown: 0"));
        assert!(text.contains("open search: no"));
    }
}

#[test]
fn probe_separates_beta_b_from_beta_a_on_the_gap_systems() {
    for n in 1..=4 {
        let sys = format!("corpus/beta_gap_{n}.crs");
        // Under conditions evaluated with full beta available, the
        // conditional rule fires and collides with the unconditional one.
        let out = confluo(&[
            "probe",
            &sys,
            "seeds/beta_gap.terms",
            "--rel",
            "beta-b",
            "--b-base",
            "a",
        ]);
        assert_eq!(code(&out), 1, "{sys} should fail under beta-b");
        let text = stdout(&out);
        assert!(text.contains("left endpoint:  b"), "{sys}:\n{text}");
        assert!(text.contains("right endpoint: a"), "{sys}:\n{text}");
        // Under condition evaluation without beta the rule is inert, so
        // the same seed probes clean.
        let out = confluo(&["probe", &sys, "seeds/beta_gap.terms", "--rel", "beta-a"]);
        assert_eq!(code(&out), 0, "{sys} should probe clean under beta-a");
        assert!(stdout(&out).contains("not joinable: 0"));
    }
}

#[test]
fn probe_peak_width_widens_the_tested_peak_set() {
    fn peaks(width: &str) -> u32 {
        let out = confluo(&[
            "probe",
            "corpus/tree.crs",
            "seeds/tree.terms",
            "--peak-width",
            width,
        ]);
        assert_eq!(code(&out), 0);
        let text = stdout(&out);
        let line = text
            .lines()
            .find(|l| l.contains("peaks tested:"))
            .expect("peak count line");
        line.rsplit(' ').next().unwrap().parse().expect("count")
    }
    assert!(peaks("1") < peaks("3"));
}

#[test]
fn cp_lists_root_overlaps_of_opposed_conditional_rules() {
    let out = confluo(&["cp", "corpus/full.crs"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("8 critical pairs (8 non-trivial)"));
    assert!(text.contains("outer occ_out / inner occ_in at e"));
    assert!(text.contains("outer fil_t / inner fil_f at e"));
    assert!(text.contains("outer app_in / inner app_out at e"));
    assert!(text.contains("outer rep_in / inner rep_out at e"));
}

#[test]
fn cp_shows_the_condition_of_a_conditional_overlap() {
    let out = confluo(&["cp", "corpus/beta_gap_2.crs"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("2 critical pairs (2 non-trivial)"));
    assert!(text.contains("outer f_cond / inner f_any at e"));
    assert!(text.contains("condition: x0 c = d"));
}

#[test]
fn cp_on_orthogonal_rules_reports_none() {
    let path = std::env::temp_dir().join("confluo_orthogonal_test.crs");
    std::fs::write(
        &path,
        "sig f: 1; sig g: 1; sig a: 0;\nrule rf: f a -> a;\nrule rg: g a -> a;\n",
    )
    .unwrap();
    let out = confluo(&["cp", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("0 critical pairs"));
}

#[test]
fn commute_beta_with_rules_on_tree_seeds() {
    let out = confluo(&[
        "commute",
        "corpus/tree.crs",
        "seeds/tree.terms",
        "--rel-left",
        "beta",
        "--rel-right",
        "a",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("left: beta   right: a@omega"));
    assert!(text.contains("not commuting: 0"));
    assert!(text.contains("no counterexamples found"));
}

#[test]
fn structured_reduce_is_valid_json_with_the_documented_fields() {
    let out = confluo(&[
        "reduce",
        "corpus/tree.crs",
        "len (cons a (cons b nil))",
        "--format",
        "structured",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(v["status"], "normal_form");
    assert_eq!(v["result"], "s (s zero)");
    assert_eq!(v["steps"], 3);
    assert_eq!(v["derivation"]["steps"].as_array().unwrap().len(), 3);
    assert_eq!(v["derivation"]["steps"][0]["position"], "e");
    assert_eq!(v["derivation"]["steps"][0]["kind"], "rule len_cons");
}

#[test]
fn structured_probe_output_is_deterministic() {
    let args = [
        "probe",
        "corpus/full.crs",
        "seeds/full.terms",
        "--rel",
        "beta-b",
        "--format",
        "structured",
    ];
    let first = confluo(&args);
    let second = confluo(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout(&first), stdout(&second));
    let v: serde_json::Value = serde_json::from_str(&stdout(&first)).expect("valid json");
    assert_eq!(v["not_joinable"], 0);
    assert_eq!(v["unknown"], 0);
    assert_eq!(v["counterexamples"].as_array().unwrap().len(), 0);
}

#[test]
fn dot_format_is_limited_to_graph_commands() {
    let out = confluo(&["check", "corpus/tree.crs", "--format", "dot"]);
    assert_eq!(code(&out), 2);
    let out = confluo(&["cp", "corpus/tree.crs", "--format", "dot"]);
    assert_eq!(code(&out), 2);
}
