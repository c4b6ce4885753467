mod common;

use common::*;
use entente::oracle::Priority;
use entente::pipeline::{self, RunConfig};
use entente::report::Report;
use entente::transplant::{append_labels, TriageCategory, TriageLabel};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// First directive action for `engine` in `source`, read without the mock
/// module: `//!mock <engine|*> <action>`, unconditional directives only.
fn scripted_action(source: &str, engine: &str) -> String {
    for line in source.lines() {
        let Some(rest) = line.strip_prefix("//!mock ") else { continue };
        let mut parts = rest.splitn(2, ' ');
        let (who, action) = (parts.next().unwrap(), parts.next().unwrap_or("pass"));
        if who == engine || who == "*" {
            return action.to_string();
        }
    }
    "pass".into()
}

fn scripted_category(action: &str) -> &'static str {
    match action.split(':').next().unwrap() {
        "pass" | "print" => "PASS",
        "assert-fail" => "ASSERT_FAIL",
        "throw" => "RUNTIME_ERROR",
        "crash" => "CRASH",
        other => panic!("fixture uses unscripted action {other}"),
    }
}

fn write_suite(root: &Path, suite: &str, files: &[(&str, &str)]) {
    let dir = root.join(suite);
    std::fs::create_dir_all(&dir).unwrap();
    for (name, text) in files {
        std::fs::write(dir.join(name), text).unwrap();
    }
}

#[test]
fn parent_filter_keeps_what_the_scripts_say() {
    let d = tempfile::tempdir().unwrap();
    let files: Vec<(String, String)> = (0..10)
        .map(|i| {
            let body = if i == 2 || i == 7 {
                format!("//!mock p1 assert-fail:case {i}\nvar x{i} = {i};\n")
            } else {
                format!("//!mock p2 throw:RangeError:only elsewhere\nvar x{i} = {i};\n")
            };
            (format!("t{i}.js"), body)
        })
        .collect();
    let refs: Vec<(&str, &str)> = files.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    write_suite(d.path(), "s", &refs);
    std::fs::write(d.path().join("m.toml"), "[[suite]]\nname = \"s\"\ndir = \"s\"\nparent_engine = \"p1\"\n").unwrap();
    let cfg = RunConfig::new(mock_registry(d.path(), &["p1", "p2"]), d.path().join("out"))
        .with_manifest(d.path().join("m.toml"));
    let (report, stages) = pipeline::filter(&cfg).unwrap();
    let expected_kept =
        files.iter().filter(|(_, src)| scripted_category(&scripted_action(src, "p1")) == "PASS").count();
    assert_eq!(stages.pass_in_parent.len(), expected_kept);
    assert_eq!(report.filter_reports[0].kept, expected_kept);
    assert!(report.filter_reports[0].discarded.iter().all(|x| x.reason.starts_with("fails in parent")));
}

/// Three suites, each the regression suite of one of three engines.
fn three_by_three(root: &Path) -> RunConfig {
    write_suite(
        root,
        "A",
        &[
            ("a1.js", "//!mock e2 assert-fail:wrong sum\nvar a = 1;\n"),
            ("a2.js", "//!mock e3 throw:RangeError:bad length 12\nvar b = 2;\n"),
            ("a3.js", "var c = 3;\n"),
        ],
    );
    write_suite(
        root,
        "B",
        &[
            ("b1.js", "//!mock e1 crash:11\n//!mock e3 crash:11\nvar d = 4;\n"),
            ("b2.js", "//!mock e2 assert-fail:never runs in parent\n//!mock e1 pass\nvar e = 5;\n"),
        ],
    );
    write_suite(
        root,
        "C",
        &[
            ("c1.js", "//!mock e1 assert-fail:got 1\nvar f = 6;\n"),
            ("c2.js", "//!mock e3 throw:TypeError:x is not a function\nvar g = 7;\n"),
        ],
    );
    let mut m = String::new();
    for (s, e) in [("A", "e1"), ("B", "e2"), ("C", "e3")] {
        m.push_str(&format!("[[suite]]\nname = \"{s}\"\ndir = \"{s}\"\nparent_engine = \"{e}\"\n\n"));
    }
    std::fs::write(root.join("m.toml"), m).unwrap();
    RunConfig::new(mock_registry(root, &["e1", "e2", "e3"]), root.join("out")).with_manifest(root.join("m.toml"))
}

#[test]
fn transplant_matrix_matches_replayed_scripts() {
    let d = tempfile::tempdir().unwrap();
    let cfg = three_by_three(d.path());
    let (report, matrix) = pipeline::transplant(&cfg).unwrap();

    // Replay: type-in-all drops c2 (TypeError) and b2 fails in its parent.
    let parents = BTreeMap::from([("A", "e1"), ("B", "e2"), ("C", "e3")]);
    let mut expected: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    for (suite, parent) in &parents {
        let mut names: Vec<_> = std::fs::read_dir(d.path().join(suite)).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        for p in names {
            let src = std::fs::read_to_string(&p).unwrap();
            let id = format!("{suite}/{}", p.file_name().unwrap().to_string_lossy());
            let actions: BTreeMap<&str, String> =
                ["e1", "e2", "e3"].iter().map(|e| (*e, scripted_action(&src, e))).collect();
            let parent_ok = scripted_category(&actions[parent]) == "PASS";
            let type_error =
                actions.values().any(|a| a.starts_with("throw:TypeError") || a.starts_with("throw:ReferenceError"));
            if !parent_ok || type_error {
                continue;
            }
            for (e, a) in &actions {
                if e != parent && scripted_category(a) != "PASS" {
                    expected.entry((suite.to_string(), e.to_string())).or_default().push(id.clone());
                }
            }
        }
    }
    let got: BTreeMap<(String, String), Vec<String>> = matrix
        .cells
        .iter()
        .filter(|c| !c.failures.is_empty())
        .map(|c| ((c.suite.clone(), c.engine.clone()), c.failures.clone()))
        .collect();
    assert_eq!(got, expected);
    assert_eq!(matrix.total_failures(), 5);
    let diagonal: BTreeSet<(String, String)> = matrix.diagonal_skipped.iter().cloned().collect();
    assert!(diagonal.iter().all(|(s, e)| parents[s.as_str()] == e));
    assert_eq!(report.transplant_matrix.as_ref(), Some(&matrix));
    assert!(report.summary().contains("| A |"));
}

#[test]
fn report_counts_match_scripted_warnings() {
    let d = tempfile::tempdir().unwrap();
    let scripts = [
        ("w1.js", "//!mock e1 assert-fail:one\nvar a = 1;\n"),
        ("w2.js", "//!mock e1 assert-fail:two\n//!mock e2 assert-fail:two\nvar b = 2;\n"),
        ("w3.js", "//!mock e3 throw:RangeError:index 4 out of range\nvar c = 3;\n"),
        ("w4.js", "//!mock e3 throw:RangeError:index 9 out of range\nvar d = 4;\n"),
        ("w5.js", "//!mock e2 crash:6\n//!mock e3 assert-fail:five\nvar e = 5;\n"),
        ("quiet.js", "var f = 6;\n"),
        ("all-fail.js", "//!mock e1 crash:6\n//!mock * throw:RangeError:everywhere\nvar g = 7;\n"),
    ];
    write_suite(d.path(), "s", &scripts);
    std::fs::write(d.path().join("m.toml"), "[[suite]]\nname = \"s\"\ndir = \"s\"\n").unwrap();
    let mut cfg = RunConfig::new(mock_registry(d.path(), &["e1", "e2", "e3"]), d.path().join("out"))
        .with_manifest(d.path().join("m.toml"));
    cfg.report_all_fail_mismatch = true;
    let (report, _) = pipeline::transplant(&cfg).unwrap();

    let engines = ["e1", "e2", "e3"];
    let (mut hi, mut lo) = (BTreeMap::new(), BTreeMap::new());
    for (_, src) in &scripts {
        let cats: Vec<&str> = engines.iter().map(|e| scripted_category(&scripted_action(src, e))).collect();
        let failing: Vec<&&str> = cats.iter().filter(|c| **c != "PASS").collect();
        if failing.is_empty() || failing.len() == cats.len() {
            continue;
        }
        let deviators: Vec<&str> = (0..3)
            .filter(|&i| {
                let others: BTreeSet<&str> = (0..3).filter(|&j| j != i).map(|j| cats[j]).collect();
                others.len() == 1 && !others.contains(cats[i])
            })
            .map(|i| engines[i])
            .collect();
        let group = if deviators.len() == 1 { deviators[0].to_string() } else { "+1".to_string() };
        let bucket = if failing.iter().all(|c| **c == "ASSERT_FAIL") { &mut hi } else { &mut lo };
        *bucket.entry(group).or_insert(0usize) += 1;
    }
    assert_eq!(report.warnings.len(), 5);
    let nonzero = |m: BTreeMap<String, usize>| m.into_iter().filter(|(_, n)| *n > 0).collect::<BTreeMap<_, _>>();
    assert_eq!(nonzero(report.per_group(Priority::Hi)), hi);
    assert_eq!(nonzero(report.per_group(Priority::Lo)), lo);
    assert_eq!(report.hi_count() + report.lo_count(), 5);
    // w3 and w4 differ only in a number.
    assert_eq!(report.clusters.len(), 2);
    assert_eq!(report.info.len(), 1);
    assert_eq!(report.queue.len(), report.hi_count() + report.clusters.len());

    let (json, md) = report.emit(&d.path().join("out")).unwrap();
    let back = Report::load(&json).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.summary(), std::fs::read_to_string(md).unwrap());
}

#[test]
fn fuzzdiff_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let reg = mock_registry(d.path(), &ENGINES);
    let run = |out: &str| {
        let mut cfg = RunConfig::new(&reg, d.path().join(out)).with_manifest(corpus_manifest());
        cfg.mutants_per_seed = 4;
        cfg.rng_seed = 42;
        let (report, gens) = pipeline::fuzzdiff(&cfg).unwrap();
        (report.to_json(), gens)
    };
    let (a, gens) = run("a");
    let (b, _) = run("b");
    assert_eq!(a, b);
    assert_eq!(gens.len(), 30);
    let mutant_dir = d.path().join("a/mutants/shared/dataview-getint8.js");
    assert!(mutant_dir.join("0.js").is_file() && mutant_dir.join("0.json").is_file());
    let report = Report::from_json(&a).unwrap();
    assert_eq!(report.rng_seed, Some(42));
    assert_eq!(report.fuzz.as_ref().unwrap().mutants, 120);
}

#[test]
fn reduction_keeps_the_warning() {
    let d = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(mock_registry(d.path(), &ENGINES), d.path().join("out"));
    let seed = std::fs::read_to_string(fixtures().join("corpus/suites/shared/dataview-getint8.js")).unwrap();
    let noisy = seed.replace("getInt8(0)", "getInt8(-1770523502845470856)")
        + "var unrelated = [1, 2, 3];\nunrelated.reverse();\nfunction helper() { return 4; }\n";
    let (warning, reduction) = pipeline::reduce(&cfg, &noisy, None).unwrap();
    assert_eq!(warning.group, "chakra");
    assert!(reduction.lines_after < reduction.lines_before);
    assert!(!reduction.source.contains("unrelated"));
    let (again, _) = pipeline::reduce(&cfg, &reduction.source, None).unwrap();
    assert_eq!(again.priority, warning.priority);
    assert_eq!(again.group, warning.group);
}

#[test]
fn reduce_refuses_agreeing_input() {
    let d = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(mock_registry(d.path(), &ENGINES), d.path().join("out"));
    assert!(matches!(pipeline::reduce(&cfg, "var a = 1;\n", None), Err(pipeline::PipelineError::Usage(_))));
}

#[test]
fn transplant_annotations_feed_the_distribution() {
    let d = tempfile::tempdir().unwrap();
    let mut cfg = three_by_three(d.path());
    let labels = d.path().join("annotations.jsonl");
    append_labels(
        &labels,
        &[TriageLabel {
            test_id: "A/a1.js".into(),
            engine: "e2".into(),
            category: TriageCategory::Bug,
            note: "reported".into(),
            author: "triager".into(),
        }],
    )
    .unwrap();
    cfg.annotations = Some(labels);
    let (report, _) = pipeline::transplant(&cfg).unwrap();
    assert_eq!(report.annotation_distribution[&TriageCategory::Bug], 1);
    assert_eq!(report.annotation_distribution.values().sum::<usize>(), 1);
    assert_eq!(report.annotations.len(), 1);
}
