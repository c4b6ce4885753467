mod common;

use common::*;
use entente::conformance::ConformanceError;
use entente::pipeline::{self, PipelineError, RunConfig};
use std::path::Path;

fn copy_harness(to: &Path) {
    let from = fixtures().join("test262/harness");
    std::fs::create_dir_all(to.join("harness")).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        std::fs::copy(&p, to.join("harness").join(p.file_name().unwrap())).unwrap();
    }
}

fn put(root: &Path, rel: &str, text: &str) {
    let p = root.join("test").join(rel);
    std::fs::create_dir_all(p.parent().unwrap()).unwrap();
    std::fs::write(p, text).unwrap();
}

fn conf_config(root: &Path) -> RunConfig {
    RunConfig::new(mock_registry(root, &["conf"]), root.join("out"))
}

#[test]
fn all_passing_suite_is_stable_at_one() {
    let d = tempfile::tempdir().unwrap();
    let suite = d.path().join("suite");
    copy_harness(&suite);
    put(&suite, "a/plain.js", "/*---\ndescription: plain\n---*/\nassert.sameValue(1 + 1, 2);\n");
    put(&suite, "a/arrays.js", "/*---\nincludes: [compareArray.js]\n---*/\nassert.compareArray([1], [1]);\n");
    put(&suite, "b/negative.js", "/*---\nnegative:\n  phase: parse\n  type: SyntaxError\n---*/\nvar = ;\n");
    put(
        &suite,
        "b/async.js",
        "//!mock * print:Test262:AsyncTestComplete\n/*---\nflags: [async]\n---*/\nPromise.resolve().then($DONE);\n",
    );
    let report = pipeline::conformance(&conf_config(d.path()), &suite, 3).unwrap();
    let r = &report.conformance[0];
    assert_eq!(r.runs.len(), 3);
    assert!(r.runs.iter().all(|run| run.total == 4 && run.passed == 4));
    assert_eq!((r.mean, r.variance, r.min, r.max), (Some(1.0), Some(0.0), Some(1.0), Some(1.0)));
    assert!(r.failing.is_empty() && r.skipped.is_empty());
}

#[test]
fn fixtures_modules_and_missing_includes_are_not_run() {
    let d = tempfile::tempdir().unwrap();
    let suite = d.path().join("suite");
    copy_harness(&suite);
    put(&suite, "plain.js", "/*---\ndescription: plain\n---*/\n1;\n");
    put(&suite, "helper_FIXTURE.js", "export var x = 1;\n");
    put(&suite, "mod.js", "/*---\nflags: [module]\n---*/\nimport { x } from './helper_FIXTURE.js';\n");
    put(&suite, "needs.js", "/*---\nincludes: [absent.js]\n---*/\n1;\n");
    let report = pipeline::conformance(&conf_config(d.path()), &suite, 1).unwrap();
    let r = &report.conformance[0];
    assert_eq!(r.runs[0].total, 1);
    let skipped: Vec<&str> = r.skipped.keys().map(String::as_str).collect();
    assert_eq!(skipped, ["mod.js", "needs.js"]);
    assert!(r.skipped["mod.js"].contains("module"));
    assert!(r.skipped["needs.js"].contains("absent.js"));
}

#[test]
fn unmet_expectations_fail() {
    let d = tempfile::tempdir().unwrap();
    let suite = d.path().join("suite");
    copy_harness(&suite);
    put(&suite, "async-silent.js", "/*---\nflags: [async]\n---*/\nPromise.resolve();\n");
    put(&suite, "negative-parses.js", "/*---\nnegative:\n  phase: parse\n  type: SyntaxError\n---*/\nvar ok = 1;\n");
    put(
        &suite,
        "wrong-kind.js",
        "//!mock * throw:RangeError:no\n/*---\nnegative:\n  phase: runtime\n  type: TypeError\n---*/\n1;\n",
    );
    put(
        &suite,
        "right-kind.js",
        "//!mock * throw:TypeError:yes\n/*---\nnegative:\n  phase: runtime\n  type: TypeError\n---*/\n1;\n",
    );
    let report = pipeline::conformance(&conf_config(d.path()), &suite, 2).unwrap();
    let r = &report.conformance[0];
    assert_eq!(r.failing, ["async-silent.js", "negative-parses.js", "wrong-kind.js"]);
    assert_eq!(r.mean, Some(0.25));
    assert_eq!(r.variance, Some(0.0));
}

#[test]
fn bundled_suite_and_empty_suite() {
    let d = tempfile::tempdir().unwrap();
    let report = pipeline::conformance(&conf_config(d.path()), &fixtures().join("test262"), 1).unwrap();
    let r = &report.conformance[0];
    assert_eq!((r.runs[0].passed, r.runs[0].total), (3, 4));
    assert_eq!(r.failing, ["built-ins/Array/length-truncation.js"]);

    let empty = d.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let err = pipeline::conformance(&conf_config(d.path()), &empty, 1).unwrap_err();
    assert!(matches!(err, PipelineError::Conformance(ConformanceError::EmptySuite(_))), "{err}");
}
