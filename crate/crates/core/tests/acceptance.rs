//! One line per acceptance criterion: `PASS`, `FAIL` or `SKIP`, the criterion
//! name, then what was measured. Exits nonzero if a binding criterion fails.

mod common;

use common::*;
use entente::cluster::{bucket, Cluster, Signature};
use entente::conformance::run_conformance;
use entente::engine::{self, Category, Outcome, Registry};
use entente::fuzz::{generate_valid, is_valid, Mutator, ValidityChecker};
use entente::miner::{load_dump, write_tests, Classifier, Label};
use entente::mock;
use entente::oracle::{compare, Priority, Warning};
use entente::pipeline::{self, RunConfig};
use entente::report::Report;
use entente::runner::{Executor, Job};
use entente::triage::{reduce, schedule, QueueItem};
use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

type Verdict = Result<String, String>;

enum Kind {
    Binding,
    /// Reported, never fails the run.
    Optional,
}

type Check = (&'static str, Kind, fn() -> Option<Verdict>);

fn main() {
    let checks: [Check; 10] = [
        ("oracle-exhaustiveness", Kind::Binding, || Some(oracle_exhaustive())),
        ("dataview-lo-warning-signature", Kind::Binding, || Some(dataview_signature())),
        ("filter-nesting", Kind::Binding, || Some(filter_nesting())),
        ("fuzzer-contract", Kind::Binding, || Some(fuzzer_contract())),
        ("reducer-minimality", Kind::Binding, || Some(reducer_minimality())),
        ("clustering-partition", Kind::Binding, || Some(clustering())),
        ("round-robin-scheduler", Kind::Binding, || Some(scheduler())),
        ("miner-extraction", Kind::Binding, || Some(miner())),
        ("conformance-arithmetic", Kind::Binding, || Some(conformance())),
        ("real-engine-smoke", Kind::Optional, real_engine_smoke),
    ];
    let mut failed = 0;
    for (name, kind, check) in checks {
        let started = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Some(Err(format!("panicked: {}", panic_text(&e)))));
        let took = format!("{:.2}s", started.elapsed().as_secs_f64());
        match (verdict, kind) {
            (None, _) => println!("SKIP {name} ({took}): fewer than two real engines installed"),
            (Some(Ok(detail)), _) => println!("PASS {name} ({took}): {detail}"),
            (Some(Err(detail)), Kind::Optional) => {
                println!("FAIL {name} ({took}, non-binding): {detail}")
            }
            (Some(Err(detail)), Kind::Binding) => {
                failed += 1;
                println!("FAIL {name} ({took}): {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn panic_text(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_exhaustive() -> Verdict {
    let started = Instant::now();
    let mut tuples = 0usize;
    let mut mismatches = Vec::new();
    for n in [3u32, 4] {
        let names: Vec<String> = (1..=n).map(|i| format!("E{i}")).collect();
        for code in 0..7usize.pow(n) {
            let mut rest = code;
            let cats: Vec<Category> = (0..n)
                .map(|_| {
                    let c = Category::ALL[rest % 7];
                    rest /= 7;
                    c
                })
                .collect();
            let outcomes: BTreeMap<String, Outcome> =
                names.iter().zip(&cats).map(|(e, c)| (e.clone(), Outcome::new(e.as_str(), *c))).collect();
            let expected = cats.contains(&Category::Pass) && cats.iter().any(|c| *c != Category::Pass);
            let got = compare("t", &outcomes);
            let hi_expected = cats.iter().filter(|c| **c != Category::Pass).all(|c| *c == Category::AssertFail);
            let priority_ok = got.as_ref().is_none_or(|w| (w.priority == Priority::Hi) == hi_expected);
            if got.is_some() != expected || !priority_ok {
                mismatches.push(cats);
            }
            tuples += 1;
        }
    }
    let took = started.elapsed();
    ensure(mismatches.is_empty(), || format!("{} mismatches, first {:?}", mismatches.len(), mismatches[0]))?;
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("{tuples} tuples (7^3 + 7^4), 0 mismatches in {took:?}"))
}

fn dataview_signature() -> Verdict {
    let seed = std::fs::read_to_string(fixtures().join("corpus/suites/shared/dataview-getint8.js")).unwrap();
    let mutant = seed.replace("getInt8(0)", "getInt8(-1770523502845470856)");
    ensure(mutant != seed, || "seed does not call getInt8(0)".into())?;
    let prelude = std::fs::read_to_string(fixtures().join("corpus/prelude.js")).unwrap();
    let registry = Registry::from_engines(ENGINES.iter().map(|n| mock::engine_spec(n, MOCK)).collect()).unwrap();
    let exec = Executor::new(&registry, 0);

    let seed_row = exec.run_everywhere(&[Job { id: "seed", source: &seed, prelude: Some(&prelude) }]);
    ensure(seed_row["seed"].values().all(Outcome::is_pass), || format!("seed does not pass everywhere: {seed_row:?}"))?;

    let table = exec.run_everywhere(&[Job { id: "dataview", source: &mutant, prelude: Some(&prelude) }]);
    let warnings: Vec<Warning> = table.iter().filter_map(|(id, row)| compare(id, row)).collect();
    ensure(warnings.len() == 1, || format!("{} warnings", warnings.len()))?;
    let w = &warnings[0];
    ensure(w.priority == Priority::Lo, || format!("priority {}", w.priority))?;
    ensure(w.group == "chakra", || format!("group {}", w.group))?;
    let clusters = bucket(&warnings).unwrap();
    ensure(clusters.len() == 1, || format!("{} clusters", clusters.len()))?;

    let full = clusters[0].signature.to_string();
    let expected_full = r#"[(chakra, "-", "-"), (jsc, "RangeError", "byteOffset cannot be negative"), (sm, "RangeError", "invalid or out-of-range index"), (v8, "RangeError", "Offset is outside the bounds of the DataView")]"#;
    ensure(full == expected_full, || format!("signature {full}"))?;

    // Failing engines only, by product name.
    let product = BTreeMap::from([("jsc", "JavaScriptCore"), ("sm", "SpiderMonkey"), ("v8", "V8")]);
    let failing = Signature(
        clusters[0]
            .signature
            .0
            .iter()
            .filter(|t| t.kind != "-")
            .map(|t| {
                let mut t = t.clone();
                t.engine = product[t.engine.as_str()].to_string();
                t
            })
            .collect(),
    )
    .to_string();
    let by_product = r#"[(JavaScriptCore, "RangeError", "byteOffset cannot be negative"), (SpiderMonkey, "RangeError", "invalid or out-of-range index"), (V8, "RangeError", "Offset is outside the bounds of the DataView")]"#;
    ensure(failing == by_product, || format!("failing triples {failing}"))?;
    Ok(format!("1 LO warning, group chakra, signature {full}"))
}

fn ids(c: &entente::corpus::Corpus) -> BTreeSet<&str> {
    c.ids().collect()
}

fn filter_nesting() -> Verdict {
    let d = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(mock_registry(d.path(), &ENGINES), d.path().join("out")).with_manifest(corpus_manifest());
    let (report, s) = pipeline::filter(&cfg).map_err(|e| e.to_string())?;
    let expected = expected_drops();
    for r in &report.filter_reports {
        let dropped: Vec<&str> = r.discarded.iter().map(|x| x.id.as_str()).collect();
        ensure(dropped == expected[r.stage.as_str()], || format!("{} dropped {dropped:?}", r.stage.as_str()))?;
    }
    let (ing, pip, tia, nfa) = (ids(&s.ingested), ids(&s.pass_in_parent), ids(&s.type_in_all), ids(&s.no_fail_in_all));
    ensure(nfa.is_subset(&tia) && tia.is_subset(&pip) && pip.is_subset(&ing), || "stages are not nested".into())?;
    let counts = [ing.len(), pip.len(), tia.len(), nfa.len()];
    let injected: Vec<usize> =
        ["pass-in-parent", "type-in-all", "no-fail-in-all"].iter().map(|k| expected[*k].len()).collect();
    let want = [50, 50 - injected[0], 50 - injected[0] - injected[1], 50 - injected.iter().sum::<usize>()];
    ensure(counts == want, || format!("stage sizes {counts:?}, expected {want:?}"))?;
    Ok(format!(
        "ingest {} ⊇ pass-in-parent {} ⊇ type-in-all {} ⊇ no-fail-in-all {}",
        counts[0], counts[1], counts[2], counts[3]
    ))
}

fn fixture_seeds() -> Vec<entente::corpus::TestCase> {
    let d = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(mock_registry(d.path(), &ENGINES), d.path().join("out")).with_manifest(corpus_manifest());
    pipeline::filter(&cfg).unwrap().1.no_fail_in_all.tests
}

fn fuzzer_contract() -> Verdict {
    let seeds = fixture_seeds();
    ensure(seeds.len() >= 20, || format!("only {} seeds", seeds.len()))?;
    let started = Instant::now();
    let checker = ValidityChecker::Bundled;
    let mut total = 0;
    for seed in &seeds {
        let a = generate_valid(seed, 20, 42, &Mutator::Bundled, &checker).map_err(|e| e.to_string())?;
        ensure(a.mutants.len() == 20, || format!("{}: {} mutants", seed.id, a.mutants.len()))?;
        for m in &a.mutants {
            ensure(is_valid(&m.source, &checker).unwrap(), || format!("{} is not valid", m.reference()))?;
        }
        let b = generate_valid(seed, 20, 42, &Mutator::Bundled, &checker).map_err(|e| e.to_string())?;
        let same = a.mutants.iter().zip(&b.mutants).all(|(x, y)| x.source.as_bytes() == y.source.as_bytes());
        ensure(same && b.mutants.len() == 20, || format!("{}: rerun differs", seed.id))?;
        total += a.mutants.len();
    }
    let took = started.elapsed();
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!(
        "{} seeds x 20 mutants = {total}, all valid, reruns byte-identical, {took:?} for both passes",
        seeds.len()
    ))
}

/// Smallest subset of `lines` (by count) that satisfies `pred`, by enumeration.
fn brute_force_minimum(lines: &[String], pred: &dyn Fn(&str) -> bool) -> usize {
    let n = lines.len();
    (0u32..1 << n)
        .filter(|mask| {
            let text: Vec<&str> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| lines[i].as_str()).collect();
            pred(&(text.join("\n") + "\n"))
        })
        .map(u32::count_ones)
        .min()
        .expect("the full input satisfies the predicate") as usize
}

fn reducer_minimality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut sizes = Vec::new();
    for case in 0..25 {
        let n = rng.random_range(1..=12usize);
        let lines: Vec<String> = (0..n).map(|i| format!("var v{i} = f({});", rng.random_range(0..100))).collect();
        let k = rng.random_range(1..=n.min(4));
        let required: BTreeSet<String> = lines.sample(&mut rng, k).cloned().collect();
        let pred = |text: &str| {
            let present: BTreeSet<&str> = text.lines().map(str::trim).collect();
            required.iter().all(|r| present.contains(r.as_str()))
        };
        let source = lines.join("\n") + "\n";
        let minimum = brute_force_minimum(&lines, &pred);
        let out = reduce(&source, pred).map_err(|e| format!("case {case}: {e}"))?;
        let kept: Vec<&str> = out.source.lines().collect();
        ensure(pred(&out.source), || format!("case {case}: output does not satisfy the predicate"))?;
        ensure(kept.len() == minimum, || format!("case {case}: {} lines, minimum {minimum}", kept.len()))?;
        for i in 0..kept.len() {
            let probe: Vec<&str> = kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| *l).collect();
            ensure(!pred(&(probe.join("\n") + "\n")), || format!("case {case}: line {i} is removable"))?;
        }
        sizes.push((n, minimum));
    }
    Ok(format!("25/25 cases minimal and 1-minimal; (input lines, minimum) = {sizes:?}"))
}

const TEMPLATES: [(&str, &str); 6] = [
    ("TypeError", "Cannot read property {code} of undefined"),
    ("TypeError", "{code} is not a function"),
    ("RangeError", "Invalid array length {num}"),
    ("RangeError", "index {num} out of range at {loc}"),
    ("SyntaxError", "Unexpected token {code} at {loc}"),
    ("ReferenceError", "{code} is not defined"),
];

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    let quote = *['\'', '"', '`'].choose(rng).unwrap();
    let ident: String = (0..rng.random_range(1..8)).map(|_| *b"abcxyz_".choose(rng).unwrap() as char).collect();
    let code = format!("{quote}{ident}{quote}");
    let num =
        if rng.random_bool(0.5) { rng.random_range(0..10u64).to_string() } else { rng.random::<u32>().to_string() };
    let loc =
        format!("tests/case{}.js:{}:{}", rng.random_range(0..50), rng.random_range(1..500), rng.random_range(1..80));
    template.replace("{code}", &code).replace("{num}", &num).replace("{loc}", &loc)
}

/// Ground truth for a random outcome: (category, kind, template).
type Shape = (Category, Option<&'static str>, Option<usize>);

fn random_outcome(engine: &str, rng: &mut ChaCha8Rng) -> (Outcome, Shape) {
    match rng.random_range(0..10) {
        0..=3 => (Outcome::pass(engine), (Category::Pass, None, None)),
        4 => (Outcome::new(engine, Category::Crash), (Category::Crash, None, None)),
        5 => (Outcome::new(engine, Category::Timeout), (Category::Timeout, None, None)),
        _ => {
            let t = rng.random_range(0..TEMPLATES.len());
            let (kind, template) = TEMPLATES[t];
            let category = if kind == "SyntaxError" { Category::SyntaxError } else { Category::RuntimeError };
            (Outcome::error(engine, category, kind, fill(template, rng)), (category, Some(kind), Some(t)))
        }
    }
}

fn clustering() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let engines = ["e1", "e2", "e3", "e4"];
    let mut warnings = Vec::new();
    let mut truth: BTreeMap<String, Vec<Shape>> = BTreeMap::new();
    while warnings.len() < 1000 {
        let (outcomes, shapes): (Vec<_>, Vec<_>) = engines.iter().map(|e| random_outcome(e, &mut rng)).unzip();
        let map: BTreeMap<String, Outcome> = outcomes.into_iter().map(|o| (o.engine.clone(), o)).collect();
        let id = format!("w{:04}", warnings.len());
        if let Some(w) = compare(&id, &map).filter(|w| w.priority == Priority::Lo) {
            truth.insert(id, shapes);
            warnings.push(w);
        }
    }
    let clusters = bucket(&warnings).map_err(|e| e.to_string())?;
    let total: usize = clusters.iter().map(|c| c.size).sum();
    ensure(total == 1000, || format!("cluster sizes sum to {total}"))?;
    let mut seen = BTreeSet::new();
    let mut keys = BTreeSet::new();
    for c in &clusters {
        ensure(c.members.len() == c.size, || "size disagrees with members".into())?;
        let shapes: BTreeSet<&Vec<Shape>> = c.members.iter().map(|m| &truth[m]).collect();
        ensure(shapes.len() == 1, || format!("cluster {} mixes {} distinct shapes", c.representative, shapes.len()))?;
        let kinds: BTreeSet<Vec<Option<&str>>> =
            c.members.iter().map(|m| truth[m].iter().map(|s| s.1).collect()).collect();
        ensure(kinds.len() == 1, || format!("cluster {} merges exception kinds", c.representative))?;
        keys.insert(shapes.into_iter().next().unwrap().clone());
        for m in &c.members {
            ensure(seen.insert(m.clone()), || format!("{m} is in two clusters"))?;
        }
    }
    let distinct: BTreeSet<&Vec<Shape>> = truth.values().collect();
    ensure(keys.len() == clusters.len() && clusters.len() == distinct.len(), || {
        format!("{} clusters for {} distinct ground-truth shapes", clusters.len(), distinct.len())
    })?;
    Ok(format!("1000 LO warnings -> {} clusters, one per ground-truth shape, partition holds", clusters.len()))
}

/// "k per group, cyclic over groups in name order, HI tier before LO tier."
fn simulate(hi: &[QueueItem], lo: &[QueueItem], k: usize) -> Vec<String> {
    let mut out = Vec::new();
    for tier in [hi, lo] {
        let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for i in tier {
            groups.entry(&i.group).or_default().push(&i.id);
        }
        for v in groups.values_mut() {
            v.sort();
            v.reverse();
        }
        while groups.values().any(|v| !v.is_empty()) {
            for v in groups.values_mut() {
                for _ in 0..k {
                    if let Some(id) = v.pop() {
                        out.push(id.to_string());
                    }
                }
            }
        }
    }
    out
}

fn scheduler() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..100 {
        let k = rng.random_range(1..=5);
        let n_groups = rng.random_range(1..=6);
        let mut hi_items = Vec::new();
        let mut lo_items = Vec::new();
        let mut hi = Vec::new();
        let mut lo = Vec::new();
        for g in 0..n_groups {
            let group = if g == 0 { "+1".to_string() } else { format!("E{g}") };
            for i in 0..rng.random_range(0..=12) {
                let id = format!("hi-{group}-{i:02}-{}", rng.random_range(0..1000));
                hi.push(Warning {
                    mutant_ref: id.clone(),
                    outcomes: BTreeMap::new(),
                    priority: Priority::Hi,
                    group: group.clone(),
                    created_at: 0,
                });
                hi_items.push(QueueItem { id, priority: Priority::Hi, group: group.clone(), size: 1 });
            }
            for i in 0..rng.random_range(0..=12) {
                let id = format!("lo-{group}-{i:02}");
                let size = rng.random_range(1..5);
                lo.push(Cluster {
                    signature: Signature(Vec::new()),
                    size,
                    representative: id.clone(),
                    group: group.clone(),
                    members: vec![id.clone()],
                });
                lo_items.push(QueueItem { id, priority: Priority::Lo, group: group.clone(), size });
            }
        }
        let got: Vec<String> = schedule(&hi, &lo, k).into_iter().map(|q| q.id).collect();
        let want = simulate(&hi_items, &lo_items, k);
        let mut a = got.clone();
        let mut b: Vec<String> = hi_items.iter().chain(&lo_items).map(|q| q.id.clone()).collect();
        a.sort();
        b.sort();
        ensure(a == b, || format!("trial {trial}: not a permutation of the input"))?;
        ensure(got == want, || format!("trial {trial} (k={k}): {got:?} != {want:?}"))?;
    }
    Ok("100/100 trials match the reference simulation and are permutations".into())
}

fn files_under(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for e in std::fs::read_dir(&p).unwrap() {
            let e = e.unwrap().path();
            if e.is_dir() {
                stack.push(e);
            } else {
                let rel = e.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&e).unwrap());
            }
        }
    }
    out
}

#[derive(serde::Deserialize)]
struct Labeled {
    text: String,
    label: Label,
}

fn miner() -> Verdict {
    let root = fixtures().join("issues");
    let mut issues = load_dump(&root.join("dumps"), "issues").map_err(|e| e.to_string())?;
    issues.extend(load_dump(&root.join("dumps"), "bugs").map_err(|e| e.to_string())?);
    ensure(issues.len() == 20, || format!("{} issues", issues.len()))?;
    let out = tempfile::tempdir().unwrap();
    let classifier = Classifier::default();
    let summary =
        write_tests(out.path(), &issues, &classifier, &ValidityChecker::Bundled).map_err(|e| e.to_string())?;
    let got = files_under(out.path());
    let want = files_under(&root.join("expected"));
    let missing: Vec<&String> = want.keys().filter(|k| got.get(*k) != want.get(*k)).collect();
    let extra: Vec<&String> = got.keys().filter(|k| !want.contains_key(*k)).collect();
    ensure(missing.is_empty() && extra.is_empty(), || {
        format!("missing or different {missing:?}, unexpected {extra:?}")
    })?;

    let labeled: Vec<Labeled> = std::fs::read_to_string(root.join("paragraphs.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let correct = labeled.iter().filter(|p| classifier.classify(&p.text).unwrap().label == p.label).count();
    let accuracy = correct as f64 / labeled.len() as f64;
    ensure(accuracy >= 0.9, || format!("classifier accuracy {correct}/{} = {accuracy:.3}", labeled.len()))?;
    Ok(format!(
        "20 issues -> {} attachments + {} embedded blocks, all as expected; classifier {correct}/{} = {accuracy:.3}",
        summary.attachments,
        summary.embedded,
        labeled.len()
    ))
}

fn conformance() -> Verdict {
    let spec = mock::engine_spec("conf", MOCK);
    let r = run_conformance(&spec, &fixtures().join("test262"), 3).map_err(|e| e.to_string())?;
    let per_run: Vec<(usize, usize)> = r.runs.iter().map(|x| (x.passed, x.total)).collect();
    ensure(per_run == [(3, 4); 3], || format!("runs {per_run:?}"))?;
    ensure(r.mean == Some(0.75) && r.variance == Some(0.0), || format!("mean {:?} variance {:?}", r.mean, r.variance))?;
    Ok(format!("3 repeats of 3/4, mean {:.3} ± {}", r.mean.unwrap(), r.variance.unwrap()))
}

/// Shell names probed on PATH.
const REAL_ENGINES: [&str; 7] = ["node", "d8", "jsc", "js", "ch", "qjs", "hermes"];

fn real_engine_smoke() -> Option<Verdict> {
    let found: Vec<(&str, std::path::PathBuf)> =
        REAL_ENGINES.iter().filter_map(|n| which::which(n).ok().map(|p| (*n, p))).collect();
    if found.len() < 2 {
        return None;
    }
    Some((|| {
        let d = tempfile::tempdir().unwrap();
        let mut reg = String::new();
        for (name, path) in &found {
            reg.push_str(&format!(
                "[[engine]]\nname = {name:?}\nbinary = {:?}\ntimeout_secs = 30\n\n",
                path.display().to_string()
            ));
        }
        std::fs::write(d.path().join("registry.toml"), &reg).unwrap();
        let seeds = d.path().join("seeds");
        std::fs::create_dir_all(&seeds).unwrap();
        let shared = fixtures().join("corpus/suites/shared");
        let mut names: Vec<_> = std::fs::read_dir(&shared).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        for p in names.iter().take(10) {
            std::fs::copy(p, seeds.join(p.file_name().unwrap())).unwrap();
        }
        let prelude = fixtures().join("corpus/prelude.js");
        std::fs::write(
            d.path().join("manifest.toml"),
            format!(
                "prelude = {:?}\n[[suite]]\nname = \"seeds\"\ndir = \"seeds\"\nneeds_prelude = true\n",
                prelude.display().to_string()
            ),
        )
        .unwrap();
        let mut cfg = RunConfig::new(d.path().join("registry.toml"), d.path().join("out"))
            .with_manifest(d.path().join("manifest.toml"));
        cfg.mutants_per_seed = 2;
        cfg.rng_seed = 42;
        let (report, _) = pipeline::fuzzdiff(&cfg).map_err(|e| e.to_string())?;
        let back = Report::from_json(&report.to_json()).map_err(|e| e.to_string())?;
        ensure(back == report, || "report does not round-trip".into())?;

        let registry = engine::load_registry(&d.path().join("registry.toml")).map_err(|e| e.to_string())?;
        let dataview = "var buffer = new ArrayBuffer(64);\nvar view = new DataView(buffer);\nview.setInt8(0,0x80);\n\
                    assert(view.getInt8(-1770523502845470856) === -0x80);\n";
        let prelude_text = std::fs::read_to_string(&prelude).unwrap();
        let mut dataview_results = Vec::new();
        for spec in &registry.engines {
            let o = engine::run(spec, dataview, Some(&prelude_text)).map_err(|e| e.to_string())?;
            ensure(!matches!(o.category, Category::Timeout | Category::Crash), || format!("{}: {o}", spec.name))?;
            dataview_results.push(format!("{}={o}", spec.name));
        }
        let ratios: Vec<String> =
            report.filter_reports.iter().map(|r| format!("{} {}/{}", r.stage.as_str(), r.kept, r.input)).collect();
        Ok(format!(
            "engines {:?}; {} warnings; filters {ratios:?}; dataview {dataview_results:?}",
            found.iter().map(|f| f.0).collect::<Vec<_>>(),
            report.warnings.len()
        ))
    })())
}
