use super::outcome::{Category, Outcome, RawExecution, ASSERT_SENTINEL};
use super::registry::EngineSpec;

fn sentinel_message(raw: &RawExecution) -> Option<String> {
    raw.stdout.lines().chain(raw.stderr.lines()).find_map(|line| {
        let rest = line.trim_start().strip_prefix(ASSERT_SENTINEL)?;
        Some(rest.trim().to_string())
    })
}

fn last_nonempty_line(text: &str) -> Option<String> {
    text.lines().map(str::trim).rfind(|l| !l.is_empty()).map(str::to_string)
}

/// Interprets a raw execution. Total and deterministic.
///
/// Precedence: timeout, OOM, signal, assertion sentinel, first matching
/// error pattern, unexplained nonzero exit, pass.
pub fn classify(engine: &EngineSpec, raw: &RawExecution) -> Outcome {
    let name = engine.name.as_str();
    if raw.timed_out {
        return Outcome::new(name, Category::Timeout);
    }
    if raw.oom {
        return Outcome::new(name, Category::Oom);
    }
    if let Some(sig) = raw.termination_signal {
        return Outcome::new(name, Category::Crash).with_message(format!("signal {sig}"));
    }
    if let Some(msg) = sentinel_message(raw) {
        return Outcome::new(name, Category::AssertFail).with_message(msg);
    }

    let combined = format!("{}\n{}", raw.stderr, raw.stdout);
    for p in &engine.error_patterns {
        let Some(caps) = p.pattern.captures(&combined) else {
            continue;
        };
        let message = caps
            .name("message")
            .or_else(|| caps.get(1))
            .or_else(|| caps.get(0))
            .map(|m| m.as_str().trim().to_string())
            .filter(|m| !m.is_empty());
        let mut outcome = Outcome::new(name, p.category);
        if p.category.has_exception_kind() {
            let kind = caps
                .name("kind")
                .map(|m| m.as_str().to_string())
                .or_else(|| p.exception_kind.clone())
                .unwrap_or_else(|| "Unknown".to_string());
            outcome.exception_kind = Some(kind);
        }
        outcome.message = message;
        return outcome;
    }

    match raw.exit_code {
        Some(0) => Outcome::pass(name),
        // An ended process reports either an exit code or a signal; treat the
        // degenerate neither case like an unexplained failure.
        _ => {
            let mut o = Outcome::new(name, Category::RuntimeError);
            o.message = last_nonempty_line(&raw.stderr);
            o
        }
    }
}
