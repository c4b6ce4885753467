//! A scripted stand-in for a JavaScript shell.
//!
//! `entente-mock [--name NAME] [--parse-only] FILE` reads `FILE` and behaves
//! as the file's directive comments say:
//!
//! ```text
//! //!mock <engine|*> <action> [if <regex>] [unless <regex>]
//! ```
//!
//! The first directive whose engine matches `NAME` (or `*`) and whose
//! condition holds on the non-directive text decides the behavior. Actions:
//!
//! | action                 | behavior                                        |
//! |------------------------|-------------------------------------------------|
//! | `pass`                 | exit 0                                          |
//! | `print:TEXT`           | print TEXT, exit 0                              |
//! | `assert-fail[:MSG]`    | print the assertion sentinel, exit 1            |
//! | `throw:KIND[:MSG]`     | `KIND: MSG` on stderr, exit 3                   |
//! | `syntax-error[:MSG]`   | `SyntaxError: MSG` on stderr, exit 3            |
//! | `crash[:SIGNAL]`       | raise SIGNAL (default 6)                        |
//! | `hang`                 | sleep forever                                   |
//! | `oom`                  | print an out-of-memory banner, exit 134         |
//! | `alloc:MIB`            | touch MIB mebibytes, hold them for 5 s, exit 0  |
//! | `exit:CODE`            | exit CODE silently                              |
//! | `stderr:TEXT`          | TEXT on stderr, exit 1                          |
//! | `sleep:MS`             | sleep MS milliseconds, exit 0                   |
//!
//! Without a matching directive the file is screened with the bundled
//! syntax checker: invalid files report `SyntaxError`, valid ones pass.
//! `--parse-only` skips directives and only runs the syntax screen.

use crate::engine::{EngineSpec, ASSERT_SENTINEL};
use crate::js::check_syntax;
use regex::Regex;
use std::io::Write;
use std::time::Duration;

pub const DIRECTIVE: &str = "//!mock";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Pass,
    Print(String),
    AssertFail(String),
    Throw { kind: String, message: String },
    SyntaxError(String),
    Crash(i32),
    Hang,
    Oom,
    Alloc(u64),
    Exit(i32),
    Stderr(String),
    Sleep(u64),
}

impl Action {
    pub fn parse(spec: &str) -> Option<Action> {
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (spec, None),
        };
        let text = || arg.unwrap_or("").to_string();
        Some(match head.trim() {
            "pass" => Action::Pass,
            "print" => Action::Print(text()),
            "assert-fail" => Action::AssertFail(arg.map_or_else(|| "assertion failed".into(), str::to_string)),
            "throw" => {
                let arg = arg?;
                let (kind, message) = arg.split_once(':').unwrap_or((arg, ""));
                Action::Throw { kind: kind.to_string(), message: message.to_string() }
            }
            "syntax-error" => Action::SyntaxError(arg.map_or_else(|| "unexpected token".into(), str::to_string)),
            "crash" => Action::Crash(arg.map_or(Some(6), |a| a.trim().parse().ok())?),
            "hang" => Action::Hang,
            "oom" => Action::Oom,
            "alloc" => Action::Alloc(arg?.trim().parse().ok()?),
            "exit" => Action::Exit(arg?.trim().parse().ok()?),
            "stderr" => Action::Stderr(text()),
            "sleep" => Action::Sleep(arg?.trim().parse().ok()?),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Directive {
    pub engine: String,
    pub action: Action,
    pub when: Option<Regex>,
    pub unless: Option<Regex>,
}

fn is_directive_line(line: &str) -> bool {
    line.trim_start().starts_with(DIRECTIVE)
}

/// An [`EngineSpec`] that runs the mock binary as engine `name`.
pub fn engine_spec(name: &str, binary: impl Into<std::path::PathBuf>) -> EngineSpec {
    let mut spec = EngineSpec::new(name, binary);
    spec.extra_flags = vec!["--name".into(), name.into()];
    spec.parse_only_flags = Some(vec!["--parse-only".into()]);
    spec.timeout = Duration::from_secs(10);
    spec
}

/// Registry TOML text for mock engines sharing one binary.
pub fn registry_toml(binary: &std::path::Path, names: &[&str]) -> String {
    let mut out = String::new();
    for n in names {
        out.push_str(&format!(
            "[[engine]]\nname = \"{n}\"\nbinary = {:?}\nflags = [\"--name\", \"{n}\"]\nparse_only_flags = [\"--parse-only\"]\ntimeout_secs = 10\n\n",
            binary.display().to_string()
        ));
    }
    out
}

/// Parses every well-formed directive line in order. Malformed lines are skipped.
pub fn directives(source: &str) -> Vec<Directive> {
    source
        .lines()
        .filter_map(|line| {
            let rest = line.trim_start().strip_prefix(DIRECTIVE)?;
            if !rest.starts_with(' ') {
                return None;
            }
            let rest = rest.trim();
            let (engine, mut rest) = rest.split_once(char::is_whitespace)?;
            let mut unless = None;
            if let Some((head, re)) = rest.rsplit_once(" unless ") {
                unless = Some(Regex::new(re.trim()).ok()?);
                rest = head;
            }
            let mut when = None;
            if let Some((head, re)) = rest.rsplit_once(" if ") {
                when = Some(Regex::new(re.trim()).ok()?);
                rest = head;
            }
            Some(Directive { engine: engine.to_string(), action: Action::parse(rest.trim())?, when, unless })
        })
        .collect()
}

/// Source text with directive lines removed; conditions are tested on this.
pub fn strip_directives(source: &str) -> String {
    source.lines().filter(|l| !is_directive_line(l)).collect::<Vec<_>>().join("\n")
}

/// Decides what the engine `name` does with `source`.
pub fn decide(name: &str, source: &str, parse_only: bool) -> Action {
    if let Err(issue) = check_syntax(source) {
        return Action::SyntaxError(issue.to_string());
    }
    if parse_only {
        return Action::Pass;
    }
    let body = strip_directives(source);
    directives(source)
        .into_iter()
        .find(|d| {
            (d.engine == "*" || d.engine == name)
                && d.when.as_ref().is_none_or(|re| re.is_match(&body))
                && !d.unless.as_ref().is_some_and(|re| re.is_match(&body))
        })
        .map_or(Action::Pass, |d| d.action)
}

/// Carries out an action in the current process. Returns the exit code for
/// actions that exit normally.
pub fn perform(action: &Action) -> i32 {
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    match action {
        Action::Pass => 0,
        Action::Print(t) => {
            let _ = writeln!(out, "{t}");
            0
        }
        Action::AssertFail(m) => {
            let _ = writeln!(out, "{ASSERT_SENTINEL} {m}");
            let _ = writeln!(err, "Error: assertion failed");
            1
        }
        Action::Throw { kind, message } => {
            let _ = writeln!(err, "{kind}: {message}");
            3
        }
        Action::SyntaxError(m) => {
            let _ = writeln!(err, "SyntaxError: {m}");
            3
        }
        Action::Crash(sig) => {
            let _ = out.flush();
            let _ = err.flush();
            // SAFETY: disabling core dumps and raising a signal on ourselves.
            unsafe {
                let none = libc::rlimit { rlim_cur: 0, rlim_max: 0 };
                libc::setrlimit(libc::RLIMIT_CORE, &none);
                libc::signal(*sig, libc::SIG_DFL);
                libc::raise(*sig);
            }
            128 + sig
        }
        Action::Hang => loop {
            std::thread::sleep(Duration::from_secs(3600));
        },
        Action::Oom => {
            let _ = writeln!(err, "FATAL ERROR: out of memory");
            134
        }
        Action::Alloc(mib) => {
            let mut chunks = Vec::new();
            for _ in 0..*mib {
                chunks.push(vec![1u8; 1 << 20]);
            }
            std::thread::sleep(Duration::from_secs(5));
            std::hint::black_box(&chunks);
            0
        }
        Action::Exit(code) => *code,
        Action::Stderr(t) => {
            let _ = writeln!(err, "{t}");
            1
        }
        Action::Sleep(ms) => {
            std::thread::sleep(Duration::from_millis(*ms));
            0
        }
    }
}

/// Entry point shared by the `entente-mock` binaries.
pub fn main_from_args(args: impl IntoIterator<Item = String>) -> i32 {
    let mut name = String::from("mock");
    let mut parse_only = false;
    let mut file = None;
    let mut args = args.into_iter();
    while let Some(a) = args.next() {
        match a.as_str() {
            "--name" => name = args.next().unwrap_or_default(),
            "--parse-only" => parse_only = true,
            s if s.starts_with("--") => {}
            _ => file = Some(a),
        }
    }
    let Some(file) = file else {
        eprintln!("usage: entente-mock [--name NAME] [--parse-only] FILE");
        return 2;
    };
    let source = match std::fs::read_to_string(&file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("Error: cannot read {file}: {e}");
            return 2;
        }
    };
    perform(&decide(&name, &source, parse_only))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directive_parsing() {
        let src = "//!mock v8 throw:RangeError:Offset is outside the bounds of the DataView if getInt8\\(-\\d+\\)\n\
                   //!mock * assert-fail:nope unless ok\n\
                   //!mockery not a directive\n\
                   //!mock jsc bogus-action\n";
        let d = directives(src);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].engine, "v8");
        assert_eq!(
            d[0].action,
            Action::Throw { kind: "RangeError".into(), message: "Offset is outside the bounds of the DataView".into() }
        );
        assert!(d[0].when.is_some());
        assert_eq!(d[1].action, Action::AssertFail("nope".into()));
        assert!(d[1].unless.is_some());
    }

    #[test]
    fn decision_order_and_conditions() {
        let src = "//!mock a throw:TypeError:x if boom\n//!mock * assert-fail\nvar boom = 1;\n";
        assert!(matches!(decide("a", src, false), Action::Throw { .. }));
        assert_eq!(decide("b", src, false), Action::AssertFail("assertion failed".into()));
        let quiet = "//!mock a throw:TypeError:x if boom\nvar calm = 1;\n";
        assert_eq!(decide("a", quiet, false), Action::Pass);
        // The condition does not see directive lines.
        let selfref = "//!mock a crash if crash\nvar x;\n";
        assert_eq!(decide("a", selfref, false), Action::Pass);
    }

    #[test]
    fn syntax_screen_first() {
        assert!(matches!(decide("a", "//!mock * pass\nvar a = ;", false), Action::SyntaxError(_)));
        assert_eq!(decide("a", "//!mock * crash\nvar a = 1;", true), Action::Pass);
        assert!(matches!(decide("a", "if (x) {", true), Action::SyntaxError(_)));
    }
}
