use crate::js::tokenize;
use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, Stdio};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("predicate does not hold on the {0} input")]
    PredicateFlaky(&'static str),
    #[error("external reducer {program}: {detail}")]
    External { program: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub source: String,
    pub lines_before: usize,
    pub lines_after: usize,
    /// Distinct candidates the predicate was evaluated on.
    pub predicate_calls: usize,
}

fn chunks<T: Clone>(items: &[T], n: usize) -> Vec<Vec<T>> {
    let len = items.len();
    (0..n).map(|i| items[i * len / n..(i + 1) * len / n].to_vec()).filter(|c| !c.is_empty()).collect()
}

/// Zeller's ddmin: a 1-minimal subsequence of `items` on which `test`
/// holds, assuming it holds on `items`.
pub fn ddmin<T: Clone>(items: Vec<T>, test: &mut impl FnMut(&[T]) -> bool) -> Vec<T> {
    let mut current = items;
    let mut n = 2;
    while current.len() >= 2 {
        let parts = chunks(&current, n);
        if let Some(p) = parts.iter().find(|p| test(p)) {
            current = p.clone();
            n = 2;
            continue;
        }
        let complement = |skip: usize| -> Vec<T> {
            parts.iter().enumerate().filter(|(i, _)| *i != skip).flat_map(|(_, p)| p.iter().cloned()).collect()
        };
        if n > 2 {
            if let Some(c) = (0..parts.len()).map(complement).find(|c| test(c)) {
                current = c;
                n = (n - 1).max(2);
                continue;
            }
        }
        if n >= current.len() {
            break;
        }
        n = (2 * n).min(current.len());
    }
    current
}

/// Splits a line into reducible units with the text that precedes each.
fn line_units(line: &str) -> Vec<(String, String)> {
    match tokenize(line) {
        Ok(tokens) => {
            let mut prev_end = 0;
            tokens
                .iter()
                .map(|t| {
                    let gap = line[prev_end..t.start].to_string();
                    prev_end = t.end;
                    (gap, t.text.to_string())
                })
                .collect()
        }
        Err(_) => {
            let mut units = Vec::new();
            let mut rest = line;
            while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
                let end = rest[start..].find(char::is_whitespace).map_or(rest.len(), |e| start + e);
                units.push((rest[..start].to_string(), rest[start..end].to_string()));
                rest = &rest[end..];
            }
            units
        }
    }
}

/// Rebuilds a line from surviving units. The line's indentation is kept,
/// adjacent survivors keep their original spacing and a gap left by deleted
/// units becomes one space.
fn join_units(all: &[(String, String)], kept: &[usize]) -> String {
    let indent: String =
        all.first().map(|(g, _)| g.chars().take_while(|c| c.is_whitespace()).collect()).unwrap_or_default();
    let mut out = String::new();
    let mut prev: Option<usize> = None;
    for &i in kept {
        let (gap, text) = &all[i];
        match prev {
            None => out.push_str(&indent),
            Some(p) if p + 1 == i => out.push_str(gap),
            Some(_) => out.push(' '),
        }
        out.push_str(text);
        prev = Some(i);
    }
    out
}

struct Memo<'p, P> {
    pred: &'p mut P,
    seen: HashMap<String, bool>,
}

impl<P: FnMut(&str) -> bool> Memo<'_, P> {
    fn check(&mut self, candidate: String) -> bool {
        if let Some(&v) = self.seen.get(&candidate) {
            return v;
        }
        let v = (self.pred)(&candidate);
        self.seen.insert(candidate, v);
        v
    }
}

fn render(lines: &[String], newline_at_end: bool) -> String {
    let mut s = lines.join("\n");
    if newline_at_end && !s.is_empty() {
        s.push('\n');
    }
    s
}

/// Minimizes `source` while `predicate` holds: ddmin over lines, ddmin over
/// the units of each surviving line, then single-line deletions until none
/// succeeds. The result is 1-minimal at line granularity.
pub fn reduce(source: &str, mut predicate: impl FnMut(&str) -> bool) -> Result<Reduction, ReduceError> {
    let lines_before = source.lines().count();
    let mut memo = Memo { pred: &mut predicate, seen: HashMap::new() };
    if !memo.check(source.to_string()) {
        return Err(ReduceError::PredicateFlaky("initial"));
    }
    let nl = source.ends_with('\n');
    let render = |lines: &[String]| render(lines, nl);
    let all: Vec<String> = source.lines().map(str::to_string).collect();
    let mut lines = ddmin(all, &mut |c: &[String]| memo.check(render(c)));

    for li in 0..lines.len() {
        let units = line_units(&lines[li]);
        if units.len() < 2 {
            continue;
        }
        let idx: Vec<usize> = (0..units.len()).collect();
        let kept = ddmin(idx, &mut |k: &[usize]| {
            let mut trial = lines.clone();
            trial[li] = join_units(&units, k);
            memo.check(render(&trial))
        });
        let rebuilt = join_units(&units, &kept);
        let mut trial = lines.clone();
        trial[li] = rebuilt.clone();
        if memo.check(render(&trial)) {
            lines[li] = rebuilt;
        }
    }

    loop {
        let removable = (0..lines.len()).find(|&i| {
            if lines.len() < 2 {
                return false;
            }
            let mut trial = lines.clone();
            trial.remove(i);
            memo.check(render(&trial))
        });
        match removable {
            Some(i) => {
                lines.remove(i);
            }
            None => break,
        }
    }

    let result = render(&lines);
    let calls = memo.seen.len();
    // Re-run rather than trust the memo: a flaky predicate shows up here.
    if !predicate(&result) {
        return Err(ReduceError::PredicateFlaky("reduced"));
    }
    Ok(Reduction { lines_after: lines.len(), source: result, lines_before, predicate_calls: calls + 1 })
}

/// A reducer run as `program [args] <in> <out>` with the interestingness
/// command in `ENTENTE_INTERESTING`; that command exits 0 for a file that
/// still reproduces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalReducer {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl ExternalReducer {
    pub fn reduce(
        &self,
        source: &str,
        interesting: &str,
        mut predicate: impl FnMut(&str) -> bool,
    ) -> Result<Reduction, ReduceError> {
        let fail = |detail: String| ReduceError::External { program: self.program.display().to_string(), detail };
        if !predicate(source) {
            return Err(ReduceError::PredicateFlaky("initial"));
        }
        let dir = tempfile::tempdir().map_err(|e| fail(e.to_string()))?;
        let input = dir.path().join("in.js");
        let output = dir.path().join("out.js");
        std::fs::write(&input, source).map_err(|e| fail(e.to_string()))?;
        let status = Command::new(&self.program)
            .args(&self.args)
            .arg(&input)
            .arg(&output)
            .env("ENTENTE_INTERESTING", interesting)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .status()
            .map_err(|e| fail(e.to_string()))?;
        if !status.success() {
            return Err(fail(format!("exited with {status}")));
        }
        let reduced = std::fs::read_to_string(&output).map_err(|e| fail(format!("no output: {e}")))?;
        if !predicate(&reduced) {
            return Err(ReduceError::PredicateFlaky("reduced"));
        }
        Ok(Reduction {
            lines_before: source.lines().count(),
            lines_after: reduced.lines().count(),
            source: reduced,
            predicate_calls: 2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ddmin_finds_required_pair() {
        let items: Vec<u32> = (1..=10).collect();
        let out = ddmin(items, &mut |c: &[u32]| c.contains(&3) && c.contains(&7));
        assert_eq!(out, [3, 7]);
    }

    #[test]
    fn lines_three_and_seven() {
        let src: String = (1..=10).map(|i| format!("line{i}();\n")).collect();
        let r = reduce(&src, |s| s.contains("line3();") && s.contains("line7();")).unwrap();
        assert_eq!(r.source, "line3();\nline7();\n");
        assert_eq!((r.lines_before, r.lines_after), (10, 2));
    }

    #[test]
    fn minimal_input_unchanged() {
        let r = reduce("boom();\n", |s| s.contains("boom();")).unwrap();
        assert_eq!(r.source, "boom();\n");
        let r = reduce("boom();", |s| s.contains("boom();")).unwrap();
        assert_eq!(r.source, "boom();");
    }

    #[test]
    fn false_on_input() {
        assert_eq!(reduce("a;\n", |_| false), Err(ReduceError::PredicateFlaky("initial")));
    }

    #[test]
    fn tokens_within_a_line() {
        let r = reduce("var keep = 1, drop = 2, other = 3;\n", |s| s.contains("keep")).unwrap();
        assert_eq!(r.source, "keep\n");
    }

    #[test]
    fn flaky_predicate_detected() {
        let mut n = 0;
        let r = reduce("a;\nb;\n", |_| {
            n += 1;
            n < 4
        });
        assert_eq!(r, Err(ReduceError::PredicateFlaky("reduced")));
    }

    #[test]
    fn join_keeps_indentation_and_spacing() {
        let units = line_units("  f(a, b);");
        let all: Vec<usize> = (0..units.len()).collect();
        assert_eq!(join_units(&units, &all), "  f(a, b);");
        assert_eq!(join_units(&units, &[1, 2, 5, 6]), "  (a );");
    }
}
