use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

/// The line prefix printed by the harness prelude when an assertion fails.
pub const ASSERT_SENTINEL: &str = "ENTENTE_ASSERT_FAIL:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Pass,
    AssertFail,
    RuntimeError,
    SyntaxError,
    Crash,
    Timeout,
    Oom,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Pass,
        Category::AssertFail,
        Category::RuntimeError,
        Category::SyntaxError,
        Category::Crash,
        Category::Timeout,
        Category::Oom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Pass => "PASS",
            Category::AssertFail => "ASSERT_FAIL",
            Category::RuntimeError => "RUNTIME_ERROR",
            Category::SyntaxError => "SYNTAX_ERROR",
            Category::Crash => "CRASH",
            Category::Timeout => "TIMEOUT",
            Category::Oom => "OOM",
        }
    }

    pub fn is_pass(self) -> bool {
        self == Category::Pass
    }

    /// Categories that carry an exception kind.
    pub fn has_exception_kind(self) -> bool {
        matches!(self, Category::RuntimeError | Category::SyntaxError)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown outcome category {s:?}"))
    }
}

/// What the process did, before any interpretation.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RawExecution {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: Option<i32>,
    pub termination_signal: Option<i32>,
    #[serde(with = "duration_millis")]
    pub wall_time: Duration,
    pub timed_out: bool,
    pub oom: bool,
}

/// Classified result of running one test on one engine.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Outcome {
    pub engine: String,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exception_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Outcome {
    pub fn pass(engine: impl Into<String>) -> Self {
        Outcome { engine: engine.into(), category: Category::Pass, exception_kind: None, message: None }
    }

    pub fn new(engine: impl Into<String>, category: Category) -> Self {
        let exception_kind = category.has_exception_kind().then(|| "Unknown".to_string());
        Outcome { engine: engine.into(), category, exception_kind, message: None }
    }

    pub fn error(
        engine: impl Into<String>,
        category: Category,
        kind: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        debug_assert!(category.has_exception_kind());
        Outcome { engine: engine.into(), category, exception_kind: Some(kind.into()), message: Some(message.into()) }
    }

    pub fn with_message(mut self, message: impl Into<String>) -> Self {
        self.message = Some(message.into());
        self
    }

    pub fn is_pass(&self) -> bool {
        self.category.is_pass()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.category)?;
        match (&self.exception_kind, &self.message) {
            (Some(k), Some(m)) => write!(f, "({k}: {m})"),
            (Some(k), None) => write!(f, "({k})"),
            (None, Some(m)) => write!(f, "({m})"),
            (None, None) => Ok(()),
        }
    }
}

mod duration_millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}
