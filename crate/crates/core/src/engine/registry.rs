//! Engine registry: which JavaScript shells exist and how to read their output.
//!
//! The registry is a TOML file with one `[[engine]]` table per engine. Paths
//! are resolved relative to the registry file; bare names are looked up on
//! `PATH`. See `docs/registry.md` for the schema.

use super::outcome::Category;
use super::EngineError;
use regex::{Regex, RegexBuilder};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_MEMORY_LIMIT: u64 = 2 * 1024 * 1024 * 1024;

/// One ordered output pattern: on match, the run is classified as `category`.
///
/// The regex is applied in multi-line mode to stderr followed by stdout. A
/// named group `kind` overrides `exception_kind`; the group `message` (or
/// else group 1, or else the whole match) becomes the message.
#[derive(Debug, Clone)]
pub struct ErrorPattern {
    pub category: Category,
    pub exception_kind: Option<String>,
    pub pattern: Regex,
}

impl ErrorPattern {
    pub fn new(category: Category, exception_kind: Option<&str>, pattern: &str) -> Result<Self, regex::Error> {
        Ok(ErrorPattern {
            category,
            exception_kind: exception_kind.map(str::to_string),
            pattern: RegexBuilder::new(pattern).multi_line(true).build()?,
        })
    }
}

impl PartialEq for ErrorPattern {
    fn eq(&self, other: &Self) -> bool {
        self.category == other.category
            && self.exception_kind == other.exception_kind
            && self.pattern.as_str() == other.pattern.as_str()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineSpec {
    pub name: String,
    pub binary_path: PathBuf,
    pub extra_flags: Vec<String>,
    pub error_patterns: Vec<ErrorPattern>,
    pub parse_only_flags: Option<Vec<String>>,
    pub timeout: Duration,
    pub memory_limit: u64,
}

impl EngineSpec {
    pub fn new(name: impl Into<String>, binary_path: impl Into<PathBuf>) -> Self {
        EngineSpec {
            name: name.into(),
            binary_path: binary_path.into(),
            extra_flags: Vec::new(),
            error_patterns: default_error_patterns(),
            parse_only_flags: None,
            timeout: DEFAULT_TIMEOUT,
            memory_limit: DEFAULT_MEMORY_LIMIT,
        }
    }
}

/// Patterns matching the `Kind: message` convention shared by most shells.
pub fn default_error_patterns() -> Vec<ErrorPattern> {
    [
        (Category::Oom, None, r"(?i)out of memory|allocation failed"),
        (Category::SyntaxError, Some("SyntaxError"), r"^(?:.*?\s)?SyntaxError:\s*(?P<message>.*)$"),
        (
            Category::RuntimeError,
            None,
            r"^(?:Uncaught\s+|.*?:\d+:\s*)?(?P<kind>[A-Z]\w*(?:Error|Exception)):\s*(?P<message>.*)$",
        ),
    ]
    .into_iter()
    .map(|(c, k, p)| ErrorPattern::new(c, k, p).expect("builtin pattern"))
    .collect()
}

#[derive(Debug, Clone)]
pub struct Registry {
    pub engines: Vec<EngineSpec>,
    /// sha256 of the registry file bytes (of the engine list when built in code).
    pub digest: String,
}

impl Registry {
    pub fn from_engines(engines: Vec<EngineSpec>) -> Result<Self, EngineError> {
        let mut seen = BTreeSet::new();
        for e in &engines {
            if !seen.insert(e.name.as_str()) {
                return Err(EngineError::DuplicateEngineName(e.name.clone()));
            }
        }
        let mut h = Sha256::new();
        for e in &engines {
            h.update(format!("{:?}\n", (&e.name, &e.binary_path, &e.extra_flags)));
        }
        Ok(Registry { engines, digest: hex(&h.finalize()) })
    }

    pub fn get(&self, name: &str) -> Option<&EngineSpec> {
        self.engines.iter().find(|e| e.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.engines.iter().map(|e| e.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.engines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.engines.is_empty()
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    default_error_patterns: Option<Vec<PatternEntry>>,
    #[serde(default)]
    engine: Vec<EngineEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EngineEntry {
    name: String,
    binary: PathBuf,
    #[serde(default)]
    flags: Vec<String>,
    #[serde(default)]
    parse_only_flags: Option<Vec<String>>,
    #[serde(default)]
    timeout_secs: Option<f64>,
    #[serde(default)]
    memory_limit: Option<u64>,
    #[serde(default)]
    error_patterns: Option<Vec<PatternEntry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternEntry {
    category: String,
    #[serde(default)]
    kind: Option<String>,
    pattern: String,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

fn compile_patterns(entries: Vec<PatternEntry>, location: &str) -> Result<Vec<ErrorPattern>, EngineError> {
    entries
        .into_iter()
        .map(|p| {
            let category: Category = p
                .category
                .parse()
                .map_err(|m| EngineError::ConfigParse { location: location.to_string(), message: m })?;
            if matches!(category, Category::Pass | Category::Timeout) {
                return Err(EngineError::ConfigParse {
                    location: location.to_string(),
                    message: format!("pattern category {category} cannot be claimed by output"),
                });
            }
            ErrorPattern::new(category, p.kind.as_deref(), &p.pattern)
                .map_err(|e| EngineError::ConfigParse { location: location.to_string(), message: e.to_string() })
        })
        .collect()
}

/// Parses a registry without touching the filesystem beyond reading it.
pub fn parse_registry(text: &str, origin: &Path) -> Result<Registry, EngineError> {
    let file: RegistryFile = toml::from_str(text).map_err(|e| {
        let (line, col) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        EngineError::ConfigParse {
            location: format!("{}:{line}:{col}", origin.display()),
            message: e.message().to_string(),
        }
    })?;
    let base = origin.parent().unwrap_or(Path::new("."));
    let defaults = match file.default_error_patterns {
        Some(p) => compile_patterns(p, &format!("{}: default_error_patterns", origin.display()))?,
        None => default_error_patterns(),
    };
    let mut engines = Vec::with_capacity(file.engine.len());
    for entry in file.engine {
        let location = format!("{}: engine {:?}", origin.display(), entry.name);
        let timeout = match entry.timeout_secs {
            Some(t) if t.is_finite() && t > 0.0 => Duration::from_secs_f64(t),
            Some(t) => {
                return Err(EngineError::ConfigParse {
                    location,
                    message: format!("timeout_secs must be > 0, got {t}"),
                })
            }
            None => DEFAULT_TIMEOUT,
        };
        let memory_limit = match entry.memory_limit {
            Some(0) => return Err(EngineError::ConfigParse { location, message: "memory_limit must be > 0".into() }),
            Some(m) => m,
            None => DEFAULT_MEMORY_LIMIT,
        };
        let error_patterns = match entry.error_patterns {
            Some(p) => compile_patterns(p, &location)?,
            None => defaults.clone(),
        };
        let binary_path = if entry.binary.components().count() > 1 || entry.binary.is_absolute() {
            base.join(&entry.binary)
        } else {
            entry.binary
        };
        engines.push(EngineSpec {
            name: entry.name,
            binary_path,
            extra_flags: entry.flags,
            error_patterns,
            parse_only_flags: entry.parse_only_flags,
            timeout,
            memory_limit,
        });
    }
    let mut registry = Registry::from_engines(engines)?;
    registry.digest = hex(&Sha256::digest(text.as_bytes()));
    Ok(registry)
}

/// Resolves a binary path: relative or absolute paths must exist, bare names
/// are searched on `PATH`.
pub fn resolve_binary(spec: &EngineSpec) -> Result<PathBuf, EngineError> {
    let p = &spec.binary_path;
    if p.components().count() > 1 || p.is_absolute() {
        if p.is_file() {
            Ok(p.clone())
        } else {
            Err(EngineError::MissingBinary(spec.name.clone()))
        }
    } else {
        which::which(p).map_err(|_| EngineError::MissingBinary(spec.name.clone()))
    }
}

/// Reads and validates a registry file, then probes every engine with `1+1`.
pub fn load_registry(config_path: &Path) -> Result<Registry, EngineError> {
    let registry = load_registry_unprobed(config_path)?;
    for spec in &registry.engines {
        super::probe(spec)?;
    }
    Ok(registry)
}

/// Like [`load_registry`] but only checks that binaries exist.
pub fn load_registry_unprobed(config_path: &Path) -> Result<Registry, EngineError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| EngineError::ConfigParse {
        location: config_path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut registry = parse_registry(&text, config_path)?;
    for spec in &mut registry.engines {
        spec.binary_path = resolve_binary(spec)?;
    }
    Ok(registry)
}
