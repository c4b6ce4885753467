//! Describing, invoking, and classifying JavaScript engine binaries.

mod classify;
mod exec;
mod outcome;
mod registry;

pub use classify::classify;
pub use exec::{execute, execute_mode, Mode};
pub use outcome::{Category, Outcome, RawExecution, ASSERT_SENTINEL};
pub use registry::{
    default_error_patterns, load_registry, load_registry_unprobed, parse_registry, resolve_binary, EngineSpec,
    ErrorPattern, Registry, DEFAULT_MEMORY_LIMIT, DEFAULT_TIMEOUT,
};

pub(crate) use registry::hex;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("engine {0:?}: binary not found")]
    MissingBinary(String),
    #[error("engine name {0:?} appears more than once in the registry")]
    DuplicateEngineName(String),
    #[error("registry {location}: {message}")]
    ConfigParse { location: String, message: String },
    #[error("failed to run engine: {0}")]
    SpawnFailure(String),
    #[error("engine {name:?} did not answer the `1+1` probe: {detail}")]
    ProbeFailed { name: String, detail: String },
    #[error("engine {0:?} has no parse-only flags configured")]
    NoParseOnlyMode(String),
    #[error("refusing to execute an empty source")]
    EmptySource,
}

/// Runs `1+1` and requires a clean exit.
pub fn probe(spec: &EngineSpec) -> Result<(), EngineError> {
    let raw = execute(spec, "1+1", None)?;
    if raw.timed_out || raw.exit_code != Some(0) {
        let detail = if raw.timed_out {
            "timed out".to_string()
        } else {
            format!("exit {:?}, signal {:?}: {}", raw.exit_code, raw.termination_signal, raw.stderr.trim())
        };
        return Err(EngineError::ProbeFailed { name: spec.name.clone(), detail });
    }
    Ok(())
}

/// Convenience: execute then classify.
pub fn run(spec: &EngineSpec, source: &str, prelude: Option<&str>) -> Result<Outcome, EngineError> {
    let raw = execute(spec, source, prelude)?;
    Ok(classify(spec, &raw))
}
