//! Running an engine binary on one source file under a time and memory budget.

use super::outcome::RawExecution;
use super::registry::EngineSpec;
use super::EngineError;
use std::io::{Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

/// Per-stream capture cap. Output beyond this is drained and dropped.
const CAPTURE_LIMIT: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    ParseOnly,
}

/// Runs `prelude ++ source` on the engine.
pub fn execute(engine: &EngineSpec, source: &str, prelude: Option<&str>) -> Result<RawExecution, EngineError> {
    execute_mode(engine, source, prelude, Mode::Run)
}

pub fn execute_mode(
    engine: &EngineSpec,
    source: &str,
    prelude: Option<&str>,
    mode: Mode,
) -> Result<RawExecution, EngineError> {
    if source.is_empty() {
        return Err(EngineError::EmptySource);
    }
    let mut file = tempfile::Builder::new()
        .prefix("entente-")
        .suffix(".js")
        .tempfile()
        .map_err(|e| EngineError::SpawnFailure(format!("temp file: {e}")))?;
    if let Some(p) = prelude {
        file.write_all(p.as_bytes()).map_err(|e| EngineError::SpawnFailure(format!("temp file: {e}")))?;
        if !p.ends_with('\n') {
            file.write_all(b"\n").map_err(|e| EngineError::SpawnFailure(format!("temp file: {e}")))?;
        }
    }
    file.write_all(source.as_bytes()).map_err(|e| EngineError::SpawnFailure(format!("temp file: {e}")))?;
    file.flush().map_err(|e| EngineError::SpawnFailure(format!("temp file: {e}")))?;

    let mut cmd = Command::new(&engine.binary_path);
    cmd.args(&engine.extra_flags);
    if mode == Mode::ParseOnly {
        let flags =
            engine.parse_only_flags.as_ref().ok_or_else(|| EngineError::NoParseOnlyMode(engine.name.clone()))?;
        cmd.args(flags);
    }
    cmd.arg(file.path()).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::piped());
    // SAFETY: setpgid is async-signal-safe; the child gets its own process
    // group so a timeout can kill everything it spawned.
    unsafe {
        cmd.pre_exec(|| {
            libc::setpgid(0, 0);
            Ok(())
        });
    }
    let started = Instant::now();
    let mut child =
        cmd.spawn().map_err(|e| EngineError::SpawnFailure(format!("{}: {e}", engine.binary_path.display())))?;
    let raw = supervise(&mut child, engine, started);
    drop(file);
    raw
}

fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut buf = [0u8; 8192];
        loop {
            match r.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = CAPTURE_LIMIT.saturating_sub(kept.len());
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
            }
        }
        kept
    })
}

fn resident_bytes(pid: u32) -> Option<u64> {
    let statm = std::fs::read_to_string(format!("/proc/{pid}/statm")).ok()?;
    let pages: u64 = statm.split_whitespace().nth(1)?.parse().ok()?;
    // SAFETY: sysconf has no preconditions.
    let page = unsafe { libc::sysconf(libc::_SC_PAGESIZE) };
    Some(pages * page.max(1) as u64)
}

fn kill_group(child: &Child) {
    // SAFETY: plain syscalls on a pid we own.
    unsafe {
        libc::killpg(child.id() as libc::pid_t, libc::SIGKILL);
        libc::kill(child.id() as libc::pid_t, libc::SIGKILL);
    }
}

fn supervise(child: &mut Child, engine: &EngineSpec, started: Instant) -> Result<RawExecution, EngineError> {
    let out = drain(child.stdout.take().expect("piped stdout"));
    let err = drain(child.stderr.take().expect("piped stderr"));
    let mut timed_out = false;
    let mut oom = false;
    let mut nap = Duration::from_millis(1);
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {}
            Err(e) => return Err(EngineError::SpawnFailure(format!("wait: {e}"))),
        }
        if started.elapsed() >= engine.timeout {
            timed_out = true;
            kill_group(child);
            break child.wait().map_err(|e| EngineError::SpawnFailure(format!("wait: {e}")))?;
        }
        if resident_bytes(child.id()).is_some_and(|rss| rss > engine.memory_limit) {
            oom = true;
            kill_group(child);
            break child.wait().map_err(|e| EngineError::SpawnFailure(format!("wait: {e}")))?;
        }
        thread::sleep(nap);
        nap = (nap * 2).min(Duration::from_millis(10));
    };
    let wall_time = started.elapsed();
    // Reap anything left in the group so the pipes close.
    if timed_out || oom {
        kill_group(child);
    }
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    let (exit_code, termination_signal) = match (status.code(), status.signal()) {
        (Some(c), _) => (Some(c), None),
        (None, Some(s)) => (None, Some(s)),
        (None, None) => (None, None),
    };
    Ok(RawExecution {
        stdout: String::from_utf8_lossy(&stdout).into_owned(),
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
        exit_code,
        termination_signal,
        wall_time,
        timed_out,
        oom,
    })
}
