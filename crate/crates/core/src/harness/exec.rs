//! Process execution with file-backed capture.
//!
//! stdout and stderr always go straight to fresh files. Nothing is read
//! back through an in-memory text pipe, so trailing bytes survive.

use std::ffi::OsString;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::time::Duration;

use thiserror::Error;
use wait_timeout::ChildExt;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("empty command line")]
    EmptyCommand,
    #[error("cannot create capture file {path}: {source}")]
    Capture {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot start `{program}`: {message}")]
    Spawn { program: String, message: String },
    #[error("waiting on `{program}` failed: {message}")]
    Wait { program: String, message: String },
}

/// What one process run left behind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionRecord {
    pub unit: String,
    pub stdout_path: PathBuf,
    pub stderr_path: PathBuf,
    pub stderr_byte_count: u64,
    /// Exit status; on Unix a signal death maps to 128 + signal.
    pub exit_code: i32,
    pub timed_out: bool,
}

impl ExecutionRecord {
    pub fn stdout_bytes(&self) -> std::io::Result<Vec<u8>> {
        std::fs::read(&self.stdout_path)
    }

    pub fn stderr_bytes(&self) -> std::io::Result<Vec<u8>> {
        std::fs::read(&self.stderr_path)
    }
}

fn exit_code(status: ExitStatus) -> i32 {
    if let Some(code) = status.code() {
        return code;
    }
    #[cfg(unix)]
    {
        use std::os::unix::process::ExitStatusExt;
        if let Some(signal) = status.signal() {
            return 128 + signal;
        }
    }
    -1
}

/// Capture settings for one run.
#[derive(Debug, Clone)]
pub struct Capture<'a> {
    pub unit: &'a str,
    /// Directory receiving `<stem>.stdout` and `<stem>.stderr`.
    pub capture_dir: &'a Path,
    pub stem: &'a str,
    pub timeout: Duration,
}

/// Run `argv` in `workdir`, stdout and stderr redirected to files.
pub fn execute(
    argv: &[OsString],
    workdir: &Path,
    capture: &Capture<'_>,
) -> Result<ExecutionRecord, ExecError> {
    let (program, args) = argv.split_first().ok_or(ExecError::EmptyCommand)?;
    let display = program.to_string_lossy().into_owned();

    let stdout_path = capture.capture_dir.join(format!("{}.stdout", capture.stem));
    let stderr_path = capture.capture_dir.join(format!("{}.stderr", capture.stem));
    let create = |path: &Path| {
        File::create(path).map_err(|source| ExecError::Capture {
            path: path.to_path_buf(),
            source,
        })
    };
    let stdout = create(&stdout_path)?;
    let stderr = create(&stderr_path)?;

    let mut child = Command::new(program)
        .args(args)
        .current_dir(workdir)
        .stdin(Stdio::null())
        .stdout(Stdio::from(stdout))
        .stderr(Stdio::from(stderr))
        .spawn()
        .map_err(|e| ExecError::Spawn {
            program: display.clone(),
            message: e.to_string(),
        })?;

    let waited = child
        .wait_timeout(capture.timeout)
        .map_err(|e| ExecError::Wait {
            program: display.clone(),
            message: e.to_string(),
        })?;
    let (status, timed_out) = match waited {
        Some(status) => (status, false),
        None => {
            let _ = child.kill();
            let status = child.wait().map_err(|e| ExecError::Wait {
                program: display,
                message: e.to_string(),
            })?;
            (status, true)
        }
    };

    let stderr_byte_count = std::fs::metadata(&stderr_path)
        .map(|m| m.len())
        .unwrap_or(0);
    Ok(ExecutionRecord {
        unit: capture.unit.to_string(),
        stdout_path,
        stderr_path,
        stderr_byte_count,
        exit_code: exit_code(status),
        timed_out,
    })
}

/// Run a candidate in `workdir`, capturing into the same directory as
/// `stdout` / `stderr` files.
pub fn execute_candidate(argv: &[OsString], workdir: &Path) -> Result<ExecutionRecord, ExecError> {
    execute(
        argv,
        workdir,
        &Capture {
            unit: "",
            capture_dir: workdir,
            stem: "candidate",
            timeout: DEFAULT_TIMEOUT,
        },
    )
}
