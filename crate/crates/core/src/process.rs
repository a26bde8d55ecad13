//! One-shot external solver processes driven by a command template.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;
use wait_timeout::ChildExt;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("empty solver command template")]
    EmptyCommand,
    #[error("failed to launch `{command}`: {source}")]
    Launch { command: String, source: std::io::Error },
    #[error("i/o error talking to solver: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ProcessOutput {
    pub stdout: String,
    pub stderr: String,
    pub timed_out: bool,
    pub elapsed: Duration,
}

/// A solver invocation. The template is split on whitespace; a `{file}`
/// token is replaced by the path of a temporary file holding the input,
/// otherwise the input is written to stdin.
#[derive(Debug, Clone)]
pub struct SolverCommand {
    pub template: String,
    pub timeout: Duration,
    /// Directory where inputs are kept after the run, if any.
    pub keep_dir: Option<PathBuf>,
}

impl SolverCommand {
    pub fn new(template: &str, timeout: Duration) -> Self {
        SolverCommand { template: template.to_string(), timeout, keep_dir: None }
    }

    pub fn keep_artifacts(mut self, dir: Option<PathBuf>) -> Self {
        self.keep_dir = dir;
        self
    }

    pub fn run(&self, input: &str, name: &str, ext: &str) -> Result<ProcessOutput, ProcessError> {
        let parts: Vec<&str> = self.template.split_whitespace().collect();
        if parts.is_empty() {
            return Err(ProcessError::EmptyCommand);
        }
        if let Some(dir) = &self.keep_dir {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{name}.{ext}")), input)?;
        }
        let uses_file = parts.iter().any(|p| p.contains("{file}"));
        let tmp = if uses_file {
            let mut f = tempfile::Builder::new().suffix(&format!(".{ext}")).tempfile()?;
            f.write_all(input.as_bytes())?;
            f.flush()?;
            Some(f.into_temp_path())
        } else {
            None
        };
        let path = tmp.as_deref().map(Path::to_string_lossy).unwrap_or_default();
        let args: Vec<String> = parts[1..].iter().map(|p| p.replace("{file}", &path)).collect();
        let start = Instant::now();
        let mut child = Command::new(parts[0])
            .args(&args)
            .stdin(if uses_file { Stdio::null() } else { Stdio::piped() })
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| ProcessError::Launch { command: self.template.clone(), source })?;
        let mut out = child.stdout.take().expect("piped stdout");
        let mut err = child.stderr.take().expect("piped stderr");
        let out_reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = out.read_to_string(&mut s);
            s
        });
        let err_reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = err.read_to_string(&mut s);
            s
        });
        if let Some(mut stdin) = child.stdin.take() {
            // A solver may exit before reading everything; that is not our error.
            let _ = stdin.write_all(input.as_bytes());
        }
        let timed_out = match child.wait_timeout(self.timeout)? {
            Some(_) => false,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                true
            }
        };
        let elapsed = start.elapsed();
        let stdout = out_reader.join().unwrap_or_default();
        let stderr = err_reader.join().unwrap_or_default();
        drop(tmp);
        Ok(ProcessOutput { stdout, stderr, timed_out, elapsed })
    }
}

/// Whether the first word of a command template resolves to an executable.
pub fn command_available(template: &str) -> bool {
    let Some(prog) = template.split_whitespace().next() else {
        return false;
    };
    if prog.contains('/') {
        return Path::new(prog).is_file();
    }
    std::env::var_os("PATH")
        .map(|paths| std::env::split_paths(&paths).any(|d| d.join(prog).is_file()))
        .unwrap_or(false)
}
