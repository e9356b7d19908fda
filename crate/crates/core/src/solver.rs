//! One interface over the in-process solver and an external clingo-compatible
//! binary. Every outcome becomes a [`SolverVerdict`].

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use asploop_asp::{parse_ground_atoms, AnswerSet, AspError, ParseError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_CAP: usize = 1_000_000;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const SOLVER_CMD_ENV: &str = "ASPLOOP_SOLVER_CMD";

/// Outcome of one solve. Fields are private so the flag invariants hold for
/// every value, including deserialized ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "VerdictRepr", into = "VerdictRepr")]
pub struct SolverVerdict {
    models: Vec<AnswerSet>,
    model_count: usize,
    has_error: bool,
    is_unsat: bool,
    cap_exceeded: bool,
    diagnostics: Vec<String>,
    wall_time: Duration,
}

/// Equality ignores wall time.
impl PartialEq for SolverVerdict {
    fn eq(&self, other: &Self) -> bool {
        self.models == other.models && self.model_count == other.model_count && self.flags() == other.flags() && self.diagnostics == other.diagnostics
    }
}

impl Eq for SolverVerdict {}

#[derive(Serialize, Deserialize)]
struct VerdictRepr {
    models: Vec<Vec<String>>,
    model_count: usize,
    has_error: bool,
    is_unsat: bool,
    cap_exceeded: bool,
    diagnostics: Vec<String>,
}

impl From<SolverVerdict> for VerdictRepr {
    fn from(v: SolverVerdict) -> Self {
        VerdictRepr {
            models: v.models.iter().map(|m| m.atoms().iter().map(|a| a.to_string()).collect()).collect(),
            model_count: v.model_count,
            has_error: v.has_error,
            is_unsat: v.is_unsat,
            cap_exceeded: v.cap_exceeded,
            diagnostics: v.diagnostics,
        }
    }
}

impl TryFrom<VerdictRepr> for SolverVerdict {
    type Error = String;
    fn try_from(r: VerdictRepr) -> Result<Self, String> {
        let mut models = Vec::new();
        for m in &r.models {
            let atoms = parse_ground_atoms(&m.join(" ")).map_err(|e| e.to_string())?;
            models.push(AnswerSet::new(atoms));
        }
        let v = SolverVerdict {
            models,
            model_count: r.model_count,
            has_error: r.has_error,
            is_unsat: r.is_unsat,
            cap_exceeded: r.cap_exceeded,
            diagnostics: r.diagnostics,
            wall_time: Duration::ZERO,
        };
        v.check().map(|_| v)
    }
}

impl SolverVerdict {
    /// An erroneous run: no trusted models.
    pub fn error(diagnostics: Vec<String>) -> Self {
        SolverVerdict { models: Vec::new(), model_count: 0, has_error: true, is_unsat: false, cap_exceeded: false, diagnostics, wall_time: Duration::ZERO }
    }

    /// Models observed by an enumeration that asked for `cap + 1`.
    /// More than `cap` models means the cap was exceeded; none means UNSAT.
    pub fn from_models(mut models: Vec<AnswerSet>, cap: usize, diagnostics: Vec<String>) -> Self {
        let observed = models.len();
        let cap_exceeded = observed > cap;
        models.truncate(cap);
        SolverVerdict { models, model_count: observed, has_error: false, is_unsat: observed == 0, cap_exceeded, diagnostics, wall_time: Duration::ZERO }
    }

    fn check(&self) -> Result<(), String> {
        if self.is_unsat && (self.model_count != 0 || !self.models.is_empty() || self.has_error) {
            return Err("unsat verdict must have no models and no error".into());
        }
        if self.has_error && (!self.models.is_empty() || self.is_unsat || self.cap_exceeded) {
            return Err("erroneous verdict must carry no models and no other flag".into());
        }
        if self.is_unsat && self.cap_exceeded {
            return Err("unsat and cap exceeded are exclusive".into());
        }
        if self.cap_exceeded && self.model_count <= self.models.len() {
            return Err("cap exceeded requires more observed models than kept".into());
        }
        Ok(())
    }

    pub fn with_wall_time(mut self, t: Duration) -> Self {
        self.wall_time = t;
        self
    }

    pub fn models(&self) -> &[AnswerSet] {
        &self.models
    }
    /// Models observed (up to `cap + 1`).
    pub fn model_count(&self) -> usize {
        self.model_count
    }
    pub fn has_error(&self) -> bool {
        self.has_error
    }
    pub fn is_unsat(&self) -> bool {
        self.is_unsat
    }
    pub fn cap_exceeded(&self) -> bool {
        self.cap_exceeded
    }
    pub fn flagless(&self) -> bool {
        !(self.has_error || self.is_unsat || self.cap_exceeded)
    }
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }
    pub fn wall_time(&self) -> Duration {
        self.wall_time
    }
    /// (error, unsat, cap exceeded)
    pub fn flags(&self) -> (bool, bool, bool) {
        (self.has_error, self.is_unsat, self.cap_exceeded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Internal,
    External,
    Auto,
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "internal" => Ok(Backend::Internal),
            "external" => Ok(Backend::External),
            "auto" => Ok(Backend::Auto),
            other => Err(format!("unknown solver backend `{other}`")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("the external backend needs a solver command (--solver-cmd or {SOLVER_CMD_ENV})")]
    MissingSolverCommand,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Program and leading arguments; the file and model limit are appended.
    pub command: Option<Vec<String>>,
    pub timeout: Duration,
    pub max_processes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Internal,
            command: None,
            timeout: DEFAULT_TIMEOUT,
            max_processes: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl SolverConfig {
    /// Splits a command string on whitespace.
    pub fn with_command_str(mut self, cmd: &str) -> Self {
        let parts: Vec<String> = cmd.split_whitespace().map(String::from).collect();
        self.command = (!parts.is_empty()).then_some(parts);
        self
    }

    /// Falls back to the environment when no command is set.
    pub fn command_from_env(self) -> Self {
        if self.command.is_some() {
            return self;
        }
        match std::env::var(SOLVER_CMD_ENV) {
            Ok(cmd) => self.with_command_str(&cmd),
            Err(_) => self,
        }
    }
}

/// Counting semaphore bounding concurrent subprocesses.
struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Slots {
    fn acquire(&self) {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
    }
    fn release(&self) {
        *self.free.lock().unwrap() += 1;
        self.cv.notify_one();
    }
}

pub struct Gateway {
    config: SolverConfig,
    slots: Slots,
}

impl Gateway {
    pub fn new(config: SolverConfig) -> Result<Self, ConfigError> {
        if config.backend == Backend::External && config.command.is_none() {
            return Err(ConfigError::MissingSolverCommand);
        }
        let slots = Slots { free: Mutex::new(config.max_processes.max(1)), cv: Condvar::new() };
        Ok(Gateway { config, slots })
    }

    pub fn internal() -> Self {
        Gateway::new(SolverConfig::default()).expect("internal backend needs no configuration")
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn backend_id(&self) -> String {
        match (&self.config.backend, &self.config.command) {
            (Backend::Internal, _) => "internal".into(),
            (b, Some(cmd)) => format!("{}:{}", format!("{b:?}").to_lowercase(), cmd.join(" ")),
            (b, None) => format!("{b:?}").to_lowercase(),
        }
    }

    /// Solves with `cap` (≥ 1); a zero cap is treated as 1.
    pub fn solve(&self, program: &str, cap: usize) -> SolverVerdict {
        let cap = cap.max(1);
        let start = Instant::now();
        let verdict = match self.config.backend {
            Backend::Internal => solve_internal(program, cap),
            Backend::External => self.solve_external(program, cap),
            Backend::Auto => match asploop_asp::parse_program(program) {
                Err(ParseError::Unsupported { .. }) if self.config.command.is_some() => self.solve_external(program, cap),
                _ => solve_internal(program, cap),
            },
        };
        verdict.with_wall_time(start.elapsed())
    }

    fn solve_external(&self, program: &str, cap: usize) -> SolverVerdict {
        let Some(cmd) = &self.config.command else {
            return SolverVerdict::error(vec!["no external solver configured".into()]);
        };
        self.slots.acquire();
        let out = run_external(cmd, program, cap, self.config.timeout);
        self.slots.release();
        match out {
            Ok((stdout, stderr, status)) => parse_external_output(&stdout, &stderr, status, cap),
            Err(diag) => SolverVerdict::error(vec![diag]),
        }
    }
}

pub fn solve_internal(program: &str, cap: usize) -> SolverVerdict {
    let describe = |e: AspError| SolverVerdict::error(vec![format!("error: {e}")]);
    let statements = match asploop_asp::parse_program(program) {
        Ok(s) => s,
        Err(e) => return describe(e.into()),
    };
    let ground = match asploop_asp::ground(&statements) {
        Ok(g) => g,
        Err(e) => return describe(e.into()),
    };
    if !ground.warnings.is_empty() {
        return SolverVerdict::error(ground.warnings.clone());
    }
    match asploop_asp::enumerate_models(&ground, cap) {
        Ok(e) => SolverVerdict::from_models(e.models, cap, Vec::new()),
        Err(e) => describe(e.into()),
    }
}

/// Runs `<cmd> <file> <cap+1>` and returns (stdout, stderr, exit status).
fn run_external(cmd: &[String], program: &str, cap: usize, timeout: Duration) -> Result<(String, String, i32), String> {
    let mut file = tempfile::Builder::new().suffix(".lp").tempfile().map_err(|e| format!("error: cannot create program file: {e}"))?;
    file.write_all(program.as_bytes()).and_then(|_| file.flush()).map_err(|e| format!("error: cannot write program file: {e}"))?;
    let mut child = Command::new(&cmd[0])
        .args(&cmd[1..])
        .arg(file.path())
        .arg((cap + 1).to_string())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| format!("error: cannot run solver `{}`: {e}", cmd[0]))?;
    let mut out_pipe = child.stdout.take().unwrap();
    let mut err_pipe = child.stderr.take().unwrap();
    let out_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = out_pipe.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = err_pipe.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(format!("error: solver timed out after {:.1}s", timeout.as_secs_f64()));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(format!("error: waiting for solver: {e}")),
        }
    };
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    Ok((stdout, stderr, status.code().unwrap_or(-1)))
}

/// Exit codes a clingo-style solver uses for normal termination
/// (unknown, satisfiable, unsatisfiable, exhausted).
const OK_STATUS: [i32; 4] = [0, 10, 20, 30];

/// Reads clingo-style text output.
pub fn parse_external_output(stdout: &str, stderr: &str, exit_status: i32, cap: usize) -> SolverVerdict {
    let cap = cap.max(1);
    let mut diagnostics: Vec<String> = Vec::new();
    for line in stderr.lines() {
        let lower = line.to_lowercase();
        // clingo reports undefined atoms and similar issues as "info:"; they
        // count as warnings here.
        if lower.contains("error") || lower.contains("warning") || lower.contains("info:") {
            diagnostics.push(line.trim().to_string());
        }
    }
    if !OK_STATUS.contains(&exit_status) {
        diagnostics.push(format!("error: solver exited with status {exit_status}"));
    }
    if !diagnostics.is_empty() {
        return SolverVerdict::error(diagnostics);
    }

    let mut models = Vec::new();
    let mut lines = stdout.lines();
    let mut result: Option<&str> = None;
    while let Some(line) = lines.next() {
        let t = line.trim();
        if t.starts_with("Answer:") {
            let atoms_line = lines.next().unwrap_or("");
            match parse_ground_atoms(atoms_line) {
                Ok(atoms) => models.push(AnswerSet::new(atoms)),
                Err(e) => {
                    return SolverVerdict::error(vec![format!("error: unreadable model `{atoms_line}`: {e}"), stdout.to_string()]);
                }
            }
        } else if t == "SATISFIABLE" || t == "UNSATISFIABLE" || t == "UNKNOWN" || t == "OPTIMUM FOUND" {
            result = Some(t);
        }
    }
    match result {
        Some("UNSATISFIABLE") if models.is_empty() => SolverVerdict::from_models(Vec::new(), cap, Vec::new()),
        Some("SATISFIABLE") | Some("OPTIMUM FOUND") if !models.is_empty() => SolverVerdict::from_models(models, cap, Vec::new()),
        _ => SolverVerdict::error(vec!["error: unrecognised solver output".into(), stdout.to_string()]),
    }
}
