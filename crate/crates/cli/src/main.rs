//! `asploop`: solve programs, generate training data, run test-time search
//! and score results.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use asploop_core::datagen::{export_jsonl, run_dfs, DatagenConfig, DatagenStats};
use asploop_core::fixtures::{scenarios::DEFAULT_SEED, verify_fixtures, write_fixtures, FixtureSet, FIXTURE_DIR};
use asploop_core::generator::{prompt_sha256, Generator, HttpGenerator, ScriptedGenerator};
use asploop_core::metrics::{buckets_to_csv, evaluate_accuracy, rows_to_csv, MetricsReport};
use asploop_core::puzzle::{load_dataset, Dataset, DatasetFormat, PuzzleInstance};
use asploop_core::reward::reward;
use asploop_core::search::{run_search, SearchConfig, SearchOutcome, TraceEvent};
use asploop_core::solver::{Backend, Gateway, SolverConfig, DEFAULT_CAP};
use asploop_core::trajectory::{Exemplar, DEFAULT_PREAMBLE};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "asploop", version, about = "Solver-in-the-loop ASP encoding for logic grid puzzles")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize)]
struct Global {
    /// Puzzle dataset (JSON array or JSONL).
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = SolverKind::Internal)]
    solver: SolverKind,
    /// External solver command; the program file and model limit are appended.
    #[arg(long, global = true)]
    solver_cmd: Option<String>,
    /// Seconds before an external solve is abandoned.
    #[arg(long, global = true, default_value_t = 30)]
    solver_timeout: u64,
    #[arg(long, global = true, value_enum, default_value_t = GenKind::Scripted)]
    generator: GenKind,
    #[arg(long, global = true)]
    generator_url: Option<String>,
    #[arg(long, global = true, default_value = "default")]
    generator_model: String,
    /// Scripted-generator fixture (JSONL).
    #[arg(long, global = true)]
    script: Option<PathBuf>,
    /// Instruction preamble template; the built-in one by default.
    #[arg(long, global = true)]
    preamble: Option<PathBuf>,
    /// JSON list of up to two `{"input", "output"}` exemplars.
    #[arg(long, global = true)]
    shots: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Instances processed in parallel.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Model cap; derived from each instance when absent.
    #[arg(long, global = true)]
    cap: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SolverKind {
    Internal,
    External,
    Auto,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum GenKind {
    Scripted,
    Http,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one program and print the verdict and reward.
    Solve {
        file: PathBuf,
        /// Models to print.
        #[arg(long, default_value_t = 3)]
        show: usize,
    },
    /// Generate SFT and preference data by depth-first search.
    Datagen {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 0.8)]
        temperature: f64,
        #[arg(long, default_value_t = 2)]
        max_chosen_branch: usize,
    },
    /// Best-of-N search with regeneration and backtracking.
    Search {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        #[arg(long, default_value_t = 5)]
        backtrack_limit: usize,
        #[arg(long, default_value_t = 2)]
        regen_multiplier: usize,
        /// Never regenerate when a step is all negative.
        #[arg(long)]
        no_regen: bool,
    },
    /// Score a search run's outcomes against the dataset.
    Eval {
        /// `outcomes.jsonl` written by `search`.
        #[arg(long)]
        outcomes: PathBuf,
    },
    /// Check or regenerate the bundled fixtures.
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
        /// Fixture directory.
        #[arg(long, default_value = FIXTURE_DIR)]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum FixturesAction {
    Verify,
    Write,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

type Res<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Usage(msg.into()))
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
struct DatasetInfo {
    path: String,
    sha256: String,
    instances: usize,
    rejected: Vec<String>,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config: serde_json::Value,
    globals: serde_json::Value,
    dataset: Option<DatasetInfo>,
    generator: Option<String>,
    solver: String,
    seed: Option<u64>,
    reproducible: bool,
    started: String,
    finished: String,
    artifacts: Vec<String>,
    partial: bool,
    failures: Vec<String>,
}

struct Ctx {
    global: Global,
    started: String,
}

impl Ctx {
    fn gateway(&self) -> Res<Gateway> {
        let backend = match self.global.solver {
            SolverKind::Internal => Backend::Internal,
            SolverKind::External => Backend::External,
            SolverKind::Auto => Backend::Auto,
        };
        let mut cfg = SolverConfig { backend, timeout: Duration::from_secs(self.global.solver_timeout), ..Default::default() };
        cfg = match &self.global.solver_cmd {
            Some(c) => cfg.with_command_str(c),
            None => cfg.command_from_env(),
        };
        Gateway::new(cfg).map_err(|e| Failure::Usage(e.to_string()))
    }

    fn generator(&self) -> Res<Box<dyn Generator>> {
        match self.global.generator {
            GenKind::Scripted => {
                let Some(path) = &self.global.script else {
                    return usage("--generator scripted needs --script");
                };
                if !path.is_file() {
                    return usage(format!("script {} not found", path.display()));
                }
                Ok(Box::new(ScriptedGenerator::load(path).map_err(|e| Failure::Usage(e.to_string()))?))
            }
            GenKind::Http => {
                let Some(url) = &self.global.generator_url else {
                    return usage("--generator http needs --generator-url");
                };
                Ok(Box::new(HttpGenerator::from_env(url.clone(), self.global.generator_model.clone()).map_err(|e| Failure::Usage(e.to_string()))?))
            }
        }
    }

    fn dataset(&self) -> Res<(Dataset, DatasetInfo)> {
        let Some(path) = &self.global.dataset else {
            return usage("--dataset is required");
        };
        if !path.is_file() {
            return usage(format!("dataset {} not found", path.display()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let ds = load_dataset(path, DatasetFormat::Auto).map_err(|e| Failure::Usage(e.to_string()))?;
        for (i, e) in &ds.rejected {
            log::warn!("skipping record {i}: {e}");
        }
        let info = DatasetInfo {
            path: path.display().to_string(),
            sha256: prompt_sha256(&text),
            instances: ds.instances.len(),
            rejected: ds.rejected.iter().map(|(i, e)| format!("{i}: {e}")).collect(),
        };
        Ok((ds, info))
    }

    fn preamble(&self) -> Res<String> {
        match &self.global.preamble {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
            None => Ok(DEFAULT_PREAMBLE.to_string()),
        }
    }

    fn shots(&self) -> Res<Vec<Exemplar>> {
        let Some(p) = &self.global.shots else {
            return Ok(Vec::new());
        };
        let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
    }

    fn out_dir(&self) -> Res<PathBuf> {
        let Some(dir) = &self.global.out else {
            return usage("--out DIR is required");
        };
        std::fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
        Ok(dir.clone())
    }

    fn pool(&self) -> Res<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.global.jobs {
            if j == 0 {
                return usage("--jobs must be at least 1");
            }
            b = b.num_threads(j);
        }
        b.build().map_err(|e| Failure::Runtime(e.to_string()))
    }

    #[allow(clippy::too_many_arguments)]
    fn manifest(
        &self,
        dir: &Path,
        command: &str,
        config: serde_json::Value,
        dataset: Option<DatasetInfo>,
        generator: Option<&dyn Generator>,
        solver: String,
        mut artifacts: Vec<String>,
        failures: Vec<String>,
    ) -> Res<()> {
        artifacts.sort();
        let m = Manifest {
            command: command.into(),
            config,
            globals: serde_json::to_value(&self.global).expect("globals serialize"),
            dataset,
            generator: generator.map(|g| g.id()),
            solver,
            seed: self.global.seed,
            reproducible: generator.is_none_or(|g| g.reproducible()),
            started: self.started.clone(),
            finished: now(),
            artifacts,
            partial: !failures.is_empty(),
            failures,
        };
        write_text(&dir.join("manifest.json"), &(serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n"))
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn write_text(path: &Path, text: &str) -> Res<()> {
    std::fs::write(path, text).map_err(|e| io_fail(path, e))
}

fn export<T: Serialize>(dir: &Path, name: &str, records: &[T], artifacts: &mut Vec<String>) -> Res<()> {
    let path = dir.join(name);
    export_jsonl(records, &path).map_err(|e| io_fail(&path, e))?;
    artifacts.push(name.into());
    Ok(())
}

fn cmd_solve(ctx: &Ctx, file: &Path, show: usize) -> Res<()> {
    let src = std::fs::read_to_string(file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    let gateway = ctx.gateway()?;
    let v = gateway.solve(&src, ctx.global.cap.unwrap_or(DEFAULT_CAP));
    let (e, u, ne) = v.flags();
    let mut text = String::new();
    if e {
        text.push_str("ERROR\n");
    } else if u {
        text.push_str("UNSAT\n");
    } else if ne {
        writeln!(text, "models: more than {}", v.models().len()).ok();
    } else {
        writeln!(text, "models: {}", v.model_count()).ok();
    }
    writeln!(text, "flags: error={e} unsat={u} cap_exceeded={ne}").ok();
    writeln!(text, "reward: {:?}", reward(&v).value).ok();
    for d in v.diagnostics() {
        writeln!(text, "diagnostic: {d}").ok();
    }
    for (i, m) in v.models().iter().take(show).enumerate() {
        writeln!(text, "Answer {}: {m}", i + 1).ok();
    }
    // A closed pipe (`| head`) is not a failure.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    if e {
        return Err(Failure::Runtime("the solver reported errors".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct InstanceStats<'a> {
    instance_id: &'a str,
    #[serde(flatten)]
    stats: &'a DatagenStats,
}

fn cmd_datagen(ctx: &Ctx, config: DatagenConfig) -> Res<()> {
    let dir = ctx.out_dir()?;
    let (ds, info) = ctx.dataset()?;
    let generator = ctx.generator()?;
    let gateway = ctx.gateway()?;
    let preamble = ctx.preamble()?;
    let shots = ctx.shots()?;
    let results: Vec<_> =
        ctx.pool()?.install(|| ds.instances.par_iter().map(|inst| run_dfs(inst, generator.as_ref(), &gateway, &config, &shots, &preamble)).collect());
    let mut sft = Vec::new();
    let mut pref = Vec::new();
    let mut stats = Vec::new();
    let mut failures = Vec::new();
    for (inst, r) in ds.instances.iter().zip(&results) {
        match r {
            Ok(out) => {
                sft.extend(out.sft.iter().cloned());
                pref.extend(out.pref.iter().cloned());
                stats.push(InstanceStats { instance_id: &inst.id, stats: &out.stats });
            }
            Err(e) => {
                log::error!("{}: {e}", inst.id);
                failures.push(format!("{}: {e}", inst.id));
            }
        }
    }
    let mut artifacts = Vec::new();
    export(&dir, "sft.jsonl", &sft, &mut artifacts)?;
    export(&dir, "pref.jsonl", &pref, &mut artifacts)?;
    write_text(&dir.join("stats.json"), &(serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n"))?;
    artifacts.push("stats.json".into());
    println!("sft records: {}", sft.len());
    println!("preference records: {}", pref.len());
    let cfg = serde_json::to_value(&config).expect("config serializes");
    ctx.manifest(&dir, "datagen", cfg, Some(info), Some(generator.as_ref()), gateway.backend_id(), artifacts, failures.clone())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("{} instance(s) failed", failures.len())))
    }
}

#[derive(Serialize)]
struct TraceLine<'a> {
    instance_id: &'a str,
    #[serde(flatten)]
    event: &'a TraceEvent,
}

fn write_metrics(dir: &Path, report: &MetricsReport, artifacts: &mut Vec<String>) -> Res<()> {
    write_text(&dir.join("metrics.json"), &(serde_json::to_string_pretty(report).expect("metrics serialize") + "\n"))?;
    write_text(&dir.join("instances.csv"), &rows_to_csv(&report.rows))?;
    write_text(&dir.join("buckets.csv"), &buckets_to_csv(report))?;
    artifacts.extend(["metrics.json", "instances.csv", "buckets.csv"].map(String::from));
    println!("accuracy: {}/{} = {:.4}", report.correct, report.total, report.accuracy);
    Ok(())
}

fn cmd_search(ctx: &Ctx, config: SearchConfig) -> Res<()> {
    let dir = ctx.out_dir()?;
    let (ds, info) = ctx.dataset()?;
    let generator = ctx.generator()?;
    let gateway = ctx.gateway()?;
    let preamble = ctx.preamble()?;
    let shots = ctx.shots()?;
    let results: Vec<_> =
        ctx.pool()?.install(|| ds.instances.par_iter().map(|inst| run_search(inst, generator.as_ref(), &gateway, &config, &shots, &preamble)).collect());
    let mut outcomes = Vec::new();
    let mut scored: Vec<PuzzleInstance> = Vec::new();
    let mut failures = Vec::new();
    for (inst, r) in ds.instances.iter().zip(results) {
        match r {
            Ok(o) => {
                outcomes.push(o);
                scored.push(inst.clone());
            }
            Err(e) => {
                log::error!("{}: {e}", inst.id);
                failures.push(format!("{}: {e}", inst.id));
            }
        }
    }
    let trace: Vec<TraceLine> = outcomes.iter().flat_map(|o| o.trace.iter().map(|event| TraceLine { instance_id: &o.instance_id, event })).collect();
    let mut artifacts = Vec::new();
    export(&dir, "outcomes.jsonl", &outcomes, &mut artifacts)?;
    export(&dir, "trace.jsonl", &trace, &mut artifacts)?;
    let report = evaluate_accuracy(&outcomes, &scored).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_metrics(&dir, &report, &mut artifacts)?;
    let cfg = serde_json::to_value(&config).expect("config serializes");
    ctx.manifest(&dir, "search", cfg, Some(info), Some(generator.as_ref()), gateway.backend_id(), artifacts, failures.clone())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("{} instance(s) failed", failures.len())))
    }
}

fn cmd_eval(ctx: &Ctx, outcomes_path: &Path) -> Res<()> {
    let dir = ctx.out_dir()?;
    let (ds, info) = ctx.dataset()?;
    let outcomes: Vec<SearchOutcome> =
        asploop_core::datagen::read_jsonl(outcomes_path).map_err(|e| Failure::Usage(format!("{}: {e}", outcomes_path.display())))?;
    let mut instances = Vec::new();
    for o in &outcomes {
        match ds.instances.iter().find(|i| i.id == o.instance_id) {
            Some(i) => instances.push(i.clone()),
            None => return usage(format!("outcome for unknown instance {}", o.instance_id)),
        }
    }
    let report = evaluate_accuracy(&outcomes, &instances).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut artifacts = Vec::new();
    write_metrics(&dir, &report, &mut artifacts)?;
    let cfg = serde_json::json!({ "outcomes": outcomes_path.display().to_string() });
    ctx.manifest(&dir, "eval", cfg, Some(info), None, "none".into(), artifacts, Vec::new())
}

fn cmd_fixtures(ctx: &Ctx, action: &FixturesAction, dir: &Path) -> Res<()> {
    match action {
        FixturesAction::Verify => {
            let set = FixtureSet::load(dir).map_err(|e| Failure::Usage(e.to_string()))?;
            let report = verify_fixtures(&set);
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            report.ensure().map_err(|e| Failure::Runtime(e.to_string()))
        }
        FixturesAction::Write => {
            let written = write_fixtures(dir, ctx.global.seed.unwrap_or(DEFAULT_SEED)).map_err(|e| Failure::Runtime(e.to_string()))?;
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let ctx = Ctx { global: cli.global, started: now() };
    let result = match &cli.command {
        Command::Solve { file, show } => cmd_solve(&ctx, file, *show),
        Command::Datagen { n, temperature, max_chosen_branch } => {
            let cfg = DatagenConfig { n_samples: *n, temperature: *temperature, max_chosen_branch: *max_chosen_branch, cap: ctx.global.cap };
            cmd_datagen(&ctx, cfg)
        }
        Command::Search { n, temperature, backtrack_limit, regen_multiplier, no_regen } => {
            let cfg = SearchConfig {
                n: *n,
                temperature: *temperature,
                backtrack_limit: *backtrack_limit,
                regen_multiplier: *regen_multiplier,
                regen_enabled: !no_regen,
                cap: ctx.global.cap,
            };
            cmd_search(&ctx, cfg)
        }
        Command::Eval { outcomes } => cmd_eval(&ctx, outcomes),
        Command::Fixtures { action, dir } => cmd_fixtures(&ctx, action, dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
