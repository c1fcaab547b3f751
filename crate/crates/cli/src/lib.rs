//! Library side of the `floquet` command: config parsing, task execution,
//! artifact output and SVG rendering.

pub mod config;
pub mod output;
pub mod recipes;
pub mod render;
pub mod tasks;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use config::RunConfig;
use output::{write_atomic, write_manifest, FileDigest, Manifest};
use tasks::TaskError;

pub const OUT_DIR_ENV: &str = "FLOQUET_OUT_DIR";

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 1;

/// Where a config came from: a file on disk or an embedded recipe.
pub struct Source {
    pub label: String,
    pub text: String,
    pub base: PathBuf,
}

impl Source {
    /// `recipe:NAME` selects an embedded recipe; anything else is a path.
    pub fn resolve(arg: &str) -> Result<Self, TaskError> {
        if let Some(name) = arg.strip_prefix("recipe:") {
            let text = recipes::get(name).ok_or_else(|| {
                TaskError::Config(config::ConfigError { field: "recipe".into(), line: None, message: format!("unknown recipe `{name}`") })
            })?;
            return Ok(Self { label: arg.to_string(), text: text.to_string(), base: PathBuf::from(".") });
        }
        let p = Path::new(arg);
        let text = std::fs::read_to_string(p).map_err(|e| {
            TaskError::Config(config::ConfigError { field: "config".into(), line: None, message: format!("cannot read {arg}: {e}") })
        })?;
        let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { label: arg.to_string(), text, base })
    }

    pub fn load(&self) -> Result<RunConfig, TaskError> {
        let cfg = RunConfig::parse(&self.text)?;
        cfg.validate(&self.base).map_err(|mut e| {
            e.line = config::locate(&self.text, &e.field);
            TaskError::Config(e)
        })?;
        Ok(cfg)
    }
}

/// Output directory: explicit override, then the environment, then the
/// config, then `out/<task>`.
pub fn output_dir(cfg: &RunConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    cfg.output_dir.as_ref().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out").join(cfg.task.name()))
}

pub struct RunSummary {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub wall_time_s: f64,
}

pub fn run(src: &Source, explicit_out: Option<&Path>) -> Result<RunSummary, TaskError> {
    let cfg = src.load()?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let artifacts = tasks::run(&cfg, &src.base)?;
    let dir = output_dir(&cfg, explicit_out);
    let io = |e: std::io::Error| TaskError::Io(format!("writing to {}: {e}", dir.display()));
    let mut files = Vec::new();
    let mut outputs = Vec::new();
    for a in &artifacts {
        let p = dir.join(&a.name);
        write_atomic(&p, &a.bytes).map_err(io)?;
        outputs.push(FileDigest::of(a.name.clone(), &a.bytes));
        files.push(p);
    }
    let mut inputs = Vec::new();
    for p in cfg.input_files(&src.base) {
        let bytes = std::fs::read(&p).map_err(|e| TaskError::Io(format!("{}: {e}", p.display())))?;
        inputs.push(FileDigest::of(p.display().to_string(), &bytes));
    }
    let wall_time_s = clock.elapsed().as_secs_f64();
    let manifest = Manifest {
        tool: "floquet",
        version: env!("CARGO_PKG_VERSION"),
        task: cfg.task.name().to_string(),
        seed: cfg.seed,
        parallel: floquet_core::par::is_parallel(),
        config: FileDigest::of(src.label.clone(), src.text.as_bytes()),
        inputs,
        outputs,
        started_unix_s: started,
        wall_time_s,
    };
    files.push(write_manifest(&dir, &manifest).map_err(io)?);
    Ok(RunSummary { dir, files, wall_time_s })
}

pub fn exit_code(e: &TaskError) -> i32 {
    match e {
        TaskError::Config(_) => EXIT_CONFIG,
        TaskError::Numerical { .. } => EXIT_NUMERICAL,
        TaskError::Io(_) => EXIT_IO,
    }
}
