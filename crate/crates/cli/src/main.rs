//! `esperanto`: run ℓ-sweeps, render reports, validate configs and manage
//! the member cache.
//!
//! Exit codes: 0 success, 1 config error, 2 some members failed,
//! 3 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use esperanto::pipeline::{
    emit_report, load_record, render_report, run_experiment, run_with_cache, write_record, Cache,
    ConfigError, ExperimentConfig, PipelineError, ReportFormat, CACHE_DIR_ENV,
};

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "esperanto",
    version,
    about = "Spectral gaps of congruence quotients and genus/gonality bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config and store a result record.
    Run {
        config: PathBuf,
        /// Recompute every member and leave the cache untouched.
        #[arg(long)]
        no_cache: bool,
        /// Also write a report next to the record.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Render a stored result record.
    Report {
        record: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Tabular)]
        format: Format,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a config without running it.
    Check { config: PathBuf },
    /// Member cache maintenance.
    Cache {
        #[command(subcommand)]
        command: CacheCommand,
    },
}

#[derive(Subcommand)]
enum CacheCommand {
    /// Remove stale and unreadable cache entries.
    Gc {
        /// Cache directory; defaults to the config's, then `$ESPERANTO_CACHE_DIR`.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tabular,
    Structured,
    Plotdata,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Tabular => ReportFormat::Tabular,
            Format::Structured => ReportFormat::Structured,
            Format::Plotdata => ReportFormat::Plotdata,
        }
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn pipeline_failure(e: PipelineError) -> ExitCode {
    match e {
        PipelineError::Config(e) => fail(EXIT_CONFIG, e),
        other => fail(EXIT_INTERNAL, other),
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::load(path).map_err(|e| match e {
        ConfigError::Read { .. } => fail(EXIT_CONFIG, e),
        e => fail(EXIT_CONFIG, format!("{}: {e}", path.display())),
    })
}

fn run(config: PathBuf, no_cache: bool, format: Option<Format>) -> ExitCode {
    let cfg = match load(&config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let result = if no_cache {
        run_with_cache(&cfg, None)
    } else {
        run_experiment(&cfg)
    };
    let rec = match result {
        Ok(r) => r,
        Err(e) => return pipeline_failure(e),
    };
    let path = match write_record(&cfg.output.dir, &rec) {
        Ok(p) => p,
        Err(e) => return pipeline_failure(e),
    };
    print!("{}", render_report(&rec, ReportFormat::Tabular));
    for m in &rec.body.members {
        if let Some(err) = &m.error {
            eprintln!("ℓ = {}: {err}", m.ell);
        }
    }
    for e in &rec.run.cache_errors {
        eprintln!("cache write failed for {e}");
    }
    eprintln!(
        "record {} ({} members, {} cached, {:.2}s)",
        path.display(),
        rec.body.members.len(),
        rec.cache_hits(),
        rec.run.total_seconds
    );
    if let Some(f) = format {
        let f = ReportFormat::from(f);
        let out = path.with_extension(format!("report.{}", f.extension()));
        if let Err(e) = emit_report(&rec, f, &out) {
            return pipeline_failure(e);
        }
        eprintln!("report {}", out.display());
    }
    if rec.failed_members() > 0 {
        ExitCode::from(EXIT_PARTIAL)
    } else {
        ExitCode::SUCCESS
    }
}

fn report(record: PathBuf, format: Format, out: Option<PathBuf>) -> ExitCode {
    let rec = match load_record(&record) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    match out {
        Some(path) => match emit_report(&rec, format.into(), &path) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(EXIT_INTERNAL, e),
        },
        None => {
            print!("{}", render_report(&rec, format.into()));
            ExitCode::SUCCESS
        }
    }
}

fn check(config: PathBuf) -> ExitCode {
    let cfg = match load(&config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let ells = cfg.ells().expect("validated");
    let catalog = cfg.catalog().expect("validated");
    println!(
        "ok: {} over ℓ ∈ {:?}, action {:?}",
        catalog.id(),
        ells,
        cfg.family.action
    );
    ExitCode::SUCCESS
}

fn cache_gc(dir: Option<PathBuf>, config: Option<PathBuf>) -> ExitCode {
    let dir = match (dir, config) {
        (Some(d), _) => d,
        (None, Some(c)) => match load(&c) {
            Ok(cfg) => cfg.cache_dir(),
            Err(code) => return code,
        },
        (None, None) => match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) => PathBuf::from(d),
            None => {
                return fail(
                    EXIT_CONFIG,
                    format!("give --dir, --config or set {CACHE_DIR_ENV}"),
                )
            }
        },
    };
    match Cache::new(&dir).gc() {
        Ok(s) => {
            println!("{}: kept {}, removed {}", dir.display(), s.kept, s.removed);
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_INTERNAL, e),
    }
}

fn main() -> ExitCode {
    // clap's own usage-error code would collide with the partial-failure code
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run {
            config,
            no_cache,
            format,
        } => run(config, no_cache, format),
        Command::Report {
            record,
            format,
            out,
        } => report(record, format, out),
        Command::Check { config } => check(config),
        Command::Cache {
            command: CacheCommand::Gc { dir, config },
        } => cache_gc(dir, config),
    }
}
