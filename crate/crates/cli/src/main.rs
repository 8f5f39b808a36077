use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thinscope::validation::DEFAULT_VALIDATION_SEED;
use thinscope_cli::config::{preset, ExperimentConfig, PRESETS};
use thinscope_cli::{run_scenario, run_validation, threads_from_env, CliError};

#[derive(Parser)]
#[command(name = "thinscope", version, about = "Topological-derivative imaging of thin inclusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write maps, sidecars and a report.
    Run(RunArgs),
    /// Run validation suites and print or write a JSON report.
    Validate {
        /// specfun, series-equivalence, direction-symmetry, corollary-regimes or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_VALIDATION_SEED)]
        seed: u64,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// List shipped presets, or print one.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Preset name used as the base configuration.
    #[arg(long)]
    scenario: Option<String>,
    /// Key-value configuration file applied over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Direction counts, e.g. `4`, `4,5` or `1..6`.
    #[arg(long)]
    n_directions: Option<String>,
    /// Noise level in dB, or `none`.
    #[arg(long)]
    snr_db: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid resolution per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn resolve(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    if args.scenario.is_none() && args.config.is_none() {
        return Err(CliError::Config("give --scenario, --config or both".into()));
    }
    let mut cfg = ExperimentConfig::default();
    if let Some(name) = &args.scenario {
        let text = preset(name).ok_or_else(|| {
            let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!("unknown scenario {name:?}; presets: {}", names.join(", ")))
        })?;
        cfg.merge_text(text)?;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.merge_text(&text)?;
    }
    if let Some(n) = &args.n_directions {
        cfg.set("n_directions", n)?;
    }
    if let Some(s) = &args.snr_db {
        cfg.set("snr_db", s)?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(g) = args.grid {
        cfg.grid = g;
    }
    if let Some(d) = &args.out_dir {
        cfg.out_dir = d.clone();
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let threads = threads_from_env(std::env::var("THINSCOPE_THREADS").ok().as_deref())?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let mut stdout = std::io::stdout().lock();
    let out_err = |e: std::io::Error| CliError::Runtime(e.to_string());
    match cli.command {
        Command::Run(args) => {
            let cfg = resolve(&args)?;
            let report = run_scenario(&cfg)?;
            for m in &report.maps {
                writeln!(stdout, "{:<8} {:<4} concentration {:.4}  {}", m.label, m.map, m.concentration, cfg.out_dir.join(&m.csv).display())
                    .map_err(out_err)?;
            }
        }
        Command::Validate { suite, seed, report } => {
            let result = run_validation(&suite, seed)?;
            let json = serde_json::to_string_pretty(&result).map_err(|e| CliError::Runtime(e.to_string()))?;
            match &report {
                Some(path) => {
                    std::fs::write(path, format!("{json}\n"))
                        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                    for s in &result.suites {
                        writeln!(stdout, "{:<20} {}", s.suite, if s.pass { "PASS" } else { "FAIL" }).map_err(out_err)?;
                    }
                }
                None => writeln!(stdout, "{json}").map_err(out_err)?,
            }
            if !result.pass {
                let failed: Vec<_> = result.suites.iter().filter(|s| !s.pass).map(|s| s.suite.as_str()).collect();
                return Err(CliError::ValidationFailed(failed.join(", ")));
            }
        }
        Command::Presets { show: None } => {
            for (name, text) in PRESETS {
                let summary = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                writeln!(stdout, "{name:<20} {summary}").map_err(out_err)?;
            }
        }
        Command::Presets { show: Some(name) } => {
            let text = preset(&name).ok_or_else(|| CliError::Config(format!("unknown preset {name:?}")))?;
            write!(stdout, "{text}").map_err(out_err)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("thinscope: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
