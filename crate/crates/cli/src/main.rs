mod config;
mod converge;
mod simulate;
mod verify;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdpath::bath::cache::KernelCache;
use qdpath::models::{SweepParameter, PRESET_NAMES};
use rayon::prelude::*;
use serde_json::json;

use config::LoadedScenario;
use simulate::{create_dir, execute, write_json, write_run};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: String) -> Self {
        Self { code: EXIT_INPUT, message }
    }

    pub fn internal(message: String) -> Self {
        Self { code: EXIT_NUMERICAL, message }
    }
}

impl From<qdpath::Error> for CliError {
    fn from(e: qdpath::Error) -> Self {
        match e {
            qdpath::Error::Numerical { .. } | qdpath::Error::Internal(_) => Self::internal(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "qdpath", version, about = "Path-integral dynamics of quantum dots coupled to LA phonons")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Kernel table cache directory
    #[arg(long, global = true, env = "QDPATH_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// TOML scenario file; overrides the preset where both are given
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario name
    #[arg(long)]
    preset: Option<String>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one scenario
    Run(ScenarioArgs),
    /// Run a scenario over a list of parameter values
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// field_strength, detuning, temperature or rate
        #[arg(long)]
        parameter: Option<String>,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Option<Vec<f64>>,
    },
    /// Memory-depth and time-step convergence study
    Converge {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Number of dt halvings including the base step
        #[arg(long, default_value_t = 3)]
        dt_levels: usize,
        /// Largest accepted deviation in the exciton population
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
    /// Cross-check the engine against the reference solvers
    Verify {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List presets, or print one as TOML
    Presets {
        #[arg(long)]
        preset: Option<String>,
    },
}

fn preset_description(name: &str) -> &'static str {
    match name {
        "fig1a" => "driven dot, f=1/ps, resonant, no phonons, 50 ps",
        "fig1d" => "driven dot, f=1/ps, detuning 1 meV, T=100 K, 200 ps",
        "fig2c-sweep" => "driven dot, detuning 1 meV, T=1 K, sweep over field strength",
        "fig4-T1K" => "dot-cavity, exciton start, detuning 1 meV, T=1 K",
        "fig4-T100K" => "dot-cavity, exciton start, detuning 1 meV, T=100 K",
        _ => "",
    }
}

fn load(args: &ScenarioArgs) -> Result<LoadedScenario, CliError> {
    config::load(args.config.as_deref(), args.preset.as_deref())
}

fn cmd_run(args: &ScenarioArgs, cache: Option<&KernelCache>) -> Result<(), CliError> {
    let loaded = load(args)?;
    let (series, info) = execute(&loaded.scenario, cache)?;
    write_run(&args.out, &loaded, &loaded.scenario, &series, &info)?;
    let d = &series.diagnostics;
    eprintln!(
        "{} steps, max trace drift {:.2e}, {} history classes, peak ADM {} bytes, {:.2} s",
        series.len().saturating_sub(1),
        d.max_trace_drift,
        d.history_classes,
        d.peak_memory_bytes,
        d.total_wall_time_s
    );
    Ok(())
}

fn cmd_sweep(
    args: &ScenarioArgs,
    parameter: Option<&str>,
    values: Option<Vec<f64>>,
    cache: Option<&KernelCache>,
) -> Result<(), CliError> {
    let loaded = load(args)?;
    let from_file = loaded.scenario.sweep.clone();
    let parameter: SweepParameter = match (parameter, &from_file) {
        (Some(p), _) => p.parse()?,
        (None, Some(s)) => s.parameter,
        (None, None) => return Err(CliError::input("no sweep parameter given".into())),
    };
    let values = match (values, from_file) {
        (Some(v), _) => v,
        (None, Some(s)) => s.values,
        (None, None) => Vec::new(),
    };
    if values.is_empty() {
        return Err(CliError::input("sweep needs at least one value".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::input(format!("sweep value {v} is not finite")));
    }
    let exciton = loaded.scenario.model.exciton();
    create_dir(&args.out)?;
    let means: Vec<f64> = values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut scenario = loaded.scenario.with_parameter(parameter, v);
            scenario.sweep = None;
            let (series, info) = execute(&scenario, cache)?;
            write_run(&args.out.join(format!("point_{i:02}")), &loaded, &scenario, &series, &info)?;
            Ok(series.tail_mean_population(exciton, 0.1))
        })
        .collect::<Result<_, CliError>>()?;
    let mut csv = String::from("value,mean_pop_exciton_final_10pct\n");
    for (v, m) in values.iter().zip(&means) {
        let _ = writeln!(csv, "{v},{m}");
    }
    let path = args.out.join("sweep_summary.csv");
    fs::write(&path, csv).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    for (v, m) in values.iter().zip(&means) {
        eprintln!("{v}: {m:.4}");
    }
    Ok(())
}

fn cmd_converge(
    args: &ScenarioArgs,
    dt_levels: usize,
    tolerance: f64,
    cache: Option<&KernelCache>,
) -> Result<(), CliError> {
    let loaded = load(args)?;
    let report = converge::study(&loaded.scenario, cache, dt_levels, tolerance)?;
    create_dir(&args.out)?;
    converge::write(&args.out, &report)?;
    eprintln!(
        "recommended dt {} ps, memory depth {}",
        report.recommended_dt_ps, report.recommended_memory_depth
    );
    Ok(())
}

fn cmd_verify(out: Option<&Path>) -> Result<(), CliError> {
    let checks = verify::run_checks()?;
    for c in &checks {
        println!(
            "[{}] {}: max deviation {:.2e} (threshold {:.0e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.max_deviation,
            c.threshold
        );
    }
    if let Some(dir) = out {
        create_dir(dir)?;
        write_json(&dir.join("verify.json"), &json!({ "checks": checks }))?;
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::internal(format!("{failed} verification check(s) failed")));
    }
    Ok(())
}

fn cmd_presets(name: Option<&str>) -> Result<(), CliError> {
    match name {
        None => {
            for n in PRESET_NAMES {
                println!("{n:<12} {}", preset_description(n));
            }
        }
        Some(n) => {
            let table = config::preset_table(n)?;
            let text = toml::to_string(&table).map_err(|e| CliError::internal(e.to_string()))?;
            print!("{text}");
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::internal(e.to_string()))?;
    }
    let cache = cli.cache_dir.map(KernelCache::new);
    let cache = cache.as_ref();
    match cli.command {
        Command::Run(args) => cmd_run(&args, cache),
        Command::Sweep { scenario, parameter, values } => cmd_sweep(&scenario, parameter.as_deref(), values, cache),
        Command::Converge { scenario, dt_levels, tolerance } => cmd_converge(&scenario, dt_levels, tolerance, cache),
        Command::Verify { out } => cmd_verify(out.as_deref()),
        Command::Presets { preset } => cmd_presets(preset.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
