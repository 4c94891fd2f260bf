use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use qdpath::adm::run_with_kernels;
use qdpath::bath::cache::{cache_key, KernelCache};
use qdpath::bath::compute_kernel_table;
use qdpath::models::Scenario;
use qdpath::series::TimeSeries;
use serde_json::json;

use crate::config::LoadedScenario;
use crate::CliError;

/// Identity of the kernel table a run used.
#[derive(Clone, Debug, Default)]
pub struct KernelInfo {
    pub key: Option<String>,
    pub cache_hit: Option<bool>,
}

pub fn execute(scenario: &Scenario, cache: Option<&KernelCache>) -> Result<(TimeSeries, KernelInfo), CliError> {
    let config = scenario.simulation_config()?;
    let system = scenario.model.build()?;
    let mut info = KernelInfo::default();
    let kernels = match &system.bath {
        None => None,
        Some(bath) => {
            let sd = &bath.spectral_density;
            let (dt, n_c, t) = (config.dt, config.memory_depth, bath.temperature_k);
            match cache {
                Some(c) => {
                    let cached = c.load_or_compute(sd, dt, n_c, t)?;
                    info.key = Some(cached.key);
                    info.cache_hit = Some(cached.hit);
                    Some(cached.table)
                }
                None => {
                    info.key = Some(cache_key(sd, dt, n_c, t));
                    Some(compute_kernel_table(sd, dt, n_c, t)?)
                }
            }
        }
    };
    let series = run_with_kernels(&config, &system, kernels.as_ref())?;
    Ok((series, info))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::input(format!("{}: {e}", path.display()))
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::internal(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// `trajectory.csv` and `meta.json` in `dir`.
pub fn write_run(
    dir: &Path,
    loaded: &LoadedScenario,
    scenario: &Scenario,
    series: &TimeSeries,
    kernel: &KernelInfo,
) -> Result<(), CliError> {
    create_dir(dir)?;
    let csv_path = dir.join("trajectory.csv");
    let file = File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    series.write_csv(BufWriter::new(file), &[])?;
    let meta = json!({
        "code_version": env!("CARGO_PKG_VERSION"),
        "preset": loaded.preset,
        "notes": loaded.notes,
        "config": scenario,
        "n_steps": series.len().saturating_sub(1),
        "kernel": {
            "cache_key": kernel.key,
            "cache_hit": kernel.cache_hit,
        },
        "diagnostics": series.diagnostics,
    });
    write_json(&dir.join("meta.json"), &meta)
}
