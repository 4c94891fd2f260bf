//! Memory-depth and time-step convergence study around a scenario.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qdpath::bath::cache::KernelCache;
use qdpath::models::Scenario;
use rayon::prelude::*;
use serde::Serialize;

use crate::simulate::{execute, write_json};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub study: &'static str,
    pub dt_ps: f64,
    pub memory_depth: usize,
    /// max_t |pop_X − pop_X of the next finer setting| on the coarsest grid
    pub max_dev_to_next: Option<f64>,
    /// same against the finest setting of the study
    pub max_dev_to_reference: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tolerance: f64,
    pub rows: Vec<Row>,
    pub recommended_dt_ps: f64,
    pub recommended_memory_depth: usize,
}

/// Population trace sampled every `stride` steps.
fn sampled(pop: &[f64], stride: usize) -> Vec<f64> {
    pop.iter().step_by(stride).copied().collect()
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Index of the first row from which every successive deviation stays within
/// `tol`; the last row when none qualifies.
fn first_converged(devs: &[Option<f64>], tol: f64) -> usize {
    let mut best = devs.len() - 1;
    for i in (0..devs.len()).rev() {
        match devs[i] {
            None => {}
            Some(d) if d <= tol => best = i,
            Some(_) => break,
        }
    }
    best
}

fn annotate(rows: &mut [Row], traces: &[Vec<f64>]) {
    let reference = traces.last().unwrap();
    for i in 0..rows.len() {
        if i + 1 < rows.len() {
            rows[i].max_dev_to_next = Some(max_dev(&traces[i], &traces[i + 1]));
            rows[i].max_dev_to_reference = Some(max_dev(&traces[i], reference));
        }
    }
}

pub fn study(
    scenario: &Scenario,
    cache: Option<&KernelCache>,
    dt_levels: usize,
    tolerance: f64,
) -> Result<Report, CliError> {
    if dt_levels == 0 {
        return Err(CliError::input("--dt-levels must be at least 1".into()));
    }
    if !(tolerance > 0.0) {
        return Err(CliError::input("--tolerance must be positive".into()));
    }
    let base = scenario.numerics.memory_depth;
    let cap = scenario.simulation_config()?.hard_cap;
    let exciton = scenario.model.exciton();
    let base_dt = scenario.numerics.dt_ps;

    let depths: Vec<usize> = (base.saturating_sub(2).max(1)..=(base + 2).min(cap)).collect();
    let depth_runs: Vec<Vec<f64>> = depths
        .par_iter()
        .map(|&n_c| {
            let mut s = scenario.clone();
            s.numerics.memory_depth = n_c;
            execute(&s, cache).map(|(series, _)| series.population(exciton))
        })
        .collect::<Result<_, _>>()?;
    let mut depth_rows: Vec<Row> = depths
        .iter()
        .map(|&n_c| Row {
            study: "memory_depth",
            dt_ps: base_dt,
            memory_depth: n_c,
            max_dev_to_next: None,
            max_dev_to_reference: None,
        })
        .collect();
    annotate(&mut depth_rows, &depth_runs);

    // dt ladder at a fixed memory window m·dt_base, n_c doubling with each halving
    let top = 1usize << (dt_levels - 1);
    let m = ((base as f64 / top as f64).round() as usize).max(1);
    if m * top > cap {
        return Err(CliError::input(format!(
            "{dt_levels} dt levels need memory depth {} at the finest step, above the cap {cap}",
            m * top
        )));
    }
    let ladder: Vec<(f64, usize)> = (0..dt_levels).map(|k| (base_dt / (1 << k) as f64, m << k)).collect();
    let dt_runs: Vec<Vec<f64>> = ladder
        .par_iter()
        .enumerate()
        .map(|(k, &(dt, n_c))| {
            let mut s = scenario.clone();
            s.numerics.dt_ps = dt;
            s.numerics.memory_depth = n_c;
            execute(&s, cache).map(|(series, _)| sampled(&series.population(exciton), 1 << k))
        })
        .collect::<Result<_, _>>()?;
    let mut dt_rows: Vec<Row> = ladder
        .iter()
        .map(|&(dt, n_c)| Row {
            study: "dt",
            dt_ps: dt,
            memory_depth: n_c,
            max_dev_to_next: None,
            max_dev_to_reference: None,
        })
        .collect();
    annotate(&mut dt_rows, &dt_runs);

    let n_idx = first_converged(&depth_rows.iter().map(|r| r.max_dev_to_next).collect::<Vec<_>>(), tolerance);
    let dt_idx = first_converged(&dt_rows.iter().map(|r| r.max_dev_to_next).collect::<Vec<_>>(), tolerance);
    Ok(Report {
        tolerance,
        recommended_dt_ps: dt_rows[dt_idx].dt_ps,
        recommended_memory_depth: depth_rows[n_idx].memory_depth,
        rows: depth_rows.into_iter().chain(dt_rows).collect(),
    })
}

pub fn write(out: &Path, report: &Report) -> Result<(), CliError> {
    let fmt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut csv = String::from("study,dt_ps,memory_depth,max_dev_to_next,max_dev_to_reference\n");
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.study,
            r.dt_ps,
            r.memory_depth,
            fmt(r.max_dev_to_next),
            fmt(r.max_dev_to_reference)
        );
    }
    let path = out.join("converge.csv");
    fs::write(&path, csv).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let value = serde_json::to_value(report).map_err(|e| CliError::internal(e.to_string()))?;
    write_json(&out.join("converge.json"), &value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_index() {
        assert_eq!(first_converged(&[Some(1.0), Some(1e-4), Some(1e-5), None], 1e-3), 1);
        assert_eq!(first_converged(&[Some(1e-4), Some(1.0), Some(1e-5), None], 1e-3), 2);
        assert_eq!(first_converged(&[Some(1.0), Some(1.0), None], 1e-3), 2);
        assert_eq!(first_converged(&[None], 1e-3), 0);
    }

    #[test]
    fn sampling() {
        assert_eq!(sampled(&[0.0, 1.0, 2.0, 3.0, 4.0], 2), vec![0.0, 2.0, 4.0]);
        assert_eq!(max_dev(&[0.0, 1.0], &[0.5, 0.0, 9.0]), 1.0);
    }
}
