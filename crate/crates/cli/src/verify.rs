//! Built-in cross-checks against the reference solvers.

use num_complex::Complex64;
use qdpath::adm::{run, AugmentedDensityMatrix};
use qdpath::bath::compute_kernel_table;
use qdpath::influence::{build_influence_table, InfluenceTable};
use qdpath::liouville::{
    basis_operator, build_step_propagator, CMatrix, DensityMatrix, HamiltonianSpec, LindbladChannel, Superoperator,
};
use qdpath::models::preset;
use qdpath::oracles::{full_path_sum, lindblad_ode_solve};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub max_deviation: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn check(name: &'static str, max_deviation: f64, threshold: f64) -> Check {
    Check {
        name,
        max_deviation,
        threshold,
        pass: max_deviation <= threshold,
    }
}

fn max_rel(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = b.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    (a - b).iter().fold(0.0f64, |acc, z| acc.max(z.norm())) / scale
}

/// Largest relative deviation between the ADM and the full path sum over
/// steps 1..=n with n = n_c.
fn adm_vs_path_sum(scenario_name: &str, n: usize) -> Result<f64, CliError> {
    let scenario = preset(scenario_name).expect("built-in preset");
    let system = scenario.model.build()?;
    let bath = system.bath.as_ref().expect("phonon preset");
    let dt = scenario.numerics.dt_ps;
    let kernels = compute_kernel_table(&bath.spectral_density, dt, n, bath.temperature_k)?;
    let influence = build_influence_table(&kernels, system.dim())?;
    let rho0 = scenario.initial_state()?;
    let props: Vec<Superoperator> = (0..n)
        .map(|k| system.dynamics.step_propagator(k as f64 * dt, dt))
        .collect::<Result<_, _>>()?;
    let mut adm = AugmentedDensityMatrix::initialize(&rho0, &influence, n)?;
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        adm.step(&props[k - 1])?;
        let oracle = full_path_sum(rho0.matrix(), &props[..k], &influence, None)?;
        worst = worst.max(max_rel(&adm.reduce(), &oracle));
    }
    Ok(worst)
}

fn phonon_free_vs_ode() -> Result<f64, CliError> {
    let mut scenario = preset("fig1a").expect("built-in preset");
    scenario.numerics.dt_ps = 0.01;
    scenario.numerics.duration_ps = 20.0;
    let system = scenario.model.build()?;
    let series = run(&scenario.simulation_config()?, &system)?;
    let d = &system.dynamics;
    let rho0 = scenario.initial_state()?;
    let ode = lindblad_ode_solve(&d.hamiltonian, &d.channels, rho0.matrix(), &series.times, 1e-3)?;
    let exciton = scenario.model.exciton();
    Ok(series
        .states
        .iter()
        .zip(&ode)
        .map(|(a, b)| (a[(exciton, exciton)].re - b[(exciton, exciton)].re).abs())
        .fold(0.0, f64::max))
}

fn test_system() -> Result<(HamiltonianSpec, Vec<LindbladChannel>), CliError> {
    let mut h = CMatrix::zeros(2, 2);
    h[(0, 1)] = Complex64::new(0.4, 0.2);
    h[(1, 0)] = Complex64::new(0.4, -0.2);
    h[(1, 1)] = Complex64::new(-0.3, 0.0);
    let channels = vec![
        LindbladChannel::constant(basis_operator(2, 0, 1), 0.3)?,
        LindbladChannel::constant(basis_operator(2, 1, 1), 0.1)?,
    ];
    Ok((HamiltonianSpec::constant(h)?, channels))
}

/// Path sum with trivial influence vs the ODE solver at t = 3·dt.
fn path_sum_vs_ode() -> Result<f64, CliError> {
    let (h, channels) = test_system()?;
    let dt = 0.1;
    let m = build_step_propagator(&h, &channels, 0.0, dt)?;
    let rho0 = DensityMatrix::pure(2, 1)?;
    let sum = full_path_sum(rho0.matrix(), &vec![m; 3], &InfluenceTable::trivial(2, 3), None)?;
    let ode = lindblad_ode_solve(&h, &channels, rho0.matrix(), &[3.0 * dt], 1e-4)?;
    Ok(max_rel(&sum, &ode[0]))
}

/// Path sum invariance under reversed enumeration order.
fn path_sum_order() -> Result<f64, CliError> {
    let scenario = preset("fig1d").expect("built-in preset");
    let system = scenario.model.build()?;
    let bath = system.bath.as_ref().expect("phonon preset");
    let kernels = compute_kernel_table(&bath.spectral_density, 0.5, 4, bath.temperature_k)?;
    let influence = build_influence_table(&kernels, 2)?;
    let m = system.dynamics.step_propagator(0.0, 0.5)?;
    let props = vec![m; 4];
    let rho0 = DensityMatrix::pure(2, 0)?;
    let a = full_path_sum(rho0.matrix(), &props, &influence, None)?;
    let reverse = |k: usize| 255 - k;
    let b = full_path_sum(rho0.matrix(), &props, &influence, Some(&reverse))?;
    Ok(max_rel(&a, &b))
}

pub fn run_checks() -> Result<Vec<Check>, CliError> {
    Ok(vec![
        check("adm vs path sum, driven dot, T=100 K, n=n_c=4", adm_vs_path_sum("fig1d", 4)?, 1e-12),
        check("adm vs path sum, dot-cavity, T=1 K, n=n_c=3", adm_vs_path_sum("fig4-T1K", 3)?, 1e-12),
        check("phonon-free adm vs ODE, f=1, dt=0.01 ps, 20 ps", phonon_free_vs_ode()?, 1e-4),
        check("trivial-influence path sum vs ODE, n=3", path_sum_vs_ode()?, 1e-9),
        check("path sum enumeration order", path_sum_order()?, 1e-13),
    ])
}
