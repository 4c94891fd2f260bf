//! Ready-made physical systems: a laser-driven quantum dot and a dot coupled
//! to a single cavity mode, both with GaAs LA-phonon dephasing, plus named
//! scenario presets.
//!
//! Detunings are measured from the polaron-shifted exciton line. The bath's
//! static red shift is generated by the equal-time kernel, so the builders add
//! the same amount to the bare |X⟩ energy and the two cancel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adm::{OpenSystem, SimulationConfig, TracePolicy, DEFAULT_HARD_CAP, DEFAULT_MEMORY_BUDGET_BYTES};
use crate::bath::{polaron_shift, Bath, GaAsParameters, SpectralDensity};
use crate::error::{Error, Result};
use crate::liouville::{basis_operator, CMatrix, DensityMatrix, HamiltonianSpec, LindbladChannel, LocalDynamics};
use crate::units::HBAR_MEV_PS;

pub const GROUND: usize = 0;
pub const EXCITON_DOT: usize = 1;
pub const CAVITY_GROUND: usize = 0;
pub const CAVITY_PHOTON: usize = 1;
pub const CAVITY_EXCITON: usize = 2;

/// Time profile multiplying the peak field strength.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Envelope {
    #[default]
    Constant,
    /// exp(−4 ln2 (t − center)²/fwhm²)
    Gaussian { center_ps: f64, fwhm_ps: f64 },
}

impl Envelope {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::Gaussian { center_ps, fwhm_ps } => {
                let x = (t - center_ps) / fwhm_ps;
                (-4.0 * std::f64::consts::LN_2 * x * x).exp()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Envelope::Constant => Ok(()),
            Envelope::Gaussian { center_ps, fwhm_ps } => {
                if !center_ps.is_finite() || !(fwhm_ps > 0.0) || !fwhm_ps.is_finite() {
                    Err(Error::Validation(format!(
                        "gaussian envelope needs a finite center and positive fwhm, got {center_ps}, {fwhm_ps}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

fn yes() -> bool {
    true
}

/// Two-level dot {|0⟩, |X⟩} driven by a laser in the rotating frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivenDotModel {
    pub field_strength_per_ps: f64,
    #[serde(default)]
    pub envelope: Envelope,
    #[serde(default)]
    pub detuning_mev: f64,
    #[serde(default)]
    pub radiative_rate_per_ps: f64,
    #[serde(default)]
    pub temperature_k: f64,
    #[serde(default = "yes")]
    pub phonons: bool,
    #[serde(default)]
    pub gaas: GaAsParameters,
}

/// Dot–cavity system {|G⟩, |P⟩, |X⟩} in the single-excitation sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotCavityModel {
    /// ħg
    pub coupling_mev: f64,
    #[serde(default)]
    pub detuning_mev: f64,
    #[serde(default)]
    pub cavity_loss_per_ps: f64,
    #[serde(default)]
    pub temperature_k: f64,
    #[serde(default = "yes")]
    pub phonons: bool,
    #[serde(default)]
    pub gaas: GaAsParameters,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be non-negative, got {v}")))
    }
}

fn phonon_bath(enabled: bool, gaas: GaAsParameters, state: usize, temperature_k: f64) -> Result<(Option<Bath>, f64)> {
    if !enabled {
        return Ok((None, 0.0));
    }
    let sd = SpectralDensity::gaas(gaas, &[state])?;
    let shift = polaron_shift(&sd)?;
    Ok((
        Some(Bath {
            spectral_density: sd,
            temperature_k,
        }),
        shift,
    ))
}

impl DrivenDotModel {
    pub fn validate(&self) -> Result<()> {
        finite("field_strength_per_ps", self.field_strength_per_ps)?;
        finite("detuning_mev", self.detuning_mev)?;
        non_negative("radiative_rate_per_ps", self.radiative_rate_per_ps)?;
        non_negative("temperature_k", self.temperature_k)?;
        self.envelope.validate()
    }
}

impl DotCavityModel {
    pub fn validate(&self) -> Result<()> {
        finite("coupling_mev", self.coupling_mev)?;
        finite("detuning_mev", self.detuning_mev)?;
        non_negative("cavity_loss_per_ps", self.cavity_loss_per_ps)?;
        non_negative("temperature_k", self.temperature_k)
    }
}

/// H = (ħf(t)/2)(|0⟩⟨X| + |X⟩⟨0|) − Δ|X⟩⟨X|, channel (|0⟩⟨X|, γ), bath on |X⟩.
pub fn build_driven_dot(model: &DrivenDotModel) -> Result<OpenSystem> {
    model.validate()?;
    let (bath, shift) = phonon_bath(model.phonons, model.gaas, EXCITON_DOT, model.temperature_k)?;
    let f0 = model.field_strength_per_ps;
    let envelope = model.envelope;
    let level = -model.detuning_mev + shift;
    let hamiltonian = if matches!(envelope, Envelope::Constant) {
        HamiltonianSpec::constant(dot_hamiltonian(f0, level))?
    } else {
        HamiltonianSpec::time_dependent(2, move |t| dot_hamiltonian(f0 * envelope.at(t), level))
    };
    let channels = vec![LindbladChannel::constant(
        basis_operator(2, GROUND, EXCITON_DOT),
        model.radiative_rate_per_ps,
    )?];
    Ok(OpenSystem {
        dynamics: LocalDynamics::new(hamiltonian, channels)?,
        bath,
    })
}

fn dot_hamiltonian(field: f64, exciton_level_mev: f64) -> CMatrix {
    let mut h = CMatrix::zeros(2, 2);
    let drive = Complex64::new(0.5 * HBAR_MEV_PS * field, 0.0);
    h[(GROUND, EXCITON_DOT)] = drive;
    h[(EXCITON_DOT, GROUND)] = drive;
    h[(EXCITON_DOT, EXCITON_DOT)] = Complex64::new(exciton_level_mev, 0.0);
    h
}

/// H = ħg(|P⟩⟨X| + |X⟩⟨P|) − Δ|X⟩⟨X|, channel (|G⟩⟨P|, κ), bath on |X⟩.
pub fn build_dot_cavity(model: &DotCavityModel) -> Result<OpenSystem> {
    model.validate()?;
    let (bath, shift) = phonon_bath(model.phonons, model.gaas, CAVITY_EXCITON, model.temperature_k)?;
    let mut h = CMatrix::zeros(3, 3);
    let g = Complex64::new(model.coupling_mev, 0.0);
    h[(CAVITY_PHOTON, CAVITY_EXCITON)] = g;
    h[(CAVITY_EXCITON, CAVITY_PHOTON)] = g;
    h[(CAVITY_EXCITON, CAVITY_EXCITON)] = Complex64::new(-model.detuning_mev + shift, 0.0);
    let channels = vec![LindbladChannel::constant(
        basis_operator(3, CAVITY_GROUND, CAVITY_PHOTON),
        model.cavity_loss_per_ps,
    )?];
    Ok(OpenSystem {
        dynamics: LocalDynamics::new(HamiltonianSpec::constant(h)?, channels)?,
        bath,
    })
}

/// Long-time exciton occupation of a constantly driven dot without phonons,
/// f²/(2f² + γ² + (2Δ/ħ)²).
pub fn stationary_occupation_no_phonons(field_per_ps: f64, gamma_per_ps: f64, detuning_mev: f64) -> Result<f64> {
    let d = 2.0 * detuning_mev / HBAR_MEV_PS;
    let denom = 2.0 * field_per_ps * field_per_ps + gamma_per_ps * gamma_per_ps + d * d;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Validation(
            "stationary occupation is undefined when f, γ and Δ all vanish".into(),
        ));
    }
    Ok(field_per_ps * field_per_ps / denom)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    DrivenDot(DrivenDotModel),
    DotCavity(DotCavityModel),
}

impl ModelSpec {
    pub fn build(&self) -> Result<OpenSystem> {
        match self {
            ModelSpec::DrivenDot(m) => build_driven_dot(m),
            ModelSpec::DotCavity(m) => build_dot_cavity(m),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::DrivenDot(_) => 2,
            ModelSpec::DotCavity(_) => 3,
        }
    }

    /// Index of the exciton level.
    pub fn exciton(&self) -> usize {
        match self {
            ModelSpec::DrivenDot(_) => EXCITON_DOT,
            ModelSpec::DotCavity(_) => CAVITY_EXCITON,
        }
    }
}

/// Named basis states usable as initial conditions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLevel {
    #[default]
    Ground,
    Exciton,
    Photon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub dt_ps: f64,
    pub memory_depth: usize,
    pub duration_ps: f64,
    #[serde(default)]
    pub initial_state: InitialLevel,
    #[serde(default)]
    pub trace_policy: TracePolicy,
    #[serde(default)]
    pub memory_budget_mib: Option<f64>,
    #[serde(default)]
    pub hard_cap: Option<usize>,
}

/// Parameter scanned by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    FieldStrength,
    Detuning,
    Temperature,
    Rate,
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "field_strength" => Ok(Self::FieldStrength),
            "detuning" => Ok(Self::Detuning),
            "temperature" => Ok(Self::Temperature),
            "rate" => Ok(Self::Rate),
            other => Err(Error::Config(format!(
                "unknown sweep parameter '{other}' (expected field_strength, detuning, temperature or rate)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Model, discretization and (optionally) a sweep: everything a run needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl Scenario {
    pub fn n_steps(&self) -> Result<usize> {
        let n = &self.numerics;
        if !(n.dt_ps > 0.0) || !n.dt_ps.is_finite() {
            return Err(Error::Validation(format!("dt_ps must be positive, got {}", n.dt_ps)));
        }
        if !(n.duration_ps >= 0.0) || !n.duration_ps.is_finite() {
            return Err(Error::Validation(format!(
                "duration_ps must be non-negative, got {}",
                n.duration_ps
            )));
        }
        Ok((n.duration_ps / n.dt_ps - 1e-9).ceil().max(0.0) as usize)
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        let level = match (&self.model, self.numerics.initial_state) {
            (_, InitialLevel::Ground) => GROUND,
            (ModelSpec::DrivenDot(_), InitialLevel::Exciton) => EXCITON_DOT,
            (ModelSpec::DotCavity(_), InitialLevel::Exciton) => CAVITY_EXCITON,
            (ModelSpec::DotCavity(_), InitialLevel::Photon) => CAVITY_PHOTON,
            (ModelSpec::DrivenDot(_), InitialLevel::Photon) => {
                return Err(Error::Config("the driven dot has no photon state".into()))
            }
        };
        DensityMatrix::pure(self.model.dim(), level)
    }

    pub fn simulation_config(&self) -> Result<SimulationConfig> {
        let mut cfg = SimulationConfig::new(
            self.numerics.dt_ps,
            self.n_steps()?,
            self.numerics.memory_depth,
            self.initial_state()?,
        )
        .with_trace_policy(self.numerics.trace_policy);
        cfg.hard_cap = self.numerics.hard_cap.unwrap_or(DEFAULT_HARD_CAP);
        cfg.memory_budget_bytes = match self.numerics.memory_budget_mib {
            Some(mib) if mib > 0.0 && mib.is_finite() => (mib * 1024.0 * 1024.0) as usize,
            Some(mib) => {
                return Err(Error::Validation(format!("memory_budget_mib must be positive, got {mib}")))
            }
            None => DEFAULT_MEMORY_BUDGET_BYTES,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy with one physical parameter replaced.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Scenario {
        let mut s = self.clone();
        match (&mut s.model, parameter) {
            (ModelSpec::DrivenDot(m), SweepParameter::FieldStrength) => m.field_strength_per_ps = value,
            (ModelSpec::DotCavity(m), SweepParameter::FieldStrength) => m.coupling_mev = value,
            (ModelSpec::DrivenDot(m), SweepParameter::Detuning) => m.detuning_mev = value,
            (ModelSpec::DotCavity(m), SweepParameter::Detuning) => m.detuning_mev = value,
            (ModelSpec::DrivenDot(m), SweepParameter::Temperature) => m.temperature_k = value,
            (ModelSpec::DotCavity(m), SweepParameter::Temperature) => m.temperature_k = value,
            (ModelSpec::DrivenDot(m), SweepParameter::Rate) => m.radiative_rate_per_ps = value,
            (ModelSpec::DotCavity(m), SweepParameter::Rate) => m.cavity_loss_per_ps = value,
        }
        s
    }
}

pub const PRESET_NAMES: [&str; 5] = ["fig1a", "fig1d", "fig2c-sweep", "fig4-T1K", "fig4-T100K"];

/// Cavity coupling used by the dot–cavity presets. Not a literature value:
/// chosen so that several vacuum Rabi periods fit into the simulated window.
pub const PRESET_CAVITY_COUPLING_MEV: f64 = 0.05;

fn dot(f: f64, detuning: f64, gamma: f64, temperature: f64, phonons: bool) -> ModelSpec {
    ModelSpec::DrivenDot(DrivenDotModel {
        field_strength_per_ps: f,
        envelope: Envelope::Constant,
        detuning_mev: detuning,
        radiative_rate_per_ps: gamma,
        temperature_k: temperature,
        phonons,
        gaas: GaAsParameters::standard(),
    })
}

fn cavity(temperature: f64) -> ModelSpec {
    ModelSpec::DotCavity(DotCavityModel {
        coupling_mev: PRESET_CAVITY_COUPLING_MEV,
        detuning_mev: 1.0,
        cavity_loss_per_ps: 0.1,
        temperature_k: temperature,
        phonons: true,
        gaas: GaAsParameters::standard(),
    })
}

fn numerics(dt: f64, memory_depth: usize, duration: f64, initial: InitialLevel) -> Numerics {
    Numerics {
        dt_ps: dt,
        memory_depth,
        duration_ps: duration,
        initial_state: initial,
        trace_policy: TracePolicy::MonitorOnly,
        memory_budget_mib: None,
        hard_cap: None,
    }
}

/// Scenario registered under `name`.
pub fn preset(name: &str) -> Option<Scenario> {
    let s = match name {
        "fig1a" => Scenario {
            model: dot(1.0, 0.0, 0.05, 0.0, false),
            numerics: numerics(0.05, 1, 50.0, InitialLevel::Ground),
            sweep: None,
        },
        "fig1d" => Scenario {
            model: dot(1.0, 1.0, 0.05, 100.0, true),
            numerics: numerics(0.5, 7, 200.0, InitialLevel::Ground),
            sweep: None,
        },
        "fig2c-sweep" => Scenario {
            model: dot(1.0, 1.0, 0.05, 1.0, true),
            numerics: numerics(0.5, 10, 300.0, InitialLevel::Ground),
            sweep: Some(SweepSpec {
                parameter: SweepParameter::FieldStrength,
                values: vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0],
            }),
        },
        "fig4-T1K" => Scenario {
            model: cavity(1.0),
            numerics: numerics(0.5, 10, 200.0, InitialLevel::Exciton),
            sweep: None,
        },
        "fig4-T100K" => Scenario {
            model: cavity(100.0),
            numerics: numerics(0.5, 7, 200.0, InitialLevel::Exciton),
            sweep: None,
        },
        _ => return None,
    };
    Some(s)
}

/// Human-readable remarks about non-measured preset values.
pub fn preset_notes(name: &str) -> Vec<String> {
    match name {
        "fig4-T1K" | "fig4-T100K" => vec![format!(
            "cavity coupling ħg = {PRESET_CAVITY_COUPLING_MEV} meV is an estimate, not a measured value"
        )],
        _ => Vec::new(),
    }
}
