//! Spectral densities J(ω) of the oscillator coupling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{ELECTRON_VOLT_J, HBAR_SI, NM_IN_M, PS_IN_S};

/// Deformation-potential coupling of a spherical Gaussian electron–hole pair to
/// longitudinal acoustic phonons.
/// Fields missing from a deserialized table take their [`GaAsParameters::standard`] values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaAsParameters {
    pub mass_density_kg_m3: f64,
    pub sound_velocity_m_s: f64,
    pub electron_potential_ev: f64,
    pub hole_potential_ev: f64,
    pub electron_radius_nm: f64,
    pub hole_radius_nm: f64,
}

impl Default for GaAsParameters {
    fn default() -> Self {
        Self::standard()
    }
}

impl GaAsParameters {
    /// GaAs with a 4 nm electron radius and a_e/a_h = 1.15.
    pub fn standard() -> Self {
        Self::with_electron_radius(4.0)
    }

    pub fn with_electron_radius(radius_nm: f64) -> Self {
        Self {
            mass_density_kg_m3: 5370.0,
            sound_velocity_m_s: 5110.0,
            electron_potential_ev: 7.0,
            hole_potential_ev: -3.5,
            electron_radius_nm: radius_nm,
            hole_radius_nm: radius_nm / 1.15,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("mass_density_kg_m3", self.mass_density_kg_m3),
            ("sound_velocity_m_s", self.sound_velocity_m_s),
            ("electron_radius_nm", self.electron_radius_nm),
            ("hole_radius_nm", self.hole_radius_nm),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.electron_potential_ev.is_finite() || !self.hole_potential_ev.is_finite() {
            return Err(Error::Validation("deformation potentials must be finite".into()));
        }
        Ok(())
    }

    /// Prefactor ω³ coefficient in ps² and the Gaussian exponents (ps²) of the
    /// electron and hole form factors.
    fn coefficients(&self) -> (f64, f64, f64) {
        // J[s⁻¹] = ω_SI³/(4π²ρħc⁵)·(D_e e^{-ω_SI²a_e²/4c²} − D_h e^{-ω_SI²a_h²/4c²})²
        // with ω_SI = ω·1e12; converting J to ps⁻¹ multiplies by 1e-12.
        let c = self.sound_velocity_m_s;
        let prefactor_si =
            1.0 / (4.0 * std::f64::consts::PI.powi(2) * self.mass_density_kg_m3 * HBAR_SI * c.powi(5));
        // ω³ with ω in ps⁻¹ contributes PS_IN_S⁻³, result scaled by PS_IN_S.
        let prefactor = prefactor_si * ELECTRON_VOLT_J * ELECTRON_VOLT_J * PS_IN_S / PS_IN_S.powi(3);
        let to_ps = |a_nm: f64| {
            let a = a_nm * NM_IN_M / c; // seconds
            let a_ps = a / PS_IN_S;
            a_ps * a_ps / 4.0
        };
        (prefactor, to_ps(self.electron_radius_nm), to_ps(self.hole_radius_nm))
    }

    fn evaluate(&self, omega: f64) -> f64 {
        let (pre, se, sh) = self.coefficients();
        let w2 = omega * omega;
        let bracket = self.electron_potential_ev * (-w2 * se).exp() - self.hole_potential_ev * (-w2 * sh).exp();
        pre * omega * w2 * bracket * bracket
    }

    /// Root of d ln J/dω = 0, i.e. 3B + 2ωB' = 0 for the form-factor bracket B.
    fn peak(&self) -> Option<f64> {
        let (_, se, sh) = self.coefficients();
        let (de, dh) = (self.electron_potential_ev, self.hole_potential_ev);
        let g = |w: f64| {
            let w2 = w * w;
            let ee = (-w2 * se).exp();
            let eh = (-w2 * sh).exp();
            let b = de * ee - dh * eh;
            let db = -2.0 * w * (de * se * ee - dh * sh * eh);
            3.0 * b + 2.0 * w * db
        };
        // g > 0 near the origin (∝ 3B(0)) as long as B(0) ≠ 0
        let b0 = de - dh;
        if b0 == 0.0 {
            return None;
        }
        let sign0 = g(1e-9).signum();
        let mut hi = 1e-3 / se.max(sh).sqrt();
        let mut lo = 1e-12;
        while g(hi).signum() == sign0 {
            lo = hi;
            hi *= 1.5;
            if hi > 1e6 {
                return None;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if g(mid).signum() == sign0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffShape {
    /// e^{-(ω/ω_c)²}
    Gaussian,
    /// e^{-ω/ω_c}
    Exponential,
}

/// J sampled on an increasing grid, linearly interpolated in between.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    omega: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.len() != values.len() || omega.len() < 2 {
            return Err(Error::Config(
                "tabulated spectral density needs at least two (ω, J) samples".into(),
            ));
        }
        if omega[0] != 0.0 || values[0] != 0.0 {
            return Err(Error::Validation(
                "tabulated spectral density must start at ω = 0 with J(0) = 0".into(),
            ));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("tabulated frequency grid must be increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("tabulated values must be finite".into()));
        }
        Ok(Self { omega, values })
    }

    pub fn max_frequency(&self) -> f64 {
        *self.omega.last().unwrap()
    }

    fn evaluate(&self, omega: f64) -> Result<f64> {
        let last = self.max_frequency();
        if omega > last {
            return Err(Error::Extrapolation(format!(
                "ω = {omega} ps⁻¹ beyond tabulated range [0, {last}]"
            )));
        }
        let i = self.omega.partition_point(|&w| w <= omega).clamp(1, self.omega.len() - 1);
        let (w0, w1) = (self.omega[i - 1], self.omega[i]);
        let (j0, j1) = (self.values[i - 1], self.values[i]);
        Ok(j0 + (j1 - j0) * (omega - w0) / (w1 - w0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralShape {
    GaAsDeformation(GaAsParameters),
    /// J(ω) = α ω^a · cutoff(ω/ω_c); α in ps^{a-1}.
    PowerLawCutoff {
        prefactor: f64,
        exponent: f64,
        cutoff_per_ps: f64,
        cutoff_shape: CutoffShape,
    },
    Tabulated(TabulatedDensity),
}

/// J_{νμ}(ω): one shape shared by every active (ν, μ) pair, zero elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    shape: SpectralShape,
    active_pairs: Vec<(usize, usize)>,
}

impl SpectralDensity {
    pub fn new(shape: SpectralShape, active_pairs: Vec<(usize, usize)>) -> Result<Self> {
        match &shape {
            SpectralShape::GaAsDeformation(p) => p.validate()?,
            SpectralShape::PowerLawCutoff {
                prefactor,
                exponent,
                cutoff_per_ps,
                ..
            } => {
                if !(*prefactor >= 0.0) || !(*exponent > 0.0) || !(*cutoff_per_ps > 0.0) {
                    return Err(Error::Validation(
                        "power-law density needs prefactor ≥ 0, exponent > 0 and cutoff > 0".into(),
                    ));
                }
            }
            SpectralShape::Tabulated(_) => {}
        }
        let mut pairs = active_pairs;
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self {
            shape,
            active_pairs: pairs,
        })
    }

    /// Same J on every pair of the given coupled states.
    pub fn on_states(shape: SpectralShape, states: &[usize]) -> Result<Self> {
        let pairs = states
            .iter()
            .flat_map(|&a| states.iter().map(move |&b| (a, b)))
            .collect();
        Self::new(shape, pairs)
    }

    pub fn gaas(params: GaAsParameters, states: &[usize]) -> Result<Self> {
        Self::on_states(SpectralShape::GaAsDeformation(params), states)
    }

    pub fn shape(&self) -> &SpectralShape {
        &self.shape
    }

    pub fn active_pairs(&self) -> &[(usize, usize)] {
        &self.active_pairs
    }

    pub fn is_active(&self, nu: usize, mu: usize) -> bool {
        self.active_pairs.binary_search(&(nu, mu)).is_ok()
    }

    /// J(ω) in ps⁻¹ for ω in ps⁻¹.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::Validation(format!(
                "spectral density requires ω ≥ 0, got {omega}"
            )));
        }
        Ok(match &self.shape {
            SpectralShape::GaAsDeformation(p) => p.evaluate(omega),
            SpectralShape::PowerLawCutoff {
                prefactor,
                exponent,
                cutoff_per_ps,
                cutoff_shape,
            } => {
                if omega == 0.0 {
                    return Ok(0.0);
                }
                let x = omega / cutoff_per_ps;
                let cut = match cutoff_shape {
                    CutoffShape::Gaussian => (-x * x).exp(),
                    CutoffShape::Exponential => (-x).exp(),
                };
                prefactor * omega.powf(*exponent) * cut
            }
            SpectralShape::Tabulated(t) => t.evaluate(omega)?,
        })
    }

    /// Frequency of the maximum of J.
    pub fn peak_frequency(&self) -> Result<f64> {
        match &self.shape {
            SpectralShape::GaAsDeformation(p) => p
                .peak()
                .ok_or_else(|| Error::numerical("could not bracket the spectral maximum", f64::NAN)),
            SpectralShape::PowerLawCutoff {
                exponent,
                cutoff_per_ps,
                cutoff_shape,
                ..
            } => Ok(match cutoff_shape {
                CutoffShape::Gaussian => cutoff_per_ps * (0.5 * exponent).sqrt(),
                CutoffShape::Exponential => cutoff_per_ps * exponent,
            }),
            SpectralShape::Tabulated(t) => {
                let (i, _) = t
                    .values
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
                Ok(t.omega[i])
            }
        }
    }

    /// Upper integration limit: the largest frequency where `envelope(ω)·max(ω, 1)`
    /// still exceeds `eps`, widened by 10%. For tabulated data, the grid end.
    pub(crate) fn truncation_frequency<E: Fn(f64) -> f64>(&self, envelope: E, eps: f64) -> f64 {
        if let SpectralShape::Tabulated(t) = &self.shape {
            return t.max_frequency();
        }
        // Geometric scan from 1e-3 to 1e5 ps⁻¹
        let mut last_above = 0.0;
        let mut w = 1e-3;
        while w < 1e5 {
            if envelope(w) * w.max(1.0) > eps {
                last_above = w;
            }
            w *= 1.01;
        }
        1.1 * last_above.max(1e-3)
    }

    /// Parameters that determine the kernel table, as raw bits, for hashing.
    pub(crate) fn fingerprint(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut push = |x: f64| out.extend_from_slice(&x.to_bits().to_le_bytes());
        match &self.shape {
            SpectralShape::GaAsDeformation(p) => {
                push(1.0);
                for v in [
                    p.mass_density_kg_m3,
                    p.sound_velocity_m_s,
                    p.electron_potential_ev,
                    p.hole_potential_ev,
                    p.electron_radius_nm,
                    p.hole_radius_nm,
                ] {
                    push(v);
                }
            }
            SpectralShape::PowerLawCutoff {
                prefactor,
                exponent,
                cutoff_per_ps,
                cutoff_shape,
            } => {
                push(2.0);
                push(*prefactor);
                push(*exponent);
                push(*cutoff_per_ps);
                push(match cutoff_shape {
                    CutoffShape::Gaussian => 0.0,
                    CutoffShape::Exponential => 1.0,
                });
            }
            SpectralShape::Tabulated(t) => {
                push(3.0);
                push(t.omega.len() as f64);
                for (&w, &j) in t.omega.iter().zip(&t.values) {
                    push(w);
                    push(j);
                }
            }
        }
        for &(a, b) in &self.active_pairs {
            out.extend_from_slice(&(a as u64).to_le_bytes());
            out.extend_from_slice(&(b as u64).to_le_bytes());
        }
        out
    }

    /// Same shape with every coupling constant multiplied by `s` (J scales by s²).
    pub fn scaled_coupling(&self, s: f64) -> Result<Self> {
        let shape = match &self.shape {
            SpectralShape::GaAsDeformation(p) => SpectralShape::GaAsDeformation(GaAsParameters {
                electron_potential_ev: p.electron_potential_ev * s,
                hole_potential_ev: p.hole_potential_ev * s,
                ..*p
            }),
            SpectralShape::PowerLawCutoff {
                prefactor,
                exponent,
                cutoff_per_ps,
                cutoff_shape,
            } => SpectralShape::PowerLawCutoff {
                prefactor: prefactor * s * s,
                exponent: *exponent,
                cutoff_per_ps: *cutoff_per_ps,
                cutoff_shape: *cutoff_shape,
            },
            SpectralShape::Tabulated(t) => SpectralShape::Tabulated(TabulatedDensity {
                omega: t.omega.clone(),
                values: t.values.iter().map(|v| v * s * s).collect(),
            }),
        };
        Self::new(shape, self.active_pairs.clone())
    }
}
