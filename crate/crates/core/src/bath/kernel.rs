//! Memory kernels of the discretized influence functional.
//!
//! For a lag τ = l·Δt > 0
//!
//! ```text
//! K(τ) = 2 ∫ dω J(ω)/ω² (1 − cos ωΔt) [coth(ħω/2k_BT) cos ωτ − i sin ωτ]
//! ```
//!
//! and at equal times
//!
//! ```text
//! K(0) = ∫ dω J(ω)/ω² [coth(ħω/2k_BT)(1 − cos ωΔt) + i sin ωΔt − i ωΔt]
//! ```
//!
//! The last term of K(0) is a static level shift, ħ∫J(ω)/ω dω per coupled
//! state; it is reported separately as the polaron shift.

use num_complex::Complex64;
use rayon::prelude::*;

use super::quadrature::{integrate_panels, Quadrature};
use super::spectral::SpectralDensity;
use crate::error::{Error, Result};
use crate::units::{thermal_factor, HBAR_MEV_PS};

/// Default absolute tolerance per kernel entry, split evenly between the real
/// and imaginary parts.
pub const KERNEL_TOLERANCE: f64 = 1e-12;

const TAIL_EPS: f64 = 1e-16;

/// K_{νμ}(l·Δt) for l = 0..=memory_depth on every active pair.
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryKernelTable {
    memory_depth: usize,
    dt: f64,
    temperature_k: f64,
    pairs: Vec<(usize, usize)>,
    values: Vec<Vec<Complex64>>,
    residuals: Vec<Vec<f64>>,
    polaron_shift_mev: Vec<f64>,
}

impl MemoryKernelTable {
    /// Builds a table from precomputed values (`values[pair][lag]`, lags
    /// 0..=memory_depth). Residuals are set to zero.
    pub fn from_values(
        dt: f64,
        temperature_k: f64,
        pairs: Vec<(usize, usize)>,
        values: Vec<Vec<Complex64>>,
        polaron_shift_mev: Vec<f64>,
    ) -> Result<Self> {
        if pairs.len() != values.len() {
            return Err(Error::Config("one kernel row is required per active pair".into()));
        }
        let lags = values.first().map_or(1, |v| v.len());
        if lags == 0 || values.iter().any(|v| v.len() != lags) {
            return Err(Error::Config("kernel rows must share a non-zero length".into()));
        }
        let residuals = values.iter().map(|v| vec![0.0; v.len()]).collect();
        Ok(Self {
            memory_depth: lags - 1,
            dt,
            temperature_k,
            pairs,
            values,
            residuals,
            polaron_shift_mev,
        })
    }

    pub(crate) fn from_parts(
        memory_depth: usize,
        dt: f64,
        temperature_k: f64,
        pairs: Vec<(usize, usize)>,
        values: Vec<Vec<Complex64>>,
        residuals: Vec<Vec<f64>>,
        polaron_shift_mev: Vec<f64>,
    ) -> Self {
        Self {
            memory_depth,
            dt,
            temperature_k,
            pairs,
            values,
            residuals,
            polaron_shift_mev,
        }
    }

    /// Largest lag (in steps) covered by the table.
    pub fn memory_depth(&self) -> usize {
        self.memory_depth
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.values
    }

    pub fn residual_rows(&self) -> &[Vec<f64>] {
        &self.residuals
    }

    /// K_{νμ}(lag·Δt); zero for inactive pairs or lags beyond the table.
    pub fn kernel(&self, nu: usize, mu: usize, lag: usize) -> Complex64 {
        match self.pairs.iter().position(|&p| p == (nu, mu)) {
            Some(i) if lag <= self.memory_depth => self.values[i][lag],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Largest residual estimate over all entries.
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .flatten()
            .fold(0.0, |acc: f64, &r| acc.max(r))
    }

    /// Level shift (meV) per state; states beyond the vector have no shift.
    pub fn polaron_shift_mev(&self) -> &[f64] {
        &self.polaron_shift_mev
    }

    pub fn polaron_shift_of(&self, state: usize) -> f64 {
        self.polaron_shift_mev.get(state).copied().unwrap_or(0.0)
    }

    /// max over pairs of |K(lag·Δt)|.
    pub fn lag_magnitude(&self, lag: usize) -> f64 {
        self.values
            .iter()
            .map(|row| row.get(lag).map_or(0.0, |z| z.norm()))
            .fold(0.0, f64::max)
    }
}

fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

fn panel_breaks(omega_max: f64, period_scale: f64) -> Vec<f64> {
    // zero-bounded half periods of the fastest oscillation, at most ω_max/32 wide
    let width = (std::f64::consts::PI / period_scale).min(omega_max / 32.0);
    let n = (omega_max / width).ceil() as usize;
    (0..=n).map(|k| (k as f64 * width).min(omega_max)).collect()
}

struct KernelIntegrator<'a> {
    sd: &'a SpectralDensity,
    dt: f64,
    temperature_k: f64,
    tol: f64,
}

impl KernelIntegrator<'_> {
    fn j_over_w2(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        // The spectral density is validated at construction; a tabulated
        // lookup past the grid cannot happen because integration stops there.
        self.sd.evaluate(w).unwrap_or(0.0) / (w * w)
    }

    fn omega_max(&self) -> f64 {
        let dt = self.dt;
        let t = self.temperature_k;
        self.sd.truncation_frequency(
            |w| {
                let j2 = self.j_over_w2(w);
                8.0 * j2 * thermal_factor(w, t) + j2 * w * dt
            },
            TAIL_EPS,
        )
    }

    fn entry(&self, lag: usize, omega_max: f64) -> Result<(Complex64, f64)> {
        let dt = self.dt;
        let t = self.temperature_k;
        let tau = lag as f64 * dt;
        let breaks = panel_breaks(omega_max, tau.max(dt));
        let (re, im): (Quadrature, Quadrature) = if lag == 0 {
            let re = integrate_panels(
                |w| {
                    if w <= 0.0 {
                        return 0.0;
                    }
                    self.j_over_w2(w) * thermal_factor(w, t) * one_minus_cos(w * dt)
                },
                &breaks,
                self.tol,
            )?;
            let im = integrate_panels(
                |w| self.j_over_w2(w) * ((w * dt).sin() - w * dt),
                &breaks,
                self.tol,
            )?;
            (re, im)
        } else {
            let re = integrate_panels(
                |w| {
                    if w <= 0.0 {
                        return 0.0;
                    }
                    2.0 * self.j_over_w2(w) * one_minus_cos(w * dt) * thermal_factor(w, t) * (w * tau).cos()
                },
                &breaks,
                self.tol,
            )?;
            let im = integrate_panels(
                |w| -2.0 * self.j_over_w2(w) * one_minus_cos(w * dt) * (w * tau).sin(),
                &breaks,
                self.tol,
            )?;
            (re, im)
        };
        Ok((Complex64::new(re.value, im.value), re.error + im.error))
    }
}

/// ħ ∫ J(ω)/ω dω in meV, the static red shift of a state with this coupling.
pub fn polaron_shift(sd: &SpectralDensity) -> Result<f64> {
    let j_over_w = |w: f64| if w <= 0.0 { 0.0 } else { sd.evaluate(w).unwrap_or(0.0) / w };
    let omega_max = sd.truncation_frequency(j_over_w, TAIL_EPS);
    let breaks = panel_breaks(omega_max, 1.0);
    let q = integrate_panels(j_over_w, &breaks, KERNEL_TOLERANCE)?;
    Ok(HBAR_MEV_PS * q.value)
}

/// Kernel table with the default per-entry tolerance.
pub fn compute_kernel_table(
    sd: &SpectralDensity,
    dt: f64,
    memory_depth: usize,
    temperature_k: f64,
) -> Result<MemoryKernelTable> {
    compute_kernel_table_with_tolerance(sd, dt, memory_depth, temperature_k, KERNEL_TOLERANCE)
}

pub fn compute_kernel_table_with_tolerance(
    sd: &SpectralDensity,
    dt: f64,
    memory_depth: usize,
    temperature_k: f64,
    tolerance: f64,
) -> Result<MemoryKernelTable> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Validation(format!("dt must be positive, got {dt}")));
    }
    if memory_depth < 1 {
        return Err(Error::Validation("memory depth must be at least 1".into()));
    }
    if !(temperature_k >= 0.0) || !temperature_k.is_finite() {
        return Err(Error::Validation(format!(
            "temperature must be non-negative, got {temperature_k}"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Validation("quadrature tolerance must be positive".into()));
    }
    let integrator = KernelIntegrator {
        sd,
        dt,
        temperature_k,
        tol: 0.5 * tolerance,
    };
    let omega_max = integrator.omega_max();
    let lags: Vec<(Complex64, f64)> = (0..=memory_depth)
        .into_par_iter()
        .map(|lag| integrator.entry(lag, omega_max))
        .collect::<Result<_>>()?;

    let pairs = sd.active_pairs().to_vec();
    let row: Vec<Complex64> = lags.iter().map(|(k, _)| *k).collect();
    let res_row: Vec<f64> = lags.iter().map(|(_, e)| *e).collect();
    let values = vec![row; pairs.len()];
    let residuals = vec![res_row; pairs.len()];

    let n_states = pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
    let shift = if pairs.is_empty() { 0.0 } else { polaron_shift(sd)? };
    let polaron_shift_mev = (0..n_states)
        .map(|s| if sd.is_active(s, s) { shift } else { 0.0 })
        .collect();

    Ok(MemoryKernelTable::from_parts(
        memory_depth,
        dt,
        temperature_k,
        pairs,
        values,
        residuals,
        polaron_shift_mev,
    ))
}

/// Smallest lag l such that every lag l' ≥ l has max-pair |K(l')| at most
/// `threshold` times the table maximum. `threshold` is clamped to (0, 1].
pub fn memory_time_estimate(table: &MemoryKernelTable, threshold: f64) -> usize {
    let threshold = threshold.clamp(f64::MIN_POSITIVE, 1.0);
    let mags: Vec<f64> = (0..=table.memory_depth()).map(|l| table.lag_magnitude(l)).collect();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0;
    }
    let bound = threshold * peak;
    let mut l = mags.len();
    while l > 0 && mags[l - 1] <= bound {
        l -= 1;
    }
    l.min(table.memory_depth())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::spectral::{CutoffShape, GaAsParameters, SpectralShape};

    fn gaas() -> SpectralDensity {
        SpectralDensity::gaas(GaAsParameters::standard(), &[1]).unwrap()
    }

    #[test]
    fn zero_density_gives_zero_table() {
        let sd = SpectralDensity::on_states(
            SpectralShape::PowerLawCutoff {
                prefactor: 0.0,
                exponent: 3.0,
                cutoff_per_ps: 2.0,
                cutoff_shape: CutoffShape::Gaussian,
            },
            &[1],
        )
        .unwrap();
        let t = compute_kernel_table(&sd, 0.5, 4, 10.0).unwrap();
        assert!(t.rows().iter().flatten().all(|z| z.norm() == 0.0));
        assert_eq!(t.polaron_shift_of(1), 0.0);
        assert_eq!(memory_time_estimate(&t, 0.01), 0);
    }

    #[test]
    fn equal_time_kernel_vanishes_quadratically() {
        let sd = gaas();
        let mut prev_ratio: Option<f64> = None;
        for dt in [0.04, 0.02, 0.01] {
            let k0 = compute_kernel_table(&sd, dt, 1, 4.0).unwrap().kernel(1, 1, 0);
            let ratio = k0.norm() / (dt * dt);
            assert!(k0.norm() < 2e-3);
            if let Some(p) = prev_ratio {
                // K(0; dt)/dt² converges
                assert!((ratio / p - 1.0f64).abs() < 0.1, "{ratio} vs {p}");
            }
            prev_ratio = Some(ratio);
        }
    }

    #[test]
    fn lag_kernels_scale_with_dt_squared() {
        let sd = gaas();
        let coarse = compute_kernel_table(&sd, 0.02, 50, 4.0).unwrap();
        let fine = compute_kernel_table(&sd, 0.01, 100, 4.0).unwrap();
        // same τ = 1 ps
        let a = coarse.kernel(1, 1, 50) / (0.02 * 0.02);
        let b = fine.kernel(1, 1, 100) / (0.01 * 0.01);
        assert!((a - b).norm() / b.norm() < 0.01);
    }

    #[test]
    fn threshold_one_and_estimate_bounds() {
        let t = compute_kernel_table(&gaas(), 0.5, 8, 100.0).unwrap();
        assert_eq!(memory_time_estimate(&t, 1.0), 0);
        let e = memory_time_estimate(&t, 1e-3);
        assert!(e <= 8);
        let tail = t.lag_magnitude(8);
        let argmax = (0..=8).max_by(|&a, &b| t.lag_magnitude(a).total_cmp(&t.lag_magnitude(b))).unwrap();
        assert!(tail < t.lag_magnitude(argmax));
    }

    #[test]
    fn validation() {
        let sd = gaas();
        assert!(compute_kernel_table(&sd, 0.0, 4, 1.0).is_err());
        assert!(compute_kernel_table(&sd, 0.5, 0, 1.0).is_err());
        assert!(compute_kernel_table(&sd, 0.5, 4, -1.0).is_err());
        assert!(compute_kernel_table(&sd, 0.5, 4, 0.0).is_ok());
    }
}
