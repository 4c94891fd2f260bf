//! Pure dephasing of an undriven two-level system has the closed form
//! ρ_01(t) = ρ_01(0)·exp(−Φ(t)),
//! Φ(t) = ∫ J(ω)/ω² [coth(ħω/2k_BT)(1 − cos ωt) + i(sin ωt − ωt)] dω.
//! Without a drive the paths are constant, so the path integral is exact as
//! long as every pair of points lies within the memory depth.

use num_complex::Complex64;

use qdpath::adm::{run, OpenSystem, SimulationConfig};
use qdpath::bath::{Bath, GaAsParameters, SpectralDensity};
use qdpath::liouville::{CMatrix, DensityMatrix, HamiltonianSpec, LocalDynamics};

const HBAR_MEV_PS: f64 = 0.6582119569;
const KB_MEV: f64 = 0.08617333262;

fn phi(sd: &SpectralDensity, t: f64, temp: f64) -> Complex64 {
    // Simpson on (0, 25] ps⁻¹
    let n = 400_000;
    let h = 25.0 / n as f64;
    let f = |w: f64| {
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let g = sd.evaluate(w).unwrap() / (w * w);
        let coth = if temp == 0.0 { 1.0 } else { 1.0 / (HBAR_MEV_PS * w / (2.0 * KB_MEV * temp)).tanh() };
        Complex64::new(g * coth * (1.0 - (w * t).cos()), g * ((w * t).sin() - w * t))
    };
    let mut acc = f(0.0) + f(25.0);
    for k in 1..n {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

fn check(temp: f64) {
    let sd = SpectralDensity::gaas(GaAsParameters::standard(), &[1]).unwrap();
    let system = OpenSystem {
        dynamics: LocalDynamics::new(HamiltonianSpec::zero(2), vec![]).unwrap(),
        bath: Some(Bath { spectral_density: sd.clone(), temperature_k: temp }),
    };
    let half = Complex64::new(0.5, 0.0);
    let rho0 = DensityMatrix::new(CMatrix::from_element(2, 2, half)).unwrap();
    let cfg = SimulationConfig::new(0.5, 10, 10, rho0);
    let series = run(&cfg, &system).unwrap();
    for (l, rho) in series.states.iter().enumerate() {
        let t = series.times[l];
        let want = half * (-phi(&sd, t, temp)).exp();
        let got = rho[(1, 0)];
        assert!((got - want).norm() < 1e-9, "T = {temp} K, t = {t}: {got} vs {want}");
        assert!((rho[(0, 1)] - want.conj()).norm() < 1e-9);
        assert!((rho[(1, 1)].re - 0.5).abs() < 1e-14);
    }
}

#[test]
fn coherence_decay_at_low_temperature() {
    check(4.0);
}

#[test]
fn coherence_decay_at_zero_temperature() {
    check(0.0);
}

#[test]
fn coherence_decay_at_high_temperature() {
    check(77.0);
}
