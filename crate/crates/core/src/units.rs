//! Unit system: energies in meV, times in ps, frequencies in ps⁻¹.

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 0.08617333262;

/// Reduced Planck constant in J·s.
pub const HBAR_SI: f64 = 1.054571817e-34;

/// Elementary charge in C (1 eV in J).
pub const ELECTRON_VOLT_J: f64 = 1.602176634e-19;

/// Seconds per picosecond.
pub const PS_IN_S: f64 = 1.0e-12;

/// Metres per nanometre.
pub const NM_IN_M: f64 = 1.0e-9;

/// Converts an energy in meV to an angular frequency in ps⁻¹.
pub fn mev_to_per_ps(energy_mev: f64) -> f64 {
    energy_mev / HBAR_MEV_PS
}

/// Converts an angular frequency in ps⁻¹ to an energy in meV.
pub fn per_ps_to_mev(omega: f64) -> f64 {
    omega * HBAR_MEV_PS
}

/// coth(ħω / 2k_BT); returns 1 at T = 0.
pub fn thermal_factor(omega: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        return 1.0;
    }
    let x = HBAR_MEV_PS * omega / (2.0 * KB_MEV_PER_K * temperature_k);
    if x > 40.0 {
        1.0
    } else {
        1.0 / x.tanh()
    }
}
