//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;

pub const HBAR_SI: f64 = 1.054571817e-34;
pub const EV: f64 = 1.602176634e-19;
pub const KB_MEV: f64 = 0.08617333262;
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Written out again in SI units, independent of the library's unit handling.
pub fn j_reference(w_ps: f64) -> f64 {
    let w = w_ps * 1e12;
    let (rho, c) = (5370.0, 5110.0);
    let (ae, ah) = (4e-9, 4e-9 / 1.15);
    let b = 7.0 * EV * (-w * w * ae * ae / (4.0 * c * c)).exp()
        + 3.5 * EV * (-w * w * ah * ah / (4.0 * c * c)).exp();
    w.powi(3) / (4.0 * std::f64::consts::PI.powi(2) * rho * HBAR_SI * c.powi(5)) * b * b * 1e-12
}

pub fn coth_factor(w: f64, t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        1.0 / (HBAR_MEV_PS * w / (2.0 * KB_MEV * t)).tanh()
    }
}

/// Trapezoid rule on 10⁶ panels over (0, 20] ps⁻¹.
pub fn trapezoid_kernel(dt: f64, lag: usize, t: f64) -> Complex64 {
    let n = 1_000_000;
    let h = 20.0 / n as f64;
    let tau = lag as f64 * dt;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..=n {
        let w = k as f64 * h;
        let weight = if k == n { 0.5 } else { 1.0 };
        let g = j_reference(w) / (w * w);
        let one_minus_cos = 1.0 - (w * dt).cos();
        let z = if lag == 0 {
            Complex64::new(
                g * coth_factor(w, t) * one_minus_cos,
                g * ((w * dt).sin() - w * dt),
            )
        } else {
            Complex64::new(
                2.0 * g * one_minus_cos * coth_factor(w, t) * (w * tau).cos(),
                -2.0 * g * one_minus_cos * (w * tau).sin(),
            )
        };
        acc += z * weight;
    }
    acc * h
}
