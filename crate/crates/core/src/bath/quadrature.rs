//! Adaptive Gauss–Kronrod (7/15) quadrature on a fixed panel decomposition.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 40;

/// Result of an adaptive integration: value and accumulated error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut samples = [0.0f64; 14];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let (lo, hi) = (f(centre - dx), f(centre + dx));
        samples[2 * j] = lo;
        samples[2 * j + 1] = hi;
        kronrod += WGK[j] * (lo + hi);
        abs_sum += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    // QUADPACK error rescaling
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((samples[2 * j] - mean).abs() + (samples[2 * j + 1] - mean).abs());
    }
    let abs_half = half.abs();
    let res_abs = abs_sum * abs_half;
    let res_asc = asc * abs_half;
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (kronrod * half, err)
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: (f64, f64),
    tol: f64,
    depth: u32,
) -> Result<Quadrature> {
    let (value, error) = whole;
    if error <= tol || error <= 50.0 * f64::EPSILON * value.abs() {
        return Ok(Quadrature { value, error });
    }
    if depth >= MAX_DEPTH {
        return Err(Error::numerical(
            format!("adaptive quadrature did not converge on [{a}, {b}]"),
            error,
        ));
    }
    let mid = 0.5 * (a + b);
    let left = adapt(f, a, mid, gk15(f, a, mid), 0.5 * tol, depth + 1)?;
    let right = adapt(f, mid, b, gk15(f, mid, b), 0.5 * tol, depth + 1)?;
    Ok(Quadrature {
        value: left.value + right.value,
        error: left.error + right.error,
    })
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    adapt(&f, a, b, gk15(&f, a, b), tol, 0)
}

/// Integrates over consecutive panels `[breaks[i], breaks[i+1]]`, splitting the
/// tolerance evenly. Panels are processed in order, so the result is
/// reproducible bit for bit.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<Quadrature> {
    if breaks.len() < 2 {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    let panel_tol = tol / (breaks.len() - 1) as f64;
    let mut total = Quadrature {
        value: 0.0,
        error: 0.0,
    };
    for w in breaks.windows(2) {
        let q = adapt(&f, w[0], w[1], gk15(&f, w[0], w[1]), panel_tol, 0)?;
        total.value += q.value;
        total.error += q.error;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(q.value, 64.0 / 6.0 - 8.0 + 2.0, epsilon = 1e-13);
    }

    #[test]
    fn oscillatory_gaussian() {
        // ∫_0^∞ e^{-x²} cos(5x) dx = √π/2 e^{-25/4}
        let breaks: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let q = integrate_panels(|x| (-x * x).exp() * (5.0 * x).cos(), &breaks, 1e-14).unwrap();
        let exact = 0.5 * std::f64::consts::PI.sqrt() * (-6.25f64).exp();
        assert!((q.value - exact).abs() < 1e-14);
        assert!(q.error < 1e-13);
    }

    #[test]
    fn non_convergence_reports_residual() {
        let r = integrate(|x| if x > 0.3 { 1.0 / (x - 0.3).sqrt() } else { 0.0 }, 0.0, 1.0, 1e-300);
        match r {
            Err(Error::Numerical { residual, .. }) => assert!(residual > 0.0),
            other => panic!("expected numerical error, got {other:?}"),
        }
    }
}
