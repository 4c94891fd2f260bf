//! Slow reference solvers used to check the ADM engine.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::influence::InfluenceTable;
use crate::liouville::{CMatrix, HamiltonianSpec, LindbladChannel, Superoperator};
use crate::units::HBAR_MEV_PS;

/// Largest number of path tuples the brute-force sum will enumerate.
pub const MAX_PATHS: usize = 100_000_000;

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct Compensated {
    sum: Complex64,
    carry: Complex64,
}

impl Compensated {
    fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.carry.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.carry.im);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

fn neumaier(sum: f64, x: f64, carry: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *carry += (sum - t) + x;
    } else {
        *carry += (x - t) + sum;
    }
    t
}

/// Direct sum over all ket/bra path pairs.
///
/// `propagators[l]` carries the state from point l to point l + 1, so the
/// result is ρ̄ at point n = propagators.len(). Points 1..=n carry the
/// influence functional, truncated at the table's memory depth; the initial
/// point enters only through ρ̄(0). `order` optionally permutes the
/// enumeration of intermediate paths (a bijection on 0..P^n).
pub fn full_path_sum(
    initial: &CMatrix,
    propagators: &[Superoperator],
    influence: &InfluenceTable,
    order: Option<&dyn Fn(usize) -> usize>,
) -> Result<CMatrix> {
    let n_dim = initial.nrows();
    let p_count = n_dim * n_dim;
    let n = propagators.len();
    if influence.dim() != n_dim || propagators.iter().any(|m| m.dim() != n_dim) {
        return Err(Error::Config("dimension mismatch in path sum".into()));
    }
    let histories = (p_count as f64).powi(n as i32);
    if histories * p_count as f64 > MAX_PATHS as f64 {
        return Err(Error::Validation(format!(
            "path sum over {p_count}^{} tuples exceeds the {MAX_PATHS} limit",
            n + 1
        )));
    }
    let histories = histories as usize;
    let rho0 = initial.as_slice();
    let mut result = CMatrix::zeros(n_dim, n_dim);
    if n == 0 {
        return Ok(initial.clone());
    }
    let pair = |p: usize| (p % n_dim, p / n_dim);
    let mut path = vec![0usize; n + 1];
    let mut segment = vec![(0usize, 0usize); n];
    for last in 0..p_count {
        let mut acc = Compensated::default();
        for k in 0..histories {
            let mut code = order.map_or(k, |f| f(k));
            // path[0..n] from the history code, path[n] fixed
            for slot in path.iter_mut().take(n) {
                *slot = code % p_count;
                code /= p_count;
            }
            path[n] = last;
            let mut w = rho0[path[0]];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for l in 1..=n {
                w *= propagators[l - 1].matrix()[(path[l], path[l - 1])];
            }
            for (s, &p) in segment.iter_mut().zip(&path[1..]) {
                *s = pair(p);
            }
            w *= influence.truncated_action(&segment).exp();
            acc.add(w);
        }
        let (nu, mu) = pair(last);
        result[(nu, mu)] = acc.value();
    }
    Ok(result)
}

fn lindblad_rhs(h: &CMatrix, ops: &[(CMatrix, f64)], rho: &CMatrix) -> CMatrix {
    let minus_i_over_hbar = Complex64::new(0.0, -1.0 / HBAR_MEV_PS);
    let mut d = (h * rho - rho * h) * minus_i_over_hbar;
    for (a, gamma) in ops {
        let ad = a.adjoint();
        let ada = &ad * a;
        let term = a * rho * &ad - (&ada * rho + rho * &ada) * Complex64::new(0.5, 0.0);
        d += term * Complex64::new(*gamma, 0.0);
    }
    d
}

/// Classical RK4 for dρ/dt = −(i/ħ)[H, ρ] + Σ γ(AρA† − ½{A†A, ρ}) written
/// directly on matrices. Returns ρ at every entry of `times` (ascending,
/// starting at or after 0, ρ(0) = `initial`), using steps no longer than
/// `max_step`.
pub fn lindblad_ode_solve(
    h: &HamiltonianSpec,
    channels: &[LindbladChannel],
    initial: &CMatrix,
    times: &[f64],
    max_step: f64,
) -> Result<Vec<CMatrix>> {
    if !(max_step > 0.0) || !max_step.is_finite() {
        return Err(Error::Validation(format!("max_step must be positive, got {max_step}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Validation("output times must be ascending and non-negative".into()));
    }
    let at = |t: f64| -> Result<(CMatrix, Vec<(CMatrix, f64)>)> {
        let ops = channels
            .iter()
            .map(|c| Ok((c.operator().clone(), c.rate(t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((h.at(t)?, ops))
    };
    let mut rho = initial.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        let steps = (span / max_step).ceil().max(0.0) as usize;
        if steps > 0 {
            let dt = span / steps as f64;
            let c = |x: f64| Complex64::new(x, 0.0);
            for s in 0..steps {
                let t0 = t + s as f64 * dt;
                let (h0, o0) = at(t0)?;
                let (hm, om) = at(t0 + 0.5 * dt)?;
                let (h1, o1) = at(t0 + dt)?;
                let k1 = lindblad_rhs(&h0, &o0, &rho);
                let k2 = lindblad_rhs(&hm, &om, &(&rho + &k1 * c(0.5 * dt)));
                let k3 = lindblad_rhs(&hm, &om, &(&rho + &k2 * c(0.5 * dt)));
                let k4 = lindblad_rhs(&h1, &o1, &(&rho + &k3 * c(dt)));
                rho += (k1 + (k2 + k3) * c(2.0) + k4) * c(dt / 6.0);
            }
        }
        t = target;
        out.push(rho.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{basis_operator, build_step_propagator};

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = Compensated::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            acc.add(Complex64::new(x, -x));
        }
        assert_eq!(acc.value(), Complex64::new(2.0, -2.0));
    }

    #[test]
    fn trivial_influence_is_matrix_product() {
        let h = HamiltonianSpec::constant({
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 1)] = Complex64::new(0.3, 0.1);
            m[(1, 0)] = Complex64::new(0.3, -0.1);
            m[(1, 1)] = Complex64::new(-0.2, 0.0);
            m
        })
        .unwrap();
        let ch = vec![LindbladChannel::constant(basis_operator(2, 0, 1), 0.2).unwrap()];
        let m = build_step_propagator(&h, &ch, 0.0, 0.4).unwrap();
        let props = vec![m.clone(); 3];
        let rho0 = basis_operator(2, 1, 1);
        let sum = full_path_sum(&rho0, &props, &InfluenceTable::trivial(2, 2), None).unwrap();
        let mut direct = rho0.clone();
        for _ in 0..3 {
            direct = m.apply_matrix(&direct).unwrap();
        }
        assert!((sum - direct).norm() < 1e-14);
    }

    #[test]
    fn path_limit() {
        let props = vec![Superoperator::identity(2); 13];
        let r = full_path_sum(&basis_operator(2, 0, 0), &props, &InfluenceTable::trivial(2, 1), None);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn ode_decay() {
        let ch = vec![LindbladChannel::constant(basis_operator(2, 0, 1), 0.5).unwrap()];
        let out = lindblad_ode_solve(&HamiltonianSpec::zero(2), &ch, &basis_operator(2, 1, 1), &[0.0, 1.0, 2.0], 0.01)
            .unwrap();
        assert_eq!(out[0], basis_operator(2, 1, 1));
        assert!((out[2][(1, 1)].re - (-1.0f64).exp()).abs() < 1e-10);
        assert!(lindblad_ode_solve(&HamiltonianSpec::zero(2), &ch, &out[0], &[1.0, 0.5], 0.1).is_err());
    }
}
