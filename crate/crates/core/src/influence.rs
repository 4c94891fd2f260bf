//! Truncated influence functional.
//!
//! For two time points l ≥ l' of the ket path ν and bra path μ the pair action is
//!
//! ```text
//! S = −K_{ν_l' ν_l} − K*_{μ_l μ_l'} + K*_{ν_l μ_l'} + K_{ν_l' μ_l}
//! ```
//!
//! with all kernels evaluated at the lag (l − l')·Δt. Pairs further apart than
//! the kernel table's memory depth are dropped.

use num_complex::Complex64;

use crate::bath::MemoryKernelTable;
use crate::error::{Error, Result};

/// exp(S) for every lag 0..=n_c and every (ν_l, μ_l, ν_l', μ_l') combination.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceTable {
    dim: usize,
    memory_depth: usize,
    actions: Vec<Complex64>,
    factors: Vec<Complex64>,
}

impl InfluenceTable {
    /// Table with S ≡ 0 (no bath coupling).
    pub fn trivial(dim: usize, memory_depth: usize) -> Self {
        let len = (memory_depth + 1) * dim.pow(4);
        Self {
            dim,
            memory_depth,
            actions: vec![Complex64::new(0.0, 0.0); len],
            factors: vec![Complex64::new(1.0, 0.0); len],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn memory_depth(&self) -> usize {
        self.memory_depth
    }

    #[inline]
    fn index(&self, lag: usize, nu: usize, mu: usize, nu_p: usize, mu_p: usize) -> usize {
        let n = self.dim;
        (((lag * n + nu) * n + mu) * n + nu_p) * n + mu_p
    }

    /// exp(S) for the newer point (ν, μ) and the older point (ν', μ') `lag` steps earlier.
    #[inline]
    pub fn factor(&self, lag: usize, nu: usize, mu: usize, nu_p: usize, mu_p: usize) -> Complex64 {
        self.factors[self.index(lag, nu, mu, nu_p, mu_p)]
    }

    /// The pair action S itself.
    #[inline]
    pub fn action(&self, lag: usize, nu: usize, mu: usize, nu_p: usize, mu_p: usize) -> Complex64 {
        self.actions[self.index(lag, nu, mu, nu_p, mu_p)]
    }

    /// Sum of pair actions over all ordered pairs l' ≤ l of a chronological
    /// path segment `[(ν_1, μ_1), …, (ν_k, μ_k)]`. Pairs further apart than the
    /// memory depth contribute nothing.
    pub fn truncated_action(&self, segment: &[(usize, usize)]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (l, &(nu, mu)) in segment.iter().enumerate() {
            let oldest = l.saturating_sub(self.memory_depth);
            for (lp, &(nu_p, mu_p)) in segment.iter().enumerate().take(l + 1).skip(oldest) {
                total += self.action(l - lp, nu, mu, nu_p, mu_p);
            }
        }
        total
    }
}

/// Builds exp(S) from a kernel table for an N-level system.
///
/// Couplings must be real, so every active pair (a, b) needs a mirror (b, a)
/// with identical kernel values.
pub fn build_influence_table(kernels: &MemoryKernelTable, dim: usize) -> Result<InfluenceTable> {
    if dim == 0 {
        return Err(Error::Config("system dimension must be positive".into()));
    }
    for &(a, b) in kernels.pairs() {
        if a >= dim || b >= dim {
            return Err(Error::Config(format!(
                "kernel pair ({a}, {b}) references a state outside dimension {dim}"
            )));
        }
        if !kernels.pairs().contains(&(b, a)) {
            return Err(Error::Config(format!(
                "kernel pair ({a}, {b}) has no mirror ({b}, {a}); only real couplings are supported"
            )));
        }
    }
    let depth = kernels.memory_depth();
    let n = dim;
    // dense K[lag][a][b]
    let mut k = vec![Complex64::new(0.0, 0.0); (depth + 1) * n * n];
    for lag in 0..=depth {
        for a in 0..n {
            for b in 0..n {
                k[(lag * n + a) * n + b] = kernels.kernel(a, b, lag);
            }
        }
    }
    for lag in 0..=depth {
        for a in 0..n {
            for b in 0..a {
                let (x, y) = (k[(lag * n + a) * n + b], k[(lag * n + b) * n + a]);
                if x != y {
                    return Err(Error::Config(format!(
                        "kernel K_{{{a}{b}}} differs from K_{{{b}{a}}} at lag {lag}"
                    )));
                }
            }
        }
    }
    let kk = |lag: usize, a: usize, b: usize| k[(lag * n + a) * n + b];

    let len = (depth + 1) * n.pow(4);
    let mut actions = Vec::with_capacity(len);
    for lag in 0..=depth {
        for nu in 0..n {
            for mu in 0..n {
                for nu_p in 0..n {
                    for mu_p in 0..n {
                        let s = -kk(lag, nu_p, nu) - kk(lag, mu, mu_p).conj()
                            + kk(lag, nu, mu_p).conj()
                            + kk(lag, nu_p, mu);
                        actions.push(s);
                    }
                }
            }
        }
    }
    let factors = actions.iter().map(|s| s.exp()).collect();
    Ok(InfluenceTable {
        dim,
        memory_depth: depth,
        actions,
        factors,
    })
}
