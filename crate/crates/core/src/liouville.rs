//! Dense Liouville-space algebra for an N-level system.
//!
//! Operators on density matrices are stored as N²×N² matrices acting on the
//! column-major vectorization `vec(X)[ν + N·μ] = X[ν, μ]`. With this convention
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, and the element
//! `⟨ν_out| M[|ν_in⟩⟨μ_in|] |μ_out⟩` sits at row `ν_out + N·μ_out`, column
//! `ν_in + N·μ_in`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::HBAR_MEV_PS;

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;

/// Index of the density-matrix element (ν, μ) in the column-major vectorization.
#[inline]
pub fn pair_index(dim: usize, nu: usize, mu: usize) -> usize {
    nu + dim * mu
}

/// Inverse of [`pair_index`].
#[inline]
pub fn pair_states(dim: usize, pair: usize) -> (usize, usize) {
    (pair % dim, pair / dim)
}

/// Basis projector-like operator |ν⟩⟨μ|.
pub fn basis_operator(dim: usize, nu: usize, mu: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(nu, mu)] = Complex64::new(1.0, 0.0);
    m
}

fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Reduced density matrix of the few-level system.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Wraps a Hermitian matrix (defect ≤ 1e-12). Trace and positivity are
    /// checked separately by [`DensityMatrix::validate`].
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Config(format!(
                "density matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// Replaces `matrix` by its Hermitian part (X + X†)/2 and returns the
    /// largest elementwise correction that was applied.
    pub fn hermitian_part(matrix: CMatrix) -> Result<(Self, f64)> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Config("density matrix must be square".into()));
        }
        let herm = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let correction = (&herm - &matrix)
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        Ok((Self { matrix: herm }, correction))
    }

    /// The pure state |index⟩⟨index|.
    pub fn pure(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Config(format!(
                "basis state {index} out of range for dimension {dim}"
            )));
        }
        Ok(Self {
            matrix: basis_operator(dim, index, index),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn get(&self, nu: usize, mu: usize) -> Complex64 {
        self.matrix[(nu, mu)]
    }

    pub fn population(&self, state: usize) -> f64 {
        self.matrix[(state, state)].re
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |acc, &x| acc.min(x))
    }

    /// Checks unit trace within `trace_tol` and positivity within 1e-9.
    pub fn validate(&self, trace_tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::Validation(format!(
                "density matrix trace {tr} deviates from 1 by more than {trace_tol:e}"
            )));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -1e-9 {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    /// Column-major vectorization.
    pub fn to_vector(&self) -> Vec<Complex64> {
        // nalgebra storage is column-major already
        self.matrix.as_slice().to_vec()
    }
}

type MatrixFn = dyn Fn(f64) -> CMatrix + Send + Sync;
type RateFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Time-dependent system Hamiltonian H_N(t) in meV.
#[derive(Clone)]
pub struct HamiltonianSpec {
    dim: usize,
    matrix_fn: Arc<MatrixFn>,
    time_independent: bool,
}

impl HamiltonianSpec {
    pub fn constant(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Config("Hamiltonian must be square and non-empty".into()));
        }
        let defect = hermitian_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "Hamiltonian is not Hermitian (defect {defect:e})"
            )));
        }
        let dim = matrix.nrows();
        Ok(Self {
            dim,
            matrix_fn: Arc::new(move |_| matrix.clone()),
            time_independent: true,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix_fn: Arc::new(move |_| CMatrix::zeros(dim, dim)),
            time_independent: true,
        }
    }

    /// Hermiticity of `f(t)` is asserted whenever the Hamiltonian is sampled.
    pub fn time_dependent<F>(dim: usize, f: F) -> Self
    where
        F: Fn(f64) -> CMatrix + Send + Sync + 'static,
    {
        Self {
            dim,
            matrix_fn: Arc::new(f),
            time_independent: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_time_independent(&self) -> bool {
        self.time_independent
    }

    /// H(t), checked for shape and Hermiticity.
    pub fn at(&self, t: f64) -> Result<CMatrix> {
        let h = (self.matrix_fn)(t);
        if h.nrows() != self.dim || h.ncols() != self.dim {
            return Err(Error::Config(format!(
                "Hamiltonian at t = {t} ps has shape {}x{}, expected {}x{}",
                h.nrows(),
                h.ncols(),
                self.dim,
                self.dim
            )));
        }
        let defect = hermitian_defect(&h);
        if defect > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "Hamiltonian at t = {t} ps is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(h)
    }
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSpec")
            .field("dim", &self.dim)
            .field("time_independent", &self.time_independent)
            .finish()
    }
}

/// A dissipator γ(t)(A X A† − ½{X, A†A}).
#[derive(Clone)]
pub struct LindbladChannel {
    operator: CMatrix,
    rate_fn: Arc<RateFn>,
    time_independent: bool,
}

impl LindbladChannel {
    pub fn constant(operator: CMatrix, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::Validation(format!(
                "Lindblad rate must be finite and non-negative, got {rate}"
            )));
        }
        Self::check_operator(&operator)?;
        Ok(Self {
            operator,
            rate_fn: Arc::new(move |_| rate),
            time_independent: true,
        })
    }

    pub fn time_dependent<F>(operator: CMatrix, rate_fn: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::check_operator(&operator)?;
        Ok(Self {
            operator,
            rate_fn: Arc::new(rate_fn),
            time_independent: false,
        })
    }

    fn check_operator(operator: &CMatrix) -> Result<()> {
        if operator.nrows() != operator.ncols() || operator.nrows() == 0 {
            return Err(Error::Config("Lindblad operator must be square".into()));
        }
        Ok(())
    }

    pub fn operator(&self) -> &CMatrix {
        &self.operator
    }

    pub fn dim(&self) -> usize {
        self.operator.nrows()
    }

    pub fn is_time_independent(&self) -> bool {
        self.time_independent
    }

    pub fn rate(&self, t: f64) -> Result<f64> {
        let r = (self.rate_fn)(t);
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Validation(format!(
                "Lindblad rate at t = {t} ps is {r}, must be finite and non-negative"
            )));
        }
        Ok(r)
    }
}

impl fmt::Debug for LindbladChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LindbladChannel")
            .field("operator", &self.operator)
            .field("time_independent", &self.time_independent)
            .finish()
    }
}

/// Linear map on N×N matrices, stored as an N²×N² matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        let d2 = dim * dim;
        if matrix.nrows() != d2 || matrix.ncols() != d2 {
            return Err(Error::Config(format!(
                "superoperator for dimension {dim} must be {d2}x{d2}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.dim != other.dim {
            return Err(Error::Config("superoperator dimension mismatch".into()));
        }
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// Applies the map to `rho`; the result is re-Hermitized and the size of
    /// that correction is returned alongside.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
        let out = self.apply_matrix(rho.matrix())?;
        DensityMatrix::hermitian_part(out)
    }

    /// Raw application to an arbitrary N×N matrix.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::Config(format!(
                "cannot apply a dimension-{} superoperator to a {}x{} matrix",
                self.dim,
                x.nrows(),
                x.ncols()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(x.as_slice());
        let w = &self.matrix * v;
        Ok(CMatrix::from_column_slice(self.dim, self.dim, w.as_slice()))
    }

    /// ⟨ν_out| M[|ν_in⟩⟨μ_in|] |μ_out⟩.
    pub fn element(&self, nu_out: usize, mu_out: usize, nu_in: usize, mu_in: usize) -> Result<Complex64> {
        let n = self.dim;
        if nu_out >= n || mu_out >= n || nu_in >= n || mu_in >= n {
            return Err(Error::Config(format!(
                "propagator index ({nu_out},{mu_out} <- {nu_in},{mu_in}) out of range for dimension {n}"
            )));
        }
        Ok(self.matrix[(pair_index(n, nu_out, mu_out), pair_index(n, nu_in, mu_in))])
    }

    /// max over basis operators E_{νμ} of |Tr M[E_{νμ}] − δ_{νμ}|.
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for col in 0..n * n {
            let (nu, mu) = pair_states(n, col);
            let tr: Complex64 = (0..n).map(|k| self.matrix[(pair_index(n, k, k), col)]).sum();
            let target = if nu == mu { 1.0 } else { 0.0 };
            worst = worst.max((tr - Complex64::new(target, 0.0)).norm());
        }
        worst
    }

    /// Trace defect of a generator: max |Σ_k L[(k,k), col]|.
    pub fn generator_trace_defect(&self) -> f64 {
        let n = self.dim;
        (0..n * n)
            .map(|col| {
                (0..n)
                    .map(|k| self.matrix[(pair_index(n, k, k), col)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Kronecker product a ⊗ b.
fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Local-in-time system dynamics: Hamiltonian, Lindblad channels and an
/// optional extra linear generator (no physicality checks beyond trace
/// preservation are applied to the latter).
#[derive(Clone, Debug)]
pub struct LocalDynamics {
    pub hamiltonian: HamiltonianSpec,
    pub channels: Vec<LindbladChannel>,
    pub extra_generator: Option<Superoperator>,
}

impl LocalDynamics {
    pub fn new(hamiltonian: HamiltonianSpec, channels: Vec<LindbladChannel>) -> Result<Self> {
        let n = hamiltonian.dim();
        for (i, c) in channels.iter().enumerate() {
            if c.dim() != n {
                return Err(Error::Config(format!(
                    "Lindblad channel {i} has dimension {}, Hamiltonian has {n}",
                    c.dim()
                )));
            }
        }
        Ok(Self {
            hamiltonian,
            channels,
            extra_generator: None,
        })
    }

    /// Adds a constant raw generator; it must preserve the trace to 1e-12.
    pub fn with_extra_generator(mut self, generator: Superoperator) -> Result<Self> {
        if generator.dim() != self.dim() {
            return Err(Error::Config("extra generator dimension mismatch".into()));
        }
        let defect = generator.generator_trace_defect();
        if defect > 1e-12 {
            return Err(Error::Validation(format!(
                "extra generator does not preserve the trace (defect {defect:e})"
            )));
        }
        self.extra_generator = Some(generator);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn is_time_independent(&self) -> bool {
        self.hamiltonian.is_time_independent()
            && self.channels.iter().all(|c| c.is_time_independent())
    }

    pub fn generator(&self, t: f64) -> Result<Superoperator> {
        let mut l = build_liouvillian(&self.hamiltonian, &self.channels, t)?;
        if let Some(extra) = &self.extra_generator {
            l.matrix += &extra.matrix;
        }
        Ok(l)
    }

    pub fn step_propagator(&self, t: f64, dt: f64) -> Result<Superoperator> {
        check_step(dt)?;
        propagator_from_generator(&self.generator(t + 0.5 * dt)?, dt)
    }
}

/// L_N(t)[X] = (1/iħ)[H(t), X] + Σ_i γ_i(t)(A_i X A_i† − ½{X, A_i†A_i}), in ps⁻¹.
pub fn build_liouvillian(
    h: &HamiltonianSpec,
    channels: &[LindbladChannel],
    t: f64,
) -> Result<Superoperator> {
    let n = h.dim();
    let id = CMatrix::identity(n, n);
    let hm = h.at(t)? * Complex64::new(1.0 / HBAR_MEV_PS, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = (kron(&id, &hm) - kron(&hm.transpose(), &id)) * minus_i;
    for (i, c) in channels.iter().enumerate() {
        if c.dim() != n {
            return Err(Error::Config(format!(
                "Lindblad channel {i} has dimension {}, Hamiltonian has {n}",
                c.dim()
            )));
        }
        let gamma = c.rate(t)?;
        if gamma == 0.0 {
            continue;
        }
        let a = c.operator();
        let ada = a.adjoint() * a;
        let half = Complex64::new(0.5, 0.0);
        let d = kron(&a.conjugate(), a) - (kron(&id, &ada) + kron(&ada.transpose(), &id)) * half;
        l += d * Complex64::new(gamma, 0.0);
    }
    Ok(Superoperator { dim: n, matrix: l })
}

fn check_step(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Validation(format!(
            "time step must be positive and finite, got {dt}"
        )));
    }
    Ok(())
}

/// exp(L·dt) by scaling and squaring with a Padé approximant.
pub fn propagator_from_generator(generator: &Superoperator, dt: f64) -> Result<Superoperator> {
    check_step(dt)?;
    let scaled = &generator.matrix * Complex64::new(dt, 0.0);
    let m = scaled.exp();
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numerical("matrix exponential overflowed", f64::INFINITY));
    }
    Ok(Superoperator {
        dim: generator.dim,
        matrix: m,
    })
}

/// M ≈ T exp(∫_t^{t+dt} L_N dt'), with the generator sampled at t + dt/2.
pub fn build_step_propagator(
    h: &HamiltonianSpec,
    channels: &[LindbladChannel],
    t: f64,
    dt: f64,
) -> Result<Superoperator> {
    check_step(dt)?;
    let l = build_liouvillian(h, channels, t + 0.5 * dt)?;
    propagator_from_generator(&l, dt)
}
