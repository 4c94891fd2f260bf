//! Augmented-density-matrix (ADM) iteration.
//!
//! The tensor holds the n_c most recent path points. The newest point keeps its
//! full (ν, μ) pair index because the next propagator element needs it. Older
//! points only enter through influence factors with lag ≥ 1, so pairs whose
//! factors coincide for every newer pair and lag are merged into one history
//! class. For a bath coupled to a single state of an N-level system that
//! leaves four classes regardless of N, and without a bath there is only one.
//!
//! Index layout at depth d ≥ 1:
//!
//! ```text
//! p_n · C^{d−1} + c_{n−1} · C^{d−2} + … + c_{n−d+1}
//! ```
//!
//! with p = ν + N·μ the column-major pair index and c the history class.
//! Point 0 (the initial state) carries no influence and is summed out by the
//! first step.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bath::{compute_kernel_table, Bath, MemoryKernelTable};
use crate::error::{Error, Result};
use crate::influence::{build_influence_table, InfluenceTable};
use crate::liouville::{CMatrix, DensityMatrix, LocalDynamics, Superoperator};
use crate::series::{RunDiagnostics, TimeSeries};

pub const DEFAULT_HARD_CAP: usize = 14;
pub const DEFAULT_MEMORY_BUDGET_BYTES: usize = 4 << 30;
const DEGENERATE_TRACE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TracePolicy {
    #[default]
    MonitorOnly,
    RenormalizeEachStep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub memory_depth: usize,
    pub initial_state: DensityMatrix,
    pub trace_policy: TracePolicy,
    /// Elements (i ≤ j) to export; empty means all.
    pub record: Vec<(usize, usize)>,
    pub hard_cap: usize,
    pub memory_budget_bytes: usize,
}

impl SimulationConfig {
    pub fn new(dt: f64, n_steps: usize, memory_depth: usize, initial_state: DensityMatrix) -> Self {
        Self {
            dt,
            n_steps,
            memory_depth,
            initial_state,
            trace_policy: TracePolicy::default(),
            record: Vec::new(),
            hard_cap: DEFAULT_HARD_CAP,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET_BYTES,
        }
    }

    pub fn with_trace_policy(mut self, policy: TracePolicy) -> Self {
        self.trace_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Validation(format!(
                "time step must be positive and finite, got {}",
                self.dt
            )));
        }
        if self.memory_depth == 0 || self.memory_depth > self.hard_cap {
            return Err(Error::Validation(format!(
                "memory depth n_c = {} outside 1..={}",
                self.memory_depth, self.hard_cap
            )));
        }
        self.initial_state.validate(1e-9)?;
        let n = self.initial_state.dim();
        for &(i, j) in &self.record {
            if i > j || j >= n {
                return Err(Error::Config(format!(
                    "recorded element ({i}, {j}) must satisfy i ≤ j < {n}"
                )));
            }
        }
        Ok(())
    }
}

/// System part (Hamiltonian, Lindblad channels) plus an optional harmonic bath.
#[derive(Clone, Debug)]
pub struct OpenSystem {
    pub dynamics: LocalDynamics,
    pub bath: Option<Bath>,
}

impl OpenSystem {
    pub fn dim(&self) -> usize {
        self.dynamics.dim()
    }
}

/// Partition of the N² pair indices into history classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryClasses {
    class_of: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl HistoryClasses {
    /// Pairs are merged when exp(S) agrees bit for bit in the older-point slot
    /// for every newer pair and every lag in 1..=memory_depth.
    pub fn from_influence(influence: &InfluenceTable, memory_depth: usize) -> Self {
        let n = influence.dim();
        let p_count = n * n;
        let signature = |p: usize| -> Vec<(u64, u64)> {
            let (nu_p, mu_p) = (p % n, p / n);
            let mut sig = Vec::with_capacity(memory_depth * p_count);
            for lag in 1..=memory_depth.min(influence.memory_depth()) {
                for q in 0..p_count {
                    let z = influence.factor(lag, q % n, q / n, nu_p, mu_p);
                    sig.push((z.re.to_bits(), z.im.to_bits()));
                }
            }
            sig
        };
        let sigs: Vec<_> = (0..p_count).map(signature).collect();
        let mut class_of = vec![0; p_count];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for p in 0..p_count {
            match members.iter().position(|m| sigs[m[0]] == sigs[p]) {
                Some(c) => {
                    class_of[p] = c;
                    members[c].push(p);
                }
                None => {
                    class_of[p] = members.len();
                    members.push(vec![p]);
                }
            }
        }
        Self { class_of, members }
    }

    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn class_of(&self, pair: usize) -> usize {
        self.class_of[pair]
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    fn representative(&self, class: usize) -> usize {
        self.members[class][0]
    }
}

/// Number of complex entries held at full depth, including the scratch
/// buffer and the partially reduced slice used when the oldest point is
/// summed out.
pub fn adm_storage_entries(dim: usize, classes: usize, memory_depth: usize) -> usize {
    let p = dim * dim;
    let full = p.saturating_mul(classes.saturating_pow(memory_depth.saturating_sub(1) as u32));
    let reduced = if memory_depth >= 2 {
        p.saturating_mul(p)
            .saturating_mul(classes.saturating_pow(memory_depth as u32 - 2))
    } else {
        0
    };
    full.saturating_mul(2).saturating_add(reduced)
}

/// Influence factors regrouped for the contraction: exp(S) at lag 0 on the
/// newest pair, and for lag ≥ 1 indexed by (newest pair, history class).
struct StepFactors {
    lag0: Vec<Complex64>,
    // lagged[lag][p_new * C + c], lag 0 unused
    lagged: Vec<Vec<Complex64>>,
    // rows of the oldest-lag factor that coincide share a reduced buffer
    oldest_row: Vec<usize>,
    oldest_rows: usize,
}

impl StepFactors {
    fn new(influence: &InfluenceTable, classes: &HistoryClasses, memory_depth: usize) -> Self {
        let n = influence.dim();
        let p_count = n * n;
        let c_count = classes.count();
        let lag0 = (0..p_count)
            .map(|p| influence.factor(0, p % n, p / n, p % n, p / n))
            .collect();
        let mut lagged = vec![Vec::new()];
        for lag in 1..=memory_depth {
            let mut row = Vec::with_capacity(p_count * c_count);
            for p in 0..p_count {
                for c in 0..c_count {
                    let r = classes.representative(c);
                    row.push(influence.factor(lag, p % n, p / n, r % n, r / n));
                }
            }
            lagged.push(row);
        }
        let mut oldest_row = vec![0; p_count];
        let mut distinct: Vec<usize> = Vec::new();
        let last = &lagged[memory_depth];
        for p in 0..p_count {
            let slice = &last[p * c_count..(p + 1) * c_count];
            match distinct
                .iter()
                .position(|&q| &last[q * c_count..(q + 1) * c_count] == slice)
            {
                Some(i) => oldest_row[p] = i,
                None => {
                    oldest_row[p] = distinct.len();
                    distinct.push(p);
                }
            }
        }
        Self {
            lag0,
            lagged,
            oldest_row,
            oldest_rows: distinct.len(),
        }
    }
}

/// The ADM tensor together with the data needed to advance it.
pub struct AugmentedDensityMatrix {
    dim: usize,
    memory_depth: usize,
    depth: usize,
    classes: HistoryClasses,
    factors: StepFactors,
    weights: Vec<Complex64>,
    scratch: Vec<Complex64>,
    reduced: Vec<Complex64>,
}

impl AugmentedDensityMatrix {
    /// Depth-0 tensor equal to vec(ρ̄(0)).
    pub fn initialize(
        initial_state: &DensityMatrix,
        influence: &InfluenceTable,
        memory_depth: usize,
    ) -> Result<Self> {
        let dim = initial_state.dim();
        if influence.dim() != dim {
            return Err(Error::Config(format!(
                "influence table is for dimension {}, initial state has {dim}",
                influence.dim()
            )));
        }
        if memory_depth == 0 {
            return Err(Error::Validation("memory depth must be at least 1".into()));
        }
        if influence.memory_depth() < memory_depth {
            return Err(Error::Internal(format!(
                "influence table covers lags up to {}, memory depth {memory_depth} needs more",
                influence.memory_depth()
            )));
        }
        let classes = HistoryClasses::from_influence(influence, memory_depth);
        let factors = StepFactors::new(influence, &classes, memory_depth);
        Ok(Self {
            dim,
            memory_depth,
            depth: 0,
            classes,
            factors,
            weights: initial_state.to_vector(),
            scratch: Vec::new(),
            reduced: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn memory_depth(&self) -> usize {
        self.memory_depth
    }

    pub fn classes(&self) -> &HistoryClasses {
        &self.classes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Bytes currently allocated for tensor storage.
    pub fn allocated_bytes(&self) -> usize {
        (self.weights.capacity() + self.scratch.capacity() + self.reduced.capacity())
            * std::mem::size_of::<Complex64>()
    }

    /// Advances by one time step with the propagator M for [t_n, t_n+1].
    pub fn step(&mut self, propagator: &Superoperator) -> Result<()> {
        if propagator.dim() != self.dim {
            return Err(Error::Config("propagator dimension mismatch".into()));
        }
        let p_count = self.dim * self.dim;
        let c_count = self.classes.count();
        let m = propagator.matrix();
        let f = &self.factors;
        let w = &self.weights;

        if self.depth == 0 {
            self.scratch.clear();
            self.scratch.extend((0..p_count).map(|p| {
                let mut acc = Complex64::new(0.0, 0.0);
                for q in 0..p_count {
                    acc += m[(p, q)] * w[q];
                }
                f.lag0[p] * acc
            }));
            std::mem::swap(&mut self.weights, &mut self.scratch);
            self.depth = 1;
            return Ok(());
        }

        if self.memory_depth == 1 {
            let lag1 = &f.lagged[1];
            let classes = &self.classes;
            self.scratch.clear();
            self.scratch.extend((0..p_count).map(|p| {
                let mut acc = Complex64::new(0.0, 0.0);
                for q in 0..p_count {
                    acc += m[(p, q)] * lag1[p * c_count + classes.class_of(q)] * w[q];
                }
                f.lag0[p] * acc
            }));
            std::mem::swap(&mut self.weights, &mut self.scratch);
            return Ok(());
        }

        let growing = self.depth < self.memory_depth;
        let new_depth = if growing { self.depth + 1 } else { self.memory_depth };
        // history digits below the lag-1 class: lags 2..new_depth−1 (or ..=depth when growing)
        let tail_digits = new_depth - 2;
        let tail_len = c_count.pow(tail_digits as u32);
        let old_block = c_count.pow(self.depth as u32 - 1);

        // source[r][q * tail_len + h]: the old tensor with its oldest digit
        // already contracted (full depth) or the old tensor itself (growth)
        let rows = if growing { 1 } else { f.oldest_rows };
        if !growing {
            let last = &f.lagged[self.memory_depth];
            let mut row_of_reduced = vec![0; rows];
            for (p, &r) in f.oldest_row.iter().enumerate().rev() {
                row_of_reduced[r] = p;
            }
            self.reduced.resize(rows * p_count * tail_len, Complex64::new(0.0, 0.0));
            self.reduced
                .par_chunks_mut(tail_len)
                .enumerate()
                .for_each(|(idx, chunk)| {
                    let (r, q) = (idx / p_count, idx % p_count);
                    let coeff = &last[row_of_reduced[r] * c_count..(row_of_reduced[r] + 1) * c_count];
                    let base = q * old_block;
                    for (h, slot) in chunk.iter_mut().enumerate() {
                        let src = &w[base + h * c_count..base + (h + 1) * c_count];
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (a, b) in coeff.iter().zip(src) {
                            acc += a * b;
                        }
                        *slot = acc;
                    }
                });
        }
        let source: &[Complex64] = if growing { w } else { &self.reduced };
        let source_row_len = p_count * tail_len;

        let block = c_count * tail_len;
        self.scratch.resize(p_count * block, Complex64::new(0.0, 0.0));
        let classes = &self.classes;
        self.scratch
            .par_chunks_mut(block)
            .enumerate()
            .for_each(|(p_new, out)| {
                let mut prefix = vec![f.lag0[p_new]; 1];
                prefix.reserve(tail_len);
                for lag in 2..new_depth {
                    let coeff = &f.lagged[lag][p_new * c_count..(p_new + 1) * c_count];
                    prefix = prefix
                        .iter()
                        .flat_map(|&x| coeff.iter().map(move |&y| x * y))
                        .collect();
                }
                let src = if growing {
                    source
                } else {
                    let r = f.oldest_row[p_new];
                    &source[r * source_row_len..(r + 1) * source_row_len]
                };
                let lag1 = &f.lagged[1][p_new * c_count..(p_new + 1) * c_count];
                for c in 0..c_count {
                    let out_c = &mut out[c * tail_len..(c + 1) * tail_len];
                    out_c.fill(Complex64::new(0.0, 0.0));
                    for &q in classes.members(c) {
                        let mq = m[(p_new, q)];
                        if mq == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let row = &src[q * tail_len..(q + 1) * tail_len];
                        for (o, s) in out_c.iter_mut().zip(row) {
                            *o += mq * s;
                        }
                    }
                    let pre = lag1[c];
                    for (o, x) in out_c.iter_mut().zip(&prefix) {
                        *o *= pre * x;
                    }
                }
            });
        std::mem::swap(&mut self.weights, &mut self.scratch);
        self.depth = new_depth;
        Ok(())
    }

    /// ρ̄ at the newest point: sum over all older indices.
    pub fn reduce(&self) -> CMatrix {
        let n = self.dim;
        let p_count = n * n;
        let block = self.weights.len() / p_count;
        let mut rho = CMatrix::zeros(n, n);
        for p in 0..p_count {
            let mut acc = Complex64::new(0.0, 0.0);
            for z in &self.weights[p * block..(p + 1) * block] {
                acc += z;
            }
            rho[(p % n, p / n)] = acc;
        }
        rho
    }

    pub fn scale(&mut self, factor: f64) {
        self.weights.par_iter_mut().for_each(|z| *z *= factor);
    }
}

/// Kernel table for `system`'s bath at the given discretization, or `None`
/// without a bath.
pub fn kernels_for(system: &OpenSystem, dt: f64, memory_depth: usize) -> Result<Option<MemoryKernelTable>> {
    system
        .bath
        .as_ref()
        .map(|b| compute_kernel_table(&b.spectral_density, dt, memory_depth, b.temperature_k))
        .transpose()
}

/// Computes the kernel table (if any) and runs the ADM iteration.
pub fn run(config: &SimulationConfig, system: &OpenSystem) -> Result<TimeSeries> {
    config.validate()?;
    let kernels = kernels_for(system, config.dt, config.memory_depth)?;
    run_with_kernels(config, system, kernels.as_ref())
}

/// Runs the ADM iteration with a precomputed kernel table (`None`: no bath).
pub fn run_with_kernels(
    config: &SimulationConfig,
    system: &OpenSystem,
    kernels: Option<&MemoryKernelTable>,
) -> Result<TimeSeries> {
    let start = Instant::now();
    config.validate()?;
    let n = system.dim();
    if config.initial_state.dim() != n {
        return Err(Error::Config(format!(
            "initial state has dimension {}, system has {n}",
            config.initial_state.dim()
        )));
    }
    let influence = match kernels {
        Some(k) => {
            if (k.dt() - config.dt).abs() > 1e-12 * config.dt {
                return Err(Error::Config(format!(
                    "kernel table was built for dt = {}, run uses {}",
                    k.dt(),
                    config.dt
                )));
            }
            build_influence_table(k, n)?
        }
        None => InfluenceTable::trivial(n, config.memory_depth),
    };
    if influence.memory_depth() < config.memory_depth {
        return Err(Error::Internal(format!(
            "kernel table covers lags up to {}, n_c = {} requested",
            influence.memory_depth(),
            config.memory_depth
        )));
    }
    let classes = HistoryClasses::from_influence(&influence, config.memory_depth);
    let entries = adm_storage_entries(n, classes.count(), config.memory_depth);
    let bytes = entries.saturating_mul(std::mem::size_of::<Complex64>());
    if bytes > config.memory_budget_bytes {
        return Err(Error::Validation(format!(
            "ADM storage for n_c = {} needs {bytes} bytes, budget is {}",
            config.memory_depth, config.memory_budget_bytes
        )));
    }

    let mut adm = AugmentedDensityMatrix::initialize(&config.initial_state, &influence, config.memory_depth)?;
    let mut diagnostics = RunDiagnostics {
        history_classes: classes.count(),
        kernel_max_residual: kernels.map(|k| k.max_residual()),
        polaron_shift_mev: kernels.map(|k| k.polaron_shift_mev().to_vec()).unwrap_or_default(),
        ..Default::default()
    };
    let mut series = TimeSeries {
        times: Vec::with_capacity(config.n_steps + 1),
        states: Vec::with_capacity(config.n_steps + 1),
        trace_drift: Vec::with_capacity(config.n_steps + 1),
        diagnostics: RunDiagnostics::default(),
    };
    record(&mut series, &mut diagnostics, 0.0, config.initial_state.matrix().clone())?;

    let constant = if system.dynamics.is_time_independent() {
        Some(system.dynamics.step_propagator(0.0, config.dt)?)
    } else {
        None
    };
    for k in 0..config.n_steps {
        let step_start = Instant::now();
        let t = k as f64 * config.dt;
        let owned;
        let m = match &constant {
            Some(m) => m,
            None => {
                owned = system.dynamics.step_propagator(t, config.dt)?;
                &owned
            }
        };
        adm.step(m)?;
        diagnostics.peak_memory_bytes = diagnostics.peak_memory_bytes.max(adm.allocated_bytes());
        let mut rho = adm.reduce();
        let tr = rho.trace();
        if tr.norm() < DEGENERATE_TRACE {
            return Err(Error::numerical(
                format!("reduced trace collapsed to {tr} at t = {} ps", t + config.dt),
                tr.norm(),
            ));
        }
        let drift = (tr - Complex64::new(1.0, 0.0)).norm();
        if config.trace_policy == TracePolicy::RenormalizeEachStep {
            adm.scale(1.0 / tr.re);
            rho /= Complex64::new(tr.re, 0.0);
            diagnostics.renormalization_factors.push(tr.re);
        }
        let (herm, correction) = DensityMatrix::hermitian_part(rho)?;
        diagnostics.max_hermitian_correction = diagnostics.max_hermitian_correction.max(correction);
        series.times.push((k + 1) as f64 * config.dt);
        series.states.push(herm.into_matrix());
        series.trace_drift.push(drift);
        diagnostics.max_trace_drift = diagnostics.max_trace_drift.max(drift);
        diagnostics.step_wall_times_s.push(step_start.elapsed().as_secs_f64());
    }
    diagnostics.total_wall_time_s = start.elapsed().as_secs_f64();
    series.diagnostics = diagnostics;
    Ok(series)
}

fn record(
    series: &mut TimeSeries,
    diagnostics: &mut RunDiagnostics,
    t: f64,
    rho: CMatrix,
) -> Result<()> {
    let drift = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
    diagnostics.max_trace_drift = diagnostics.max_trace_drift.max(drift);
    series.times.push(t);
    series.states.push(rho);
    series.trace_drift.push(drift);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{basis_operator, HamiltonianSpec, LindbladChannel};
    use crate::units::HBAR_MEV_PS;

    fn decay_system(gamma: f64) -> OpenSystem {
        let dynamics = LocalDynamics::new(
            HamiltonianSpec::zero(2),
            vec![LindbladChannel::constant(basis_operator(2, 0, 1), gamma).unwrap()],
        )
        .unwrap();
        OpenSystem { dynamics, bath: None }
    }

    fn rabi_system(f: f64) -> OpenSystem {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = Complex64::new(0.5 * HBAR_MEV_PS * f, 0.0);
        h[(1, 0)] = h[(0, 1)];
        let dynamics = LocalDynamics::new(HamiltonianSpec::constant(h).unwrap(), vec![]).unwrap();
        OpenSystem { dynamics, bath: None }
    }

    #[test]
    fn initial_weights() {
        let inf = InfluenceTable::trivial(2, 3);
        let adm = AugmentedDensityMatrix::initialize(&DensityMatrix::pure(2, 0).unwrap(), &inf, 3).unwrap();
        assert_eq!(adm.depth(), 0);
        assert_eq!(adm.weights()[0], Complex64::new(1.0, 0.0));
        assert!(adm.weights()[1..].iter().all(|z| z.norm() == 0.0));
        let mixed = AugmentedDensityMatrix::initialize(&DensityMatrix::maximally_mixed(2), &inf, 3).unwrap();
        assert_eq!(mixed.weights()[0].re, 0.5);
        assert_eq!(mixed.weights()[3].re, 0.5);
        assert_eq!(mixed.reduce(), DensityMatrix::maximally_mixed(2).into_matrix());
    }

    #[test]
    fn trivial_influence_collapses_to_one_class() {
        let inf = InfluenceTable::trivial(3, 5);
        assert_eq!(HistoryClasses::from_influence(&inf, 5).count(), 1);
        assert_eq!(adm_storage_entries(3, 1, 5), 18 + 81);
    }

    #[test]
    fn radiative_decay() {
        let cfg = SimulationConfig::new(0.1, 10, 3, DensityMatrix::pure(2, 1).unwrap());
        let s = run(&cfg, &decay_system(0.05)).unwrap();
        assert_eq!(s.len(), 11);
        assert!((s.population(1)[10] - (-0.05f64).exp()).abs() < 1e-10);
        assert!(s.diagnostics.max_trace_drift < 1e-13);
    }

    #[test]
    fn rabi_flip() {
        let dt = 0.01;
        let steps = (std::f64::consts::PI / dt).round() as usize;
        let cfg = SimulationConfig::new(dt, steps, 2, DensityMatrix::pure(2, 0).unwrap());
        let s = run(&cfg, &rabi_system(1.0)).unwrap();
        let t = s.times[steps];
        assert!((s.population(1)[steps] - (0.5 * t).sin().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn zero_steps() {
        let cfg = SimulationConfig::new(0.5, 0, 4, DensityMatrix::pure(2, 0).unwrap());
        let s = run(&cfg, &rabi_system(1.0)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.states[0], DensityMatrix::pure(2, 0).unwrap().into_matrix());
    }

    #[test]
    fn config_guards() {
        let rho = DensityMatrix::pure(2, 0).unwrap();
        let sys = rabi_system(1.0);
        let mut cfg = SimulationConfig::new(0.5, 1, 0, rho.clone());
        assert!(matches!(run(&cfg, &sys), Err(Error::Validation(_))));
        cfg.memory_depth = 15;
        assert!(matches!(run(&cfg, &sys), Err(Error::Validation(_))));
        cfg.memory_depth = 4;
        cfg.dt = 0.0;
        assert!(matches!(run(&cfg, &sys), Err(Error::Validation(_))));
        cfg.dt = 0.5;
        cfg.memory_budget_bytes = 10;
        assert!(matches!(run(&cfg, &sys), Err(Error::Validation(_))));
        let three = SimulationConfig::new(0.5, 1, 2, DensityMatrix::pure(3, 0).unwrap());
        assert!(matches!(run(&three, &sys), Err(Error::Config(_))));
    }

    #[test]
    fn renormalization_logs_factors() {
        let cfg = SimulationConfig::new(0.1, 5, 2, DensityMatrix::pure(2, 1).unwrap())
            .with_trace_policy(TracePolicy::RenormalizeEachStep);
        let s = run(&cfg, &decay_system(0.05)).unwrap();
        assert_eq!(s.diagnostics.renormalization_factors.len(), 5);
        for z in &s.diagnostics.renormalization_factors {
            assert!((z - 1.0).abs() < 1e-13);
        }
    }
}
