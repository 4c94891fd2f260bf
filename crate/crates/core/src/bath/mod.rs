//! Oscillator bath: spectral densities, memory kernels and their cache.

pub mod cache;
mod kernel;
pub mod quadrature;
mod spectral;

pub use kernel::{
    compute_kernel_table, compute_kernel_table_with_tolerance, memory_time_estimate, polaron_shift,
    MemoryKernelTable, KERNEL_TOLERANCE,
};
pub use spectral::{CutoffShape, GaAsParameters, SpectralDensity, SpectralShape, TabulatedDensity};

/// A spectral density together with the bath temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct Bath {
    pub spectral_density: SpectralDensity,
    pub temperature_k: f64,
}
