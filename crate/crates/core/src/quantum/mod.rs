//! Dense exact simulation of small qubit registers.
//!
//! Registers hold either a state vector or a density matrix in complex
//! double precision. Operations return new registers instead of mutating,
//! so concurrent trials can share nothing but their inputs.

mod density;
mod lemmas;
mod projector;
pub mod random;
mod register;

pub use density::{
    fidelity, hermitian_eigen, is_density, kron, partial_trace_first, partial_trace_second,
    trace_distance,
};
pub use lemmas::{
    conditional_second_register, gentle_measurement, measure_and_rewind, verify_impindep,
    verify_simulproj, GentleReport, ImpindepReport, RewindReport, SimulprojReport,
};
pub use projector::BinaryProjector;
pub use register::{fwht, QuantumRegister, State};

pub use nalgebra::Complex;

/// Complex double used for every amplitude.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Largest register handled as a state vector.
pub const MAX_QUBITS: usize = 14;
/// Largest register handled as a density matrix.
pub const MAX_DENSITY_QUBITS: usize = 8;
/// Equality tolerance for norms, traces and idempotence checks.
pub const TOL: f64 = 1e-9;

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}
