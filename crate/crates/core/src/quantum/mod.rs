//! Finite-S quantum dynamics in the symmetric Dicke subspace.

pub mod arnoldi;
pub mod autocorr;
pub mod dense;
pub mod expm;
pub mod floquet;
pub mod lindblad;
pub mod ops;
pub mod steady;

pub use arnoldi::{arnoldi_floquet, arnoldi_floquet_spectrum, ArnoldiOptions, ArnoldiResult};
pub use autocorr::{autocorr_spectrum, autocorrelation, autocorrelation_from, phase_classifier_quantum, AutocorrResult, QuantumThresholds};
pub use dense::{dense_floquet_spectrum, FloquetSpectrum, SpectrumMethod};
pub use floquet::{evolve, floquet_map, FloquetPropagator, QuantumSeries};
pub use lindblad::lindblad_rhs;
pub use ops::{build_spin_operators, CMatrix, SpinOperators};
pub use steady::{steady_state, steady_state_with, SteadyOptions, SteadyState};
