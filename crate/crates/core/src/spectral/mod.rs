//! Spectral analysis of stroboscopic orbits: peaks, frequency lattices,
//! rational locking.

pub mod lattice;
pub mod peaks;
pub mod scan;

pub use lattice::{
    classify_locking, extract_omega_eff, fit_frequency_lattice, Label, LatticeFit, LockClassification, F_KICK,
};
pub use peaks::{stroboscopic_spectrum, Peak, SpectrumOptions, SpectrumPeaks};
pub use scan::{arnold_tongue_map, frequency_shift_curve, FrequencyOptions, ShiftCurve, TongueCell};
