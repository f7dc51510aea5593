//! Run configuration: one TOML file with a section per experiment family.
//! Every table rejects unknown keys so that a typo fails loudly.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use kicked_spin::meanfield::LyapunovOptions;
use kicked_spin::quantum::{ArnoldiOptions, SteadyOptions};
use kicked_spin::spectral::FrequencyOptions;
use kicked_spin::trajectory::TrajectoryOptions;
use kicked_spin::ModelParams;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Single source of randomness; copied into every seeded option below.
    pub seed: u64,
    pub out: PathBuf,
    /// Worker cap for grid scans; absent means all cores.
    pub threads: Option<usize>,
    pub model: ModelSection,
    pub lyap_map: LyapMapConfig,
    pub bifurcation: BifurcationConfig,
    pub poincare: PoincareConfig,
    pub spectrum: SpectrumConfig,
    pub shift_curve: ShiftCurveConfig,
    pub tongues: TonguesConfig,
    pub zgeom: ZgeomConfig,
    pub liouvillian: LiouvillianConfig,
    pub autocorr: AutocorrConfig,
    pub steady: SteadyConfig,
    pub trajectory: TrajectoryConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            out: PathBuf::from("out"),
            threads: None,
            model: ModelSection::default(),
            lyap_map: LyapMapConfig::default(),
            bifurcation: BifurcationConfig::default(),
            poincare: PoincareConfig::default(),
            spectrum: SpectrumConfig::default(),
            shift_curve: ShiftCurveConfig::default(),
            tongues: TonguesConfig::default(),
            zgeom: ZgeomConfig::default(),
            liouvillian: LiouvillianConfig::default(),
            autocorr: AutocorrConfig::default(),
            steady: SteadyConfig::default(),
            trajectory: TrajectoryConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub omega0: f64,
    pub omega1: f64,
    pub omega_z: f64,
    pub kappa: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            omega0: 1.5,
            omega1: 1.0,
            omega_z: 0.0,
            kappa: 1.0,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.omega0, self.omega1, self.omega_z).with_kappa(self.kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapMapConfig {
    pub omega_z_range: [f64; 2],
    pub omega1_range: [f64; 2],
    /// `[n_omega_z, n_omega1]`.
    pub grid: [usize; 2],
    pub lyapunov: LyapunovOptions,
}

impl Default for LyapMapConfig {
    fn default() -> Self {
        LyapMapConfig {
            omega_z_range: [0.0, 3.2],
            omega1_range: [0.0, TAU],
            grid: [33, 33],
            lyapunov: LyapunovOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    OmegaZ,
    Omega1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BifurcationConfig {
    pub axis: Axis,
    pub range: [f64; 2],
    pub n_points: usize,
    pub samples_per_point: usize,
    pub lyapunov: LyapunovOptions,
}

impl Default for BifurcationConfig {
    fn default() -> Self {
        BifurcationConfig {
            axis: Axis::OmegaZ,
            range: [0.0, 3.2],
            n_points: 200,
            samples_per_point: 256,
            lyapunov: LyapunovOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoincareConfig {
    /// Random initial states on the sphere, in addition to `(0, 0, 1)`.
    pub n_initial: usize,
    pub periods: usize,
    pub transient: usize,
    pub dt: f64,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        PoincareConfig {
            n_initial: 8,
            periods: 3000,
            transient: 1000,
            dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub frequency: FrequencyOptions,
    /// Peaks written out, strongest first.
    pub top: usize,
    pub m_max: i32,
    pub n_max: i32,
    pub lattice_tol: f64,
    /// Stroboscopic samples written to the time-series table.
    pub series_len: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            frequency: FrequencyOptions::default(),
            top: 12,
            m_max: 10,
            n_max: 4,
            lattice_tol: 1e-2,
            series_len: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShiftCurveConfig {
    pub omega1_range: [f64; 2],
    pub n_points: usize,
    /// Consecutive locked points needed for a plateau.
    pub min_plateau: usize,
    pub frequency: FrequencyOptions,
}

impl Default for ShiftCurveConfig {
    fn default() -> Self {
        ShiftCurveConfig {
            omega1_range: [0.0, TAU],
            n_points: 127,
            min_plateau: 3,
            frequency: FrequencyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TonguesConfig {
    pub omega1_range: [f64; 2],
    pub omega_z_range: [f64; 2],
    /// `[n_omega1, n_omega_z]`.
    pub grid: [usize; 2],
    pub frequency: FrequencyOptions,
}

impl Default for TonguesConfig {
    fn default() -> Self {
        TonguesConfig {
            omega1_range: [0.0, TAU],
            omega_z_range: [0.0, 1.0],
            grid: [64, 11],
            frequency: FrequencyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZgeomConfig {
    pub nodes: usize,
    /// Phases written to the table.
    pub samples: usize,
}

impl Default for ZgeomConfig {
    fn default() -> Self {
        ZgeomConfig {
            nodes: 10_000,
            samples: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    Arnoldi,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiouvillianConfig {
    pub spins: Vec<f64>,
    pub method: Method,
    pub dt: f64,
    pub arnoldi: ArnoldiOptions,
}

impl Default for LiouvillianConfig {
    fn default() -> Self {
        LiouvillianConfig {
            spins: vec![10.0],
            method: Method::Arnoldi,
            dt: 1e-3,
            arnoldi: ArnoldiOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AutocorrConfig {
    pub spins: Vec<f64>,
    pub t_max: usize,
    pub dt: f64,
    pub steady: SteadyOptions,
}

impl Default for AutocorrConfig {
    fn default() -> Self {
        AutocorrConfig {
            spins: vec![10.0, 20.0],
            t_max: 100,
            dt: 1e-3,
            steady: SteadyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteadyConfig {
    pub spins: Vec<f64>,
    pub dt: f64,
    /// Length of the `⟨S⟩/S` evolution from `|S, S⟩` written per spin; 0 skips it.
    pub periods: usize,
    pub samples_per_period: usize,
    pub steady: SteadyOptions,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        SteadyConfig {
            spins: vec![10.0],
            dt: 1e-3,
            periods: 0,
            samples_per_period: 1,
            steady: SteadyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryConfig {
    pub spin: f64,
    pub n_trajectories: usize,
    pub options: TrajectoryOptions,
    /// Welch segment for photon spectra (samples).
    pub segment_len: usize,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            spin: 4.0,
            n_trajectories: 1,
            options: TrajectoryOptions::default(),
            segment_len: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Criterion numbers to run; empty runs all.
    pub only: Vec<u8>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the canonical JSON form, leaving out where the output goes
    /// and how many threads compute it (neither changes the numbers).
    pub fn digest(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Some(m) = v.as_object_mut() {
            m.remove("out");
            m.remove("threads");
        }
        let bytes = Sha256::digest(v.to_string().as_bytes());
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("sed = 3").is_err());
        assert!(RunConfig::from_toml("[model]\nomega_zz = 1.0").is_err());
        assert!(RunConfig::from_toml("[spectrum.frequency]\nlenght = 10").is_err());
        let ok = RunConfig::from_toml("seed = 3\n[model]\nomega_z = 0.5").unwrap();
        assert_eq!(ok.seed, 3);
        assert_eq!(ok.model.omega_z, 0.5);
        assert_eq!(ok.model.omega0, 1.5);
    }

    #[test]
    fn digest_ignores_output_location() {
        let a = RunConfig::default();
        let b = RunConfig {
            out: PathBuf::from("elsewhere"),
            threads: Some(3),
            ..RunConfig::default()
        };
        assert_eq!(a.digest(), b.digest());
        let c = RunConfig { seed: 2, ..RunConfig::default() };
        assert_ne!(a.digest(), c.digest());
    }
}
