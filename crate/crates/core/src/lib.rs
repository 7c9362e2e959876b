//! Simulation library for nonstationary harmonic-oscillator dynamics,
//! resonant perturbation theory and wave-based scattering kinematics.
//!
//! Oscillator work uses [`OscillatorUnits`] (natural units by default);
//! atomic and relativistic formulas take Gaussian-CGS [`PhysicalConstants`].

pub mod banded;
pub mod basis;
pub mod constants;
pub mod error;
pub mod export;
pub mod kinematics;
pub mod packets;
pub mod perturbation;
pub mod roots;
pub mod tdse;
pub mod timescales;

pub use basis::{
    decompose, eigenenergy, eigenfunction, reconstruct, EigenTable, Grid, GridWaveFunction,
    SpectralState,
};
pub use constants::{
    fine_structure, natural_units, OscillatorUnits, PhysicalConstants, CODATA_2018,
};
pub use error::{Error, Result};
pub use kinematics::{ComptonSolution, InfeasibilityReport, WavePacketQuantum};
pub use packets::{BreathingPacketParams, CoherentPacketParams, EnergyStats};
pub use perturbation::{Coupling, MatrixElements, PerturbationSpec, ScanResult, TwoLevelDrive};
pub use tdse::{EvolutionConfig, Hamiltonian, KineticStencil, Stepper, Trajectory};
pub use timescales::TimescaleReport;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
