//! Simulation of a four-photon decoherence-free logical qubit: state
//! algebra, collective polarization noise, a parametric down-conversion
//! source model, fourfold coincidence statistics and logical tomography.

pub mod error;
pub mod measurement;
pub mod optics;
pub mod rng;
pub mod spdc;
pub mod states;
pub mod tensor;
pub mod tomography;

pub use error::{Error, Result};
pub use measurement::{
    outcome_probabilities, qber, Basis, CountRecord, MeasurementSetting, OutcomeDistribution,
};
pub use optics::{collective, PauliCoefficients, WaveplateKind, WaveplateSetting};
pub use rng::SeedStream;
pub use spdc::{FockState, SourceModel};
pub use states::{
    decode_logical, encode_logical, phi0, phi1, psi_l, DfReadout, FourfoldOutcome, LogicalQubit,
};
pub use tensor::{DensityOperator, Ket, Operator, Pauli, QuantumState, C64};
pub use tomography::{fidelity, reconstruct, LogicalDensityMatrix, SigmaKind, SigmaObservable};
