//! Non-demolition quasi-probability distributions for three-time
//! measurements of a finite-dimensional observable, with Leggett-Garg
//! analysis and an independent system-plus-detector simulation.

pub mod detector;
pub mod error;
pub mod lg;
pub mod linalg;
pub mod protocol;
pub mod qpd;
pub mod random;
pub mod sum;
pub mod tolerance;

pub use detector::{
    detect_lattice, invert_to_qpd, run_protocol, sample_characteristic, CharacteristicSamples, DetectorModel,
    Lattice,
};
pub use error::{Error, Result};
pub use lg::{lg_breakdown, verify_appendix_b, IdentityReport, LgBreakdown};
pub use linalg::{
    eigendecompose_hermitian, evolve, pure_state, CMatrix, DensityOperator, Dynamics, Observable,
    Schedule, UnitarySegment, C64,
};
pub use protocol::{enumerate_amplitudes, path_amplitude, AmplitudeSet, PathAmplitude, PathKind, ProtocolInstance};
pub use qpd::{build_qpd, negativity, QuasiDistribution, TimePair};
pub use random::haar_random_unitary;
pub use tolerance::Tolerances;
