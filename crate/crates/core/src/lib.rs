//! Numerical toolkit for Lindblad's extension of the quantum relative entropy,
//! quantum operations in Kraus and Stinespring form, and verification of the
//! monotonicity of discontinuity jumps of the relative entropy under quantum
//! operations on explicitly constructed converging sequences.

pub mod channel;
pub mod divergence;
pub mod error;
pub mod extended;
pub mod format;
pub mod operator;
pub mod random;
pub mod scaled;
pub mod sequence;
pub mod verify;

pub use channel::{KrausOperation, StinespringDilation, Validation};
pub use divergence::{
    donald, entropy_ext, eta, relative_entropy, relative_entropy_scaled, relative_entropy_via_rep,
    scaling_residuals, sum_decomposition_check, DonaldDecomposition, SumDecomposition,
};
pub use error::{Error, Result};
pub use extended::{ExtendedNonNegative, Gap};
pub use operator::{
    partial_trace_e, spectral_decompose, support_projector, tensor, trace_h_rho, CMatrix,
    HermitianMatrix, IsometryMatrix, PositiveOperator, Projector, Spectrum, C64,
};
pub use scaled::{LogSpectrum, TwoScaleOperator};
pub use sequence::{ProjectorLadder, SequenceTerm, StateSequenceFamily};
pub use verify::{JumpEstimate, ProofTrace};
