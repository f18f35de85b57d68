//! Black-box quantum state loading with amplitude-gradient states.
//!
//! The crate simulates the two-stage fixed-point amplitude-amplification
//! loader at desk scale, builds the gate-level primitives it relies on
//! (gradient-state preparation, oracle conversion, comparator, permutation
//! network), and counts circuit resources.

pub mod amplify;
pub mod amplitudes;
pub mod bootstrap;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod gradient;
pub mod oracles;
pub mod resources;
pub mod statesim;

pub use amplitudes::{quantize, AmplitudeVector, NormSummary, QuantizedAmplitudes};
pub use error::{Error, Result};
pub use statesim::{Circuit, Gate, StateVector};

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: usize) -> usize {
    assert!(n >= 1, "ceil_log2 of zero");
    (usize::BITS - (n - 1).leading_zeros()) as usize
}
