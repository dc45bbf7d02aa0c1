//! Concatenated quantum codes with generalized operators.

pub mod amplitude;
pub mod analysis;
pub mod ccp;
pub mod channels;
pub mod circuit;
pub mod code;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod oper;
pub mod pauli;
pub mod superop;
pub mod verify;

pub use amplitude::{error_amplitude, error_amplitude_value, AmplitudeSolution};
pub use channels::{ChannelKind, ChannelSpec};
pub use error::{Error, Result};
pub use oper::{GeneralizedOperator, SubspaceIsometry};
pub use code::{bit_flip_code, five_qubit_code, CodeSpec};
pub use pauli::{Pauli, PauliString};
pub use superop::QubitChannel;
pub use ccp::{ccp_channel, CCPConfig, LevelReport, NoiseMode, NoiseModel};
pub use mc::{mc_block_channel, mc_threshold_scan, McEstimate, PauliFamily, PauliProbs};
pub use analysis::{overhead, threshold_solve, OverheadReport, ThresholdReport};
