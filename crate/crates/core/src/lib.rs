//! Downlink channel estimation for FDD massive MIMO from one bit of feedback
//! per real dimension.
//!
//! The pipeline is: draw jointly sparse angular-domain channels
//! ([`channel`]), train with binary pilots and quantize the received block to
//! signs ([`airlink`]), recover the channel directions with joint binary
//! iterative hard thresholding or one of the baselines ([`recovery`]), and
//! score the recovered beamformers by output SNR loss ([`evaluation`]).

pub mod airlink;
pub mod channel;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod numerics;
pub mod recovery;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, RandomSource, C64};
