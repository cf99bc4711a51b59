//! Reservoir computers built on signed {-1, 0, +1} networks.
//!
//! The crate covers the whole experimental pipeline: signal generation
//! ([`signals`]), network construction and edge flipping ([`network`]),
//! exact automorphism counting ([`symmetry`]), reservoir integration
//! ([`reservoir`]), the SVD ridge readout ([`readout`]), covariance rank and
//! memory capacity ([`analysis`]) and seeded experiment sweeps
//! ([`harness`]).

pub mod analysis;
pub mod eigen;
pub mod error;
pub mod harness;
pub mod network;
pub mod ode;
pub mod readout;
pub mod reservoir;
pub mod rng;
pub mod signals;
pub mod symmetry;

pub use error::{Error, Result};
