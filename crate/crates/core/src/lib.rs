//! Finite-size security analysis and Monte Carlo simulation of four-state
//! discrete-modulation continuous-variable QKD.
//!
//! Units are shot-noise units (vacuum quadrature variance 1). Information
//! quantities are in bits.

pub mod channel;
pub mod config;
pub mod definetti;
pub mod error;
pub mod finite_key;
pub mod gaussian;
pub mod hash;
pub mod modulation;
pub mod params;
pub mod pe;
pub mod reconciliation;
pub mod report;
pub mod rng;
pub mod validate;
pub mod workflow;

pub use error::{Error, Result};
pub use gaussian::{holevo_f, symplectic_eigenvalues, SymplecticSpectrum, TwoModeCovariance};
pub use params::{ChannelParams, ProtocolParams, RoundCounts};
