//! Simulator for a downlink RIS-assisted multiuser MISO system with a
//! fluid-antenna (position-reconfigurable) transmit array.
//!
//! Two beamforming pipelines are implemented and cross-validated:
//!
//! * an optimization pipeline that alternates hybrid active beamforming,
//!   RIS phase shifts, and antenna positions under a block-coordinate
//!   descent loop (fractional programming + semidefinite relaxation for
//!   the beamforming blocks, majorization-minimization for positions);
//! * a closed-form pipeline for telescopic fluid antennas that places a
//!   grating lobe on each serving RIS, picks RIS phases by SLNR
//!   maximization, and finishes with MMSE digital precoding.
//!
//! The crate is organized around the data flow: [`scenario`] loads and
//! validates the static problem description, [`channel`] synthesizes
//! Rician channel realizations, [`metrics`] evaluates SINR/rate/beam
//! patterns, [`convex`] hosts the solver kernels, [`hbf`] / [`ris_opt`] /
//! [`fapos`] implement the three optimization blocks, [`tfa`] the
//! closed-form pipeline, and [`driver`] orchestrates experiments.

pub mod channel;
pub mod convex;
pub mod driver;
pub mod error;
pub mod fapos;
pub mod hbf;
pub mod linalg;
pub mod metrics;
pub mod ris_opt;
pub mod scenario;
pub mod tfa;
pub mod trace;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Speed of light used for wavelength derivation, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
