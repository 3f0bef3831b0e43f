//! Orbit models: Kepler's equation, two-body propagation, TLE ingestion,
//! Walker constellations and the receiver-centred local orbital frame.

mod elements;
mod frame;
mod kepler;
pub mod tle;
mod walker;

pub use elements::{propagate, KeplerianElements, StateVector};
pub use frame::{eci_to_local_orbital, LocalOrbitalFrame};
pub use kepler::solve_kepler;
pub use tle::{parse_tle, TleError, TleParse, TleRecord};
pub use walker::{generate_walker, WalkerSpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("eccentricity {0} outside [0, 1)")]
    InvalidEccentricity(f64),
    #[error("semi-major axis {0} km is not above the Earth's equatorial radius")]
    InvalidSemiMajorAxis(f64),
    #[error("non-finite orbital element `{0}`")]
    NonFinite(&'static str),
    #[error("Kepler iteration failed for M = {mean_anomaly}, e = {eccentricity}")]
    NonConvergence { mean_anomaly: f64, eccentricity: f64 },
    #[error("invalid Walker pattern {t}/{p}/{f}: {reason}")]
    InvalidWalker { t: u32, p: u32, f: u32, reason: &'static str },
    #[error("local orbital frame is degenerate (|r × v| = {0:e})")]
    DegenerateFrame(f64),
}
