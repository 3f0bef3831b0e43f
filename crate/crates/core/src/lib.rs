//! Simulation of GNSS signal reception by spacecraft flying above the GNSS
//! constellations: orbit propagation, link budget, Earth occultation,
//! acquisition/tracking hysteresis and navigation metrics.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod constants;
pub mod geometry;
pub mod link;
pub mod nav;
pub mod orbit;
pub mod scenario;
pub mod time;
pub mod tracking;

pub use time::EpochTime;
