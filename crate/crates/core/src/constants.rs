//! Physical constants shared by every module (WGS-84 values where applicable).

/// Earth gravitational parameter (km³/s²).
pub const MU_EARTH: f64 = 398_600.441_8;

/// Earth equatorial radius (km).
pub const R_EARTH: f64 = 6_378.137;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// −10·log10(k_B) in dBW/K/Hz.
pub const BOLTZMANN_DB: f64 = 228.6;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
