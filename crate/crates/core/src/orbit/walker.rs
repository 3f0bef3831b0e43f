use serde::{Deserialize, Serialize};

use super::{KeplerianElements, OrbitError};
use crate::constants::TWO_PI;
use crate::time::EpochTime;

/// Walker delta pattern `t/p/f` with shared semi-major axis and inclination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkerSpec {
    pub total_sats: u32,
    pub planes: u32,
    pub phasing: u32,
    /// km
    pub semi_major_axis: f64,
    /// rad
    pub inclination: f64,
    /// rad
    pub raan_offset: f64,
    /// rad
    pub anomaly_offset: f64,
    pub epoch: EpochTime,
}

impl WalkerSpec {
    pub fn validate(&self) -> Result<(), OrbitError> {
        let err = |reason| OrbitError::InvalidWalker {
            t: self.total_sats,
            p: self.planes,
            f: self.phasing,
            reason,
        };
        if self.total_sats == 0 || self.planes == 0 {
            return Err(err("t and p must be positive"));
        }
        if !self.total_sats.is_multiple_of(self.planes) {
            return Err(err("t must be a multiple of p"));
        }
        if self.phasing >= self.planes {
            return Err(err("phasing f must satisfy 0 <= f < p"));
        }
        Ok(())
    }

    pub fn sats_per_plane(&self) -> u32 {
        self.total_sats / self.planes
    }
}

/// Expands a Walker delta pattern into circular element sets, plane-major
/// then slot-minor, so index `plane * (t/p) + slot` is stable across runs.
pub fn generate_walker(spec: &WalkerSpec) -> Result<Vec<KeplerianElements>, OrbitError> {
    spec.validate()?;
    let t = spec.total_sats as f64;
    let p = spec.planes as f64;
    let per_plane = spec.sats_per_plane();
    let mut out = Vec::with_capacity(spec.total_sats as usize);
    for plane in 0..spec.planes {
        let raan = spec.raan_offset + plane as f64 * TWO_PI / p;
        for slot in 0..per_plane {
            let anomaly = spec.anomaly_offset
                + slot as f64 * TWO_PI / per_plane as f64
                + plane as f64 * spec.phasing as f64 * TWO_PI / t;
            out.push(KeplerianElements::new(
                spec.semi_major_axis,
                0.0,
                spec.inclination,
                raan,
                0.0,
                anomaly,
                spec.epoch,
            )?);
        }
    }
    Ok(out)
}
