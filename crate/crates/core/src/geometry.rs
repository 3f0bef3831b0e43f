//! Line-of-sight geometry between a receiver and a transmitter: Earth and
//! atmosphere occultation, nadir-pointing antenna angles, skyplot
//! coordinates and Doppler.

use nalgebra::Vector3;
use thiserror::Error;

use crate::constants::{R_EARTH, SPEED_OF_LIGHT};
use crate::link::CarrierBand;
use crate::orbit::{propagate, KeplerianElements, LocalOrbitalFrame, OrbitError, StateVector};
use crate::time::EpochTime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("position {0:?} km is below the Earth's surface")]
    InvalidPosition([f64; 3]),
    #[error("transmitter and receiver positions coincide")]
    DegenerateGeometry,
    #[error("Doppler-rate step must be positive, got {0} s")]
    InvalidStep(f64),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occultation {
    pub occluded: bool,
    /// Lowest altitude (km) reached along the segment.
    pub grazing_altitude: f64,
}

/// Everything the link model needs about one receiver/transmitter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosGeometry {
    pub range: f64,
    pub tx_off_boresight: f64,
    pub rx_off_boresight: f64,
    pub occluded: bool,
    pub grazing_altitude: f64,
    pub azimuth: f64,
    pub elevation: f64,
}

/// Hides the segment `rx → tx` when its point closest to the Earth's centre
/// is strictly inside the segment and lower than `mask_altitude`.
pub fn occultation(
    rx_pos: &Vector3<f64>,
    tx_pos: &Vector3<f64>,
    mask_altitude_km: f64,
) -> Result<Occultation, GeometryError> {
    for p in [rx_pos, tx_pos] {
        if !(p.norm() > R_EARTH) {
            return Err(GeometryError::InvalidPosition([p.x, p.y, p.z]));
        }
    }
    let endpoint_alt = rx_pos.norm().min(tx_pos.norm()) - R_EARTH;
    let d = tx_pos - rx_pos;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return Ok(Occultation { occluded: false, grazing_altitude: endpoint_alt });
    }
    let s = -rx_pos.dot(&d) / len2;
    if s > 0.0 && s < 1.0 {
        // |r₁ × r₂| / |r₂ − r₁| is the centre-to-line distance; symmetric in the endpoints.
        let grazing = rx_pos.cross(tx_pos).norm() / len2.sqrt() - R_EARTH;
        Ok(Occultation { occluded: grazing < mask_altitude_km, grazing_altitude: grazing })
    } else {
        Ok(Occultation { occluded: false, grazing_altitude: endpoint_alt })
    }
}

/// Angle between two vectors in degrees, robust near 0° and 180°.
pub(crate) fn angle_between_deg(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b)).to_degrees()
}

/// Off-boresight angles (deg) for nadir-pointing antennas on both ends.
pub fn off_boresight_angles(rx_pos: &Vector3<f64>, tx_pos: &Vector3<f64>) -> Result<(f64, f64), GeometryError> {
    let los = tx_pos - rx_pos;
    if los.norm() == 0.0 {
        return Err(GeometryError::DegenerateGeometry);
    }
    let tx_angle = angle_between_deg(&(-tx_pos), &(-los));
    let rx_angle = angle_between_deg(&(-rx_pos), &los);
    Ok((tx_angle, rx_angle))
}

/// Azimuth and elevation (deg) of `tx_pos` seen from a nadir-pointing
/// receiver. Elevation is measured from the plane normal to the boresight
/// (+90° is straight down at the Earth's centre); azimuth is measured in
/// that plane from along-track towards cross-track, in [0, 360).
pub fn skyplot_coords(rx_state: &StateVector, tx_pos: &Vector3<f64>) -> Result<(f64, f64), GeometryError> {
    let frame = LocalOrbitalFrame::from_state(rx_state)?;
    let los = tx_pos - rx_state.position;
    if los.norm() == 0.0 {
        return Err(GeometryError::DegenerateGeometry);
    }
    Ok(local_to_skyplot(&frame.to_local(&los.normalize())))
}

/// Maps a local (radial, along, cross) unit vector to skyplot angles.
pub fn local_to_skyplot(u: &Vector3<f64>) -> (f64, f64) {
    let elevation = (-u.x).clamp(-1.0, 1.0).asin().to_degrees();
    let azimuth = u.z.atan2(u.y).to_degrees().rem_euclid(360.0);
    let azimuth = if azimuth >= 360.0 { 0.0 } else { azimuth };
    (azimuth, elevation)
}

/// Inverse of [`local_to_skyplot`].
pub fn skyplot_to_local(azimuth_deg: f64, elevation_deg: f64) -> Vector3<f64> {
    let (sin_el, cos_el) = elevation_deg.to_radians().sin_cos();
    let (sin_az, cos_az) = azimuth_deg.to_radians().sin_cos();
    Vector3::new(-sin_el, cos_el * cos_az, cos_el * sin_az)
}

/// Range rate (km/s) of the transmitter relative to the receiver.
pub fn range_rate(rx: &StateVector, tx: &StateVector) -> Result<f64, GeometryError> {
    let r_rel = tx.position - rx.position;
    let dist = r_rel.norm();
    if dist == 0.0 {
        return Err(GeometryError::DegenerateGeometry);
    }
    Ok(r_rel.dot(&(tx.velocity - rx.velocity)) / dist)
}

/// Doppler shift (Hz), positive when the range is closing.
pub fn doppler(rx: &StateVector, tx: &StateVector, band: &CarrierBand) -> Result<f64, GeometryError> {
    let rate_m_s = range_rate(rx, tx)? * 1e3;
    Ok(-band.frequency_hz() / SPEED_OF_LIGHT * rate_m_s)
}

/// Doppler rate (Hz/s) by central difference over `±dt`.
pub fn doppler_rate(
    rx: &KeplerianElements,
    tx: &KeplerianElements,
    band: &CarrierBand,
    t: EpochTime,
    dt: f64,
) -> Result<f64, GeometryError> {
    if !(dt > 0.0) {
        return Err(GeometryError::InvalidStep(dt));
    }
    let at = |t: EpochTime| -> Result<f64, GeometryError> {
        doppler(&propagate(rx, t)?, &propagate(tx, t)?, band)
    };
    Ok((at(t + dt)? - at(t - dt)?) / (2.0 * dt))
}

/// Full line-of-sight evaluation for one pair of states.
pub fn line_of_sight(rx: &StateVector, tx: &StateVector, mask_altitude_km: f64) -> Result<LosGeometry, GeometryError> {
    let occ = occultation(&rx.position, &tx.position, mask_altitude_km)?;
    let (tx_off_boresight, rx_off_boresight) = off_boresight_angles(&rx.position, &tx.position)?;
    let (azimuth, elevation) = skyplot_coords(rx, &tx.position)?;
    Ok(LosGeometry {
        range: (tx.position - rx.position).norm(),
        tx_off_boresight,
        rx_off_boresight,
        occluded: occ.occluded,
        grazing_altitude: occ.grazing_altitude,
        azimuth,
        elevation,
    })
}
