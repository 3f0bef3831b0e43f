use nalgebra::{Matrix3, Vector3};

use super::{OrbitError, StateVector};

const DEGENERATE_TOLERANCE: f64 = 1e-9;

/// Receiver-centred (radial, along-track, cross-track) triad.
///
/// Radial is the unit position vector, cross-track the unit orbit normal,
/// and along-track completes the right-handed set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOrbitalFrame {
    pub radial: Vector3<f64>,
    pub along: Vector3<f64>,
    pub cross: Vector3<f64>,
}

impl LocalOrbitalFrame {
    pub fn from_state(state: &StateVector) -> Result<Self, OrbitError> {
        let h = state.position.cross(&state.velocity);
        let scale = state.position.norm() * state.velocity.norm();
        if !(scale > 0.0) || h.norm() <= DEGENERATE_TOLERANCE * scale {
            return Err(OrbitError::DegenerateFrame(h.norm()));
        }
        let radial = state.position.normalize();
        let cross = h.normalize();
        let along = cross.cross(&radial);
        Ok(Self { radial, along, cross })
    }

    /// Rows are the frame axes, so `rotation() * v_eci` gives local components.
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[self.radial.transpose(), self.along.transpose(), self.cross.transpose()])
    }

    pub fn to_local(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(self.radial.dot(v), self.along.dot(v), self.cross.dot(v))
    }

    pub fn to_inertial(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.radial * v.x + self.along * v.y + self.cross * v.z
    }
}

/// Expresses an inertial vector in the receiver's local orbital frame.
pub fn eci_to_local_orbital(
    receiver: &StateVector,
    vector_eci: &Vector3<f64>,
) -> Result<Vector3<f64>, OrbitError> {
    Ok(LocalOrbitalFrame::from_state(receiver)?.to_local(vector_eci))
}
