use nalgebra::{Rotation3, Vector3};
use serde::Serialize;

use super::{solve_kepler, OrbitError};
use crate::constants::{MU_EARTH, R_EARTH, TWO_PI};
use crate::time::EpochTime;

/// Classical element set for two-body propagation. Distances in km, angles
/// in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeplerianElements {
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    pub inclination: f64,
    pub raan: f64,
    pub arg_perigee: f64,
    pub mean_anomaly_at_epoch: f64,
    pub epoch: EpochTime,
}

/// Inertial position (km) and velocity (km/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub epoch: EpochTime,
}

pub(crate) fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TWO_PI);
    // rem_euclid can return exactly 2π for tiny negative inputs
    if wrapped >= TWO_PI {
        0.0
    } else {
        wrapped
    }
}

impl KeplerianElements {
    /// Builds a validated element set; angles are normalized into [0, 2π).
    pub fn new(
        semi_major_axis: f64,
        eccentricity: f64,
        inclination: f64,
        raan: f64,
        arg_perigee: f64,
        mean_anomaly_at_epoch: f64,
        epoch: EpochTime,
    ) -> Result<Self, OrbitError> {
        for (name, v) in [
            ("semi_major_axis", semi_major_axis),
            ("inclination", inclination),
            ("raan", raan),
            ("arg_perigee", arg_perigee),
            ("mean_anomaly", mean_anomaly_at_epoch),
            ("epoch", epoch.seconds()),
        ] {
            if !v.is_finite() {
                return Err(OrbitError::NonFinite(name));
            }
        }
        if semi_major_axis <= R_EARTH {
            return Err(OrbitError::InvalidSemiMajorAxis(semi_major_axis));
        }
        if !(0.0..1.0).contains(&eccentricity) {
            return Err(OrbitError::InvalidEccentricity(eccentricity));
        }
        Ok(Self {
            semi_major_axis,
            eccentricity,
            inclination: wrap_angle(inclination),
            raan: wrap_angle(raan),
            arg_perigee: wrap_angle(arg_perigee),
            mean_anomaly_at_epoch: wrap_angle(mean_anomaly_at_epoch),
            epoch,
        })
    }

    /// Mean motion in rad/s.
    pub fn mean_motion(&self) -> f64 {
        (MU_EARTH / self.semi_major_axis.powi(3)).sqrt()
    }

    /// Orbital period in seconds.
    pub fn period(&self) -> f64 {
        TWO_PI / self.mean_motion()
    }

    pub fn propagate(&self, t: EpochTime) -> Result<StateVector, OrbitError> {
        propagate(self, t)
    }
}

/// Two-body (unperturbed) element-to-state conversion at time `t`.
pub fn propagate(elements: &KeplerianElements, t: EpochTime) -> Result<StateVector, OrbitError> {
    let a = elements.semi_major_axis;
    let e = elements.eccentricity;
    let dt = t - elements.epoch;
    let mean_anomaly = wrap_angle(elements.mean_anomaly_at_epoch + elements.mean_motion() * dt);
    let ecc_anomaly = solve_kepler(mean_anomaly, e)?;

    let (sin_e, cos_e) = ecc_anomaly.sin_cos();
    let root = (1.0 - e * e).sqrt();
    let radius = a * (1.0 - e * cos_e);
    let pos_pf = Vector3::new(a * (cos_e - e), a * root * sin_e, 0.0);
    let speed_scale = (MU_EARTH * a).sqrt() / radius;
    let vel_pf = Vector3::new(-sin_e * speed_scale, root * cos_e * speed_scale, 0.0);

    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), elements.raan)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), elements.inclination)
        * Rotation3::from_axis_angle(&Vector3::z_axis(), elements.arg_perigee);

    Ok(StateVector { position: rot * pos_pf, velocity: rot * vel_pf, epoch: t })
}

impl StateVector {
    /// v²/2 − μ/r, km²/s².
    pub fn specific_energy(&self) -> f64 {
        0.5 * self.velocity.norm_squared() - MU_EARTH / self.position.norm()
    }

    pub fn angular_momentum(&self) -> Vector3<f64> {
        self.position.cross(&self.velocity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn epoch() -> EpochTime {
        EpochTime::from_calendar(2008, 3, 22, 0, 0, 0.0).unwrap()
    }

    fn meteosat9() -> KeplerianElements {
        KeplerianElements::new(
            42_166.892,
            0.0,
            1.02_f64.to_radians(),
            209.006_f64.to_radians(),
            0.0,
            0.0,
            epoch(),
        )
        .unwrap()
    }

    #[test]
    fn circular_equatorial_identities() {
        let el = KeplerianElements::new(7000.0, 0.0, 0.0, 0.0, 0.0, 0.3, epoch()).unwrap();
        let s = propagate(&el, epoch()).unwrap();
        assert!((s.position.norm() - 7000.0).abs() < 1e-9);
        assert!((s.velocity.norm() - (MU_EARTH / 7000.0).sqrt()).abs() < 1e-12);
        assert!(s.position.z.abs() < 1e-12);
    }

    #[test]
    fn geostationary_period_closure() {
        let el = meteosat9();
        let period = el.period();
        // 23h56m and change
        assert!((period / 3600.0 - 23.93).abs() < 0.01, "{period}");
        let s0 = propagate(&el, epoch()).unwrap();
        let s1 = propagate(&el, epoch() + period).unwrap();
        assert!((s1.position - s0.position).norm() < 1e-3);
        assert!((s1.velocity - s0.velocity).norm() < 1e-6);
    }

    #[test]
    fn invariants_enforced() {
        assert!(matches!(
            KeplerianElements::new(6000.0, 0.0, 0.0, 0.0, 0.0, 0.0, epoch()),
            Err(OrbitError::InvalidSemiMajorAxis(_))
        ));
        assert!(KeplerianElements::new(7000.0, 1.0, 0.0, 0.0, 0.0, 0.0, epoch()).is_err());
        assert!(KeplerianElements::new(7000.0, 0.0, f64::NAN, 0.0, 0.0, 0.0, epoch()).is_err());
        let el = KeplerianElements::new(7000.0, 0.1, -0.5, 7.0, -1.0, 13.0, epoch()).unwrap();
        for a in [el.inclination, el.raan, el.arg_perigee, el.mean_anomaly_at_epoch] {
            assert!((0.0..TWO_PI).contains(&a));
        }
    }

    #[test]
    fn perigee_on_x_axis_for_zero_angles() {
        let el = KeplerianElements::new(10_000.0, 0.2, 0.0, 0.0, 0.0, 0.0, epoch()).unwrap();
        let s = propagate(&el, epoch()).unwrap();
        assert!((s.position - Vector3::new(8000.0, 0.0, 0.0)).norm() < 1e-9);
        assert!(s.velocity.y > 0.0);
    }

    fn arb_elements() -> impl Strategy<Value = KeplerianElements> {
        (7000.0..50_000.0f64, 0.0..0.7f64, 0.0..3.1f64, 0.0..6.2f64, 0.0..6.2f64, 0.0..6.2f64)
            .prop_filter_map("perigee above surface", |(a, e, i, raan, w, m)| {
                if a * (1.0 - e) <= R_EARTH {
                    return None;
                }
                KeplerianElements::new(a, e, i, raan, w, m, epoch()).ok()
            })
    }

    proptest! {
        #[test]
        fn energy_and_momentum_conserved(el in arb_elements(), hours in 0.0..48.0f64) {
            let s0 = propagate(&el, epoch()).unwrap();
            let s1 = propagate(&el, epoch() + hours * 3600.0).unwrap();
            let e0 = s0.specific_energy();
            prop_assert!(((s1.specific_energy() - e0) / e0).abs() < 1e-9);
            let h0 = s0.angular_momentum();
            prop_assert!((s1.angular_momentum() - h0).norm() / h0.norm() < 1e-9);
            // vis-viva: energy equals −μ/2a
            prop_assert!(((e0 + MU_EARTH / (2.0 * el.semi_major_axis)) / e0).abs() < 1e-9);
        }

        #[test]
        fn one_period_returns_to_start(el in arb_elements()) {
            let s0 = propagate(&el, epoch()).unwrap();
            let s1 = propagate(&el, epoch() + el.period()).unwrap();
            prop_assert!((s1.position - s0.position).norm() < 1e-3);
            prop_assert!((s1.velocity - s0.velocity).norm() < 1e-6);
        }
    }
}
