use crate::constants::TWO_PI;
use std::f64::consts::PI;

use super::OrbitError;

const MAX_NEWTON_ITERATIONS: usize = 50;
const RESIDUAL_TOLERANCE: f64 = 1e-13;

fn residual(ecc_anomaly: f64, mean_anomaly: f64, ecc: f64) -> f64 {
    ecc_anomaly - ecc * ecc_anomaly.sin() - mean_anomaly
}

/// Solves Kepler's equation `E − e·sin(E) = M` for the eccentric anomaly.
///
/// Newton iteration is seeded with `M` for `e < 0.8` and with `π` otherwise;
/// if it has not converged after 50 steps the root is bracketed on
/// `[0, 2π]` and bisected. The returned `E` differs from the reduced root
/// by the same multiple of 2π as `M` does from its reduction.
pub fn solve_kepler(mean_anomaly: f64, ecc: f64) -> Result<f64, OrbitError> {
    if !(0.0..1.0).contains(&ecc) || !mean_anomaly.is_finite() {
        return Err(OrbitError::InvalidEccentricity(ecc));
    }
    let turns = (mean_anomaly / TWO_PI).floor() * TWO_PI;
    let m = mean_anomaly - turns;
    if m == 0.0 || ecc == 0.0 {
        return Ok(mean_anomaly);
    }

    let mut e_anom = if ecc < 0.8 { m } else { PI };
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let f = residual(e_anom, m, ecc);
        if f.abs() < RESIDUAL_TOLERANCE {
            return Ok(e_anom + turns);
        }
        let step = f / (1.0 - ecc * e_anom.cos());
        e_anom -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    if residual(e_anom, m, ecc).abs() < RESIDUAL_TOLERANCE {
        return Ok(e_anom + turns);
    }

    bisect(m, ecc).map(|e| e + turns)
}

/// f(E) is strictly increasing with f(0) ≤ 0 < f(2π), so [0, 2π] always brackets.
fn bisect(m: f64, ecc: f64) -> Result<f64, OrbitError> {
    let (mut lo, mut hi) = (0.0_f64, TWO_PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = residual(mid, m, ecc);
        if f.abs() < RESIDUAL_TOLERANCE || mid == lo || mid == hi {
            return Ok(mid);
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(OrbitError::NonConvergence { mean_anomaly: m, eccentricity: ecc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: plain bisection with no Newton stage.
    fn bisection_oracle(m: f64, e: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, TWO_PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - e * mid.sin() - m < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_mean_anomaly() {
        for e in [0.0, 0.3, 0.9, 0.99] {
            assert_eq!(solve_kepler(0.0, e).unwrap(), 0.0);
        }
    }

    #[test]
    fn circular_identity() {
        assert_eq!(solve_kepler(1.234, 0.0).unwrap(), 1.234);
    }

    #[test]
    fn quarter_turn_moderate_eccentricity() {
        // Frozen from bisection_oracle(π/2, 0.1).
        let expected = 1.670_301_669_482;
        assert!((bisection_oracle(PI / 2.0, 0.1) - expected).abs() < 1e-10);
        let e = solve_kepler(PI / 2.0, 0.1).unwrap();
        assert!((e - expected).abs() < 1e-10, "{e}");
    }

    #[test]
    fn rejects_open_orbits() {
        assert!(matches!(solve_kepler(1.0, 1.0), Err(OrbitError::InvalidEccentricity(_))));
        assert!(solve_kepler(1.0, -0.1).is_err());
    }

    #[test]
    fn bisection_fallback_agrees() {
        for &(m, e) in &[(0.1, 0.95), (3.0, 0.5), (6.0, 0.99)] {
            let b = bisect(m, e).unwrap();
            assert!(residual(b, m, e).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_grid() {
        for i in 0..400 {
            let m = TWO_PI * i as f64 / 400.0;
            for j in 0..=95 {
                let e = j as f64 / 100.0;
                let ea = solve_kepler(m, e).unwrap();
                assert!(residual(ea, m, e).abs() < 1e-12, "M={m} e={e}");
            }
        }
    }

    proptest! {
        #[test]
        fn residual_below_tolerance(m in 0.0..TWO_PI, e in 0.0..0.95f64) {
            let ea = solve_kepler(m, e).unwrap();
            prop_assert!(residual(ea, m, e).abs() < 1e-12);
            prop_assert!((ea - bisection_oracle(m, e)).abs() < 1e-9);
        }

        #[test]
        fn unreduced_mean_anomaly(m in -50.0..50.0f64, e in 0.0..0.9f64) {
            let ea = solve_kepler(m, e).unwrap();
            prop_assert!(residual(ea, m, e).abs() < 1e-11);
        }
    }
}
