//! Navigation performance: DOP family, error covariance in the local
//! orbital frame, availability and percentile statistics.
//!
//! Axis convention: index 0 is radial ("vertical"), 1 and 2 are along- and
//! cross-track ("horizontal"), 3 is the receiver clock.

use nalgebra::{Matrix4, MatrixXx4, SymmetricEigen, Vector3, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbit::{LocalOrbitalFrame, OrbitError, StateVector};

/// HᵀH condition numbers above this make the epoch UNDEFINED.
pub const MAX_CONDITION_NUMBER: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NavError {
    #[error("satellite {0} coincides with the receiver")]
    DegenerateGeometry(usize),
    #[error("need at least {needed} satellites, have {have}")]
    InsufficientSatellites { needed: usize, have: usize },
    #[error("DOP is undefined for this geometry")]
    UndefinedDop,
    #[error("series is empty")]
    EmptySeries,
    #[error("percentile {0} outside [0, 100]")]
    InvalidPercentile(f64),
    #[error("UERE must be positive, got {0} m")]
    InvalidUere(f64),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    /// 1-sigma user-equivalent range error, metres.
    pub uere_sigma_m: f64,
}

impl Default for ErrorModel {
    fn default() -> Self {
        Self { uere_sigma_m: 5.0 }
    }
}

impl ErrorModel {
    pub fn validate(&self) -> Result<(), NavError> {
        if !(self.uere_sigma_m > 0.0) || !self.uere_sigma_m.is_finite() {
            return Err(NavError::InvalidUere(self.uere_sigma_m));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dops {
    pub gdop: f64,
    pub pdop: f64,
    pub hdop: f64,
    pub vdop: f64,
    pub tdop: f64,
    /// (HᵀH)⁻¹
    pub cofactor: Matrix4<f64>,
}

/// Builds the n×4 geometry matrix with rows `[−u, 1]`, `u` the unit
/// receiver-to-satellite vector in the receiver's local orbital frame.
pub fn geometry_matrix(rx: &StateVector, sat_positions: &[Vector3<f64>]) -> Result<MatrixXx4<f64>, NavError> {
    let frame = LocalOrbitalFrame::from_state(rx)?;
    let mut h = MatrixXx4::zeros(sat_positions.len());
    for (i, sat) in sat_positions.iter().enumerate() {
        let los = sat - rx.position;
        if los.norm() == 0.0 {
            return Err(NavError::DegenerateGeometry(i));
        }
        let u = frame.to_local(&los.normalize());
        h.set_row(i, &nalgebra::RowVector4::new(-u.x, -u.y, -u.z, 1.0));
    }
    Ok(h)
}

/// Geometry matrix from local-frame unit vectors directly.
pub fn geometry_matrix_from_units(units: &[Vector3<f64>]) -> MatrixXx4<f64> {
    let mut h = MatrixXx4::zeros(units.len());
    for (i, u) in units.iter().enumerate() {
        h.set_row(i, &nalgebra::RowVector4::new(-u.x, -u.y, -u.z, 1.0));
    }
    h
}

/// DOP family from a geometry matrix; `Ok(None)` when HᵀH is too badly
/// conditioned to invert meaningfully.
pub fn dops(h: &MatrixXx4<f64>) -> Result<Option<Dops>, NavError> {
    if h.nrows() < 4 {
        return Err(NavError::InsufficientSatellites { needed: 4, have: h.nrows() });
    }
    let normal: Matrix4<f64> = h.transpose() * h;
    let eig = SymmetricEigen::new(normal);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) || max / min > MAX_CONDITION_NUMBER {
        return Ok(None);
    }
    let Some(q) = normal.cholesky().map(|c| c.inverse()) else {
        return Ok(None);
    };
    let d = q.diagonal();
    Ok(Some(Dops {
        gdop: d.sum().sqrt(),
        pdop: (d[0] + d[1] + d[2]).sqrt(),
        hdop: (d[1] + d[2]).sqrt(),
        vdop: d[0].sqrt(),
        tdop: d[3].sqrt(),
        cofactor: q,
    }))
}

/// 1-sigma position error (m) along radial, along-track and cross-track.
pub fn position_error_sigma(q: &Matrix4<f64>, err: &ErrorModel) -> Result<[f64; 3], NavError> {
    err.validate()?;
    Ok([0, 1, 2].map(|k| err.uere_sigma_m * q[(k, k)].sqrt()))
}

/// Empirical per-axis position error sigma from least-squares solutions
/// under independent zero-mean Gaussian range errors.
pub fn monte_carlo_position_sigma(
    h: &MatrixXx4<f64>,
    err: &ErrorModel,
    trials: usize,
    seed: u64,
) -> Result<[f64; 3], NavError> {
    err.validate()?;
    let dops = dops(h)?.ok_or(NavError::UndefinedDop)?;
    let solve = dops.cofactor * h.transpose();
    let normal = Normal::new(0.0, err.uere_sigma_m).map_err(|_| NavError::InvalidUere(err.uere_sigma_m))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum_sq = Vector4::zeros();
    let mut noise = nalgebra::DVector::zeros(h.nrows());
    for _ in 0..trials.max(1) {
        noise.iter_mut().for_each(|e| *e = normal.sample(&mut rng));
        let dx = &solve * &noise;
        sum_sq += dx.component_mul(&dx);
    }
    let n = trials.max(1) as f64;
    Ok([0, 1, 2].map(|k| (sum_sq[k] / n).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Availability {
    pub fraction: f64,
    /// Seconds with at least `min_sats` tracked.
    pub total_time_s: f64,
}

/// Fraction of a uniform epoch grid with at least `min_sats` tracked.
pub fn availability(tracked_counts: &[usize], step_s: f64, min_sats: usize) -> Result<Availability, NavError> {
    if tracked_counts.is_empty() {
        return Err(NavError::EmptySeries);
    }
    let good = tracked_counts.iter().filter(|&&c| c >= min_sats).count();
    Ok(Availability {
        fraction: good as f64 / tracked_counts.len() as f64,
        total_time_s: good as f64 * step_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Percentile {
    pub value: f64,
    /// Undefined or non-finite entries left out.
    pub excluded: usize,
}

/// Nearest-rank percentile over the finite entries of `series`.
pub fn percentile(series: &[Option<f64>], p: f64) -> Result<Percentile, NavError> {
    if !(0.0..=100.0).contains(&p) {
        return Err(NavError::InvalidPercentile(p));
    }
    let mut values: Vec<f64> = series.iter().filter_map(|v| v.filter(|x| x.is_finite())).collect();
    let excluded = series.len() - values.len();
    if values.is_empty() {
        return Err(NavError::EmptySeries);
    }
    values.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * values.len() as f64).ceil().max(1.0) as usize;
    Ok(Percentile { value: values[rank.min(values.len()) - 1], excluded })
}

/// Arithmetic mean of the defined entries, summed in series order.
pub fn mean_defined(series: &[Option<f64>]) -> Option<f64> {
    let mut n = 0usize;
    let mut sum = 0.0;
    for v in series.iter().flatten().filter(|v| v.is_finite()) {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}
