//! Acquisition/tracking hysteresis over a per-satellite C/N0 series.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::EpochTime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrackError {
    #[error("tracking threshold {tracking} dBHz exceeds acquisition threshold {acquisition} dBHz")]
    InvalidThresholds { acquisition: f64, tracking: f64 },
    #[error("sample {index}: epoch {epoch} does not follow the previous sample")]
    NonMonotonicTime { index: usize, epoch: EpochTime },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackThresholds {
    pub acquisition: f64,
    pub tracking: f64,
}

impl TrackThresholds {
    pub fn new(acquisition: f64, tracking: f64) -> Result<Self, TrackError> {
        let th = Self { acquisition, tracking };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<(), TrackError> {
        if !(self.tracking <= self.acquisition) {
            return Err(TrackError::InvalidThresholds { acquisition: self.acquisition, tracking: self.tracking });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LockState {
    Idle,
    Tracked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    pub state: LockState,
    /// Epoch of the last transition.
    pub since: EpochTime,
    /// Start of the current uninterrupted run of acquirable samples while Idle.
    acquirable_since: Option<EpochTime>,
}

impl TrackState {
    pub fn idle(since: EpochTime) -> Self {
        Self { state: LockState::Idle, since, acquirable_since: None }
    }

    pub fn is_tracked(&self) -> bool {
        self.state == LockState::Tracked
    }
}

/// One C/N0 sample; `cn0 = None` means the satellite is absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cn0Sample {
    pub epoch: EpochTime,
    pub cn0: Option<f64>,
    pub occluded: bool,
}

/// Advances the lock state by one sample with no acquisition dwell.
pub fn step(state: TrackState, cn0: Option<f64>, occluded: bool, th: &TrackThresholds, t: EpochTime) -> TrackState {
    step_with_dwell(state, cn0, occluded, th, 0.0, t)
}

/// As [`step`], but Idle → Tracked additionally requires the acquisition
/// condition to have held for at least `min_dwell_s` seconds.
pub fn step_with_dwell(
    state: TrackState,
    cn0: Option<f64>,
    occluded: bool,
    th: &TrackThresholds,
    min_dwell_s: f64,
    t: EpochTime,
) -> TrackState {
    match state.state {
        LockState::Tracked => {
            let keep = !occluded && cn0.is_some_and(|c| c >= th.tracking);
            if keep {
                state
            } else {
                TrackState::idle(t)
            }
        }
        LockState::Idle => {
            let acquirable = !occluded && cn0.is_some_and(|c| c >= th.acquisition);
            if !acquirable {
                return TrackState { acquirable_since: None, ..state };
            }
            let start = state.acquirable_since.unwrap_or(t);
            if t - start >= min_dwell_s {
                TrackState { state: LockState::Tracked, since: t, acquirable_since: None }
            } else {
                TrackState { acquirable_since: Some(start), ..state }
            }
        }
    }
}

/// Folds [`step`] over a series starting from Idle.
pub fn run_series(series: &[Cn0Sample], th: &TrackThresholds) -> Result<Vec<TrackState>, TrackError> {
    run_series_with_dwell(series, th, 0.0)
}

pub fn run_series_with_dwell(
    series: &[Cn0Sample],
    th: &TrackThresholds,
    min_dwell_s: f64,
) -> Result<Vec<TrackState>, TrackError> {
    th.validate()?;
    let Some(first) = series.first() else {
        return Ok(Vec::new());
    };
    let mut state = TrackState::idle(first.epoch);
    let mut out = Vec::with_capacity(series.len());
    for (index, s) in series.iter().enumerate() {
        if index > 0 && s.epoch <= series[index - 1].epoch {
            return Err(TrackError::NonMonotonicTime { index, epoch: s.epoch });
        }
        state = step_with_dwell(state, s.cn0, s.occluded, th, min_dwell_s, s.epoch);
        out.push(state);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TH: TrackThresholds = TrackThresholds { acquisition: 29.0, tracking: 27.0 };

    fn t(k: usize) -> EpochTime {
        EpochTime::from_seconds(60.0 * k as f64)
    }

    fn series(values: &[f64]) -> Vec<Cn0Sample> {
        values.iter().enumerate().map(|(k, &c)| Cn0Sample { epoch: t(k), cn0: Some(c), occluded: false }).collect()
    }

    fn tracked() -> TrackState {
        TrackState { state: LockState::Tracked, since: t(0), acquirable_since: None }
    }

    #[test]
    fn step_examples() {
        assert_eq!(step(TrackState::idle(t(0)), Some(28.0), false, &TH, t(1)).state, LockState::Idle);
        assert_eq!(step(tracked(), Some(27.5), false, &TH, t(1)).state, LockState::Tracked);
        assert_eq!(step(tracked(), Some(26.9), false, &TH, t(1)).state, LockState::Idle);
        assert_eq!(step(tracked(), None, false, &TH, t(1)).state, LockState::Idle);
        assert_eq!(step(tracked(), Some(50.0), true, &TH, t(1)).state, LockState::Idle);
        assert_eq!(step(TrackState::idle(t(0)), Some(50.0), true, &TH, t(1)).state, LockState::Idle);
        let acq = step(TrackState::idle(t(0)), Some(29.0), false, &TH, t(3));
        assert_eq!((acq.state, acq.since), (LockState::Tracked, t(3)));
    }

    #[test]
    fn series_examples() {
        let idle = run_series(&series(&[10.0, 26.0, 26.99]), &TH).unwrap();
        assert!(idle.iter().all(|s| !s.is_tracked()));

        let rising = run_series(&series(&[20.0, 24.0, 28.0, 29.5, 31.0, 40.0]), &TH).unwrap();
        let flags: Vec<bool> = rising.iter().map(|s| s.is_tracked()).collect();
        assert_eq!(flags, [false, false, false, true, true, true]);

        // Hand fold: 30 acq, 28 keep, 28 keep, 26 drop, 30 reacquire.
        let fold = run_series(&series(&[30.0, 28.0, 28.0, 26.0, 30.0]), &TH).unwrap();
        let flags: Vec<bool> = fold.iter().map(|s| s.is_tracked()).collect();
        assert_eq!(flags, [true, true, true, false, true]);
        assert_eq!(fold[4].since, t(4));
    }

    #[test]
    fn non_monotonic_time_rejected() {
        let mut s = series(&[30.0, 30.0, 30.0]);
        s[2].epoch = t(1);
        assert!(matches!(run_series(&s, &TH), Err(TrackError::NonMonotonicTime { index: 2, .. })));
    }

    #[test]
    fn invalid_thresholds() {
        assert!(TrackThresholds::new(27.0, 29.0).is_err());
        assert!(run_series(&series(&[30.0]), &TrackThresholds { acquisition: 25.0, tracking: 26.0 }).is_err());
    }

    #[test]
    fn dwell_delays_acquisition() {
        let s = series(&[30.0, 30.0, 30.0, 20.0, 30.0, 30.0, 30.0]);
        let out = run_series_with_dwell(&s, &TH, 120.0).unwrap();
        let flags: Vec<bool> = out.iter().map(|s| s.is_tracked()).collect();
        assert_eq!(flags, [false, false, true, false, false, false, true]);
    }

    fn arb_series() -> impl Strategy<Value = Vec<Cn0Sample>> {
        prop::collection::vec((prop::option::weighted(0.9, 15.0..40.0f64), prop::bool::weighted(0.1)), 1..200)
            .prop_map(|v| {
                v.into_iter()
                    .enumerate()
                    .map(|(k, (cn0, occluded))| Cn0Sample { epoch: t(k), cn0, occluded })
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn sandwich_property(s in arb_series()) {
            let out = run_series(&s, &TH).unwrap();
            prop_assert_eq!(out.len(), s.len());
            for (sample, st) in s.iter().zip(&out) {
                let strong = !sample.occluded && sample.cn0.is_some_and(|c| c >= TH.acquisition);
                let weak = !sample.occluded && sample.cn0.is_some_and(|c| c >= TH.tracking);
                prop_assert!(!strong || st.is_tracked());
                prop_assert!(!st.is_tracked() || weak);
            }
        }

        #[test]
        fn deterministic(s in arb_series()) {
            prop_assert_eq!(run_series(&s, &TH).unwrap(), run_series(&s, &TH).unwrap());
        }

        #[test]
        fn raising_acquisition_never_adds_epochs(s in arb_series(), bump in 0.0..5.0f64) {
            let lo = run_series(&s, &TH).unwrap();
            let hi = run_series(&s, &TrackThresholds { acquisition: TH.acquisition + bump, ..TH }).unwrap();
            for (a, b) in lo.iter().zip(&hi) {
                prop_assert!(!b.is_tracked() || a.is_tracked());
            }
        }
    }
}
