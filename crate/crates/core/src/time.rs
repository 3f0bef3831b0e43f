//! Continuous simulation time.
//!
//! A single idealized timescale counted in seconds from J2000.0
//! (2000-01-01T12:00:00). There are no leap seconds and no UT1/TT split;
//! the calendar mapping is the proleptic Gregorian calendar.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use chrono::{Datelike, NaiveDate, NaiveDateTime, TimeDelta, Timelike};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeError {
    #[error("invalid calendar date {0}")]
    InvalidCalendar(String),
    #[error("cannot parse epoch `{0}` (expected YYYY-MM-DDTHH:MM:SS[.fff][Z])")]
    Parse(String),
}

fn reference() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(12, 0, 0))
        .expect("J2000 is a valid date")
}

/// Seconds since J2000.0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpochTime(f64);

/// Broken-down calendar representation of an [`EpochTime`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calendar {
    pub year: i32,
    pub month: u32,
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
    pub second: f64,
}

impl EpochTime {
    pub const J2000: EpochTime = EpochTime(0.0);

    pub fn from_seconds(seconds_since_reference: f64) -> Self {
        EpochTime(seconds_since_reference)
    }

    pub fn seconds(self) -> f64 {
        self.0
    }

    pub fn from_calendar(
        year: i32,
        month: u32,
        day: u32,
        hour: u32,
        minute: u32,
        second: f64,
    ) -> Result<Self, TimeError> {
        let bad = || TimeError::InvalidCalendar(format!("{year:04}-{month:02}-{day:02} {hour:02}:{minute:02}:{second}"));
        if !(0.0..60.0).contains(&second) {
            return Err(bad());
        }
        let whole = NaiveDate::from_ymd_opt(year, month, day)
            .and_then(|d| d.and_hms_opt(hour, minute, 0))
            .ok_or_else(bad)?;
        let micros = (whole - reference())
            .num_microseconds()
            .ok_or_else(bad)?;
        // Integral microseconds keep the calendar round trip exact.
        Ok(EpochTime(micros as f64 * 1e-6 + second))
    }

    /// Day-of-year form used by TLE epochs: `day_of_year` is 1-based and
    /// fractional (1.0 is January 1st, 00:00).
    pub fn from_year_day(year: i32, day_of_year: f64) -> Result<Self, TimeError> {
        let jan1 = Self::from_calendar(year, 1, 1, 0, 0, 0.0)?;
        Ok(jan1 + (day_of_year - 1.0) * crate::constants::SECONDS_PER_DAY)
    }

    pub fn calendar(self) -> Calendar {
        let micros = (self.0 * 1e6).round() as i64;
        let dt = reference() + TimeDelta::microseconds(micros);
        Calendar {
            year: dt.year(),
            month: dt.month(),
            day: dt.day(),
            hour: dt.hour(),
            minute: dt.minute(),
            second: dt.second() as f64 + dt.nanosecond() as f64 * 1e-9,
        }
    }

    /// ISO-8601 form with millisecond precision, e.g. `2008-03-22T00:00:00.000Z`.
    pub fn to_iso(self) -> String {
        let millis = (self.0 * 1e3).round() as i64;
        let dt = reference() + TimeDelta::milliseconds(millis);
        dt.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string()
    }

    pub fn parse_iso(text: &str) -> Result<Self, TimeError> {
        let trimmed = text.trim();
        let body = trimmed.strip_suffix('Z').unwrap_or(trimmed);
        let dt = NaiveDateTime::parse_from_str(body, "%Y-%m-%dT%H:%M:%S%.f")
            .or_else(|_| NaiveDateTime::parse_from_str(body, "%Y-%m-%d %H:%M:%S%.f"))
            .or_else(|_| {
                NaiveDate::parse_from_str(body, "%Y-%m-%d")
                    .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight"))
            })
            .map_err(|_| TimeError::Parse(text.to_string()))?;
        let micros = (dt - reference())
            .num_microseconds()
            .ok_or_else(|| TimeError::Parse(text.to_string()))?;
        Ok(EpochTime(micros as f64 * 1e-6))
    }
}

impl Eq for EpochTime {}

impl PartialOrd for EpochTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EpochTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add<f64> for EpochTime {
    type Output = EpochTime;
    fn add(self, seconds: f64) -> EpochTime {
        EpochTime(self.0 + seconds)
    }
}

impl Sub<f64> for EpochTime {
    type Output = EpochTime;
    fn sub(self, seconds: f64) -> EpochTime {
        EpochTime(self.0 - seconds)
    }
}

impl Sub for EpochTime {
    type Output = f64;
    fn sub(self, other: EpochTime) -> f64 {
        self.0 - other.0
    }
}

impl fmt::Display for EpochTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso())
    }
}

impl Serialize for EpochTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_iso())
    }
}

impl<'de> Deserialize<'de> for EpochTime {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        EpochTime::parse_iso(&text).map_err(serde::de::Error::custom)
    }
}
