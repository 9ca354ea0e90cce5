use std::ops::{Add, Sub};

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::AstroError;

/// Seconds past 2000-01-01T12:00:00Z on a uniform scale (no leap seconds).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Epoch {
    pub seconds: f64,
}

fn reference() -> DateTime<Utc> {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .unwrap()
        .and_hms_opt(12, 0, 0)
        .unwrap()
        .and_utc()
}

impl Epoch {
    pub fn new(seconds: f64) -> Epoch {
        Epoch { seconds }
    }

    /// Parses an RFC 3339 / ISO-8601 timestamp with offset, e.g.
    /// `2024-03-01T10:00:00.250Z`.
    pub fn from_iso(s: &str) -> Result<Epoch, AstroError> {
        let dt = DateTime::parse_from_rfc3339(s.trim())
            .map_err(|e| AstroError::InvalidEpoch(format!("{s}: {e}")))?
            .with_timezone(&Utc);
        let delta = dt.signed_duration_since(reference());
        let secs = delta.num_seconds() as f64;
        let nanos = (delta - chrono::Duration::seconds(delta.num_seconds()))
            .num_nanoseconds()
            .unwrap_or(0) as f64;
        Ok(Epoch::new(secs + nanos * 1e-9))
    }

    /// Formats with microsecond resolution and a `Z` suffix.
    pub fn to_iso(&self) -> String {
        let whole = self.seconds.floor();
        let micros = ((self.seconds - whole) * 1e6).round() as i64;
        let dt = reference()
            + chrono::Duration::seconds(whole as i64)
            + chrono::Duration::microseconds(micros);
        dt.to_rfc3339_opts(SecondsFormat::Micros, true)
    }
}

impl Sub for Epoch {
    type Output = f64;
    fn sub(self, o: Epoch) -> f64 {
        self.seconds - o.seconds
    }
}

impl Add<f64> for Epoch {
    type Output = Epoch;
    fn add(self, dt: f64) -> Epoch {
        Epoch::new(self.seconds + dt)
    }
}
