use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Segment of the collection between two boundary events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Period {
    I,
    II,
    III,
    IV,
}

impl Period {
    pub const ALL: [Period; 4] = [Period::I, Period::II, Period::III, Period::IV];

    pub fn label(self) -> &'static str {
        match self {
            Period::I => "I",
            Period::II => "II",
            Period::III => "III",
            Period::IV => "IV",
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown period {0:?}")]
pub struct UnknownPeriod(pub String);

impl FromStr for Period {
    type Err = UnknownPeriod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "I" => Ok(Period::I),
            "II" => Ok(Period::II),
            "III" => Ok(Period::III),
            "IV" => Ok(Period::IV),
            other => Err(UnknownPeriod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("period boundaries must be strictly increasing")]
pub struct BoundaryOrderError;

/// The three events splitting the collection into periods I to IV. Each
/// event belongs to the period it opens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodBoundaries {
    pub polls_close: DateTime<Utc>,
    pub michigan_call: DateTime<Utc>,
    pub pennsylvania_call: DateTime<Utc>,
}

fn eastern(day: u32, hour: u32, minute: u32) -> DateTime<Utc> {
    // EST, UTC-5, in effect for all of November 2020 after the 1st
    FixedOffset::west_opt(5 * 3600)
        .expect("valid offset")
        .with_ymd_and_hms(2020, 11, day, hour, minute, 0)
        .single()
        .expect("valid date")
        .with_timezone(&Utc)
}

impl Default for PeriodBoundaries {
    /// Polls close Nov 4 01:00 ET, Michigan called Nov 4 17:58 ET,
    /// Pennsylvania called Nov 7 11:25 ET (2020).
    fn default() -> Self {
        Self {
            polls_close: eastern(4, 1, 0),
            michigan_call: eastern(4, 17, 58),
            pennsylvania_call: eastern(7, 11, 25),
        }
    }
}

impl PeriodBoundaries {
    pub fn new(
        polls_close: DateTime<Utc>,
        michigan_call: DateTime<Utc>,
        pennsylvania_call: DateTime<Utc>,
    ) -> Result<Self, BoundaryOrderError> {
        let b = Self {
            polls_close,
            michigan_call,
            pennsylvania_call,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), BoundaryOrderError> {
        if self.polls_close < self.michigan_call && self.michigan_call < self.pennsylvania_call {
            Ok(())
        } else {
            Err(BoundaryOrderError)
        }
    }

    pub fn assign(&self, t: DateTime<Utc>) -> Period {
        assign_period(t, self)
    }
}

pub fn assign_period(t: DateTime<Utc>, b: &PeriodBoundaries) -> Period {
    if t < b.polls_close {
        Period::I
    } else if t < b.michigan_call {
        Period::II
    } else if t < b.pennsylvania_call {
        Period::III
    } else {
        Period::IV
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeDelta;
    use proptest::prelude::*;

    #[test]
    fn defaults_in_utc() {
        let b = PeriodBoundaries::default();
        assert_eq!(b.polls_close, Utc.with_ymd_and_hms(2020, 11, 4, 6, 0, 0).unwrap());
        assert_eq!(b.michigan_call, Utc.with_ymd_and_hms(2020, 11, 4, 22, 58, 0).unwrap());
        assert_eq!(
            b.pennsylvania_call,
            Utc.with_ymd_and_hms(2020, 11, 7, 16, 25, 0).unwrap()
        );
        assert!(b.validate().is_ok());
    }

    #[test]
    fn examples() {
        let b = PeriodBoundaries::default();
        assert_eq!(assign_period(eastern(3, 12, 0), &b), Period::I);
        assert_eq!(assign_period(b.polls_close, &b), Period::II);
        assert_eq!(assign_period(b.michigan_call, &b), Period::III);
        assert_eq!(
            assign_period(b.pennsylvania_call - TimeDelta::seconds(1), &b),
            Period::III
        );
        assert_eq!(assign_period(eastern(8, 0, 0), &b), Period::IV);
    }

    #[test]
    fn rejects_unordered() {
        let b = PeriodBoundaries::default();
        assert!(PeriodBoundaries::new(b.michigan_call, b.polls_close, b.pennsylvania_call).is_err());
        assert!(PeriodBoundaries::new(b.polls_close, b.polls_close, b.pennsylvania_call).is_err());
    }

    #[test]
    fn labels_parse() {
        for p in Period::ALL {
            assert_eq!(p.label().parse::<Period>().unwrap(), p);
        }
        assert!("V".parse::<Period>().is_err());
    }

    proptest! {
        #[test]
        fn monotone(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000) {
            let bounds = PeriodBoundaries::default();
            let base = bounds.michigan_call;
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let p_lo = assign_period(base + TimeDelta::seconds(lo), &bounds);
            let p_hi = assign_period(base + TimeDelta::seconds(hi), &bounds);
            prop_assert!(p_lo <= p_hi);
        }
    }
}
