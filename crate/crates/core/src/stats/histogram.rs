use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::{Datelike, Timelike};
use serde::{Deserialize, Serialize};

use crate::model::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    SecondOfMinute,
    MinuteOfHour,
    HourOfDay,
    DayOfWeek,
    DayOfMonth,
    Month,
    Year,
}

const WEEKDAYS: [&str; 7] = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"];

impl Scale {
    pub const ALL: [Scale; 7] = [
        Scale::SecondOfMinute,
        Scale::MinuteOfHour,
        Scale::HourOfDay,
        Scale::DayOfWeek,
        Scale::DayOfMonth,
        Scale::Month,
        Scale::Year,
    ];

    /// Number of bins, `None` for the open-ended year scale.
    pub fn bin_count(self) -> Option<usize> {
        match self {
            Scale::SecondOfMinute | Scale::MinuteOfHour => Some(60),
            Scale::HourOfDay => Some(24),
            Scale::DayOfWeek => Some(7),
            Scale::DayOfMonth => Some(31),
            Scale::Month => Some(12),
            Scale::Year => None,
        }
    }

    fn key(self, t: Timestamp) -> i64 {
        let dt = t.to_datetime();
        match self {
            Scale::SecondOfMinute => dt.second() as i64,
            Scale::MinuteOfHour => dt.minute() as i64,
            Scale::HourOfDay => dt.hour() as i64,
            Scale::DayOfWeek => dt.weekday().num_days_from_monday() as i64,
            Scale::DayOfMonth => dt.day0() as i64,
            Scale::Month => dt.month0() as i64,
            Scale::Year => dt.year() as i64,
        }
    }

    fn label(self, key: i64) -> String {
        match self {
            Scale::DayOfWeek => WEEKDAYS[key as usize].to_string(),
            Scale::DayOfMonth | Scale::Month => (key + 1).to_string(),
            _ => key.to_string(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scale::SecondOfMinute => "second",
            Scale::MinuteOfHour => "minute",
            Scale::HourOfDay => "hour",
            Scale::DayOfWeek => "weekday",
            Scale::DayOfMonth => "day",
            Scale::Month => "month",
            Scale::Year => "year",
        }
    }
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase().replace(['-', '_'], "");
        Scale::ALL
            .into_iter()
            .find(|scale| scale.name() == s || format!("{scale:?}").to_ascii_lowercase() == s)
            .ok_or_else(|| format!("unknown scale {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalHistogram {
    pub scale: Scale,
    pub bins: Vec<(String, u64)>,
}

impl TemporalHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|(_, c)| c).sum()
    }
}

/// Buckets UTC creation times by one calendar field. Empty bins are kept;
/// the year scale spans every year from the earliest to the latest input.
pub fn histogram<I: IntoIterator<Item = Timestamp>>(times: I, scale: Scale) -> TemporalHistogram {
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for t in times {
        *counts.entry(scale.key(t)).or_default() += 1;
    }
    let keys: Vec<i64> = match scale.bin_count() {
        Some(n) => (0..n as i64).collect(),
        None => match (counts.keys().next(), counts.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo..=hi).collect(),
            _ => Vec::new(),
        },
    };
    TemporalHistogram {
        scale,
        bins: keys
            .into_iter()
            .map(|k| (scale.label(k), counts.get(&k).copied().unwrap_or(0)))
            .collect(),
    }
}
