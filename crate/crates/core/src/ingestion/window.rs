use chrono::{DateTime, Months, NaiveDate, NaiveTime, Utc};
use serde::{Deserialize, Serialize};

/// Inclusive UTC interval in which posts about a claim are collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl TimeWindow {
    pub fn contains(&self, at: DateTime<Utc>) -> bool {
        self.start <= at && at <= self.end
    }
}

/// One calendar month before publication (00:00:00) to one calendar year
/// after (23:59:59). Month arithmetic clamps to the end of the month, so
/// Mar 31 starts on Feb 28 and Feb 29 ends on Feb 28 the following year.
pub fn compute_time_window(published_at: NaiveDate) -> TimeWindow {
    let start_day = published_at
        .checked_sub_months(Months::new(1))
        .unwrap_or(NaiveDate::MIN);
    let end_day = published_at
        .checked_add_months(Months::new(12))
        .unwrap_or(NaiveDate::MAX);
    let end_of_day = NaiveTime::from_hms_opt(23, 59, 59).expect("valid time");
    TimeWindow {
        start: start_day.and_time(NaiveTime::MIN).and_utc(),
        end: end_day.and_time(end_of_day).and_utc(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(y: i32, m: u32, d: u32) -> (String, String) {
        let w = compute_time_window(NaiveDate::from_ymd_opt(y, m, d).unwrap());
        (
            w.start.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            w.end.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        )
    }

    #[test]
    fn plain_date() {
        assert_eq!(window(2021, 3, 15), ("2021-02-15T00:00:00Z".into(), "2022-03-15T23:59:59Z".into()));
    }

    #[test]
    fn leap_day_clamps_forward() {
        assert_eq!(window(2020, 2, 29), ("2020-01-29T00:00:00Z".into(), "2021-02-28T23:59:59Z".into()));
    }

    #[test]
    fn month_end_clamps_backward() {
        assert_eq!(window(2021, 3, 31), ("2021-02-28T00:00:00Z".into(), "2022-03-31T23:59:59Z".into()));
        assert_eq!(window(2021, 1, 31).0, "2020-12-31T00:00:00Z");
    }

    #[test]
    fn bounds_are_inclusive() {
        let w = compute_time_window(NaiveDate::from_ymd_opt(2021, 3, 15).unwrap());
        assert!(w.contains(w.start));
        assert!(w.contains(w.end));
        assert!(!w.contains(w.end + chrono::Duration::seconds(1)));
        assert!(!w.contains(w.start - chrono::Duration::seconds(1)));
    }
}
