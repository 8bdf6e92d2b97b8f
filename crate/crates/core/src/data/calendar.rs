use std::fmt;

use chrono::{Datelike, Duration, NaiveDate};

use crate::error::{Error, Result};

/// Weeks per calendar year. Week `w` covers days-of-year `7(w-1)+1 ..= 7w`;
/// week 53 holds day 365 and, in leap years, day 366.
pub const WEEKS_PER_YEAR: u32 = 53;

/// A week of a specific year.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeekIndex {
    year: i32,
    week: u32,
}

impl WeekIndex {
    pub fn new(year: i32, week: u32) -> Result<Self> {
        if !(1..=WEEKS_PER_YEAR).contains(&week) {
            return Err(Error::config("week", format!("week {week} outside 1..=53")));
        }
        Ok(Self { year, week })
    }

    pub fn of_date(date: NaiveDate) -> Self {
        let week = ((date.ordinal() - 1) / 7 + 1).min(WEEKS_PER_YEAR);
        Self { year: date.year(), week }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn week(self) -> u32 {
        self.week
    }

    /// Position on a uniform axis where consecutive weeks differ by one.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * WEEKS_PER_YEAR as i64 + (self.week as i64 - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        let per = WEEKS_PER_YEAR as i64;
        Self { year: ordinal.div_euclid(per) as i32, week: ordinal.rem_euclid(per) as u32 + 1 }
    }

    pub fn offset(self, weeks: i64) -> Self {
        Self::from_ordinal(self.ordinal() + weeks)
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_yo_opt(self.year, 7 * (self.week - 1) + 1).expect("valid week start")
    }

    /// Number of days in the week (7, or 1–2 for week 53).
    pub fn day_count(self) -> u32 {
        if self.week < WEEKS_PER_YEAR {
            7
        } else if is_leap(self.year) {
            2
        } else {
            1
        }
    }

    pub fn days(self) -> impl Iterator<Item = NaiveDate> {
        let start = self.first_day();
        (0..self.day_count()).map(move |d| start + Duration::days(d as i64))
    }

    /// Calendar month (1–12) of the week's middle day.
    pub fn month(self) -> u32 {
        let mid = self.first_day() + Duration::days((self.day_count() as i64 - 1).min(3));
        mid.month()
    }

    /// Parses the ISO date of a week's first day.
    pub fn from_start_date(date: NaiveDate) -> Option<Self> {
        let w = Self::of_date(date);
        (w.first_day() == date).then_some(w)
    }
}

impl fmt::Display for WeekIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-W{:02}", self.year, self.week)
    }
}

impl std::str::FromStr for WeekIndex {
    type Err = Error;

    /// `YYYY-Www`, as printed by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("week", format!("expected YYYY-Www, got `{s}`"));
        let (y, w) = s.trim().split_once("-W").ok_or_else(bad)?;
        Self::new(y.parse().map_err(|_| bad())?, w.parse().map_err(|_| bad())?)
    }
}

pub fn is_leap(year: i32) -> bool {
    NaiveDate::from_ymd_opt(year, 2, 29).is_some()
}

/// Time axis of a gridded series: consecutive days or consecutive weeks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Calendar {
    Daily { start: NaiveDate, len: usize },
    Weekly { start: WeekIndex, len: usize },
}

impl Calendar {
    pub fn len(&self) -> usize {
        match *self {
            Calendar::Daily { len, .. } | Calendar::Weekly { len, .. } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_daily(&self) -> bool {
        matches!(self, Calendar::Daily { .. })
    }

    pub fn daily_years(start_year: i32, end_year: i32) -> Self {
        let start = NaiveDate::from_ymd_opt(start_year, 1, 1).expect("valid year");
        let end = NaiveDate::from_ymd_opt(end_year, 12, 31).expect("valid year");
        Calendar::Daily { start, len: (end - start).num_days() as usize + 1 }
    }

    pub fn weekly_years(start_year: i32, end_year: i32) -> Self {
        let start = WeekIndex { year: start_year, week: 1 };
        let len = ((end_year - start_year + 1) as u32 * WEEKS_PER_YEAR) as usize;
        Calendar::Weekly { start, len }
    }

    /// Date of step `t`: the day itself, or the first day of the week.
    pub fn date(&self, t: usize) -> NaiveDate {
        match *self {
            Calendar::Daily { start, .. } => start + Duration::days(t as i64),
            Calendar::Weekly { start, .. } => start.offset(t as i64).first_day(),
        }
    }

    pub fn week(&self, t: usize) -> WeekIndex {
        match *self {
            Calendar::Daily { start, .. } => WeekIndex::of_date(start + Duration::days(t as i64)),
            Calendar::Weekly { start, .. } => start.offset(t as i64),
        }
    }

    /// Step at which `week` sits on a weekly calendar.
    pub fn position_of_week(&self, week: WeekIndex) -> Option<usize> {
        match *self {
            Calendar::Weekly { start, len } => {
                let p = week.ordinal() - start.ordinal();
                (0..len as i64).contains(&p).then_some(p as usize)
            }
            Calendar::Daily { .. } => None,
        }
    }

    pub fn position_of_date(&self, date: NaiveDate) -> Option<usize> {
        match *self {
            Calendar::Daily { start, len } => {
                let p = (date - start).num_days();
                (0..len as i64).contains(&p).then_some(p as usize)
            }
            Calendar::Weekly { .. } => WeekIndex::from_start_date(date).and_then(|w| self.position_of_week(w)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn week_text_round_trip() {
        let w = WeekIndex::new(2016, 5).unwrap();
        assert_eq!(w.to_string(), "2016-W05");
        assert_eq!("2016-W05".parse::<WeekIndex>().unwrap(), w);
        assert!("2016-W54".parse::<WeekIndex>().is_err());
        assert!("2016-05".parse::<WeekIndex>().is_err());
    }

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn week_boundaries() {
        assert_eq!(WeekIndex::of_date(d(2019, 1, 7)).week(), 1);
        assert_eq!(WeekIndex::of_date(d(2019, 1, 8)).week(), 2);
        assert_eq!(WeekIndex::of_date(d(2019, 12, 30)).week(), 52);
        assert_eq!(WeekIndex::of_date(d(2019, 12, 31)).week(), 53);
        // leap day 366 joins week 53
        assert_eq!(WeekIndex::of_date(d(2020, 12, 31)).week(), 53);
        assert_eq!(WeekIndex::new(2020, 53).unwrap().day_count(), 2);
        assert_eq!(WeekIndex::new(2019, 53).unwrap().day_count(), 1);
    }

    #[test]
    fn ordinal_wraps_years() {
        let w = WeekIndex::new(2015, 50).unwrap();
        assert_eq!(w.offset(4), WeekIndex::new(2016, 1).unwrap());
        assert_eq!(w.offset(4).offset(-4), w);
    }

    #[test]
    fn every_day_belongs_to_its_week() {
        for year in [2019, 2020] {
            let mut count = 0;
            for week in 1..=WEEKS_PER_YEAR {
                let w = WeekIndex::new(year, week).unwrap();
                for day in w.days() {
                    assert_eq!(WeekIndex::of_date(day), w);
                    count += 1;
                }
            }
            assert_eq!(count, if is_leap(year) { 366 } else { 365 });
        }
    }

    #[test]
    fn month_of_week() {
        assert_eq!(WeekIndex::new(2019, 1).unwrap().month(), 1);
        assert_eq!(WeekIndex::new(2019, 53).unwrap().month(), 12);
        assert_eq!(WeekIndex::new(2019, 27).unwrap().month(), 7);
    }
}
