use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::calendar::{Calendar, WeekIndex};
use super::grid::GriddedSeries;

/// Reduction applied to the days of a week (or to any multiset of values).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Aggregation {
    Max,
    Mean,
    Min,
}

impl Aggregation {
    /// Reduces the non-missing values; `NaN` when there are none.
    pub fn apply(self, values: impl IntoIterator<Item = f64>) -> f64 {
        let mut n = 0usize;
        let mut acc = match self {
            Aggregation::Max => f64::NEG_INFINITY,
            Aggregation::Min => f64::INFINITY,
            Aggregation::Mean => 0.0,
        };
        for v in values.into_iter().filter(|v| !v.is_nan()) {
            n += 1;
            acc = match self {
                Aggregation::Max => acc.max(v),
                Aggregation::Min => acc.min(v),
                Aggregation::Mean => acc + v,
            };
        }
        match (n, self) {
            (0, _) => f64::NAN,
            (_, Aggregation::Mean) => acc / n as f64,
            _ => acc,
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Max => "max",
            Aggregation::Mean => "mean",
            Aggregation::Min => "min",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Aggregation::Max),
            "mean" => Ok(Aggregation::Mean),
            "min" => Ok(Aggregation::Min),
            other => Err(Error::config("agg", format!("unknown aggregation `{other}`"))),
        }
    }
}

/// Aggregates a daily series into weeks. Weeks only partly covered by the
/// daily range (and the short week 53) use the days available.
pub fn aggregate_weekly(series: &GriddedSeries, agg: Aggregation) -> Result<GriddedSeries> {
    let Calendar::Daily { start, len } = series.calendar else {
        return Err(Error::Alignment(format!("{} is not a daily series", series.variable)));
    };
    if len == 0 {
        return Err(Error::Alignment("empty daily series".into()));
    }
    let first = WeekIndex::of_date(start);
    let last = WeekIndex::of_date(series.calendar.date(len - 1));
    let weeks = (last.ordinal() - first.ordinal() + 1) as usize;
    let calendar = Calendar::Weekly { start: first, len: weeks };

    // Day positions belonging to each week.
    let mut bounds = vec![(usize::MAX, 0usize); weeks];
    for t in 0..len {
        let w = (series.calendar.week(t).ordinal() - first.ordinal()) as usize;
        let b = &mut bounds[w];
        b.0 = b.0.min(t);
        b.1 = b.1.max(t + 1);
    }
    let (nlat, nlon) = (series.grid.nlat(), series.grid.nlon());
    let mut out = GriddedSeries::filled(series.variable.clone(), series.grid.clone(), calendar, f64::NAN);
    for (w, &(lo, hi)) in bounds.iter().enumerate() {
        for i in 0..nlat {
            for j in 0..nlon {
                out.set(w, i, j, agg.apply((lo..hi).map(|t| series.get(t, i, j))));
            }
        }
    }
    Ok(out)
}
