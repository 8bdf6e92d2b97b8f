//! Per-week-of-year climatology tables.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::data::aggregate::{aggregate_weekly, Aggregation};
use crate::data::calendar::{Calendar, WeekIndex, WEEKS_PER_YEAR};
use crate::data::grid::{Grid, GriddedSeries};
use crate::data::io::format_value;
use crate::data::split::YearRange;
use crate::error::{Error, Result};

use super::quantile::quantiles;

/// Target quantile levels.
pub const TARGET_QUANTILES: [f64; 3] = [0.1, 0.5, 0.9];

/// Statistic taken over the weekly values of one week-of-year.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClimatologyOp {
    Mean,
    Max,
    Min,
    /// The triple (0.1, 0.5, 0.9).
    Quantiles,
}

impl fmt::Display for ClimatologyOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClimatologyOp::Mean => "mean",
            ClimatologyOp::Max => "max",
            ClimatologyOp::Min => "min",
            ClimatologyOp::Quantiles => "quantiles",
        })
    }
}

impl FromStr for ClimatologyOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Self::Mean),
            "max" => Ok(Self::Max),
            "min" => Ok(Self::Min),
            "quantiles" => Ok(Self::Quantiles),
            other => Err(Error::config("op", format!("unknown climatology op `{other}`"))),
        }
    }
}

impl ClimatologyOp {
    pub fn width(self) -> usize {
        match self {
            ClimatologyOp::Quantiles => TARGET_QUANTILES.len(),
            _ => 1,
        }
    }

    /// Column names used when the table is written to the gridded format.
    pub fn variables(self) -> Vec<String> {
        match self {
            ClimatologyOp::Quantiles => TARGET_QUANTILES.iter().map(|q| quantile_variable(*q)).collect(),
            other => vec![format!("climo_{other}")],
        }
    }

    fn reduce(self, values: &[f64]) -> Option<Vec<f64>> {
        let present: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
        if present.is_empty() {
            return None;
        }
        Some(match self {
            ClimatologyOp::Mean => vec![Aggregation::Mean.apply(present)],
            ClimatologyOp::Max => vec![Aggregation::Max.apply(present)],
            ClimatologyOp::Min => vec![Aggregation::Min.apply(present)],
            ClimatologyOp::Quantiles => quantiles(&present, &TARGET_QUANTILES)?,
        })
    }
}

pub fn quantile_variable(q: f64) -> String {
    format!("climo_q{:02}", (q * 100.0).round() as u32)
}

/// 53 entries per location, each a scalar or a quantile triple.
#[derive(Clone, Debug, PartialEq)]
pub struct ClimatologyTable {
    pub grid: Grid,
    pub agg: Aggregation,
    pub op: ClimatologyOp,
    pub base_years: YearRange,
    /// Number of weekly values behind each week-of-year (week 53 is built from
    /// partial weeks).
    pub sample_sizes: Vec<usize>,
    /// `[cell][week-1][component]`, flattened.
    values: Vec<f64>,
}

impl ClimatologyTable {
    pub fn entry(&self, lat_index: usize, lon_index: usize, week: u32) -> &[f64] {
        let w = self.op.width();
        let cell = lat_index * self.grid.nlon() + lon_index;
        let at = (cell * WEEKS_PER_YEAR as usize + (week as usize - 1)) * w;
        &self.values[at..at + w]
    }

    /// Expands one component into a weekly series over `calendar`.
    pub fn field(&self, component: usize, name: &str, calendar: Calendar) -> Result<GriddedSeries> {
        if calendar.is_daily() {
            return Err(Error::Alignment("climatology fields are weekly".into()));
        }
        let mut out = GriddedSeries::filled(name, self.grid.clone(), calendar, f64::NAN);
        for t in 0..calendar.len() {
            let week = calendar.week(t).week();
            for l in self.grid.locations() {
                out.set(t, l.lat_index, l.lon_index, self.entry(l.lat_index, l.lon_index, week)[component]);
            }
        }
        Ok(out)
    }
}

/// Weekly-aggregates `daily` with `agg`, then applies `op` to the values of
/// each week-of-year across `base_years` (one value per year).
pub fn compute_climatology(
    daily: &GriddedSeries,
    agg: Aggregation,
    op: ClimatologyOp,
    base_years: YearRange,
) -> Result<ClimatologyTable> {
    let Calendar::Daily { start, len } = daily.calendar else {
        return Err(Error::Alignment("climatology needs a daily series".into()));
    };
    let first = chrono::NaiveDate::from_ymd_opt(base_years.start, 1, 1).expect("valid year");
    let last = chrono::NaiveDate::from_ymd_opt(base_years.end, 12, 31).expect("valid year");
    let end = daily.calendar.date(len - 1);
    if start > first || end < last {
        return Err(Error::Coverage(format!(
            "{} covers {start}..{end}, base years {base_years} not fully covered",
            daily.variable
        )));
    }
    let weekly = aggregate_weekly(daily, agg)?;
    climatology_from_weekly(&weekly, agg, op, base_years)
}

/// Builds the table from already weekly-aggregated values.
pub fn climatology_from_weekly(
    weekly: &GriddedSeries,
    agg: Aggregation,
    op: ClimatologyOp,
    base_years: YearRange,
) -> Result<ClimatologyTable> {
    let nweeks = WEEKS_PER_YEAR as usize;
    let mut by_week: Vec<Vec<usize>> = vec![Vec::new(); nweeks];
    for t in 0..weekly.steps() {
        let w = weekly.calendar.week(t);
        if base_years.contains(w.year()) {
            by_week[w.week() as usize - 1].push(t);
        }
    }
    let width = op.width();
    let mut values = Vec::with_capacity(weekly.grid.cells() * nweeks * width);
    for l in weekly.grid.locations() {
        for (w, steps) in by_week.iter().enumerate() {
            let sample: Vec<f64> = steps.iter().map(|&t| weekly.get(t, l.lat_index, l.lon_index)).collect();
            let entry = op.reduce(&sample).ok_or(Error::EmptyClimatology { week: w as u32 + 1, lat: l.lat, lon: l.lon })?;
            values.extend(entry);
        }
    }
    Ok(ClimatologyTable {
        grid: weekly.grid.clone(),
        agg,
        op,
        base_years,
        sample_sizes: by_week.iter().map(Vec::len).collect(),
        values,
    })
}

/// The table entry for the week-of-year of `issue + lead`; the same for every year.
pub fn climatology_predict(table: &ClimatologyTable, lat_index: usize, lon_index: usize, issue: WeekIndex, lead: usize) -> Vec<f64> {
    let target = issue.offset(lead as i64);
    table.entry(lat_index, lon_index, target.week()).to_vec()
}

/// Writes the table in the gridded columnar format with `W01`..`W53` dates.
pub fn write_climatology<W: Write>(mut out: W, table: &ClimatologyTable) -> std::io::Result<()> {
    writeln!(out, "{}", crate::data::io::GRIDDED_HEADER)?;
    for (c, var) in table.op.variables().iter().enumerate() {
        for week in 1..=WEEKS_PER_YEAR {
            for l in table.grid.locations() {
                let v = table.entry(l.lat_index, l.lon_index, week)[c];
                writeln!(out, "W{week:02},{},{},{var},{}", l.lat, l.lon, format_value(v))?;
            }
        }
    }
    Ok(())
}

/// Reads a table written by [`write_climatology`]; `agg` and base years are
/// not stored in the file and must be supplied.
pub fn read_climatology<R: Read>(reader: R, agg: Aggregation, base_years: YearRange) -> Result<ClimatologyTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows: BTreeMap<String, Vec<(u32, f64, f64, f64)>> = BTreeMap::new();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| Error::format(line, e.to_string()))?;
        let week: u32 = rec[0]
            .strip_prefix('W')
            .and_then(|w| w.parse().ok())
            .filter(|w| (1..=WEEKS_PER_YEAR).contains(w))
            .ok_or_else(|| Error::format(line, format!("bad week marker `{}`", &rec[0])))?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| Error::format(line, format!("bad number `{}`", &rec[i])));
        rows.entry(rec[3].to_string()).or_default().push((week, num(1)?, num(2)?, num(4)?));
    }
    let op = if rows.contains_key(&quantile_variable(0.5)) {
        ClimatologyOp::Quantiles
    } else if let Some(var) = rows.keys().next() {
        var.strip_prefix("climo_").unwrap_or(var).parse()?
    } else {
        return Err(Error::format(1, "empty climatology file"));
    };
    let vars = op.variables();
    let first = rows.get(&vars[0]).ok_or_else(|| Error::Lookup { kind: "variable", name: vars[0].clone() })?;
    let mut lats: Vec<f64> = first.iter().map(|r| r.1).collect();
    let mut lons: Vec<f64> = first.iter().map(|r| r.2).collect();
    for axis in [&mut lats, &mut lons] {
        axis.sort_by(f64::total_cmp);
        axis.dedup();
    }
    let grid = Grid::new(lats, lons)?;
    let width = op.width();
    let mut values = vec![f64::NAN; grid.cells() * WEEKS_PER_YEAR as usize * width];
    for (c, var) in vars.iter().enumerate() {
        let entries = rows.get(var).ok_or_else(|| Error::Lookup { kind: "variable", name: var.clone() })?;
        for &(week, lat, lon, v) in entries {
            let l = grid.find(lat, lon).ok_or_else(|| Error::format(0, format!("({lat}, {lon}) off grid")))?;
            let cell = l.lat_index * grid.nlon() + l.lon_index;
            values[(cell * WEEKS_PER_YEAR as usize + week as usize - 1) * width + c] = v;
        }
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::format(0, "climatology file is incomplete"));
    }
    Ok(ClimatologyTable {
        grid,
        agg,
        op,
        base_years,
        sample_sizes: vec![base_years.end as usize - base_years.start as usize + 1; WEEKS_PER_YEAR as usize],
        values,
    })
}
