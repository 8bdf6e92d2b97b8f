use std::io::Write;

use crate::data::calendar::WeekIndex;
use crate::data::grid::GriddedSeries;
use crate::data::io::format_value;
use crate::error::{Error, Result};
use crate::model::QuantileForecast;

use super::qrisk::observed;

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    /// Target week (`issue + lead`).
    pub week: WeekIndex,
    pub target: f64,
    pub quantiles: Vec<f64>,
}

/// One model's forecasts and targets at one location and lead.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTable {
    pub model: String,
    pub lead: usize,
    pub quantiles: Vec<f64>,
    pub rows: Vec<SeriesRow>,
}

/// Rows for target weeks in `first..=last` at `location`, ordered by week.
pub fn export_series(
    model: &str,
    location: (usize, usize),
    forecasts: &[QuantileForecast],
    target: &GriddedSeries,
    lead: usize,
    first: WeekIndex,
    last: WeekIndex,
) -> Result<SeriesTable> {
    let at: Vec<&QuantileForecast> = forecasts.iter().filter(|f| f.location.key() == location).collect();
    let Some(any) = at.first() else {
        return Err(Error::Lookup { kind: "location", name: format!("{location:?} in {model} forecasts") });
    };
    let quantiles = any.quantiles.clone();
    let mut rows = Vec::new();
    for f in at {
        let week = f.issue.offset(lead as i64);
        if week < first || week > last {
            continue;
        }
        let Some(values) = f.leads.binary_search(&lead).ok().map(|i| f.values[i].clone()) else {
            return Err(Error::Coverage(format!("{model} forecast issued {} lacks lead {lead}", f.issue)));
        };
        rows.push(SeriesRow { week, target: observed(target, f, lead)?, quantiles: values });
    }
    rows.sort_by_key(|r| r.week);
    Ok(SeriesTable { model: model.to_string(), lead, quantiles, rows })
}

/// `week,target,q10,q50,q90`.
pub fn write_series<W: Write>(mut out: W, table: &SeriesTable) -> std::io::Result<()> {
    let cols: Vec<String> = table.quantiles.iter().map(|&q| super::quantile_column(q)).collect();
    writeln!(out, "week,target,{}", cols.join(","))?;
    for r in &table.rows {
        let vals: Vec<String> = r.quantiles.iter().map(|v| format_value(*v)).collect();
        writeln!(out, "{},{},{}", r.week, format_value(r.target), vals.join(","))?;
    }
    Ok(())
}
