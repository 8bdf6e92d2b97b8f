use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::baselines::{climatology_predict, ClimatologyOp, ClimatologyTable, EnsembleQuantiles, TARGET_QUANTILES};
use crate::data::calendar::WeekIndex;
use crate::data::grid::{Grid, Location};
use crate::data::io::format_value;
use crate::error::{Error, Result};
use crate::model::QuantileForecast;

/// Climatology quantiles for each `(location, issue)` at `leads`.
pub fn climatology_forecasts(
    table: &ClimatologyTable,
    issues: &[(Location, WeekIndex)],
    leads: &[usize],
) -> Result<Vec<QuantileForecast>> {
    if table.op != ClimatologyOp::Quantiles {
        return Err(Error::config("climatology.op", format!("quantile forecasts need op=quantiles, got {}", table.op)));
    }
    Ok(issues
        .iter()
        .map(|&(location, issue)| QuantileForecast {
            location,
            issue,
            leads: leads.to_vec(),
            quantiles: TARGET_QUANTILES.to_vec(),
            values: leads.iter().map(|&l| climatology_predict(table, location.lat_index, location.lon_index, issue, l)).collect(),
        })
        .collect())
}

/// Ensemble quantiles (already on the target grid) for the week targeted by
/// `lead` from each issue.
pub fn ensemble_forecasts(
    ens: &EnsembleQuantiles,
    issues: &[(Location, WeekIndex)],
    lead: usize,
) -> Result<Vec<QuantileForecast>> {
    issues
        .iter()
        .map(|&(location, issue)| {
            let week = issue.offset(lead as i64);
            let v = ens
                .at_week(week, location.lat_index, location.lon_index)
                .filter(|v| v.iter().all(|x| !x.is_nan()))
                .ok_or_else(|| Error::Coverage(format!("no ensemble members for week {week}")))?;
            Ok(QuantileForecast { location, issue, leads: vec![lead], quantiles: ens.quantiles.clone(), values: vec![v.to_vec()] })
        })
        .collect()
}

/// Column name of a quantile level: `q10` for 0.1.
pub fn quantile_column(q: f64) -> String {
    format!("q{:02}", (q * 100.0).round() as u32)
}

/// One row per forecast and lead: `lat,lon,issue,lead,q10,q50,q90`.
pub fn write_forecasts<W: Write>(mut out: W, forecasts: &[QuantileForecast]) -> std::io::Result<()> {
    let levels = forecasts.first().map(|f| f.quantiles.clone()).unwrap_or_default();
    let cols: Vec<String> = levels.iter().map(|&q| quantile_column(q)).collect();
    writeln!(out, "lat,lon,issue,lead,{}", cols.join(","))?;
    for f in forecasts {
        for (lead, row) in f.leads.iter().zip(&f.values) {
            let vals: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            writeln!(out, "{},{},{},{lead},{}", f.location.lat, f.location.lon, f.issue, vals.join(","))?;
        }
    }
    Ok(())
}

/// Reads forecasts written by [`write_forecasts`]; rows of one forecast must
/// be consecutive.
pub fn read_forecasts<R: Read>(reader: R, grid: &Grid) -> Result<Vec<QuantileForecast>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::format(1, e.to_string()))?.clone();
    if header.len() < 5 || header.iter().take(4).collect::<Vec<_>>() != ["lat", "lon", "issue", "lead"] {
        return Err(Error::format(1, "expected header `lat,lon,issue,lead,<quantiles>`"));
    }
    let quantiles = header
        .iter()
        .skip(4)
        .map(|c| c.strip_prefix('q').and_then(|p| p.parse::<u32>().ok()).map(|p| p as f64 / 100.0))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::format(1, "quantile columns must look like q10"))?;
    let mut out: Vec<QuantileForecast> = Vec::new();
    let mut seen: BTreeMap<((usize, usize), WeekIndex), usize> = BTreeMap::new();
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| Error::format(line, e.to_string()))?;
        if rec.len() != header.len() {
            return Err(Error::format(line, format!("expected {} fields, got {}", header.len(), rec.len())));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| Error::format(line, format!("bad number `{}`", &rec[i])));
        let (lat, lon) = (num(0)?, num(1)?);
        let location = grid.find(lat, lon).ok_or_else(|| Error::format(line, format!("({lat}, {lon}) is not on the grid")))?;
        let issue: WeekIndex = rec[2].parse().map_err(|e: Error| Error::format(line, e.to_string()))?;
        let lead: usize = rec[3].parse().map_err(|_| Error::format(line, format!("bad lead `{}`", &rec[3])))?;
        let row = (4..rec.len()).map(num).collect::<Result<Vec<_>>>()?;
        let key = (location.key(), issue);
        match out.last_mut() {
            Some(f) if f.location.key() == key.0 && f.issue == issue => {
                if f.leads.last().is_some_and(|&l| l >= lead) {
                    return Err(Error::format(line, "leads of one forecast must increase"));
                }
                f.leads.push(lead);
                f.values.push(row);
            }
            _ => {
                if seen.insert(key, out.len()).is_some() {
                    return Err(Error::format(line, format!("rows for the forecast issued {issue} at ({lat}, {lon}) are not consecutive")));
                }
                out.push(QuantileForecast { location, issue, leads: vec![lead], quantiles: quantiles.clone(), values: vec![row] });
            }
        }
    }
    Ok(out)
}
