use std::io::Write;

use crate::data::calendar::{Calendar, WeekIndex};
use crate::data::grid::{Grid, GriddedSeries, Location};
use crate::data::io::format_value;
use crate::error::{Error, Result};

use super::qrisk::{LeadFilter, QRiskReport};

/// Baseline against candidate; positive values favor the candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub baseline: String,
    pub candidate: String,
    pub region: String,
    pub filter: LeadFilter,
    pub quantiles: Vec<f64>,
    pub locations: Vec<Location>,
    /// `baseline − candidate` per location and quantile.
    pub differences: Vec<Vec<f64>>,
    /// `(mean baseline − mean candidate) / mean baseline · 100` per quantile.
    pub relative: Vec<f64>,
}

fn same_levels(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
}

pub fn compare_models(region: &str, baseline: &QRiskReport, candidate: &QRiskReport) -> Result<Comparison> {
    if baseline.filter != candidate.filter {
        return Err(Error::Alignment(format!("lead filters differ: {} vs {}", baseline.filter, candidate.filter)));
    }
    if !same_levels(&baseline.quantiles, &candidate.quantiles) {
        return Err(Error::Alignment(format!("quantiles differ: {:?} vs {:?}", baseline.quantiles, candidate.quantiles)));
    }
    let keys = |r: &QRiskReport| r.locations.iter().map(Location::key).collect::<Vec<_>>();
    if keys(baseline) != keys(candidate) {
        return Err(Error::Alignment(format!(
            "{} covers {} locations, {} covers {}; location sets differ",
            baseline.model,
            baseline.locations.len(),
            candidate.model,
            candidate.locations.len()
        )));
    }
    let differences = baseline
        .values
        .iter()
        .zip(&candidate.values)
        .map(|(b, c)| b.iter().zip(c).map(|(b, c)| b - c).collect())
        .collect();
    let relative = baseline.regional.iter().zip(&candidate.regional).map(|(b, c)| (b - c) / b * 100.0).collect();
    Ok(Comparison {
        baseline: baseline.model.clone(),
        candidate: candidate.model.clone(),
        region: region.to_string(),
        filter: baseline.filter,
        quantiles: baseline.quantiles.clone(),
        locations: baseline.locations.clone(),
        differences,
        relative,
    })
}

/// Rows `comparison, region` with one relative difference per quantile.
pub fn write_difference_table<W: Write>(mut out: W, comparisons: &[Comparison]) -> std::io::Result<()> {
    let Some(first) = comparisons.first() else {
        return writeln!(out, "comparison,region");
    };
    let cols: Vec<String> = first.quantiles.iter().map(|q| q.to_string()).collect();
    writeln!(out, "comparison,region,{}", cols.join(","))?;
    for c in comparisons {
        let vals: Vec<String> = c.relative.iter().map(|v| format!("{v:.2}")).collect();
        writeln!(out, "{} vs {},{},{}", c.baseline, c.candidate, c.region, vals.join(","))?;
    }
    Ok(())
}

/// Per-location differences as one gridded field per quantile, dated at
/// `week`; cells without a location are missing.
pub fn difference_grid(comparison: &Comparison, grid: &Grid, week: WeekIndex) -> Result<Vec<GriddedSeries>> {
    let calendar = Calendar::Weekly { start: week, len: 1 };
    let mut fields = Vec::new();
    for (qi, q) in comparison.quantiles.iter().enumerate() {
        let name = format!("qrisk_diff_q{:02}", (q * 100.0).round() as u32);
        let mut f = GriddedSeries::filled(name, grid.clone(), calendar, f64::NAN);
        for (l, d) in comparison.locations.iter().zip(&comparison.differences) {
            if l.lat_index >= grid.nlat() || l.lon_index >= grid.nlon() {
                return Err(Error::Alignment(format!("location ({}, {}) outside the grid", l.lat, l.lon)));
            }
            f.set(0, l.lat_index, l.lon_index, d[qi]);
        }
        fields.push(f);
    }
    Ok(fields)
}

/// Per-location q-risks, one row per location plus the regional mean.
pub fn write_report<W: Write>(mut out: W, report: &QRiskReport) -> std::io::Result<()> {
    let cols: Vec<String> = report.quantiles.iter().map(|q| q.to_string()).collect();
    writeln!(out, "model,lead,lat,lon,{}", cols.join(","))?;
    let row = |vals: &[f64]| vals.iter().map(|v| format_value(*v)).collect::<Vec<_>>().join(",");
    for (l, v) in report.locations.iter().zip(&report.values) {
        writeln!(out, "{},{},{},{},{}", report.model, report.filter, l.lat, l.lon, row(v))?;
    }
    writeln!(out, "{},{},region,region,{}", report.model, report.filter, row(&report.regional))
}

fn parse_num(field: &str, line: usize) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::format(line, format!("bad number `{field}`")))
}

/// Reads a report written by [`write_report`], resolving locations on `grid`.
pub fn read_report<R: std::io::Read>(reader: R, grid: &Grid) -> Result<QRiskReport> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::format(1, e.to_string()))?.clone();
    if header.len() < 5 || &header[0] != "model" || &header[1] != "lead" || &header[2] != "lat" || &header[3] != "lon" {
        return Err(Error::format(1, "expected header `model,lead,lat,lon,<quantiles>`"));
    }
    let quantiles = header.iter().skip(4).map(|q| parse_num(q, 1)).collect::<Result<Vec<_>>>()?;
    let (mut model, mut filter) = (None, None);
    let (mut locations, mut values, mut regional) = (Vec::new(), Vec::new(), None);
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| Error::format(line, e.to_string()))?;
        if rec.len() != header.len() {
            return Err(Error::format(line, format!("expected {} fields, got {}", header.len(), rec.len())));
        }
        model.get_or_insert_with(|| rec[0].to_string());
        filter.get_or_insert(rec[1].parse::<LeadFilter>().map_err(|e| Error::format(line, e.to_string()))?);
        let row = rec.iter().skip(4).map(|v| parse_num(v, line)).collect::<Result<Vec<_>>>()?;
        if &rec[2] == "region" {
            regional = Some(row);
            continue;
        }
        let (lat, lon) = (parse_num(&rec[2], line)?, parse_num(&rec[3], line)?);
        let loc = grid.find(lat, lon).ok_or_else(|| Error::format(line, format!("({lat}, {lon}) is not on the grid")))?;
        locations.push(loc);
        values.push(row);
    }
    let regional = regional.ok_or_else(|| Error::format(0, "report has no region row"))?;
    Ok(QRiskReport {
        model: model.unwrap_or_default(),
        filter: filter.ok_or_else(|| Error::format(0, "empty report"))?,
        quantiles,
        locations,
        values,
        regional,
    })
}
