use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::data::grid::{GriddedSeries, Location};
use crate::error::{Error, Result};
use crate::model::QuantileForecast;
use crate::numerics::pinball;

/// Leads entering a q-risk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeadFilter {
    All,
    Lead(usize),
}

impl LeadFilter {
    pub fn accepts(self, lead: usize) -> bool {
        match self {
            LeadFilter::All => true,
            LeadFilter::Lead(l) => l == lead,
        }
    }
}

impl fmt::Display for LeadFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeadFilter::All => f.write_str("all"),
            LeadFilter::Lead(l) => write!(f, "{l}"),
        }
    }
}

impl FromStr for LeadFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(LeadFilter::All),
            n => n
                .parse()
                .ok()
                .filter(|&l: &usize| l > 0)
                .map(LeadFilter::Lead)
                .ok_or_else(|| Error::config("lead", format!("expected `all` or a positive lead, got `{s}`"))),
        }
    }
}

/// `2 Σ QL(y, ŷ, q) / Σ |y|` over `(y, ŷ)` pairs.
pub fn q_risk_pairs(pairs: &[(f64, f64)], q: f64) -> Result<f64> {
    let num: f64 = pairs.iter().map(|&(y, p)| pinball(y, p, q)).sum();
    let den: f64 = pairs.iter().map(|&(y, _)| y.abs()).sum();
    if den == 0.0 {
        return Err(Error::UndefinedMetric(format!("sum of |targets| is zero over {} points", pairs.len())));
    }
    Ok(2.0 * num / den)
}

/// Observed value for the week targeted by `lead`.
pub fn observed(target: &GriddedSeries, f: &QuantileForecast, lead: usize) -> Result<f64> {
    let week = f.issue.offset(lead as i64);
    let t = target
        .calendar
        .position_of_week(week)
        .ok_or_else(|| Error::Coverage(format!("no observation for week {week}")))?;
    let y = target.get(t, f.location.lat_index, f.location.lon_index);
    if y.is_nan() {
        return Err(Error::Coverage(format!("missing observation for week {week} at ({}, {})", f.location.lat, f.location.lon)));
    }
    Ok(y)
}

/// `(y, ŷ_q)` pairs for every forecast and selected lead.
pub fn paired(target: &GriddedSeries, forecasts: &[QuantileForecast], q: f64, filter: LeadFilter) -> Result<Vec<(f64, f64)>> {
    let mut pairs = Vec::new();
    for f in forecasts {
        let qi = f.quantile_index(q).ok_or_else(|| Error::Lookup { kind: "quantile", name: q.to_string() })?;
        if let LeadFilter::Lead(l) = filter {
            if !f.leads.contains(&l) {
                return Err(Error::Coverage(format!("forecast issued {} lacks lead {l}", f.issue)));
            }
        }
        for (i, &lead) in f.leads.iter().enumerate() {
            if filter.accepts(lead) {
                pairs.push((observed(target, f, lead)?, f.values[i][qi]));
            }
        }
    }
    Ok(pairs)
}

/// Normalized quantile loss of `forecasts` against the weekly `target`.
pub fn q_risk(target: &GriddedSeries, forecasts: &[QuantileForecast], q: f64, filter: LeadFilter) -> Result<f64> {
    q_risk_pairs(&paired(target, forecasts, q, filter)?, q)
}

/// Per-location q-risks and their equal-weight regional average.
#[derive(Clone, Debug, PartialEq)]
pub struct QRiskReport {
    pub model: String,
    pub filter: LeadFilter,
    pub quantiles: Vec<f64>,
    pub locations: Vec<Location>,
    /// `values[location][quantile]`.
    pub values: Vec<Vec<f64>>,
    /// Mean over locations per quantile.
    pub regional: Vec<f64>,
}

impl QRiskReport {
    pub fn build(
        model: &str,
        target: &GriddedSeries,
        forecasts: &[QuantileForecast],
        quantiles: &[f64],
        filter: LeadFilter,
    ) -> Result<Self> {
        let mut by_location: BTreeMap<(usize, usize), (Location, Vec<QuantileForecast>)> = BTreeMap::new();
        for f in forecasts {
            by_location.entry(f.location.key()).or_insert_with(|| (f.location, Vec::new())).1.push(f.clone());
        }
        if by_location.is_empty() {
            return Err(Error::UndefinedMetric(format!("no forecasts for model {model}")));
        }
        let mut locations = Vec::new();
        let mut values = Vec::new();
        for (loc, fs) in by_location.into_values() {
            let row = quantiles.iter().map(|&q| q_risk(target, &fs, q, filter)).collect::<Result<Vec<_>>>()?;
            locations.push(loc);
            values.push(row);
        }
        let n = values.len() as f64;
        let regional = (0..quantiles.len()).map(|qi| values.iter().map(|r| r[qi]).sum::<f64>() / n).collect();
        Ok(Self { model: model.to_string(), filter, quantiles: quantiles.to_vec(), locations, values, regional })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_fixture() {
        assert_eq!(q_risk_pairs(&[(10.0, 8.0)], 0.9).unwrap(), 0.36);
    }

    #[test]
    fn perfect_forecasts_score_zero() {
        assert_eq!(q_risk_pairs(&[(3.0, 3.0), (1.5, 1.5)], 0.1).unwrap(), 0.0);
    }

    #[test]
    fn zero_targets_are_undefined() {
        assert!(matches!(q_risk_pairs(&[(0.0, 1.0)], 0.5), Err(Error::UndefinedMetric(_))));
        // zero targets contribute nothing to the denominator but keep it defined
        assert!(q_risk_pairs(&[(0.0, 1.0), (2.0, 2.0)], 0.5).is_ok());
    }

    #[test]
    fn lead_filter_parsing() {
        assert_eq!("all".parse::<LeadFilter>().unwrap(), LeadFilter::All);
        assert_eq!("26".parse::<LeadFilter>().unwrap(), LeadFilter::Lead(26));
        assert!("0".parse::<LeadFilter>().is_err());
    }
}
