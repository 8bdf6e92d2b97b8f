use crate::data::aggregate::{aggregate_weekly, Aggregation};
use crate::data::calendar::{Calendar, WeekIndex};
use crate::data::grid::{Grid, GriddedSeries};
use crate::error::{Error, Result};

use super::quantile::quantile_sorted;

/// Members of a dynamical ensemble on a shared grid and calendar.
#[derive(Clone, Debug)]
pub struct EnsembleForecast {
    members: Vec<GriddedSeries>,
}

impl EnsembleForecast {
    pub fn new(members: Vec<GriddedSeries>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::Alignment("ensemble has no members".into()));
        };
        for (m, s) in members.iter().enumerate() {
            if s.grid != first.grid || s.calendar != first.calendar {
                return Err(Error::Alignment(format!("member {m} does not share grid and calendar with member 0")));
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[GriddedSeries] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        &self.members[0].grid
    }
}

/// Quantiles across members per cell and week.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleQuantiles {
    pub grid: Grid,
    pub calendar: Calendar,
    pub quantiles: Vec<f64>,
    /// `[week][cell][quantile]`, flattened; NaN where every member is missing.
    values: Vec<f64>,
}

impl EnsembleQuantiles {
    pub fn get(&self, t: usize, lat_index: usize, lon_index: usize) -> &[f64] {
        let nq = self.quantiles.len();
        let at = (t * self.grid.cells() + lat_index * self.grid.nlon() + lon_index) * nq;
        &self.values[at..at + nq]
    }

    pub fn at_week(&self, week: WeekIndex, lat_index: usize, lon_index: usize) -> Option<&[f64]> {
        self.calendar.position_of_week(week).map(|t| self.get(t, lat_index, lon_index))
    }
}

/// Weekly-aggregates every member, then takes empirical quantiles across members.
pub fn ensemble_quantiles(ens: &EnsembleForecast, agg: Aggregation, quantiles: &[f64]) -> Result<EnsembleQuantiles> {
    if ens.len() < 2 {
        return Err(Error::config("ensemble", format!("{} member(s); at least 2 required", ens.len())));
    }
    let weekly: Vec<GriddedSeries> = ens
        .members()
        .iter()
        .map(|m| if m.calendar.is_daily() { aggregate_weekly(m, agg) } else { Ok(m.clone()) })
        .collect::<Result<_>>()?;
    let first = &weekly[0];
    let cells = first.grid.cells();
    let nq = quantiles.len();
    let mut values = Vec::with_capacity(first.steps() * cells * nq);
    let mut sample = Vec::with_capacity(weekly.len());
    for t in 0..first.steps() {
        for c in 0..cells {
            sample.clear();
            sample.extend(weekly.iter().map(|m| m.field(t)[c]).filter(|v| !v.is_nan()));
            if sample.is_empty() {
                values.extend(std::iter::repeat_n(f64::NAN, nq));
                continue;
            }
            sample.sort_by(f64::total_cmp);
            values.extend(quantiles.iter().map(|&q| quantile_sorted(&sample, q)));
        }
    }
    Ok(EnsembleQuantiles { grid: first.grid.clone(), calendar: first.calendar, quantiles: quantiles.to_vec(), values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members(values: impl Fn(usize) -> f64, n: usize) -> EnsembleForecast {
        let grid = Grid::regular(0.0, 0.0, 0.4, 1, 1).unwrap();
        let cal = Calendar::daily_years(2016, 2016);
        EnsembleForecast::new((0..n).map(|m| GriddedSeries::filled("p", grid.clone(), cal, values(m))).collect()).unwrap()
    }

    #[test]
    fn quantiles_across_fifty_members() {
        let ens = members(|m| m as f64 + 1.0, 50);
        let q = ensemble_quantiles(&ens, Aggregation::Max, &[0.1, 0.5, 0.9]).unwrap();
        let v = q.get(3, 0, 0);
        assert_eq!(v[1], 25.5);
        assert!((v[2] - 45.1).abs() < 1e-12);
        assert_eq!(q.calendar.len(), 53);
    }

    #[test]
    fn identical_members() {
        let ens = members(|_| 7.25, 10);
        let q = ensemble_quantiles(&ens, Aggregation::Max, &[0.1, 0.5, 0.9]).unwrap();
        assert_eq!(q.get(0, 0, 0), &[7.25, 7.25, 7.25]);
    }

    #[test]
    fn needs_two_members() {
        assert!(ensemble_quantiles(&members(|_| 1.0, 1), Aggregation::Max, &[0.5]).is_err());
    }
}
