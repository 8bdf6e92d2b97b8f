use crate::error::{Error, Result};

use super::calendar::Calendar;

const SPACING_TOLERANCE: f64 = 1e-6;

/// Regular latitude/longitude grid; both axes ascending with uniform spacing.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    lats: Vec<f64>,
    lons: Vec<f64>,
}

impl Grid {
    pub fn new(lats: Vec<f64>, lons: Vec<f64>) -> Result<Self> {
        check_axis("lat", &lats)?;
        check_axis("lon", &lons)?;
        Ok(Self { lats, lons })
    }

    pub fn regular(lat0: f64, lon0: f64, spacing: f64, nlat: usize, nlon: usize) -> Result<Self> {
        let axis = |origin: f64, n: usize| (0..n).map(|i| round_coord(origin + spacing * i as f64)).collect();
        Self::new(axis(lat0, nlat), axis(lon0, nlon))
    }

    pub fn lats(&self) -> &[f64] {
        &self.lats
    }

    pub fn lons(&self) -> &[f64] {
        &self.lons
    }

    pub fn nlat(&self) -> usize {
        self.lats.len()
    }

    pub fn nlon(&self) -> usize {
        self.lons.len()
    }

    pub fn cells(&self) -> usize {
        self.lats.len() * self.lons.len()
    }

    /// (lat spacing, lon spacing); zero along an axis with a single value.
    pub fn spacing(&self) -> (f64, f64) {
        let step = |a: &[f64]| if a.len() > 1 { a[1] - a[0] } else { 0.0 };
        (step(&self.lats), step(&self.lons))
    }

    pub fn location(&self, lat_index: usize, lon_index: usize) -> Location {
        Location { lat_index, lon_index, lat: self.lats[lat_index], lon: self.lons[lon_index] }
    }

    pub fn locations(&self) -> impl Iterator<Item = Location> + '_ {
        (0..self.nlat()).flat_map(move |i| (0..self.nlon()).map(move |j| self.location(i, j)))
    }

    /// Location whose coordinates match within a small tolerance.
    pub fn find(&self, lat: f64, lon: f64) -> Option<Location> {
        let i = self.lats.iter().position(|v| (v - lat).abs() < SPACING_TOLERANCE)?;
        let j = self.lons.iter().position(|v| (v - lon).abs() < SPACING_TOLERANCE)?;
        Some(self.location(i, j))
    }
}

/// Rounds away floating noise from generated coordinates.
pub(crate) fn round_coord(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::Alignment(format!("{name} axis is empty")));
    }
    if axis.len() > 1 {
        let step = axis[1] - axis[0];
        if step <= 0.0 {
            return Err(Error::Alignment(format!("{name} axis is not ascending")));
        }
        for w in axis.windows(2) {
            if ((w[1] - w[0]) - step).abs() > SPACING_TOLERANCE {
                return Err(Error::Alignment(format!("{name} spacing is not uniform near {}", w[1])));
            }
        }
    }
    Ok(())
}

/// A grid cell, identified by its indices on the owning grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub lat_index: usize,
    pub lon_index: usize,
    pub lat: f64,
    pub lon: f64,
}

impl Location {
    pub fn key(&self) -> (usize, usize) {
        (self.lat_index, self.lon_index)
    }
}

/// Values of one variable over `time × lat × lon`; `NaN` marks a missing value.
#[derive(Clone, Debug)]
pub struct GriddedSeries {
    pub variable: String,
    pub grid: Grid,
    pub calendar: Calendar,
    values: Vec<f64>,
}

impl GriddedSeries {
    pub fn new(variable: impl Into<String>, grid: Grid, calendar: Calendar, values: Vec<f64>) -> Result<Self> {
        let expected = calendar.len() * grid.cells();
        if values.len() != expected {
            return Err(Error::Alignment(format!(
                "{} values for {} steps × {} cells",
                values.len(),
                calendar.len(),
                grid.cells()
            )));
        }
        Ok(Self { variable: variable.into(), grid, calendar, values })
    }

    pub fn filled(variable: impl Into<String>, grid: Grid, calendar: Calendar, value: f64) -> Self {
        let n = calendar.len() * grid.cells();
        Self { variable: variable.into(), grid, calendar, values: vec![value; n] }
    }

    pub fn steps(&self) -> usize {
        self.calendar.len()
    }

    fn offset(&self, t: usize, i: usize, j: usize) -> usize {
        (t * self.grid.nlat() + i) * self.grid.nlon() + j
    }

    pub fn get(&self, t: usize, i: usize, j: usize) -> f64 {
        self.values[self.offset(t, i, j)]
    }

    pub fn set(&mut self, t: usize, i: usize, j: usize, v: f64) {
        let o = self.offset(t, i, j);
        self.values[o] = v;
    }

    pub fn is_missing(&self, t: usize, i: usize, j: usize) -> bool {
        self.get(t, i, j).is_nan()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Time series of one cell.
    pub fn cell(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.steps()).map(|t| self.get(t, i, j)).collect()
    }

    /// Step-by-step field of one timestep, lat-major.
    pub fn field(&self, t: usize) -> &[f64] {
        let n = self.grid.cells();
        &self.values[t * n..(t + 1) * n]
    }

    /// Equality that treats two missing values as equal.
    pub fn same_as(&self, other: &GriddedSeries) -> bool {
        self.variable == other.variable
            && self.grid == other.grid
            && self.calendar == other.calendar
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits())
    }
}
