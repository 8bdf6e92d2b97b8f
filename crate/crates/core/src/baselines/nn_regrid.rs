use crate::data::grid::{Grid, GriddedSeries};
use crate::error::{Error, Result};

const TIE: f64 = 1e-9;

/// Coverage tolerance along one axis: its spacing, or the other axis'
/// spacing for single-point axes.
fn tolerance(own: f64, other: f64) -> f64 {
    if own > 0.0 {
        own
    } else if other > 0.0 {
        other
    } else {
        f64::INFINITY
    }
}

/// Index of the nearest source cell for every target cell, row-major.
/// Ties go to the lower-left source (smallest latitude, then longitude).
pub fn nearest_cells(source: &Grid, target: &Grid) -> Result<Vec<(usize, usize)>> {
    let (slat, slon) = source.spacing();
    let (tol_lat, tol_lon) = (tolerance(slat, slon), tolerance(slon, slat));
    let mut out = Vec::with_capacity(target.cells());
    for t in target.locations() {
        let mut best: Option<(f64, usize, usize)> = None;
        for s in source.locations() {
            let d = (s.lat - t.lat).powi(2) + (s.lon - t.lon).powi(2);
            if best.is_none_or(|(bd, _, _)| d < bd - TIE) {
                best = Some((d, s.lat_index, s.lon_index));
            }
        }
        let (_, i, j) = best.expect("source grid has cells");
        let (dlat, dlon) = ((source.lats()[i] - t.lat).abs(), (source.lons()[j] - t.lon).abs());
        if dlat > tol_lat + TIE || dlon > tol_lon + TIE {
            return Err(Error::Coverage(format!(
                "target cell ({}, {}) is more than one source spacing from the nearest source center",
                t.lat, t.lon
            )));
        }
        out.push((i, j));
    }
    Ok(out)
}

/// Resamples `series` onto `target` by nearest source cell center.
pub fn nn_regrid(series: &GriddedSeries, target: &Grid) -> Result<GriddedSeries> {
    let map = nearest_cells(&series.grid, target)?;
    let mut values = Vec::with_capacity(series.steps() * target.cells());
    for t in 0..series.steps() {
        values.extend(map.iter().map(|&(i, j)| series.get(t, i, j)));
    }
    GriddedSeries::new(series.variable.clone(), target.clone(), series.calendar, values)
}
