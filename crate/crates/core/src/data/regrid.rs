use crate::error::{Error, Result};

use super::grid::{round_coord, Grid, GriddedSeries};

/// Coarsens a grid by taking the maximum over each `window × window` block of
/// fine cells, per timestep. Missing fine cells are ignored; a block with no
/// values stays missing. The coarse cell center is the mean of the block's
/// fine centers.
pub fn max_pool_regrid(fine: &GriddedSeries, window: usize) -> Result<GriddedSeries> {
    if window == 0 {
        return Err(Error::Alignment("pooling window must be positive".into()));
    }
    let (nlat, nlon) = (fine.grid.nlat(), fine.grid.nlon());
    if nlat % window != 0 || nlon % window != 0 {
        return Err(Error::Alignment(format!(
            "fine grid {nlat}×{nlon} is not divisible by window {window}"
        )));
    }
    let block_centers = |axis: &[f64]| -> Vec<f64> {
        axis.chunks(window).map(|c| round_coord(c.iter().sum::<f64>() / window as f64)).collect()
    };
    let grid = Grid::new(block_centers(fine.grid.lats()), block_centers(fine.grid.lons()))?;
    let (clat, clon) = (grid.nlat(), grid.nlon());
    let mut out = GriddedSeries::filled(fine.variable.clone(), grid, fine.calendar, f64::NAN);
    for t in 0..fine.steps() {
        for ci in 0..clat {
            for cj in 0..clon {
                let mut best = f64::NAN;
                for i in ci * window..(ci + 1) * window {
                    for j in cj * window..(cj + 1) * window {
                        let v = fine.get(t, i, j);
                        if !v.is_nan() && (best.is_nan() || v > best) {
                            best = v;
                        }
                    }
                }
                out.set(t, ci, cj, best);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::calendar::Calendar;

    fn series(nlat: usize, nlon: usize, values: Vec<f64>) -> GriddedSeries {
        let grid = Grid::regular(-23.0, -44.0, 0.05, nlat, nlon).unwrap();
        let cal = Calendar::daily_years(2000, 2000);
        let cal = match cal {
            Calendar::Daily { start, .. } => Calendar::Daily { start, len: values.len() / (nlat * nlon) },
            _ => unreachable!(),
        };
        GriddedSeries::new("precip", grid, cal, values).unwrap()
    }

    #[test]
    fn single_block_takes_max() {
        let fine = series(5, 5, (1..=25).map(f64::from).collect());
        let coarse = max_pool_regrid(&fine, 5).unwrap();
        assert_eq!((coarse.grid.nlat(), coarse.grid.nlon()), (1, 1));
        assert_eq!(coarse.get(0, 0, 0), 25.0);
        assert!((coarse.grid.lats()[0] - (-22.9)).abs() < 1e-9);
    }

    #[test]
    fn constant_field_stays_constant() {
        let fine = series(10, 10, vec![3.5; 200]);
        let coarse = max_pool_regrid(&fine, 5).unwrap();
        assert!(coarse.values().iter().all(|&v| v == 3.5));
        assert_eq!(coarse.steps(), 2);
    }

    #[test]
    fn indivisible_grid_is_an_alignment_error() {
        let fine = series(6, 5, vec![0.0; 30]);
        assert!(matches!(max_pool_regrid(&fine, 5), Err(Error::Alignment(_))));
    }

    #[test]
    fn missing_cells_are_skipped() {
        let mut v = vec![f64::NAN; 4];
        v[2] = 1.0;
        let fine = series(2, 2, v);
        assert_eq!(max_pool_regrid(&fine, 2).unwrap().get(0, 0, 0), 1.0);
        let fine = series(2, 2, vec![f64::NAN; 4]);
        assert!(max_pool_regrid(&fine, 2).unwrap().is_missing(0, 0, 0));
    }
}
