//! Reference forecasts: per-week-of-year climatology and dynamical ensembles.

pub mod climatology;
pub mod ensemble;
pub mod nn_regrid;
pub mod quantile;

pub use climatology::{
    climatology_from_weekly, climatology_predict, compute_climatology, quantile_variable, read_climatology, write_climatology,
    ClimatologyOp, ClimatologyTable, TARGET_QUANTILES,
};
pub use ensemble::{ensemble_quantiles, EnsembleForecast, EnsembleQuantiles};
pub use nn_regrid::{nearest_cells, nn_regrid};
pub use quantile::{quantile_sorted, quantiles};
