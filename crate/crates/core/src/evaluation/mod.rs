//! Normalized quantile risk, model comparisons and plot-ready exports.

mod compare;
mod export;
mod forecasts;
mod qrisk;

pub use compare::{compare_models, difference_grid, read_report, write_difference_table, write_report, Comparison};
pub use export::{export_series, write_series, SeriesRow, SeriesTable};
pub use forecasts::{climatology_forecasts, ensemble_forecasts, quantile_column, read_forecasts, write_forecasts};
pub use qrisk::{observed, paired, q_risk, q_risk_pairs, LeadFilter, QRiskReport};
