//! Seeded fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use sqf_core::data::{Calendar, Grid, GriddedSeries, Moments, SampleWindow, WeekIndex};
pub use sqf_core::model::{QuantileForecast, TftConfig};

/// Default-shape forecaster for a 4 x 5 grid with three past and three known inputs.
pub fn model_config() -> TftConfig {
    TftConfig::new(4, 5, 3, 3)
}

pub fn samples(config: &TftConfig, n: usize, seed: u64) -> Vec<SampleWindow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::regular(0.0, 0.0, 0.25, config.static_cardinalities[0], config.static_cardinalities[1]).unwrap();
    let (k, l) = (config.encoder_steps, config.total_steps());
    (0..n)
        .map(|_| {
            let i = rng.random_range(0..config.static_cardinalities[0]);
            let j = rng.random_range(0..config.static_cardinalities[1]);
            SampleWindow {
                location: grid.location(i, j),
                issue: WeekIndex::new(2000, rng.random_range(1..=52)).unwrap(),
                static_categories: vec![i, j],
                historical: (0..k * config.historical_inputs).map(|_| rng.random_range(-2.0..2.0)).collect(),
                known: (0..l * config.known_continuous).map(|_| rng.random_range(-2.0..2.0)).collect(),
                known_categories: (0..l).map(|_| rng.random_range(0..12)).collect(),
                target: (0..config.decoder_steps).map(|_| rng.random_range(0.0..40.0)).collect(),
                target_scale: Moments { mean: 15.0, std: 6.0 },
            }
        })
        .collect()
}

/// Daily gamma-like rainfall over `years` on an `nlat x nlon` grid.
pub fn daily_rain(nlat: usize, nlon: usize, years: (i32, i32), seed: u64) -> GriddedSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::regular(-23.0, -44.0, 0.25, nlat, nlon).unwrap();
    let cal = Calendar::daily_years(years.0, years.1);
    let v = (0..cal.len() * grid.cells())
        .map(|_| if rng.random_bool(0.6) { 0.0 } else { -8.0 * rng.random_range(1e-9..1.0f64).ln() })
        .collect();
    GriddedSeries::new("precip", grid, cal, v).unwrap()
}

/// Forecasts at every location for `issues` consecutive weeks with leads `1..=leads`.
pub fn forecasts(grid: &Grid, start: WeekIndex, issues: usize, leads: usize, seed: u64) -> Vec<QuantileForecast> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for l in grid.locations() {
        for n in 0..issues {
            let values = (0..leads)
                .map(|_| {
                    let m: f64 = rng.random_range(5.0..30.0);
                    vec![0.5 * m, m, 1.8 * m]
                })
                .collect();
            out.push(QuantileForecast {
                location: l,
                issue: start.offset(n as i64),
                leads: (1..=leads).collect(),
                quantiles: vec![0.1, 0.5, 0.9],
                values,
            });
        }
    }
    out
}
