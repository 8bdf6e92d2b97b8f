#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqf_core::data::{Grid, Moments, SampleWindow, WeekIndex};
use sqf_core::model::TftConfig;

pub fn small_config() -> TftConfig {
    TftConfig {
        hidden: 8,
        heads: 2,
        dropout: 0.0,
        encoder_steps: 4,
        decoder_steps: 4,
        quantiles: vec![0.1, 0.5, 0.9],
        static_cardinalities: vec![3, 4],
        historical_inputs: 2,
        known_continuous: 2,
        known_cardinalities: vec![12],
        sort_quantiles: false,
    }
}

pub fn random_samples(config: &TftConfig, n: usize, seed: u64) -> Vec<SampleWindow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Grid::regular(0.0, 0.0, 0.25, config.static_cardinalities[0], config.static_cardinalities[1]).unwrap();
    let (k, l) = (config.encoder_steps, config.total_steps());
    (0..n)
        .map(|_| {
            let i = rng.random_range(0..config.static_cardinalities[0]);
            let j = rng.random_range(0..config.static_cardinalities[1]);
            SampleWindow {
                location: grid.location(i, j),
                issue: WeekIndex::new(2000, rng.random_range(1..=53)).unwrap(),
                static_categories: vec![i, j],
                historical: (0..k * config.historical_inputs).map(|_| rng.random_range(-2.0..2.0)).collect(),
                known: (0..l * config.known_continuous).map(|_| rng.random_range(-2.0..2.0)).collect(),
                known_categories: (0..l).map(|_| rng.random_range(0..12)).collect(),
                target: (0..config.decoder_steps).map(|_| rng.random_range(0.0..20.0)).collect(),
                target_scale: Moments { mean: 8.0, std: 3.0 },
            }
        })
        .collect()
}
