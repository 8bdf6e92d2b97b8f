//! Temporal fusion transformer producing quantiles for every lead.

pub mod checkpoint;
mod config;
mod graph;
mod weights;

use rayon::prelude::*;

use crate::data::calendar::WeekIndex;
use crate::data::grid::Location;
use crate::data::samples::SampleWindow;
use crate::error::Result;
use crate::numerics::Tape;

pub use config::TftConfig;
pub use graph::{BatchInputs, Embedded, ForwardPass, Graph, ParamVars, StaticContexts, TemporalOutput};
pub use weights::{parameter_count, TftWeights};

/// Samples per tape when predicting or computing gradients.
pub const CHUNK: usize = 16;

/// Quantile predictions for one location and issue week.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantileForecast {
    pub location: Location,
    pub issue: WeekIndex,
    /// Leads covered, ascending (1-based weeks after `issue`).
    pub leads: Vec<usize>,
    pub quantiles: Vec<f64>,
    /// `values[lead position][quantile]`.
    pub values: Vec<Vec<f64>>,
}

impl QuantileForecast {
    pub fn get(&self, lead: usize, quantile: usize) -> Option<f64> {
        let at = self.leads.binary_search(&lead).ok()?;
        self.values[at].get(quantile).copied()
    }

    /// Position of quantile level `q`, if forecast.
    pub fn quantile_index(&self, q: f64) -> Option<usize> {
        self.quantiles.iter().position(|&x| (x - q).abs() < 1e-12)
    }

    /// Sorts each lead's quantile values ascending.
    pub fn sort_quantiles(&mut self) {
        for row in &mut self.values {
            row.sort_by(f64::total_cmp);
        }
    }
}

/// Evaluation-mode predictions for a batch of samples (one tape).
pub fn predict_batch(weights: &TftWeights, samples: &[&SampleWindow]) -> Result<Vec<QuantileForecast>> {
    let config = weights.config();
    let inputs = BatchInputs::from_samples(config, samples)?;
    let mut tape = Tape::new();
    let params = ParamVars::register(&mut tape, weights, false);
    let pass = Graph::new(&mut tape, &params, config).forward(&inputs)?;
    let pred = tape.value(pass.prediction).data();
    let (t, nq) = (config.decoder_steps, config.quantiles.len());
    Ok(samples
        .iter()
        .enumerate()
        .map(|(b, s)| {
            let mut f = QuantileForecast {
                location: s.location,
                issue: s.issue,
                leads: (1..=t).collect(),
                quantiles: config.quantiles.clone(),
                values: (0..t).map(|i| pred[(b * t + i) * nq..(b * t + i + 1) * nq].to_vec()).collect(),
            };
            if config.sort_quantiles {
                f.sort_quantiles();
            }
            f
        })
        .collect())
}

/// Forecast for one sample.
pub fn forward(sample: &SampleWindow, weights: &TftWeights) -> Result<QuantileForecast> {
    Ok(predict_batch(weights, &[sample])?.remove(0))
}

/// Predictions for many samples, in input order; chunks run in parallel.
pub fn predict(weights: &TftWeights, samples: &[SampleWindow]) -> Result<Vec<QuantileForecast>> {
    let refs: Vec<&SampleWindow> = samples.iter().collect();
    let chunks: Vec<Vec<QuantileForecast>> =
        refs.par_chunks(CHUNK).map(|c| predict_batch(weights, c)).collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Pinball targets aligned with a `[B, τ_max, |Q|]` prediction.
pub fn replicated_targets(samples: &[&SampleWindow], quantiles: usize) -> Vec<f64> {
    samples.iter().flat_map(|s| s.target.iter().flat_map(move |&y| std::iter::repeat_n(y, quantiles))).collect()
}

/// Summed pinball loss over every sample, lead and quantile of the chunk and
/// its gradient per weight tensor. `dropout_seed` selects training mode.
pub fn loss_and_gradients(
    weights: &TftWeights,
    samples: &[&SampleWindow],
    dropout_seed: Option<u64>,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let config = weights.config();
    let inputs = BatchInputs::from_samples(config, samples)?;
    let mut tape = Tape::new();
    let params = ParamVars::register(&mut tape, weights, true);
    let pass = match dropout_seed {
        Some(seed) => Graph::training(&mut tape, &params, config, seed).forward(&inputs)?,
        None => Graph::new(&mut tape, &params, config).forward(&inputs)?,
    };
    let target = replicated_targets(samples, config.quantiles.len());
    let loss = tape.pinball_sum(pass.prediction, &target, &config.quantiles)?;
    let mut grads = tape.backward(loss)?;
    let value = tape.value(loss).data()[0];
    let per_tensor = params
        .vars()
        .iter()
        .zip(weights.tensors())
        .map(|(&v, t)| grads.take(v).unwrap_or_else(|| vec![0.0; t.len()]))
        .collect();
    Ok((value, per_tensor))
}

/// Summed evaluation-mode pinball loss.
pub fn loss_sum(weights: &TftWeights, samples: &[&SampleWindow]) -> Result<f64> {
    let config = weights.config();
    let parts: Vec<f64> = samples
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<f64> {
            let forecasts = predict_batch(weights, chunk)?;
            let mut total = 0.0;
            for (f, s) in forecasts.iter().zip(chunk.iter()) {
                for (row, &y) in f.values.iter().zip(&s.target) {
                    for (&p, &q) in row.iter().zip(&config.quantiles) {
                        total += crate::numerics::pinball(y, p, q);
                    }
                }
            }
            Ok(total)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}
