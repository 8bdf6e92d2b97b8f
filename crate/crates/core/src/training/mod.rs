//! Quantile-loss training with Adam, early stopping and random search.

mod fit;
mod search;

use rayon::prelude::*;

use crate::data::samples::SampleWindow;
use crate::error::Result;
use crate::model::{self, QuantileForecast, TftWeights, CHUNK};
use crate::numerics::{pinball, Tensor};

pub use fit::{clip_global_norm, fit, Adam, EpochRecord, FitResult, TrainConfig};
pub use search::{draw_trials, random_search, write_trial_log, SearchOutcome, SearchSpace, TrialConfig, TrialRecord};

/// `q(y - ŷ)+ + (1 - q)(ŷ - y)+`.
pub fn quantile_loss(y: f64, prediction: f64, q: f64) -> f64 {
    pinball(y, prediction, q)
}

/// Quantile losses summed over quantiles, averaged over samples and leads
/// (the sum is divided by `M · τ_max`).
pub fn training_loss(targets: &[&[f64]], forecasts: &[QuantileForecast]) -> f64 {
    assert_eq!(targets.len(), forecasts.len(), "forecasts must align with targets");
    let mut total = 0.0;
    let mut terms = 0usize;
    for (y, f) in targets.iter().zip(forecasts) {
        for (&lead, row) in f.leads.iter().zip(&f.values) {
            for (&p, &q) in row.iter().zip(&f.quantiles) {
                total += quantile_loss(y[lead - 1], p, q);
            }
        }
        terms += f.leads.len();
    }
    if terms == 0 {
        return 0.0;
    }
    total / terms as f64
}

/// A model `fit` can optimize.
pub trait Trainable: Clone + Send + Sync {
    type Sample: Sync;

    fn parameters(&self) -> &[Tensor];
    fn parameters_mut(&mut self) -> &mut [Tensor];
    /// Leads per sample (`τ_max`), the per-sample normalizer of the loss.
    fn horizon(&self) -> usize;
    /// Summed loss over `batch` and its gradient per parameter tensor, in
    /// training mode with dropout drawn from `seed`.
    fn loss_and_gradients(&self, batch: &[&Self::Sample], seed: u64) -> Result<(f64, Vec<Vec<f64>>)>;
    /// Summed evaluation-mode loss.
    fn evaluation_loss(&self, samples: &[&Self::Sample]) -> Result<f64>;
}

impl Trainable for TftWeights {
    type Sample = SampleWindow;

    fn parameters(&self) -> &[Tensor] {
        self.tensors()
    }

    fn parameters_mut(&mut self) -> &mut [Tensor] {
        self.tensors_mut()
    }

    fn horizon(&self) -> usize {
        self.config().decoder_steps
    }

    fn loss_and_gradients(&self, batch: &[&SampleWindow], seed: u64) -> Result<(f64, Vec<Vec<f64>>)> {
        // fixed chunking and in-order reduction keep results independent of
        // the worker count
        let parts: Vec<(f64, Vec<Vec<f64>>)> = batch
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(i, chunk)| model::loss_and_gradients(self, chunk, Some(seed.wrapping_add(i as u64))))
            .collect::<Result<_>>()?;
        let mut iter = parts.into_iter();
        let (mut loss, mut grads) = iter.next().expect("non-empty batch");
        for (l, g) in iter {
            loss += l;
            for (acc, part) in grads.iter_mut().zip(g) {
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
            }
        }
        Ok((loss, grads))
    }

    fn evaluation_loss(&self, samples: &[&SampleWindow]) -> Result<f64> {
        model::loss_sum(self, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::calendar::WeekIndex;
    use crate::data::grid::Grid;

    #[test]
    fn pinball_examples() {
        assert_eq!(quantile_loss(5.0, 5.0, 0.9), 0.0);
        assert!((quantile_loss(2.0, 1.0, 0.9) - 0.9).abs() < 1e-15);
        assert!((quantile_loss(1.0, 2.0, 0.9) - 0.1).abs() < 1e-15);
    }

    fn forecast(values: Vec<Vec<f64>>, quantiles: Vec<f64>) -> QuantileForecast {
        QuantileForecast {
            location: Grid::regular(0.0, 0.0, 1.0, 1, 1).unwrap().location(0, 0),
            issue: WeekIndex::new(2000, 1).unwrap(),
            leads: (1..=values.len()).collect(),
            quantiles,
            values,
        }
    }

    #[test]
    fn training_loss_examples() {
        let y = [4.0];
        assert_eq!(training_loss(&[&y], &[forecast(vec![vec![2.0]], vec![0.5])]), 1.0);
        assert_eq!(training_loss(&[&y], &[forecast(vec![vec![4.0]], vec![0.5])]), 0.0);
        let ys = [1.0, 3.0];
        let f = forecast(vec![vec![0.0, 2.0, 5.0], vec![1.0, 3.0, 3.5]], vec![0.1, 0.5, 0.9]);
        let once = training_loss(&[&ys], &[f.clone()]);
        let twice = training_loss(&[&ys, &ys], &[f.clone(), f]);
        assert_eq!(once, twice);
    }
}
