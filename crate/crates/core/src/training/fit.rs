use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::Trainable;

/// Optimization settings for one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub max_grad_norm: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, batch_size: 64, max_epochs: 100, patience: 5, max_grad_norm: 1.0, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, m: &str| Err(Error::config(format!("train.{f}"), m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", "must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be positive");
        }
        if self.max_epochs == 0 {
            return bad("max_epochs", "must be positive");
        }
        if self.patience == 0 || self.patience > self.max_epochs {
            return bad("patience", "must lie in 1..=max_epochs");
        }
        if !(self.max_grad_norm > 0.0) {
            return bad("max_grad_norm", "must be positive");
        }
        Ok(())
    }
}

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(learning_rate: f64, sizes: impl IntoIterator<Item = usize>) -> Self {
        let sizes: Vec<usize> = sizes.into_iter().collect();
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn update(&mut self, params: &mut [crate::numerics::Tensor], grads: &[Vec<f64>]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            for (j, x) in p.data_mut().iter_mut().enumerate() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let mhat = m[j] / c1;
                let vhat = v[j] / c2;
                *x -= self.learning_rate * mhat / (vhat.sqrt() + self.epsilon);
            }
        }
    }
}

/// Rescales `grads` in place so their joint L2 norm is at most `max_norm`;
/// returns the norm before clipping.
pub fn clip_global_norm(grads: &mut [Vec<f64>], max_norm: f64) -> f64 {
    let norm = grads.iter().flatten().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grads.iter_mut().flatten().for_each(|g| *g *= s);
    }
    norm
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean minibatch loss during the epoch.
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug)]
pub struct FitResult<M> {
    /// Weights after the best validation epoch.
    pub model: M,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub history: Vec<EpochRecord>,
}

fn normalized<M: Trainable>(model: &M, samples: &[&M::Sample]) -> Result<f64> {
    Ok(model.evaluation_loss(samples)? / (samples.len() * model.horizon()) as f64)
}

/// Minibatch Adam on the joint quantile loss with global-norm clipping and
/// early stopping on the validation loss.
pub fn fit<M: Trainable>(model: M, train: &[M::Sample], validation: &[M::Sample], config: &TrainConfig) -> Result<FitResult<M>> {
    config.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(Error::config("train", "training and validation sets must be non-empty"));
    }
    let mut model = model;
    let val: Vec<&M::Sample> = validation.iter().collect();
    let mut adam = Adam::new(config.learning_rate, model.parameters().iter().map(|t| t.len()));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(usize, f64, M)> = None;
    let mut since_best = 0;
    let mut history = Vec::new();
    for epoch in 1..=config.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let batches = order.chunks(config.batch_size);
        let nbatches = batches.len();
        for (b, idx) in batches.enumerate() {
            let batch: Vec<&M::Sample> = idx.iter().map(|&i| &train[i]).collect();
            let seed = config.seed.wrapping_add(((epoch as u64) << 32) | b as u64);
            let (sum, mut grads) = model.loss_and_gradients(&batch, seed)?;
            let scale = 1.0 / (batch.len() * model.horizon()) as f64;
            let loss = sum * scale;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b + 1, value: loss });
            }
            grads.iter_mut().flatten().for_each(|g| *g *= scale);
            if grads.iter().flatten().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss { epoch, batch: b + 1, value: loss });
            }
            clip_global_norm(&mut grads, config.max_grad_norm);
            adam.update(model.parameters_mut(), &grads);
            epoch_loss += loss;
        }
        let val_loss = normalized(&model, &val)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: nbatches, value: val_loss });
        }
        let train_loss = epoch_loss / nbatches as f64;
        log::debug!("epoch {epoch}: train {train_loss:.6} validation {val_loss:.6}");
        history.push(EpochRecord { epoch, train_loss, val_loss });
        if best.as_ref().is_none_or(|(_, l, _)| val_loss < *l) {
            best = Some((epoch, val_loss, model.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                log::info!("early stop after epoch {epoch}");
                break;
            }
        }
    }
    let (best_epoch, best_val_loss, model) = best.expect("at least one epoch");
    Ok(FitResult { model, best_epoch, best_val_loss, history })
}
