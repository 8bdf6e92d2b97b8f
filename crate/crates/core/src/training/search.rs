use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::fit::{fit, FitResult, TrainConfig};
use super::Trainable;

/// Candidate values per hyperparameter; every set must be non-empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub hidden: Vec<usize>,
    pub dropout: Vec<f64>,
    pub batch_size: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub max_grad_norm: Vec<f64>,
    pub heads: Vec<usize>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            hidden: vec![8, 16, 32, 64],
            dropout: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            batch_size: vec![32, 64, 128],
            learning_rate: vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2],
            max_grad_norm: vec![0.01, 1.0, 100.0],
            heads: vec![1, 2, 4],
        }
    }
}

impl SearchSpace {
    /// The space holding only `c`.
    pub fn single(c: &TrialConfig) -> Self {
        Self {
            hidden: vec![c.hidden],
            dropout: vec![c.dropout],
            batch_size: vec![c.batch_size],
            learning_rate: vec![c.learning_rate],
            max_grad_norm: vec![c.max_grad_norm],
            heads: vec![c.heads],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sets = [
            ("hidden", self.hidden.len()),
            ("dropout", self.dropout.len()),
            ("batch_size", self.batch_size.len()),
            ("learning_rate", self.learning_rate.len()),
            ("max_grad_norm", self.max_grad_norm.len()),
            ("heads", self.heads.len()),
        ];
        if let Some((name, _)) = sets.iter().find(|(_, n)| *n == 0) {
            return Err(Error::config(format!("search.{name}"), "candidate set is empty"));
        }
        for &h in &self.hidden {
            if let Some(&heads) = self.heads.iter().find(|&&heads| heads == 0 || h % heads != 0) {
                return Err(Error::config("search.heads", format!("{heads} heads do not divide hidden size {h}")));
            }
        }
        Ok(())
    }
}

/// One drawn configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub hidden: usize,
    pub heads: usize,
    pub dropout: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_grad_norm: f64,
}

impl TrialConfig {
    pub fn train_config(&self, base: &TrainConfig, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_grad_norm: self.max_grad_norm,
            seed,
            ..base.clone()
        }
    }
}

/// One line of the trial log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: usize,
    pub config: TrialConfig,
    pub best_epoch: Option<usize>,
    pub val_loss: Option<f64>,
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome<M> {
    pub best: TrialConfig,
    pub best_trial: usize,
    pub fit: FitResult<M>,
    pub trials: Vec<TrialRecord>,
}

/// Independent uniform draws from each candidate set.
pub fn draw_trials(space: &SearchSpace, iterations: usize, seed: u64) -> Vec<TrialConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |n: usize| rng.random_range(0..n);
    (0..iterations)
        .map(|_| TrialConfig {
            hidden: space.hidden[pick(space.hidden.len())],
            dropout: space.dropout[pick(space.dropout.len())],
            batch_size: space.batch_size[pick(space.batch_size.len())],
            learning_rate: space.learning_rate[pick(space.learning_rate.len())],
            max_grad_norm: space.max_grad_norm[pick(space.max_grad_norm.len())],
            heads: space.heads[pick(space.heads.len())],
        })
        .collect()
}

/// Trains one model per drawn configuration (trials run in parallel) and
/// keeps the one with the lowest validation loss; ties go to the earlier
/// trial. `build` creates the untrained model for a configuration and seed.
pub fn random_search<M, F>(
    space: &SearchSpace,
    iterations: usize,
    base: &TrainConfig,
    train: &[M::Sample],
    validation: &[M::Sample],
    seed: u64,
    build: F,
) -> Result<SearchOutcome<M>>
where
    M: Trainable,
    F: Fn(&TrialConfig, u64) -> Result<M> + Sync,
{
    if iterations == 0 {
        return Err(Error::config("search.iterations", "must be at least 1"));
    }
    space.validate()?;
    let draws = draw_trials(space, iterations, seed);
    let results: Vec<(TrialRecord, Option<FitResult<M>>)> = draws
        .into_par_iter()
        .enumerate()
        .map(|(id, config)| {
            let trial_seed = seed.wrapping_mul(1_000_003).wrapping_add(id as u64 + 1);
            let started = Instant::now();
            let outcome = build(&config, trial_seed)
                .and_then(|m| fit(m, train, validation, &config.train_config(base, trial_seed)));
            let wall_seconds = started.elapsed().as_secs_f64();
            match outcome {
                Ok(r) => {
                    log::info!("trial {id}: validation loss {:.6} at epoch {}", r.best_val_loss, r.best_epoch);
                    let rec = TrialRecord {
                        trial_id: id,
                        config,
                        best_epoch: Some(r.best_epoch),
                        val_loss: Some(r.best_val_loss),
                        wall_seconds,
                        error: None,
                    };
                    (rec, Some(r))
                }
                Err(e) => {
                    log::warn!("trial {id} aborted: {e}");
                    let rec = TrialRecord {
                        trial_id: id,
                        config,
                        best_epoch: None,
                        val_loss: None,
                        wall_seconds,
                        error: Some(e.to_string()),
                    };
                    (rec, None)
                }
            }
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (rec, r) in &results {
        if let Some(r) = r {
            if best.is_none_or(|(_, l)| r.best_val_loss < l) {
                best = Some((rec.trial_id, r.best_val_loss));
            }
        }
    }
    let (best_trial, _) = best.ok_or(Error::SearchFailed(iterations))?;
    let mut trials = Vec::with_capacity(results.len());
    let mut best_fit = None;
    for (rec, r) in results {
        if rec.trial_id == best_trial {
            best_fit = r;
        }
        trials.push(rec);
    }
    Ok(SearchOutcome {
        best: trials[best_trial].config.clone(),
        best_trial,
        fit: best_fit.expect("best trial has a fit"),
        trials,
    })
}

/// Writes one JSON record per line, in trial order.
pub fn write_trial_log<W: Write>(mut out: W, trials: &[TrialRecord]) -> std::io::Result<()> {
    for t in trials {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::fit::tests::scripted;
    use super::*;

    fn base() -> TrialConfig {
        TrialConfig { hidden: 8, heads: 2, dropout: 0.1, batch_size: 4, learning_rate: 1e-3, max_grad_norm: 1.0 }
    }

    #[test]
    fn single_candidate_space() {
        let draws = draw_trials(&SearchSpace::single(&base()), 60, 3);
        assert_eq!(draws.len(), 60);
        assert!(draws.iter().all(|d| *d == base()));
    }

    #[test]
    fn draws_are_seeded() {
        let s = SearchSpace::default();
        assert_eq!(draw_trials(&s, 60, 9), draw_trials(&s, 60, 9));
        assert_ne!(draw_trials(&s, 60, 9), draw_trials(&s, 60, 10));
    }

    #[test]
    fn picks_lowest_validation_loss_and_logs_every_trial() {
        let space = SearchSpace { learning_rate: vec![1e-3, 2e-3, 3e-3], ..SearchSpace::single(&base()) };
        let out = random_search(&space, 12, &TrainConfig::default(), &[0.0; 4], &[0.0; 2], 5, |c, _| {
            // validation loss proportional to the learning rate
            Ok(scripted(vec![c.learning_rate * 1000.0]))
        })
        .unwrap();
        assert_eq!(out.trials.len(), 12);
        assert_eq!(out.best.learning_rate, 1e-3);
        assert!(out.trials.iter().enumerate().all(|(i, t)| t.trial_id == i));
        let mut buf = Vec::new();
        write_trial_log(&mut buf, &out.trials).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 12);
        let first: TrialRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first, out.trials[0]);
    }

    #[test]
    fn all_aborted_is_an_error() {
        let r = random_search(&SearchSpace::single(&base()), 3, &TrainConfig::default(), &[0.0], &[0.0], 1, |_, _| {
            Ok(scripted(vec![f64::NAN]))
        });
        assert!(matches!(r, Err(Error::SearchFailed(3))));
    }

    #[test]
    fn rejects_indivisible_heads() {
        let space = SearchSpace { hidden: vec![6], heads: vec![4], ..SearchSpace::default() };
        assert!(space.validate().is_err());
    }
}
