use crate::data::samples::MONTHS;
use crate::error::{Error, Result};

/// Shape of the forecaster.
#[derive(Clone, Debug, PartialEq)]
pub struct TftConfig {
    /// Hidden size `d`.
    pub hidden: usize,
    /// Attention heads `H`; must divide `hidden`.
    pub heads: usize,
    pub dropout: f64,
    /// Past weeks `k`.
    pub encoder_steps: usize,
    /// Forecast leads `τ_max`.
    pub decoder_steps: usize,
    /// Ascending quantile levels.
    pub quantiles: Vec<f64>,
    /// Vocabulary size per static categorical input (`m_s` entries).
    pub static_cardinalities: Vec<usize>,
    /// Past-only continuous inputs `m_z`, including the target history.
    pub historical_inputs: usize,
    /// Continuous inputs known over past and future steps.
    pub known_continuous: usize,
    /// Vocabulary size per known categorical input (at most one: the month).
    pub known_cardinalities: Vec<usize>,
    /// Sort each lead's quantiles after prediction.
    pub sort_quantiles: bool,
}

impl TftConfig {
    /// Desk-scale defaults for a `nlat × nlon` grid with the given input counts.
    pub fn new(nlat: usize, nlon: usize, historical_inputs: usize, known_continuous: usize) -> Self {
        Self {
            hidden: 16,
            heads: 2,
            dropout: 0.1,
            encoder_steps: 26,
            decoder_steps: 26,
            quantiles: vec![0.1, 0.5, 0.9],
            static_cardinalities: vec![nlat, nlon],
            historical_inputs,
            known_continuous,
            known_cardinalities: vec![MONTHS],
            sort_quantiles: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::config(format!("model.{field}"), msg));
        if self.hidden == 0 || self.heads == 0 || self.hidden % self.heads != 0 {
            return bad("heads", format!("hidden size {} not divisible by {} heads", self.hidden, self.heads));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout", format!("{} outside [0, 1)", self.dropout));
        }
        if self.encoder_steps == 0 || self.decoder_steps == 0 {
            return bad("encoder_steps", "encoder and decoder steps must be positive".into());
        }
        if self.quantiles.is_empty()
            || self.quantiles.iter().any(|q| !(*q > 0.0 && *q < 1.0))
            || self.quantiles.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("quantiles", format!("{:?} must be strictly ascending in (0, 1)", self.quantiles));
        }
        if self.static_cardinalities.is_empty() || self.static_cardinalities.contains(&0) {
            return bad("static_cardinalities", "need at least one non-empty static vocabulary".into());
        }
        if self.historical_inputs == 0 {
            return bad("historical_inputs", "need at least one past input".into());
        }
        if self.known_cardinalities.len() > 1 || self.known_cardinalities.contains(&0) {
            return bad("known_cardinalities", "at most one non-empty known categorical input".into());
        }
        if self.known_inputs() == 0 {
            return bad("known_continuous", "need at least one known input".into());
        }
        Ok(())
    }

    pub fn static_inputs(&self) -> usize {
        self.static_cardinalities.len()
    }

    /// `m_x`: continuous plus categorical known inputs.
    pub fn known_inputs(&self) -> usize {
        self.known_continuous + self.known_cardinalities.len()
    }

    pub fn total_steps(&self) -> usize {
        self.encoder_steps + self.decoder_steps
    }

    pub fn head_size(&self) -> usize {
        self.hidden / self.heads
    }
}
