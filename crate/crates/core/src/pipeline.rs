//! Dataset to samples: weekly aggregation, known-future inputs, standardization
//! and splitting.

use std::collections::BTreeMap;

use crate::baselines::{climatology_from_weekly, quantile_variable, ClimatologyOp, ClimatologyTable, TARGET_QUANTILES};
use crate::data::{
    aggregate_weekly, assemble_samples, broadcast_index, split_samples, Aggregation, DatasetSplit, GriddedSeries,
    IndexSeries, SampleInputs, SkipReport, SplitSamples, Standardization, WindowConfig,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    /// Daily variable forecast as its weekly maximum.
    pub target: String,
    pub window: WindowConfig,
    pub split: DatasetSplit,
    /// Adds the climatology quantiles of each week as known inputs.
    pub climatology_inputs: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            target: crate::data::synthetic::PRECIP.to_string(),
            window: WindowConfig::new(26, 26),
            split: DatasetSplit::default(),
            climatology_inputs: true,
        }
    }
}

/// Everything downstream stages need from one dataset.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub inputs: SampleInputs,
    pub standardization: Standardization,
    pub samples: SplitSamples,
    pub skipped: SkipReport,
}

/// Weekly maximum of `target`, weekly means of the other daily variables and
/// the index replicated over the grid, keyed by variable name.
pub fn weekly_variables(
    daily: &BTreeMap<String, GriddedSeries>,
    index: &IndexSeries,
    target: &str,
) -> Result<BTreeMap<String, GriddedSeries>> {
    let target_daily = daily.get(target).ok_or_else(|| Error::Lookup { kind: "variable", name: target.to_string() })?;
    let weekly_target = aggregate_weekly(target_daily, Aggregation::Max)?;
    let weeks: Vec<_> = (0..weekly_target.steps()).map(|t| weekly_target.calendar.week(t)).collect();
    let broadcast = broadcast_index(&index.name, &index.weekly_values(&weeks), &weekly_target.grid, weekly_target.calendar)?;
    let mut out = BTreeMap::new();
    for (name, s) in daily {
        if name != target {
            out.insert(name.clone(), aggregate_weekly(s, Aggregation::Mean)?);
        }
    }
    out.insert(index.name.clone(), broadcast);
    out.insert(target.to_string(), weekly_target);
    Ok(out)
}

/// The target, past-only covariates (every other non-index variable, by
/// name) and known inputs: the index, then the climatology quantiles when
/// given.
pub fn sample_inputs(
    weekly: &BTreeMap<String, GriddedSeries>,
    target: &str,
    index_name: &str,
    climatology: Option<&ClimatologyTable>,
) -> Result<SampleInputs> {
    let lookup = |name: &str| weekly.get(name).cloned().ok_or_else(|| Error::Lookup { kind: "variable", name: name.to_string() });
    let target_series = lookup(target)?;
    let observed = weekly
        .iter()
        .filter(|(name, _)| *name != target && *name != index_name)
        .map(|(_, s)| s.clone())
        .collect();
    let mut known = vec![lookup(index_name)?];
    if let Some(table) = climatology {
        if table.op != ClimatologyOp::Quantiles {
            return Err(Error::config("data.climatology_inputs", format!("needs a quantile climatology, got op={}", table.op)));
        }
        for (c, &q) in TARGET_QUANTILES.iter().enumerate() {
            known.push(table.field(c, &quantile_variable(q), target_series.calendar)?);
        }
    }
    let inputs = SampleInputs { target: target_series, observed, known };
    inputs.check_aligned()?;
    Ok(inputs)
}

/// Standardizes on the training years, assembles windows and splits them.
pub fn prepare_samples(inputs: SampleInputs, window: WindowConfig, split: &DatasetSplit) -> Result<Prepared> {
    split.validate()?;
    let standardization = Standardization::fit(&inputs, split.train)?;
    let (all, skipped) = assemble_samples(&inputs, window, &standardization)?;
    if skipped.skipped > 0 {
        log::info!("skipped {} windows touching missing values", skipped.skipped);
    }
    let samples = split_samples(all, split);
    log::info!(
        "samples: {} train, {} validation, {} test",
        samples.train.len(),
        samples.validation.len(),
        samples.test.len()
    );
    Ok(Prepared { inputs, standardization, samples, skipped })
}

/// All stages at once, with the climatology taken over the training years.
pub fn prepare(daily: &BTreeMap<String, GriddedSeries>, index: &IndexSeries, config: &PipelineConfig) -> Result<(Prepared, ClimatologyTable)> {
    let weekly = weekly_variables(daily, index, &config.target)?;
    let climatology = climatology_from_weekly(&weekly[&config.target], Aggregation::Max, ClimatologyOp::Quantiles, config.split.train)?;
    let inputs = sample_inputs(&weekly, &config.target, &index.name, config.climatology_inputs.then_some(&climatology))?;
    Ok((prepare_samples(inputs, config.window, &config.split)?, climatology))
}
