//! Experiment configuration: flat `key = value` text with section prefixes.

use std::path::{Path, PathBuf};

use sqf_core::baselines::ClimatologyOp;
use sqf_core::data::io::Cadence;
use sqf_core::data::{DatasetSplit, SyntheticConfig, WeekIndex, WindowConfig, YearRange};
use sqf_core::evaluation::LeadFilter;
use sqf_core::keyvalue::KeyValues;
use sqf_core::training::{SearchSpace, TrainConfig};
use sqf_core::{Error, Result};

const SYNTHETIC_PREFIX: &str = "data.synthetic.";

/// Where the daily fields come from.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    /// Generated by `generate` into the output directory.
    Synthetic {
        config: SyntheticConfig,
        /// Set when `data.synthetic.seed` is given; otherwise the run seed.
        seed: Option<u64>,
    },
    Files {
        daily: PathBuf,
        index: PathBuf,
        ensemble: Option<PathBuf>,
        ensemble_cadence: Cadence,
        /// Weeks between ensemble initialization and validity.
        ensemble_lead: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSettings {
    pub hidden: usize,
    pub heads: usize,
    pub dropout: f64,
    pub quantiles: Vec<f64>,
    pub sort_quantiles: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchSettings {
    pub space: SearchSpace,
    pub iterations: usize,
    pub max_epochs: usize,
    pub patience: usize,
    /// Keep every n-th training and validation sample during the search.
    pub sample_stride: usize,
    pub per_subregion: bool,
    /// Tile searched when the search is shared.
    pub subregion: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSettings {
    pub lead: LeadFilter,
    pub quantiles: Vec<f64>,
    pub climatology_op: ClimatologyOp,
    pub climatology_years: YearRange,
    pub export_location: Option<(f64, f64)>,
    pub export_start: Option<WeekIndex>,
    pub export_end: Option<WeekIndex>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub target: String,
    pub index_name: String,
    pub region: String,
    pub split: DatasetSplit,
    pub window: WindowConfig,
    pub climatology_inputs: bool,
    pub subregion_sizes: (usize, usize),
    pub model: ModelSettings,
    pub train: TrainConfig,
    pub train_from_search: bool,
    pub search: SearchSettings,
    pub eval: EvalSettings,
    pub out: PathBuf,
    pub seed: u64,
}

fn bad<T>(field: &str, message: impl Into<String>) -> Result<T> {
    Err(Error::config(field, message))
}

fn list_or<T: std::str::FromStr>(kv: &KeyValues, key: &str, default: Vec<T>) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    Ok(kv.list(key)?.unwrap_or(default))
}

impl ExperimentConfig {
    /// Parses and validates; unknown keys are errors. File paths are checked
    /// relative to `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        let c = Self::from_keys(&kv, base)?;
        kv.reject_unknown()?;
        c.validate()?;
        Ok(c)
    }

    fn from_keys(kv: &KeyValues, base: &Path) -> Result<Self> {
        let seed = kv.get_or("seed", 0u64)?;
        let has_synthetic = kv.keys().any(|k| k.starts_with(SYNTHETIC_PREFIX));
        let has_files = kv.contains("data.daily");
        let source = match kv.get::<String>("data.source")?.as_deref() {
            Some("synthetic") => "synthetic",
            Some("files") => "files",
            Some(other) => return bad("data.source", format!("expected `synthetic` or `files`, got `{other}`")),
            None if has_synthetic && has_files => {
                return bad("data.daily", "give either data files or a synthetic configuration, not both")
            }
            None if has_synthetic => "synthetic",
            None if has_files => "files",
            None => return bad("data.source", "no data files (data.daily) and no synthetic configuration (data.synthetic.*)"),
        };
        let path = |key: &str| -> Result<Option<PathBuf>> { Ok(kv.get::<String>(key)?.map(|p| base.join(p))) };
        let source = if source == "synthetic" {
            if has_files {
                return bad("data.daily", "data files given for a synthetic source");
            }
            let synthetic_seed = kv.get(&format!("{SYNTHETIC_PREFIX}seed"))?;
            DataSource::Synthetic { config: SyntheticConfig::from_keys(kv, SYNTHETIC_PREFIX)?, seed: synthetic_seed }
        } else {
            if has_synthetic {
                return bad("data.synthetic", "synthetic keys given for a file source");
            }
            let cadence = match kv.get_or("data.ensemble_cadence", "weekly".to_string())?.as_str() {
                "daily" => Cadence::Daily,
                "weekly" => Cadence::Weekly,
                other => return bad("data.ensemble_cadence", format!("expected `daily` or `weekly`, got `{other}`")),
            };
            DataSource::Files {
                daily: path("data.daily")?.ok_or_else(|| Error::config("data.daily", "required for a file source"))?,
                index: path("data.index")?.ok_or_else(|| Error::config("data.index", "required for a file source"))?,
                ensemble: path("data.ensemble")?,
                ensemble_cadence: cadence,
                ensemble_lead: kv.get_or("data.ensemble_lead", 26)?,
            }
        };

        let d = DatasetSplit::default();
        let split = DatasetSplit {
            train: kv.get_or("data.train_years", d.train)?,
            validation: kv.get_or("data.validation_years", d.validation)?,
            test: kv.get_or("data.test_years", d.test)?,
            strict: kv.get_or("data.strict_split", false)?,
        };
        let window = WindowConfig {
            encoder_steps: kv.get_or("data.encoder_steps", 26)?,
            decoder_steps: kv.get_or("data.decoder_steps", 26)?,
            issue_stride: kv.get_or("data.issue_stride", 1)?,
        };

        let model = ModelSettings {
            hidden: kv.get_or("model.hidden", 16)?,
            heads: kv.get_or("model.heads", 2)?,
            dropout: kv.get_or("model.dropout", 0.1)?,
            quantiles: list_or(kv, "model.quantiles", vec![0.1, 0.5, 0.9])?,
            sort_quantiles: kv.get_or("model.sort_quantiles", false)?,
        };
        let td = TrainConfig::default();
        let train = TrainConfig {
            learning_rate: kv.get_or("train.learning_rate", td.learning_rate)?,
            batch_size: kv.get_or("train.batch_size", td.batch_size)?,
            max_epochs: kv.get_or("train.max_epochs", td.max_epochs)?,
            patience: kv.get_or("train.patience", td.patience)?,
            max_grad_norm: kv.get_or("train.max_grad_norm", td.max_grad_norm)?,
            seed,
        };
        let sd = SearchSpace::default();
        let search = SearchSettings {
            space: SearchSpace {
                hidden: list_or(kv, "search.hidden", sd.hidden)?,
                dropout: list_or(kv, "search.dropout", sd.dropout)?,
                batch_size: list_or(kv, "search.batch_size", sd.batch_size)?,
                learning_rate: list_or(kv, "search.learning_rate", sd.learning_rate)?,
                max_grad_norm: list_or(kv, "search.max_grad_norm", sd.max_grad_norm)?,
                heads: list_or(kv, "search.heads", sd.heads)?,
            },
            iterations: kv.get_or("search.iterations", 60)?,
            max_epochs: kv.get_or("search.max_epochs", train.max_epochs)?,
            patience: kv.get_or("search.patience", train.patience)?,
            sample_stride: kv.get_or("search.sample_stride", 1)?,
            per_subregion: kv.get_or("search.per_subregion", false)?,
            subregion: kv.get_or("search.subregion", 0)?,
        };
        let eval_quantiles = match kv.raw("eval.quantiles") {
            None | Some("all") => model.quantiles.clone(),
            Some(_) => list_or(kv, "eval.quantiles", vec![])?,
        };
        let export_location = match (kv.get::<f64>("eval.export_lat")?, kv.get::<f64>("eval.export_lon")?) {
            (Some(lat), Some(lon)) => Some((lat, lon)),
            (None, None) => None,
            _ => return bad("eval.export_lat", "give both eval.export_lat and eval.export_lon"),
        };
        let eval = EvalSettings {
            lead: kv.get_or("eval.lead", LeadFilter::Lead(window.decoder_steps))?,
            quantiles: eval_quantiles,
            climatology_op: kv.get_or("eval.climatology_op", ClimatologyOp::Quantiles)?,
            climatology_years: kv.get_or("eval.climatology_years", split.train)?,
            export_location,
            export_start: kv.get("eval.export_start")?,
            export_end: kv.get("eval.export_end")?,
        };

        Ok(Self {
            source,
            target: kv.get_or("data.target", sqf_core::data::synthetic::PRECIP.to_string())?,
            index_name: kv.get_or("data.index_name", sqf_core::data::synthetic::INDEX.to_string())?,
            region: kv.get_or("data.region", "region".to_string())?,
            split,
            window,
            climatology_inputs: kv.get_or("data.climatology_inputs", true)?,
            subregion_sizes: (kv.get_or("data.subregion_min", 20)?, kv.get_or("data.subregion_max", 45)?),
            model,
            train,
            train_from_search: kv.get_or("train.from_search", false)?,
            search,
            eval,
            out: kv.get_or("out", PathBuf::from("out"))?,
            seed,
        })
    }

    /// Cross-field checks.
    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        if self.window.encoder_steps == 0 || self.window.decoder_steps == 0 {
            return bad("data.decoder_steps", "encoder and decoder steps must be positive");
        }
        if self.window.issue_stride == 0 {
            return bad("data.issue_stride", "must be positive");
        }
        let (lo, hi) = self.subregion_sizes;
        if lo == 0 || lo > hi {
            return bad("data.subregion_min", format!("size range {lo}..{hi} is empty"));
        }
        let q = &self.model.quantiles;
        if q.is_empty() || q.windows(2).any(|w| w[0] >= w[1]) || q.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return bad("model.quantiles", "must be ascending levels inside (0, 1)");
        }
        if q.iter().any(|&x| ((x * 100.0).round() - x * 100.0).abs() > 1e-9) {
            return bad("model.quantiles", "levels must be whole percentages");
        }
        if let Some(x) = self.eval.quantiles.iter().find(|x| !q.iter().any(|y| (*x - y).abs() < 1e-12)) {
            return bad("eval.quantiles", format!("{x} is not a model quantile"));
        }
        if let LeadFilter::Lead(l) = self.eval.lead {
            if l > self.window.decoder_steps {
                return bad("eval.lead", format!("lead {l} exceeds the {} forecast leads", self.window.decoder_steps));
            }
        }
        if self.model.hidden == 0 || self.model.heads == 0 || self.model.hidden % self.model.heads != 0 {
            return bad("model.heads", format!("{} heads do not divide hidden size {}", self.model.heads, self.model.hidden));
        }
        if !(0.0..1.0).contains(&self.model.dropout) {
            return bad("model.dropout", "must lie in [0, 1)");
        }
        self.train.validate()?;
        self.search.space.validate()?;
        if self.search.iterations == 0 {
            return bad("search.iterations", "must be at least 1");
        }
        if self.search.sample_stride == 0 {
            return bad("search.sample_stride", "must be positive");
        }
        TrainConfig { max_epochs: self.search.max_epochs, patience: self.search.patience, ..self.train.clone() }
            .validate()
            .map_err(|_| Error::config("search.patience", "search epochs and patience must satisfy 1 <= patience <= max_epochs"))?;
        match &self.source {
            DataSource::Synthetic { config, .. } => {
                config.validate(SYNTHETIC_PREFIX)?;
                let years = config.years();
                for (name, r) in [("train", self.split.train), ("validation", self.split.validation), ("test", self.split.test)] {
                    if r.start < years.start || r.end > years.end {
                        return bad(&format!("data.{name}_years"), format!("{r} outside the generated years {years}"));
                    }
                }
            }
            DataSource::Files { daily, index, ensemble, .. } => {
                for (key, p) in [("data.daily", Some(daily)), ("data.index", Some(index)), ("data.ensemble", ensemble.as_ref())] {
                    if let Some(p) = p {
                        if !p.exists() {
                            return bad(key, format!("{} does not exist", p.display()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Lead of the stored ensemble forecasts.
    pub fn ensemble_lead(&self) -> usize {
        match &self.source {
            DataSource::Synthetic { config, .. } => config.ensemble_lead,
            DataSource::Files { ensemble_lead, .. } => *ensemble_lead,
        }
    }

    /// Reads, parses and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Normalized configuration from a file; see [`ExperimentConfig::parse`].
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path)
}
