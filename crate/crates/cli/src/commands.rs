//! The pipeline stages behind each subcommand. Every stage reads its inputs
//! from the configuration or from earlier stages' artifacts under `out`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use sqf_core::baselines::{
    climatology_from_weekly, ensemble_quantiles, nn_regrid, read_climatology, write_climatology, ClimatologyOp,
    ClimatologyTable, EnsembleForecast,
};
use sqf_core::data::io::{load_all_gridded, load_index, save_gridded, save_index};
use sqf_core::data::synthetic::{generate_ensemble, generate_synthetic};
use sqf_core::data::{
    aggregate_weekly, partition_subregions, Aggregation, Cadence, Grid, GriddedSeries, IndexSeries, SampleWindow, Tile,
    WeekIndex,
};
use sqf_core::evaluation::{
    climatology_forecasts, compare_models, difference_grid, ensemble_forecasts, export_series, read_forecasts, read_report,
    write_difference_table, write_forecasts, write_report, write_series, LeadFilter, QRiskReport,
};
use sqf_core::keyvalue::KeyValues;
use sqf_core::model::{checkpoint, predict, QuantileForecast, TftConfig, TftWeights};
use sqf_core::pipeline::{prepare_samples, sample_inputs, weekly_variables, Prepared};
use sqf_core::training::{fit, random_search, write_trial_log, TrainConfig, TrialConfig};
use sqf_core::{Error, Result};

use crate::config::{DataSource, ExperimentConfig};

/// Model names accepted by `evaluate`, `compare` and `export`.
pub const MODELS: [&str; 3] = ["tft", "climo", "ens"];

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T> {
    r.map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    io(path, fs::create_dir_all(path))
}

/// Writes through a buffered file, creating parent directories.
fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    let mut w = BufWriter::new(io(path, File::create(path))?);
    io(path, body(&mut w).and_then(|_| w.flush()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(io(path, File::open(path))?))
}

fn check_model(name: &str) -> Result<()> {
    if MODELS.contains(&name) {
        Ok(())
    } else {
        Err(Error::config("--model", format!("unknown model `{name}`; expected one of {}", MODELS.join(", "))))
    }
}

fn lead_label(filter: LeadFilter) -> String {
    filter.to_string()
}

struct Paths {
    daily: PathBuf,
    index: PathBuf,
    ensemble: Option<(PathBuf, Cadence)>,
}

fn data_paths(cfg: &ExperimentConfig) -> Paths {
    match &cfg.source {
        DataSource::Synthetic { .. } => {
            let dir = cfg.out.join("data");
            Paths { daily: dir.join("daily.csv"), index: dir.join("index.csv"), ensemble: Some((dir.join("ensemble.csv"), Cadence::Weekly)) }
        }
        DataSource::Files { daily, index, ensemble, ensemble_cadence, .. } => Paths {
            daily: daily.clone(),
            index: index.clone(),
            ensemble: ensemble.clone().map(|p| (p, *ensemble_cadence)),
        },
    }
}

/// Synthetic daily fields, index and ensemble into `out/data`.
pub fn generate(cfg: &ExperimentConfig) -> Result<()> {
    let DataSource::Synthetic { config, seed } = &cfg.source else {
        return Err(Error::config("data.source", "`generate` needs a synthetic configuration"));
    };
    let seed = seed.unwrap_or(cfg.seed);
    let ds = generate_synthetic(config, seed)?;
    let paths = data_paths(cfg);
    create_dir(&cfg.out.join("data"))?;
    let daily: Vec<&GriddedSeries> = ds.daily.values().collect();
    save_gridded(&paths.daily, &daily)?;
    save_index(&paths.index, &ds.index)?;
    // ensemble initialized from the test years onward, stored as weekly maxima
    let years = sqf_core::data::YearRange::new(cfg.split.test.start, config.year_end);
    let ensemble = generate_ensemble(config, &ds.index.values, years, seed)?;
    let weekly = ensemble.members().iter().map(|m| aggregate_weekly(m, Aggregation::Max)).collect::<Result<Vec<_>>>()?;
    let (path, _) = paths.ensemble.expect("synthetic source has an ensemble");
    save_gridded(&path, &weekly.iter().collect::<Vec<_>>())?;
    log::info!("generated {} daily variables, {} ensemble members", daily.len(), weekly.len());
    Ok(())
}

/// Loaded daily fields and index.
pub struct Dataset {
    pub daily: BTreeMap<String, GriddedSeries>,
    pub index: IndexSeries,
}

impl Dataset {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let paths = data_paths(cfg);
        if matches!(cfg.source, DataSource::Synthetic { .. }) && !paths.daily.exists() {
            return Err(Error::io(&paths.daily, std::io::Error::new(std::io::ErrorKind::NotFound, "run `generate` first")));
        }
        let daily = load_all_gridded(&paths.daily, Cadence::Daily)?;
        let index = load_index(&paths.index, &cfg.index_name)?;
        Ok(Self { daily, index })
    }

    pub fn grid(&self, cfg: &ExperimentConfig) -> Result<&Grid> {
        self.daily
            .get(&cfg.target)
            .map(|s| &s.grid)
            .ok_or_else(|| Error::Lookup { kind: "variable", name: cfg.target.clone() })
    }
}

/// Weekly variables, prepared samples and the sub-region tiles.
pub struct Experiment {
    pub weekly: BTreeMap<String, GriddedSeries>,
    pub prepared: Prepared,
    pub tiles: Vec<Tile>,
}

impl Experiment {
    pub fn build(cfg: &ExperimentConfig, data: &Dataset) -> Result<Self> {
        let weekly = weekly_variables(&data.daily, &data.index, &cfg.target)?;
        let climatology = if cfg.climatology_inputs {
            Some(climatology_from_weekly(&weekly[&cfg.target], Aggregation::Max, ClimatologyOp::Quantiles, cfg.split.train)?)
        } else {
            None
        };
        let inputs = sample_inputs(&weekly, &cfg.target, &cfg.index_name, climatology.as_ref())?;
        let prepared = prepare_samples(inputs, cfg.window, &cfg.split)?;
        let grid = &weekly[&cfg.target].grid;
        let points: Vec<_> = grid.locations().map(|l| l.key()).collect();
        let tiles = partition_subregions(&points, cfg.subregion_sizes.0, cfg.subregion_sizes.1);
        Ok(Self { weekly, prepared, tiles })
    }

    pub fn target(&self, cfg: &ExperimentConfig) -> &GriddedSeries {
        &self.weekly[&cfg.target]
    }

    /// `(train, validation, test)` samples inside tile `t`.
    pub fn tile_samples(&self, t: usize) -> (Vec<SampleWindow>, Vec<SampleWindow>, Vec<SampleWindow>) {
        let tile = &self.tiles[t];
        let pick = |v: &[SampleWindow]| v.iter().filter(|s| tile.contains(s.location.key())).cloned().collect();
        let s = &self.prepared.samples;
        (pick(&s.train), pick(&s.validation), pick(&s.test))
    }

    pub fn model_config(&self, cfg: &ExperimentConfig, hidden: usize, heads: usize, dropout: f64) -> TftConfig {
        let grid = &self.prepared.inputs.target.grid;
        TftConfig {
            hidden,
            heads,
            dropout,
            encoder_steps: cfg.window.encoder_steps,
            decoder_steps: cfg.window.decoder_steps,
            quantiles: cfg.model.quantiles.clone(),
            sort_quantiles: cfg.model.sort_quantiles,
            ..TftConfig::new(grid.nlat(), grid.nlon(), self.prepared.inputs.historical_count(), self.prepared.inputs.known_count())
        }
    }

    /// Issue weeks of the test samples with their locations, in a fixed order.
    pub fn test_issues(&self) -> Vec<(sqf_core::data::Location, WeekIndex)> {
        let mut v: Vec<_> = self.prepared.samples.test.iter().map(|s| (s.location, s.issue)).collect();
        v.sort_by_key(|(l, w)| (l.key(), *w));
        v
    }
}

/// Weekly variables and a summary of the sample split.
pub fn ingest(cfg: &ExperimentConfig) -> Result<()> {
    let data = Dataset::load(cfg)?;
    let exp = Experiment::build(cfg, &data)?;
    let dir = cfg.out.join("ingest");
    create_dir(&dir)?;
    save_gridded(&dir.join("weekly.csv"), &exp.weekly.values().collect::<Vec<_>>())?;
    let s = &exp.prepared.samples;
    let target = exp.target(cfg);
    write_file(&dir.join("summary.txt"), |w| {
        writeln!(w, "grid = {}x{}", target.grid.nlat(), target.grid.nlon())?;
        writeln!(w, "weeks = {}", target.steps())?;
        writeln!(w, "historical_inputs = {}", exp.prepared.inputs.historical_count())?;
        writeln!(w, "known_inputs = {}", exp.prepared.inputs.known_count())?;
        writeln!(w, "train_samples = {}", s.train.len())?;
        writeln!(w, "validation_samples = {}", s.validation.len())?;
        writeln!(w, "test_samples = {}", s.test.len())?;
        writeln!(w, "unassigned_samples = {}", s.unassigned.len())?;
        writeln!(w, "skipped_windows = {}", exp.prepared.skipped.skipped)?;
        writeln!(w, "subregions = {}", exp.tiles.len())
    })
}

fn climatology_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.join("climatology").join("climatology.csv")
}

fn compute_table(cfg: &ExperimentConfig, target: &GriddedSeries) -> Result<ClimatologyTable> {
    climatology_from_weekly(target, Aggregation::Max, cfg.eval.climatology_op, cfg.eval.climatology_years)
}

/// Week-of-year climatology of the weekly target.
pub fn climatology(cfg: &ExperimentConfig) -> Result<()> {
    let data = Dataset::load(cfg)?;
    let target = aggregate_weekly(&data.daily[&cfg.target], Aggregation::Max)?;
    let table = compute_table(cfg, &target)?;
    write_file(&climatology_path(cfg), |w| write_climatology(w, &table))
}

fn search_dir(cfg: &ExperimentConfig, tile: Option<usize>) -> PathBuf {
    let dir = cfg.out.join("search");
    match tile {
        Some(t) => dir.join(format!("tile{t}")),
        None => dir,
    }
}

fn every_nth(v: Vec<SampleWindow>, n: usize) -> Vec<SampleWindow> {
    v.into_iter().step_by(n).collect()
}

fn write_best(path: &Path, t: &TrialConfig) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "model.hidden = {}", t.hidden)?;
        writeln!(w, "model.heads = {}", t.heads)?;
        writeln!(w, "model.dropout = {}", t.dropout)?;
        writeln!(w, "train.batch_size = {}", t.batch_size)?;
        writeln!(w, "train.learning_rate = {}", t.learning_rate)?;
        writeln!(w, "train.max_grad_norm = {}", t.max_grad_norm)
    })
}

fn read_best(path: &Path) -> Result<TrialConfig> {
    let text = io(path, fs::read_to_string(path))?;
    let kv = KeyValues::parse(&text)?;
    let need = |key: &str| Error::config(key, format!("missing from {}", path.display()));
    let t = TrialConfig {
        hidden: kv.get("model.hidden")?.ok_or_else(|| need("model.hidden"))?,
        heads: kv.get("model.heads")?.ok_or_else(|| need("model.heads"))?,
        dropout: kv.get("model.dropout")?.ok_or_else(|| need("model.dropout"))?,
        batch_size: kv.get("train.batch_size")?.ok_or_else(|| need("train.batch_size"))?,
        learning_rate: kv.get("train.learning_rate")?.ok_or_else(|| need("train.learning_rate"))?,
        max_grad_norm: kv.get("train.max_grad_norm")?.ok_or_else(|| need("train.max_grad_norm"))?,
    };
    kv.reject_unknown()?;
    Ok(t)
}

/// Random search over the configured space, on one designated sub-region or
/// on each sub-region in turn.
pub fn search(cfg: &ExperimentConfig) -> Result<()> {
    let data = Dataset::load(cfg)?;
    let exp = Experiment::build(cfg, &data)?;
    let tiles: Vec<Option<usize>> = if cfg.search.per_subregion {
        (0..exp.tiles.len()).map(Some).collect()
    } else {
        if cfg.search.subregion >= exp.tiles.len() {
            return Err(Error::config(
                "search.subregion",
                format!("sub-region {} does not exist ({} sub-regions)", cfg.search.subregion, exp.tiles.len()),
            ));
        }
        vec![None]
    };
    let base = TrainConfig {
        max_epochs: cfg.search.max_epochs,
        patience: cfg.search.patience,
        ..cfg.train.clone()
    };
    for tile in tiles {
        let t = tile.unwrap_or(cfg.search.subregion);
        let (train, val, _) = exp.tile_samples(t);
        let (train, val) = (every_nth(train, cfg.search.sample_stride), every_nth(val, cfg.search.sample_stride));
        log::info!("searching sub-region {t}: {} iterations on {} train / {} validation samples", cfg.search.iterations, train.len(), val.len());
        let build = |trial: &TrialConfig, seed: u64| TftWeights::init(&exp.model_config(cfg, trial.hidden, trial.heads, trial.dropout), seed);
        let seed = cfg.seed.wrapping_add(t as u64);
        let outcome = random_search(&cfg.search.space, cfg.search.iterations, &base, &train, &val, seed, build)?;
        let dir = search_dir(cfg, tile);
        write_file(&dir.join("trials.jsonl"), |w| write_trial_log(w, &outcome.trials))?;
        write_best(&dir.join("best.conf"), &outcome.best)?;
        log::info!(
            "best trial {} (validation loss {:.6}): {:?}",
            outcome.best_trial,
            outcome.fit.best_val_loss,
            outcome.best
        );
    }
    Ok(())
}

fn models_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.join("models")
}

fn hyperparameters(cfg: &ExperimentConfig, tile: usize) -> Result<TrialConfig> {
    if cfg.train_from_search {
        let dir = search_dir(cfg, cfg.search.per_subregion.then_some(tile));
        return read_best(&dir.join("best.conf"));
    }
    Ok(TrialConfig {
        hidden: cfg.model.hidden,
        heads: cfg.model.heads,
        dropout: cfg.model.dropout,
        batch_size: cfg.train.batch_size,
        learning_rate: cfg.train.learning_rate,
        max_grad_norm: cfg.train.max_grad_norm,
    })
}

struct TileFit {
    best_epoch: usize,
    best_val_loss: f64,
    epochs: usize,
}

/// One model per sub-region, trained in parallel; seeds are offset by the
/// tile number.
pub fn train(cfg: &ExperimentConfig) -> Result<()> {
    let data = Dataset::load(cfg)?;
    let exp = Experiment::build(cfg, &data)?;
    let dir = models_dir(cfg);
    create_dir(&dir)?;
    let fits: Vec<TileFit> = (0..exp.tiles.len())
        .into_par_iter()
        .map(|t| -> Result<TileFit> {
            let h = hyperparameters(cfg, t)?;
            let seed = cfg.seed.wrapping_add(t as u64);
            let weights = TftWeights::init(&exp.model_config(cfg, h.hidden, h.heads, h.dropout), seed)?;
            let (train, val, _) = exp.tile_samples(t);
            log::info!("training sub-region {t} on {} samples ({} validation)", train.len(), val.len());
            let result = fit(weights, &train, &val, &h.train_config(&cfg.train, seed))?;
            checkpoint::save(&dir.join(format!("tile{t}")), &result.model)?;
            write_file(&dir.join(format!("tile{t}_history.csv")), |w| {
                writeln!(w, "epoch,train_loss,val_loss")?;
                for r in &result.history {
                    writeln!(w, "{},{},{}", r.epoch, r.train_loss, r.val_loss)?;
                }
                Ok(())
            })?;
            log::info!("sub-region {t}: best epoch {} of {}, validation loss {:.6}", result.best_epoch, result.history.len(), result.best_val_loss);
            Ok(TileFit { best_epoch: result.best_epoch, best_val_loss: result.best_val_loss, epochs: result.history.len() })
        })
        .collect::<Result<_>>()?;
    write_file(&dir.join("tiles.csv"), |w| {
        writeln!(w, "tile,lat_first,lat_last,lon_first,lon_last,points,epochs,best_epoch,best_val_loss")?;
        for (t, (tile, f)) in exp.tiles.iter().zip(&fits).enumerate() {
            writeln!(
                w,
                "{t},{},{},{},{},{},{},{},{}",
                tile.rows.0, tile.rows.1, tile.cols.0, tile.cols.1, tile.len(), f.epochs, f.best_epoch, f.best_val_loss
            )?;
        }
        Ok(())
    })
}

fn tft_forecasts(cfg: &ExperimentConfig, exp: &Experiment) -> Result<Vec<QuantileForecast>> {
    let dir = models_dir(cfg);
    let mut all = Vec::new();
    for t in 0..exp.tiles.len() {
        let weights = checkpoint::load(&dir.join(format!("tile{t}")))?;
        let (_, _, test) = exp.tile_samples(t);
        all.extend(predict(&weights, &test)?);
    }
    Ok(all)
}

fn load_climatology(cfg: &ExperimentConfig, target: &GriddedSeries) -> Result<ClimatologyTable> {
    let path = climatology_path(cfg);
    if path.exists() {
        read_climatology(open(&path)?, Aggregation::Max, cfg.eval.climatology_years)
    } else {
        log::info!("{} not found; computing the climatology", path.display());
        compute_table(cfg, target)
    }
}

fn ensemble_lead(cfg: &ExperimentConfig) -> Result<usize> {
    let lead = cfg.ensemble_lead();
    match cfg.eval.lead {
        LeadFilter::Lead(l) if l == lead => Ok(lead),
        other => Err(Error::config("eval.lead", format!("the ensemble only forecasts lead {lead}, not `{other}`"))),
    }
}

fn load_ensemble(cfg: &ExperimentConfig, grid: &Grid) -> Result<EnsembleForecast> {
    let Some((path, cadence)) = data_paths(cfg).ensemble else {
        return Err(Error::config("data.ensemble", "no ensemble file configured"));
    };
    let members = load_all_gridded(&path, cadence)?;
    let regridded = members.values().map(|m| nn_regrid(m, grid)).collect::<Result<Vec<_>>>()?;
    EnsembleForecast::new(regridded)
}

fn forecasts_path(cfg: &ExperimentConfig, model: &str) -> PathBuf {
    cfg.out.join("eval").join(format!("forecasts_{model}.csv"))
}

fn report_path(cfg: &ExperimentConfig, model: &str, filter: LeadFilter) -> PathBuf {
    cfg.out.join("eval").join(format!("qrisk_{model}_lead{}.csv", lead_label(filter)))
}

/// Forecasts of `model` for every test issue.
pub fn model_forecasts(cfg: &ExperimentConfig, exp: &Experiment, model: &str) -> Result<Vec<QuantileForecast>> {
    check_model(model)?;
    let target = exp.target(cfg);
    let issues = exp.test_issues();
    let mut forecasts = match model {
        "tft" => tft_forecasts(cfg, exp)?,
        "climo" => {
            let leads: Vec<usize> = (1..=cfg.window.decoder_steps).collect();
            climatology_forecasts(&load_climatology(cfg, target)?, &issues, &leads)?
        }
        _ => {
            let lead = ensemble_lead(cfg)?;
            let quantiles = ensemble_quantiles(&load_ensemble(cfg, &target.grid)?, Aggregation::Max, &cfg.model.quantiles)?;
            ensemble_forecasts(&quantiles, &issues, lead)?
        }
    };
    forecasts.sort_by_key(|f| (f.location.key(), f.issue));
    Ok(forecasts)
}

/// Forecasts and the per-location q-risk report of one model.
pub fn evaluate(cfg: &ExperimentConfig, model: &str) -> Result<QRiskReport> {
    check_model(model)?;
    let data = Dataset::load(cfg)?;
    let exp = Experiment::build(cfg, &data)?;
    let forecasts = model_forecasts(cfg, &exp, model)?;
    write_file(&forecasts_path(cfg, model), |w| write_forecasts(w, &forecasts))?;
    let report = QRiskReport::build(model, exp.target(cfg), &forecasts, &cfg.eval.quantiles, cfg.eval.lead)?;
    write_file(&report_path(cfg, model, cfg.eval.lead), |w| write_report(w, &report))?;
    for (q, v) in report.quantiles.iter().zip(&report.regional) {
        log::info!("{model} q-risk at quantile {q}, lead {}: {v:.6}", cfg.eval.lead);
    }
    Ok(report)
}

fn split_models(list: &str) -> Result<Vec<String>> {
    let v: Vec<String> = list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if v.is_empty() {
        return Err(Error::config("--model", "empty model list"));
    }
    for m in &v {
        check_model(m)?;
    }
    Ok(v)
}

/// Regional differences of each baseline against the candidate, plus
/// per-location difference grids.
pub fn compare(cfg: &ExperimentConfig, baselines: &str, candidate: &str) -> Result<Vec<sqf_core::evaluation::Comparison>> {
    let baselines = split_models(baselines)?;
    check_model(candidate)?;
    let data = Dataset::load(cfg)?;
    let grid = data.grid(cfg)?;
    let read = |m: &str| -> Result<QRiskReport> {
        let report = read_report(open(&report_path(cfg, m, cfg.eval.lead))?, grid)?;
        let keep: Vec<usize> = cfg
            .eval
            .quantiles
            .iter()
            .map(|q| {
                report
                    .quantiles
                    .iter()
                    .position(|x| (x - q).abs() < 1e-12)
                    .ok_or_else(|| Error::Alignment(format!("report for {m} lacks quantile {q}")))
            })
            .collect::<Result<_>>()?;
        let pick = |row: &[f64]| keep.iter().map(|&i| row[i]).collect::<Vec<_>>();
        Ok(QRiskReport {
            quantiles: cfg.eval.quantiles.clone(),
            values: report.values.iter().map(|r| pick(r)).collect(),
            regional: pick(&report.regional),
            ..report
        })
    };
    let cand = read(candidate)?;
    let mut comparisons = Vec::new();
    for b in &baselines {
        comparisons.push(compare_models(&cfg.region, &read(b)?, &cand)?);
    }
    let label = lead_label(cfg.eval.lead);
    let dir = cfg.out.join("compare");
    write_file(&dir.join(format!("table_lead{label}.csv")), |w| write_difference_table(w, &comparisons))?;
    let week = WeekIndex::new(cfg.split.test.start, 1)?;
    for c in &comparisons {
        let grids = difference_grid(c, grid, week)?;
        create_dir(&dir)?;
        save_gridded(&dir.join(format!("diff_{}_vs_{}_lead{label}.csv", c.baseline, c.candidate)), &grids.iter().collect::<Vec<_>>())?;
    }
    Ok(comparisons)
}

/// Forecast and target series at one location for plotting.
pub fn export(cfg: &ExperimentConfig, models: &str) -> Result<()> {
    let models = split_models(models)?;
    let LeadFilter::Lead(lead) = cfg.eval.lead else {
        return Err(Error::config("eval.lead", "export needs a single lead"));
    };
    let data = Dataset::load(cfg)?;
    let target = aggregate_weekly(&data.daily[&cfg.target], Aggregation::Max)?;
    let location = match cfg.eval.export_location {
        Some((lat, lon)) => target
            .grid
            .find(lat, lon)
            .ok_or_else(|| Error::Lookup { kind: "location", name: format!("({lat}, {lon})") })?,
        None => target.grid.location(0, 0),
    };
    let first = cfg.eval.export_start.unwrap_or(WeekIndex::new(cfg.split.test.start, 1)?);
    let last = cfg.eval.export_end.unwrap_or(WeekIndex::new(cfg.split.test.end, 53)?);
    for m in &models {
        let forecasts = read_forecasts(open(&forecasts_path(cfg, m))?, &target.grid)?;
        let table = export_series(m, location.key(), &forecasts, &target, lead, first, last)?;
        let path = cfg.out.join("export").join(format!("series_{m}_lead{lead}.csv"));
        write_file(&path, |w| write_series(w, &table))?;
    }
    Ok(())
}
