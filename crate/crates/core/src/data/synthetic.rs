//! Seeded synthetic stand-in for gridded reanalysis and ensemble archives.
//!
//! Daily precipitation at a cell is
//! `base · (1 + A·c(d)) · exp(κ · e(w) · wet(d)) · G`, where `c(d)` is the
//! annual cosine (peaking mid-January), `wet = (1 + c) / 2`, `e(w)` a weekly
//! AR(1) index with unit variance and `G` a unit-mean gamma factor with
//! variance `noise_scale²` (absent when the scale is 0).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::Datelike;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};

use crate::baselines::EnsembleForecast;
use crate::error::{Error, Result};
use crate::keyvalue::KeyValues;

use super::calendar::{Calendar, WeekIndex};
use super::grid::{Grid, GriddedSeries};
use super::io::IndexSeries;
use super::split::YearRange;

pub const PRECIP: &str = "precip";
pub const TEMPERATURE: &str = "t2m";
pub const SOIL_MOISTURE: &str = "swvl1";
pub const GEOPOTENTIAL: &str = "z500";
pub const INDEX: &str = "nino34";

/// Generator settings; see [`SyntheticConfig::KEYS`] for the file keys.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub grid_nlat: usize,
    pub grid_nlon: usize,
    pub lat0: f64,
    pub lon0: f64,
    pub spacing: f64,
    pub year_start: i32,
    pub year_end: i32,
    /// Relative amplitude of the annual cycle, in `[0, 1)`.
    pub seasonal_amp: f64,
    /// Log-intensity response of wet-season rain to one index unit.
    pub enso_coupling: f64,
    /// Standard deviation of the multiplicative daily noise.
    pub noise_scale: f64,
    /// Week-to-week autocorrelation of the index.
    pub enso_persistence: f64,
    pub seed: u64,
    pub ensemble_members: usize,
    /// Weeks between ensemble initialization and validity.
    pub ensemble_lead: usize,
    /// Damping of the index response in ensemble members.
    pub ensemble_bias: f64,
    /// Native grid spacing of the ensemble in degrees.
    pub ensemble_spacing: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            grid_nlat: 4,
            grid_nlon: 5,
            lat0: -23.0,
            lon0: -44.0,
            spacing: 0.25,
            year_start: 1981,
            year_end: 2019,
            seasonal_amp: 0.6,
            enso_coupling: 0.5,
            noise_scale: 0.5,
            enso_persistence: 0.97,
            seed: 7,
            ensemble_members: 50,
            ensemble_lead: 26,
            ensemble_bias: 0.8,
            ensemble_spacing: 0.4,
        }
    }
}

impl SyntheticConfig {
    pub const KEYS: [&'static str; 16] = [
        "grid_nlat",
        "grid_nlon",
        "lat0",
        "lon0",
        "spacing",
        "year_start",
        "year_end",
        "seasonal_amp",
        "enso_coupling",
        "noise_scale",
        "enso_persistence",
        "seed",
        "ensemble_members",
        "ensemble_lead",
        "ensemble_bias",
        "ensemble_spacing",
    ];

    /// Reads keys under `prefix` (e.g. `"data.synthetic."` or `""`), keeping
    /// defaults for absent ones.
    pub fn from_keys(kv: &KeyValues, prefix: &str) -> Result<Self> {
        let d = Self::default();
        let k = |name: &str| format!("{prefix}{name}");
        let c = Self {
            grid_nlat: kv.get_or(&k("grid_nlat"), d.grid_nlat)?,
            grid_nlon: kv.get_or(&k("grid_nlon"), d.grid_nlon)?,
            lat0: kv.get_or(&k("lat0"), d.lat0)?,
            lon0: kv.get_or(&k("lon0"), d.lon0)?,
            spacing: kv.get_or(&k("spacing"), d.spacing)?,
            year_start: kv.get_or(&k("year_start"), d.year_start)?,
            year_end: kv.get_or(&k("year_end"), d.year_end)?,
            seasonal_amp: kv.get_or(&k("seasonal_amp"), d.seasonal_amp)?,
            enso_coupling: kv.get_or(&k("enso_coupling"), d.enso_coupling)?,
            noise_scale: kv.get_or(&k("noise_scale"), d.noise_scale)?,
            enso_persistence: kv.get_or(&k("enso_persistence"), d.enso_persistence)?,
            seed: kv.get_or(&k("seed"), d.seed)?,
            ensemble_members: kv.get_or(&k("ensemble_members"), d.ensemble_members)?,
            ensemble_lead: kv.get_or(&k("ensemble_lead"), d.ensemble_lead)?,
            ensemble_bias: kv.get_or(&k("ensemble_bias"), d.ensemble_bias)?,
            ensemble_spacing: kv.get_or(&k("ensemble_spacing"), d.ensemble_spacing)?,
        };
        c.validate(prefix)?;
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        let c = Self::from_keys(&kv, "")?;
        kv.reject_unknown()?;
        Ok(c)
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let bad = |key: &str, msg: &str| Err(Error::config(format!("{prefix}{key}"), msg));
        if self.grid_nlat == 0 || self.grid_nlon == 0 {
            return bad("grid_nlat", "grid must have at least one cell");
        }
        if self.year_start > self.year_end {
            return bad("year_start", "must not exceed year_end");
        }
        if !(0.0..1.0).contains(&self.seasonal_amp) {
            return bad("seasonal_amp", "must lie in [0, 1)");
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return bad("noise_scale", "must be finite and nonnegative");
        }
        if !(0.0..1.0).contains(&self.enso_persistence) {
            return bad("enso_persistence", "must lie in [0, 1)");
        }
        if !(self.spacing > 0.0 && self.ensemble_spacing > 0.0) {
            return bad("spacing", "spacings must be positive");
        }
        if self.ensemble_members < 2 {
            return bad("ensemble_members", "at least 2 members required");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::regular(self.lat0, self.lon0, self.spacing, self.grid_nlat, self.grid_nlon)
    }

    /// Coarser grid anchored at the same origin and covering the target grid.
    pub fn ensemble_grid(&self) -> Result<Grid> {
        let span = |n: usize| ((n - 1) as f64 * self.spacing / self.ensemble_spacing).ceil() as usize + 1;
        Grid::regular(self.lat0, self.lon0, self.ensemble_spacing, span(self.grid_nlat), span(self.grid_nlon))
    }

    pub fn years(&self) -> YearRange {
        YearRange::new(self.year_start, self.year_end)
    }
}

/// Generated daily fields and the weekly index.
#[derive(Clone, Debug)]
pub struct SyntheticDataset {
    pub daily: BTreeMap<String, GriddedSeries>,
    pub index: IndexSeries,
}

// independent random streams per component
const STREAM_INDEX: u64 = 1;
const STREAM_PRECIP: u64 = 2;
const STREAM_FIELDS: u64 = 3;
const STREAM_ENSEMBLE: u64 = 4;
const STREAM_ADDITIVE: u64 = 5;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Annual cosine for day-of-year `doy`, peaking on day 15.
pub fn seasonal_phase(doy: u32) -> f64 {
    (2.0 * PI * (doy as f64 - 15.0) / 365.25).cos()
}

/// Smooth climatological intensity surface in mm/day (8 to 12).
fn base_intensity(lat: f64, lon: f64) -> f64 {
    10.0 + 1.2 * (1.3 * lat).sin() + 0.8 * (0.9 * lon).cos()
}

fn daily_mean(c: &SyntheticConfig, base: f64, doy: u32, index: f64) -> f64 {
    let phase = seasonal_phase(doy);
    let wet = 0.5 * (1.0 + phase);
    base * (1.0 + c.seasonal_amp * phase) * (c.enso_coupling * index * wet).exp()
}

/// Multiplicative unit-mean noise; 1 when the scale is 0.
struct Noise(Option<Gamma<f64>>);

impl Noise {
    fn new(scale: f64) -> Self {
        Self((scale > 0.0).then(|| Gamma::new(1.0 / (scale * scale), scale * scale).expect("positive gamma parameters")))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.0.as_ref().map_or(1.0, |g| g.sample(rng))
    }
}

/// Weekly AR(1) index with unit stationary variance over the weekly calendar.
pub fn enso_index(weeks: usize, persistence: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed, STREAM_INDEX);
    let innovation = (1.0 - persistence * persistence).sqrt();
    let mut e: f64 = r.sample(StandardNormal);
    let mut out = Vec::with_capacity(weeks);
    for _ in 0..weeks {
        out.push(e);
        let eta: f64 = r.sample(StandardNormal);
        e = persistence * e + innovation * eta;
    }
    out
}

pub fn generate_synthetic(config: &SyntheticConfig, seed: u64) -> Result<SyntheticDataset> {
    config.validate("")?;
    let grid = config.grid()?;
    let daily_cal = Calendar::daily_years(config.year_start, config.year_end);
    let weekly_cal = Calendar::weekly_years(config.year_start, config.year_end);
    let index = enso_index(weekly_cal.len(), config.enso_persistence, seed);
    let week_pos = |t: usize| {
        let w = WeekIndex::of_date(daily_cal.date(t));
        weekly_cal.position_of_week(w).expect("day inside weekly calendar")
    };

    let cells = grid.cells();
    let locs: Vec<_> = grid.locations().collect();
    let bases: Vec<f64> = locs.iter().map(|l| base_intensity(l.lat, l.lon)).collect();
    let noise = Noise::new(config.noise_scale);
    let mut rp = rng(seed, STREAM_PRECIP);
    let mut rf = rng(seed, STREAM_FIELDS);
    let field_noise = Normal::new(0.0, 1.0).expect("unit normal");
    let sd = config.noise_scale;

    let n = daily_cal.len();
    let mut precip = Vec::with_capacity(n * cells);
    let mut t2m = Vec::with_capacity(n * cells);
    let mut swvl = Vec::with_capacity(n * cells);
    let mut z500 = Vec::with_capacity(n * cells);
    let mut soil: Vec<f64> = bases.iter().map(|b| 0.1 * b).collect();
    for t in 0..n {
        let doy = daily_cal.date(t).ordinal();
        let e = index[week_pos(t)];
        let phase = seasonal_phase(doy);
        for (c, l) in locs.iter().enumerate() {
            let p = daily_mean(config, bases[c], doy, e) * noise.sample(&mut rp);
            precip.push(p);
            soil[c] = 0.9 * soil[c] + 0.01 * p;
            swvl.push(soil[c]);
            let draw = |r: &mut ChaCha8Rng| if sd > 0.0 { field_noise.sample(r) * sd } else { 0.0 };
            t2m.push(25.0 - 0.3 * (l.lat - config.lat0) + 4.0 * phase + 0.5 * e + draw(&mut rf));
            z500.push(5800.0 + 20.0 * phase - 15.0 * e + 5.0 * draw(&mut rf));
        }
    }
    let mut daily = BTreeMap::new();
    for (name, values) in [(PRECIP, precip), (TEMPERATURE, t2m), (SOIL_MOISTURE, swvl), (GEOPOTENTIAL, z500)] {
        daily.insert(name.to_string(), GriddedSeries::new(name, grid.clone(), daily_cal, values)?);
    }
    let index = IndexSeries {
        name: INDEX.to_string(),
        dates: (0..weekly_cal.len()).map(|t| weekly_cal.date(t)).collect(),
        values: index,
    };
    Ok(SyntheticDataset { daily, index })
}

/// Daily ensemble members on the native ensemble grid over `years`.
///
/// Each member replaces the index of the valid week with its own forecast
/// `ρ·e(w - L) + √(1-ρ²)·η` (ρ = persistence^L), damps the response by
/// `ensemble_bias`, and draws its own daily noise.
pub fn generate_ensemble(config: &SyntheticConfig, index: &[f64], years: YearRange, seed: u64) -> Result<EnsembleForecast> {
    config.validate("")?;
    let grid = config.ensemble_grid()?;
    let weekly_cal = Calendar::weekly_years(config.year_start, config.year_end);
    if index.len() != weekly_cal.len() {
        return Err(Error::Alignment(format!("index has {} weeks, calendar {}", index.len(), weekly_cal.len())));
    }
    let daily_cal = Calendar::daily_years(years.start, years.end);
    let lead = config.ensemble_lead as i64;
    let rho = config.enso_persistence.powi(config.ensemble_lead as i32);
    let spread = (1.0 - rho * rho).sqrt();
    let noise = Noise::new(config.noise_scale);
    let mut r = rng(seed, STREAM_ENSEMBLE);
    let bases: Vec<f64> = grid.locations().map(|l| base_intensity(l.lat, l.lon)).collect();
    let week_of: Vec<WeekIndex> = (0..daily_cal.len()).map(|t| WeekIndex::of_date(daily_cal.date(t))).collect();

    let mut members = Vec::with_capacity(config.ensemble_members);
    for m in 0..config.ensemble_members {
        let mut forecast_index: BTreeMap<WeekIndex, f64> = BTreeMap::new();
        let mut values = Vec::with_capacity(daily_cal.len() * grid.cells());
        for (t, &w) in week_of.iter().enumerate() {
            let e = *forecast_index.entry(w).or_insert_with(|| {
                let init = weekly_cal.position_of_week(w.offset(-lead)).map_or(0.0, |p| index[p]);
                let eta: f64 = r.sample(StandardNormal);
                config.ensemble_bias * (rho * init + spread * eta)
            });
            let doy = daily_cal.date(t).ordinal();
            for b in &bases {
                values.push(daily_mean(config, *b, doy, e) * noise.sample(&mut r));
            }
        }
        members.push(GriddedSeries::new(format!("member{:02}", m + 1), grid.clone(), daily_cal, values)?);
    }
    EnsembleForecast::new(members)
}

/// Weekly target with a known additive noise level: `y = μ(w) + ε`,
/// `ε ~ N(0, noise_sd²)`, where `μ` is a seasonal cycle plus a linear
/// response to the index. Returns the target, the index and the noise-free
/// signal.
pub fn generate_additive(grid: &Grid, years: YearRange, noise_sd: f64, seed: u64) -> Result<(GriddedSeries, Vec<f64>, GriddedSeries)> {
    let cal = Calendar::weekly_years(years.start, years.end);
    let index = enso_index(cal.len(), 0.9, seed);
    let mut r = rng(seed, STREAM_ADDITIVE);
    let eps = Normal::new(0.0, noise_sd).map_err(|e| Error::config("noise_sd", e.to_string()))?;
    let mut signal = Vec::with_capacity(cal.len() * grid.cells());
    let mut target = Vec::with_capacity(cal.len() * grid.cells());
    for (t, &e) in index.iter().enumerate() {
        let phase = seasonal_phase(cal.week(t).first_day().ordinal() + 3);
        for l in grid.locations() {
            let mu = 20.0 + 5.0 * phase + 3.0 * e + 0.5 * (l.lat_index + l.lon_index) as f64;
            signal.push(mu);
            target.push(mu + eps.sample(&mut r));
        }
    }
    Ok((
        GriddedSeries::new(PRECIP, grid.clone(), cal, target)?,
        index,
        GriddedSeries::new("signal", grid.clone(), cal, signal)?,
    ))
}
