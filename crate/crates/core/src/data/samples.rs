//! Turns weekly gridded inputs into per-location forecasting windows.

use crate::error::{Error, Result};

use super::calendar::{Calendar, WeekIndex};
use super::grid::{Grid, GriddedSeries, Location};
use super::split::YearRange;

/// Number of month categories for the calendar input.
pub const MONTHS: usize = 12;

/// Weekly inputs sharing one grid and one weekly calendar.
#[derive(Clone, Debug)]
pub struct SampleInputs {
    /// Weekly-maximum precipitation in mm; forecast target and past input.
    pub target: GriddedSeries,
    /// Other past-only covariates (e.g. soil moisture, geopotential).
    pub observed: Vec<GriddedSeries>,
    /// Continuous inputs known for future weeks (index forecasts, climatologies).
    pub known: Vec<GriddedSeries>,
}

impl SampleInputs {
    fn all(&self) -> impl Iterator<Item = &GriddedSeries> {
        std::iter::once(&self.target).chain(&self.observed).chain(&self.known)
    }

    pub fn check_aligned(&self) -> Result<()> {
        if self.target.calendar.is_daily() {
            return Err(Error::Alignment("sample inputs must be weekly".into()));
        }
        for s in self.all() {
            if s.grid != self.target.grid || s.calendar != self.target.calendar {
                return Err(Error::Alignment(format!(
                    "{} does not share grid and calendar with {}",
                    s.variable, self.target.variable
                )));
            }
        }
        Ok(())
    }

    /// Past inputs per step: the target history then the observed covariates.
    pub fn historical_count(&self) -> usize {
        1 + self.observed.len()
    }

    pub fn known_count(&self) -> usize {
        self.known.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowConfig {
    /// Past weeks fed to the encoder (k).
    pub encoder_steps: usize,
    /// Forecast leads (τ_max).
    pub decoder_steps: usize,
    /// Keep every `issue_stride`-th issue week.
    pub issue_stride: usize,
}

impl WindowConfig {
    pub fn new(encoder_steps: usize, decoder_steps: usize) -> Self {
        Self { encoder_steps, decoder_steps, issue_stride: 1 }
    }

    pub fn total_steps(&self) -> usize {
        self.encoder_steps + self.decoder_steps
    }

    /// Closed-form count of issue positions for a gap-free series of `weeks` steps.
    pub fn window_count(&self, weeks: usize) -> usize {
        let span = self.total_steps();
        if weeks < span {
            return 0;
        }
        (weeks - span) / self.issue_stride.max(1) + 1
    }
}

/// Mean and standard deviation used to standardize one input at one location.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

impl Moments {
    pub const IDENTITY: Moments = Moments { mean: 0.0, std: 1.0 };

    pub fn of(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return Self::IDENTITY;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
        let std = var.sqrt();
        Self { mean, std: if std > 1e-12 { std } else { 1.0 } }
    }

    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }
}

/// Per-location moments of every input, fitted on the training years.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardization {
    /// Indexed `[input][cell]`; input 0 is the target, then observed, then known.
    moments: Vec<Vec<Moments>>,
}

impl Standardization {
    pub fn fit(inputs: &SampleInputs, years: YearRange) -> Result<Self> {
        inputs.check_aligned()?;
        let cal = inputs.target.calendar;
        let in_years: Vec<usize> = (0..cal.len()).filter(|&t| years.contains(cal.week(t).year())).collect();
        let moments = inputs
            .all()
            .map(|s| {
                s.grid
                    .locations()
                    .map(|l| Moments::of(in_years.iter().map(|&t| s.get(t, l.lat_index, l.lon_index))))
                    .collect()
            })
            .collect();
        Ok(Self { moments })
    }

    /// No-op standardization for `inputs`' shape.
    pub fn identity(inputs: &SampleInputs) -> Self {
        let cells = inputs.target.grid.cells();
        let n = 1 + inputs.observed.len() + inputs.known.len();
        Self { moments: vec![vec![Moments::IDENTITY; cells]; n] }
    }

    pub fn get(&self, input: usize, cell: usize) -> Moments {
        self.moments[input][cell]
    }

    pub fn target(&self, cell: usize) -> Moments {
        self.moments[0][cell]
    }
}

/// One forecasting window at one location.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleWindow {
    pub location: Location,
    /// Last observed week; lead `τ` targets `issue + τ`.
    pub issue: WeekIndex,
    /// Static categories: latitude index, longitude index.
    pub static_categories: Vec<usize>,
    /// `encoder_steps × historical_count`, standardized.
    pub historical: Vec<f64>,
    /// `(encoder_steps + decoder_steps) × known_count`, standardized.
    pub known: Vec<f64>,
    /// Month category (0-based) per encoder and decoder step.
    pub known_categories: Vec<usize>,
    /// Observed target per lead, in physical units.
    pub target: Vec<f64>,
    /// Moments mapping network output back to physical units.
    pub target_scale: Moments,
}

impl SampleWindow {
    pub fn decoder_steps(&self) -> usize {
        self.target.len()
    }

    pub fn encoder_steps(&self) -> usize {
        self.known_categories.len() - self.target.len()
    }

    /// Week targeted by lead `tau` (1-based).
    pub fn target_week(&self, tau: usize) -> WeekIndex {
        self.issue.offset(tau as i64)
    }
}

/// Counts from one assembly pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SkipReport {
    pub assembled: usize,
    /// Windows dropped because they touch a missing value.
    pub skipped: usize,
}

/// Builds one sample per (location, issue week) whose window
/// `[t - k + 1, t + τ_max]` is free of missing values.
pub fn assemble_samples(
    inputs: &SampleInputs,
    window: WindowConfig,
    standardization: &Standardization,
) -> Result<(Vec<SampleWindow>, SkipReport)> {
    inputs.check_aligned()?;
    if window.encoder_steps == 0 || window.decoder_steps == 0 {
        return Err(Error::config("window", "encoder and decoder steps must be positive"));
    }
    let cal = inputs.target.calendar;
    let grid = &inputs.target.grid;
    let (k, tau) = (window.encoder_steps, window.decoder_steps);
    let mut samples = Vec::new();
    let mut report = SkipReport::default();
    if cal.len() < k + tau {
        return Ok((samples, report));
    }
    let stride = window.issue_stride.max(1);
    let months: Vec<usize> = (0..cal.len()).map(|t| cal.week(t).month() as usize - 1).collect();
    for loc in grid.locations() {
        let cell = loc.lat_index * grid.nlon() + loc.lon_index;
        let mut t = k - 1;
        while t + tau < cal.len() {
            match build_window(inputs, standardization, loc, cell, t, k, tau, &months) {
                Some(s) => {
                    samples.push(s);
                    report.assembled += 1;
                }
                None => report.skipped += 1,
            }
            t += stride;
        }
    }
    Ok((samples, report))
}

#[allow(clippy::too_many_arguments)]
fn build_window(
    inputs: &SampleInputs,
    st: &Standardization,
    loc: Location,
    cell: usize,
    t: usize,
    k: usize,
    tau: usize,
    months: &[usize],
) -> Option<SampleWindow> {
    let (i, j) = loc.key();
    let first = t + 1 - k;
    let nz = inputs.historical_count();
    let nx = inputs.known_count();
    let mut historical = Vec::with_capacity(k * nz);
    for step in first..=t {
        let raw = inputs.target.get(step, i, j);
        historical.push(finite(st.get(0, cell).apply(raw))?);
        for (n, s) in inputs.observed.iter().enumerate() {
            historical.push(finite(st.get(1 + n, cell).apply(s.get(step, i, j)))?);
        }
    }
    let known_offset = 1 + inputs.observed.len();
    let mut known = Vec::with_capacity((k + tau) * nx);
    for step in first..=t + tau {
        for (n, s) in inputs.known.iter().enumerate() {
            known.push(finite(st.get(known_offset + n, cell).apply(s.get(step, i, j)))?);
        }
    }
    let target = (t + 1..=t + tau).map(|s| finite(inputs.target.get(s, i, j))).collect::<Option<Vec<_>>>()?;
    Some(SampleWindow {
        location: loc,
        issue: inputs.target.calendar.week(t),
        static_categories: vec![i, j],
        historical,
        known,
        known_categories: months[first..=t + tau].to_vec(),
        target,
        target_scale: st.target(cell),
    })
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Replicates a weekly index over every cell of `grid`.
pub fn broadcast_index(name: &str, weekly: &[f64], grid: &Grid, calendar: Calendar) -> Result<GriddedSeries> {
    if weekly.len() != calendar.len() {
        return Err(Error::Alignment(format!("index has {} weeks, calendar {}", weekly.len(), calendar.len())));
    }
    let cells = grid.cells();
    let values = weekly.iter().flat_map(|&v| std::iter::repeat_n(v, cells)).collect();
    GriddedSeries::new(name, grid.clone(), calendar, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weekly(name: &str, weeks: usize, f: impl Fn(usize) -> f64) -> GriddedSeries {
        let grid = Grid::regular(-22.0, -43.0, 0.25, 1, 2).unwrap();
        let cal = Calendar::Weekly { start: WeekIndex::new(2000, 1).unwrap(), len: weeks };
        let values = (0..weeks).flat_map(|t| [f(t), f(t) + 100.0]).collect();
        GriddedSeries::new(name, grid, cal, values).unwrap()
    }

    fn inputs(weeks: usize) -> SampleInputs {
        SampleInputs {
            target: weekly("precip", weeks, |t| t as f64),
            observed: vec![weekly("soil", weeks, |t| 0.5 * t as f64)],
            known: vec![weekly("nino", weeks, |t| (t as f64).sin())],
        }
    }

    #[test]
    fn sixty_weeks_give_nine_windows_per_location() {
        let inp = inputs(60);
        let w = WindowConfig::new(26, 26);
        let (s, report) = assemble_samples(&inp, w, &Standardization::identity(&inp)).unwrap();
        assert_eq!(s.len(), 2 * 9);
        assert_eq!(report, SkipReport { assembled: 18, skipped: 0 });
        assert_eq!(w.window_count(60), 9);
        let issues: Vec<u32> = s.iter().filter(|x| x.location.lon_index == 0).map(|x| x.issue.week()).collect();
        assert_eq!(issues, (26..=34).collect::<Vec<_>>());
    }

    #[test]
    fn fifty_two_weeks_fit_exactly_one_window_and_fifty_one_none() {
        let inp = inputs(51);
        let (s, _) = assemble_samples(&inp, WindowConfig::new(26, 26), &Standardization::identity(&inp)).unwrap();
        assert!(s.is_empty());
        let inp = inputs(52);
        let (s, _) = assemble_samples(&inp, WindowConfig::new(26, 26), &Standardization::identity(&inp)).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn targets_follow_issue_week() {
        let inp = inputs(80);
        let (s, _) = assemble_samples(&inp, WindowConfig::new(4, 6), &Standardization::identity(&inp)).unwrap();
        for sample in &s {
            let t = inp.target.calendar.position_of_week(sample.issue).unwrap();
            for tau in 1..=6 {
                let (i, j) = sample.location.key();
                assert_eq!(sample.target[tau - 1], inp.target.get(t + tau, i, j));
                assert_eq!(sample.target_week(tau), inp.target.calendar.week(t + tau));
            }
            // last historical row is the issue week's own target value
            assert_eq!(sample.historical[3 * 2], inp.target.get(t, sample.location.lat_index, sample.location.lon_index));
        }
    }

    #[test]
    fn gaps_skip_windows() {
        let mut inp = inputs(40);
        inp.observed[0].set(20, 0, 0, f64::NAN);
        let (s, report) = assemble_samples(&inp, WindowConfig::new(4, 4), &Standardization::identity(&inp)).unwrap();
        // the gap at week 20 is observed-only, so it blocks windows whose past covers it
        assert_eq!(report.skipped, 4);
        assert_eq!(s.len() + report.skipped, 2 * WindowConfig::new(4, 4).window_count(40));
    }

    #[test]
    fn standardization_uses_training_years() {
        let inp = inputs(53 * 2);
        let st = Standardization::fit(&inp, YearRange::new(2000, 2000)).unwrap();
        let m = st.target(0);
        assert!((m.mean - 26.0).abs() < 1e-12);
        assert_eq!(st.target(1).mean, 126.0);
    }
}
