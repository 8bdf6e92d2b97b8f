//! Columnar text formats: `date,lat,lon,variable,value` for gridded data and
//! `date,name,value` for index series.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

use super::calendar::{Calendar, WeekIndex};
use super::grid::{Grid, GriddedSeries};

/// Missing-value sentinel in text files.
pub const MISSING: f64 = -9999.0;
pub const GRIDDED_HEADER: &str = "date,lat,lon,variable,value";
pub const INDEX_HEADER: &str = "date,name,value";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cadence {
    Daily,
    Weekly,
}

/// How to interpret a gridded file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormatDescriptor {
    pub cadence: Cadence,
    /// Variable to extract when a file carries several.
    pub variable: Option<String>,
}

impl FormatDescriptor {
    pub fn daily(variable: &str) -> Self {
        Self { cadence: Cadence::Daily, variable: Some(variable.to_string()) }
    }

    pub fn weekly(variable: &str) -> Self {
        Self { cadence: Cadence::Weekly, variable: Some(variable.to_string()) }
    }
}

struct Row {
    line: usize,
    date: NaiveDate,
    lat: f64,
    lon: f64,
    value: f64,
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::format(line, format!("bad {what} `{field}`")))
}

fn parse_date(field: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field.trim(), "%Y-%m-%d").map_err(|_| Error::format(line, format!("bad date `{field}`")))
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &str) -> Result<()> {
    let header = rdr.headers().map_err(|e| Error::format(1, e.to_string()))?;
    let got: Vec<&str> = header.iter().collect();
    if got.join(",") != expected {
        return Err(Error::format(1, format!("expected header `{expected}`, got `{}`", got.join(","))));
    }
    Ok(())
}

/// Reads every variable in a gridded file.
pub fn read_gridded<R: Read>(reader: R, cadence: Cadence) -> Result<BTreeMap<String, GriddedSeries>> {
    let mut rdr = csv_reader(reader);
    check_header(&mut rdr, GRIDDED_HEADER)?;
    let mut by_var: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    for (n, record) in rdr.records().enumerate() {
        let line = n + 2;
        let record = record.map_err(|e| Error::format(line, e.to_string()))?;
        if record.len() != 5 {
            return Err(Error::format(line, format!("expected 5 fields, got {}", record.len())));
        }
        let value = parse_f64(&record[4], line, "value")?;
        let row = Row {
            line,
            date: parse_date(&record[0], line)?,
            lat: parse_f64(&record[1], line, "lat")?,
            lon: parse_f64(&record[2], line, "lon")?,
            value: if value == MISSING { f64::NAN } else { value },
        };
        by_var.entry(record[3].to_string()).or_default().push(row);
    }
    by_var.into_iter().map(|(var, rows)| Ok((var.clone(), assemble(&var, rows, cadence)?))).collect()
}

fn axis_of(rows: &[Row], pick: impl Fn(&Row) -> f64, name: &str) -> Result<Vec<f64>> {
    let mut seen: BTreeMap<u64, usize> = BTreeMap::new();
    for r in rows {
        seen.entry(pick(r).to_bits()).or_insert(r.line);
    }
    let mut values: Vec<(f64, usize)> = seen.into_iter().map(|(b, l)| (f64::from_bits(b), l)).collect();
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    if values.len() > 2 {
        let step = values[1].0 - values[0].0;
        for w in values.windows(2) {
            if ((w[1].0 - w[0].0) - step).abs() > 1e-6 {
                return Err(Error::format(w[1].1, format!("non-uniform {name} spacing at {}", w[1].0)));
            }
        }
    }
    Ok(values.into_iter().map(|(v, _)| v).collect())
}

fn assemble(var: &str, rows: Vec<Row>, cadence: Cadence) -> Result<GriddedSeries> {
    let lats = axis_of(&rows, |r| r.lat, "latitude")?;
    let lons = axis_of(&rows, |r| r.lon, "longitude")?;
    let dates: BTreeSet<NaiveDate> = rows.iter().map(|r| r.date).collect();
    let first = *dates.iter().next().expect("at least one row");
    let calendar = match cadence {
        Cadence::Daily => Calendar::Daily { start: first, len: dates.len() },
        Cadence::Weekly => {
            let start = WeekIndex::from_start_date(first).ok_or_else(|| {
                let line = rows.iter().find(|r| r.date == first).map_or(0, |r| r.line);
                Error::format(line, format!("{first} is not the first day of a week"))
            })?;
            Calendar::Weekly { start, len: dates.len() }
        }
    };
    let line_of = |d: NaiveDate| rows.iter().find(|r| r.date == d).map_or(0, |r| r.line);
    for (t, d) in dates.iter().enumerate() {
        if calendar.date(t) != *d {
            return Err(Error::format(line_of(*d), format!("non-uniform calendar: {d} where {} expected", calendar.date(t))));
        }
    }
    let lat_pos: HashMap<u64, usize> = lats.iter().enumerate().map(|(i, v)| (v.to_bits(), i)).collect();
    let lon_pos: HashMap<u64, usize> = lons.iter().enumerate().map(|(i, v)| (v.to_bits(), i)).collect();
    let grid = Grid::new(lats, lons)?;
    let (nlat, nlon) = (grid.nlat(), grid.nlon());
    let mut values = vec![f64::NAN; calendar.len() * nlat * nlon];
    let mut filled = vec![false; values.len()];
    let start = first;
    for r in &rows {
        let t = match cadence {
            Cadence::Daily => (r.date - start).num_days() as usize,
            Cadence::Weekly => calendar.position_of_date(r.date).ok_or_else(|| Error::format(r.line, "date off the weekly calendar"))?,
        };
        let o = (t * nlat + lat_pos[&r.lat.to_bits()]) * nlon + lon_pos[&r.lon.to_bits()];
        if filled[o] {
            return Err(Error::format(r.line, format!("duplicate row for {var} at {} ({}, {})", r.date, r.lat, r.lon)));
        }
        filled[o] = true;
        values[o] = r.value;
    }
    if let Some(o) = filled.iter().position(|f| !f) {
        let (t, rest) = (o / (nlat * nlon), o % (nlat * nlon));
        return Err(Error::format(
            rows.len() + 1,
            format!(
                "missing row for {var} at {} ({}, {})",
                calendar.date(t),
                grid.lats()[rest / nlon],
                grid.lons()[rest % nlon]
            ),
        ));
    }
    GriddedSeries::new(var, grid, calendar, values)
}

pub fn load_gridded(path: &Path, descriptor: &FormatDescriptor) -> Result<GriddedSeries> {
    let mut all = load_all_gridded(path, descriptor.cadence)?;
    match &descriptor.variable {
        Some(v) => all.remove(v).ok_or_else(|| Error::Lookup { kind: "variable", name: v.clone() }),
        None if all.len() == 1 => Ok(all.into_values().next().expect("one entry")),
        None => Err(Error::format(0, "file holds several variables; descriptor must name one")),
    }
}

pub fn load_all_gridded(path: &Path, cadence: Cadence) -> Result<BTreeMap<String, GriddedSeries>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_gridded(BufReader::new(file), cadence)
}

pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "-9999.0".to_string()
    } else {
        format!("{v}")
    }
}

pub fn write_gridded<W: Write>(mut out: W, series: &[&GriddedSeries]) -> std::io::Result<()> {
    writeln!(out, "{GRIDDED_HEADER}")?;
    for s in series {
        for t in 0..s.steps() {
            let date = s.calendar.date(t);
            for (i, lat) in s.grid.lats().iter().enumerate() {
                for (j, lon) in s.grid.lons().iter().enumerate() {
                    writeln!(out, "{date},{lat},{lon},{},{}", s.variable, format_value(s.get(t, i, j)))?;
                }
            }
        }
    }
    Ok(())
}

pub fn save_gridded(path: &Path, series: &[&GriddedSeries]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_gridded(&mut w, series).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Scalar index (e.g. an ENSO index) sampled at increasing dates.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSeries {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl IndexSeries {
    /// Value in force at the start of each week: the latest record dated on or
    /// before the week's first day (monthly records forward-fill). `NaN` before
    /// the first record.
    pub fn weekly_values(&self, weeks: &[WeekIndex]) -> Vec<f64> {
        weeks
            .iter()
            .map(|w| {
                let day = w.first_day();
                match self.dates.partition_point(|d| *d <= day) {
                    0 => f64::NAN,
                    p => self.values[p - 1],
                }
            })
            .collect()
    }
}

pub fn read_index<R: Read>(reader: R) -> Result<BTreeMap<String, IndexSeries>> {
    let mut rdr = csv_reader(reader);
    check_header(&mut rdr, INDEX_HEADER)?;
    let mut out: BTreeMap<String, IndexSeries> = BTreeMap::new();
    for (n, record) in rdr.records().enumerate() {
        let line = n + 2;
        let record = record.map_err(|e| Error::format(line, e.to_string()))?;
        if record.len() != 3 {
            return Err(Error::format(line, format!("expected 3 fields, got {}", record.len())));
        }
        let date = parse_date(&record[0], line)?;
        let value = parse_f64(&record[2], line, "value")?;
        let s = out.entry(record[1].to_string()).or_insert_with(|| IndexSeries {
            name: record[1].to_string(),
            dates: Vec::new(),
            values: Vec::new(),
        });
        if s.dates.last().is_some_and(|d| *d >= date) {
            return Err(Error::format(line, format!("dates for {} must increase", s.name)));
        }
        s.dates.push(date);
        s.values.push(if value == MISSING { f64::NAN } else { value });
    }
    Ok(out)
}

pub fn load_index(path: &Path, name: &str) -> Result<IndexSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_index(BufReader::new(file))?
        .remove(name)
        .ok_or_else(|| Error::Lookup { kind: "index series", name: name.to_string() })
}

pub fn write_index<W: Write>(mut out: W, series: &IndexSeries) -> std::io::Result<()> {
    writeln!(out, "{INDEX_HEADER}")?;
    for (d, v) in series.dates.iter().zip(&series.values) {
        writeln!(out, "{d},{},{}", series.name, format_value(*v))?;
    }
    Ok(())
}

pub fn save_index(path: &Path, series: &IndexSeries) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_index(&mut w, series).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "date,lat,lon,variable,value
2000-01-01,-22.0,-43.0,precip,1.5
2000-01-01,-22.0,-42.75,precip,2
2000-01-02,-22.0,-43.0,precip,-9999.0
2000-01-02,-22.0,-42.75,precip,0
2000-01-03,-22.0,-43.0,precip,3
2000-01-03,-22.0,-42.75,precip,4.25
";

    #[test]
    fn loads_exhaustive_tiny_file() {
        let all = read_gridded(TINY.as_bytes(), Cadence::Daily).unwrap();
        let s = &all["precip"];
        assert_eq!((s.steps(), s.grid.nlat(), s.grid.nlon()), (3, 1, 2));
        assert_eq!(s.get(0, 0, 1), 2.0);
        assert!(s.is_missing(1, 0, 0));
        assert_eq!(s.get(2, 0, 1), 4.25);
    }

    #[test]
    fn missing_row_is_a_format_error() {
        let text: String = TINY.lines().filter(|l| !l.starts_with("2000-01-02,-22.0,-42.75")).map(|l| format!("{l}\n")).collect();
        let err = read_gridded(text.as_bytes(), Cadence::Daily).unwrap_err();
        assert!(matches!(err, Error::Format { .. }), "{err}");
        assert!(err.to_string().contains("missing row"), "{err}");
    }

    #[test]
    fn non_uniform_grid_names_row() {
        let text = "date,lat,lon,variable,value
2000-01-01,0,0,v,1
2000-01-01,0,1,v,1
2000-01-01,0,3,v,1
";
        let err = read_gridded(text.as_bytes(), Cadence::Daily).unwrap_err();
        assert!(matches!(err, Error::Format { line: 4, .. }), "{err}");
    }

    #[test]
    fn calendar_gap_is_rejected() {
        let text = "date,lat,lon,variable,value
2000-01-01,0,0,v,1
2000-01-03,0,0,v,1
2000-01-04,0,0,v,1
";
        assert!(read_gridded(text.as_bytes(), Cadence::Daily).is_err());
    }

    #[test]
    fn weekly_file_uses_week_starts() {
        let text = "date,lat,lon,variable,value
2000-12-23,0,0,v,1
2000-12-30,0,0,v,2
2001-01-01,0,0,v,3
";
        let all = read_gridded(text.as_bytes(), Cadence::Weekly).unwrap();
        let s = &all["v"];
        assert_eq!(s.calendar.week(1), WeekIndex::new(2000, 53).unwrap());
        assert_eq!(s.get(2, 0, 0), 3.0);
    }

    #[test]
    fn index_forward_fills_monthly_values() {
        let text = "date,name,value\n2000-01-01,nino34,0.5\n2000-02-01,nino34,-1.0\n";
        let idx = read_index(text.as_bytes()).unwrap().remove("nino34").unwrap();
        let weeks: Vec<WeekIndex> = (1..=6).map(|w| WeekIndex::new(2000, w).unwrap()).collect();
        let v = idx.weekly_values(&weeks);
        // week 5 starts Jan 29, week 6 starts Feb 5
        assert_eq!(v, vec![0.5, 0.5, 0.5, 0.5, 0.5, -1.0]);
    }
}
