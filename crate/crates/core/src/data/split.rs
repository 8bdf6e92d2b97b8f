use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::samples::SampleWindow;

/// Inclusive range of calendar years.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub const fn new(start: i32, end: i32) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn overlaps(&self, other: &YearRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl FromStr for YearRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("years", format!("expected `YYYY-YYYY`, got `{s}`"));
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        let r = YearRange::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if r.start > r.end {
            return Err(bad());
        }
        Ok(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partition {
    Train,
    Validation,
    Test,
}

/// Year ranges for training, validation and test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: YearRange,
    pub validation: YearRange,
    pub test: YearRange,
    /// Drop samples whose targets reach past the end of their issue year's range.
    pub strict: bool,
}

impl Default for DatasetSplit {
    fn default() -> Self {
        Self {
            train: YearRange::new(1981, 2010),
            validation: YearRange::new(2011, 2014),
            test: YearRange::new(2015, 2019),
            strict: false,
        }
    }
}

impl DatasetSplit {
    pub fn validate(&self) -> Result<()> {
        let named = [("train", self.train), ("validation", self.validation), ("test", self.test)];
        for (i, (a, ra)) in named.iter().enumerate() {
            for (b, rb) in &named[i + 1..] {
                if ra.overlaps(rb) {
                    return Err(Error::config(
                        "data.split",
                        format!("{a} years {ra} overlap {b} years {rb}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn range(&self, p: Partition) -> YearRange {
        match p {
            Partition::Train => self.train,
            Partition::Validation => self.validation,
            Partition::Test => self.test,
        }
    }

    pub fn assign(&self, sample: &SampleWindow) -> Option<Partition> {
        let year = sample.issue.year();
        let p = [Partition::Train, Partition::Validation, Partition::Test]
            .into_iter()
            .find(|p| self.range(*p).contains(year))?;
        if self.strict && sample.target_week(sample.decoder_steps()).year() > self.range(p).end {
            return None;
        }
        Some(p)
    }
}

/// Samples partitioned by the year of their issue week.
#[derive(Clone, Debug, Default)]
pub struct SplitSamples {
    pub train: Vec<SampleWindow>,
    pub validation: Vec<SampleWindow>,
    pub test: Vec<SampleWindow>,
    /// Outside every range, or trimmed by `strict`.
    pub unassigned: Vec<SampleWindow>,
}

pub fn split_samples(samples: Vec<SampleWindow>, split: &DatasetSplit) -> SplitSamples {
    let mut out = SplitSamples::default();
    for s in samples {
        match split.assign(&s) {
            Some(Partition::Train) => out.train.push(s),
            Some(Partition::Validation) => out.validation.push(s),
            Some(Partition::Test) => out.test.push(s),
            None => out.unassigned.push(s),
        }
    }
    out
}
