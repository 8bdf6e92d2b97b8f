//! Gridded inputs: file formats, regridding, weekly aggregation, sample
//! assembly, year splits, sub-region tiling and a synthetic generator.

pub mod aggregate;
pub mod calendar;
pub mod grid;
pub mod io;
pub mod regrid;
pub mod samples;
pub mod split;
pub mod synthetic;
pub mod tiles;

pub use aggregate::{aggregate_weekly, Aggregation};
pub use calendar::{Calendar, WeekIndex, WEEKS_PER_YEAR};
pub use grid::{Grid, GriddedSeries, Location};
pub use io::{load_gridded, save_gridded, Cadence, FormatDescriptor, IndexSeries, MISSING};
pub use regrid::max_pool_regrid;
pub use samples::{assemble_samples, broadcast_index, Moments, SampleInputs, SampleWindow, SkipReport, Standardization, WindowConfig};
pub use split::{split_samples, DatasetSplit, Partition, SplitSamples, YearRange};
pub use synthetic::{generate_synthetic, SyntheticConfig, SyntheticDataset};
pub use tiles::{partition_subregions, GridPoint, Tile};
