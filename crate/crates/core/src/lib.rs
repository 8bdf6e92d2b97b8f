//! Multi-horizon quantile forecasting of weekly maximum precipitation.

pub mod baselines;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod keyvalue;
pub mod model;
pub mod numerics;
pub mod pipeline;
pub mod training;

pub use error::{Error, Result};
