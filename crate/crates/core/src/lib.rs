//! News sentiment and stock price interdependency pipeline.

pub mod config;
pub mod dataset;
pub mod error;
pub mod features;
pub mod harness;
pub mod ingest;
pub mod models;
pub mod pipeline;
pub mod sentiment;
pub mod textprep;

pub use error::{Error, Result};
