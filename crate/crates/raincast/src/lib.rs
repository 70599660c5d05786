//! Rainfall forecasting with two data-driven methods: exact Dynamic Mode
//! Decomposition over a spatial grid of monthly rainfall, and a from-scratch
//! single-layer LSTM regressor trained per location.
//!
//! The crate is organized as a pipeline:
//!
//! - [`ingest`] — load daily gridded rainfall CSVs, aggregate to monthly
//!   means (mm/day), select regions and points.
//! - [`preprocess`] — snapshot matrices for DMD, min-max normalization,
//!   sliding windows and chronological train/test splits for the LSTM.
//! - [`dmd`] — exact DMD fit, reconstruction, and multi-step forecasting.
//! - [`nn`] — LSTM cell with backpropagation through time, inverted
//!   dropout, a zero-initialized dense head, and AdamW/Nadam optimizers.
//! - [`metrics`] — RMSE/MAE shared by both pipelines.
//! - [`synth`] — seeded synthetic generators used as ground-truth oracles.
//! - [`experiment`] — experiment runner reproducing the DMD year/rank grid
//!   and the 12-cell optimizer/window/dropout grid, with CSV emission.
//!
//! See the `examples/` directory for one runnable example per capability;
//! the `raincast` binary exposes the same pipelines as `ingest`, `dmd`,
//! `dl`, and `synth` subcommands.

pub mod config;
pub mod dmd;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod metrics;
pub mod nn;
pub mod preprocess;
pub mod synth;

pub use error::{RaincastError, Result};
