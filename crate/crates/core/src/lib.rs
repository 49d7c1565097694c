//! Forecasting and provisioning toolkit for solar-powered cellular sites.
//!
//! The crate covers the full study pipeline:
//!
//! - [`weather`] — PSM3-style CSV ingestion, synthetic weather generation,
//!   chronological splits and feature matrices.
//! - [`pv`] — physics-based hourly DC harvest of a rated PV array (solar
//!   position, isotropic-sky transposition, NOCT thermal model).
//! - [`traffic`] — synthetic connection-count profiles and the load-dependent
//!   base-station power model.
//! - [`forecast`] — from-scratch LSTM and DHI-gated Cond-LSTM regressors with
//!   robust/min-max scaling, Adam, early stopping and JSON checkpoints.
//! - [`markov`] — three-state first-order Markov day-ahead baseline.
//! - [`metrics`] — RMSE/nRMSE/MAE/ME/MPE error reports and cost differences.
//! - [`sizing`] — battery-dynamics simulation plus two cross-validating
//!   optimizers (exhaustive enumeration and big-M branch-and-bound MILP) for
//!   the cost-minimal (PV modules, battery modules) pair.
//!
//! Data-parallel inner loops (harvest evaluation, batch gradients, sizing
//! probes) run on rayon when the `parallel` feature is enabled (default) and
//! fall back to sequential iteration otherwise; see [`par`].

pub mod error;
pub mod forecast;
pub mod markov;
pub mod matrix;
pub mod metrics;
pub mod par;
pub mod pv;
pub mod sizing;
pub mod traffic;
pub mod weather;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
