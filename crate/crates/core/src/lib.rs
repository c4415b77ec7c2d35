//! Granger causality in the tail for binary extreme-event series.
//!
//! Extreme events are modelled by discrete autoregressive processes (DAR,
//! VDAR), which copy past values of themselves or of other series. A series
//! `Y` causes `X` in the tail when `X` copies lagged values of `Y`, which is
//! tested by a likelihood ratio between nested DAR and VDAR fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causality;
pub mod dgp;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod network;
pub mod optim;
pub mod params;
pub mod preprocess;
pub mod random;
pub mod series;

pub use error::{Error, Result};
pub use params::{BiEquation, BiVdarParams, DarParams, Vdar1Params};
pub use series::{BinaryPanel, BinarySeries, RealSeries};
