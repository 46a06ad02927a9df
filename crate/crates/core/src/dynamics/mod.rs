//! Time- and frequency-domain evaluation of [`StateSpaceModel`]s.
//!
//! [`StateSpaceModel`]: crate::lg::StateSpaceModel

mod frequency;
mod simulate;

pub use frequency::{frequency_response, log_space, FrequencyResponse, TransferEvaluator};
pub use simulate::{integrate_signal, simulate, Trajectory};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("InvalidGrid: frequencies must be finite, positive and strictly increasing")]
    InvalidGrid,
    #[error("SingularAtFrequency: jwI - A is singular at point {index} ({freq_hz} Hz)")]
    SingularAtFrequency { index: usize, freq_hz: f64 },
    #[error("InvalidStep: need dt > 0 and t_end >= dt (dt = {dt}, t_end = {t_end})")]
    InvalidStep { dt: f64, t_end: f64 },
    #[error("NonFiniteState: state became non-finite after step {last_valid_step}")]
    NonFiniteState { last_valid_step: usize },
    #[error("BadChannel: channel {channel} requested but only {count} exist")]
    BadChannel { channel: usize, count: usize },
    #[error("DimensionMismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}
