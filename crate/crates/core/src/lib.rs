//! Gabor wavelet selection for face recognition.
//!
//! The pipeline: a Gabor filter bank turns each face image into a vector of
//! response magnitudes ([`gabor`]); absolute differences between image pairs
//! form an intra-person / extra-person two-class problem ([`pairs`]); boosting
//! over single-component threshold stumps ([`weak`], [`boosting`]) picks the
//! discriminative (wavelet, position) features, optionally with Gamma-modeled
//! parallel rounds and a mutual-information redundancy filter; the selected
//! features then drive a nearest-neighbor recognizer ([`recognizer`]).

pub mod boosting;
pub mod cli;
pub mod config;
pub mod dataio;
pub mod error;
pub mod gabor;
pub mod model;
pub mod pairs;
pub mod recognizer;
pub mod weak;

pub use error::{Error, Result};
