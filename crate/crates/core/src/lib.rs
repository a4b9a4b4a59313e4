//! Micro-Doppler kinematics toolkit.
//!
//! The crate covers the whole chain from a prescribed hand motion to a
//! kinematic verdict:
//!
//! - [`radar`] simulates FMCW slow-time returns of point scatterers and
//!   evaluates the closed-form radar relations.
//! - [`tf`] turns a slow-time series into a micro-Doppler spectrogram.
//! - [`envelope`] tags the upper/lower Doppler envelopes by energy
//!   thresholding.
//! - [`kinematics`] estimates hand speed, stroke count and handedness.
//! - [`dtw`] aligns envelope curves.
//! - [`sifter`] applies the stroke, energy and envelope rules to a candidate
//!   corpus against a reference corpus.
//! - [`corpus`] holds the signature container, lexicon/report records and the
//!   `mdkin` command line.

pub mod corpus;
pub mod dtw;
pub mod envelope;
mod error;
pub mod kinematics;
pub mod radar;
pub mod sifter;
pub mod tf;

pub use corpus::cli;
pub use error::{Error, Result};
