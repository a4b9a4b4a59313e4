//! Line-oriented JSON records: one object per line, blank lines ignored.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::signature::write_atomic;
use crate::kinematics::{ClassStats, KinematicProfile};
use crate::radar::SyntheticSignSpec;
use crate::sifter::{Lexicon, SignLexeme};
use crate::{Error, Result};

pub fn parse_jsonl<T: DeserializeOwned>(text: &str, origin: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::Record(format!("{origin}:{}: {e}", i + 1)))
        })
        .collect()
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(&text, &path.display().to_string())
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::Record(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    write_atomic(path.as_ref(), to_jsonl(records)?.as_bytes())
}

/// Lexicon file: `{"gloss": "walk", "handedness": 1, "strokes": 2}` per line.
pub fn read_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    Lexicon::new(read_jsonl::<SignLexeme>(path)?)
}

pub fn write_lexicon(path: impl AsRef<Path>, lexicon: &Lexicon) -> Result<()> {
    let entries: Vec<&SignLexeme> = lexicon.entries().collect();
    write_jsonl(path, &entries)
}

/// Input line of `mdkin simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignSpecRecord {
    pub sample_id: String,
    pub class_label: String,
    #[serde(flatten)]
    pub sign: SyntheticSignSpec,
    /// Linear noise power; omitted means no noise.
    #[serde(default)]
    pub noise_power: Option<f64>,
}

/// Output line of `mdkin analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    #[serde(flatten)]
    pub profile: KinematicProfile,
    /// Total energy divided by the corpus maximum.
    pub normalized_energy: f64,
    pub handedness_threshold: f64,
    pub range_resolution_m: f64,
    pub velocity_resolution_mps: f64,
    pub upper_mps: Vec<f64>,
    pub lower_mps: Vec<f64>,
}

impl ProfileRecord {
    pub fn matching_series(&self) -> Vec<f64> {
        let mut s = self.upper_mps.clone();
        s.extend_from_slice(&self.lower_mps);
        s
    }
}

/// Output line of `mdkin stats`.
pub type StatsRecord = ClassStats;
