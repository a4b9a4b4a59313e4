//! Upper/lower Doppler envelopes by energy-based thresholding.
//!
//! For each frame with energy `E`, a bin is tagged when its power is at least
//! `α·E`. The upper envelope is the first tagged bin met when scanning down
//! from the highest positive frequency, the lower envelope the first tagged
//! bin met when scanning up from the most negative frequency.

use serde::{Deserialize, Serialize};

use crate::radar::LightSpeed;
use crate::tf::{column_energy, Spectrogram};
use crate::{Error, Result};

/// Default fraction of the column energy used as tagging threshold.
pub const DEFAULT_SCALE_FACTOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePair {
    pub upper_hz: Vec<f64>,
    pub lower_hz: Vec<f64>,
    pub scale_factor: f64,
    pub time_axis_s: Vec<f64>,
    pub bin_width_hz: f64,
}

impl EnvelopePair {
    pub fn len(&self) -> usize {
        self.upper_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper_hz.is_empty()
    }

    pub fn upper_mps(&self, carrier_hz: f64, light: LightSpeed) -> Vec<f64> {
        envelope_to_velocity(&self.upper_hz, carrier_hz, light)
    }

    pub fn lower_mps(&self, carrier_hz: f64, light: LightSpeed) -> Vec<f64> {
        envelope_to_velocity(&self.lower_hz, carrier_hz, light)
    }

    /// `[upper; lower]` in m/s, the curve matched by the envelope rule.
    pub fn matching_series(&self, carrier_hz: f64, light: LightSpeed) -> Vec<f64> {
        let mut series = self.upper_mps(carrier_hz, light);
        series.extend(self.lower_mps(carrier_hz, light));
        series
    }

    /// Running median of width 3 on both envelopes; end points are kept.
    pub fn median_smoothed(&self) -> Self {
        EnvelopePair {
            upper_hz: median3(&self.upper_hz),
            lower_hz: median3(&self.lower_hz),
            ..self.clone()
        }
    }
}

fn median3(xs: &[f64]) -> Vec<f64> {
    if xs.len() < 3 {
        return xs.to_vec();
    }
    let mut out = xs.to_vec();
    for i in 1..xs.len() - 1 {
        let mut w = [xs[i - 1], xs[i], xs[i + 1]];
        w.sort_by(f64::total_cmp);
        out[i] = w[1];
    }
    out
}

pub fn extract_envelopes(spec: &Spectrogram, scale_factor: f64) -> Result<EnvelopePair> {
    if !(scale_factor > 0.0 && scale_factor < 1.0) {
        return Err(Error::domain(format!(
            "scale factor must lie in (0, 1), got {scale_factor}"
        )));
    }
    let freqs = spec.freq_axis_hz();
    let power = spec.power();
    let energy = column_energy(spec);
    let mut upper_hz = Vec::with_capacity(spec.frames());
    let mut lower_hz = Vec::with_capacity(spec.frames());

    for (c, &e) in energy.iter().enumerate() {
        if e <= 0.0 {
            upper_hz.push(0.0);
            lower_hz.push(0.0);
            continue;
        }
        let threshold = scale_factor * e;
        let col = power.column(c);
        let tagged = |r: &usize| col[*r] >= threshold;
        let top = (0..freqs.len()).rev().find(tagged);
        let bottom = (0..freqs.len()).find(tagged);
        upper_hz.push(top.map_or(0.0, |r| freqs[r]));
        lower_hz.push(bottom.map_or(0.0, |r| freqs[r]));
    }

    Ok(EnvelopePair {
        upper_hz,
        lower_hz,
        scale_factor,
        time_axis_s: spec.time_axis_s().to_vec(),
        bin_width_hz: spec.bin_width_hz(),
    })
}

/// `v = f·c / 2f_c`, sign preserved (positive = approaching).
pub fn envelope_to_velocity(env_hz: &[f64], carrier_hz: f64, light: LightSpeed) -> Vec<f64> {
    let scale = light.mps() / (2.0 * carrier_hz);
    env_hz.iter().map(|f| f * scale).collect()
}
