//! Micro-Doppler spectrograms.
//!
//! `S(t, f) = |Σ_n w[n] x[t·hop + n] e^{−j2πfn/N}|²` with frames taken from
//! full windows only and the frequency axis shifted so that 0 Hz sits in
//! the middle. No clutter filtering is applied: the static (0 Hz) return
//! stays in the spectrogram.
//!
//! DFT convention: unnormalized forward transform, so for a rectangular
//! window and `fft_len == window_len` each column holds `N · Σ|x|²` of its
//! frame (Parseval).

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::radar::IqSeries;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    #[default]
    Hann,
    Hamming,
    Rectangular,
    /// Gaussian with `σ = (N − 1) / 5` (i.e. 2.5 standard deviations per
    /// half window).
    Gaussian,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        if len == 1 {
            return vec![1.0];
        }
        let m = (len - 1) as f64;
        (0..len)
            .map(|n| {
                let n = n as f64;
                match self {
                    WindowKind::Hann => 0.5 - 0.5 * (2.0 * PI * n / m).cos(),
                    WindowKind::Hamming => 0.54 - 0.46 * (2.0 * PI * n / m).cos(),
                    WindowKind::Rectangular => 1.0,
                    WindowKind::Gaussian => {
                        let sigma = m / 5.0;
                        let x = (n - m / 2.0) / sigma;
                        (-0.5 * x * x).exp()
                    }
                }
            })
            .collect()
    }
}

impl std::str::FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hann" | "hanning" => Ok(WindowKind::Hann),
            "hamming" => Ok(WindowKind::Hamming),
            "rect" | "rectangular" | "boxcar" => Ok(WindowKind::Rectangular),
            "gauss" | "gaussian" => Ok(WindowKind::Gaussian),
            other => Err(Error::Usage(format!("unknown window kind {other:?}"))),
        }
    }
}

/// STFT framing parameters. `fft_len = None` means the next power of two
/// at or above `window_len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftParams {
    pub window: WindowKind,
    pub window_len: usize,
    pub hop: usize,
    pub fft_len: Option<usize>,
}

impl Default for StftParams {
    fn default() -> Self {
        StftParams {
            window: WindowKind::Hann,
            window_len: 64,
            hop: 8,
            fft_len: None,
        }
    }
}

impl StftParams {
    pub fn resolved_fft_len(&self) -> usize {
        self.fft_len
            .unwrap_or_else(|| self.window_len.next_power_of_two())
    }
}

/// Window description stored with every spectrogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowMeta {
    pub kind: WindowKind,
    pub window_len: usize,
    pub hop: usize,
    pub fft_len: usize,
}

/// Linear power `|STFT|²`, rows = Doppler bins (ascending), columns = frames.
///
/// For an even bin count the frequency grid runs from `−PRF/2` up to
/// `PRF/2 − Δf`, so it holds the symmetric pairs `±kΔf` plus the lone
/// `−PRF/2` bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    power: Array2<f64>,
    freq_axis_hz: Vec<f64>,
    time_axis_s: Vec<f64>,
    window: WindowMeta,
}

impl Spectrogram {
    /// Assembles a spectrogram from externally produced parts (e.g. a
    /// generative model's output read from a signature file).
    pub fn from_parts(
        power: Array2<f64>,
        freq_axis_hz: Vec<f64>,
        time_axis_s: Vec<f64>,
        window: WindowMeta,
    ) -> Result<Self> {
        let (rows, cols) = power.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::shape("spectrogram must have at least one bin and one frame"));
        }
        if freq_axis_hz.len() != rows || time_axis_s.len() != cols {
            return Err(Error::shape(format!(
                "axes ({} bins, {} frames) do not match power matrix {rows}x{cols}",
                freq_axis_hz.len(),
                time_axis_s.len()
            )));
        }
        if power.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::domain("spectrogram power must be finite and >= 0"));
        }
        if freq_axis_hz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("frequency axis must be strictly increasing"));
        }
        Ok(Spectrogram {
            power,
            freq_axis_hz,
            time_axis_s,
            window,
        })
    }

    pub fn power(&self) -> &Array2<f64> {
        &self.power
    }

    pub fn freq_axis_hz(&self) -> &[f64] {
        &self.freq_axis_hz
    }

    pub fn time_axis_s(&self) -> &[f64] {
        &self.time_axis_s
    }

    pub fn window(&self) -> &WindowMeta {
        &self.window
    }

    pub fn bins(&self) -> usize {
        self.power.nrows()
    }

    pub fn frames(&self) -> usize {
        self.power.ncols()
    }

    /// Spacing of the Doppler grid.
    pub fn bin_width_hz(&self) -> f64 {
        match self.freq_axis_hz.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_parts(
            self.power.mapv(|p| p * factor),
            self.freq_axis_hz.clone(),
            self.time_axis_s.clone(),
            self.window,
        )
    }

    /// Frequency-bin index whose power is largest in `column` (first on ties).
    pub fn argmax_bin(&self, column: usize) -> usize {
        let col = self.power.column(column);
        let mut best = 0;
        for (i, &p) in col.iter().enumerate() {
            if p > col[best] {
                best = i;
            }
        }
        best
    }
}

/// Frequency of shifted row `r` for `n` bins at sample rate `fs`.
fn shifted_frequency(r: usize, n: usize, fs: f64) -> f64 {
    (r as f64 - (n / 2) as f64) * fs / n as f64
}

pub fn stft_spectrogram(iq: &IqSeries, params: &StftParams) -> Result<Spectrogram> {
    let StftParams {
        window,
        window_len,
        hop,
        ..
    } = *params;
    let fft_len = params.resolved_fft_len();
    if window_len == 0 {
        return Err(Error::shape("window length must be at least one pulse"));
    }
    if hop == 0 {
        return Err(Error::shape("hop must be at least one pulse"));
    }
    if fft_len < window_len {
        return Err(Error::shape(format!(
            "FFT length {fft_len} is shorter than the window ({window_len})"
        )));
    }
    let n = iq.len();
    if window_len > n {
        return Err(Error::shape(format!(
            "window of {window_len} pulses is longer than the {n}-pulse signal"
        )));
    }

    let frames = (n - window_len) / hop + 1;
    let coeffs = window.coefficients(window_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(fft_len);
    let samples = iq.samples();
    let half = fft_len / 2;

    let columns: Vec<Vec<f64>> = (0..frames)
        .into_par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); fft_len],
            |buf, c| {
                let start = c * hop;
                for (k, slot) in buf.iter_mut().enumerate() {
                    *slot = if k < window_len {
                        samples[start + k] * coeffs[k]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                }
                fft.process(buf);
                (0..fft_len)
                    .map(|r| buf[(r + fft_len - half) % fft_len].norm_sqr())
                    .collect()
            },
        )
        .collect();

    let mut power = Array2::<f64>::zeros((fft_len, frames));
    for (c, col) in columns.iter().enumerate() {
        for (r, &p) in col.iter().enumerate() {
            power[(r, c)] = p;
        }
    }

    let fs = 1.0 / iq.sample_interval_s();
    let freq_axis_hz = (0..fft_len).map(|r| shifted_frequency(r, fft_len, fs)).collect();
    let centre = (window_len - 1) as f64 / 2.0;
    let time_axis_s = (0..frames)
        .map(|c| ((c * hop) as f64 + centre) * iq.sample_interval_s())
        .collect();

    Spectrogram::from_parts(
        power,
        freq_axis_hz,
        time_axis_s,
        WindowMeta {
            kind: window,
            window_len,
            hop,
            fft_len,
        },
    )
}

/// Sum of linear power over all Doppler bins, one value per frame.
pub fn column_energy(spec: &Spectrogram) -> Vec<f64> {
    spec.power.columns().into_iter().map(|c| c.sum()).collect()
}

/// Sum of linear power over the whole spectrogram.
pub fn total_energy(spec: &Spectrogram) -> f64 {
    column_energy(spec).iter().sum()
}
