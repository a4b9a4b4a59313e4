//! FMCW slow-time simulation and closed-form radar relations.
//!
//! Only the slow-time phase history is simulated: each pulse contributes one
//! complex sample `Σ a_i · exp(−j4π f_c R_i / c)`, which is what a single
//! range-gated stream of an FMCW radar delivers after range processing.

mod synth;

pub use synth::{synth_sign_trajectory, SynthesizedSign, SyntheticSignSpec, VelocityProfile};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT_MPS: f64 = 299_792_458.0;

/// Rounded speed of light commonly used for back-of-envelope radar figures.
pub const ROUNDED_SPEED_OF_LIGHT_MPS: f64 = 3.0e8;

/// Which propagation speed the closed-form relations use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightSpeed {
    #[default]
    Exact,
    /// `c = 3e8`; reproduces the usual rounded resolution figures
    /// (0.0375 m at 4 GHz, 0.0487 m/s at 77 GHz / 40 ms).
    Rounded,
}

impl LightSpeed {
    pub fn mps(self) -> f64 {
        match self {
            LightSpeed::Exact => SPEED_OF_LIGHT_MPS,
            LightSpeed::Rounded => ROUNDED_SPEED_OF_LIGHT_MPS,
        }
    }
}

/// Transmit waveform and frame parameters.
///
/// One chirp per pulse; the slow-time sample rate (pulse repetition
/// frequency) is `1 / chirp_duration_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    pub center_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub chirp_duration_s: f64,
    pub pulses_per_cpi: u32,
    pub cpi_duration_s: f64,
    #[serde(default)]
    pub light_speed: LightSpeed,
}

impl Default for RadarConfig {
    /// 77 GHz carrier, 4 GHz sweep, 0.5 ms chirps (2 kHz PRF), 80 pulses per
    /// 40 ms CPI.
    fn default() -> Self {
        RadarConfig {
            center_frequency_hz: 77.0e9,
            bandwidth_hz: 4.0e9,
            chirp_duration_s: 0.5e-3,
            pulses_per_cpi: 80,
            cpi_duration_s: 80.0 * 0.5e-3,
            light_speed: LightSpeed::Exact,
        }
    }
}

impl RadarConfig {
    pub fn new(
        center_frequency_hz: f64,
        bandwidth_hz: f64,
        chirp_duration_s: f64,
        pulses_per_cpi: u32,
        light_speed: LightSpeed,
    ) -> Result<Self> {
        let config = RadarConfig {
            center_frequency_hz,
            bandwidth_hz,
            chirp_duration_s,
            pulses_per_cpi,
            cpi_duration_s: f64::from(pulses_per_cpi) * chirp_duration_s,
            light_speed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_light_speed(mut self, light_speed: LightSpeed) -> Self {
        self.light_speed = light_speed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.center_frequency_hz) {
            return Err(Error::domain("center frequency must be positive"));
        }
        if !positive(self.bandwidth_hz) {
            return Err(Error::domain("bandwidth must be positive"));
        }
        if !positive(self.chirp_duration_s) {
            return Err(Error::domain("chirp duration must be positive"));
        }
        if self.pulses_per_cpi < 1 {
            return Err(Error::domain("at least one pulse per CPI is required"));
        }
        let expected = f64::from(self.pulses_per_cpi) * self.chirp_duration_s;
        if (self.cpi_duration_s - expected).abs() > 4.0 * f64::EPSILON * expected {
            return Err(Error::domain(format!(
                "CPI duration {} s does not equal {} pulses x {} s",
                self.cpi_duration_s, self.pulses_per_cpi, self.chirp_duration_s
            )));
        }
        Ok(())
    }

    pub fn speed_of_light(&self) -> f64 {
        self.light_speed.mps()
    }

    pub fn slow_time_sample_rate_hz(&self) -> f64 {
        1.0 / self.chirp_duration_s
    }

    /// Chirp slope `k = B / τ` in Hz/s.
    pub fn chirp_slope(&self) -> f64 {
        self.bandwidth_hz / self.chirp_duration_s
    }

    pub fn wavelength_m(&self) -> f64 {
        self.speed_of_light() / self.center_frequency_hz
    }

    /// Width of the unambiguous Doppler interval; equals the PRF.
    pub fn unambiguous_doppler_span_hz(&self) -> f64 {
        self.slow_time_sample_rate_hz()
    }

    /// Largest radial speed whose Doppler shift stays inside `±PRF/2`.
    pub fn max_unambiguous_speed_mps(&self) -> f64 {
        self.wavelength_m() * self.slow_time_sample_rate_hz() / 4.0
    }
}

/// One point scatterer: linear amplitude and a range sample per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct ScattererTrajectory {
    amplitude: f64,
    range_track: Vec<f64>,
}

impl ScattererTrajectory {
    pub fn new(amplitude: f64, range_track: Vec<f64>) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::domain("scatterer amplitude must be finite and >= 0"));
        }
        if let Some(bad) = range_track.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::domain(format!("range sample {bad} is not finite and positive")));
        }
        Ok(ScattererTrajectory {
            amplitude,
            range_track,
        })
    }

    /// Constant-velocity track `R(n) = R0 − v·n·τ` (positive `v` approaches).
    pub fn constant_velocity(
        amplitude: f64,
        initial_range_m: f64,
        radial_velocity_mps: f64,
        pulses: usize,
        pulse_interval_s: f64,
    ) -> Result<Self> {
        let track = (0..pulses)
            .map(|n| initial_range_m - radial_velocity_mps * n as f64 * pulse_interval_s)
            .collect();
        Self::new(amplitude, track)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn range_track(&self) -> &[f64] {
        &self.range_track
    }

    pub fn len(&self) -> usize {
        self.range_track.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range_track.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.amplitude * factor, self.range_track.clone())
    }
}

/// Complex slow-time series `x[t] = I[t] + jQ[t]`, one sample per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct IqSeries {
    samples: Vec<Complex64>,
    sample_interval_s: f64,
    config: RadarConfig,
}

impl IqSeries {
    pub fn new(samples: Vec<Complex64>, config: RadarConfig) -> Result<Self> {
        config.validate()?;
        if samples.is_empty() {
            return Err(Error::shape("IQ series must contain at least one sample"));
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::domain("IQ samples must be finite"));
        }
        Ok(IqSeries {
            samples,
            sample_interval_s: config.chirp_duration_s,
            config,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_interval_s(&self) -> f64 {
        self.sample_interval_s
    }

    pub fn config(&self) -> &RadarConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Multiplies every sample by a complex factor (modulation, scaling).
    pub fn map(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Result<Self> {
        let samples = self.samples.iter().enumerate().map(|(n, &s)| f(n, s)).collect();
        Self::new(samples, self.config)
    }
}

/// Additive circularly-symmetric complex Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Linear noise power `E|n|²`.
    pub power: f64,
    pub seed: u64,
}

/// `exp(j2π(f_c·t + k/2·t²))` for fast time `t` within the chirp.
pub fn transmit_chirp_phase(config: &RadarConfig, fast_time_s: f64) -> Result<Complex64> {
    config.validate()?;
    if !fast_time_s.is_finite() || fast_time_s.abs() > config.chirp_duration_s / 2.0 {
        return Err(Error::domain(format!(
            "fast time {fast_time_s} s lies outside the chirp window ±{} s",
            config.chirp_duration_s / 2.0
        )));
    }
    let cycles = config.center_frequency_hz * fast_time_s
        + 0.5 * config.chirp_slope() * fast_time_s * fast_time_s;
    Ok(unit_phasor(cycles))
}

/// Sums the returns of all scatterers per pulse, optionally adding noise.
pub fn simulate_returns(
    config: &RadarConfig,
    scatterers: &[ScattererTrajectory],
    noise: Option<NoiseSpec>,
) -> Result<IqSeries> {
    config.validate()?;
    let first = scatterers
        .first()
        .ok_or_else(|| Error::shape("at least one scatterer is required"))?;
    let pulses = first.len();
    if pulses == 0 {
        return Err(Error::shape("scatterer tracks must be non-empty"));
    }
    if let Some(bad) = scatterers.iter().find(|s| s.len() != pulses) {
        return Err(Error::shape(format!(
            "range track length {} differs from {pulses}",
            bad.len()
        )));
    }

    // cycles of two-way phase per metre of range
    let cycles_per_m = 2.0 * config.center_frequency_hz / config.speed_of_light();
    let mut samples = vec![Complex64::new(0.0, 0.0); pulses];
    for scatterer in scatterers {
        let a = scatterer.amplitude();
        for (sample, &range) in samples.iter_mut().zip(scatterer.range_track()) {
            *sample += a * unit_phasor(-cycles_per_m * range);
        }
    }

    if let Some(noise) = noise {
        if !(noise.power.is_finite() && noise.power >= 0.0) {
            return Err(Error::domain("noise power must be finite and >= 0"));
        }
        if noise.power > 0.0 {
            let normal = Normal::new(0.0, (noise.power / 2.0).sqrt())
                .map_err(|e| Error::domain(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            for sample in &mut samples {
                *sample += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
    }

    IqSeries::new(samples, *config)
}

/// `Δr = c / 2B`.
pub fn range_resolution(config: &RadarConfig) -> f64 {
    config.speed_of_light() / (2.0 * config.bandwidth_hz)
}

/// `v_res = λ / 2T_f` with `T_f` the CPI duration.
pub fn velocity_resolution(config: &RadarConfig) -> f64 {
    config.wavelength_m() / (2.0 * config.cpi_duration_s)
}

/// `f_D = 2·v_r·f_t / c`; approaching targets (positive `v_r`) give positive shifts.
pub fn doppler_shift(radial_velocity_mps: f64, carrier_hz: f64, light_speed: LightSpeed) -> f64 {
    2.0 * radial_velocity_mps * carrier_hz / light_speed.mps()
}

/// `R = c·τ·f_b / 2B`.
pub fn beat_to_range(beat_hz: f64, config: &RadarConfig) -> f64 {
    config.speed_of_light() * config.chirp_duration_s * beat_hz / (2.0 * config.bandwidth_hz)
}

/// `exp(j2π·cycles)`, reducing whole cycles first to keep the angle small.
fn unit_phasor(cycles: f64) -> Complex64 {
    let frac = cycles - cycles.round();
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}
