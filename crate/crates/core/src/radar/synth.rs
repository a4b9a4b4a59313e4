use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{RadarConfig, ScattererTrajectory};
use crate::{Error, Result};

/// Parameters of a synthetic sign: a sequence of raised-cosine strokes
/// towards the radar, each followed by a (smaller) retraction lobe.
///
/// The timeline is `lead | (approach, retraction, gap) x strokes | lead`, with
/// the last gap omitted. Approach and retraction lobes share one duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSignSpec {
    pub hands: u8,
    pub strokes: u32,
    pub peak_speed_mps: f64,
    pub duration_s: f64,
    /// Peak retraction speed as a fraction of `peak_speed_mps`; 0 turns the
    /// retraction lobe into a rest.
    pub retraction_ratio: f64,
    /// Rest before the first and after the last stroke.
    pub lead_s: f64,
    /// Rest between consecutive strokes.
    pub gap_s: f64,
    pub hand_amplitude: f64,
    /// Speed of the second hand relative to the first (two-handed signs).
    pub secondary_speed_ratio: f64,
    pub secondary_range_offset_m: f64,
    pub hand_range_m: f64,
    pub torso_amplitude: f64,
    pub torso_range_m: f64,
    /// Per-stroke multipliers of `peak_speed_mps` (approach and retraction);
    /// strokes without an entry use 1.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stroke_scales: Vec<f64>,
}

impl SyntheticSignSpec {
    pub fn stroke_scale(&self, k: usize) -> f64 {
        self.stroke_scales.get(k).copied().unwrap_or(1.0)
    }

    /// Fastest approach speed over all strokes.
    pub fn max_speed_mps(&self) -> f64 {
        (0..self.strokes as usize)
            .map(|k| self.stroke_scale(k))
            .fold(0.0, f64::max)
            * self.peak_speed_mps
    }
}

impl Default for SyntheticSignSpec {
    fn default() -> Self {
        SyntheticSignSpec {
            hands: 1,
            strokes: 1,
            peak_speed_mps: 0.5,
            duration_s: 2.0,
            retraction_ratio: 0.6,
            lead_s: 0.1,
            gap_s: 0.0,
            hand_amplitude: 1.0,
            secondary_speed_ratio: 0.8,
            secondary_range_offset_m: 0.25,
            hand_range_m: 0.6,
            torso_amplitude: 0.05,
            torso_range_m: 0.9,
            stroke_scales: Vec::new(),
        }
    }
}

/// Scatterer tracks of a synthetic sign plus its analytic hand velocities.
#[derive(Debug, Clone)]
pub struct SynthesizedSign {
    pub scatterers: Vec<ScattererTrajectory>,
    pub profile: VelocityProfile,
}

/// Analytic radial velocity of every hand at every pulse (positive towards
/// the radar). The torso is static and not listed.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    sample_interval_s: f64,
    hands: Vec<Vec<f64>>,
}

impl VelocityProfile {
    pub fn hands(&self) -> &[Vec<f64>] {
        &self.hands
    }

    pub fn pulses(&self) -> usize {
        self.hands.first().map_or(0, Vec::len)
    }

    pub fn sample_interval_s(&self) -> f64 {
        self.sample_interval_s
    }

    /// Fastest approach over all hands at pulse `n`.
    pub fn upper_mps(&self, n: usize) -> f64 {
        self.hands.iter().map(|h| h[n]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Fastest recession over all hands at pulse `n`.
    pub fn lower_mps(&self, n: usize) -> f64 {
        self.hands.iter().map(|h| h[n]).fold(f64::INFINITY, f64::min)
    }

    /// True envelope-pair speed `(|upper| + |lower|) / 2` at pulse `n`.
    /// For one hand this is `|v|`; for two same-signed hands it is the mean
    /// of their speeds.
    pub fn envelope_speed(&self, n: usize) -> f64 {
        (self.upper_mps(n).abs() + self.lower_mps(n).abs()) / 2.0
    }

    pub fn mean_envelope_speed(&self) -> f64 {
        let n = self.pulses();
        (0..n).map(|i| self.envelope_speed(i)).sum::<f64>() / n as f64
    }

    /// Mean envelope speed sampled at the pulses nearest to `times_s`.
    pub fn mean_envelope_speed_at(&self, times_s: &[f64]) -> f64 {
        let last = self.pulses().saturating_sub(1);
        let total: f64 = times_s
            .iter()
            .map(|t| {
                let n = (t / self.sample_interval_s).round().max(0.0) as usize;
                self.envelope_speed(n.min(last))
            })
            .sum();
        total / times_s.len() as f64
    }

    /// Number of maximal runs of strictly positive velocity of the first hand.
    pub fn positive_lobes(&self) -> usize {
        let Some(primary) = self.hands.first() else {
            return 0;
        };
        let mut lobes = 0;
        let mut inside = false;
        for &v in primary {
            if v > 0.0 && !inside {
                lobes += 1;
            }
            inside = v > 0.0;
        }
        lobes
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start_s: f64,
    len_s: f64,
    /// Signed peak speed; zero for rests.
    peak_mps: f64,
}

impl Segment {
    fn velocity(&self, s: f64) -> f64 {
        self.peak_mps * (1.0 - (2.0 * PI * s / self.len_s).cos()) / 2.0
    }

    /// Distance travelled towards the radar after `s` seconds in the segment.
    fn displacement(&self, s: f64) -> f64 {
        self.peak_mps / 2.0 * (s - self.len_s / (2.0 * PI) * (2.0 * PI * s / self.len_s).sin())
    }
}

fn timeline(spec: &SyntheticSignSpec) -> Result<Vec<Segment>> {
    let strokes = spec.strokes as f64;
    let active = spec.duration_s - 2.0 * spec.lead_s - (strokes - 1.0) * spec.gap_s;
    if !(active > 0.0) {
        return Err(Error::domain(format!(
            "duration {} s leaves no time for {} strokes",
            spec.duration_s, spec.strokes
        )));
    }
    let lobe = active / strokes / 2.0;
    let mut segments = Vec::with_capacity(3 * spec.strokes as usize);
    let mut t = spec.lead_s;
    for k in 0..spec.strokes {
        let peak = spec.stroke_scale(k as usize) * spec.peak_speed_mps;
        segments.push(Segment {
            start_s: t,
            len_s: lobe,
            peak_mps: peak,
        });
        t += lobe;
        segments.push(Segment {
            start_s: t,
            len_s: lobe,
            peak_mps: -spec.retraction_ratio * peak,
        });
        t += lobe;
        if k + 1 < spec.strokes {
            t += spec.gap_s;
        }
    }
    Ok(segments)
}

fn validate(config: &RadarConfig, spec: &SyntheticSignSpec) -> Result<()> {
    if !(spec.hands == 1 || spec.hands == 2) {
        return Err(Error::domain(format!("hands must be 1 or 2, got {}", spec.hands)));
    }
    if spec.strokes < 1 {
        return Err(Error::domain("a sign needs at least one stroke"));
    }
    let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
    if !(spec.peak_speed_mps.is_finite() && spec.peak_speed_mps > 0.0) {
        return Err(Error::domain("peak speed must be positive"));
    }
    if spec.stroke_scales.len() > spec.strokes as usize {
        return Err(Error::domain("more stroke scales than strokes"));
    }
    if spec.stroke_scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::domain("stroke scales must be positive"));
    }
    if spec.max_speed_mps() >= config.max_unambiguous_speed_mps() {
        return Err(Error::domain(format!(
            "peak speed {} m/s exceeds the unambiguous speed {} m/s",
            spec.max_speed_mps(),
            config.max_unambiguous_speed_mps()
        )));
    }
    if !(spec.duration_s.is_finite() && spec.duration_s > 0.0) {
        return Err(Error::domain("duration must be positive"));
    }
    if !(0.0..=1.0).contains(&spec.retraction_ratio) {
        return Err(Error::domain("retraction ratio must lie in [0, 1]"));
    }
    if !(spec.secondary_speed_ratio > 0.0 && spec.secondary_speed_ratio <= 1.0) {
        return Err(Error::domain("secondary speed ratio must lie in (0, 1]"));
    }
    for (name, v) in [
        ("lead", spec.lead_s),
        ("gap", spec.gap_s),
        ("hand amplitude", spec.hand_amplitude),
        ("torso amplitude", spec.torso_amplitude),
        ("secondary range offset", spec.secondary_range_offset_m),
    ] {
        if !finite_nonneg(v) {
            return Err(Error::domain(format!("{name} must be finite and >= 0")));
        }
    }
    if !(spec.hand_range_m > 0.0 && spec.torso_range_m > 0.0) {
        return Err(Error::domain("ranges must be positive"));
    }
    Ok(())
}

/// Builds the scatterer tracks of a synthetic sign: one or two moving hands
/// plus a static torso. The analytic velocity profile is returned alongside
/// for use as ground truth.
pub fn synth_sign_trajectory(
    config: &RadarConfig,
    spec: &SyntheticSignSpec,
) -> Result<SynthesizedSign> {
    config.validate()?;
    validate(config, spec)?;
    let segments = timeline(spec)?;
    let tau = config.chirp_duration_s;
    let pulses = (spec.duration_s / tau).round() as usize;
    if pulses == 0 {
        return Err(Error::domain("duration is shorter than one pulse"));
    }

    let mut velocity = Vec::with_capacity(pulses);
    let mut displacement = Vec::with_capacity(pulses);
    let mut seg = 0;
    let mut done = 0.0;
    for n in 0..pulses {
        let t = n as f64 * tau;
        while seg < segments.len() && t >= segments[seg].start_s + segments[seg].len_s {
            done += segments[seg].displacement(segments[seg].len_s);
            seg += 1;
        }
        match segments.get(seg) {
            Some(s) if t >= s.start_s => {
                let local = t - s.start_s;
                velocity.push(s.velocity(local));
                displacement.push(done + s.displacement(local));
            }
            _ => {
                velocity.push(0.0);
                displacement.push(done);
            }
        }
    }

    let mut hands = vec![velocity.clone()];
    let mut scatterers = Vec::with_capacity(3);
    let primary: Vec<f64> = displacement.iter().map(|d| spec.hand_range_m - d).collect();
    scatterers.push(ScattererTrajectory::new(spec.hand_amplitude, primary)?);
    if spec.hands == 2 {
        let ratio = spec.secondary_speed_ratio;
        let start = spec.hand_range_m + spec.secondary_range_offset_m;
        let track: Vec<f64> = displacement.iter().map(|d| start - ratio * d).collect();
        scatterers.push(ScattererTrajectory::new(spec.hand_amplitude, track)?);
        hands.push(velocity.iter().map(|v| ratio * v).collect());
    }
    scatterers.push(ScattererTrajectory::new(
        spec.torso_amplitude,
        vec![spec.torso_range_m; pulses],
    )?);

    Ok(SynthesizedSign {
        scatterers,
        profile: VelocityProfile {
            sample_interval_s: tau,
            hands,
        },
    })
}
