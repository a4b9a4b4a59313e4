//! Sign kinematics: average hand speed, stroke count and handedness, plus
//! the per-class reference statistics used by the sifting rules.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dtw::{pairwise_dtw_stats, summarize};
use crate::envelope::{extract_envelopes, EnvelopePair, DEFAULT_SCALE_FACTOR};
use crate::radar::{velocity_resolution, LightSpeed, RadarConfig};
use crate::sifter::Lexicon;
use crate::tf::{total_energy, Spectrogram};
use crate::{Error, Result};

/// One- or two-handed. Serialized as the integers 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Handedness {
    One,
    Two,
}

impl TryFrom<u8> for Handedness {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Handedness::One),
            2 => Ok(Handedness::Two),
            _ => Err(format!("handedness must be 1 or 2, got {v}")),
        }
    }
}

impl From<Handedness> for u8 {
    fn from(h: Handedness) -> u8 {
        match h {
            Handedness::One => 1,
            Handedness::Two => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicProfile {
    pub sample_id: String,
    pub class_label: String,
    pub avg_speed_mps: f64,
    pub stroke_count: u32,
    pub handedness: Handedness,
    /// Linear total spectrogram energy, before any corpus normalization.
    pub total_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakConfig {
    pub min_height_mps: f64,
    pub min_prominence_mps: f64,
    pub min_separation_frames: usize,
}

impl PeakConfig {
    /// 2·v_res height, 1·v_res prominence, 4 frames apart.
    pub fn for_radar(config: &RadarConfig) -> Self {
        let v_res = velocity_resolution(config);
        PeakConfig {
            min_height_mps: 2.0 * v_res,
            min_prominence_mps: v_res,
            min_separation_frames: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_height_mps >= 0.0 && self.min_prominence_mps >= 0.0) {
            return Err(Error::domain("peak thresholds must be >= 0"));
        }
        Ok(())
    }
}

/// Indices of the peaks of `xs` that pass `cfg`, in ascending order.
///
/// A peak is a sample (or the first sample of a flat run) strictly above
/// both neighbours' levels, strictly higher than `min_height`, with
/// topographic prominence of at least `min_prominence`. When two peaks are
/// closer than `min_separation_frames`, the higher one (earlier on ties) is
/// kept. End points are never peaks.
pub fn find_peaks(xs: &[f64], cfg: &PeakConfig) -> Vec<usize> {
    let n = xs.len();
    let mut candidates = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if xs[i - 1] < xs[i] {
            let mut end = i;
            while end + 1 < n && xs[end + 1] == xs[i] {
                end += 1;
            }
            if end + 1 < n && xs[end + 1] < xs[i] {
                candidates.push(i);
            }
            i = end + 1;
        } else {
            i += 1;
        }
    }

    let mut kept: Vec<usize> = candidates
        .into_iter()
        .filter(|&p| xs[p] > cfg.min_height_mps)
        .filter(|&p| prominence(xs, p) >= cfg.min_prominence_mps)
        .collect();

    if cfg.min_separation_frames > 1 && kept.len() > 1 {
        let mut by_height = kept.clone();
        by_height.sort_by(|&a, &b| xs[b].total_cmp(&xs[a]).then(a.cmp(&b)));
        let mut chosen: Vec<usize> = Vec::with_capacity(by_height.len());
        for p in by_height {
            if chosen.iter().all(|&q| p.abs_diff(q) >= cfg.min_separation_frames) {
                chosen.push(p);
            }
        }
        chosen.sort_unstable();
        kept = chosen;
    }
    kept
}

/// Height above the higher of the two lowest points reached before meeting
/// strictly higher ground on either side.
fn prominence(xs: &[f64], p: usize) -> f64 {
    let peak = xs[p];
    let mut left_min = peak;
    for &x in xs[..p].iter().rev() {
        if x > peak {
            break;
        }
        left_min = left_min.min(x);
    }
    let mut right_min = peak;
    for &x in &xs[p + 1..] {
        if x > peak {
            break;
        }
        right_min = right_min.min(x);
    }
    peak - left_min.max(right_min)
}

/// `V_h`: mean over frames of `(|v_upper| + |v_lower|) / 2`.
pub fn average_hand_speed(env: &EnvelopePair, carrier_hz: f64, light: LightSpeed) -> Result<f64> {
    if env.is_empty() {
        return Err(Error::domain("envelope is empty"));
    }
    let up = env.upper_mps(carrier_hz, light);
    let low = env.lower_mps(carrier_hz, light);
    let sum: f64 = up.iter().zip(&low).map(|(u, l)| (u.abs() + l.abs()) / 2.0).sum();
    Ok(sum / env.len() as f64)
}

/// Number of positive peaks of the upper-envelope velocity.
pub fn count_strokes(
    env: &EnvelopePair,
    carrier_hz: f64,
    light: LightSpeed,
    cfg: &PeakConfig,
) -> usize {
    find_peaks(&env.upper_mps(carrier_hz, light), cfg).len()
}

/// Two-handed when the (normalized) energy reaches the threshold.
pub fn classify_handedness(total_energy: f64, threshold: f64) -> Handedness {
    if total_energy >= threshold {
        Handedness::Two
    } else {
        Handedness::One
    }
}

/// Divides energies by their maximum. Returns the normalized values and the
/// divisor (1 when every energy is zero).
pub fn normalize_energies(energies: &[f64]) -> (Vec<f64>, f64) {
    let max = energies.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { max } else { 1.0 };
    (energies.iter().map(|e| e / scale).collect(), scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandednessCalibration {
    /// Threshold on max-normalized energy.
    pub threshold: f64,
    /// Training accuracy in `[0, 1]`; `None` when the threshold was supplied
    /// rather than calibrated.
    pub accuracy: Option<f64>,
    /// Divisor that maps raw energies onto the normalized scale.
    pub energy_scale: f64,
}

impl HandednessCalibration {
    pub fn classify(&self, raw_energy: f64) -> Handedness {
        classify_handedness(raw_energy / self.energy_scale, self.threshold)
    }
}

/// Scans the midpoints between consecutive distinct energies (plus one
/// threshold below and one above all values) and keeps the one with the
/// best 0/1 accuracy; ties go to the smallest threshold.
///
/// Energies must already be on the scale the threshold will be used on.
pub fn calibrate_threshold(points: &[(f64, Handedness)]) -> Result<(f64, f64)> {
    let ones = points.iter().filter(|p| p.1 == Handedness::One).count();
    let twos = points.len() - ones;
    if ones == 0 || twos == 0 {
        return Err(Error::Calibration(
            "calibration needs samples of both handedness classes".into(),
        ));
    }
    if points.iter().any(|p| !(p.0.is_finite() && p.0 >= 0.0)) {
        return Err(Error::Calibration("energies must be finite and >= 0".into()));
    }

    let mut sorted: Vec<(f64, Handedness)> = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lowest = sorted[0].0;
    let highest = sorted[sorted.len() - 1].0;

    let mut candidates = vec![if lowest > 0.0 { lowest } else { f64::MIN_POSITIVE }];
    for w in sorted.windows(2) {
        if w[1].0 > w[0].0 {
            candidates.push((w[0].0 + w[1].0) / 2.0);
        }
    }
    candidates.push(if highest > 0.0 { 2.0 * highest } else { 1.0 });

    let total = points.len() as f64;
    let mut best = (f64::INFINITY, -1.0);
    for &t in &candidates {
        let correct = sorted
            .iter()
            .filter(|(e, h)| classify_handedness(*e, t) == *h)
            .count() as f64;
        let acc = correct / total;
        if acc > best.1 || (acc == best.1 && t < best.0) {
            best = (t, acc);
        }
    }
    Ok(best)
}

/// Max-normalizes the profiles' energies and calibrates against the
/// lexicon's handedness labels. Profiles whose class is missing from the
/// lexicon are ignored.
pub fn calibrate_handedness_threshold(
    profiles: &[KinematicProfile],
    lexicon: &Lexicon,
) -> Result<HandednessCalibration> {
    let labelled: Vec<(f64, Handedness)> = profiles
        .iter()
        .filter_map(|p| lexicon.get(&p.class_label).map(|l| (p.total_energy, l.expected_handedness)))
        .collect();
    let energies: Vec<f64> = labelled.iter().map(|p| p.0).collect();
    let (normalized, energy_scale) = normalize_energies(&energies);
    let points: Vec<(f64, Handedness)> = normalized
        .into_iter()
        .zip(labelled.iter().map(|p| p.1))
        .collect();
    let (threshold, accuracy) = calibrate_threshold(&points)?;
    Ok(HandednessCalibration {
        threshold,
        accuracy: Some(accuracy),
        energy_scale,
    })
}

/// Per-class reference statistics. `None` marks a spread that is undefined
/// because the class has fewer than two samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class_label: String,
    pub sample_count: usize,
    pub mean_total_energy: f64,
    pub std_total_energy: Option<f64>,
    pub mean_dtw: Option<f64>,
    pub std_dtw: Option<f64>,
    pub mean_speed_mps: f64,
    pub std_speed_mps: Option<f64>,
}

/// A profile together with the curve used for envelope matching.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfiledSample {
    pub profile: KinematicProfile,
    pub matching_series: Vec<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.len() >= 2)
        .then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

/// Statistics for one class; `samples` must all share `class_label`.
pub fn class_stats(class_label: &str, samples: &[&ProfiledSample]) -> Result<ClassStats> {
    if samples.is_empty() {
        return Err(Error::domain(format!("class {class_label:?} has no samples")));
    }
    let energies: Vec<f64> = samples.iter().map(|s| s.profile.total_energy).collect();
    let speeds: Vec<f64> = samples.iter().map(|s| s.profile.avg_speed_mps).collect();
    let (mean_total_energy, std_total_energy) = mean_std(&energies);
    let (mean_speed_mps, std_speed_mps) = mean_std(&speeds);
    let (mean_dtw, std_dtw) = if samples.len() >= 2 {
        let series: Vec<&[f64]> = samples.iter().map(|s| s.matching_series.as_slice()).collect();
        let d = pairwise_dtw_stats(&series)?;
        (Some(d.mean), Some(d.std))
    } else {
        (None, None)
    };
    Ok(ClassStats {
        class_label: class_label.to_string(),
        sample_count: samples.len(),
        mean_total_energy,
        std_total_energy,
        mean_dtw,
        std_dtw,
        mean_speed_mps,
        std_speed_mps,
    })
}

/// Per-class statistics, ordered by class label.
pub fn corpus_kinematic_stats(samples: &[ProfiledSample]) -> Result<Vec<ClassStats>> {
    let mut groups: BTreeMap<&str, Vec<&ProfiledSample>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.profile.class_label.as_str()).or_default().push(s);
    }
    groups
        .into_iter()
        .map(|(label, members)| class_stats(label, &members))
        .collect()
}

/// Mean and sample std of a set of values (`None` std below two values).
pub fn summarize_values(xs: &[f64]) -> Option<(f64, Option<f64>)> {
    if xs.is_empty() {
        return None;
    }
    let s = summarize(xs);
    Some((s.mean, (xs.len() >= 2).then_some(s.std)))
}

/// Envelope-analysis knobs shared by the CLI and the sifter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub scale_factor: f64,
    pub median_smoothing: bool,
    /// `None` uses [`PeakConfig::for_radar`].
    pub peaks: Option<PeakConfig>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            scale_factor: DEFAULT_SCALE_FACTOR,
            median_smoothing: false,
            peaks: None,
        }
    }
}

/// Everything measured on one spectrogram before corpus-level steps
/// (energy normalization, handedness) are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleAnalysis {
    pub envelopes: EnvelopePair,
    pub upper_mps: Vec<f64>,
    pub lower_mps: Vec<f64>,
    pub avg_speed_mps: f64,
    pub stroke_count: u32,
    pub total_energy: f64,
}

impl SampleAnalysis {
    pub fn matching_series(&self) -> Vec<f64> {
        let mut s = self.upper_mps.clone();
        s.extend_from_slice(&self.lower_mps);
        s
    }

    pub fn profile(
        &self,
        sample_id: impl Into<String>,
        class_label: impl Into<String>,
        handedness: Handedness,
    ) -> KinematicProfile {
        KinematicProfile {
            sample_id: sample_id.into(),
            class_label: class_label.into(),
            avg_speed_mps: self.avg_speed_mps,
            stroke_count: self.stroke_count,
            handedness,
            total_energy: self.total_energy,
        }
    }
}

pub fn analyze_spectrogram(
    spec: &Spectrogram,
    radar: &RadarConfig,
    cfg: &AnalysisConfig,
) -> Result<SampleAnalysis> {
    radar.validate()?;
    let peaks = cfg.peaks.unwrap_or_else(|| PeakConfig::for_radar(radar));
    peaks.validate()?;
    let mut envelopes = extract_envelopes(spec, cfg.scale_factor)?;
    if cfg.median_smoothing {
        envelopes = envelopes.median_smoothed();
    }
    let (fc, light) = (radar.center_frequency_hz, radar.light_speed);
    let avg_speed_mps = average_hand_speed(&envelopes, fc, light)?;
    let stroke_count = count_strokes(&envelopes, fc, light, &peaks) as u32;
    Ok(SampleAnalysis {
        upper_mps: envelopes.upper_mps(fc, light),
        lower_mps: envelopes.lower_mps(fc, light),
        envelopes,
        avg_speed_mps,
        stroke_count,
        total_energy: total_energy(spec),
    })
}
