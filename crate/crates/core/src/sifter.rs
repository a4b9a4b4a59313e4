//! Kinematic sifting of candidate (synthetic) signatures against a
//! reference corpus.
//!
//! Rule 1: detected stroke count equals the lexicon's count.
//! Rule 2: total energy within `±s·std` of the reference class mean.
//! Rule 3: mean DTW distance to the reference samples within `±s·std` of the
//! reference class's mean pairwise DTW distance.
//!
//! `s` is the tolerance scale (1 by default) and both bounds are inclusive.
//! All three rules are always evaluated so every verdict carries full
//! diagnostics.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtw::dtw_cost;
use crate::kinematics::{
    analyze_spectrogram, calibrate_threshold, class_stats, normalize_energies, summarize_values,
    AnalysisConfig, ClassStats, Handedness, HandednessCalibration, KinematicProfile,
    ProfiledSample, SampleAnalysis,
};
use crate::radar::RadarConfig;
use crate::tf::Spectrogram;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignLexeme {
    pub gloss: String,
    #[serde(rename = "handedness")]
    pub expected_handedness: Handedness,
    #[serde(rename = "strokes")]
    pub expected_strokes: u32,
}

/// Sign lexicon keyed by gloss.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, SignLexeme>,
}

impl Lexicon {
    pub fn new(entries: impl IntoIterator<Item = SignLexeme>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for e in entries {
            if e.gloss.is_empty() {
                return Err(Error::Record("lexicon gloss must be non-empty".into()));
            }
            if e.expected_strokes < 1 {
                return Err(Error::Record(format!("gloss {:?} must have at least one stroke", e.gloss)));
            }
            if map.contains_key(&e.gloss) {
                return Err(Error::Record(format!("duplicate gloss {:?}", e.gloss)));
            }
            map.insert(e.gloss.clone(), e);
        }
        Ok(Lexicon { entries: map })
    }

    pub fn get(&self, gloss: &str) -> Option<&SignLexeme> {
        self.entries.get(gloss)
    }

    pub fn entries(&self) -> impl Iterator<Item = &SignLexeme> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A spectrogram with the identity and radar metadata needed for analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSpectrogram {
    pub sample_id: String,
    pub class_label: String,
    pub radar: RadarConfig,
    pub spectrogram: Spectrogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiftConfig {
    pub analysis: AnalysisConfig,
    /// Threshold on reference-max-normalized energy; `None` calibrates it on
    /// the reference corpus against the lexicon.
    pub handedness_threshold: Option<f64>,
    /// Multiplier on the reference std for Rules 2 and 3.
    pub tolerance_scale: f64,
}

impl Default for SiftConfig {
    fn default() -> Self {
        SiftConfig {
            analysis: AnalysisConfig::default(),
            handedness_threshold: None,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiftVerdict {
    pub sample_id: String,
    pub class_label: String,
    pub rule1_pass: bool,
    pub rule2_pass: bool,
    pub rule3_pass: bool,
    pub accepted: bool,
    pub measured_profile: Option<KinematicProfile>,
    /// Mean DTW distance to the reference samples of the class.
    pub mean_reference_dtw: Option<f64>,
    /// Set when the sample could not be evaluated (e.g. unknown class).
    pub error: Option<String>,
}

impl SiftVerdict {
    fn failed(sample_id: &str, class_label: &str, error: String) -> Self {
        SiftVerdict {
            sample_id: sample_id.to_string(),
            class_label: class_label.to_string(),
            rule1_pass: false,
            rule2_pass: false,
            rule3_pass: false,
            accepted: false,
            measured_profile: None,
            mean_reference_dtw: None,
            error: Some(error),
        }
    }
}

/// Kinematic error metrics over a set of evaluated samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicErrors {
    pub sample_count: usize,
    /// Mean of `|V_h − reference class mean V_h|`.
    pub speed_error_mean_mps: Option<f64>,
    pub speed_error_std_mps: Option<f64>,
    pub pct_wrong_strokes: f64,
    pub pct_wrong_handedness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassBreakdown {
    pub class_label: String,
    pub candidates: usize,
    pub accepted: usize,
    pub rule1_failures: usize,
    pub rule2_failures: usize,
    pub rule3_failures: usize,
    pub errors: usize,
}

/// Outcome of sifting a candidate corpus. The top-level error metrics are
/// measured on the accepted samples; `pre_sift` holds the same metrics over
/// every evaluable candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiftReport {
    pub verdicts: Vec<SiftVerdict>,
    pub n_sifted: usize,
    pub error_speed_mean_mps: Option<f64>,
    pub error_speed_std_mps: Option<f64>,
    pub pct_wrong_strokes: f64,
    pub pct_wrong_handedness: f64,
    pub pre_sift: KinematicErrors,
    pub per_class: Vec<ClassBreakdown>,
    pub reference_stats: Vec<ClassStats>,
    pub handedness: HandednessCalibration,
    pub tolerance_scale: f64,
}

impl SiftReport {
    pub fn accepted_count(&self) -> usize {
        self.verdicts.iter().filter(|v| v.accepted).count()
    }
}

pub fn rule_strokes(profile: &KinematicProfile, lexeme: &SignLexeme) -> Result<bool> {
    if profile.class_label != lexeme.gloss {
        return Err(Error::Usage(format!(
            "profile of class {:?} checked against gloss {:?}",
            profile.class_label, lexeme.gloss
        )));
    }
    Ok(profile.stroke_count == lexeme.expected_strokes)
}

fn within(value: f64, mean: f64, half_width: f64) -> bool {
    (value - mean).abs() <= half_width
}

pub fn rule_energy(profile: &KinematicProfile, stats: &ClassStats) -> Result<bool> {
    rule_energy_with_tolerance(profile, stats, 1.0)
}

pub fn rule_energy_with_tolerance(
    profile: &KinematicProfile,
    stats: &ClassStats,
    tolerance_scale: f64,
) -> Result<bool> {
    let std = stats.std_total_energy.ok_or_else(|| {
        Error::Config(format!(
            "energy spread of reference class {:?} is undefined ({} sample)",
            stats.class_label, stats.sample_count
        ))
    })?;
    Ok(within(profile.total_energy, stats.mean_total_energy, tolerance_scale * std))
}

/// Mean DTW distance from `candidate` to every reference curve.
pub fn mean_reference_distance<S: AsRef<[f64]> + Sync>(
    candidate: &[f64],
    references: &[S],
) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::Config("envelope rule needs reference samples".into()));
    }
    let distances = references
        .par_iter()
        .map(|r| dtw_cost(candidate, r.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(distances.iter().sum::<f64>() / distances.len() as f64)
}

pub fn rule_envelope<S: AsRef<[f64]> + Sync>(
    candidate: &[f64],
    references: &[S],
    stats: &ClassStats,
) -> Result<bool> {
    rule_envelope_with_tolerance(candidate, references, stats, 1.0)
}

pub fn rule_envelope_with_tolerance<S: AsRef<[f64]> + Sync>(
    candidate: &[f64],
    references: &[S],
    stats: &ClassStats,
    tolerance_scale: f64,
) -> Result<bool> {
    let (mean, std) = dtw_band(stats)?;
    let d = mean_reference_distance(candidate, references)?;
    Ok(within(d, mean, tolerance_scale * std))
}

fn dtw_band(stats: &ClassStats) -> Result<(f64, f64)> {
    match (stats.mean_dtw, stats.std_dtw) {
        (Some(m), Some(s)) => Ok((m, s)),
        _ => Err(Error::Config(format!(
            "DTW statistics of reference class {:?} are undefined ({} sample)",
            stats.class_label, stats.sample_count
        ))),
    }
}

struct ReferenceClass {
    stats: ClassStats,
    series: Vec<Vec<f64>>,
}

fn analyze_all(
    samples: &[LabeledSpectrogram],
    cfg: &AnalysisConfig,
) -> Vec<Result<SampleAnalysis>> {
    samples
        .par_iter()
        .map(|s| analyze_spectrogram(&s.spectrogram, &s.radar, cfg))
        .collect()
}

fn kinematic_errors<'a>(
    evaluated: impl Iterator<Item = (&'a KinematicProfile, &'a SignLexeme, &'a ClassStats)>,
) -> KinematicErrors {
    let mut speed_errors = Vec::new();
    let (mut wrong_strokes, mut wrong_hands) = (0usize, 0usize);
    for (profile, lexeme, stats) in evaluated {
        speed_errors.push((profile.avg_speed_mps - stats.mean_speed_mps).abs());
        wrong_strokes += usize::from(profile.stroke_count != lexeme.expected_strokes);
        wrong_hands += usize::from(profile.handedness != lexeme.expected_handedness);
    }
    let n = speed_errors.len();
    let pct = |k: usize| if n == 0 { 0.0 } else { 100.0 * k as f64 / n as f64 };
    let summary = summarize_values(&speed_errors);
    KinematicErrors {
        sample_count: n,
        speed_error_mean_mps: summary.map(|s| s.0),
        speed_error_std_mps: summary.and_then(|s| s.1),
        pct_wrong_strokes: pct(wrong_strokes),
        pct_wrong_handedness: pct(wrong_hands),
    }
}

/// Runs spectrogram → envelopes → profile on every candidate and applies the
/// three rules against statistics of the reference corpus.
///
/// Candidates whose class is missing from the lexicon or the reference
/// corpus get an error verdict. A reference class with fewer than two
/// samples that candidates need is a configuration error for the whole run.
pub fn sift_corpus(
    candidates: &[LabeledSpectrogram],
    reference: &[LabeledSpectrogram],
    lexicon: &Lexicon,
    cfg: &SiftConfig,
) -> Result<SiftReport> {
    if !(cfg.tolerance_scale.is_finite() && cfg.tolerance_scale > 0.0) {
        return Err(Error::Config("tolerance scale must be positive".into()));
    }

    let ref_analyses = analyze_all(reference, &cfg.analysis)
        .into_iter()
        .zip(reference)
        .map(|(a, s)| a.map_err(|e| Error::Record(format!("reference {:?}: {e}", s.sample_id))))
        .collect::<Result<Vec<_>>>()?;

    // handedness threshold lives on the reference-max-normalized scale
    let (_, energy_scale) =
        normalize_energies(&ref_analyses.iter().map(|a| a.total_energy).collect::<Vec<_>>());
    let handedness = match cfg.handedness_threshold {
        Some(threshold) => {
            if !(threshold.is_finite() && threshold > 0.0) {
                return Err(Error::Config("handedness threshold must be positive".into()));
            }
            HandednessCalibration {
                threshold,
                accuracy: None,
                energy_scale,
            }
        }
        None => {
            let points: Vec<(f64, Handedness)> = ref_analyses
                .iter()
                .zip(reference)
                .filter_map(|(a, s)| {
                    lexicon
                        .get(&s.class_label)
                        .map(|l| (a.total_energy / energy_scale, l.expected_handedness))
                })
                .collect();
            let (threshold, accuracy) = calibrate_threshold(&points)?;
            HandednessCalibration {
                threshold,
                accuracy: Some(accuracy),
                energy_scale,
            }
        }
    };

    let ref_samples: Vec<ProfiledSample> = ref_analyses
        .iter()
        .zip(reference)
        .map(|(a, s)| ProfiledSample {
            profile: a.profile(&s.sample_id, &s.class_label, handedness.classify(a.total_energy)),
            matching_series: a.matching_series(),
        })
        .collect();

    let mut grouped: BTreeMap<&str, Vec<&ProfiledSample>> = BTreeMap::new();
    for s in &ref_samples {
        grouped.entry(s.profile.class_label.as_str()).or_default().push(s);
    }
    let classes: BTreeMap<String, ReferenceClass> = grouped
        .into_iter()
        .map(|(label, members)| {
            Ok((
                label.to_string(),
                ReferenceClass {
                    stats: class_stats(label, &members)?,
                    series: members.iter().map(|m| m.matching_series.clone()).collect(),
                },
            ))
        })
        .collect::<Result<_>>()?;

    let needed: HashSet<&str> = candidates.iter().map(|c| c.class_label.as_str()).collect();
    for label in needed {
        if let Some(class) = classes.get(label) {
            if class.stats.sample_count < 2 {
                return Err(Error::Config(format!(
                    "reference class {label:?} has {} sample; at least 2 are required",
                    class.stats.sample_count
                )));
            }
        }
    }

    let s = cfg.tolerance_scale;
    let verdicts: Vec<SiftVerdict> = candidates
        .par_iter()
        .map(|cand| -> Result<SiftVerdict> {
            let (id, label) = (cand.sample_id.as_str(), cand.class_label.as_str());
            let Some(lexeme) = lexicon.get(label) else {
                return Ok(SiftVerdict::failed(id, label, format!("class {label:?} not in lexicon")));
            };
            let Some(class) = classes.get(label) else {
                return Ok(SiftVerdict::failed(
                    id,
                    label,
                    format!("class {label:?} has no reference samples"),
                ));
            };
            let analysis = match analyze_spectrogram(&cand.spectrogram, &cand.radar, &cfg.analysis) {
                Ok(a) => a,
                Err(e) => return Ok(SiftVerdict::failed(id, label, e.to_string())),
            };
            let profile = analysis.profile(id, label, handedness.classify(analysis.total_energy));

            let rule1_pass = rule_strokes(&profile, lexeme)?;
            let rule2_pass = rule_energy_with_tolerance(&profile, &class.stats, s)?;
            let (dtw_mean, dtw_std) = dtw_band(&class.stats)?;
            let distance = mean_reference_distance(&analysis.matching_series(), &class.series)?;
            let rule3_pass = within(distance, dtw_mean, s * dtw_std);

            Ok(SiftVerdict {
                sample_id: id.to_string(),
                class_label: label.to_string(),
                rule1_pass,
                rule2_pass,
                rule3_pass,
                accepted: rule1_pass && rule2_pass && rule3_pass,
                measured_profile: Some(profile),
                mean_reference_dtw: Some(distance),
                error: None,
            })
        })
        .collect::<Result<_>>()?;

    let evaluated = |accepted_only: bool| {
        verdicts
            .iter()
            .filter(move |v| !accepted_only || v.accepted)
            .filter_map(|v| {
                let p = v.measured_profile.as_ref()?;
                let lexeme = lexicon.get(&v.class_label)?;
                let class = classes.get(&v.class_label)?;
                Some((p, lexeme, &class.stats))
            })
    };
    let pre_sift = kinematic_errors(evaluated(false));
    let post_sift = kinematic_errors(evaluated(true));

    let mut breakdown: BTreeMap<&str, ClassBreakdown> = BTreeMap::new();
    for v in &verdicts {
        let b = breakdown.entry(v.class_label.as_str()).or_insert_with(|| ClassBreakdown {
            class_label: v.class_label.clone(),
            candidates: 0,
            accepted: 0,
            rule1_failures: 0,
            rule2_failures: 0,
            rule3_failures: 0,
            errors: 0,
        });
        b.candidates += 1;
        b.accepted += usize::from(v.accepted);
        if v.error.is_some() {
            b.errors += 1;
        } else {
            b.rule1_failures += usize::from(!v.rule1_pass);
            b.rule2_failures += usize::from(!v.rule2_pass);
            b.rule3_failures += usize::from(!v.rule3_pass);
        }
    }

    Ok(SiftReport {
        n_sifted: verdicts.iter().filter(|v| !v.accepted).count(),
        error_speed_mean_mps: post_sift.speed_error_mean_mps,
        error_speed_std_mps: post_sift.speed_error_std_mps,
        pct_wrong_strokes: post_sift.pct_wrong_strokes,
        pct_wrong_handedness: post_sift.pct_wrong_handedness,
        pre_sift,
        per_class: breakdown.into_values().collect(),
        reference_stats: classes.into_values().map(|c| c.stats).collect(),
        handedness,
        tolerance_scale: s,
        verdicts,
    })
}
