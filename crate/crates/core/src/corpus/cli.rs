//! The `mdkin` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 rule
//! configuration error. Diagnostics go to stderr; outputs are written
//! atomically and only after every input has been processed.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use super::records::{
    read_jsonl, read_lexicon, to_jsonl, write_jsonl, ProfileRecord, SignSpecRecord,
};
use super::signature::{read_signature, write_atomic, SignatureFile};
use crate::kinematics::{
    analyze_spectrogram, classify_handedness, corpus_kinematic_stats, normalize_energies,
    AnalysisConfig, ClassStats, HandednessCalibration, PeakConfig, ProfiledSample,
};
use crate::radar::{
    range_resolution, simulate_returns, synth_sign_trajectory, velocity_resolution, LightSpeed,
    NoiseSpec, RadarConfig,
};
use crate::sifter::{
    sift_corpus, ClassBreakdown, KinematicErrors, LabeledSpectrogram, SiftConfig, SiftVerdict,
};
use crate::tf::{stft_spectrogram, StftParams, WindowKind};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_RULE_CONFIG: i32 = 3;

/// Default handedness threshold on max-normalized energy.
pub const DEFAULT_HANDEDNESS_THRESHOLD: f64 = 0.674;

/// Floor added before taking logarithms in `export-plot`.
pub const DB_EPSILON: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "mdkin", version, about = "Micro-Doppler kinematics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate synthetic signs into signature files.
    Simulate(SimulateArgs),
    /// Measure kinematic profiles of signature files.
    Analyze(AnalyzeArgs),
    /// Per-class statistics of a profiles table.
    Stats(StatsArgs),
    /// Sift candidate signatures against a reference corpus.
    Sift(SiftArgs),
    /// Write a dB-scaled text grid of one signature for plotting.
    ExportPlot(ExportPlotArgs),
}

#[derive(Debug, Args)]
struct RadarArgs {
    #[arg(long, default_value_t = 77e9)]
    carrier_hz: f64,
    #[arg(long, default_value_t = 4e9)]
    bandwidth_hz: f64,
    /// Chirp duration; its inverse is the slow-time sample rate.
    #[arg(long, default_value_t = 0.5e-3)]
    chirp_s: f64,
    #[arg(long, default_value_t = 80)]
    pulses_per_cpi: u32,
    /// Use c = 3e8 instead of the exact speed of light.
    #[arg(long)]
    rounded_c: bool,
}

impl RadarArgs {
    fn config(&self) -> Result<RadarConfig> {
        let light = if self.rounded_c {
            LightSpeed::Rounded
        } else {
            LightSpeed::Exact
        };
        RadarConfig::new(
            self.carrier_hz,
            self.bandwidth_hz,
            self.chirp_s,
            self.pulses_per_cpi,
            light,
        )
        .map_err(|e| Error::Usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
struct StftArgs {
    /// hann, hamming, rectangular or gaussian.
    #[arg(long, default_value = "hann")]
    window: String,
    #[arg(long, default_value_t = 64)]
    window_len: usize,
    #[arg(long, default_value_t = 8)]
    hop: usize,
    /// Defaults to the next power of two at or above the window length.
    #[arg(long)]
    fft_len: Option<usize>,
}

impl StftArgs {
    fn params(&self) -> Result<StftParams> {
        Ok(StftParams {
            window: self.window.parse::<WindowKind>()?,
            window_len: self.window_len,
            hop: self.hop,
            fft_len: self.fft_len,
        })
    }
}

#[derive(Debug, Args)]
struct AnalysisArgs {
    /// Envelope threshold as a fraction of the column energy.
    #[arg(long, default_value_t = crate::envelope::DEFAULT_SCALE_FACTOR)]
    alpha: f64,
    /// Width-3 median smoothing of the envelopes.
    #[arg(long)]
    smooth: bool,
    /// Peak height in m/s (default 2 x velocity resolution).
    #[arg(long)]
    min_height: Option<f64>,
    /// Peak prominence in m/s (default 1 x velocity resolution).
    #[arg(long)]
    min_prominence: Option<f64>,
    #[arg(long)]
    min_separation: Option<usize>,
}

impl AnalysisArgs {
    fn config(&self) -> AnalysisConfig {
        let custom = self.min_height.is_some()
            || self.min_prominence.is_some()
            || self.min_separation.is_some();
        let peaks = custom.then(|| {
            let defaults = PeakConfig::for_radar(&RadarConfig::default());
            PeakConfig {
                min_height_mps: self.min_height.unwrap_or(defaults.min_height_mps),
                min_prominence_mps: self.min_prominence.unwrap_or(defaults.min_prominence_mps),
                min_separation_frames: self
                    .min_separation
                    .unwrap_or(defaults.min_separation_frames),
            }
        });
        AnalysisConfig {
            scale_factor: self.alpha,
            median_smoothing: self.smooth,
            peaks,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON-lines file of sign specifications.
    #[arg(long)]
    specs: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Base seed; sample k uses seed + k for its noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    radar: RadarArgs,
    #[command(flatten)]
    stft: StftArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Signature files or directories of `.mdsg` files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Threshold on max-normalized energy for two-handed signs.
    #[arg(long, default_value_t = DEFAULT_HANDEDNESS_THRESHOLD)]
    handedness_threshold: f64,
    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SiftArgs {
    #[arg(long, num_args = 1.., required = true)]
    candidates: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    reference: Vec<PathBuf>,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Fixed threshold on reference-normalized energy; calibrated when absent.
    #[arg(long)]
    handedness_threshold: Option<f64>,
    /// Multiplier on the reference standard deviations of Rules 2 and 3.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
struct ExportPlotArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Values below (max − range) dB are clipped.
    #[arg(long, default_value_t = 60.0)]
    dynamic_range_db: f64,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Stats(a) => stats(&a),
        Command::Sift(a) => sift(&a),
        Command::ExportPlot(a) => export_plot(&a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("mdkin: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => EXIT_USAGE,
        Error::Config(_) | Error::Calibration(_) => EXIT_RULE_CONFIG,
        _ => EXIT_DATA,
    }
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let radar = args.radar.config()?;
    let stft = args.stft.params()?;
    let specs: Vec<SignSpecRecord> = read_jsonl(&args.specs)?;
    for s in &specs {
        if s.sample_id.is_empty() || s.sample_id.contains(['/', '\\']) || s.sample_id.starts_with('.') {
            return Err(Error::Record(format!("unusable sample id {:?}", s.sample_id)));
        }
    }

    let encoded = specs
        .par_iter()
        .enumerate()
        .map(|(k, s)| -> Result<(String, Vec<u8>)> {
            let sign = synth_sign_trajectory(&radar, &s.sign)?;
            let noise = s.noise_power.map(|power| NoiseSpec {
                power,
                seed: args.seed.wrapping_add(k as u64),
            });
            let iq = simulate_returns(&radar, &sign.scatterers, noise)?;
            let spec = stft_spectrogram(&iq, &stft)?;
            let file = SignatureFile::from_spectrogram(&spec, &radar, &s.sample_id, &s.class_label);
            Ok((format!("{}.mdsg", s.sample_id), file.encode()?))
        })
        .collect::<Result<Vec<_>>>()?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    for (name, bytes) in encoded {
        write_atomic(&args.out_dir.join(name), &bytes)?;
    }
    Ok(())
}

/// Expands directories into their `.mdsg` files (sorted); files pass through.
fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "mdsg"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn load_signatures(paths: &[PathBuf]) -> Result<Vec<LabeledSpectrogram>> {
    collect_inputs(paths)?
        .par_iter()
        .map(|p| {
            let file = read_signature(p)?;
            let spectrogram = file.to_spectrogram()?;
            Ok(LabeledSpectrogram {
                sample_id: file.header.sample_id,
                class_label: file.header.class_label,
                radar: file.header.radar,
                spectrogram,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| match e {
            Error::Format(_) | Error::Io { .. } => e,
            other => Error::Record(other.to_string()),
        })
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    if !(args.handedness_threshold > 0.0) {
        return Err(Error::Usage("handedness threshold must be positive".into()));
    }
    let cfg = args.analysis.config();
    let samples = load_signatures(&args.inputs)?;
    let analyses = samples
        .par_iter()
        .map(|s| analyze_spectrogram(&s.spectrogram, &s.radar, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let energies: Vec<f64> = analyses.iter().map(|a| a.total_energy).collect();
    let (normalized, _) = normalize_energies(&energies);

    let records: Vec<ProfileRecord> = samples
        .iter()
        .zip(&analyses)
        .zip(normalized)
        .map(|((s, a), norm)| ProfileRecord {
            profile: a.profile(
                &s.sample_id,
                &s.class_label,
                classify_handedness(norm, args.handedness_threshold),
            ),
            normalized_energy: norm,
            handedness_threshold: args.handedness_threshold,
            range_resolution_m: range_resolution(&s.radar),
            velocity_resolution_mps: velocity_resolution(&s.radar),
            upper_mps: a.upper_mps.clone(),
            lower_mps: a.lower_mps.clone(),
        })
        .collect();
    write_jsonl(&args.out, &records)
}

fn stats(args: &StatsArgs) -> Result<()> {
    let records: Vec<ProfileRecord> = read_jsonl(&args.profiles)?;
    let samples: Vec<ProfiledSample> = records
        .into_iter()
        .map(|r| ProfiledSample {
            matching_series: r.matching_series(),
            profile: r.profile,
        })
        .collect();
    let stats = corpus_kinematic_stats(&samples)?;
    write_jsonl(&args.out, &stats)
}

#[derive(Serialize)]
struct SiftSummary<'a> {
    candidates: usize,
    accepted: usize,
    n_sifted: usize,
    error_speed_mean_mps: Option<f64>,
    error_speed_std_mps: Option<f64>,
    pct_wrong_strokes: f64,
    pct_wrong_handedness: f64,
    pre_sift: &'a KinematicErrors,
    handedness: &'a HandednessCalibration,
    tolerance_scale: f64,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ReportLine<'a> {
    Summary(SiftSummary<'a>),
    ReferenceStats(&'a ClassStats),
    ClassBreakdown(&'a ClassBreakdown),
    Verdict(&'a SiftVerdict),
}

fn sift(args: &SiftArgs) -> Result<()> {
    let lexicon = read_lexicon(&args.lexicon)?;
    let candidates = load_signatures(&args.candidates)?;
    let reference = load_signatures(&args.reference)?;
    let cfg = SiftConfig {
        analysis: args.analysis.config(),
        handedness_threshold: args.handedness_threshold,
        tolerance_scale: args.tolerance_scale,
    };
    let report = sift_corpus(&candidates, &reference, &lexicon, &cfg)?;

    let mut lines = vec![ReportLine::Summary(SiftSummary {
        candidates: report.verdicts.len(),
        accepted: report.accepted_count(),
        n_sifted: report.n_sifted,
        error_speed_mean_mps: report.error_speed_mean_mps,
        error_speed_std_mps: report.error_speed_std_mps,
        pct_wrong_strokes: report.pct_wrong_strokes,
        pct_wrong_handedness: report.pct_wrong_handedness,
        pre_sift: &report.pre_sift,
        handedness: &report.handedness,
        tolerance_scale: report.tolerance_scale,
    })];
    lines.extend(report.reference_stats.iter().map(ReportLine::ReferenceStats));
    lines.extend(report.per_class.iter().map(ReportLine::ClassBreakdown));
    lines.extend(report.verdicts.iter().map(ReportLine::Verdict));
    write_atomic(&args.out, to_jsonl(&lines)?.as_bytes())
}

/// `10·log10(p + ε)` clipped to `[max − range, max]`, one line per Doppler
/// bin (ascending frequency), one value per frame.
pub fn db_grid(file: &SignatureFile, dynamic_range_db: f64) -> Result<String> {
    if !(dynamic_range_db.is_finite() && dynamic_range_db > 0.0) {
        return Err(Error::Usage("dynamic range must be positive".into()));
    }
    let db: Vec<f64> = file
        .payload
        .iter()
        .map(|&p| 10.0 * (f64::from(p) + DB_EPSILON).log10())
        .collect();
    let top = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = top - dynamic_range_db;
    let cols = file.header.cols;
    let mut out = String::with_capacity(db.len() * 9);
    for row in db.chunks(cols.max(1)) {
        let line: Vec<String> = row.iter().map(|v| format!("{:.3}", v.max(floor))).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

fn export_plot(args: &ExportPlotArgs) -> Result<()> {
    let file = read_signature(&args.input)?;
    let grid = db_grid(&file, args.dynamic_range_db)?;
    write_atomic(Path::new(&args.out), grid.as_bytes())
}
