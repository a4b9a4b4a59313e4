//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL ...` line
//! and then asserts, so `cargo test --test acceptance -- --nocapture` gives
//! a one-line-per-criterion summary.

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use mdkin::corpus::signature::{FormatError, SignatureFile, SignatureHeader, FORMAT_VERSION, MAGIC};
use mdkin::corpus::{read_signature, write_signature};
use mdkin::dtw::dtw_distance;
use mdkin::kinematics::{
    analyze_spectrogram, calibrate_threshold, corpus_kinematic_stats, normalize_energies,
    AnalysisConfig, Handedness, ProfiledSample,
};
use mdkin::radar::{
    doppler_shift, range_resolution, simulate_returns, synth_sign_trajectory, velocity_resolution,
    LightSpeed, RadarConfig, ScattererTrajectory, SynthesizedSign, SyntheticSignSpec,
};
use mdkin::sifter::{sift_corpus, LabeledSpectrogram, Lexicon, SiftConfig, SiftReport, SignLexeme};
use mdkin::tf::{stft_spectrogram, Spectrogram, StftParams, WindowKind, WindowMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

static REPORTED: AtomicU32 = AtomicU32::new(0);

fn report(n: u32, pass: bool, detail: &str, elapsed: Duration) {
    REPORTED.fetch_or(1 << n, Ordering::SeqCst);
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} {detail} [{:.2} s]", elapsed.as_secs_f64());
}

/// Spectrogram and envelope settings for the simulated corpora. The library
/// defaults stay as documented; these trade a little time resolution for a
/// finer Doppler grid, which the 10 % speed tolerance at 0.2 m/s needs.
fn corpus_stft() -> StftParams {
    StftParams {
        window: WindowKind::Gaussian,
        window_len: 128,
        hop: 8,
        fft_len: Some(128),
    }
}

fn corpus_analysis() -> AnalysisConfig {
    AnalysisConfig {
        scale_factor: 0.05,
        ..AnalysisConfig::default()
    }
}

fn render(radar: &RadarConfig, spec: &SyntheticSignSpec) -> (SynthesizedSign, Spectrogram) {
    let sign = synth_sign_trajectory(radar, spec).unwrap();
    let iq = simulate_returns(radar, &sign.scatterers, None).unwrap();
    let spectrogram = stft_spectrogram(&iq, &corpus_stft()).unwrap();
    (sign, spectrogram)
}

fn criterion_1_resolution() {
    let t = Instant::now();
    let radar = RadarConfig::new(77e9, 4e9, 0.5e-3, 80, LightSpeed::Rounded).unwrap();
    let dr = range_resolution(&radar);
    let dv = velocity_resolution(&radar);
    assert!((radar.cpi_duration_s - 0.040).abs() < 1e-12);
    let pass = (dr - 0.0375).abs() <= 1e-4 && (dv - 0.0487).abs() <= 1e-4;
    report(1, pass, &format!("range {dr:.5} m, velocity {dv:.5} m/s"), t.elapsed());
    assert!(pass);
}

fn criterion_2_doppler_ridge() {
    let t = Instant::now();
    let radar = RadarConfig::new(77e9, 4e9, 0.5e-3, 80, LightSpeed::Rounded).unwrap();
    let expected = 2.0 * 1.0 * 77e9 / 3e8;
    assert!((doppler_shift(1.0, 77e9, LightSpeed::Rounded) - expected).abs() < 1e-9);
    let pulses = 2000;
    let track =
        ScattererTrajectory::constant_velocity(1.0, 2.0, 1.0, pulses, radar.chirp_duration_s).unwrap();
    let iq = simulate_returns(&radar, &[track], None).unwrap();
    let spec = stft_spectrogram(&iq, &StftParams::default()).unwrap();
    let bin = spec.bin_width_hz();
    let cols = spec.frames();
    let worst = (1..cols - 1)
        .map(|c| (spec.freq_axis_hz()[spec.argmax_bin(c)] - expected).abs())
        .fold(0.0, f64::max);
    let pass = worst <= bin && t.elapsed() < Duration::from_secs(1);
    report(
        2,
        pass,
        &format!(
            "{} interior columns, worst |f - {expected:.2} Hz| = {worst:.2} Hz, bin {bin:.2} Hz",
            cols - 2
        ),
        t.elapsed(),
    );
    assert!(pass);
}

struct RecoverySample {
    spec: SyntheticSignSpec,
    truth_speed: f64,
    stroke_count: u32,
    avg_speed: f64,
    total_energy: f64,
}

/// 100 signs over strokes 1-5, hands 1-2, peak speeds 0.2-0.8 m/s, with
/// amplitude jitter so one- and two-handed energies overlap a little.
fn recovery_corpus() -> &'static (Vec<RecoverySample>, Duration) {
    static CORPUS: OnceLock<(Vec<RecoverySample>, Duration)> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let t = Instant::now();
        let radar = RadarConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let specs: Vec<SyntheticSignSpec> = (0..100)
            .map(|k| SyntheticSignSpec {
                hands: 1 + (k % 2) as u8,
                strokes: 1 + (k / 2 % 5) as u32,
                peak_speed_mps: rng.random_range(0.2..0.8),
                hand_amplitude: rng.random_range(0.75..1.25),
                ..SyntheticSignSpec::default()
            })
            .collect();
        let samples = specs
            .into_par_iter()
            .map(|spec| {
                let (sign, sg) = render(&radar, &spec);
                let a = analyze_spectrogram(&sg, &radar, &corpus_analysis()).unwrap();
                RecoverySample {
                    truth_speed: sign.profile.mean_envelope_speed_at(sg.time_axis_s()),
                    stroke_count: a.stroke_count,
                    avg_speed: a.avg_speed_mps,
                    total_energy: a.total_energy,
                    spec,
                }
            })
            .collect();
        (samples, t.elapsed())
    })
}

fn criterion_3_estimator_recovery() {
    let (corpus, elapsed) = recovery_corpus();
    let strokes_ok = corpus.iter().filter(|s| s.stroke_count == s.spec.strokes).count();
    let speed_ok = corpus
        .iter()
        .filter(|s| (s.avg_speed - s.truth_speed).abs() <= 0.10 * s.truth_speed)
        .count();
    let n = corpus.len();
    let pass = n == 100
        && strokes_ok as f64 >= 0.95 * n as f64
        && speed_ok as f64 >= 0.90 * n as f64
        && *elapsed < Duration::from_secs(30);
    report(
        3,
        pass,
        &format!("strokes exact {strokes_ok}/{n} (>= 95), speed within 10% {speed_ok}/{n} (>= 90)"),
        *elapsed,
    );
    assert!(pass);
}

/// Scores every threshold on a fine grid spanning the data and returns the
/// best accuracy with the smallest grid threshold reaching it.
fn brute_force_best(points: &[(f64, Handedness)]) -> (f64, f64) {
    let max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let steps = 200_000;
    let mut best = (-1.0, f64::NAN);
    for i in 0..=steps + 1 {
        let thr = (i as f64 / steps as f64) * max * 1.000_001 + f64::MIN_POSITIVE;
        let hits = points
            .iter()
            .filter(|(e, h)| (*e >= thr) == (*h == Handedness::Two))
            .count();
        let acc = hits as f64 / points.len() as f64;
        if acc > best.0 {
            best = (acc, thr);
        }
    }
    best
}

fn criterion_4_handedness_separation() {
    let (corpus, _) = recovery_corpus();
    let t = Instant::now();
    let energies: Vec<f64> = corpus.iter().map(|s| s.total_energy).collect();
    let (normalized, _) = normalize_energies(&energies);
    let points: Vec<(f64, Handedness)> = normalized
        .iter()
        .zip(corpus)
        .map(|(&e, s)| (e, if s.spec.hands == 2 { Handedness::Two } else { Handedness::One }))
        .collect();
    let (threshold, accuracy) = calibrate_threshold(&points).unwrap();
    let (oracle, grid_threshold) = brute_force_best(&points);
    let same_partition = points.iter().all(|(e, _)| (*e >= threshold) == (*e >= grid_threshold));
    let pass = accuracy >= 0.81
        && accuracy == oracle
        && same_partition
        && t.elapsed() < Duration::from_secs(5);
    report(
        4,
        pass,
        &format!(
            "threshold {threshold:.4} (normalized), accuracy {:.1}% (>= 81%), \
             grid-scan optimum {:.1}% at {grid_threshold:.4}, same partition {same_partition}",
            100.0 * accuracy,
            100.0 * oracle
        ),
        t.elapsed(),
    );
    assert!(pass);
}

/// Minimum cost over every monotone warping path, by explicit enumeration.
fn enumerate_min(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).abs();
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

fn all_sequences(max_len: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut layer: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| {
                (0..3).map(move |v| {
                    let mut n = s.clone();
                    n.push(v as f64);
                    n
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn dtw_agrees(a: &[f64], b: &[f64]) -> bool {
    let r = dtw_distance(a, b).unwrap();
    let path_cost: f64 = r.path.iter().map(|&(i, j)| (a[i] - b[j]).abs()).sum();
    let steps_ok = r.path.first() == Some(&(0, 0))
        && r.path.last() == Some(&(a.len() - 1, b.len() - 1))
        && r.path.windows(2).all(|w| {
            let (di, dj) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
        });
    r.distance == enumerate_min(a, b) && path_cost == r.distance && steps_ok
}

fn criterion_5_dtw_oracle() {
    let t = Instant::now();
    let short = all_sequences(4);
    let exhaustive_pairs = short.len() * short.len();
    let exhaustive_bad = short
        .par_iter()
        .map(|a| short.iter().filter(|b| !dtw_agrees(a, b)).count())
        .sum::<usize>();

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random: Vec<(Vec<f64>, Vec<f64>)> = (0..2000)
        .map(|_| {
            let seq = |rng: &mut ChaCha8Rng| {
                let n = rng.random_range(1..=6);
                (0..n).map(|_| rng.random_range(0..3) as f64).collect::<Vec<f64>>()
            };
            (seq(&mut rng), seq(&mut rng))
        })
        .collect();
    let random_bad = random.par_iter().filter(|(a, b)| !dtw_agrees(a, b)).count();

    let pass = exhaustive_bad == 0 && random_bad == 0 && t.elapsed() < Duration::from_secs(60);
    report(
        5,
        pass,
        &format!(
            "{exhaustive_pairs} exhaustive pairs (len <= 4), {} random pairs (len <= 6), mismatches {}",
            random.len(),
            exhaustive_bad + random_bad
        ),
        t.elapsed(),
    );
    assert!(pass);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Injected {
    Clean,
    WrongStrokes,
    EnergyOutlier,
    WarpedEnvelope,
}

struct SiftRun {
    report: SiftReport,
    lexicon: Lexicon,
    injected: Vec<Injected>,
    elapsed: Duration,
}

/// Five classes, ten reference samples each spread evenly in peak speed and
/// amplitude, and twenty candidates per class: 14 clean, 2 with an extra
/// small stroke, 2 at 1.6x amplitude and 2 at twice the peak speed.
fn sift_run() -> &'static SiftRun {
    static RUN: OnceLock<SiftRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let t = Instant::now();
        let radar = RadarConfig::default();
        let classes = [
            ("again", 1u32, 1u8, 0.45),
            ("walk", 2, 2, 0.50),
            ("shop", 3, 1, 0.50),
            ("book", 2, 1, 0.55),
            ("help", 4, 2, 0.50),
        ];
        let spread = 0.2;
        let lexicon = Lexicon::new(classes.iter().map(|c| SignLexeme {
            gloss: c.0.into(),
            expected_handedness: if c.2 == 1 { Handedness::One } else { Handedness::Two },
            expected_strokes: c.1,
        }))
        .unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut reference = Vec::new();
        let mut candidates = Vec::new();
        for &(gloss, strokes, hands, peak) in &classes {
            let base = SyntheticSignSpec {
                hands,
                strokes,
                peak_speed_mps: peak,
                ..SyntheticSignSpec::default()
            };
            for i in 0..10 {
                let x = -1.0 + 2.0 * i as f64 / 9.0;
                let y = -1.0 + 2.0 * ((i * 7) % 10) as f64 / 9.0;
                let spec = SyntheticSignSpec {
                    peak_speed_mps: peak + spread * x,
                    hand_amplitude: 1.0 + 0.3 * y,
                    ..base.clone()
                };
                reference.push((format!("{gloss}-ref{i}"), gloss, spec));
            }
            for i in 0..20 {
                let kind = match i {
                    0..=13 => Injected::Clean,
                    14 | 15 => Injected::WrongStrokes,
                    16 | 17 => Injected::EnergyOutlier,
                    _ => Injected::WarpedEnvelope,
                };
                let mut spec = base.clone();
                let near = peak + spread * rng.random_range(-0.3..0.3);
                match kind {
                    Injected::Clean => {
                        spec.peak_speed_mps = peak + spread * rng.random_range(-0.8..0.8);
                        spec.hand_amplitude = rng.random_range(0.97..1.03);
                    }
                    Injected::WrongStrokes => {
                        spec.peak_speed_mps = near;
                        spec.strokes = strokes + 1;
                        spec.stroke_scales = vec![1.0; strokes as usize];
                        spec.stroke_scales.push(0.3);
                    }
                    Injected::EnergyOutlier => {
                        spec.peak_speed_mps = near;
                        spec.hand_amplitude = 1.6;
                        spec.torso_amplitude *= 1.6;
                    }
                    Injected::WarpedEnvelope => spec.peak_speed_mps = 2.0 * near,
                }
                candidates.push((format!("{gloss}-cand{i:02}"), gloss, spec, kind));
            }
        }

        let label = |id: &String, gloss: &str, spec: &SyntheticSignSpec| LabeledSpectrogram {
            sample_id: id.clone(),
            class_label: gloss.to_string(),
            radar,
            spectrogram: render(&radar, spec).1,
        };
        let reference: Vec<LabeledSpectrogram> =
            reference.par_iter().map(|(id, g, s)| label(id, g, s)).collect();
        let labelled: Vec<LabeledSpectrogram> =
            candidates.par_iter().map(|(id, g, s, _)| label(id, g, s)).collect();
        let cfg = SiftConfig {
            analysis: corpus_analysis(),
            ..SiftConfig::default()
        };
        let report = sift_corpus(&labelled, &reference, &lexicon, &cfg).unwrap();
        SiftRun {
            report,
            lexicon,
            injected: candidates.iter().map(|c| c.3).collect(),
            elapsed: t.elapsed(),
        }
    })
}

fn criterion_6_sifter_exactness() {
    let run = sift_run();
    let counts = |k: Injected| run.injected.iter().filter(|&&i| i == k).count();
    assert_eq!(
        [Injected::Clean, Injected::WrongStrokes, Injected::EnergyOutlier, Injected::WarpedEnvelope]
            .map(counts),
        [70, 10, 10, 10]
    );
    let mismatched: Vec<&str> = run
        .report
        .verdicts
        .iter()
        .zip(&run.injected)
        .filter(|(v, kind)| {
            let want = match kind {
                Injected::Clean => (true, true, true),
                Injected::WrongStrokes => (false, true, true),
                Injected::EnergyOutlier => (true, false, true),
                Injected::WarpedEnvelope => (true, true, false),
            };
            v.error.is_some() || (v.rule1_pass, v.rule2_pass, v.rule3_pass) != want
        })
        .map(|(v, _)| v.sample_id.as_str())
        .collect();
    let pass = mismatched.is_empty()
        && run.report.n_sifted == 30
        && run.elapsed < Duration::from_secs(60);
    report(
        6,
        pass,
        &format!(
            "{} candidates, n_sifted {} (== 30), verdicts off their injected rule: {:?}",
            run.report.verdicts.len(),
            run.report.n_sifted,
            mismatched
        ),
        run.elapsed,
    );
    assert!(pass);
}

fn criterion_7_statistics_regression() {
    let t = Instant::now();
    let radar = RadarConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut specs = Vec::new();
    for (label, mean, spread) in [("fluent", 0.36, 0.03), ("imitation", 0.45, 0.09)] {
        for k in 0..30 {
            let target: f64 = mean + spread * rng.random_range(-1.0..1.0);
            let spec = SyntheticSignSpec {
                hands: 1 + (k % 2) as u8,
                strokes: 1 + (k % 5) as u32,
                hand_range_m: 1.2,
                torso_range_m: 1.5,
                ..SyntheticSignSpec::default()
            };
            specs.push((format!("{label}-{k}"), label, spec, target));
        }
    }
    // Speed is linear in the peak speed, so a unit-peak pass fixes the scale.
    let samples: Vec<(ProfiledSample, f64)> = specs
        .par_iter()
        .map(|(id, label, spec, target)| {
            let (unit, sg) = render(&radar, &SyntheticSignSpec { peak_speed_mps: 1.0, ..spec.clone() });
            let spec = SyntheticSignSpec {
                peak_speed_mps: target / unit.profile.mean_envelope_speed_at(sg.time_axis_s()),
                ..spec.clone()
            };
            let (sign, sg) = render(&radar, &spec);
            let truth = sign.profile.mean_envelope_speed_at(sg.time_axis_s());
            let a = analyze_spectrogram(&sg, &radar, &corpus_analysis()).unwrap();
            let hands = if spec.hands == 2 { Handedness::Two } else { Handedness::One };
            let sample = ProfiledSample {
                matching_series: a.matching_series(),
                profile: a.profile(id.as_str(), *label, hands),
            };
            (sample, truth)
        })
        .collect();
    let generated = |label: &str| {
        let v: Vec<f64> = samples
            .iter()
            .filter(|s| s.0.profile.class_label == label)
            .map(|s| s.1)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (gen_fluent, gen_imitation) = (generated("fluent"), generated("imitation"));
    let profiled: Vec<ProfiledSample> = samples.into_iter().map(|s| s.0).collect();
    let stats = corpus_kinematic_stats(&profiled).unwrap();
    let find = |label: &str| stats.iter().find(|s| s.class_label == label).unwrap();
    let (fluent, imitation) = (find("fluent"), find("imitation"));
    let (sf, si) = (fluent.std_speed_mps.unwrap(), imitation.std_speed_mps.unwrap());
    let pass = (fluent.mean_speed_mps - 0.36).abs() <= 0.036
        && (imitation.mean_speed_mps - 0.45).abs() <= 0.045
        && si > sf
        && t.elapsed() < Duration::from_secs(30);
    report(
        7,
        pass,
        &format!(
            "fluent {:.4} +/- {sf:.4} m/s (generated {:.4}), imitation {:.4} +/- {si:.4} m/s (generated {:.4})",
            fluent.mean_speed_mps,
            gen_fluent,
            imitation.mean_speed_mps,
            gen_imitation
        ),
        t.elapsed(),
    );
    assert!(pass);
}

fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

fn criterion_8_error_metrics_computed() {
    let run = sift_run();
    let t = Instant::now();
    let r = &run.report;
    let class_speed = |label: &str| {
        r.reference_stats
            .iter()
            .find(|s| s.class_label == label)
            .unwrap()
            .mean_speed_mps
    };
    let accepted: Vec<_> = r
        .verdicts
        .iter()
        .filter(|v| v.accepted)
        .map(|v| v.measured_profile.as_ref().unwrap())
        .collect();
    let errors: Vec<f64> = accepted
        .iter()
        .map(|p| (p.avg_speed_mps - class_speed(&p.class_label)).abs())
        .collect();
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let pct = |wrong: usize| 100.0 * wrong as f64 / accepted.len() as f64;
    let wrong_strokes = accepted
        .iter()
        .filter(|p| p.stroke_count != run.lexicon.get(&p.class_label).unwrap().expected_strokes)
        .count();
    let wrong_hands = accepted
        .iter()
        .filter(|p| p.handedness != run.lexicon.get(&p.class_label).unwrap().expected_handedness)
        .count();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    let pass = close(r.error_speed_mean_mps.unwrap(), mean)
        && close(r.error_speed_std_mps.unwrap(), sample_std(&errors).unwrap())
        && close(r.pct_wrong_strokes, pct(wrong_strokes))
        && close(r.pct_wrong_handedness, pct(wrong_hands))
        && r.pre_sift.sample_count == r.verdicts.len();
    report(
        8,
        pass,
        &format!(
            "published accuracies (77/89/93% top-1/3/5) and GAN error tables need the \
             human-subject data and trained GANs, not reproduced; replaced by criteria 3-7. \
             Metric computation checked on the criterion-6 report: V_h error {:.4} +/- {:.4} m/s, \
             wrong strokes {:.1}%, wrong handedness {:.1}% (pre-sift {:.1}% / {:.1}%)",
            mean,
            sample_std(&errors).unwrap(),
            pct(wrong_strokes),
            pct(wrong_hands),
            r.pre_sift.pct_wrong_strokes,
            r.pre_sift.pct_wrong_handedness
        ),
        t.elapsed(),
    );
    assert!(pass);
}

fn random_signature(rng: &mut ChaCha8Rng, k: usize) -> SignatureFile {
    let rows = rng.random_range(1..=48);
    let cols = rng.random_range(1..=48);
    let light = if rng.random_bool(0.5) { LightSpeed::Exact } else { LightSpeed::Rounded };
    let radar = RadarConfig::new(
        rng.random_range(1e9..100e9),
        rng.random_range(1e8..5e9),
        rng.random_range(1e-5..1e-3),
        rng.random_range(1..256),
        light,
    )
    .unwrap();
    let payload = (0..rows * cols)
        .map(|_| match rng.random_range(0..10) {
            0 => 0.0,
            1 => f32::MIN_POSITIVE / 4.0,
            2 => f32::MAX,
            _ => f32::from_bits(rng.random_range(0..0x7f80_0000u32)),
        })
        .collect();
    SignatureFile {
        header: SignatureHeader {
            sample_id: format!("sample-{k}-\u{e9}"),
            class_label: format!("class {}", rng.random_range(0..10)),
            radar,
            window: WindowMeta {
                kind: [WindowKind::Hann, WindowKind::Hamming, WindowKind::Rectangular, WindowKind::Gaussian]
                    [rng.random_range(0..4)],
                window_len: rng.random_range(1..512),
                hop: rng.random_range(1..64),
                fft_len: rng.random_range(1..1024),
            },
            rows,
            cols,
            freq_axis_hz: (0..rows).map(|_| rng.random_range(-1e4..1e4)).collect(),
            time_axis_s: (0..cols).map(|_| rng.random::<f64>() * 10.0).collect(),
        },
        payload,
    }
}

fn criterion_9_file_format() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut round_trip_failures = 0;
    for k in 0..1000 {
        let file = random_signature(&mut rng, k);
        let path = dir.path().join(format!("{k}.mdsg"));
        write_signature(&path, &file).unwrap();
        let back = read_signature(&path).unwrap();
        let bits = |f: &SignatureFile| f.payload.iter().map(|v| v.to_bits()).collect::<Vec<u32>>();
        if back.header != file.header || bits(&back) != bits(&file) {
            round_trip_failures += 1;
        }
    }

    let good = random_signature(&mut rng, 1000);
    let bytes = good.encode().unwrap();
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let mut bad_magic = bytes.clone();
    bad_magic[..4].copy_from_slice(b"PNG\0");
    let mut bad_version = bytes.clone();
    bad_version[4..8].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
    let mut trailing = bytes.clone();
    trailing.push(0);
    let mut wrong_shape = good.clone();
    wrong_shape.header.cols += 1;
    wrong_shape.header.time_axis_s.push(0.0);
    let shape_bytes = {
        // Valid preamble and header claiming one more column than the payload holds.
        let header = serde_json::to_vec(&wrong_shape.header).unwrap();
        let mut out = MAGIC.to_vec();
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&((good.payload.len() * 4) as u64).to_le_bytes());
        out.extend_from_slice(&header);
        out.extend_from_slice(&bytes[20 + header_len..]);
        out
    };
    let mut bad_header = bytes.clone();
    bad_header[20] = b'#';
    let mut bad_payload = bytes.clone();
    let n = bad_payload.len();
    bad_payload[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());

    let cases: Vec<(&str, Vec<u8>)> = vec![
        ("bad_magic", bad_magic),
        ("unsupported_version", bad_version),
        ("truncated", bytes[..bytes.len() - 1].to_vec()),
        ("truncated", bytes[..10].to_vec()),
        ("size_mismatch", trailing),
        ("size_mismatch", shape_bytes),
        ("bad_header", bad_header),
        ("bad_payload", bad_payload),
    ];
    let mut wrong_codes = Vec::new();
    for (want, data) in &cases {
        let got = SignatureFile::decode(data).err().map(|e: FormatError| e.code());
        if got != Some(*want) {
            wrong_codes.push(format!("{want} -> {got:?}"));
        }
    }
    let pass = round_trip_failures == 0 && wrong_codes.is_empty() && t.elapsed() < Duration::from_secs(30);
    report(
        9,
        pass,
        &format!(
            "1000 round trips, {round_trip_failures} mismatched; {} malformed classes, wrong codes {:?}",
            cases.len(),
            wrong_codes
        ),
        t.elapsed(),
    );
    assert!(pass);
}

fn main() {
    let criteria: [(u32, fn()); 9] = [
        (1, criterion_1_resolution),
        (2, criterion_2_doppler_ridge),
        (3, criterion_3_estimator_recovery),
        (4, criterion_4_handedness_separation),
        (5, criterion_5_dtw_oracle),
        (6, criterion_6_sifter_exactness),
        (7, criterion_7_statistics_regression),
        (8, criterion_8_error_metrics_computed),
        (9, criterion_9_file_format),
    ];
    let mut failed = 0;
    for (n, run) in criteria {
        if std::panic::catch_unwind(run).is_err() {
            failed += 1;
            if REPORTED.load(Ordering::SeqCst) & (1 << n) == 0 {
                println!("criterion {n}: FAIL (aborted)");
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
