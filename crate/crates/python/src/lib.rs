//! Python bindings for `mdkin`.
//!
//! Structured records (specs, profiles, reports) cross the boundary as plain
//! dicts by way of their JSON form.

use mdkin::corpus::{read_signature, write_signature, SignatureFile};
use mdkin::kinematics::{analyze_spectrogram, AnalysisConfig};
use mdkin::radar::{self, LightSpeed, NoiseSpec, SyntheticSignSpec};
use mdkin::sifter::{self, LabeledSpectrogram, Lexicon, SiftConfig, SignLexeme};
use mdkin::tf::{self, StftParams, WindowKind};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: mdkin::Error) -> PyErr {
    match e {
        mdkin::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn light(rounded: bool) -> LightSpeed {
    if rounded {
        LightSpeed::Rounded
    } else {
        LightSpeed::Exact
    }
}

#[pyclass(name = "RadarConfig", module = "mdkin_py", from_py_object)]
#[derive(Clone)]
struct PyRadarConfig {
    inner: radar::RadarConfig,
}

#[pymethods]
impl PyRadarConfig {
    #[new]
    #[pyo3(signature = (carrier_hz=77e9, bandwidth_hz=4e9, chirp_s=0.5e-3, pulses_per_cpi=80, rounded_c=false))]
    fn new(
        carrier_hz: f64,
        bandwidth_hz: f64,
        chirp_s: f64,
        pulses_per_cpi: u32,
        rounded_c: bool,
    ) -> PyResult<Self> {
        let inner = radar::RadarConfig::new(carrier_hz, bandwidth_hz, chirp_s, pulses_per_cpi, light(rounded_c))
            .map_err(err)?;
        Ok(PyRadarConfig { inner })
    }

    #[getter]
    fn carrier_hz(&self) -> f64 {
        self.inner.center_frequency_hz
    }

    #[getter]
    fn bandwidth_hz(&self) -> f64 {
        self.inner.bandwidth_hz
    }

    #[getter]
    fn chirp_s(&self) -> f64 {
        self.inner.chirp_duration_s
    }

    #[getter]
    fn cpi_s(&self) -> f64 {
        self.inner.cpi_duration_s
    }

    #[getter]
    fn wavelength_m(&self) -> f64 {
        self.inner.wavelength_m()
    }

    fn range_resolution(&self) -> f64 {
        radar::range_resolution(&self.inner)
    }

    fn velocity_resolution(&self) -> f64 {
        radar::velocity_resolution(&self.inner)
    }

    fn max_unambiguous_speed(&self) -> f64 {
        self.inner.max_unambiguous_speed_mps()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "RadarConfig(carrier_hz={}, bandwidth_hz={}, chirp_s={}, pulses_per_cpi={})",
            self.inner.center_frequency_hz,
            self.inner.bandwidth_hz,
            self.inner.chirp_duration_s,
            self.inner.pulses_per_cpi
        )
    }
}

/// Power spectrogram, `bins x frames`.
#[pyclass(name = "Spectrogram", module = "mdkin_py", from_py_object)]
#[derive(Clone)]
struct PySpectrogram {
    inner: tf::Spectrogram,
}

#[pymethods]
impl PySpectrogram {
    #[getter]
    fn bins(&self) -> usize {
        self.inner.bins()
    }

    #[getter]
    fn frames(&self) -> usize {
        self.inner.frames()
    }

    #[getter]
    fn freq_axis_hz(&self) -> Vec<f64> {
        self.inner.freq_axis_hz().to_vec()
    }

    #[getter]
    fn time_axis_s(&self) -> Vec<f64> {
        self.inner.time_axis_s().to_vec()
    }

    /// Rows are frequency bins.
    fn power(&self) -> Vec<Vec<f64>> {
        self.inner.power().rows().into_iter().map(|r| r.to_vec()).collect()
    }

    fn total_energy(&self) -> f64 {
        tf::total_energy(&self.inner)
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        Ok(PySpectrogram {
            inner: self.inner.scaled(factor).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Spectrogram(bins={}, frames={})", self.bins(), self.frames())
    }
}

#[pyfunction]
#[pyo3(signature = (radial_velocity_mps, carrier_hz=77e9, rounded_c=false))]
fn doppler_shift(radial_velocity_mps: f64, carrier_hz: f64, rounded_c: bool) -> f64 {
    radar::doppler_shift(radial_velocity_mps, carrier_hz, light(rounded_c))
}

/// Slow-time returns of a synthetic sign as `(re, im)` lists. Keyword
/// arguments are `SyntheticSignSpec` fields.
#[pyfunction]
#[pyo3(signature = (radar, noise_power=0.0, seed=0, **spec))]
fn simulate_sign(
    radar: &PyRadarConfig,
    noise_power: f64,
    seed: u64,
    spec: Option<&Bound<'_, PyDict>>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let iq = iq_for(radar, noise_power, seed, spec)?;
    Ok(iq.samples().iter().map(|c| (c.re, c.im)).unzip())
}

fn iq_for(
    radar: &PyRadarConfig,
    noise_power: f64,
    seed: u64,
    spec: Option<&Bound<'_, PyDict>>,
) -> PyResult<radar::IqSeries> {
    let spec: SyntheticSignSpec = match spec {
        Some(d) => from_py(d.as_any())?,
        None => SyntheticSignSpec::default(),
    };
    let sign = radar::synth_sign_trajectory(&radar.inner, &spec).map_err(err)?;
    let noise = (noise_power > 0.0).then_some(NoiseSpec { power: noise_power, seed });
    radar::simulate_returns(&radar.inner, &sign.scatterers, noise).map_err(err)
}

/// Synthesizes a sign and returns its spectrogram in one step.
#[pyfunction]
#[pyo3(signature = (radar, window="hann", window_len=64, hop=8, fft_len=None, noise_power=0.0, seed=0, **spec))]
#[allow(clippy::too_many_arguments)]
fn sign_spectrogram(
    radar: &PyRadarConfig,
    window: &str,
    window_len: usize,
    hop: usize,
    fft_len: Option<usize>,
    noise_power: f64,
    seed: u64,
    spec: Option<&Bound<'_, PyDict>>,
) -> PyResult<PySpectrogram> {
    let iq = iq_for(radar, noise_power, seed, spec)?;
    let params = stft_params(window, window_len, hop, fft_len)?;
    Ok(PySpectrogram {
        inner: tf::stft_spectrogram(&iq, &params).map_err(err)?,
    })
}

fn stft_params(window: &str, window_len: usize, hop: usize, fft_len: Option<usize>) -> PyResult<StftParams> {
    let window: WindowKind = window.parse().map_err(err)?;
    Ok(StftParams {
        window,
        window_len,
        hop,
        fft_len,
    })
}

#[pyfunction]
#[pyo3(signature = (re, im, radar, window="hann", window_len=64, hop=8, fft_len=None))]
fn stft(
    re: Vec<f64>,
    im: Vec<f64>,
    radar: &PyRadarConfig,
    window: &str,
    window_len: usize,
    hop: usize,
    fft_len: Option<usize>,
) -> PyResult<PySpectrogram> {
    if re.len() != im.len() {
        return Err(PyValueError::new_err("re and im differ in length"));
    }
    let samples = re.into_iter().zip(im).map(|(r, i)| num_complex::Complex64::new(r, i)).collect();
    let iq = radar::IqSeries::new(samples, radar.inner).map_err(err)?;
    let params = stft_params(window, window_len, hop, fft_len)?;
    Ok(PySpectrogram {
        inner: tf::stft_spectrogram(&iq, &params).map_err(err)?,
    })
}

/// Upper and lower envelopes in Hz.
#[pyfunction]
#[pyo3(signature = (spectrogram, alpha=mdkin::envelope::DEFAULT_SCALE_FACTOR))]
fn extract_envelopes(spectrogram: &PySpectrogram, alpha: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let env = mdkin::envelope::extract_envelopes(&spectrogram.inner, alpha).map_err(err)?;
    Ok((env.upper_hz, env.lower_hz))
}

/// Average speed, stroke count, total energy and the envelope velocities.
#[pyfunction]
#[pyo3(signature = (spectrogram, radar, alpha=mdkin::envelope::DEFAULT_SCALE_FACTOR, smooth=false))]
fn analyze<'py>(
    py: Python<'py>,
    spectrogram: &PySpectrogram,
    radar: &PyRadarConfig,
    alpha: f64,
    smooth: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = AnalysisConfig {
        scale_factor: alpha,
        median_smoothing: smooth,
        peaks: None,
    };
    let a = analyze_spectrogram(&spectrogram.inner, &radar.inner, &cfg).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("avg_speed_mps", a.avg_speed_mps)?;
    d.set_item("stroke_count", a.stroke_count)?;
    d.set_item("total_energy", a.total_energy)?;
    d.set_item("upper_mps", a.upper_mps)?;
    d.set_item("lower_mps", a.lower_mps)?;
    Ok(d)
}

/// `(distance, path)` with the path as `(i, j)` index pairs.
#[pyfunction]
fn dtw(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, Vec<(usize, usize)>)> {
    let w = mdkin::dtw::dtw_distance(&a, &b).map_err(err)?;
    Ok((w.distance, w.path))
}

#[pyfunction]
#[pyo3(name = "write_signature")]
fn py_write_signature(
    path: &str,
    spectrogram: &PySpectrogram,
    radar: &PyRadarConfig,
    sample_id: &str,
    class_label: &str,
) -> PyResult<()> {
    let file = SignatureFile::from_spectrogram(&spectrogram.inner, &radar.inner, sample_id, class_label);
    write_signature(path, &file).map_err(err)
}

/// `(spectrogram, radar, sample_id, class_label)`.
#[pyfunction]
#[pyo3(name = "read_signature")]
fn py_read_signature(path: &str) -> PyResult<(PySpectrogram, PyRadarConfig, String, String)> {
    let file = read_signature(path).map_err(err)?;
    let inner = file.to_spectrogram().map_err(err)?;
    let h = file.header;
    Ok((
        PySpectrogram { inner },
        PyRadarConfig { inner: h.radar },
        h.sample_id,
        h.class_label,
    ))
}

fn labelled(items: Vec<(String, String, PySpectrogram)>, radar: &PyRadarConfig) -> Vec<LabeledSpectrogram> {
    items
        .into_iter()
        .map(|(sample_id, class_label, s)| LabeledSpectrogram {
            sample_id,
            class_label,
            radar: radar.inner,
            spectrogram: s.inner,
        })
        .collect()
}

/// Sifts `(sample_id, class_label, spectrogram)` candidates against a
/// reference list. `lexicon` is a list of `{"gloss", "handedness",
/// "strokes"}` dicts. Returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (candidates, reference, lexicon, radar, alpha=mdkin::envelope::DEFAULT_SCALE_FACTOR, handedness_threshold=None, tolerance_scale=1.0))]
#[allow(clippy::too_many_arguments)]
fn sift<'py>(
    py: Python<'py>,
    candidates: Vec<(String, String, PySpectrogram)>,
    reference: Vec<(String, String, PySpectrogram)>,
    lexicon: &Bound<'py, PyAny>,
    radar: &PyRadarConfig,
    alpha: f64,
    handedness_threshold: Option<f64>,
    tolerance_scale: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let entries: Vec<SignLexeme> = from_py(lexicon)?;
    let lexicon = Lexicon::new(entries).map_err(err)?;
    let cfg = SiftConfig {
        analysis: AnalysisConfig {
            scale_factor: alpha,
            ..AnalysisConfig::default()
        },
        handedness_threshold,
        tolerance_scale,
    };
    let report = sifter::sift_corpus(&labelled(candidates, radar), &labelled(reference, radar), &lexicon, &cfg)
        .map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn mdkin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRadarConfig>()?;
    m.add_class::<PySpectrogram>()?;
    m.add_function(wrap_pyfunction!(doppler_shift, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sign, m)?)?;
    m.add_function(wrap_pyfunction!(sign_spectrogram, m)?)?;
    m.add_function(wrap_pyfunction!(stft, m)?)?;
    m.add_function(wrap_pyfunction!(extract_envelopes, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(dtw, m)?)?;
    m.add_function(wrap_pyfunction!(py_write_signature, m)?)?;
    m.add_function(wrap_pyfunction!(py_read_signature, m)?)?;
    m.add_function(wrap_pyfunction!(sift, m)?)?;
    Ok(())
}
