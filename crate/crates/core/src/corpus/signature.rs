//! Self-describing binary container for spectrograms.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size         field
//! 0       4            magic "MDSG"
//! 4       4   u32      format version (1)
//! 8       4   u32      header length H in bytes
//! 12      8   u64      payload length P in bytes
//! 20      H            UTF-8 JSON header
//! 20+H    P            payload: rows x cols f32, row-major (row = Doppler bin)
//! ```
//!
//! The header carries the radar configuration, window description, class
//! label, sample id, `rows`, `cols` and both axes. `P` must equal
//! `rows · cols · 4` and the file must end right after the payload.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::radar::RadarConfig;
use crate::tf::{Spectrogram, WindowMeta};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"MDSG";
pub const FORMAT_VERSION: u32 = 1;
const PREAMBLE_LEN: usize = 20;

/// Parse failures, each with a stable code.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("not a signature file (bad magic)")]
    BadMagic,
    #[error("unsupported signature format version {0}")]
    UnsupportedVersion(u32),
    #[error("file truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("header/payload size mismatch: {0}")]
    SizeMismatch(String),
    #[error("invalid header: {0}")]
    BadHeader(String),
    #[error("invalid payload: {0}")]
    BadPayload(String),
}

impl FormatError {
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::BadMagic => "bad_magic",
            FormatError::UnsupportedVersion(_) => "unsupported_version",
            FormatError::Truncated { .. } => "truncated",
            FormatError::SizeMismatch(_) => "size_mismatch",
            FormatError::BadHeader(_) => "bad_header",
            FormatError::BadPayload(_) => "bad_payload",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureHeader {
    pub sample_id: String,
    pub class_label: String,
    pub radar: RadarConfig,
    pub window: WindowMeta,
    pub rows: usize,
    pub cols: usize,
    pub freq_axis_hz: Vec<f64>,
    pub time_axis_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureFile {
    pub header: SignatureHeader,
    /// Linear power, row-major.
    pub payload: Vec<f32>,
}

impl SignatureFile {
    pub fn from_spectrogram(
        spec: &Spectrogram,
        radar: &RadarConfig,
        sample_id: impl Into<String>,
        class_label: impl Into<String>,
    ) -> Self {
        let (rows, cols) = spec.power().dim();
        SignatureFile {
            header: SignatureHeader {
                sample_id: sample_id.into(),
                class_label: class_label.into(),
                radar: *radar,
                window: *spec.window(),
                rows,
                cols,
                freq_axis_hz: spec.freq_axis_hz().to_vec(),
                time_axis_s: spec.time_axis_s().to_vec(),
            },
            payload: spec.power().iter().map(|&p| p as f32).collect(),
        }
    }

    pub fn to_spectrogram(&self) -> Result<Spectrogram> {
        let h = &self.header;
        let power = Array2::from_shape_vec(
            (h.rows, h.cols),
            self.payload.iter().map(|&p| f64::from(p)).collect(),
        )
        .map_err(|e| Error::shape(e.to_string()))?;
        Spectrogram::from_parts(power, h.freq_axis_hz.clone(), h.time_axis_s.clone(), h.window)
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header)
            .map_err(|e| FormatError::BadHeader(e.to_string()))?;
        let expected = self.header.rows * self.header.cols;
        if self.payload.len() != expected {
            return Err(FormatError::SizeMismatch(format!(
                "payload holds {} values, header declares {}x{}",
                self.payload.len(),
                self.header.rows,
                self.header.cols
            ))
            .into());
        }
        let header_len = u32::try_from(header.len())
            .map_err(|_| FormatError::BadHeader("header longer than 4 GiB".into()))?;
        let payload_len = (self.payload.len() * 4) as u64;
        let mut out = Vec::with_capacity(PREAMBLE_LEN + header.len() + payload_len as usize);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&header_len.to_le_bytes());
        out.extend_from_slice(&payload_len.to_le_bytes());
        out.extend_from_slice(&header);
        for v in &self.payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FormatError> {
        let actual = bytes.len() as u64;
        if bytes.len() < 4 || bytes[..4] != MAGIC {
            return Err(if bytes.len() < 4 && MAGIC.starts_with(bytes) {
                FormatError::Truncated {
                    expected: PREAMBLE_LEN as u64,
                    actual,
                }
            } else {
                FormatError::BadMagic
            });
        }
        if bytes.len() < PREAMBLE_LEN {
            return Err(FormatError::Truncated {
                expected: PREAMBLE_LEN as u64,
                actual,
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let header_len = u64::from(u32_at(8));
        let payload_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let expected = PREAMBLE_LEN as u64 + header_len + payload_len;
        if actual < expected {
            return Err(FormatError::Truncated { expected, actual });
        }
        if actual > expected {
            return Err(FormatError::SizeMismatch(format!(
                "{} trailing bytes after payload",
                actual - expected
            )));
        }

        let header_end = PREAMBLE_LEN + header_len as usize;
        let header: SignatureHeader = serde_json::from_slice(&bytes[PREAMBLE_LEN..header_end])
            .map_err(|e| FormatError::BadHeader(e.to_string()))?;
        let declared = (header.rows as u64)
            .checked_mul(header.cols as u64)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| FormatError::BadHeader("matrix size overflows".into()))?;
        if declared != payload_len {
            return Err(FormatError::SizeMismatch(format!(
                "header declares {}x{} ({declared} bytes), payload holds {payload_len} bytes",
                header.rows, header.cols
            )));
        }
        if header.freq_axis_hz.len() != header.rows || header.time_axis_s.len() != header.cols {
            return Err(FormatError::BadHeader(format!(
                "axis lengths ({}, {}) do not match {}x{}",
                header.freq_axis_hz.len(),
                header.time_axis_s.len(),
                header.rows,
                header.cols
            )));
        }
        let payload: Vec<f32> = bytes[header_end..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if let Some(bad) = payload.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(FormatError::BadPayload(format!("power value {bad} is not finite and >= 0")));
        }
        Ok(SignatureFile { header, payload })
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so a failed write never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_signature(path: impl AsRef<Path>, file: &SignatureFile) -> Result<()> {
    write_atomic(path.as_ref(), &file.encode()?)
}

pub fn read_signature(path: impl AsRef<Path>) -> Result<SignatureFile> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(SignatureFile::decode(&bytes)?)
}
