//! Bit-exact binary file formats, ground-truth and key=value config text
//! formats, and report/histogram writers.
//!
//! Feature file (`GSF1`), little-endian throughout:
//!
//! ```text
//! magic      4 bytes  "GSF1"
//! version    u16      currently 1
//! dtype      u8       1 = 32-bit IEEE float (2 reserved for 64-bit)
//! rows       u32
//! cols       u32
//! payload    rows × cols × 4 bytes, row-major
//! id table   optional: per row, u32 length + UTF-8 bytes
//! ```
//!
//! Checkpoint file (`GSW1`):
//!
//! ```text
//! magic      4 bytes  "GSW1"
//! version    u16      currently 1
//! variant    u8       0 cosine, 1 diag, 2 bdiag, 3 dense
//! dim        u32
//! block      u32      block size d; 0 unless variant = bdiag
//! payload    param_count × 4 bytes, f32, metric storage order
//! checksum   u32      CRC-32 (IEEE) of the payload bytes
//! ```

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::eval::{GroundTruth, RetrievalReport, SimilarityHistogram};
use crate::metric::{FeatureMatrix, MetricConfig, MetricParams, MetricVariant};

pub const FEATURE_MAGIC: [u8; 4] = *b"GSF1";
pub const CHECKPOINT_MAGIC: [u8; 4] = *b"GSW1";
pub const FORMAT_VERSION: u16 = 1;
pub const DTYPE_F32: u8 = 1;
/// Reserved for 64-bit oracle payloads.
pub const DTYPE_F64: u8 = 2;

fn variant_code(variant: MetricVariant) -> u8 {
    match variant {
        MetricVariant::Cosine => 0,
        MetricVariant::Diag => 1,
        MetricVariant::BlockDiag => 2,
        MetricVariant::Dense => 3,
    }
}

fn variant_from_code(code: u8) -> Option<MetricVariant> {
    match code {
        0 => Some(MetricVariant::Cosine),
        1 => Some(MetricVariant::Diag),
        2 => Some(MetricVariant::BlockDiag),
        3 => Some(MetricVariant::Dense),
        _ => None,
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        if self.remaining() < n {
            return None;
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Some(out)
    }

    fn u16_le(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32_le(&mut self) -> Option<u32> {
        self.take(4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }
}

/// Write a feature matrix, optionally with one ID string per row.
pub fn write_features(
    path: impl AsRef<Path>,
    features: &FeatureMatrix<f32>,
    ids: Option<&[String]>,
) -> Result<()> {
    let path = path.as_ref();
    let display = path.display().to_string();
    if let Some(ids) = ids {
        if ids.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                context: "feature id table",
                expected: features.rows(),
                got: ids.len(),
            });
        }
    }
    let mut buf = Vec::with_capacity(15 + features.data().len() * 4);
    buf.extend_from_slice(&FEATURE_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.push(DTYPE_F32);
    buf.extend_from_slice(&(features.rows() as u32).to_le_bytes());
    buf.extend_from_slice(&(features.dim() as u32).to_le_bytes());
    for &v in features.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(ids) = ids {
        for id in ids {
            buf.extend_from_slice(&(id.len() as u32).to_le_bytes());
            buf.extend_from_slice(id.as_bytes());
        }
    }
    write_atomic(path, &buf).map_err(|e| Error::io(display, e))
}

/// Read a feature matrix and any trailing ID table. The `normalized` flag is
/// not stored; it is re-detected from the payload (every row within 1e-5 of
/// unit norm).
pub fn read_features(path: impl AsRef<Path>) -> Result<(FeatureMatrix<f32>, Option<Vec<String>>)> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let bytes = fs::read(path).map_err(|e| Error::io(&display, e))?;
    let mut cur = Cursor::new(&bytes);

    let magic = cur
        .take(4)
        .ok_or_else(|| truncated(&display, 4, bytes.len()))?;
    if magic != FEATURE_MAGIC {
        return Err(Error::format(
            &display,
            FormatError::BadMagic {
                expected: FEATURE_MAGIC,
                found: [magic[0], magic[1], magic[2], magic[3]],
            },
        ));
    }
    let version = cur
        .u16_le()
        .ok_or_else(|| truncated(&display, 15, bytes.len()))?;
    if version != FORMAT_VERSION {
        return Err(Error::format(
            &display,
            FormatError::UnsupportedVersion(version),
        ));
    }
    let dtype = cur
        .u8()
        .ok_or_else(|| truncated(&display, 15, bytes.len()))?;
    if dtype != DTYPE_F32 {
        return Err(Error::format(
            &display,
            FormatError::UnsupportedDtype(dtype),
        ));
    }
    let rows = cur
        .u32_le()
        .ok_or_else(|| truncated(&display, 15, bytes.len()))? as u64;
    let cols = cur
        .u32_le()
        .ok_or_else(|| truncated(&display, 15, bytes.len()))? as u64;
    let elems = rows
        .checked_mul(cols)
        .filter(|&n| n <= (usize::MAX / 4) as u64)
        .ok_or_else(|| Error::format(&display, FormatError::DimensionOverflow { rows, cols }))?;
    let payload_len = (elems as usize) * 4;
    let payload = cur.take(payload_len).ok_or_else(|| {
        Error::format(
            &display,
            FormatError::PayloadLengthMismatch {
                expected: payload_len,
                found: bytes.len().saturating_sub(15),
            },
        )
    })?;
    let mut data = Vec::with_capacity(elems as usize);
    for chunk in payload.chunks_exact(4) {
        data.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
    }

    let ids = if cur.remaining() > 0 {
        let mut ids = Vec::with_capacity(rows as usize);
        for r in 0..rows {
            let len = cur.u32_le().ok_or_else(|| {
                Error::format(
                    &display,
                    FormatError::IdTable(format!("truncated length prefix at row {r}")),
                )
            })? as usize;
            let raw = cur.take(len).ok_or_else(|| {
                Error::format(
                    &display,
                    FormatError::IdTable(format!("truncated string at row {r}")),
                )
            })?;
            let s = std::str::from_utf8(raw).map_err(|_| {
                Error::format(
                    &display,
                    FormatError::IdTable(format!("invalid UTF-8 at row {r}")),
                )
            })?;
            ids.push(s.to_string());
        }
        if cur.remaining() > 0 {
            return Err(Error::format(&display, FormatError::TrailingBytes));
        }
        Some(ids)
    } else {
        None
    };

    let normalized = detect_normalized(rows as usize, cols as usize, &data);
    let fm = FeatureMatrix::new(rows as usize, cols as usize, data, normalized)?;
    Ok((fm, ids))
}

fn detect_normalized(rows: usize, cols: usize, data: &[f32]) -> bool {
    if rows == 0 || cols == 0 {
        return false;
    }
    for r in 0..rows {
        let norm: f32 = data[r * cols..(r + 1) * cols]
            .iter()
            .map(|&v| v * v)
            .sum::<f32>()
            .sqrt();
        if (norm - 1.0).abs() > 1e-5 {
            return false;
        }
    }
    true
}

fn truncated(path: &str, expected: usize, found: usize) -> Error {
    Error::format(path, FormatError::PayloadLengthMismatch { expected, found })
}

/// Persist metric parameters with a CRC-32 payload checksum.
pub fn save_checkpoint(path: impl AsRef<Path>, params: &MetricParams<f32>) -> Result<()> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let config = params.config();
    let mut payload = Vec::with_capacity(params.weights().len() * 4);
    for &w in params.weights() {
        payload.extend_from_slice(&w.to_le_bytes());
    }
    let checksum = crc32fast::hash(&payload);
    let mut buf = Vec::with_capacity(15 + payload.len() + 4);
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.push(variant_code(config.variant()));
    buf.extend_from_slice(&(config.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(config.block_size().unwrap_or(0) as u32).to_le_bytes());
    buf.extend_from_slice(&payload);
    buf.extend_from_slice(&checksum.to_le_bytes());
    write_atomic(path, &buf).map_err(|e| Error::io(display, e))
}

/// Load metric parameters, verifying magic, version, dimensions, and the
/// payload checksum.
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<MetricParams<f32>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let bytes = fs::read(path).map_err(|e| Error::io(&display, e))?;
    let mut cur = Cursor::new(&bytes);

    let magic = cur
        .take(4)
        .ok_or_else(|| truncated(&display, 4, bytes.len()))?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::format(
            &display,
            FormatError::BadMagic {
                expected: CHECKPOINT_MAGIC,
                found: [magic[0], magic[1], magic[2], magic[3]],
            },
        ));
    }
    let version = cur
        .u16_le()
        .ok_or_else(|| truncated(&display, 15, bytes.len()))?;
    if version != FORMAT_VERSION {
        return Err(Error::format(
            &display,
            FormatError::UnsupportedVersion(version),
        ));
    }
    let code = cur
        .u8()
        .ok_or_else(|| truncated(&display, 15, bytes.len()))?;
    let variant = variant_from_code(code)
        .ok_or_else(|| Error::format(&display, FormatError::UnknownVariant(code)))?;
    let dim = cur
        .u32_le()
        .ok_or_else(|| truncated(&display, 15, bytes.len()))? as usize;
    let block = cur
        .u32_le()
        .ok_or_else(|| truncated(&display, 15, bytes.len()))? as usize;
    let config = MetricConfig::new(
        variant,
        dim,
        if variant == MetricVariant::BlockDiag {
            Some(block)
        } else if block == 0 {
            None
        } else {
            return Err(Error::format(
                &display,
                FormatError::ConfigMismatch(format!(
                    "variant {variant} carries nonzero block size {block}"
                )),
            ));
        },
    )?;
    let payload_len = config.param_count() * 4;
    let payload = cur.take(payload_len).ok_or_else(|| {
        Error::format(
            &display,
            FormatError::PayloadLengthMismatch {
                expected: payload_len,
                found: bytes.len().saturating_sub(15).saturating_sub(4),
            },
        )
    })?;
    let stored = cur
        .u32_le()
        .ok_or_else(|| truncated(&display, payload_len + 19, bytes.len()))?;
    if cur.remaining() > 0 {
        return Err(Error::format(&display, FormatError::TrailingBytes));
    }
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::format(
            &display,
            FormatError::ChecksumMismatch { stored, computed },
        ));
    }
    let mut weights = Vec::with_capacity(config.param_count());
    for chunk in payload.chunks_exact(4) {
        weights.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]));
    }
    MetricParams::from_weights(config, weights)
}

/// Load a checkpoint and require it to match an expected configuration.
pub fn load_checkpoint_expecting(
    path: impl AsRef<Path>,
    expected: &MetricConfig,
) -> Result<MetricParams<f32>> {
    let params = load_checkpoint(&path)?;
    if params.config() != expected {
        return Err(Error::format(
            path.as_ref().display().to_string(),
            FormatError::ConfigMismatch(format!(
                "expected {:?}, found {:?}",
                expected,
                params.config()
            )),
        ));
    }
    Ok(params)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()
}

/// Parse line-oriented `key=value` config text. `#` starts a comment; blank
/// lines are ignored; later keys override earlier ones.
pub fn parse_kv_config(text: &str) -> std::result::Result<Vec<(String, String)>, FormatError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(FormatError::ConfigLine {
            line: lineno + 1,
            reason: "expected key=value".into(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(FormatError::ConfigLine {
                line: lineno + 1,
                reason: "empty key".into(),
            });
        }
        out.retain(|(k, _)| k != &key);
        out.push((key, value));
    }
    Ok(out)
}

/// Read a `key=value` config file.
pub fn read_kv_config(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    parse_kv_config(&text).map_err(|kind| Error::format(&display, kind))
}

/// Ground-truth text format: line `i` lists the relevant gallery indices for
/// query `i`, whitespace-separated; `#` comments allowed.
pub fn parse_ground_truth(text: &str, gallery_size: usize) -> Result<GroundTruth> {
    let mut sets = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut set = Vec::new();
        for tok in line.split_whitespace() {
            let idx: u32 = tok.parse().map_err(|_| {
                Error::format(
                    "<ground truth>",
                    FormatError::GroundTruthLine {
                        line: lineno + 1,
                        reason: format!("invalid index {tok:?}"),
                    },
                )
            })?;
            set.push(idx);
        }
        sets.push(set);
    }
    GroundTruth::new(sets, gallery_size)
}

pub fn read_ground_truth(path: impl AsRef<Path>, gallery_size: usize) -> Result<GroundTruth> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    parse_ground_truth(&text, gallery_size)
}

pub fn write_ground_truth(path: impl AsRef<Path>, gt: &GroundTruth) -> Result<()> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut text = String::new();
    for q in 0..gt.queries() {
        let line: Vec<String> = gt.relevant(q).iter().map(|g| g.to_string()).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes()).map_err(|e| Error::io(display, e))
}

/// Render a retrieval report as `key=value` lines (x→y direction prefixed
/// `i2t`, y→x prefixed `t2i`). Floats use Rust's shortest round-trip form.
pub fn format_report_lines(report: &RetrievalReport) -> String {
    let mut out = String::new();
    for (prefix, dir) in [("i2t", &report.forward), ("t2i", &report.backward)] {
        out.push_str(&format!("{prefix}.r1={}\n", dir.r1));
        out.push_str(&format!("{prefix}.r5={}\n", dir.r5));
        out.push_str(&format!("{prefix}.r10={}\n", dir.r10));
        out.push_str(&format!("{prefix}.map={}\n", dir.map));
    }
    out.push_str(&format!("rsum={}\n", report.rsum));
    out
}

/// Tab-separated report table with a header row.
pub fn format_report_table(report: &RetrievalReport) -> String {
    let mut out = String::from("direction\tr1\tr5\tr10\tmap\n");
    for (prefix, dir) in [("i2t", &report.forward), ("t2i", &report.backward)] {
        out.push_str(&format!(
            "{prefix}\t{}\t{}\t{}\t{}\n",
            dir.r1, dir.r5, dir.r10, dir.map
        ));
    }
    out.push_str(&format!("rsum\t{}\n", report.rsum));
    out
}

pub fn write_report_table(path: impl AsRef<Path>, report: &RetrievalReport) -> Result<()> {
    let path = path.as_ref();
    let display = path.display().to_string();
    write_atomic(path, format_report_table(report).as_bytes()).map_err(|e| Error::io(display, e))
}

/// Two-column text (`bin_center<TAB>count`) for one histogram class.
pub fn format_histogram_class(centers: &[f64], counts: &[u64]) -> String {
    centers
        .iter()
        .zip(counts)
        .map(|(c, n)| format!("{c}\t{n}\n"))
        .collect()
}

pub fn write_histogram(
    pos_path: impl AsRef<Path>,
    neg_path: impl AsRef<Path>,
    hist: &SimilarityHistogram,
) -> Result<()> {
    let pos = format_histogram_class(&hist.bin_centers, &hist.positive_counts);
    let neg = format_histogram_class(&hist.bin_centers, &hist.negative_counts);
    let pos_path = pos_path.as_ref();
    write_atomic(pos_path, pos.as_bytes())
        .map_err(|e| Error::io(pos_path.display().to_string(), e))?;
    let neg_path = neg_path.as_ref();
    write_atomic(neg_path, neg.as_bytes()).map_err(|e| Error::io(neg_path.display().to_string(), e))
}
