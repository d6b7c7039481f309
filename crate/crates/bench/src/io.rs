//! Binary tensor files and PGM image stacks.
//!
//! A tensor file is a 35 byte header followed by the payload:
//!
//! | bytes  | content                                   |
//! |--------|-------------------------------------------|
//! | 0..4   | `TNS3`                                    |
//! | 4      | version, `0x01`                           |
//! | 5      | dtype, `0x00` f64 or `0x01` boolean mask  |
//! | 6..11  | reserved, zero                            |
//! | 11..35 | `n1`, `n2`, `n3` as little-endian `u64`   |
//!
//! Entries follow in flat order `i + n1 (j + n2 k)`, little-endian.

use std::fs;
use std::path::{Path, PathBuf};

use tubal::{ObservationMask, Tensor3f64};

use crate::error::{BenchError, Result};

pub const MAGIC: &[u8; 4] = b"TNS3";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 35;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DType {
    F64 = 0x00,
    Mask = 0x01,
}

impl DType {
    fn width(self) -> usize {
        match self {
            DType::F64 => 8,
            DType::Mask => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorFile {
    Values(Tensor3f64),
    Mask(ObservationMask),
}

fn header(dtype: DType, dims: (usize, usize, usize)) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(dtype as u8);
    out.extend_from_slice(&[0; 5]);
    for n in [dims.0, dims.1, dims.2] {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    out
}

pub fn encode_tensor(x: &Tensor3f64) -> Vec<u8> {
    let mut out = header(DType::F64, x.dims());
    out.reserve(x.len() * 8);
    for v in x.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_mask(m: &ObservationMask) -> Vec<u8> {
    let mut out = header(DType::Mask, m.dims());
    out.extend(m.bits().iter().map(|&b| b as u8));
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| BenchError::io(path, e))
}

pub fn write_tensor(path: &Path, x: &Tensor3f64) -> Result<()> {
    write_bytes(path, &encode_tensor(x))
}

pub fn write_mask(path: &Path, m: &ObservationMask) -> Result<()> {
    write_bytes(path, &encode_mask(m))
}

/// Parses an in-memory tensor file. `path` only labels errors.
pub fn decode(path: &Path, bytes: &[u8]) -> Result<TensorFile> {
    let bad = |offset: usize, reason: String| BenchError::Format { path: path.to_path_buf(), offset: offset as u64, reason };
    if bytes.len() < HEADER_LEN {
        return Err(bad(bytes.len(), format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(bad(0, "bad magic, expected TNS3".into()));
    }
    if bytes[4] != VERSION {
        return Err(bad(4, format!("unsupported version {:#04x}", bytes[4])));
    }
    let dtype = match bytes[5] {
        0x00 => DType::F64,
        0x01 => DType::Mask,
        other => return Err(bad(5, format!("unknown dtype {other:#04x}"))),
    };
    if let Some(p) = bytes[6..11].iter().position(|&b| b != 0) {
        return Err(bad(6 + p, "reserved byte is not zero".into()));
    }
    let mut dims = [0usize; 3];
    for (m, d) in dims.iter_mut().enumerate() {
        let at = 11 + 8 * m;
        let raw = u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 byte field"));
        *d = usize::try_from(raw).map_err(|_| bad(at, format!("dimension {raw} too large")))?;
        if *d == 0 {
            return Err(bad(at, "zero dimension".into()));
        }
    }
    let count = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or_else(|| bad(11, "dimension product overflows".into()))?;
    let want = count
        .checked_mul(dtype.width())
        .and_then(|v| v.checked_add(HEADER_LEN))
        .ok_or_else(|| bad(11, "payload size overflows".into()))?;
    if bytes.len() != want {
        let offset = bytes.len().min(want);
        return Err(bad(offset, format!("payload should end at byte {want}, file has {} bytes", bytes.len())));
    }
    let payload = &bytes[HEADER_LEN..];
    let dims = (dims[0], dims[1], dims[2]);
    match dtype {
        DType::F64 => {
            let data = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 byte chunk")))
                .collect();
            Ok(TensorFile::Values(Tensor3f64::new(dims, data)?))
        }
        DType::Mask => {
            let mut bits = Vec::with_capacity(count);
            for (i, &b) in payload.iter().enumerate() {
                match b {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    _ => return Err(bad(HEADER_LEN + i, format!("mask byte {b} is not 0 or 1"))),
                }
            }
            Ok(TensorFile::Mask(ObservationMask::new(dims, bits)?))
        }
    }
}

pub fn read_file(path: &Path) -> Result<TensorFile> {
    let bytes = fs::read(path).map_err(|e| BenchError::io(path, e))?;
    decode(path, &bytes)
}

pub fn read_tensor(path: &Path) -> Result<Tensor3f64> {
    match read_file(path)? {
        TensorFile::Values(x) => Ok(x),
        TensorFile::Mask(_) => Err(BenchError::Format { path: path.into(), offset: 5, reason: "expected f64 data, found a mask".into() }),
    }
}

pub fn read_mask(path: &Path) -> Result<ObservationMask> {
    match read_file(path)? {
        TensorFile::Mask(m) => Ok(m),
        TensorFile::Values(_) => Err(BenchError::Format { path: path.into(), offset: 5, reason: "expected a mask, found f64 data".into() }),
    }
}

/// Where each frame of an image stack goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Layout {
    /// Frame `f` becomes frontal slice `f`: `height × width × frames`.
    Frontal,
    /// Frame `f` becomes lateral slice `f`: `height × frames × width`.
    Lateral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgmFrame {
    pub width: usize,
    pub height: usize,
    /// Row-major pixel values divided by maxval.
    pub pixels: Vec<f64>,
}

/// Reads the next header token, skipping whitespace and `#` comments.
fn pgm_token(bytes: &[u8], pos: &mut usize) -> Option<(usize, String)> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    (start < *pos).then(|| (start, String::from_utf8_lossy(&bytes[start..*pos]).into_owned()))
}

/// Parses a binary (P5) PGM image.
pub fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<PgmFrame> {
    let bad = |offset: usize, reason: String| BenchError::Format { path: path.to_path_buf(), offset: offset as u64, reason };
    let mut pos = 0;
    match pgm_token(bytes, &mut pos) {
        Some((_, magic)) if magic == "P5" => {}
        _ => return Err(bad(0, "not a binary PGM (P5) file".into())),
    }
    let mut fields = [0usize; 3];
    for (f, name) in fields.iter_mut().zip(["width", "height", "maxval"]) {
        let (at, tok) = pgm_token(bytes, &mut pos).ok_or_else(|| bad(pos, format!("missing {name}")))?;
        *f = tok.parse().map_err(|_| bad(at, format!("bad {name} {tok:?}")))?;
        if *f == 0 {
            return Err(bad(at, format!("{name} must be positive")));
        }
    }
    let [width, height, maxval] = fields;
    if maxval > 65535 {
        return Err(bad(pos, format!("maxval {maxval} above 65535")));
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(bad(pos, "expected one whitespace byte before pixel data".into()));
    }
    pos += 1;
    let bpp = if maxval < 256 { 1 } else { 2 };
    let want = width * height * bpp;
    if bytes.len() - pos < want {
        return Err(bad(bytes.len(), format!("pixel data truncated: need {want} bytes after offset {pos}")));
    }
    let scale = 1.0 / maxval as f64;
    let raw = &bytes[pos..pos + want];
    let pixels = if bpp == 1 {
        raw.iter().map(|&b| b as f64 * scale).collect()
    } else {
        raw.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale).collect()
    };
    Ok(PgmFrame { width, height, pixels })
}

/// Lists the `.pgm` files of a directory in lexicographic order.
pub fn pgm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| BenchError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Stacks every PGM frame of `dir` into one tensor.
pub fn read_pgm_stack(dir: &Path, layout: Layout) -> Result<Tensor3f64> {
    let files = pgm_files(dir)?;
    if files.is_empty() {
        return Err(BenchError::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "no .pgm files")));
    }
    let mut frames = Vec::with_capacity(files.len());
    for f in &files {
        let bytes = fs::read(f).map_err(|e| BenchError::io(f, e))?;
        let frame = decode_pgm(f, &bytes)?;
        if let Some(first) = frames.first() {
            let first: &PgmFrame = first;
            if (first.height, first.width) != (frame.height, frame.width) {
                return Err(BenchError::Format {
                    path: f.clone(),
                    offset: 0,
                    reason: format!(
                        "frame is {}x{}, expected {}x{} like {}",
                        frame.height,
                        frame.width,
                        first.height,
                        first.width,
                        files[0].display()
                    ),
                });
            }
        }
        frames.push(frame);
    }
    let (h, w, nf) = (frames[0].height, frames[0].width, frames.len());
    let px = |f: usize, row: usize, col: usize| frames[f].pixels[row * w + col];
    Ok(match layout {
        Layout::Frontal => Tensor3f64::from_fn(h, w, nf, |i, j, k| px(k, i, j)),
        Layout::Lateral => Tensor3f64::from_fn(h, nf, w, |i, j, k| px(j, i, k)),
    })
}
