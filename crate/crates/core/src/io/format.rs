use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{ComplexImage, KSpace};
use crate::sampling::CartesianMask;
use num_complex::Complex64;

const MAGIC: &[u8; 4] = b"KSP1";
const HEADER_LEN: usize = 16;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

pub fn encode_ksp(k: &KSpace) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + k.data().len() * 16);
    out.extend_from_slice(MAGIC);
    for dim in [k.coils(), k.height(), k.width()] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in k.data() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_ksp(bytes: &[u8]) -> Result<KSpace> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing KSP1 header".into()));
    }
    let dim = |i: usize| {
        let mut b = [0u8; 4];
        b.copy_from_slice(&bytes[4 + 4 * i..8 + 4 * i]);
        u32::from_le_bytes(b) as usize
    };
    let (coils, height, width) = (dim(0), dim(1), dim(2));
    let count = coils
        .checked_mul(height)
        .and_then(|n| n.checked_mul(width))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let expected = count
        .checked_mul(16)
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{coils}x{height}x{width} needs {expected} bytes, file has {}",
            bytes.len()
        )));
    }
    let real = |off: usize| {
        let mut b = [0u8; 8];
        b.copy_from_slice(&bytes[off..off + 8]);
        f64::from_le_bytes(b)
    };
    let data = (0..count)
        .map(|i| {
            let off = HEADER_LEN + 16 * i;
            Complex64::new(real(off), real(off + 8))
        })
        .collect();
    KSpace::new(coils, height, width, data)
}

pub fn write_ksp(path: &Path, k: &KSpace) -> Result<()> {
    write_bytes(path, &encode_ksp(k))
}

pub fn read_ksp(path: &Path) -> Result<KSpace> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    decode_ksp(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn encode_mask(mask: &CartesianMask) -> String {
    format!("{mask}\n")
}

pub fn decode_mask(text: &str) -> Result<CartesianMask> {
    let line = text
        .strip_suffix('\n')
        .ok_or_else(|| Error::Format("mask line must end with a newline".into()))?;
    let cols = line
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Format(format!(
                "unexpected mask character {other:?}"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    CartesianMask::new(cols)
}

pub fn write_mask(path: &Path, mask: &CartesianMask) -> Result<()> {
    write_bytes(path, encode_mask(mask).as_bytes())
}

pub fn read_mask(path: &Path) -> Result<CartesianMask> {
    decode_mask(&read_text(path)?)
}

/// 16-bit P5 PGM of `|img|`, linearly mapping `[0, peak]` to `[0, 65535]`.
/// Values above `peak` saturate; a zero peak gives a black image.
pub fn encode_pgm(img: &ComplexImage, peak: f64) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", img.width(), img.height()).into_bytes();
    for v in img.data() {
        let level = if peak > 0.0 {
            (v.norm() / peak).clamp(0.0, 1.0) * 65535.0
        } else {
            0.0
        };
        out.extend_from_slice(&(level.round() as u16).to_be_bytes());
    }
    out
}
