//! File formats.
//!
//! - Masks: binary PGM (`P5`, maxval 255, foreground written as 255) or 8-bit
//!   grayscale PNG. On read, any nonzero sample is foreground.
//! - Probability maps: an 8-byte header of `width` and `height` as
//!   little-endian `u32`, followed by `width × height` little-endian `f32`
//!   values in row-major order.
//! - Landmark sets: CSV with a first line `n=<n>`, then one row of `2n`
//!   comma-separated reals per shape.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat, Luma};

use crate::error::{Result, ShapeError};
use crate::landmark::LandmarkShape;
use crate::raster::{BinaryMask, ProbabilityMap};

/// Mask encodings recognized by file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskFormat {
    Pgm,
    Png,
}

impl MaskFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(MaskFormat::Pgm),
            "png" => Some(MaskFormat::Png),
            _ => None,
        }
    }
}

pub fn encode_pgm(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.pixels().iter().map(|&p| if p { 255u8 } else { 0 }));
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<BinaryMask> {
    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(ShapeError::Format("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    if magic != "P5" {
        return Err(ShapeError::Format(format!("expected PGM magic P5, found {magic:?}")));
    }
    let mut num = |what: &str| -> Result<usize> {
        let t = token()?;
        t.parse()
            .map_err(|_| ShapeError::Format(format!("bad PGM {what}: {t:?}")))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(ShapeError::Format(format!("bad PGM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let sample = if maxval < 256 { 1 } else { 2 };
    let need = width * height * sample;
    if bytes.len() < pos + need {
        return Err(ShapeError::Format(format!(
            "PGM raster truncated: need {need} bytes, have {}",
            bytes.len().saturating_sub(pos)
        )));
    }
    let raster = &bytes[pos..pos + need];
    let pixels = raster
        .chunks_exact(sample)
        .map(|c| c.iter().any(|&b| b != 0))
        .collect();
    BinaryMask::new(width, height, pixels)
}

pub fn encode_png(mask: &BinaryMask) -> Result<Vec<u8>> {
    let img = GrayImage::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
        Luma([if mask.get(x as usize, y as usize) { 255 } else { 0 }])
    });
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| ShapeError::Format(format!("PNG encode: {e}")))?;
    Ok(out.into_inner())
}

pub fn decode_png(bytes: &[u8]) -> Result<BinaryMask> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| ShapeError::Format(format!("PNG decode: {e}")))?
        .into_luma8();
    let (w, h) = img.dimensions();
    BinaryMask::new(
        w as usize,
        h as usize,
        img.pixels().map(|p| p.0[0] != 0).collect(),
    )
}

/// Reads a mask, choosing the decoder from the file extension.
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let format = MaskFormat::from_path(path).ok_or_else(|| {
        ShapeError::Format(format!("{}: unknown mask extension (use .pgm or .png)", path.display()))
    })?;
    let bytes = fs::read(path)?;
    match format {
        MaskFormat::Pgm => decode_pgm(&bytes),
        MaskFormat::Png => decode_png(&bytes),
    }
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let path = path.as_ref();
    let bytes = match MaskFormat::from_path(path) {
        Some(MaskFormat::Pgm) => encode_pgm(mask),
        Some(MaskFormat::Png) => encode_png(mask)?,
        None => {
            return Err(ShapeError::Format(format!(
                "{}: unknown mask extension (use .pgm or .png)",
                path.display()
            )))
        }
    };
    fs::write(path, bytes)?;
    Ok(())
}

pub fn encode_probability_map(pmap: &ProbabilityMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 4 * pmap.values().len());
    out.extend_from_slice(&(pmap.width() as u32).to_le_bytes());
    out.extend_from_slice(&(pmap.height() as u32).to_le_bytes());
    for &v in pmap.values() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_probability_map(bytes: &[u8]) -> Result<ProbabilityMap> {
    if bytes.len() < 8 {
        return Err(ShapeError::Format("probability map shorter than its 8-byte header".into()));
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if body.len() != 4 * width * height {
        return Err(ShapeError::Format(format!(
            "probability map {width}x{height} needs {} data bytes, found {}",
            4 * width * height,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    ProbabilityMap::new(width, height, values)
}

pub fn read_probability_map(path: impl AsRef<Path>) -> Result<ProbabilityMap> {
    decode_probability_map(&fs::read(path)?)
}

pub fn write_probability_map(path: impl AsRef<Path>, pmap: &ProbabilityMap) -> Result<()> {
    fs::write(path, encode_probability_map(pmap))?;
    Ok(())
}

pub fn landmarks_to_csv(shapes: &[LandmarkShape]) -> Result<String> {
    let n = shapes.first().map_or(0, |s| s.n());
    let mut out = format!("n={n}\n");
    for s in shapes {
        if s.n() != n {
            return Err(crate::error::mismatch(format!("{n} landmarks"), format!("{} landmarks", s.n())));
        }
        let row: Vec<String> = s.coords().iter().map(|c| c.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn landmarks_from_csv(text: &str) -> Result<Vec<LandmarkShape>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| ShapeError::Format("empty landmark CSV".into()))?;
    let n: usize = header
        .trim()
        .strip_prefix("n=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| ShapeError::Format(format!("landmark CSV header must be n=<n>, found {header:?}")))?;
    let mut shapes = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let coords = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| ShapeError::Format(format!("landmark CSV row {}: {e}", i + 1)))?;
        if coords.len() != 2 * n {
            return Err(ShapeError::Format(format!(
                "landmark CSV row {} has {} values, expected {}",
                i + 1,
                coords.len(),
                2 * n
            )));
        }
        shapes.push(LandmarkShape::new(coords)?);
    }
    Ok(shapes)
}
