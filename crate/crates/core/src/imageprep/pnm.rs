//! Binary PPM (P6) and PGM (P5) with maxval 255.

use std::path::Path;

use super::RasterImage;
use crate::error::{Error, Result};

fn bad(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line: 1,
        message: message.into(),
    }
}

/// Parses P5/P6 bytes. Header comments (`#` to end of line) are skipped.
pub fn decode(bytes: &[u8], path: &Path) -> Result<RasterImage> {
    let mut pos = 0;
    let mut token = || -> Result<&[u8]> {
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
            return Err(bad(path, "truncated header"));
        }
        Ok(&bytes[start..pos])
    };

    let channels = match token()? {
        b"P6" => 3,
        b"P5" => 1,
        other => {
            return Err(bad(
                path,
                format!("unsupported magic {:?}", String::from_utf8_lossy(other)),
            ))
        }
    };
    let mut number = |what: &str| -> Result<usize> {
        let t = token()?;
        std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(path, format!("invalid {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 255 {
        return Err(bad(path, format!("maxval {maxval}; only 255 is supported")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    let data_start = pos + 1;
    let expected = width * height * channels;
    if bytes.len() < data_start || bytes.len() - data_start != expected {
        return Err(bad(
            path,
            format!(
                "expected {expected} raster bytes, found {}",
                bytes.len().saturating_sub(data_start)
            ),
        ));
    }
    RasterImage::new(width, height, channels, bytes[data_start..].to_vec())
}

pub fn encode(img: &RasterImage) -> Vec<u8> {
    let magic = if img.channels() == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn read(path: &Path) -> Result<RasterImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}

pub fn write(path: &Path, img: &RasterImage) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, encode(img)).map_err(|e| Error::io(path, e))
}
