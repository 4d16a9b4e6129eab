//! Binary netpbm (P5 graymap / P6 pixmap) codec, maxval 255.

use super::{ImageBuffer, RasterError};

/// Parses a P5/P6 payload. Header tokens may be separated by arbitrary
/// whitespace and `#` comments; exactly one whitespace byte separates the
/// maxval token from the raster data.
pub(super) fn decode(bytes: &[u8]) -> Result<ImageBuffer, RasterError> {
    let channels: u8 = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        _ => return Err(RasterError::UnknownFormat),
    };
    let mut pos = 2;
    let width = read_token(bytes, &mut pos)?;
    let height = read_token(bytes, &mut pos)?;
    let maxval = read_token(bytes, &mut pos)?;
    if maxval > 255 {
        return Err(RasterError::UnsupportedBitDepth { bits: 16 });
    }
    if maxval != 255 {
        return Err(RasterError::MalformedHeader(format!(
            "maxval must be 255, got {maxval}"
        )));
    }
    if width == 0 || height == 0 {
        return Err(RasterError::MalformedHeader(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    // single whitespace byte after the maxval token, then raw samples
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(RasterError::MalformedHeader(
                "expected single whitespace before raster data".into(),
            ))
        }
    }
    let expected = (width as usize)
        .checked_mul(height as usize)
        .and_then(|n| n.checked_mul(channels as usize))
        .ok_or_else(|| RasterError::MalformedHeader("dimension overflow".into()))?;
    let actual = bytes.len() - pos;
    if actual < expected {
        return Err(RasterError::TruncatedPayload { expected, actual });
    }
    ImageBuffer::new(
        width,
        height,
        channels,
        bytes[pos..pos + expected].to_vec(),
    )
}

/// Emits `P5`/`P6`, dimensions, and maxval 255, each token followed by a
/// single whitespace byte, then the raw samples.
pub(super) fn encode(img: &ImageBuffer) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

fn read_token(bytes: &[u8], pos: &mut usize) -> Result<u32, RasterError> {
    // skip whitespace and # comments
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(b) = bytes.get(*pos) {
                    *pos += 1;
                    if *b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(RasterError::MalformedHeader("unexpected end of header".into())),
        }
    }
    let start = *pos;
    while let Some(b) = bytes.get(*pos) {
        if b.is_ascii_digit() {
            *pos += 1;
        } else {
            break;
        }
    }
    if start == *pos {
        return Err(RasterError::MalformedHeader(format!(
            "expected integer at byte {start}"
        )));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| RasterError::MalformedHeader("integer token out of range".into()))
}
