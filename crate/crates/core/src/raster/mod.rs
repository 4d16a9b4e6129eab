//! Image containers, color-space conversion, and file I/O.
//!
//! [`ImageBuffer`] is the universal 8-bit pixel container used by every
//! other module: row-major, channel-interleaved, 1 (grayscale) or 3 (RGB)
//! channels. Supported containers are binary netpbm (P5/P6) and PNG;
//! 16-bit sources are rejected rather than truncated.

mod hsv;
mod pnm;
mod png_io;

pub use hsv::{hsv_to_rgb, rgb_to_hsv, HsvPixel};

use std::io;
use thiserror::Error;

/// Errors raised by image construction, decoding, and encoding.
#[derive(Debug, Error)]
pub enum RasterError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported bit depth: {bits} bits per sample (only 8-bit images are accepted)")]
    UnsupportedBitDepth { bits: u32 },
    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("unsupported color type: {0}")]
    UnsupportedColorType(String),
    #[error("unrecognized image container (not netpbm P5/P6 or PNG)")]
    UnknownFormat,
    #[error("{format:?} cannot hold a {channels}-channel image")]
    FormatChannelMismatch { format: ImageFormat, channels: u8 },
    #[error("invalid image geometry: {0}")]
    InvalidGeometry(String),
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// Supported file containers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    /// Binary portable graymap, P5, maxval 255. Grayscale only.
    Pgm,
    /// Binary portable pixmap, P6, maxval 255. RGB only.
    Ppm,
    /// PNG, 8-bit grayscale or RGB.
    Png,
}

impl ImageFormat {
    /// Picks the container from a file extension (case-insensitive).
    pub fn from_extension(ext: &str) -> Option<ImageFormat> {
        match ext.to_ascii_lowercase().as_str() {
            "pgm" => Some(ImageFormat::Pgm),
            "ppm" => Some(ImageFormat::Ppm),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }

    pub fn supports_channels(self, channels: u8) -> bool {
        match self {
            ImageFormat::Pgm => channels == 1,
            ImageFormat::Ppm => channels == 3,
            ImageFormat::Png => channels == 1 || channels == 3,
        }
    }
}

/// 8-bit raster, row-major, channel-interleaved. Immutable after
/// construction; operations return new buffers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl ImageBuffer {
    /// Builds a buffer, checking that `data.len() == width * height * channels`
    /// and that `channels` is 1 or 3.
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::InvalidGeometry(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(RasterError::InvalidGeometry(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let expected = (width as usize)
            .checked_mul(height as usize)
            .and_then(|n| n.checked_mul(channels as usize))
            .ok_or_else(|| RasterError::InvalidGeometry("dimension overflow".into()))?;
        if data.len() != expected {
            return Err(RasterError::InvalidGeometry(format!(
                "data length {} does not match {width}x{height}x{channels} = {expected}",
                data.len()
            )));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            data,
        })
    }

    /// Constant-valued image.
    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Result<Self, RasterError> {
        let n = width as usize * height as usize * channels as usize;
        ImageBuffer::new(width, height, channels, vec![value; n])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Sample at (x, y) in channel `c`. Panics on out-of-range coordinates.
    pub fn get(&self, x: u32, y: u32, c: u8) -> u8 {
        debug_assert!(x < self.width && y < self.height && c < self.channels);
        let idx = (y as usize * self.width as usize + x as usize) * self.channels as usize
            + c as usize;
        self.data[idx]
    }

    /// Splits into single-channel planes (one per channel, in channel order).
    pub fn split_channels(&self) -> Vec<ImageBuffer> {
        let c = self.channels as usize;
        (0..c)
            .map(|ch| {
                let plane: Vec<u8> = self.data.iter().skip(ch).step_by(c).copied().collect();
                ImageBuffer {
                    width: self.width,
                    height: self.height,
                    channels: 1,
                    data: plane,
                }
            })
            .collect()
    }

    /// Interleaves single-channel planes back into one image.
    pub fn from_planes(planes: &[ImageBuffer]) -> Result<ImageBuffer, RasterError> {
        if planes.len() != 1 && planes.len() != 3 {
            return Err(RasterError::InvalidGeometry(format!(
                "expected 1 or 3 planes, got {}",
                planes.len()
            )));
        }
        let (w, h) = (planes[0].width, planes[0].height);
        for p in planes {
            if p.channels != 1 || p.width != w || p.height != h {
                return Err(RasterError::InvalidGeometry(
                    "planes must be single-channel and same size".into(),
                ));
            }
        }
        let c = planes.len();
        let mut data = vec![0u8; w as usize * h as usize * c];
        for (ch, p) in planes.iter().enumerate() {
            for (i, &v) in p.data.iter().enumerate() {
                data[i * c + ch] = v;
            }
        }
        Ok(ImageBuffer {
            width: w,
            height: h,
            channels: c as u8,
            data,
        })
    }

    /// Applies a 256-entry lookup table to every sample.
    pub fn apply_lut(&self, lut: &[u8; 256]) -> ImageBuffer {
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| lut[v as usize]).collect(),
        }
    }
}

/// Real-valued image carrier for Z-score output and pre-quantization
/// enhancement results. All samples are finite. Samples are held as f64;
/// the file form narrows them to 32-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<f64>,
}

impl FloatImage {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<f64>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 || (channels != 1 && channels != 3) {
            return Err(RasterError::InvalidGeometry(format!(
                "bad geometry {width}x{height}x{channels}"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(RasterError::InvalidGeometry(format!(
                "data length {} does not match {expected}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(RasterError::NonFiniteSample(i));
        }
        Ok(FloatImage {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Serializes as raw little-endian f32 samples behind a 12-byte header
    /// (width, height, channels as unsigned 32-bit little-endian).
    pub fn write_to<W: io::Write>(&self, mut w: W) -> Result<(), RasterError> {
        w.write_all(&self.width.to_le_bytes())?;
        w.write_all(&self.height.to_le_bytes())?;
        w.write_all(&(self.channels as u32).to_le_bytes())?;
        for &v in &self.data {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        Ok(())
    }

    /// Inverse of [`FloatImage::write_to`].
    pub fn read_from<R: io::Read>(mut r: R) -> Result<FloatImage, RasterError> {
        let mut header = [0u8; 12];
        r.read_exact(&mut header)?;
        let width = u32::from_le_bytes(header[0..4].try_into().unwrap());
        let height = u32::from_le_bytes(header[4..8].try_into().unwrap());
        let channels = u32::from_le_bytes(header[8..12].try_into().unwrap());
        if channels != 1 && channels != 3 {
            return Err(RasterError::MalformedHeader(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let n = width as usize * height as usize * channels as usize;
        let mut raw = vec![0u8; n * 4];
        r.read_exact(&mut raw)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        FloatImage::new(width, height, channels as u8, data)
    }
}

/// Decodes netpbm (P5/P6) or PNG bytes, sniffing the container from the
/// leading magic. 16-bit sources are rejected, not truncated.
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer, RasterError> {
    match bytes {
        [b'P', b'5', ..] | [b'P', b'6', ..] => pnm::decode(bytes),
        [0x89, b'P', b'N', b'G', ..] => png_io::decode(bytes),
        _ => Err(RasterError::UnknownFormat),
    }
}

/// Encodes into the requested container. The format must support the
/// image's channel count.
pub fn encode_image(img: &ImageBuffer, format: ImageFormat) -> Result<Vec<u8>, RasterError> {
    if !format.supports_channels(img.channels()) {
        return Err(RasterError::FormatChannelMismatch {
            format,
            channels: img.channels(),
        });
    }
    match format {
        ImageFormat::Pgm | ImageFormat::Ppm => Ok(pnm::encode(img)),
        ImageFormat::Png => png_io::encode(img),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks_length() {
        assert!(ImageBuffer::new(2, 2, 1, vec![0; 4]).is_ok());
        assert!(matches!(
            ImageBuffer::new(2, 2, 1, vec![0; 5]),
            Err(RasterError::InvalidGeometry(_))
        ));
        assert!(ImageBuffer::new(2, 2, 2, vec![0; 8]).is_err());
        assert!(ImageBuffer::new(0, 2, 1, vec![]).is_err());
    }

    #[test]
    fn split_and_merge_roundtrip() {
        let img = ImageBuffer::new(2, 1, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let planes = img.split_channels();
        assert_eq!(planes[0].data(), &[1, 4]);
        assert_eq!(planes[1].data(), &[2, 5]);
        assert_eq!(planes[2].data(), &[3, 6]);
        let back = ImageBuffer::from_planes(&planes).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn decode_rejects_unknown_magic() {
        assert!(matches!(
            decode_image(b"GIF89a..."),
            Err(RasterError::UnknownFormat)
        ));
    }

    #[test]
    fn encode_rejects_channel_mismatch() {
        let rgb = ImageBuffer::filled(2, 2, 3, 10).unwrap();
        assert!(matches!(
            encode_image(&rgb, ImageFormat::Pgm),
            Err(RasterError::FormatChannelMismatch { .. })
        ));
        let gray = ImageBuffer::filled(2, 2, 1, 10).unwrap();
        assert!(matches!(
            encode_image(&gray, ImageFormat::Ppm),
            Err(RasterError::FormatChannelMismatch { .. })
        ));
    }

    #[test]
    fn float_image_io_roundtrip() {
        let fi = FloatImage::new(2, 2, 1, vec![-1.5, 0.0, 0.25, 3.75]).unwrap();
        let mut buf = Vec::new();
        fi.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 12 + 16);
        assert_eq!(&buf[0..4], &2u32.to_le_bytes());
        let back = FloatImage::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, fi);
    }

    #[test]
    fn float_image_rejects_nan() {
        assert!(matches!(
            FloatImage::new(1, 1, 1, vec![f64::NAN]),
            Err(RasterError::NonFiniteSample(0))
        ));
    }
}
