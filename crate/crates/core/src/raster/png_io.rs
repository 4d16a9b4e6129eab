//! PNG codec for 8-bit grayscale and RGB images.

use super::{ImageBuffer, RasterError};
use std::io;

pub(super) fn decode(bytes: &[u8]) -> Result<ImageBuffer, RasterError> {
    let decoder = png::Decoder::new(bytes);
    let mut reader = decoder.read_info().map_err(map_decode_err)?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Eight {
        return Err(RasterError::UnsupportedBitDepth {
            bits: bit_depth_bits(info.bit_depth),
        });
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => return Err(RasterError::UnsupportedColorType(format!("{other:?}"))),
    };
    let (width, height) = (info.width, info.height);
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let frame = reader.next_frame(&mut buf).map_err(map_decode_err)?;
    buf.truncate(frame.buffer_size());
    ImageBuffer::new(width, height, channels, buf)
}

pub(super) fn encode(img: &ImageBuffer) -> Result<Vec<u8>, RasterError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width(), img.height());
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_color(if img.channels() == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        let mut writer = encoder
            .write_header()
            .map_err(|e| RasterError::MalformedHeader(e.to_string()))?;
        writer
            .write_image_data(img.data())
            .map_err(|e| RasterError::Io(io::Error::other(e.to_string())))?;
    }
    Ok(out)
}

fn bit_depth_bits(d: png::BitDepth) -> u32 {
    match d {
        png::BitDepth::One => 1,
        png::BitDepth::Two => 2,
        png::BitDepth::Four => 4,
        png::BitDepth::Eight => 8,
        png::BitDepth::Sixteen => 16,
    }
}

fn map_decode_err(e: png::DecodingError) -> RasterError {
    match e {
        png::DecodingError::IoError(io_err) if io_err.kind() == io::ErrorKind::UnexpectedEof => {
            RasterError::TruncatedPayload {
                expected: 0,
                actual: 0,
            }
        }
        other => RasterError::MalformedHeader(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{decode_image, encode_image, ImageFormat};
    use super::*;

    #[test]
    fn png_roundtrip_gray_and_rgb() {
        for channels in [1u8, 3] {
            let data: Vec<u8> = (0..4 * 3 * channels as usize).map(|i| (i * 7) as u8).collect();
            let img = ImageBuffer::new(4, 3, channels, data).unwrap();
            let bytes = encode_image(&img, ImageFormat::Png).unwrap();
            assert_eq!(&bytes[..4], &[0x89, b'P', b'N', b'G']);
            let back = decode_image(&bytes).unwrap();
            assert_eq!(back, img);
        }
    }

    #[test]
    fn rejects_16_bit_png() {
        let mut bytes = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut bytes, 2, 2);
            enc.set_depth(png::BitDepth::Sixteen);
            enc.set_color(png::ColorType::Grayscale);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[0u8; 8]).unwrap();
        }
        assert!(matches!(
            decode_image(&bytes),
            Err(RasterError::UnsupportedBitDepth { bits: 16 })
        ));
    }

    #[test]
    fn rejects_rgba_png() {
        let mut bytes = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut bytes, 1, 1);
            enc.set_depth(png::BitDepth::Eight);
            enc.set_color(png::ColorType::Rgba);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[1, 2, 3, 4]).unwrap();
        }
        assert!(matches!(
            decode_image(&bytes),
            Err(RasterError::UnsupportedColorType(_))
        ));
    }

    #[test]
    fn truncated_png_reports_truncation() {
        let img = ImageBuffer::filled(16, 16, 1, 42).unwrap();
        let bytes = encode_image(&img, ImageFormat::Png).unwrap();
        let cut = &bytes[..bytes.len() / 2];
        assert!(decode_image(cut).is_err());
    }
}
