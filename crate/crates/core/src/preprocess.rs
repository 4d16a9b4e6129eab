//! Geometric and statistical preprocessing: bilinear resize, Z-score
//! normalization, rotation augmentation, and lung-mask application.

use crate::raster::{FloatImage, ImageBuffer};
use crate::seeded::keyed_rng;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("rotation angle {0} outside [-45, 45] degrees")]
    AngleOutOfRange(f64),
    #[error("mask is {mask_w}x{mask_h} but image is {img_w}x{img_h}")]
    DimensionMismatch {
        img_w: u32,
        img_h: u32,
        mask_w: u32,
        mask_h: u32,
    },
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

/// Output geometry for resizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResizeSpec {
    pub target_w: u32,
    pub target_h: u32,
}

impl ResizeSpec {
    pub fn new(target_w: u32, target_h: u32) -> Result<ResizeSpec, PreprocessError> {
        if target_w == 0 || target_h == 0 {
            return Err(PreprocessError::InvalidSpec(format!(
                "resize target must be positive, got {target_w}x{target_h}"
            )));
        }
        Ok(ResizeSpec { target_w, target_h })
    }
}

/// Rotation-augmentation policy: how many rotated variants per image,
/// the angle bound, and the run seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentSpec {
    pub copies_per_image: u32,
    pub max_abs_angle: f64,
    pub seed: u64,
}

impl AugmentSpec {
    pub fn new(copies_per_image: u32, max_abs_angle: f64, seed: u64) -> Result<AugmentSpec, PreprocessError> {
        if !(max_abs_angle > 0.0 && max_abs_angle <= 45.0) {
            return Err(PreprocessError::InvalidSpec(format!(
                "max absolute angle must be in (0, 45], got {max_abs_angle}"
            )));
        }
        Ok(AugmentSpec {
            copies_per_image,
            max_abs_angle,
            seed,
        })
    }
}

/// Per-pixel lung mask; true marks a lung pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, data: Vec<bool>) -> Result<BinaryMask, PreprocessError> {
        if data.len() != width as usize * height as usize {
            return Err(PreprocessError::InvalidSpec(format!(
                "mask data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            data,
        })
    }

    /// Reads a mask from a single-channel image: intensity >= 128 is lung.
    pub fn from_image(img: &ImageBuffer) -> Result<BinaryMask, PreprocessError> {
        if img.channels() != 1 {
            return Err(PreprocessError::InvalidSpec(format!(
                "mask image must be single-channel, got {}",
                img.channels()
            )));
        }
        BinaryMask::new(
            img.width(),
            img.height(),
            img.data().iter().map(|&v| v >= 128).collect(),
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }
}

/// Bilinear resize with half-pixel-center coordinates and edge clamping.
/// Resizing to the source geometry reproduces the input bit-exactly.
pub fn resize_bilinear(img: &ImageBuffer, spec: &ResizeSpec) -> ImageBuffer {
    let (in_w, in_h) = (img.width() as usize, img.height() as usize);
    let (out_w, out_h) = (spec.target_w as usize, spec.target_h as usize);
    let channels = img.channels() as usize;
    let scale_x = in_w as f64 / out_w as f64;
    let scale_y = in_h as f64 / out_h as f64;

    let mut out = vec![0u8; out_w * out_h * channels];
    let src = img.data();
    for oy in 0..out_h {
        let sy = (oy as f64 + 0.5) * scale_y - 0.5;
        let y0 = sy.floor();
        let fy = sy - y0;
        let y0c = (y0 as i64).clamp(0, in_h as i64 - 1) as usize;
        let y1c = (y0 as i64 + 1).clamp(0, in_h as i64 - 1) as usize;
        for ox in 0..out_w {
            let sx = (ox as f64 + 0.5) * scale_x - 0.5;
            let x0 = sx.floor();
            let fx = sx - x0;
            let x0c = (x0 as i64).clamp(0, in_w as i64 - 1) as usize;
            let x1c = (x0 as i64 + 1).clamp(0, in_w as i64 - 1) as usize;
            for c in 0..channels {
                let at = |y: usize, x: usize| src[(y * in_w + x) * channels + c] as f64;
                let top = at(y0c, x0c) * (1.0 - fx) + at(y0c, x1c) * fx;
                let bottom = at(y1c, x0c) * (1.0 - fx) + at(y1c, x1c) * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                out[(oy * out_w + ox) * channels + c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    ImageBuffer::new(spec.target_w, spec.target_h, img.channels(), out)
        .expect("output geometry is valid")
}

/// Z-score standardization with per-image population statistics. A
/// zero-variance image maps to all zeros.
pub fn zscore_normalize(img: &ImageBuffer) -> FloatImage {
    let data = img.data();
    let n = data.len() as f64;
    let mean = data.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = data
        .iter()
        .map(|&v| {
            let d = v as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    let std = var.sqrt();
    let z: Vec<f64> = if std == 0.0 {
        vec![0.0; data.len()]
    } else {
        data.iter().map(|&v| (v as f64 - mean) / std).collect()
    };
    FloatImage::new(img.width(), img.height(), img.channels(), z)
        .expect("z-scores of finite input are finite")
}

/// Rotates about the image center with bilinear resampling. Pixels pulled
/// from outside the frame are black; output geometry is unchanged.
pub fn rotate(img: &ImageBuffer, angle_deg: f64) -> Result<ImageBuffer, PreprocessError> {
    if !(angle_deg.is_finite() && angle_deg.abs() <= 45.0) {
        return Err(PreprocessError::AngleOutOfRange(angle_deg));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let channels = img.channels() as usize;
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let rad = angle_deg.to_radians();
    let (sin, cos) = rad.sin_cos();

    let src = img.data();
    let sample = |x: i64, y: i64, c: usize| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            src[(y as usize * w + x as usize) * channels + c] as f64
        }
    };

    let mut out = vec![0u8; w * h * channels];
    for oy in 0..h {
        for ox in 0..w {
            // inverse map: rotate the destination offset back by -angle
            let dx = ox as f64 - cx;
            let dy = oy as f64 - cy;
            let sx = cos * dx + sin * dy + cx;
            let sy = -sin * dx + cos * dy + cy;
            let x0 = sx.floor() as i64;
            let y0 = sy.floor() as i64;
            let fx = sx - x0 as f64;
            let fy = sy - y0 as f64;
            for c in 0..channels {
                let top = sample(x0, y0, c) * (1.0 - fx) + sample(x0 + 1, y0, c) * fx;
                let bottom = sample(x0, y0 + 1, c) * (1.0 - fx) + sample(x0 + 1, y0 + 1, c) * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                out[(oy * w + ox) * channels + c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Ok(ImageBuffer::new(img.width(), img.height(), img.channels(), out).expect("same geometry"))
}

/// Produces `copies_per_image` rotated variants with angles drawn uniformly
/// from [-max_abs_angle, +max_abs_angle] by a generator keyed on
/// (seed, image_id). The result depends only on those inputs, never on
/// batch order or thread count.
pub fn augment_rotations(
    img: &ImageBuffer,
    spec: &AugmentSpec,
    image_id: &str,
) -> Vec<ImageBuffer> {
    let mut rng = keyed_rng(spec.seed, image_id);
    (0..spec.copies_per_image)
        .map(|_| {
            let angle = rng.gen_range(-spec.max_abs_angle..=spec.max_abs_angle);
            rotate(img, angle).expect("angle drawn within the validated bound")
        })
        .collect()
}

/// Keeps pixels where the mask is set and zeroes the rest, channel-wise.
pub fn apply_mask(img: &ImageBuffer, mask: &BinaryMask) -> Result<ImageBuffer, PreprocessError> {
    if img.width() != mask.width || img.height() != mask.height {
        return Err(PreprocessError::DimensionMismatch {
            img_w: img.width(),
            img_h: img.height(),
            mask_w: mask.width,
            mask_h: mask.height,
        });
    }
    let channels = img.channels() as usize;
    let mut out = img.data().to_vec();
    for (i, &keep) in mask.data.iter().enumerate() {
        if !keep {
            out[i * channels..(i + 1) * channels].fill(0);
        }
    }
    Ok(ImageBuffer::new(img.width(), img.height(), img.channels(), out).expect("same geometry"))
}
