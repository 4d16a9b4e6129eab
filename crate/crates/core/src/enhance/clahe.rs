//! Contrast-limited adaptive histogram equalization.
//!
//! The plane is divided into a tile grid; each tile gets its own clipped
//! histogram and the same min-normalized equalization mapping as plain HE.
//! Output pixels blend the four surrounding tile-center mappings
//! bilinearly, clamping to the nearest tile at the borders. Three-channel
//! input is routed through HSV: only the value component is equalized.

use super::{equalization_lut, EnhanceError};
use crate::raster::{hsv_to_rgb, rgb_to_hsv, HsvPixel, ImageBuffer};

const MIN_TILE_PIXELS: usize = 16;
const MAX_REDISTRIBUTION_PASSES: usize = 100;

/// Tile-grid geometry and the clip threshold, expressed as a multiple of
/// the uniform bin height `tile_pixels / 256`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaheParams {
    pub tiles_x: u32,
    pub tiles_y: u32,
    pub clip_factor: f64,
}

impl ClaheParams {
    pub fn new(tiles_x: u32, tiles_y: u32, clip_factor: f64) -> Result<ClaheParams, EnhanceError> {
        if tiles_x == 0 || tiles_y == 0 {
            return Err(EnhanceError::InvalidTileGrid(format!(
                "grid must be at least 1x1, got {tiles_x}x{tiles_y}"
            )));
        }
        if clip_factor <= 0.0 || clip_factor.is_nan() {
            return Err(EnhanceError::InvalidTileGrid(format!(
                "clip factor must be positive, got {clip_factor}"
            )));
        }
        Ok(ClaheParams {
            tiles_x,
            tiles_y,
            clip_factor,
        })
    }
}

impl Default for ClaheParams {
    fn default() -> Self {
        ClaheParams {
            tiles_x: 8,
            tiles_y: 8,
            clip_factor: 2.0,
        }
    }
}

/// Runs CLAHE on a grayscale plane directly, or on the quantized value
/// channel of an RGB image.
pub fn clahe(img: &ImageBuffer, params: &ClaheParams) -> Result<ImageBuffer, EnhanceError> {
    match img.channels() {
        1 => clahe_plane(img, params),
        _ => clahe_rgb(img, params),
    }
}

fn clahe_rgb(img: &ImageBuffer, params: &ClaheParams) -> Result<ImageBuffer, EnhanceError> {
    let n = img.pixel_count();
    let data = img.data();
    let mut value_plane = vec![0u8; n];
    let mut hue_sat = vec![(0.0f64, 0.0f64); n];
    for i in 0..n {
        let p = rgb_to_hsv(data[3 * i], data[3 * i + 1], data[3 * i + 2]);
        value_plane[i] = (p.value * 255.0).round().clamp(0.0, 255.0) as u8;
        hue_sat[i] = (p.hue_deg, p.saturation);
    }
    let plane = ImageBuffer::new(img.width(), img.height(), 1, value_plane.clone())
        .expect("plane geometry matches source");
    let equalized = clahe_plane(&plane, params)?;

    let mut out = Vec::with_capacity(data.len());
    for i in 0..n {
        let new_v = equalized.data()[i];
        if new_v == value_plane[i] {
            // value untouched, so the pixel is untouched
            out.extend_from_slice(&data[3 * i..3 * i + 3]);
        } else {
            let (hue_deg, saturation) = hue_sat[i];
            let (r, g, b) = hsv_to_rgb(HsvPixel {
                hue_deg,
                saturation,
                value: new_v as f64 / 255.0,
            });
            out.extend_from_slice(&[r, g, b]);
        }
    }
    Ok(ImageBuffer::new(img.width(), img.height(), 3, out).expect("same geometry"))
}

fn clahe_plane(plane: &ImageBuffer, params: &ClaheParams) -> Result<ImageBuffer, EnhanceError> {
    let (w, h) = (plane.width() as usize, plane.height() as usize);
    let (tx, ty) = (params.tiles_x as usize, params.tiles_y as usize);
    let x_edges: Vec<usize> = (0..=tx).map(|i| i * w / tx).collect();
    let y_edges: Vec<usize> = (0..=ty).map(|j| j * h / ty).collect();

    // per-tile equalization mappings
    let mut luts: Vec<[u8; 256]> = Vec::with_capacity(tx * ty);
    for j in 0..ty {
        for i in 0..tx {
            let (x0, x1) = (x_edges[i], x_edges[i + 1]);
            let (y0, y1) = (y_edges[j], y_edges[j + 1]);
            let tile_pixels = (x1 - x0) * (y1 - y0);
            if tile_pixels < MIN_TILE_PIXELS {
                return Err(EnhanceError::TileTooSmall { tile_pixels });
            }
            let mut counts = [0u64; 256];
            for y in y0..y1 {
                let row = &plane.data()[y * w..(y + 1) * w];
                for &v in &row[x0..x1] {
                    counts[v as usize] += 1;
                }
            }
            let total = tile_pixels as u64;
            if counts.contains(&total) {
                // constant tile: equalization degenerates to the identity,
                // so skip clipping entirely
                luts.push(identity_lut());
                continue;
            }
            let limit = ((params.clip_factor * tile_pixels as f64 / 256.0).floor() as u64).max(1);
            clip_and_redistribute(&mut counts, limit);
            luts.push(equalization_lut(&counts, counts.iter().sum()));
        }
    }

    // tile centers, as pixel-index midpoints of each tile span
    let centers_x: Vec<f64> = (0..tx)
        .map(|i| (x_edges[i] + x_edges[i + 1] - 1) as f64 / 2.0)
        .collect();
    let centers_y: Vec<f64> = (0..ty)
        .map(|j| (y_edges[j] + y_edges[j + 1] - 1) as f64 / 2.0)
        .collect();
    let x_blend: Vec<(usize, usize, f64)> =
        (0..w).map(|x| blend_at(x as f64, &centers_x)).collect();
    let y_blend: Vec<(usize, usize, f64)> =
        (0..h).map(|y| blend_at(y as f64, &centers_y)).collect();

    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let (j0, j1, wy) = y_blend[y];
        for x in 0..w {
            let (i0, i1, wx) = x_blend[x];
            let v = plane.data()[y * w + x] as usize;
            let top = lerp(
                luts[j0 * tx + i0][v] as f64,
                luts[j0 * tx + i1][v] as f64,
                wx,
            );
            let bottom = lerp(
                luts[j1 * tx + i0][v] as f64,
                luts[j1 * tx + i1][v] as f64,
                wx,
            );
            out[y * w + x] = lerp(top, bottom, wy).round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(ImageBuffer::new(plane.width(), plane.height(), 1, out).expect("same geometry"))
}

/// Bracketing tile indices and blend weight for one output coordinate.
/// Coordinates outside the span of tile centers clamp to the nearest tile
/// with weight 0, which keeps border handling and the 1x1-grid case exact.
fn blend_at(coord: f64, centers: &[f64]) -> (usize, usize, f64) {
    let last = centers.len() - 1;
    if coord <= centers[0] {
        return (0, 0, 0.0);
    }
    if coord >= centers[last] {
        return (last, last, 0.0);
    }
    let lo = centers.partition_point(|&c| c <= coord) - 1;
    let hi = lo + 1;
    let weight = (coord - centers[lo]) / (centers[hi] - centers[lo]);
    (lo, hi, weight)
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    a * (1.0 - w) + b * w
}

fn identity_lut() -> [u8; 256] {
    let mut lut = [0u8; 256];
    for (k, v) in lut.iter_mut().enumerate() {
        *v = k as u8;
    }
    lut
}

/// Caps every bin at `limit` and spreads the clipped excess evenly over
/// all 256 bins, repeating while redistribution pushes bins back over the
/// cap. After the pass budget is spent, whatever excess remains is
/// dropped by a final clip.
fn clip_and_redistribute(counts: &mut [u64; 256], limit: u64) {
    for _ in 0..MAX_REDISTRIBUTION_PASSES {
        let mut excess = 0u64;
        for c in counts.iter_mut() {
            if *c > limit {
                excess += *c - limit;
                *c = limit;
            }
        }
        if excess == 0 {
            return;
        }
        let base = excess / 256;
        let remainder = (excess % 256) as usize;
        for (k, c) in counts.iter_mut().enumerate() {
            *c += base + u64::from(k < remainder);
        }
    }
    for c in counts.iter_mut() {
        *c = (*c).min(limit);
    }
}
