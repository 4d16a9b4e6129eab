//! The five contrast-enhancement techniques: histogram equalization,
//! CLAHE, image complement, adaptive gamma correction, and the balance
//! contrast enhancement technique (BCET).
//!
//! Every operation is a deterministic, pure map from image to image.
//! Techniques are addressable by the stable string ids `original`, `he`,
//! `clahe`, `complement`, `gamma`, and `bcet`.

mod clahe;

pub use clahe::{clahe, ClaheParams};

use crate::histogram::{self, HistogramError, ImageStats};
use crate::raster::ImageBuffer;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnhanceError {
    #[error("expected a single-channel plane, got {0} channels")]
    NotSingleChannel(u8),
    #[error("gamma weight {0} outside [0, 1)")]
    WeightOutOfRange(f64),
    #[error("tile grid produces a tile of {tile_pixels} pixels (minimum 16)")]
    TileTooSmall { tile_pixels: usize },
    #[error("invalid tile grid: {0}")]
    InvalidTileGrid(String),
    #[error("degenerate input: constant image has no contrast to stretch")]
    ConstantImage,
    #[error("singular fit: {0}")]
    SingularFit(&'static str),
    #[error("invalid targets: require min < mean < max, got {0}, {1}, {2}")]
    InvalidTargets(f64, f64, f64),
    #[error(transparent)]
    Histogram(#[from] HistogramError),
}

/// Weighting factor for adaptive gamma correction.
///
/// The upper bound is strict: weight 1 would zero the gamma exponent's
/// denominator at intensity 255.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    weight: f64,
}

impl GammaParams {
    pub fn new(weight: f64) -> Result<GammaParams, EnhanceError> {
        if !(0.0..1.0).contains(&weight) {
            return Err(EnhanceError::WeightOutOfRange(weight));
        }
        Ok(GammaParams { weight })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl Default for GammaParams {
    fn default() -> Self {
        GammaParams { weight: 0.5 }
    }
}

/// Output range targets for BCET: the stretched image hits minimum
/// `out_min`, maximum `out_max`, and population mean `out_mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcetTargets {
    pub out_min: f64,
    pub out_max: f64,
    pub out_mean: f64,
}

impl BcetTargets {
    pub fn new(out_min: f64, out_max: f64, out_mean: f64) -> Result<BcetTargets, EnhanceError> {
        if !(out_min < out_mean && out_mean < out_max) {
            return Err(EnhanceError::InvalidTargets(out_min, out_max, out_mean));
        }
        Ok(BcetTargets {
            out_min,
            out_max,
            out_mean,
        })
    }
}

impl Default for BcetTargets {
    fn default() -> Self {
        BcetTargets {
            out_min: 0.0,
            out_max: 255.0,
            out_mean: 110.0,
        }
    }
}

/// Coefficients of the BCET parabola `y = scale * (x - vertex)^2 + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcetCoefficients {
    pub scale: f64,
    pub vertex: f64,
    pub offset: f64,
}

impl BcetCoefficients {
    /// Pre-quantization parabola value at intensity `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let d = x - self.vertex;
        self.scale * (d * d) + self.offset
    }
}

/// The six compared enhancement conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Technique {
    Original,
    HistEq,
    Clahe,
    Complement,
    Gamma,
    Bcet,
}

impl Technique {
    pub const ALL: [Technique; 6] = [
        Technique::Original,
        Technique::HistEq,
        Technique::Clahe,
        Technique::Complement,
        Technique::Gamma,
        Technique::Bcet,
    ];

    /// Stable string id used by manifests, configs, and the CLI.
    pub fn id(self) -> &'static str {
        match self {
            Technique::Original => "original",
            Technique::HistEq => "he",
            Technique::Clahe => "clahe",
            Technique::Complement => "complement",
            Technique::Gamma => "gamma",
            Technique::Bcet => "bcet",
        }
    }

    pub fn from_id(id: &str) -> Option<Technique> {
        Technique::ALL.iter().copied().find(|t| t.id() == id)
    }
}

impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Per-technique parameters for a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnhanceParams {
    pub clahe: ClaheParams,
    pub gamma: GammaParams,
    pub bcet: BcetTargets,
}

/// Min-normalized equalization mapping shared by HE and the CLAHE tiles:
/// the darkest occupied bin maps to 0 and the brightest to 255. A
/// histogram with all mass in one bin yields the identity mapping, so
/// constant regions pass through unchanged.
pub(crate) fn equalization_lut(counts: &[u64; 256], total: u64) -> [u8; 256] {
    let mut lut = [0u8; 256];
    let min_occupied = match counts.iter().position(|&c| c > 0) {
        Some(k) => k,
        None => {
            for (k, v) in lut.iter_mut().enumerate() {
                *v = k as u8;
            }
            return lut;
        }
    };
    if counts[min_occupied] == total {
        for (k, v) in lut.iter_mut().enumerate() {
            *v = k as u8;
        }
        return lut;
    }
    let totalf = total as f64;
    let cdf_min = counts[min_occupied] as f64 / totalf;
    let scale = 255.0 / (1.0 - cdf_min);
    let mut running = 0u64;
    for (k, &c) in counts.iter().enumerate() {
        running += c;
        let cdf = running as f64 / totalf;
        lut[k] = (scale * (cdf - cdf_min)).round().clamp(0.0, 255.0) as u8;
    }
    lut
}

/// Histogram equalization of a single-channel plane through the
/// min-normalized CDF remap. Constant planes are returned unchanged.
pub fn hist_equalize(plane: &ImageBuffer) -> Result<ImageBuffer, EnhanceError> {
    let hist = histogram::compute_histogram(plane)?;
    Ok(plane.apply_lut(&equalization_lut(hist.counts(), hist.total())))
}

/// Per-sample inversion `y = 255 - x`, channel-wise. An exact involution.
pub fn complement(img: &ImageBuffer) -> ImageBuffer {
    let mut lut = [0u8; 256];
    for (k, v) in lut.iter_mut().enumerate() {
        *v = 255 - k as u8;
    }
    img.apply_lut(&lut)
}

/// Real-valued adaptive gamma map over [0, 255]:
/// `g(x) = 255 * (x/255)^(1/gamma(x))` with
/// `gamma(x) = 1 + weight * cos(pi * x / 255)`.
///
/// Fixes 0 and 255 for every weight in [0, 1).
pub fn gamma_map_value(x: f64, weight: f64) -> f64 {
    let midpoint = 127.5;
    let phase = std::f64::consts::PI * x / (2.0 * midpoint);
    let gamma = 1.0 + weight * phase.cos();
    255.0 * (x / 255.0).powf(1.0 / gamma)
}

/// Adaptive gamma correction of a single-channel plane: each intensity is
/// mapped through [`gamma_map_value`], rounded, and clamped.
pub fn gamma_correct(plane: &ImageBuffer, params: &GammaParams) -> Result<ImageBuffer, EnhanceError> {
    if plane.channels() != 1 {
        return Err(EnhanceError::NotSingleChannel(plane.channels()));
    }
    let mut lut = [0u8; 256];
    for (k, v) in lut.iter_mut().enumerate() {
        *v = gamma_map_value(k as f64, params.weight)
            .round()
            .clamp(0.0, 255.0) as u8;
    }
    Ok(plane.apply_lut(&lut))
}

/// Fits the BCET parabola so the output hits the target minimum, maximum,
/// and mean given the input plane's statistics. The mean constraint uses
/// the population mean-square of the input.
pub fn bcet_fit(stats: &ImageStats, targets: &BcetTargets) -> Result<BcetCoefficients, EnhanceError> {
    let (l, h, e, s) = (stats.min, stats.max, stats.mean, stats.mean_sq);
    let (lo, hi, mean) = (targets.out_min, targets.out_max, targets.out_mean);
    if h <= l {
        return Err(EnhanceError::ConstantImage);
    }
    let denom_vertex = 2.0 * (h * (mean - lo) - e * (hi - lo) + l * (hi - mean));
    if denom_vertex == 0.0 {
        return Err(EnhanceError::SingularFit("vertex denominator is zero"));
    }
    let vertex = (h * h * (mean - lo) - s * (hi - lo) + l * l * (hi - mean)) / denom_vertex;
    let denom_scale = (h - l) * (h + l - 2.0 * vertex);
    if denom_scale == 0.0 {
        return Err(EnhanceError::SingularFit("scale denominator is zero"));
    }
    let scale = (hi - lo) / denom_scale;
    let offset = lo - scale * (l - vertex) * (l - vertex);
    if !(scale.is_finite() && vertex.is_finite() && offset.is_finite()) {
        return Err(EnhanceError::SingularFit("coefficients are not finite"));
    }
    let coeffs = BcetCoefficients {
        scale,
        vertex,
        offset,
    };
    debug_assert!((coeffs.eval(l) - lo).abs() < 1e-6);
    debug_assert!((coeffs.eval(h) - hi).abs() < 1e-6);
    Ok(coeffs)
}

/// Applies a fitted BCET parabola to a plane, rounding and clamping each
/// output to [0, 255] only after the real-valued evaluation.
pub fn bcet_apply(plane: &ImageBuffer, coeffs: &BcetCoefficients) -> Result<ImageBuffer, EnhanceError> {
    if plane.channels() != 1 {
        return Err(EnhanceError::NotSingleChannel(plane.channels()));
    }
    let mut lut = [0u8; 256];
    for (k, v) in lut.iter_mut().enumerate() {
        *v = coeffs.eval(k as f64).round().clamp(0.0, 255.0) as u8;
    }
    Ok(plane.apply_lut(&lut))
}

/// Runs one technique on a 1- or 3-channel image. HE, gamma, and BCET act
/// on each channel independently; CLAHE routes 3-channel input through HSV;
/// complement is channel-wise by definition.
pub fn apply_technique(
    img: &ImageBuffer,
    technique: Technique,
    params: &EnhanceParams,
) -> Result<ImageBuffer, EnhanceError> {
    match technique {
        Technique::Original => Ok(img.clone()),
        Technique::Complement => Ok(complement(img)),
        Technique::Clahe => clahe(img, &params.clahe),
        Technique::HistEq => per_plane(img, hist_equalize),
        Technique::Gamma => per_plane(img, |p| gamma_correct(p, &params.gamma)),
        Technique::Bcet => per_plane(img, |p| {
            let stats = histogram::image_stats(p)?;
            bcet_apply(p, &bcet_fit(&stats, &params.bcet)?)
        }),
    }
}

fn per_plane<F>(img: &ImageBuffer, op: F) -> Result<ImageBuffer, EnhanceError>
where
    F: Fn(&ImageBuffer) -> Result<ImageBuffer, EnhanceError>,
{
    if img.channels() == 1 {
        return op(img);
    }
    let planes = img
        .split_channels()
        .iter()
        .map(&op)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ImageBuffer::from_planes(&planes).expect("planes came from split_channels"))
}
