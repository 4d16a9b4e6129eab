//! Chest X-ray preprocessing and enhancement toolkit.
//!
//! Provides the pixel container and file I/O ([`raster`]), histogram and
//! image statistics ([`histogram`]), five contrast-enhancement techniques
//! ([`enhance`]), geometric/statistical preprocessing ([`preprocess`]),
//! classification and mask-overlap metrics ([`metrics`]), and the
//! manifest/fold-plan machinery for dataset splits ([`dataset`]).

pub mod dataset;
pub mod enhance;
pub mod histogram;
pub mod metrics;
pub mod preprocess;
pub mod raster;
pub mod seeded;

pub use dataset::{fold_counts, make_folds, parse_manifest, FoldPlan, Manifest, Role};
pub use enhance::{
    bcet_apply, bcet_fit, clahe, complement, gamma_correct, hist_equalize, BcetCoefficients,
    BcetTargets, ClaheParams, GammaParams, Technique,
};
pub use histogram::{compute_histogram, image_stats, normalized_cdf, Histogram, ImageStats};
pub use metrics::{
    classification_report, confusion_from_pairs, seg_overlap_scores, time_block,
    ClassificationReport, ConfusionMatrix, SegScores, TimingStats,
};
pub use preprocess::{
    apply_mask, augment_rotations, resize_bilinear, rotate, zscore_normalize, AugmentSpec,
    BinaryMask, ResizeSpec,
};
pub use raster::{
    decode_image, encode_image, hsv_to_rgb, rgb_to_hsv, FloatImage, HsvPixel, ImageBuffer,
    ImageFormat, RasterError,
};
