//! Intensity histograms, cumulative distributions, and scalar image
//! statistics feeding histogram equalization, CLAHE, and BCET.

use crate::raster::ImageBuffer;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HistogramError {
    #[error("plane is empty")]
    EmptyPlane,
    #[error("expected a single-channel plane, got {0} channels")]
    NotSingleChannel(u8),
}

/// 256-bin intensity tally of one image plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: [u64; 256],
    total: u64,
}

impl Histogram {
    /// Builds directly from raw samples. `samples` must be nonempty.
    pub fn from_samples(samples: &[u8]) -> Result<Histogram, HistogramError> {
        if samples.is_empty() {
            return Err(HistogramError::EmptyPlane);
        }
        let mut counts = [0u64; 256];
        for &v in samples {
            counts[v as usize] += 1;
        }
        Ok(Histogram {
            counts,
            total: samples.len() as u64,
        })
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Lowest intensity with a nonzero count.
    pub fn min_occupied(&self) -> usize {
        self.counts.iter().position(|&c| c > 0).unwrap_or(0)
    }
}

/// Scalar statistics of one plane: extremes plus the first two raw moments,
/// accumulated in f64 without intermediate rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageStats {
    /// Minimum intensity.
    pub min: f64,
    /// Maximum intensity.
    pub max: f64,
    /// Population mean intensity.
    pub mean: f64,
    /// Population mean of squared intensities.
    pub mean_sq: f64,
}

/// Counts pixels per intensity level over a single-channel plane.
pub fn compute_histogram(plane: &ImageBuffer) -> Result<Histogram, HistogramError> {
    if plane.channels() != 1 {
        return Err(HistogramError::NotSingleChannel(plane.channels()));
    }
    Histogram::from_samples(plane.data())
}

/// Cumulative distribution of a histogram: `cdf[k] = sum(counts[..=k]) / total`.
/// Nondecreasing with `cdf[255] == 1`.
pub fn normalized_cdf(hist: &Histogram) -> [f64; 256] {
    let mut cdf = [0.0f64; 256];
    let total = hist.total() as f64;
    let mut running = 0u64;
    for (k, &c) in hist.counts().iter().enumerate() {
        running += c;
        cdf[k] = running as f64 / total;
    }
    cdf
}

/// Min, max, population mean, and population mean-square of a plane.
pub fn image_stats(plane: &ImageBuffer) -> Result<ImageStats, HistogramError> {
    if plane.channels() != 1 {
        return Err(HistogramError::NotSingleChannel(plane.channels()));
    }
    let data = plane.data();
    if data.is_empty() {
        return Err(HistogramError::EmptyPlane);
    }
    let mut min = u8::MAX;
    let mut max = u8::MIN;
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for &v in data {
        min = min.min(v);
        max = max.max(v);
        let f = v as f64;
        sum += f;
        sum_sq += f * f;
    }
    let n = data.len() as f64;
    Ok(ImageStats {
        min: min as f64,
        max: max as f64,
        mean: sum / n,
        mean_sq: sum_sq / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(w: u32, h: u32, data: Vec<u8>) -> ImageBuffer {
        ImageBuffer::new(w, h, 1, data).unwrap()
    }

    #[test]
    fn tallies_distinct_levels() {
        let hist = compute_histogram(&plane(2, 2, vec![0, 85, 170, 255])).unwrap();
        for k in [0usize, 85, 170, 255] {
            assert_eq!(hist.counts()[k], 1);
        }
        assert_eq!(hist.total(), 4);
        assert_eq!(hist.counts().iter().sum::<u64>(), 4);
    }

    #[test]
    fn constant_plane_single_bin() {
        let hist = compute_histogram(&plane(3, 3, vec![7; 9])).unwrap();
        assert_eq!(hist.counts()[7], 9);
        assert_eq!(hist.counts().iter().sum::<u64>(), 9);
        assert_eq!(hist.min_occupied(), 7);
    }

    #[test]
    fn rejects_empty_sample_slice() {
        assert_eq!(
            Histogram::from_samples(&[]).unwrap_err(),
            HistogramError::EmptyPlane
        );
    }

    #[test]
    fn rejects_multichannel_input() {
        let rgb = ImageBuffer::filled(2, 2, 3, 0).unwrap();
        assert_eq!(
            compute_histogram(&rgb),
            Err(HistogramError::NotSingleChannel(3))
        );
    }

    #[test]
    fn cdf_of_mass_at_zero() {
        let hist = compute_histogram(&plane(2, 2, vec![0; 4])).unwrap();
        let cdf = normalized_cdf(&hist);
        assert!(cdf.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn cdf_of_uniform_histogram() {
        let data: Vec<u8> = (0..=255).collect();
        let hist = compute_histogram(&plane(16, 16, data)).unwrap();
        let cdf = normalized_cdf(&hist);
        for (k, &v) in cdf.iter().enumerate() {
            assert!((v - (k as f64 + 1.0) / 256.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_two_level_plane() {
        let hist = compute_histogram(&plane(2, 2, vec![10, 10, 200, 200])).unwrap();
        let cdf = normalized_cdf(&hist);
        for &v in &cdf[10..200] {
            assert_eq!(v, 0.5);
        }
        for &v in &cdf[200..] {
            assert_eq!(v, 1.0);
        }
        assert_eq!(cdf[9], 0.0);
    }

    #[test]
    fn stats_worked_example() {
        let s = image_stats(&plane(5, 1, vec![0, 50, 100, 150, 200])).unwrap();
        assert_eq!(s.min, 0.0);
        assert_eq!(s.max, 200.0);
        assert_eq!(s.mean, 100.0);
        // (0 + 2500 + 10000 + 22500 + 40000) / 5
        assert_eq!(s.mean_sq, 15000.0);
    }

    #[test]
    fn stats_constant_plane() {
        let s = image_stats(&plane(4, 1, vec![9; 4])).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.mean_sq), (9.0, 9.0, 9.0, 81.0));
    }
}
